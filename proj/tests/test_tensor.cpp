#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <random>

#include "doctest.h"
#include "samiqa/tensor.hpp"
#include "test_util.hpp"

using namespace samiqa;
using testutil::gradient_rel_err;
using testutil::random_tensor;

namespace {

// quadruple-loop reference convolution, independent of conv2d
std::vector<double> naive_conv(const Tensor& x, const Tensor& w, const Tensor& b,
                               std::size_t stride, std::size_t padding) {
    const std::size_t ci = x.extent(0), h = x.extent(1), wd = x.extent(2);
    const std::size_t co = w.extent(0), k = w.extent(2);
    const std::size_t oh = (h + 2 * padding - k) / stride + 1;
    const std::size_t ow = (wd + 2 * padding - k) / stride + 1;
    std::vector<double> out(co * oh * ow, 0.0);
    for (std::size_t oc = 0; oc < co; ++oc) {
        for (std::size_t oy = 0; oy < oh; ++oy) {
            for (std::size_t ox = 0; ox < ow; ++ox) {
                double acc = b.data()[oc];
                for (std::size_t ic = 0; ic < ci; ++ic) {
                    for (std::size_t ky = 0; ky < k; ++ky) {
                        for (std::size_t kx = 0; kx < k; ++kx) {
                            const long iy = long(oy * stride + ky) - long(padding);
                            const long ix = long(ox * stride + kx) - long(padding);
                            if (iy < 0 || iy >= long(h) || ix < 0 || ix >= long(wd)) continue;
                            acc += x.data()[(ic * h + iy) * wd + ix] *
                                   w.data()[((oc * ci + ic) * k + ky) * k + kx];
                        }
                    }
                }
                out[(oc * oh + oy) * ow + ox] = acc;
            }
        }
    }
    return out;
}

}  // namespace

TEST_CASE("elementwise ops match their definitions") {
    Tensor a({2}, {1, 2}), b({2}, {3, 4});
    CHECK(add(a, b).data() == std::vector<double>{4, 6});
    CHECK(sub(b, a).data() == std::vector<double>{2, 2});
    CHECK(mul(a, b).data() == std::vector<double>{3, 8});
    CHECK(relu(Tensor({3}, {-1, 0, 2})).data() == std::vector<double>{0, 0, 2});
    CHECK(abs(Tensor({3}, {-1.5, 0, 2})).data() == std::vector<double>{1.5, 0, 2});
}

TEST_CASE("shape mismatch names both shapes") {
    Tensor a({2}, {1, 2}), b({3}, {1, 2, 3});
    CHECK_THROWS_WITH_AS(add(a, b), doctest::Contains("[2]"), std::invalid_argument);
    CHECK_THROWS_WITH_AS(add(a, b), doctest::Contains("[3]"), std::invalid_argument);
}

TEST_CASE("broadcast over leading batch axis only") {
    Tensor batch({2, 3}, {1, 2, 3, 4, 5, 6});
    Tensor bias({3}, {10, 20, 30});
    CHECK(add(batch, bias).data() == std::vector<double>{11, 22, 33, 14, 25, 36});
    Tensor wrong({2}, {1, 2});
    CHECK_THROWS_AS(add(batch, wrong), std::invalid_argument);
}

TEST_CASE("matmul identity") {
    Tensor eye({3, 3}, {1, 0, 0, 0, 1, 0, 0, 0, 1});
    Tensor a = random_tensor({3, 3}, 11, false);
    CHECK(matmul(eye, a).data() == a.data());
}

TEST_CASE("matmul vector form") {
    Tensor m({2, 3}, {1, 2, 3, 4, 5, 6});
    Tensor v({3}, {1, 1, 1});
    Tensor r = matmul(m, v);
    CHECK(r.shape() == std::vector<std::size_t>{2});
    CHECK(r.data() == std::vector<double>{6, 15});
}

TEST_CASE("concat along channel axis") {
    Tensor a({1, 2, 2}, {1, 2, 3, 4});
    Tensor b({2, 2, 2}, {5, 6, 7, 8, 9, 10, 11, 12});
    Tensor c = concat({a, b}, 0);
    CHECK(c.shape() == std::vector<std::size_t>{3, 2, 2});
    CHECK(c.data() == std::vector<double>{1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12});
}

TEST_CASE("conv2d 1x1 identity kernel") {
    Tensor x = random_tensor({1, 4, 4}, 3, false);
    Tensor w({1, 1, 1, 1}, {1.0});
    Tensor b({1}, {0.0});
    CHECK(conv2d(x, w, b).data() == x.data());
}

TEST_CASE("conv2d all-ones window sum") {
    Tensor x = Tensor::full({1, 3, 3}, 1.0);
    Tensor w = Tensor::full({1, 1, 3, 3}, 1.0);
    Tensor b({1}, {0.0});
    Tensor y = conv2d(x, w, b, 1, 1);  // same padding
    CHECK(y.shape() == std::vector<std::size_t>{1, 3, 3});
    CHECK(y.data()[4] == doctest::Approx(9.0).epsilon(1e-14));
}

TEST_CASE("conv2d equals quadruple-loop oracle") {
    for (std::uint64_t seed : {1, 2, 3}) {
        Tensor x = random_tensor({1, 4, 4}, seed, false);
        Tensor w = random_tensor({2, 1, 3, 3}, seed + 100, false);
        Tensor b = random_tensor({2}, seed + 200, false);
        for (std::size_t padding : {std::size_t{0}, std::size_t{1}}) {
            Tensor y = conv2d(x, w, b, 1, padding);
            auto expect = naive_conv(x, w, b, 1, padding);
            REQUIRE(y.data().size() == expect.size());
            for (std::size_t i = 0; i < expect.size(); ++i) {
                CHECK(y.data()[i] == doctest::Approx(expect[i]).epsilon(1e-12));
            }
        }
    }
}

TEST_CASE("conv2d channel mismatch") {
    Tensor x = Tensor::zeros({2, 4, 4});
    Tensor w = Tensor::zeros({1, 3, 3, 3});
    Tensor b = Tensor::zeros({1});
    CHECK_THROWS_WITH_AS(conv2d(x, w, b), doctest::Contains("channels"),
                         std::invalid_argument);
}

TEST_CASE("adaptive_avg_pool2d block means") {
    CHECK(adaptive_avg_pool2d(Tensor::full({1, 4, 4}, 1.0), 2, 2).data() ==
          std::vector<double>(4, 1.0));
    Tensor x({1, 2, 2}, {1, 2, 3, 4});
    CHECK(adaptive_avg_pool2d(x, 1, 1).data() == std::vector<double>{2.5});
    CHECK(adaptive_avg_pool2d(x, 2, 2).data() == x.data());  // identity
    CHECK_THROWS_AS(adaptive_avg_pool2d(x, 0, 1), std::invalid_argument);
}

TEST_CASE("adaptive_avg_pool2d uneven windows") {
    Tensor x({1, 1, 3}, {1, 2, 3});
    Tensor y = adaptive_avg_pool2d(x, 1, 2);
    // windows [0,2) and [1,3)
    CHECK(y.data()[0] == doctest::Approx(1.5));
    CHECK(y.data()[1] == doctest::Approx(2.5));
}

TEST_CASE("mean_abs_per_channel hand cases") {
    Tensor a = random_tensor({2, 2, 2}, 5, false);
    CHECK(mean_abs_per_channel(a, a).data() == std::vector<double>{0, 0});
    CHECK(mean_abs_per_channel(Tensor::zeros({2, 2, 2}), Tensor::full({2, 2, 2}, 1.0)).data() ==
          std::vector<double>{1.0, 1.0});
    Tensor c({1, 1, 2}, {0, 2}), d({1, 1, 2}, {1, 1});
    CHECK(mean_abs_per_channel(c, d).data() == std::vector<double>{1.0});
}

TEST_CASE("backward hand cases") {
    SUBCASE("x*x at 3") {
        Tensor x = Tensor::scalar(3.0, true);
        Tape tape;
        tape.backward(mul(x, x));
        CHECK(x.grad()[0] == doctest::Approx(6.0).epsilon(1e-14));
    }
    SUBCASE("sum(relu(x)) at [-1,2]") {
        Tensor x({2}, {-1, 2}, true);
        Tape tape;
        tape.backward(sum(relu(x)));
        CHECK(x.grad() == std::vector<double>{0, 1});
    }
    SUBCASE("non-scalar output rejected") {
        Tensor x({2}, {1, 2}, true);
        Tape tape;
        Tensor y = relu(x);
        CHECK_THROWS_AS(tape.backward(y), std::invalid_argument);
    }
    SUBCASE("grads accumulate until zeroed") {
        Tensor x = Tensor::scalar(3.0, true);
        for (int i = 0; i < 2; ++i) {
            Tape tape;
            tape.backward(mul(x, x));
        }
        CHECK(x.grad()[0] == doctest::Approx(12.0));
        x.zero_grad();
        CHECK(x.grad()[0] == 0.0);
    }
}

TEST_CASE("gradient fidelity against finite differences") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        SUBCASE(("seed " + std::to_string(seed)).c_str()) {
            Tensor x = random_tensor({2, 4, 4}, seed);
            Tensor w = random_tensor({3, 2, 3, 3}, seed + 50);
            Tensor b = random_tensor({3}, seed + 90);

            auto composite = [&]() {
                Tensor y = relu(conv2d(x, w, b, 1, 1));
                Tensor p = adaptive_avg_pool2d(y, 2, 2);
                return mean(mul(p, p));
            };
            CHECK(gradient_rel_err(composite, x) < 1e-5);
            CHECK(gradient_rel_err(composite, w) < 1e-5);
            CHECK(gradient_rel_err(composite, b) < 1e-5);
        }
    }
}

TEST_CASE("gradient fidelity of matmul/concat/reshape/sigmoid") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        Tensor a = random_tensor({3, 4}, seed);
        Tensor v = random_tensor({4}, seed + 7);
        auto f = [&]() {
            Tensor h = sigmoid(matmul(a, v));
            Tensor c = concat({h, reshape(h, {3})}, 0);
            return mean(c);
        };
        CHECK(gradient_rel_err(f, a) < 1e-5);
        CHECK(gradient_rel_err(f, v) < 1e-5);
    }
}

TEST_CASE("backward linearity") {
    Tensor x = random_tensor({2, 3, 3}, 77);
    const double alpha = 1.7, beta = -0.4;

    auto grad_of = [&](const std::function<Tensor()>& fn) {
        Tape tape;
        tape.backward(fn());
        auto g = x.grad();
        x.zero_grad();
        return g;
    };
    auto f = [&]() { return mean(mul(x, x)); };
    auto g = [&]() { return sum(relu(x)); };
    auto combo = [&]() { return add(scale(f(), alpha), scale(g(), beta)); };

    auto gf = grad_of(f), gg = grad_of(g), gc = grad_of(combo);
    for (std::size_t i = 0; i < x.size(); ++i) {
        CHECK(gc[i] == doctest::Approx(alpha * gf[i] + beta * gg[i]).epsilon(1e-12));
    }
}

TEST_CASE("determinism of forward and backward") {
    auto run = [](std::uint64_t seed) {
        Tensor x = random_tensor({2, 4, 4}, seed);
        Tensor w = random_tensor({2, 2, 3, 3}, seed + 1);
        Tensor b = random_tensor({2}, seed + 2);
        Tape tape;
        tape.backward(mean(relu(conv2d(x, w, b, 1, 1))));
        return std::make_pair(x.grad(), w.grad());
    };
    auto [xg1, wg1] = run(123);
    auto [xg2, wg2] = run(123);
    CHECK(xg1 == xg2);
    CHECK(wg1 == wg2);
}
