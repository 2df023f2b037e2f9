#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <random>

#include "doctest.h"
#include "samiqa/spectral.hpp"
#include "test_util.hpp"

using namespace samiqa;
using testutil::gradient_rel_err;
using testutil::random_tensor;

namespace {

// brute-force circular convolution on one channel
std::vector<double> circular_conv(const std::vector<double>& x, const std::vector<double>& h,
                                  std::size_t height, std::size_t width) {
    std::vector<double> out(height * width, 0.0);
    for (std::size_t y = 0; y < height; ++y) {
        for (std::size_t xx = 0; xx < width; ++xx) {
            double acc = 0.0;
            for (std::size_t ky = 0; ky < height; ++ky) {
                for (std::size_t kx = 0; kx < width; ++kx) {
                    acc += x[ky * width + kx] *
                           h[((y + height - ky) % height) * width + ((xx + width - kx) % width)];
                }
            }
            out[y * width + xx] = acc;
        }
    }
    return out;
}

Tensor identity_spectral_weight(std::size_t c2) {
    Tensor w = Tensor::zeros({c2, c2, 1, 1}, true);
    for (std::size_t i = 0; i < c2; ++i) w.data()[i * c2 + i] = 1.0;
    return w;
}

}  // namespace

TEST_CASE("delta image transforms to all-ones spectrum") {
    Tensor x = Tensor::zeros({1, 4, 4});
    x.data()[0] = 1.0;
    Spectrum s = rfft2(x);
    for (std::size_t i = 0; i < s.bins(); ++i) {
        CHECK(s.re[i] == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(s.im[i] == doctest::Approx(0.0).epsilon(1e-12));
    }
}

TEST_CASE("constant image has only a DC bin") {
    const double v = 0.37;
    Tensor x = Tensor::full({1, 8, 8}, v);
    Spectrum s = rfft2(x);
    CHECK(s.re[0] == doctest::Approx(v * 64.0).epsilon(1e-12));
    CHECK(s.im[0] == doctest::Approx(0.0).epsilon(1e-10));
    for (std::size_t i = 1; i < s.bins(); ++i) {
        CHECK(std::fabs(s.re[i]) < 1e-10);
        CHECK(std::fabs(s.im[i]) < 1e-10);
    }
}

TEST_CASE("non power-of-two extents rejected") {
    CHECK_THROWS_AS(rfft2(Tensor::zeros({1, 6, 8})), std::invalid_argument);
    CHECK_THROWS_AS(rfft2(Tensor::zeros({1, 8, 12})), std::invalid_argument);
}

TEST_CASE("Parseval identity on random input") {
    Tensor x = random_tensor({1, 8, 8}, 42, false);
    Spectrum s = rfft2(x);
    double spatial = 0.0;
    for (double v : x.data()) spatial += v * v;
    // sum over the full mirrored spectrum
    double spectral = 0.0;
    const std::size_t h = 8, w = 8, wb = s.width_bins;
    for (std::size_t u = 0; u < h; ++u) {
        for (std::size_t v = 0; v < w; ++v) {
            const std::size_t su = v < wb ? u : (h - u) % h;
            const std::size_t sv = v < wb ? v : w - v;
            spectral += s.re[su * wb + sv] * s.re[su * wb + sv] +
                        s.im[su * wb + sv] * s.im[su * wb + sv];
        }
    }
    CHECK(spatial == doctest::Approx(spectral / double(h * w)).epsilon(1e-9));
}

TEST_CASE("roundtrip up to 64x64") {
    for (std::size_t h : {4, 8, 16, 32, 64}) {
        for (std::size_t w : {4, 16, 64}) {
            Tensor x = random_tensor({2, h, w}, h * 100 + w, false);
            Tensor y = irfft2(rfft2(x), h, w);
            double max_err = 0.0;
            for (std::size_t i = 0; i < x.size(); ++i) {
                max_err = std::max(max_err, std::fabs(x.data()[i] - y.data()[i]));
            }
            CHECK(max_err < 1e-10);
        }
    }
}

TEST_CASE("pointwise multiplication by all-ones spectrum is identity") {
    Tensor x = random_tensor({1, 8, 8}, 9, false);
    Spectrum s = rfft2(x);
    Spectrum ones;
    ones.channels = 1;
    ones.height = 8;
    ones.width_bins = 5;
    ones.re.assign(ones.bins(), 1.0);
    ones.im.assign(ones.bins(), 0.0);
    Spectrum p = spectral_pointwise_mul(s, ones);
    CHECK(p.re == s.re);
    CHECK(p.im == s.im);
}

TEST_CASE("shifted delta spectrum circularly shifts the signal") {
    Tensor x = random_tensor({1, 8, 8}, 17, false);
    Tensor delta = Tensor::zeros({1, 8, 8});
    delta.data()[2 * 8 + 3] = 1.0;  // shift by (2,3)
    Tensor y = irfft2(spectral_pointwise_mul(rfft2(x), rfft2(delta)), 8, 8);
    for (std::size_t r = 0; r < 8; ++r) {
        for (std::size_t c = 0; c < 8; ++c) {
            CHECK(y.data()[r * 8 + c] ==
                  doctest::Approx(x.data()[((r + 8 - 2) % 8) * 8 + (c + 8 - 3) % 8])
                      .epsilon(1e-9));
        }
    }
}

TEST_CASE("convolution theorem against brute-force circular convolution") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        Tensor x = random_tensor({1, 8, 8}, rng(), false);
        Tensor h = random_tensor({1, 8, 8}, rng(), false);
        Tensor y = irfft2(spectral_pointwise_mul(rfft2(x), rfft2(h)), 8, 8);
        auto expect = circular_conv(x.data(), h.data(), 8, 8);
        for (std::size_t i = 0; i < expect.size(); ++i) {
            CHECK(y.data()[i] == doctest::Approx(expect[i]).epsilon(1e-9));
        }
    }
}

TEST_CASE("fourier_conv identity mixing in linear mode") {
    Tensor x = random_tensor({2, 8, 8}, 21, false);
    Tensor w = identity_spectral_weight(4);
    Tensor b = Tensor::zeros({4}, true);
    Tensor y = fourier_conv(x, w, b, true);
    for (std::size_t i = 0; i < x.size(); ++i) {
        CHECK(y.data()[i] == doctest::Approx(x.data()[i]).epsilon(1e-9));
    }
}

TEST_CASE("fourier_conv annihilates with zero weights") {
    Tensor x = random_tensor({1, 8, 8}, 22, false);
    Tensor w = Tensor::zeros({2, 2, 1, 1}, true);
    Tensor b = Tensor::zeros({2}, true);
    Tensor y = fourier_conv(x, w, b);
    for (double v : y.data()) CHECK(v == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("fourier_conv rejects wrong channel counts") {
    Tensor x = Tensor::zeros({2, 8, 8});
    CHECK_THROWS_AS(fourier_conv(x, Tensor::zeros({2, 2, 1, 1}), Tensor::zeros({2})),
                    std::invalid_argument);
}

TEST_CASE("fourier_conv gradient matches finite differences") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        Tensor x = random_tensor({1, 8, 8}, seed + 31);
        Tensor w = random_tensor({2, 2, 1, 1}, seed + 57);
        Tensor b = random_tensor({2}, seed + 91);
        // square the output: the plain mean only sees the DC bin, which the
        // ReLU can clamp into a locally flat (zero-gradient) objective
        auto f = [&]() {
            Tensor y = fourier_conv(x, w, b);
            return mean(mul(y, y));
        };
        CHECK(gradient_rel_err(f, x) < 1e-5);
        CHECK(gradient_rel_err(f, w) < 1e-5);
        CHECK(gradient_rel_err(f, b) < 1e-5);
    }
}

TEST_CASE("fourier_conv has a global receptive field") {
    Tensor x = random_tensor({1, 16, 16}, 62, false);
    Tensor w = random_tensor({2, 2, 1, 1}, 63, false);
    Tensor b = random_tensor({2}, 64, false);
    Tensor base = fourier_conv(x, w, b);
    x.data()[5 * 16 + 11] += 0.25;  // single-pixel perturbation
    Tensor bumped = fourier_conv(x, w, b);
    std::size_t changed = 0;
    for (std::size_t i = 0; i < base.size(); ++i) {
        if (std::fabs(base.data()[i] - bumped.data()[i]) > 1e-12) ++changed;
    }
    CHECK(double(changed) >= 0.99 * double(base.size()));
}
