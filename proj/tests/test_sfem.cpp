#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"
#include "samiqa/sfem.hpp"
#include "test_util.hpp"

using namespace samiqa;
using testutil::gradient_rel_err;
using testutil::random_tensor;

namespace {

SfemConfig small_cfg() {
    SfemConfig cfg;
    cfg.scales = 2;
    cfg.channels = 2;
    cfg.pooled_extent = 2;
    return cfg;
}

}  // namespace

TEST_CASE("pyramid with one scale is the input") {
    Tensor f = random_tensor({2, 8, 8}, 1, false);
    auto pyr = build_pyramid(f, 1);
    REQUIRE(pyr.size() == 1);
    CHECK(pyr[0].data() == f.data());
}

TEST_CASE("pyramid of ones stays ones") {
    auto pyr = build_pyramid(Tensor::full({1, 16, 16}, 1.0), 3);
    REQUIRE(pyr.size() == 3);
    CHECK(pyr[1].shape() == std::vector<std::size_t>{1, 8, 8});
    CHECK(pyr[2].shape() == std::vector<std::size_t>{1, 4, 4});
    for (const auto& level : pyr) {
        for (double v : level.data()) CHECK(v == 1.0);
    }
}

TEST_CASE("checkerboard averages to a flat half level") {
    std::vector<double> data(16 * 16);
    for (std::size_t y = 0; y < 16; ++y) {
        for (std::size_t x = 0; x < 16; ++x) data[y * 16 + x] = double((x + y) % 2);
    }
    auto pyr = build_pyramid(Tensor({1, 16, 16}, std::move(data)), 2);
    for (double v : pyr[1].data()) CHECK(v == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("pyramid extent underflow") {
    CHECK_THROWS_WITH_AS(build_pyramid(Tensor::full({1, 2, 2}, 1.0), 3),
                         doctest::Contains("underflow"), std::invalid_argument);
}

TEST_CASE("spatial branch with zero weights gives zero map") {
    SfemParams p = init_sfem_params(small_cfg(), 3);
    for (double& v : p.per_scale[0].conv2_w.data()) v = 0.0;
    Tensor out = spatial_branch(random_tensor({2, 8, 8}, 4, false), p.per_scale[0]);
    for (double v : out.data()) CHECK(v == 0.0);
}

TEST_CASE("spatial branch identity kernel config applies ReLU twice") {
    SfemConfig cfg = small_cfg();
    SfemParams p = init_sfem_params(cfg, 3);
    for (auto* w : {&p.per_scale[0].conv1_w, &p.per_scale[0].conv2_w}) {
        std::fill(w->data().begin(), w->data().end(), 0.0);
        // center tap of the matching in/out channel
        for (std::size_t c = 0; c < 2; ++c) w->data()[((c * 2 + c) * 3 + 1) * 3 + 1] = 1.0;
    }
    Tensor f = random_tensor({2, 8, 8}, 5, false);
    Tensor out = spatial_branch(f, p.per_scale[0]);
    for (std::size_t i = 0; i < f.size(); ++i) {
        CHECK(out.data()[i] == doctest::Approx(std::max(0.0, f.data()[i])).epsilon(1e-14));
    }
}

TEST_CASE("branch gradients match finite differences") {
    SfemParams p = init_sfem_params(small_cfg(), 6);
    Tensor f = random_tensor({2, 8, 8}, 7);
    auto spatial = [&]() { return mean(spatial_branch(f, p.per_scale[0])); };
    auto frequency = [&]() {
        Tensor y = frequency_branch(f, p.per_scale[0]);
        return mean(mul(y, y));  // plain mean only sees the DC bin
    };
    CHECK(gradient_rel_err(spatial, f) < 1e-5);
    CHECK(gradient_rel_err(frequency, f) < 1e-5);
    CHECK(gradient_rel_err(spatial, p.per_scale[0].conv1_w) < 1e-5);
    CHECK(gradient_rel_err(frequency, p.per_scale[0].fft_w) < 1e-5);
}

TEST_CASE("degenerate config returns branch outputs directly") {
    SfemConfig cfg;
    cfg.scales = 1;
    cfg.channels = 2;
    cfg.pooled_extent = 8;  // equals input extent
    SfemParams p = init_sfem_params(cfg, 9);
    Tensor f = random_tensor({2, 8, 8}, 10, false);
    SfemOutput out = sfem_forward(f, p, cfg);
    CHECK(out.spatial->data() == spatial_branch(f, p.per_scale[0]).data());
    CHECK(out.frequency->data() == frequency_branch(f, p.per_scale[0]).data());
}

TEST_CASE("output shapes follow scales and pooling") {
    SfemConfig cfg;
    cfg.scales = 3;
    cfg.channels = 16;
    cfg.pooled_extent = 4;
    SfemParams p = init_sfem_params(cfg, 11);
    Tensor f = random_tensor({16, 16, 16}, 12, false);
    SfemOutput out = sfem_forward(f, p, cfg);
    CHECK(out.spatial->shape() == std::vector<std::size_t>{48, 4, 4});
    CHECK(out.frequency->shape() == std::vector<std::size_t>{48, 4, 4});
}

TEST_CASE("siamese passes share one parameter set") {
    SfemConfig cfg = small_cfg();
    SfemParams p = init_sfem_params(cfg, 13);
    std::vector<const void*> first_ids, second_ids;
    p.visit([&](const std::string&, Tensor& t) { first_ids.push_back(t.id()); });

    Tensor lq = random_tensor({2, 8, 8}, 14, false);
    Tensor hq = random_tensor({2, 8, 8}, 15, false);
    sfem_forward(lq, p, cfg);
    sfem_forward(hq, p, cfg);
    p.visit([&](const std::string&, Tensor& t) { second_ids.push_back(t.id()); });
    CHECK(first_ids == second_ids);  // parameter identity, not value equality
}

TEST_CASE("swapping evaluation order changes nothing") {
    SfemConfig cfg = small_cfg();
    SfemParams p = init_sfem_params(cfg, 16);
    Tensor a = random_tensor({2, 8, 8}, 17, false);
    Tensor b = random_tensor({2, 8, 8}, 18, false);
    SfemOutput a_first = sfem_forward(a, p, cfg);
    sfem_forward(b, p, cfg);
    SfemOutput a_second = sfem_forward(a, p, cfg);
    CHECK(a_first.spatial->data() == a_second.spatial->data());
    CHECK(a_first.frequency->data() == a_second.frequency->data());
}

TEST_CASE("disabled branches are omitted, not zeroed") {
    SfemConfig cfg = small_cfg();
    SfemParams p = init_sfem_params(cfg, 19);
    Tensor f = random_tensor({2, 8, 8}, 20, false);

    SfemOutput only_b = sfem_forward(f, p, cfg, {true, false});
    CHECK(only_b.spatial.has_value());
    CHECK(!only_b.frequency.has_value());

    SfemOutput only_f = sfem_forward(f, p, cfg, {false, true});
    CHECK(!only_f.spatial.has_value());
    CHECK(only_f.frequency.has_value());

    CHECK_THROWS_AS(sfem_forward(f, p, cfg, {false, false}), std::invalid_argument);
}

TEST_CASE("outputs stay finite") {
    SfemConfig cfg = small_cfg();
    SfemParams p = init_sfem_params(cfg, 21);
    Tensor f = random_tensor({2, 8, 8}, 22, false);
    SfemOutput out = sfem_forward(f, p, cfg);
    for (double v : out.spatial->data()) CHECK(std::isfinite(v));
    for (double v : out.frequency->data()) CHECK(std::isfinite(v));
}
