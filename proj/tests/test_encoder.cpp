#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "samiqa/data.hpp"
#include "samiqa/encoder.hpp"
#include "test_util.hpp"

using namespace samiqa;

namespace {

EncoderConfig small_cfg() {
    EncoderConfig cfg;
    cfg.patch_size = 4;
    cfg.channels = 8;
    cfg.seed = 99;
    cfg.image_extent = 32;
    return cfg;
}

Tensor test_image(std::uint64_t seed, std::size_t extent) {
    return gen_reference(seed, extent);
}

std::string tmp_path(const std::string& name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

TEST_CASE("toy encoding is deterministic") {
    ToyEncoder enc(small_cfg());
    Tensor img = test_image(1, 32);
    FeatureMap a = enc.encode(img);
    FeatureMap b = enc.encode(img);
    CHECK(a.values.data() == b.values.data());
    CHECK(a.source == FeatureSource::Toy);
    CHECK(a.values.shape() == std::vector<std::size_t>{8, 8, 8});
}

TEST_CASE("all-zero image maps to all-zero features") {
    ToyEncoder enc(small_cfg());
    FeatureMap f = enc.encode(Tensor::zeros({32, 32}));
    for (double v : f.values.data()) CHECK(v == 0.0);
}

TEST_CASE("patch locality") {
    ToyEncoder enc(small_cfg());
    Tensor img = test_image(2, 32);
    Tensor bumped = img;
    std::vector<double> data = img.data();
    data[5 * 32 + 6] = std::min(1.0, data[5 * 32 + 6] + 0.5);  // inside patch (1,1)
    bumped = Tensor({32, 32}, std::move(data));

    FeatureMap fa = enc.encode(img), fb = enc.encode(bumped);
    const std::size_t grid = 8;
    for (std::size_t c = 0; c < 8; ++c) {
        for (std::size_t gy = 0; gy < grid; ++gy) {
            for (std::size_t gx = 0; gx < grid; ++gx) {
                const double va = fa.values.data()[(c * grid + gy) * grid + gx];
                const double vb = fb.values.data()[(c * grid + gy) * grid + gx];
                if (gy == 1 && gx == 1) continue;
                CHECK(va == vb);
            }
        }
    }
}

TEST_CASE("horizontal flip permutes feature columns exactly") {
    ToyEncoder enc(small_cfg());
    Tensor img = test_image(3, 32);
    FeatureMap plain = enc.encode(img);
    FeatureMap flipped = enc.encode(apply_flip(img, {true, false}));
    const std::size_t grid = 8;
    for (std::size_t c = 0; c < 8; ++c) {
        for (std::size_t gy = 0; gy < grid; ++gy) {
            for (std::size_t gx = 0; gx < grid; ++gx) {
                CHECK(flipped.values.data()[(c * grid + gy) * grid + gx] ==
                      plain.values.data()[(c * grid + gy) * grid + (grid - 1 - gx)]);
            }
        }
    }
}

TEST_CASE("encoder config validation") {
    EncoderConfig cfg = small_cfg();
    cfg.image_extent = 30;  // not divisible by patch
    CHECK_THROWS_AS(ToyEncoder{cfg}, std::invalid_argument);
    cfg = small_cfg();
    cfg.patch_size = 5;  // grid 32/5 not integral
    CHECK_THROWS_AS(ToyEncoder{cfg}, std::invalid_argument);
    ToyEncoder enc(small_cfg());
    CHECK_THROWS_AS(enc.encode(Tensor::zeros({16, 16})), std::invalid_argument);
}

TEST_CASE("feature file roundtrip is bit exact") {
    Tensor values = testutil::random_tensor({4, 8, 8}, 7, false);
    FeatureMap f{values, FeatureSource::Toy};
    const std::string path = tmp_path("roundtrip.siqf");
    save_features(f, path);
    FeatureMap g = load_features(path);
    CHECK(g.values.data() == values.data());
    CHECK(g.values.shape() == values.shape());
    CHECK(g.source == FeatureSource::Imported);
    std::remove(path.c_str());
}

TEST_CASE("full-size imported features accepted") {
    FeatureMap f{Tensor::full({256, 64, 64}, 0.25), FeatureSource::Toy};
    const std::string path = tmp_path("big.siqf");
    save_features(f, path);
    FeatureMap g = load_features(path);
    CHECK(g.values.shape() == std::vector<std::size_t>{256, 64, 64});
    CHECK(g.source == FeatureSource::Imported);
    std::remove(path.c_str());
}

TEST_CASE("malformed feature files rejected with distinct diagnostics") {
    const std::string path = tmp_path("bad.siqf");
    FeatureMap f{Tensor::full({1, 2, 2}, 1.0), FeatureSource::Toy};

    SUBCASE("bad magic") {
        save_features(f, path);
        std::fstream fs(path, std::ios::in | std::ios::out | std::ios::binary);
        fs.write("XXXX", 4);
        fs.close();
        CHECK_THROWS_WITH_AS(load_features(path), doctest::Contains("bad magic"),
                             std::runtime_error);
    }
    SUBCASE("bad version") {
        save_features(f, path);
        std::fstream fs(path, std::ios::in | std::ios::out | std::ios::binary);
        fs.seekp(4);
        const char v[2] = {9, 0};
        fs.write(v, 2);
        fs.close();
        CHECK_THROWS_WITH_AS(load_features(path), doctest::Contains("version"),
                             std::runtime_error);
    }
    SUBCASE("truncated payload") {
        save_features(f, path);
        std::filesystem::resize_file(path, std::filesystem::file_size(path) - 8);
        CHECK_THROWS_WITH_AS(load_features(path), doctest::Contains("truncated"),
                             std::runtime_error);
    }
    SUBCASE("NaN payload") {
        FeatureMap nanmap{Tensor({1, 2, 2}, {1.0, std::nan(""), 0.0, 0.0}),
                          FeatureSource::Toy};
        save_features(nanmap, path);
        CHECK_THROWS_WITH_AS(load_features(path), doctest::Contains("non-finite"),
                             std::runtime_error);
    }
    std::remove(path.c_str());
}
