#include "samiqa/encoder.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

#include "samiqa/binio.hpp"
#include "samiqa/spectral.hpp"

namespace samiqa {

namespace {
constexpr std::uint16_t kFeatureVersion = 1;
}

ToyEncoder::ToyEncoder(const EncoderConfig& cfg) : cfg_(cfg) {
    if (cfg.patch_size == 0 || cfg.channels == 0 || cfg.image_extent == 0) {
        throw std::invalid_argument("encoder: zero extent in config");
    }
    if (cfg.image_extent % cfg.patch_size != 0) {
        throw std::invalid_argument("encoder: image extent " +
                                    std::to_string(cfg.image_extent) +
                                    " not divisible by patch size " +
                                    std::to_string(cfg.patch_size));
    }
    if (!is_power_of_two(cfg.image_extent / cfg.patch_size)) {
        throw std::invalid_argument("encoder: feature grid extent " +
                                    std::to_string(cfg.image_extent / cfg.patch_size) +
                                    " is not a power of two");
    }
    const std::size_t p = cfg.patch_size;
    const std::size_t p2 = p * p;
    std::mt19937_64 rng(cfg.seed);
    std::normal_distribution<double> dist(0.0, 1.0 / double(p));
    projection_.resize(cfg.channels * p2);
    for (double& v : projection_) v = dist(rng);
    // symmetrize each row under within-patch flips so that flipping an image
    // permutes feature cells exactly (flip equivariance of the encoder)
    for (std::size_t c = 0; c < cfg.channels; ++c) {
        double* row = projection_.data() + c * p2;
        for (std::size_t y = 0; y < p; ++y) {
            for (std::size_t x = 0; x < p; ++x) {
                const std::size_t a = y * p + x;
                const std::size_t b = y * p + (p - 1 - x);
                const std::size_t cc = (p - 1 - y) * p + x;
                const std::size_t d = (p - 1 - y) * p + (p - 1 - x);
                if (a > b || a > cc || a > d) continue;
                const double avg = 0.25 * (row[a] + row[b] + row[cc] + row[d]);
                row[a] = row[b] = row[cc] = row[d] = avg;
            }
        }
    }
}

FeatureMap ToyEncoder::encode(const Tensor& image) const {
    const std::size_t s = cfg_.image_extent;
    if (image.rank() != 2 || image.extent(0) != s || image.extent(1) != s) {
        throw std::invalid_argument("encode: image " + shape_str(image.shape()) +
                                    " does not match configured extent " +
                                    std::to_string(s));
    }
    const std::size_t p = cfg_.patch_size;
    const std::size_t grid = s / p;
    const std::size_t p2 = p * p;

    std::vector<double> out(cfg_.channels * grid * grid);
    std::vector<double> patch(p2);
    for (std::size_t gy = 0; gy < grid; ++gy) {
        for (std::size_t gx = 0; gx < grid; ++gx) {
            for (std::size_t y = 0; y < p; ++y) {
                const double* row = image.data().data() + (gy * p + y) * s + gx * p;
                for (std::size_t x = 0; x < p; ++x) patch[y * p + x] = row[x];
            }
            for (std::size_t c = 0; c < cfg_.channels; ++c) {
                // accumulate per flip orbit: the projection is constant on
                // each orbit and IEEE addition is commutative, so flipped
                // images produce bit-identical (permuted) features
                double acc = 0.0;
                const double* proj = projection_.data() + c * p2;
                for (std::size_t y = 0; 2 * y <= p - 1; ++y) {
                    const std::size_t my = p - 1 - y;
                    for (std::size_t x = 0; 2 * x <= p - 1; ++x) {
                        const std::size_t mx = p - 1 - x;
                        double orbit = patch[y * p + x];
                        if (mx != x) orbit += patch[y * p + mx];
                        if (my != y) {
                            double lower = patch[my * p + x];
                            if (mx != x) lower += patch[my * p + mx];
                            orbit += lower;
                        }
                        acc += proj[y * p + x] * orbit;
                    }
                }
                out[(c * grid + gy) * grid + gx] = std::tanh(acc);
            }
        }
    }
    return FeatureMap{Tensor({cfg_.channels, grid, grid}, std::move(out)),
                      FeatureSource::Toy};
}

void save_features(const FeatureMap& f, const std::string& path) {
    auto os = binio::open_out(path);
    binio::write_bytes(os, "SIQF", 4);
    binio::write_le<std::uint16_t>(os, kFeatureVersion);
    binio::write_le<std::uint32_t>(os, std::uint32_t(f.channels()));
    binio::write_le<std::uint32_t>(os, std::uint32_t(f.height()));
    binio::write_le<std::uint32_t>(os, std::uint32_t(f.width()));
    binio::write_f64(os, f.values.data().data(), f.values.size());
    if (!os) throw std::runtime_error("failed to write " + path);
}

FeatureMap load_features(const std::string& path) {
    auto is = binio::open_in(path);
    binio::expect_magic(is, "SIQF", path);
    const auto version = binio::read_le<std::uint16_t>(is, "version");
    if (version != kFeatureVersion) {
        throw std::runtime_error("unsupported feature file version " +
                                 std::to_string(version) + " in " + path);
    }
    const auto c = binio::read_le<std::uint32_t>(is, "channels");
    const auto h = binio::read_le<std::uint32_t>(is, "height");
    const auto w = binio::read_le<std::uint32_t>(is, "width");
    if (c == 0 || h == 0 || w == 0 || !is_power_of_two(h) || !is_power_of_two(w)) {
        throw std::runtime_error("invalid feature extents " + std::to_string(c) + "x" +
                                 std::to_string(h) + "x" + std::to_string(w) + " in " + path);
    }
    std::vector<double> data(std::size_t(c) * h * w);
    binio::read_f64(is, data.data(), data.size(), "feature payload of " + path);
    if (is.peek() != std::char_traits<char>::eof()) {
        throw std::runtime_error("trailing bytes after feature payload in " + path);
    }
    for (double v : data) {
        if (!std::isfinite(v)) {
            throw std::runtime_error("non-finite value in feature payload of " + path);
        }
    }
    return FeatureMap{Tensor({c, h, w}, std::move(data)), FeatureSource::Imported};
}

}  // namespace samiqa
