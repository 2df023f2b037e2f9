#pragma once

#include <cstdint>
#include <string>

#include "samiqa/tensor.hpp"

namespace samiqa {

enum class FeatureSource { Toy, Imported };

struct FeatureMap {
    Tensor values;  // CxHxW, finite, never requires grad
    FeatureSource source = FeatureSource::Toy;

    std::size_t channels() const { return values.extent(0); }
    std::size_t height() const { return values.extent(1); }
    std::size_t width() const { return values.extent(2); }
};

struct EncoderConfig {
    std::size_t patch_size = 8;
    std::size_t channels = 16;
    std::uint64_t seed = 42;
    std::size_t image_extent = 128;  // square, divisible by patch_size
};

// Frozen patch encoder: flattens each non-overlapping PxP patch, projects it
// with a fixed seeded Gaussian matrix (variance 1/P^2) and squashes with tanh.
// The projection is never trained.
class ToyEncoder {
public:
    explicit ToyEncoder(const EncoderConfig& cfg);

    FeatureMap encode(const Tensor& image) const;
    const EncoderConfig& config() const { return cfg_; }

private:
    EncoderConfig cfg_;
    std::vector<double> projection_;  // C x P^2
};

void save_features(const FeatureMap& f, const std::string& path);
FeatureMap load_features(const std::string& path);

}  // namespace samiqa
