#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "samiqa/tensor.hpp"

namespace samiqa {

enum class DistortionKind { Blur, Noise, Gain };

DistortionKind parse_distortion_kind(const std::string& name);
std::string distortion_kind_name(DistortionKind kind);

struct DistortionSpec {
    DistortionKind kind = DistortionKind::Blur;
    int level = 1;  // 1..levels

    double blur_sigma() const { return 0.5 * level; }
    double noise_sigma() const { return 0.05 * level; }
    double gain_factor() const { return 1.0 - 0.12 * level; }
};

// Normalized quality label, strictly inside (0,1) and strictly decreasing
// with distortion level.
double quality_label(int level, int levels);

// Seeded mixture of low-frequency sinusoids and block offsets, in [0,1].
Tensor gen_reference(std::uint64_t seed, std::size_t extent);

Tensor gaussian_blur(const Tensor& img, double sigma);  // reflect padding
Tensor apply_distortion(const Tensor& img, const DistortionSpec& spec,
                        std::uint64_t noise_seed);

struct FlipPattern {
    bool horizontal = false;
    bool vertical = false;
};

FlipPattern draw_flip(std::mt19937_64& rng);
Tensor apply_flip(const Tensor& img, const FlipPattern& pattern);

struct SampleEntry {
    std::string id;
    std::string split;  // train | val | test
    DistortionKind kind;
    int level = 1;
    double label = 0.0;
    std::string ref_path;
    std::string dist_path;
};

struct CorpusConfig {
    std::string out_dir;
    std::uint64_t seed = 7;
    std::size_t references = 60;
    int levels = 5;
    std::size_t extent = 128;
};

struct Manifest {
    std::uint64_t seed = 0;
    std::size_t references = 0;
    int levels = 0;
    std::size_t extent = 0;
    std::vector<SampleEntry> samples;

    std::vector<const SampleEntry*> split(const std::string& name) const;
};

Manifest make_corpus(const CorpusConfig& cfg);

void save_image(const Tensor& img, const std::string& path);
Tensor load_image(const std::string& path);

void save_manifest(const Manifest& m, const std::string& path);
Manifest load_manifest(const std::string& path);

}  // namespace samiqa
