#include "samiqa/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <sstream>
#include <stdexcept>

#include "samiqa/binio.hpp"

namespace samiqa {

namespace {

constexpr std::uint32_t kImageVersion = 1;
const char* const kKindNames[] = {"blur", "noise", "gain"};

double clamp01(double v) { return std::min(1.0, std::max(0.0, v)); }

std::size_t reflect(long i, long n) {
    // reflect-without-repeat: ... 2 1 | 0 1 2 ... n-1 | n-2 n-3 ...
    while (i < 0 || i >= n) {
        if (i < 0) i = -i;
        if (i >= n) i = 2 * n - 2 - i;
    }
    return std::size_t(i);
}

}  // namespace

DistortionKind parse_distortion_kind(const std::string& name) {
    for (int k = 0; k < 3; ++k) {
        if (name == kKindNames[k]) return DistortionKind(k);
    }
    throw std::invalid_argument("unknown distortion kind '" + name + "'");
}

std::string distortion_kind_name(DistortionKind kind) {
    return kKindNames[int(kind)];
}

double quality_label(int level, int levels) {
    if (level < 1 || level > levels) {
        throw std::invalid_argument("level " + std::to_string(level) +
                                    " outside 1.." + std::to_string(levels));
    }
    return 1.0 - double(level) / double(levels + 1);
}

Tensor gen_reference(std::uint64_t seed, std::size_t extent) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    struct Wave {
        double fx, fy, phase, amp;
    };
    std::vector<Wave> waves(4);
    for (auto& w : waves) {
        w.fx = 1.0 + std::floor(unit(rng) * 7.0);
        w.fy = 1.0 + std::floor(unit(rng) * 7.0);
        w.phase = unit(rng) * 2.0 * M_PI;
        w.amp = 0.08 + 0.12 * unit(rng);
    }
    const std::size_t blocks = 8;
    std::vector<double> block(blocks * blocks);
    for (double& v : block) v = 0.4 * (unit(rng) - 0.5);

    std::vector<double> out(extent * extent);
    for (std::size_t y = 0; y < extent; ++y) {
        for (std::size_t x = 0; x < extent; ++x) {
            double v = 0.5;
            for (const auto& w : waves) {
                v += w.amp * std::sin(2.0 * M_PI * (w.fx * double(x) + w.fy * double(y)) /
                                          double(extent) +
                                      w.phase);
            }
            v += block[(y * blocks / extent) * blocks + (x * blocks / extent)];
            out[y * extent + x] = clamp01(v);
        }
    }
    return Tensor({extent, extent}, std::move(out));
}

Tensor gaussian_blur(const Tensor& img, double sigma) {
    if (img.rank() != 2) {
        throw std::invalid_argument("gaussian_blur: expected SxS image, got " +
                                    shape_str(img.shape()));
    }
    if (sigma <= 0.0) return img;
    const long radius = long(std::ceil(3.0 * sigma));
    std::vector<double> kernel(2 * radius + 1);
    double norm = 0.0;
    for (long i = -radius; i <= radius; ++i) {
        kernel[i + radius] = std::exp(-0.5 * double(i * i) / (sigma * sigma));
        norm += kernel[i + radius];
    }
    for (double& v : kernel) v /= norm;

    const long s = long(img.extent(0));
    std::vector<double> tmp(img.size()), out(img.size());
    for (long y = 0; y < s; ++y) {
        for (long x = 0; x < s; ++x) {
            double acc = 0.0;
            for (long i = -radius; i <= radius; ++i) {
                acc += kernel[i + radius] * img.data()[y * s + reflect(x + i, s)];
            }
            tmp[y * s + x] = acc;
        }
    }
    for (long y = 0; y < s; ++y) {
        for (long x = 0; x < s; ++x) {
            double acc = 0.0;
            for (long i = -radius; i <= radius; ++i) {
                acc += kernel[i + radius] * tmp[reflect(y + i, s) * s + x];
            }
            out[y * s + x] = acc;
        }
    }
    return Tensor(img.shape(), std::move(out));
}

Tensor apply_distortion(const Tensor& img, const DistortionSpec& spec,
                        std::uint64_t noise_seed) {
    switch (spec.kind) {
        case DistortionKind::Blur:
            return gaussian_blur(img, spec.blur_sigma());
        case DistortionKind::Noise: {
            std::mt19937_64 rng(noise_seed);
            std::normal_distribution<double> dist(0.0, spec.noise_sigma());
            std::vector<double> out(img.size());
            for (std::size_t i = 0; i < img.size(); ++i) {
                out[i] = clamp01(img.data()[i] + dist(rng));
            }
            return Tensor(img.shape(), std::move(out));
        }
        case DistortionKind::Gain: {
            std::vector<double> out(img.size());
            for (std::size_t i = 0; i < img.size(); ++i) {
                out[i] = clamp01(img.data()[i] * spec.gain_factor());
            }
            return Tensor(img.shape(), std::move(out));
        }
    }
    throw std::invalid_argument("unknown distortion kind");
}

FlipPattern draw_flip(std::mt19937_64& rng) {
    std::bernoulli_distribution coin(0.5);
    FlipPattern p;
    p.horizontal = coin(rng);
    p.vertical = coin(rng);
    return p;
}

Tensor apply_flip(const Tensor& img, const FlipPattern& pattern) {
    if (img.rank() != 2) {
        throw std::invalid_argument("apply_flip: expected SxS image, got " +
                                    shape_str(img.shape()));
    }
    const std::size_t h = img.extent(0), w = img.extent(1);
    std::vector<double> out(img.size());
    for (std::size_t y = 0; y < h; ++y) {
        const std::size_t sy = pattern.vertical ? h - 1 - y : y;
        for (std::size_t x = 0; x < w; ++x) {
            const std::size_t sx = pattern.horizontal ? w - 1 - x : x;
            out[y * w + x] = img.data()[sy * w + sx];
        }
    }
    return Tensor(img.shape(), std::move(out));
}

std::vector<const SampleEntry*> Manifest::split(const std::string& name) const {
    std::vector<const SampleEntry*> out;
    for (const auto& s : samples) {
        if (s.split == name) out.push_back(&s);
    }
    return out;
}

Manifest make_corpus(const CorpusConfig& cfg) {
    namespace fs = std::filesystem;
    if (cfg.references < 5) {
        throw std::invalid_argument("make_corpus: need at least 5 references for a "
                                    "60/20/20 split");
    }
    fs::create_directories(fs::path(cfg.out_dir) / "images");

    std::mt19937_64 rng(cfg.seed);
    std::vector<std::uint64_t> ref_seeds(cfg.references);
    for (auto& s : ref_seeds) s = rng();

    // split by reference so no reference leaks across splits
    std::vector<std::size_t> order(cfg.references);
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::shuffle(order.begin(), order.end(), rng);
    const std::size_t n_train = cfg.references * 60 / 100;
    const std::size_t n_val = cfg.references * 20 / 100;
    std::vector<std::string> ref_split(cfg.references);
    for (std::size_t i = 0; i < order.size(); ++i) {
        ref_split[order[i]] = i < n_train ? "train" : (i < n_train + n_val ? "val" : "test");
    }

    Manifest m;
    m.seed = cfg.seed;
    m.references = cfg.references;
    m.levels = cfg.levels;
    m.extent = cfg.extent;

    char buf[64];
    for (std::size_t r = 0; r < cfg.references; ++r) {
        Tensor ref = gen_reference(ref_seeds[r], cfg.extent);
        std::snprintf(buf, sizeof(buf), "ref%03zu", r);
        const std::string ref_id = buf;
        const std::string ref_path = (fs::path(cfg.out_dir) / "images" / (ref_id + ".siqi")).string();
        save_image(ref, ref_path);

        for (int k = 0; k < 3; ++k) {
            for (int level = 1; level <= cfg.levels; ++level) {
                DistortionSpec spec{DistortionKind(k), level};
                const std::uint64_t noise_seed =
                    cfg.seed ^ (std::uint64_t(r) << 32) ^ (std::uint64_t(k) << 16) ^
                    std::uint64_t(level);
                Tensor dist = apply_distortion(ref, spec, noise_seed);
                const std::string id =
                    ref_id + "_" + distortion_kind_name(spec.kind) + "_l" + std::to_string(level);
                const std::string dist_path =
                    (fs::path(cfg.out_dir) / "images" / (id + ".siqi")).string();
                save_image(dist, dist_path);

                SampleEntry e;
                e.id = id;
                e.split = ref_split[r];
                e.kind = spec.kind;
                e.level = level;
                e.label = quality_label(level, cfg.levels);
                e.ref_path = ref_path;
                e.dist_path = dist_path;
                m.samples.push_back(std::move(e));
            }
        }
    }
    save_manifest(m, (fs::path(cfg.out_dir) / "manifest.txt").string());
    return m;
}

void save_image(const Tensor& img, const std::string& path) {
    if (img.rank() != 2 || img.extent(0) != img.extent(1)) {
        throw std::invalid_argument("save_image: expected square SxS image, got " +
                                    shape_str(img.shape()));
    }
    auto os = binio::open_out(path);
    binio::write_bytes(os, "SIQI", 4);
    binio::write_le<std::uint32_t>(os, kImageVersion);
    binio::write_le<std::uint32_t>(os, std::uint32_t(img.extent(0)));
    binio::write_le<std::uint32_t>(os, 0);  // reserved, pads header to 16 bytes
    binio::write_f64(os, img.data().data(), img.size());
    if (!os) throw std::runtime_error("failed to write " + path);
}

Tensor load_image(const std::string& path) {
    auto is = binio::open_in(path);
    binio::expect_magic(is, "SIQI", path);
    const auto version = binio::read_le<std::uint32_t>(is, "version");
    if (version != kImageVersion) {
        throw std::runtime_error("unsupported image version " + std::to_string(version) +
                                 " in " + path);
    }
    const auto s = binio::read_le<std::uint32_t>(is, "extent");
    binio::read_le<std::uint32_t>(is, "reserved");
    if (s == 0) throw std::runtime_error("zero extent in " + path);
    std::vector<double> data(std::size_t(s) * s);
    binio::read_f64(is, data.data(), data.size(), "image payload of " + path);
    return Tensor({s, s}, std::move(data));
}

void save_manifest(const Manifest& m, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open " + path + " for writing");
    os << "# samiqa-manifest v1\n";
    os << "# seed=" << m.seed << " refs=" << m.references << " levels=" << m.levels
       << " extent=" << m.extent << "\n";
    char label[32];
    for (const auto& e : m.samples) {
        std::snprintf(label, sizeof(label), "%.17g", e.label);
        os << e.id << "\t" << e.split << "\t" << distortion_kind_name(e.kind) << "\t"
           << e.level << "\t" << label << "\t" << e.ref_path << "\t" << e.dist_path
           << "\n";
    }
    if (!os) throw std::runtime_error("failed to write " + path);
}

Manifest load_manifest(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open " + path);
    std::string line;
    if (!std::getline(is, line) || line != "# samiqa-manifest v1") {
        throw std::runtime_error("bad manifest header in " + path);
    }
    Manifest m;
    if (!std::getline(is, line) ||
        std::sscanf(line.c_str(), "# seed=%llu refs=%zu levels=%d extent=%zu",
                    reinterpret_cast<unsigned long long*>(&m.seed), &m.references,
                    &m.levels, &m.extent) != 4) {
        throw std::runtime_error("bad manifest config line in " + path);
    }
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        SampleEntry e;
        std::string kind;
        if (!(std::getline(ss, e.id, '\t') && std::getline(ss, e.split, '\t') &&
              std::getline(ss, kind, '\t'))) {
            throw std::runtime_error("bad manifest row in " + path + ": " + line);
        }
        std::string level, label;
        if (!(std::getline(ss, level, '\t') && std::getline(ss, label, '\t') &&
              std::getline(ss, e.ref_path, '\t') && std::getline(ss, e.dist_path))) {
            throw std::runtime_error("bad manifest row in " + path + ": " + line);
        }
        e.kind = parse_distortion_kind(kind);
        e.level = std::stoi(level);
        e.label = std::stod(label);
        m.samples.push_back(std::move(e));
    }
    return m;
}

}  // namespace samiqa
