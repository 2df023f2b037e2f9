#pragma once

#include <map>
#include <memory>
#include <ostream>
#include <string>

#include "samiqa/data.hpp"
#include "samiqa/encoder.hpp"
#include "samiqa/evalm.hpp"
#include "samiqa/model.hpp"
#include "samiqa/optim.hpp"

namespace samiqa {

// Supplies frozen encoder features for manifest samples. Flip patterns are
// applied to the images before encoding; providers backed by precomputed
// feature files do not support flips.
class FeatureProvider {
public:
    virtual ~FeatureProvider() = default;
    virtual Tensor distorted(const SampleEntry& sample, const FlipPattern* flip) = 0;
    virtual Tensor reference(const SampleEntry& sample, const FlipPattern* flip) = 0;
    virtual bool supports_flips() const = 0;
};

class ToyFeatureProvider : public FeatureProvider {
public:
    explicit ToyFeatureProvider(const EncoderConfig& cfg);
    Tensor distorted(const SampleEntry& sample, const FlipPattern* flip) override;
    Tensor reference(const SampleEntry& sample, const FlipPattern* flip) override;
    bool supports_flips() const override { return true; }

private:
    Tensor features_for(const std::string& path, const FlipPattern* flip);
    ToyEncoder encoder_;
    std::map<std::string, Tensor> image_cache_;
    std::map<std::string, Tensor> feature_cache_;  // unflipped only
};

class FileFeatureProvider : public FeatureProvider {
public:
    explicit FileFeatureProvider(std::string features_dir);
    Tensor distorted(const SampleEntry& sample, const FlipPattern* flip) override;
    Tensor reference(const SampleEntry& sample, const FlipPattern* flip) override;
    bool supports_flips() const override { return false; }

private:
    Tensor features_for(const std::string& image_path, const FlipPattern* flip);
    std::string features_dir_;
    std::map<std::string, Tensor> feature_cache_;
};

// <features_dir>/<image stem>.siqf
std::string feature_path_for(const std::string& features_dir,
                             const std::string& image_path);

struct TrainConfig {
    Task task = Task::FullReference;
    std::size_t batch_size = 16;
    std::size_t epochs = 300;
    std::uint64_t seed = 7;
    DistanceMetric metric = DistanceMetric::L1;
    BranchMask branches;
    bool augment = true;
    SfemConfig sfem;
    AdamConfig adam;
};

std::uint64_t train_config_hash(const TrainConfig& cfg);

struct EpochLog {
    std::size_t epoch = 0;
    double train_loss = 0.0;
    double val_srcc = 0.0;  // NaN when undefined
};

struct FitResult {
    Checkpoint best;
    double best_val_srcc = 0.0;
    std::vector<EpochLog> log;
};

// Epoch loop of seeded shuffles, batched forward/backward and Adam steps;
// retains the checkpoint with the best validation SRCC.
FitResult fit(const Manifest& manifest, const TrainConfig& cfg,
              FeatureProvider& features, std::ostream* progress = nullptr);

struct SplitEval {
    std::vector<double> pred;
    std::vector<double> label;
    double srcc_value = 0.0;  // NaN when undefined
    double plcc_value = 0.0;
};

SplitEval evaluate_split(Model& model, const Manifest& manifest,
                         const std::string& split, FeatureProvider& features);

// PSNR baseline SRCC/PLCC over a split, scored directly on the image files.
SplitEval evaluate_psnr_split(const Manifest& manifest, const std::string& split);

Model clone_model(Model& model);

}  // namespace samiqa
