#include "samiqa/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>
#include <stdexcept>

namespace samiqa {

namespace {

double srcc_or_nan(const std::vector<double>& pred, const std::vector<double>& label) {
    try {
        return srcc(pred, label);
    } catch (const std::domain_error&) {
        return std::nan("");
    }
}

double plcc_or_nan(const std::vector<double>& pred, const std::vector<double>& label) {
    try {
        return plcc(pred, label);
    } catch (const std::domain_error&) {
        return std::nan("");
    }
}

std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
    std::uint64_t x = a ^ (b + 0x9e3779b97f4a7c15ull + (a << 6) + (a >> 2));
    x ^= x >> 33;
    x *= 0xff51afd7ed558ccdull;
    x ^= x >> 33;
    return x;
}

}  // namespace

std::string feature_path_for(const std::string& features_dir,
                             const std::string& image_path) {
    namespace fs = std::filesystem;
    return (fs::path(features_dir) / (fs::path(image_path).stem().string() + ".siqf"))
        .string();
}

ToyFeatureProvider::ToyFeatureProvider(const EncoderConfig& cfg) : encoder_(cfg) {}

Tensor ToyFeatureProvider::features_for(const std::string& path, const FlipPattern* flip) {
    // only four flip variants exist, so every variant is cacheable
    std::string key = path;
    const bool flipped = flip != nullptr && (flip->horizontal || flip->vertical);
    if (flipped) {
        key += flip->horizontal ? "#h1" : "#h0";
        key += flip->vertical ? "v1" : "v0";
    }
    auto feat_it = feature_cache_.find(key);
    if (feat_it != feature_cache_.end()) return feat_it->second;

    auto img_it = image_cache_.find(path);
    if (img_it == image_cache_.end()) {
        img_it = image_cache_.emplace(path, load_image(path)).first;
    }
    Tensor feat = flipped ? encoder_.encode(apply_flip(img_it->second, *flip)).values
                          : encoder_.encode(img_it->second).values;
    feature_cache_.emplace(std::move(key), feat);
    return feat;
}

Tensor ToyFeatureProvider::distorted(const SampleEntry& sample, const FlipPattern* flip) {
    return features_for(sample.dist_path, flip);
}

Tensor ToyFeatureProvider::reference(const SampleEntry& sample, const FlipPattern* flip) {
    if (sample.ref_path.empty()) {
        throw std::runtime_error("sample " + sample.id + " has no reference image");
    }
    return features_for(sample.ref_path, flip);
}

FileFeatureProvider::FileFeatureProvider(std::string features_dir)
    : features_dir_(std::move(features_dir)) {}

Tensor FileFeatureProvider::features_for(const std::string& image_path,
                                         const FlipPattern* flip) {
    if (flip != nullptr && (flip->horizontal || flip->vertical)) {
        throw std::logic_error("imported features do not support flip augmentation");
    }
    const std::string path = feature_path_for(features_dir_, image_path);
    auto it = feature_cache_.find(path);
    if (it == feature_cache_.end()) {
        it = feature_cache_.emplace(path, load_features(path).values).first;
    }
    return it->second;
}

Tensor FileFeatureProvider::distorted(const SampleEntry& sample, const FlipPattern* flip) {
    return features_for(sample.dist_path, flip);
}

Tensor FileFeatureProvider::reference(const SampleEntry& sample, const FlipPattern* flip) {
    if (sample.ref_path.empty()) {
        throw std::runtime_error("sample " + sample.id + " has no reference image");
    }
    return features_for(sample.ref_path, flip);
}

std::uint64_t train_config_hash(const TrainConfig& cfg) {
    std::string text = task_name(cfg.task) + "|" + std::to_string(cfg.batch_size) + "|" +
                       std::to_string(cfg.epochs) + "|" + std::to_string(cfg.seed) + "|" +
                       distance_metric_name(cfg.metric) + "|" +
                       branch_mask_name(cfg.branches) + "|" +
                       std::to_string(cfg.augment) + "|" +
                       std::to_string(cfg.sfem.scales) + "|" +
                       std::to_string(cfg.sfem.channels) + "|" +
                       std::to_string(cfg.sfem.kernel_size) + "|" +
                       std::to_string(cfg.sfem.pooled_extent) + "|" +
                       format_value(cfg.adam.lr);
    return fnv1a_hash(text);
}

Model clone_model(Model& model) {
    Model copy = init_model(model.cfg);
    auto src = model.named_params();
    auto dst = copy.named_params();
    for (std::size_t i = 0; i < src.size(); ++i) {
        dst[i].second.data() = src[i].second.data();
    }
    return copy;
}

namespace {

Tensor sample_score(Model& model, const SampleEntry& sample, FeatureProvider& features,
                    const FlipPattern* flip) {
    if (model.cfg.task == Task::FullReference) {
        return model.score_fr(features.distorted(sample, flip),
                              features.reference(sample, flip));
    }
    return model.score_nr(features.distorted(sample, flip));
}

}  // namespace

FitResult fit(const Manifest& manifest, const TrainConfig& cfg,
              FeatureProvider& features, std::ostream* progress) {
    auto train = manifest.split("train");
    auto val = manifest.split("val");
    if (train.empty()) throw std::runtime_error("fit: empty train split");
    if (val.empty()) throw std::runtime_error("fit: empty val split");
    if (cfg.batch_size == 0) throw std::invalid_argument("fit: batch size must be >= 1");
    const bool augment = cfg.augment && features.supports_flips();

    ModelConfig mcfg;
    mcfg.task = cfg.task;
    mcfg.sfem = cfg.sfem;
    mcfg.branches = cfg.branches;
    mcfg.metric = cfg.metric;
    mcfg.seed = cfg.seed;
    Model model = init_model(mcfg);

    auto named = model.named_params();
    std::vector<Tensor> params;
    for (auto& [name, t] : named) params.push_back(t);
    AdamOptimizer adam(params, cfg.adam);

    FitResult result;
    result.best_val_srcc = -std::numeric_limits<double>::infinity();

    std::vector<std::size_t> order(train.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        // independent per-epoch streams for shuffling and augmentation
        std::mt19937_64 shuffle_rng(mix(cfg.seed, 2 * epoch + 1));
        std::mt19937_64 aug_rng(mix(cfg.seed, 2 * epoch + 2));
        std::shuffle(order.begin(), order.end(), shuffle_rng);

        double epoch_loss = 0.0;
        std::size_t batches = 0;
        for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
            const std::size_t stop = std::min(start + cfg.batch_size, order.size());
            Tape tape;
            Tensor total = Tensor::scalar(0.0);
            for (std::size_t i = start; i < stop; ++i) {
                const SampleEntry& sample = *train[order[i]];
                FlipPattern flip;
                if (augment) flip = draw_flip(aug_rng);
                Tensor score = sample_score(model, sample, features,
                                            augment ? &flip : nullptr);
                if (!std::isfinite(score.item())) {
                    throw std::runtime_error("fit: non-finite prediction for sample " +
                                             sample.id);
                }
                total = add(total, l1_loss(score, sample.label));
            }
            Tensor batch_loss = scale(total, 1.0 / double(stop - start));
            if (!std::isfinite(batch_loss.item())) {
                throw std::runtime_error("fit: non-finite loss in batch starting at sample " +
                                         train[order[start]]->id);
            }
            tape.backward(batch_loss);
            adam.step();
            epoch_loss += batch_loss.item();
            ++batches;
        }
        epoch_loss /= double(batches);

        SplitEval val_eval = evaluate_split(model, manifest, "val", features);
        EpochLog log{epoch + 1, epoch_loss, val_eval.srcc_value};
        result.log.push_back(log);
        if (progress != nullptr) {
            *progress << "epoch " << log.epoch << " train_loss " << format_value(log.train_loss)
                      << " val_srcc " << format_value(log.val_srcc) << "\n";
        }
        if (std::isfinite(log.val_srcc) && log.val_srcc > result.best_val_srcc) {
            result.best_val_srcc = log.val_srcc;
            result.best.model = clone_model(model);
            result.best.adam = adam.snapshot();
        }
    }
    if (!std::isfinite(result.best_val_srcc)) {
        // every epoch produced degenerate validation predictions; keep the
        // final state so the caller still gets a checkpoint
        result.best.model = clone_model(model);
        result.best.adam = adam.snapshot();
    }
    result.best.config_hash = train_config_hash(cfg);
    return result;
}

SplitEval evaluate_split(Model& model, const Manifest& manifest,
                         const std::string& split, FeatureProvider& features) {
    auto samples = manifest.split(split);
    if (samples.empty()) throw std::runtime_error("evaluate_split: empty split " + split);
    SplitEval eval;
    for (const SampleEntry* sample : samples) {
        eval.pred.push_back(sample_score(model, *sample, features, nullptr).item());
        eval.label.push_back(sample->label);
    }
    eval.srcc_value = srcc_or_nan(eval.pred, eval.label);
    eval.plcc_value = plcc_or_nan(eval.pred, eval.label);
    return eval;
}

SplitEval evaluate_psnr_split(const Manifest& manifest, const std::string& split) {
    auto samples = manifest.split(split);
    if (samples.empty()) throw std::runtime_error("evaluate_psnr_split: empty split " + split);
    SplitEval eval;
    double finite_max = 0.0;
    for (const SampleEntry* sample : samples) {
        Tensor ref = load_image(sample->ref_path);
        Tensor dist = load_image(sample->dist_path);
        eval.pred.push_back(psnr_baseline(ref.data(), dist.data()));
        eval.label.push_back(sample->label);
        if (std::isfinite(eval.pred.back())) {
            finite_max = std::max(finite_max, eval.pred.back());
        }
    }
    // rank correlation needs finite values; identical pairs sit above any
    // finite PSNR
    for (double& p : eval.pred) {
        if (std::isinf(p)) p = finite_max + 1.0;
    }
    eval.srcc_value = srcc_or_nan(eval.pred, eval.label);
    eval.plcc_value = plcc_or_nan(eval.pred, eval.label);
    return eval;
}

}  // namespace samiqa
