#pragma once

#include <optional>
#include <string>
#include <utility>

#include "samiqa/distance.hpp"
#include "samiqa/heads.hpp"
#include "samiqa/sfem.hpp"

namespace samiqa {

enum class Task { FullReference, NoReference };

Task parse_task(const std::string& name);  // "fr" | "nr"
std::string task_name(Task task);

struct ModelConfig {
    Task task = Task::FullReference;
    SfemConfig sfem;
    BranchMask branches;
    DistanceMetric metric = DistanceMetric::L1;
    std::uint64_t seed = 1;
};

// SFEM plus the task head. The SFEM parameter set is shared between the LQ
// and HQ passes; the encoder is not part of the model and never trains.
struct Model {
    ModelConfig cfg;
    SfemParams sfem;
    std::optional<FrrbParams> frrb;
    std::optional<NrrbParams> nrrb;

    std::vector<std::pair<std::string, Tensor>> named_params();
    Tensor score_fr(const Tensor& lq_features, const Tensor& hq_features);
    Tensor score_nr(const Tensor& lq_features);
};

Model init_model(const ModelConfig& cfg);

// Adam accumulators serialized alongside the parameters when a checkpoint is
// written mid-training.
struct AdamSnapshot {
    std::uint64_t step = 0;
    std::vector<std::vector<double>> m;
    std::vector<std::vector<double>> v;
};

struct Checkpoint {
    Model model;
    std::uint64_t config_hash = 0;
    std::optional<AdamSnapshot> adam;
};

void save_checkpoint(Checkpoint& ckpt, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

std::uint64_t fnv1a_hash(const std::string& text);

}  // namespace samiqa
