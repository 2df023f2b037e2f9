#include "samiqa/model.hpp"

#include <stdexcept>

#include "samiqa/binio.hpp"

namespace samiqa {

namespace {
constexpr std::uint32_t kCheckpointVersion = 1;
}

Task parse_task(const std::string& name) {
    if (name == "fr") return Task::FullReference;
    if (name == "nr") return Task::NoReference;
    throw std::invalid_argument("task must be fr or nr, got '" + name + "'");
}

std::string task_name(Task task) {
    return task == Task::FullReference ? "fr" : "nr";
}

std::vector<std::pair<std::string, Tensor>> Model::named_params() {
    std::vector<std::pair<std::string, Tensor>> out;
    auto collect = [&out](const std::string& name, Tensor& t) {
        out.emplace_back(name, t);
    };
    sfem.visit(collect);
    if (frrb) frrb->visit(collect);
    if (nrrb) nrrb->visit(collect);
    return out;
}

Tensor Model::score_fr(const Tensor& lq_features, const Tensor& hq_features) {
    if (!frrb) throw std::logic_error("score_fr: model has no FR head");
    SfemOutput lq = sfem_forward(lq_features, sfem, cfg.sfem, cfg.branches);
    SfemOutput hq = sfem_forward(hq_features, sfem, cfg.sfem, cfg.branches);
    std::optional<Tensor> d_s, d_f;
    if (lq.spatial) d_s = feature_distance(cfg.metric, *lq.spatial, *hq.spatial);
    if (lq.frequency) d_f = feature_distance(cfg.metric, *lq.frequency, *hq.frequency);
    return frrb_forward(d_s, d_f, *frrb);
}

Tensor Model::score_nr(const Tensor& lq_features) {
    if (!nrrb) throw std::logic_error("score_nr: model has no NR head");
    SfemOutput lq = sfem_forward(lq_features, sfem, cfg.sfem, cfg.branches);
    return nrrb_forward(lq.spatial, lq.frequency, *nrrb);
}

Model init_model(const ModelConfig& cfg) {
    Model model;
    model.cfg = cfg;
    model.sfem = init_sfem_params(cfg.sfem, cfg.seed);

    const std::size_t channels = cfg.sfem.scales * cfg.sfem.channels;
    const std::size_t spatial = cfg.sfem.pooled_extent * cfg.sfem.pooled_extent;
    if (cfg.task == Task::FullReference) {
        const std::size_t width = distance_width(cfg.metric, channels, spatial);
        model.frrb = init_frrb(
            cfg.branches.spatial ? std::optional(width) : std::nullopt,
            cfg.branches.frequency ? std::optional(width) : std::nullopt, cfg.seed + 100);
    } else {
        model.nrrb = init_nrrb(
            cfg.branches.spatial ? std::optional(channels) : std::nullopt,
            cfg.branches.frequency ? std::optional(channels) : std::nullopt,
            cfg.seed + 200);
    }
    return model;
}

std::uint64_t fnv1a_hash(const std::string& text) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

void save_checkpoint(Checkpoint& ckpt, const std::string& path) {
    auto params = ckpt.model.named_params();
    auto os = binio::open_out(path);
    binio::write_bytes(os, "SIQC", 4);
    binio::write_le<std::uint32_t>(os, kCheckpointVersion);
    binio::write_le<std::uint64_t>(os, ckpt.config_hash);

    const auto& cfg = ckpt.model.cfg;
    binio::write_le<std::uint8_t>(os, cfg.task == Task::FullReference ? 0 : 1);
    binio::write_le<std::uint8_t>(os, cfg.branches.spatial ? 1 : 0);
    binio::write_le<std::uint8_t>(os, cfg.branches.frequency ? 1 : 0);
    binio::write_le<std::uint8_t>(os, std::uint8_t(cfg.metric));
    binio::write_le<std::uint32_t>(os, std::uint32_t(cfg.sfem.scales));
    binio::write_le<std::uint32_t>(os, std::uint32_t(cfg.sfem.channels));
    binio::write_le<std::uint32_t>(os, std::uint32_t(cfg.sfem.kernel_size));
    binio::write_le<std::uint32_t>(os, std::uint32_t(cfg.sfem.pooled_extent));
    binio::write_le<std::uint64_t>(os, cfg.seed);
    binio::write_le<std::uint8_t>(os, ckpt.adam ? 1 : 0);

    binio::write_le<std::uint32_t>(os, std::uint32_t(params.size()));
    for (auto& [name, tensor] : params) {
        binio::write_le<std::uint32_t>(os, std::uint32_t(name.size()));
        binio::write_bytes(os, name.data(), name.size());
        binio::write_le<std::uint32_t>(os, std::uint32_t(tensor.rank()));
        for (std::size_t e : tensor.shape()) {
            binio::write_le<std::uint32_t>(os, std::uint32_t(e));
        }
        binio::write_f64(os, tensor.data().data(), tensor.size());
    }
    if (ckpt.adam) {
        if (ckpt.adam->m.size() != params.size() || ckpt.adam->v.size() != params.size()) {
            throw std::logic_error("checkpoint: adam state does not match parameters");
        }
        binio::write_le<std::uint64_t>(os, ckpt.adam->step);
        for (std::size_t i = 0; i < params.size(); ++i) {
            binio::write_f64(os, ckpt.adam->m[i].data(), ckpt.adam->m[i].size());
            binio::write_f64(os, ckpt.adam->v[i].data(), ckpt.adam->v[i].size());
        }
    }
    if (!os) throw std::runtime_error("failed to write " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
    auto is = binio::open_in(path);
    binio::expect_magic(is, "SIQC", path);
    const auto version = binio::read_le<std::uint32_t>(is, "version");
    if (version != kCheckpointVersion) {
        throw std::runtime_error("unsupported checkpoint version " +
                                 std::to_string(version) + " in " + path);
    }
    Checkpoint ckpt;
    ckpt.config_hash = binio::read_le<std::uint64_t>(is, "config hash");

    ModelConfig cfg;
    cfg.task = binio::read_le<std::uint8_t>(is, "task") == 0 ? Task::FullReference
                                                             : Task::NoReference;
    cfg.branches.spatial = binio::read_le<std::uint8_t>(is, "branch mask") != 0;
    cfg.branches.frequency = binio::read_le<std::uint8_t>(is, "branch mask") != 0;
    cfg.metric = DistanceMetric(binio::read_le<std::uint8_t>(is, "metric"));
    cfg.sfem.scales = binio::read_le<std::uint32_t>(is, "scales");
    cfg.sfem.channels = binio::read_le<std::uint32_t>(is, "channels");
    cfg.sfem.kernel_size = binio::read_le<std::uint32_t>(is, "kernel size");
    cfg.sfem.pooled_extent = binio::read_le<std::uint32_t>(is, "pooled extent");
    cfg.seed = binio::read_le<std::uint64_t>(is, "seed");
    const bool has_adam = binio::read_le<std::uint8_t>(is, "adam flag") != 0;

    ckpt.model = init_model(cfg);
    auto params = ckpt.model.named_params();
    const auto count = binio::read_le<std::uint32_t>(is, "tensor count");
    if (count != params.size()) {
        throw std::runtime_error("checkpoint " + path + " holds " + std::to_string(count) +
                                 " tensors, model expects " + std::to_string(params.size()));
    }
    for (auto& [name, tensor] : params) {
        const auto name_len = binio::read_le<std::uint32_t>(is, "name length");
        std::string stored(name_len, '\0');
        is.read(stored.data(), name_len);
        if (!is || stored != name) {
            throw std::runtime_error("checkpoint " + path + ": expected tensor '" + name +
                                     "', found '" + stored + "'");
        }
        const auto rank = binio::read_le<std::uint32_t>(is, "rank");
        std::vector<std::size_t> shape(rank);
        for (auto& e : shape) e = binio::read_le<std::uint32_t>(is, "extent");
        if (shape != tensor.shape()) {
            throw std::runtime_error("checkpoint " + path + ": shape mismatch for '" +
                                     name + "'");
        }
        binio::read_f64(is, tensor.data().data(), tensor.size(), "payload of " + name);
    }
    if (has_adam) {
        AdamSnapshot adam;
        adam.step = binio::read_le<std::uint64_t>(is, "adam step");
        for (auto& [name, tensor] : params) {
            adam.m.emplace_back(tensor.size());
            binio::read_f64(is, adam.m.back().data(), tensor.size(), "adam m of " + name);
            adam.v.emplace_back(tensor.size());
            binio::read_f64(is, adam.v.back().data(), tensor.size(), "adam v of " + name);
        }
        ckpt.adam = std::move(adam);
    }
    if (is.peek() != std::char_traits<char>::eof()) {
        throw std::runtime_error("trailing bytes after checkpoint payload in " + path);
    }
    return ckpt;
}

}  // namespace samiqa
