#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "samiqa/pipeline.hpp"
#include "samiqa/spectral.hpp"

namespace py = pybind11;
using namespace samiqa;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Tensor tensor_from(const Array& arr) {
    std::vector<std::size_t> shape(arr.ndim());
    for (py::ssize_t i = 0; i < arr.ndim(); ++i) shape[i] = std::size_t(arr.shape(i));
    std::vector<double> data(arr.data(), arr.data() + arr.size());
    return Tensor(std::move(shape), std::move(data));
}

Array array_from(const Tensor& t) {
    std::vector<py::ssize_t> shape(t.shape().begin(), t.shape().end());
    Array out(shape);
    std::copy(t.data().begin(), t.data().end(), out.mutable_data());
    return out;
}

EncoderConfig encoder_config(std::size_t patch, std::size_t channels,
                             std::uint64_t seed, std::size_t extent) {
    EncoderConfig cfg;
    cfg.patch_size = patch;
    cfg.channels = channels;
    cfg.seed = seed;
    cfg.image_extent = extent;
    return cfg;
}

TrainConfig train_config(const std::string& task, std::size_t epochs, double lr,
                         std::size_t batch, std::uint64_t seed,
                         const std::string& distance, const std::string& branches,
                         bool augment, std::size_t channels) {
    TrainConfig cfg;
    cfg.task = parse_task(task);
    cfg.epochs = epochs;
    cfg.adam.lr = lr;
    cfg.batch_size = batch;
    cfg.seed = seed;
    cfg.metric = parse_distance_metric(distance);
    cfg.branches = parse_branch_mask(branches);
    cfg.augment = augment;
    cfg.sfem.channels = channels;
    return cfg;
}

}  // namespace

PYBIND11_MODULE(_samiqa, m) {
    m.doc() = "spatial-frequency image quality assessment core";

    m.def(
        "toy_encode",
        [](const Array& image, std::size_t patch, std::size_t channels,
           std::uint64_t seed) {
            if (image.ndim() != 2) throw std::invalid_argument("image must be 2-D");
            ToyEncoder enc(encoder_config(patch, channels, seed,
                                          std::size_t(image.shape(0))));
            return array_from(enc.encode(tensor_from(image)).values);
        },
        py::arg("image"), py::arg("patch") = 8, py::arg("channels") = 16,
        py::arg("seed") = 42,
        "Frozen random-projection patch encoder; returns C x grid x grid features.");

    m.def(
        "rfft2",
        [](const Array& x) {
            Spectrum s = rfft2(tensor_from(x));
            const std::vector<py::ssize_t> shape = {py::ssize_t(s.channels),
                                                    py::ssize_t(s.height),
                                                    py::ssize_t(s.width_bins)};
            Array re(shape), im(shape);
            std::copy(s.re.begin(), s.re.end(), re.mutable_data());
            std::copy(s.im.begin(), s.im.end(), im.mutable_data());
            return py::make_tuple(re, im);
        },
        py::arg("x"), "Half-spectrum 2-D real FFT of a C x H x W tensor.");

    m.def(
        "irfft2",
        [](const Array& re, const Array& im, std::size_t height, std::size_t width) {
            if (re.ndim() != 3 || im.ndim() != 3) {
                throw std::invalid_argument("spectrum arrays must be 3-D");
            }
            Spectrum s;
            s.channels = std::size_t(re.shape(0));
            s.height = std::size_t(re.shape(1));
            s.width_bins = std::size_t(re.shape(2));
            s.re.assign(re.data(), re.data() + re.size());
            s.im.assign(im.data(), im.data() + im.size());
            return array_from(irfft2(s, height, width));
        },
        py::arg("re"), py::arg("im"), py::arg("height"), py::arg("width"));

    m.def(
        "fourier_conv",
        [](const Array& x, const Array& w, const Array& b, bool linear) {
            return array_from(fourier_conv(tensor_from(x), tensor_from(w),
                                           tensor_from(b), linear));
        },
        py::arg("x"), py::arg("w"), py::arg("b"), py::arg("linear") = false,
        "Pointwise spectral mixing between forward and inverse FFTs.");

    m.def(
        "conv2d",
        [](const Array& x, const Array& w, const Array& b, std::size_t stride,
           std::size_t padding) {
            return array_from(conv2d(tensor_from(x), tensor_from(w), tensor_from(b),
                                     stride, padding));
        },
        py::arg("x"), py::arg("w"), py::arg("b"), py::arg("stride") = 1,
        py::arg("padding") = 0);

    m.def(
        "adaptive_avg_pool2d",
        [](const Array& x, std::size_t out_h, std::size_t out_w) {
            return array_from(adaptive_avg_pool2d(tensor_from(x), out_h, out_w));
        },
        py::arg("x"), py::arg("out_h"), py::arg("out_w"));

    m.def(
        "feature_distance",
        [](const std::string& metric, const Array& a, const Array& b) {
            return array_from(feature_distance(parse_distance_metric(metric),
                                               tensor_from(a), tensor_from(b)));
        },
        py::arg("metric"), py::arg("a"), py::arg("b"),
        "Per-channel distance vector between two C x H x W feature maps.");

    m.def("srcc", &srcc, py::arg("pred"), py::arg("label"),
          "Spearman rank correlation with fractional ranks for ties.");
    m.def("plcc", &plcc, py::arg("pred"), py::arg("label"),
          py::arg("logistic_fit") = false);
    m.def("psnr", &psnr_baseline, py::arg("ref"), py::arg("dist"));

    m.def(
        "gen_corpus",
        [](const std::string& out_dir, std::uint64_t seed, std::size_t refs,
           int levels, std::size_t extent) {
            CorpusConfig cfg;
            cfg.out_dir = out_dir;
            cfg.seed = seed;
            cfg.references = refs;
            cfg.levels = levels;
            cfg.extent = extent;
            return make_corpus(cfg).samples.size();
        },
        py::arg("out_dir"), py::arg("seed") = 7, py::arg("refs") = 60,
        py::arg("levels") = 5, py::arg("extent") = 128,
        "Generate the synthetic distortion corpus; returns the sample count.");

    m.def(
        "train",
        [](const std::string& manifest_path, const std::string& ckpt_out,
           const std::string& task, std::size_t epochs, double lr, std::size_t batch,
           std::uint64_t seed, const std::string& distance,
           const std::string& branches, bool augment, std::size_t patch,
           std::size_t channels, std::uint64_t enc_seed) {
            Manifest manifest = load_manifest(manifest_path);
            ToyFeatureProvider provider(
                encoder_config(patch, channels, enc_seed, manifest.extent));
            TrainConfig cfg = train_config(task, epochs, lr, batch, seed, distance,
                                           branches, augment, channels);
            FitResult result = fit(manifest, cfg, provider);
            save_checkpoint(result.best, ckpt_out);
            py::dict out;
            out["best_val_srcc"] = result.best_val_srcc;
            out["epochs"] = result.log.size();
            out["config_hash"] = result.best.config_hash;
            return out;
        },
        py::arg("manifest"), py::arg("out"), py::arg("task") = "fr",
        py::arg("epochs") = 100, py::arg("lr") = 2e-5, py::arg("batch") = 16,
        py::arg("seed") = 7, py::arg("distance") = "l1", py::arg("branches") = "bf",
        py::arg("augment") = true, py::arg("patch") = 8, py::arg("channels") = 16,
        py::arg("enc_seed") = 42);

    m.def(
        "evaluate",
        [](const std::string& ckpt_path, const std::string& manifest_path,
           const std::string& split, std::size_t patch, std::size_t channels,
           std::uint64_t enc_seed) {
            Manifest manifest = load_manifest(manifest_path);
            Checkpoint ckpt = load_checkpoint(ckpt_path);
            ToyFeatureProvider provider(
                encoder_config(patch, channels, enc_seed, manifest.extent));
            SplitEval eval = evaluate_split(ckpt.model, manifest, split, provider);
            py::dict out;
            out["srcc"] = eval.srcc_value;
            out["plcc"] = eval.plcc_value;
            out["pred"] = eval.pred;
            out["label"] = eval.label;
            return out;
        },
        py::arg("ckpt"), py::arg("manifest"), py::arg("split") = "test",
        py::arg("patch") = 8, py::arg("channels") = 16, py::arg("enc_seed") = 42);
}
