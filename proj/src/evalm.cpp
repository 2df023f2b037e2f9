#include "samiqa/evalm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace samiqa {

std::vector<double> fractional_ranks(const std::vector<double>& values) {
    const std::size_t n = values.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<double> ranks(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
        const double avg = 0.5 * double(i + j) + 1.0;  // 1-based average rank
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
        i = j + 1;
    }
    return ranks;
}

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) {
        throw std::invalid_argument("pearson: length mismatch " +
                                    std::to_string(a.size()) + " vs " +
                                    std::to_string(b.size()));
    }
    const std::size_t n = a.size();
    if (n < 2) throw std::invalid_argument("pearson: need at least 2 samples");
    double ma = 0.0, mb = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        ma += a[i];
        mb += b[i];
    }
    ma /= double(n);
    mb /= double(n);
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double da = a[i] - ma, db = b[i] - mb;
        sab += da * db;
        saa += da * da;
        sbb += db * db;
    }
    if (saa == 0.0 || sbb == 0.0) {
        throw std::domain_error("pearson: zero variance input, correlation undefined");
    }
    return sab / std::sqrt(saa * sbb);
}

double srcc(const std::vector<double>& pred, const std::vector<double>& label) {
    return pearson(fractional_ranks(pred), fractional_ranks(label));
}

namespace {

// 4-parameter logistic fitted by plain gradient descent on MSE; deterministic.
std::vector<double> logistic_map(const std::vector<double>& pred,
                                 const std::vector<double>& label) {
    const std::size_t n = pred.size();
    const double lo = *std::min_element(label.begin(), label.end());
    const double hi = *std::max_element(label.begin(), label.end());
    const double pmin = *std::min_element(pred.begin(), pred.end());
    const double pmax = *std::max_element(pred.begin(), pred.end());
    double b1 = lo, b2 = hi, b3 = 0.5 * (pmin + pmax);
    double b4 = (pmax - pmin) > 0.0 ? (pmax - pmin) / 4.0 : 1.0;
    const double lr = 1e-3;
    for (int it = 0; it < 2000; ++it) {
        double g1 = 0, g2 = 0, g3 = 0, g4 = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const double s = 1.0 / (1.0 + std::exp(-(pred[i] - b3) / b4));
            const double y = b1 + (b2 - b1) * s;
            const double e = 2.0 * (y - label[i]) / double(n);
            const double ds = s * (1.0 - s) * (b2 - b1);
            g1 += e * (1.0 - s);
            g2 += e * s;
            g3 += e * ds * (-1.0 / b4);
            g4 += e * ds * (-(pred[i] - b3) / (b4 * b4));
        }
        b1 -= lr * g1;
        b2 -= lr * g2;
        b3 -= lr * g3;
        b4 -= lr * g4;
        if (std::fabs(b4) < 1e-9) b4 = 1e-9;
    }
    std::vector<double> mapped(n);
    for (std::size_t i = 0; i < n; ++i) {
        mapped[i] = b1 + (b2 - b1) / (1.0 + std::exp(-(pred[i] - b3) / b4));
    }
    return mapped;
}

}  // namespace

double plcc(const std::vector<double>& pred, const std::vector<double>& label,
            bool logistic_fit) {
    if (logistic_fit) return pearson(logistic_map(pred, label), label);
    return pearson(pred, label);
}

double psnr_baseline(const std::vector<double>& ref, const std::vector<double>& dist) {
    if (ref.size() != dist.size() || ref.empty()) {
        throw std::invalid_argument("psnr: extent mismatch");
    }
    double mse = 0.0;
    for (std::size_t i = 0; i < ref.size(); ++i) {
        const double d = ref[i] - dist[i];
        mse += d * d;
    }
    mse /= double(ref.size());
    if (mse == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(1.0 / mse);
}

std::string format_value(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    if (std::isnan(v)) return "undefined";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

std::string format_record(const ReportRecord& r) {
    char hash[20];
    std::snprintf(hash, sizeof(hash), "%016llx", static_cast<unsigned long long>(r.config_hash));
    return r.dataset + "\t" + r.split + "\t" + r.task + "\t" + r.metric + "\t" +
           r.value + "\t" + hash;
}

}  // namespace samiqa
