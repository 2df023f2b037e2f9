#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace samiqa {

// Fractional (average) ranks for ties, 1-based.
std::vector<double> fractional_ranks(const std::vector<double>& values);

double pearson(const std::vector<double>& a, const std::vector<double>& b);

// Spearman rank correlation: Pearson on fractional ranks.
double srcc(const std::vector<double>& pred, const std::vector<double>& label);

// Pearson on raw values; logistic_fit first maps pred through a fitted
// 4-parameter logistic before correlating.
double plcc(const std::vector<double>& pred, const std::vector<double>& label,
            bool logistic_fit = false);

// Peak 1.0; identical images give +infinity.
double psnr_baseline(const std::vector<double>& ref, const std::vector<double>& dist);

struct ReportRecord {
    std::string dataset;
    std::string split;
    std::string task;
    std::string metric;
    std::string value;  // formatted number, "inf" or "undefined"
    std::uint64_t config_hash = 0;
};

std::string format_record(const ReportRecord& r);
std::string format_value(double v);

}  // namespace samiqa
