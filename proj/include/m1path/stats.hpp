#pragma once

#include <cstdint>
#include <vector>

namespace m1path {

double median(std::vector<double> values);

// Two-sample Kolmogorov-Smirnov statistic sup |F_a - F_b|.
double ks_statistic(std::vector<double> a, std::vector<double> b);

// Standard error of the KS statistic from resampling both samples with replacement.
double ks_bootstrap_se(const std::vector<double>& a, const std::vector<double>& b,
                       std::size_t resamples, std::uint64_t seed);

}  // namespace m1path
