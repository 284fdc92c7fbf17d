#include "m1path/stats.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "m1path/error.hpp"

namespace m1path {

double median(std::vector<double> values) {
  if (values.empty()) throw DomainError("median of an empty sample");
  const std::size_t mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
  double hi = values[mid];
  if (values.size() % 2 == 1) return hi;
  double lo = *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lo + hi);
}

double ks_statistic(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw DomainError("KS statistic needs two non-empty samples");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double best = 0.0;
  while (i < a.size() && j < b.size()) {
    double v = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == v) ++i;
    while (j < b.size() && b[j] == v) ++j;
    best = std::max(best, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return best;
}

double ks_bootstrap_se(const std::vector<double>& a, const std::vector<double>& b,
                       std::size_t resamples, std::uint64_t seed) {
  if (resamples < 2) throw DomainError("bootstrap needs at least two resamples");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick_a(0, a.size() - 1);
  std::uniform_int_distribution<std::size_t> pick_b(0, b.size() - 1);
  std::vector<double> stats;
  stats.reserve(resamples);
  std::vector<double> ra(a.size()), rb(b.size());
  for (std::size_t r = 0; r < resamples; ++r) {
    for (double& v : ra) v = a[pick_a(rng)];
    for (double& v : rb) v = b[pick_b(rng)];
    stats.push_back(ks_statistic(ra, rb));
  }
  double mean = 0.0;
  for (double s : stats) mean += s;
  mean /= static_cast<double>(stats.size());
  double var = 0.0;
  for (double s : stats) var += (s - mean) * (s - mean);
  return std::sqrt(var / static_cast<double>(stats.size() - 1));
}

}  // namespace m1path
