#include <algorithm>
#include <cmath>
#include <string>

#include "m1path/error.hpp"
#include "m1path/m1_metric.hpp"
#include "m1path/regularizer.hpp"

namespace m1path {

namespace {

constexpr int kMaxHalvings = 60;

const FlatSpot& flat_at(const ParametricRep& rep, double t) {
  for (const FlatSpot& f : rep.flat_spots()) {
    if (f.t == t) return f;
  }
  throw InternalConsistencyError("canonical rep has no flat spot at t = " + std::to_string(t));
}

bool is_jump_time(const std::vector<Jump>& all, double t) {
  auto it = std::lower_bound(all.begin(), all.end(), t,
                             [](const Jump& j, double value) { return j.t < value; });
  return it != all.end() && it->t == t;
}

bool has_jump_in(const std::vector<Jump>& all, double a, double b) {
  for (const Jump& j : all) {
    if (j.t >= a && j.t <= b) return true;
  }
  return false;
}

}  // namespace

PartitionSpec build_partition(const CadlagPath& x, const ParametricRep& rep, double eps) {
  if (!(eps > 0.0) || !std::isfinite(eps)) throw DomainError("build_partition: eps must be > 0");
  const double horizon = x.horizon();
  const std::vector<Jump> all = jumps(x);
  if (!all.empty() && all.back().t == horizon) {
    throw UnsupportedInput("jump at horizon T = " + std::to_string(horizon));
  }
  PartitionSpec spec;
  spec.eps = eps;
  spec.eps1 = eps / 10.0;
  spec.horizon = horizon;
  const std::vector<Jump> big = jumps(x, spec.eps1);
  const std::size_t m = big.size();
  for (const Jump& j : big) {
    const FlatSpot& f = flat_at(rep, j.t);
    spec.large_jumps.push_back({j.t, j.size, 0.0, f.s1, f.s2, 0.0, 0});
  }

  auto feasible = [&](double e2) {
    const double s_gap = spec.eps1 / (6.0 * static_cast<double>(m) * horizon);
    for (std::size_t j = 0; j < m; ++j) {
      const double t = big[j].t;
      double before = j == 0 ? 0.0 : big[j - 1].t + 2.0 * e2;
      if (!(t - 2.0 * e2 > before)) return false;
      if (j + 1 == m && !(t + 2.0 * e2 < horizon)) return false;
      if (!(oscillation(x, t, std::min(horizon, t + 3.0 * e2)) < spec.eps1 / 2.0)) return false;
      if (!(oscillation_before(x, std::max(0.0, t - 3.0 * e2), t) < spec.eps1 / 2.0)) return false;
      if (is_jump_time(all, t - 2.0 * e2) || is_jump_time(all, t + 2.0 * e2)) return false;
      // Connecting intervals free of smaller jumps of x.
      if (has_jump_in(all, t - 2.0 * e2, std::nextafter(t, 0.0))) return false;
      if (has_jump_in(all, std::nextafter(t, horizon), t + 2.0 * e2)) return false;
      const LargeJump& lj = spec.large_jumps[j];
      if (lj.s_start - rep.lower_inverse(t - 2.0 * e2) > s_gap) return false;
      if (rep.lower_inverse(t + 2.0 * e2) - lj.s_end > s_gap) return false;
    }
    return true;
  };

  double e2 = spec.eps1 / 2.0;
  int halvings = 0;
  while (!feasible(e2)) {
    if (++halvings > kMaxHalvings) {
      throw InfeasiblePartition("no eps2 down to eps1 / 2^61 separates the " + std::to_string(m) +
                                " jumps larger than eps1 = " + std::to_string(spec.eps1));
    }
    e2 /= 2.0;
  }
  spec.eps2 = e2;

  double min_width = 1.0;
  for (LargeJump& lj : spec.large_jumps) {
    lj.s_minus = rep.lower_inverse(lj.t - 2.0 * e2);
    lj.s_plus = rep.lower_inverse(lj.t + 2.0 * e2);
    lj.pieces = static_cast<std::size_t>(std::ceil(2.0 * lj.size / e2));
    min_width = std::min(min_width, (lj.s_end - lj.s_start) / static_cast<double>(lj.pieces));
  }
  spec.eps3 = m == 0 ? e2 / 2.0
                     : std::min(e2 / (2.0 * static_cast<double>(m)), horizon * min_width / 2.0);

  spec.eps4 = spec.eps3;
  halvings = 0;
  while (!(ws_osc(x, spec.eps4) < spec.eps1)) {
    if (++halvings > kMaxHalvings) {
      throw InfeasiblePartition("strong oscillation of x stays above eps1 for every eps4 tried");
    }
    spec.eps4 /= 2.0;
  }

  double prev = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    const LargeJump& lj = spec.large_jumps[j];
    spec.subintervals.push_back({prev, lj.s_minus, SubintervalKind::small_jump, j});
    spec.subintervals.push_back({lj.s_minus, lj.s_start, SubintervalKind::connecting, j});
    spec.subintervals.push_back({lj.s_start, lj.s_end, SubintervalKind::large_jump, j});
    spec.subintervals.push_back({lj.s_end, lj.s_plus, SubintervalKind::connecting, j});
    prev = lj.s_plus;
  }
  spec.subintervals.push_back({prev, 1.0, SubintervalKind::small_jump, m});
  return spec;
}

TransportedRep transported_coupling_rep(const CadlagPath& x, const CadlagPath& xn,
                                        const ParametricRep& rep, double mesh) {
  const double horizon = x.horizon();
  M1Estimate est = m1_distance(xn, x, mesh, kCouplingTimeWeight);
  CouplingReps reps = coupling_to_reps(xn, x, est.coupling);
  const std::vector<Jump> all = jumps(x);

  auto sigma_of = [&](double v, double t) {
    auto it = std::lower_bound(all.begin(), all.end(), t,
                               [](const Jump& j, double value) { return j.t < value; });
    if (it != all.end() && it->t == t) {
      const FlatSpot& f = flat_at(rep, t);
      double p = std::clamp((v - it->left) / (it->right - it->left), 0.0, 1.0);
      return f.s1 + p * (f.s2 - f.s1);
    }
    if (t >= horizon) return 1.0;
    return rep.lower_inverse(t);
  };

  auto on_n = reps.rep_x.knots();
  auto on_x = reps.rep_y.knots();
  // Runs of a repeated point of xn: the top of a jump keeps the first parameter,
  // the foot of a jump (and the final point) keeps the last, anything else the first.
  struct Run {
    RepKnot first;
    double last_s = 0.0;
  };
  std::vector<Run> runs;
  for (std::size_t k = 0; k < on_n.size(); ++k) {
    RepKnot next{sigma_of(on_x[k].u, on_x[k].r), on_n[k].u, on_n[k].r};
    if (!runs.empty() && runs.back().first.u == next.u && runs.back().first.r == next.r) {
      runs.back().last_s = next.s;
      continue;
    }
    runs.push_back({next, next.s});
  }
  std::vector<RepKnot> knots;
  knots.reserve(runs.size());
  for (std::size_t i = 0; i < runs.size(); ++i) {
    RepKnot kn = runs[i].first;
    bool foot = i > 0 && runs[i - 1].first.r == kn.r;
    bool top = i + 1 < runs.size() && runs[i + 1].first.r == kn.r;
    if ((foot && !top) || i + 1 == runs.size()) kn.s = runs[i].last_s;
    knots.push_back(kn);
  }
  if (knots.size() < 2) knots.push_back({1.0, knots.back().u, knots.back().r});
  knots.front().s = 0.0;
  knots.back().s = 1.0;

  // Spread runs of equal parameter values inside a third of the neighbouring gap.
  std::vector<double> base(knots.size());
  for (std::size_t i = 0; i < knots.size(); ++i) base[i] = knots[i].s;
  std::size_t a = 0;
  while (a < knots.size()) {
    std::size_t b = a;
    while (b + 1 < knots.size() && base[b + 1] == base[a]) ++b;
    if (b > a) {
      const double count = static_cast<double>(b - a + 1);
      if (a == 0) {
        double gap = b + 1 < knots.size() ? base[b + 1] - base[a] : 1.0;
        for (std::size_t i = a; i <= b; ++i) {
          knots[i].s = base[a] + static_cast<double>(i - a) / count * gap / 3.0;
        }
      } else {
        double gap = base[a] - base[a - 1];
        for (std::size_t i = a; i <= b; ++i) {
          knots[i].s = base[a] - static_cast<double>(b - i) / count * gap / 3.0;
        }
      }
    }
    a = b + 1;
  }
  return {ParametricRep(std::move(knots)), est.coupling.cost};
}

}  // namespace m1path
