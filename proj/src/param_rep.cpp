#include "m1path/param_rep.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <string>

#include "m1path/error.hpp"

namespace m1path {

ParametricRep::ParametricRep(std::vector<RepKnot> knots, std::vector<FlatSpot> flat_spots)
    : knots_(std::move(knots)), flat_spots_(std::move(flat_spots)) {
  if (knots_.size() < 2) throw DomainError("parametric rep needs at least two knots");
  if (knots_.front().s != 0.0 || knots_.back().s != 1.0) {
    throw DomainError("parametric rep knots must start at s = 0 and end at s = 1");
  }
  for (std::size_t i = 0; i < knots_.size(); ++i) {
    const RepKnot& k = knots_[i];
    if (!std::isfinite(k.s) || !std::isfinite(k.u) || !std::isfinite(k.r)) {
      throw DomainError("knots[" + std::to_string(i) + "]: non-finite entry");
    }
    if (i > 0 && !(k.s > knots_[i - 1].s)) {
      throw DomainError("knots[" + std::to_string(i) + "]: s must increase strictly");
    }
  }
  if (flat_spots_.empty()) flat_spots_ = detect_flat_spots(knots_);
}

std::size_t ParametricRep::piece_index(double s) const {
  auto it = std::upper_bound(knots_.begin(), knots_.end(), s,
                             [](double value, const RepKnot& k) { return value < k.s; });
  auto idx = static_cast<std::ptrdiff_t>(it - knots_.begin()) - 1;
  idx = std::clamp<std::ptrdiff_t>(idx, 0, static_cast<std::ptrdiff_t>(knots_.size()) - 2);
  return static_cast<std::size_t>(idx);
}

double ParametricRep::u(double s) const {
  std::size_t k = piece_index(s);
  const RepKnot& a = knots_[k];
  const RepKnot& b = knots_[k + 1];
  if (s == a.s || a.u == b.u) return a.u;
  if (s == b.s) return b.u;
  return a.u + (b.u - a.u) * ((s - a.s) / (b.s - a.s));
}

double ParametricRep::r(double s) const {
  std::size_t k = piece_index(s);
  const RepKnot& a = knots_[k];
  const RepKnot& b = knots_[k + 1];
  if (s == a.s || a.r == b.r) return a.r;
  if (s == b.s) return b.r;
  return a.r + (b.r - a.r) * ((s - a.s) / (b.s - a.s));
}

double ParametricRep::r_slope(double s) const {
  std::size_t k = piece_index(s);
  return (knots_[k + 1].r - knots_[k].r) / (knots_[k + 1].s - knots_[k].s);
}

double ParametricRep::slope_bound() const {
  double best = 0.0;
  for (std::size_t k = 0; k + 1 < knots_.size(); ++k) {
    best = std::max(best, std::abs((knots_[k + 1].r - knots_[k].r) / (knots_[k + 1].s - knots_[k].s)));
  }
  return best;
}

double ParametricRep::lower_inverse(double t) const {
  auto it = std::lower_bound(knots_.begin(), knots_.end(), t,
                             [](const RepKnot& k, double value) { return k.r < value; });
  if (it == knots_.begin()) return 0.0;
  if (it == knots_.end()) return 1.0;
  if (it->r == t) return it->s;
  const RepKnot& a = *(it - 1);
  const RepKnot& b = *it;
  return a.s + (b.s - a.s) * ((t - a.r) / (b.r - a.r));
}

double ParametricRep::upper_inverse(double t) const {
  auto it = std::upper_bound(knots_.begin(), knots_.end(), t,
                             [](double value, const RepKnot& k) { return value < k.r; });
  if (it == knots_.end()) return 1.0;
  if (it == knots_.begin()) return 0.0;
  const RepKnot& a = *(it - 1);
  const RepKnot& b = *it;
  if (a.r == t) return a.s;
  return a.s + (b.s - a.s) * ((t - a.r) / (b.r - a.r));
}

std::vector<FlatSpot> detect_flat_spots(std::span<const RepKnot> knots) {
  std::vector<FlatSpot> out;
  std::size_t i = 0;
  while (i + 1 < knots.size()) {
    if (knots[i + 1].r != knots[i].r) {
      ++i;
      continue;
    }
    std::size_t j = i + 1;
    while (j + 1 < knots.size() && knots[j + 1].r == knots[i].r) ++j;
    out.push_back({knots[i].r, knots[i].s, knots[j].s, knots[j].s - knots[i].s});
    i = j;
  }
  return out;
}

std::int64_t ladder_length(std::size_t rank) {
  if (rank == 0 || rank > kMaxLadderJumps) throw DomainError("ladder rank outside [1, 30]");
  if (rank == 1) return std::int64_t{5} << 58;  // 5/12
  return std::int64_t{3} << (60 - 2 * rank);      // 4^-rank
}

std::vector<LadderEntry> flat_ladder(const CadlagPath& x) {
  const double horizon = x.horizon();
  std::vector<Jump> all = jumps(x);
  double terminal_size = 0.0;
  if (!all.empty() && all.back().t == horizon) {
    terminal_size = all.back().size;
    all.pop_back();
  }
  if (all.size() > kMaxLadderJumps) {
    throw DomainError("canonical_rep: " + std::to_string(all.size()) +
                      " jumps exceed the 30-entry flat ladder; pre-filter with jumps(x, eps)");
  }
  std::vector<std::size_t> order(all.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (all[a].size != all[b].size) return all[a].size > all[b].size;
    return all[a].t < all[b].t;
  });

  std::map<double, LadderEntry> levels;
  levels[horizon] = LadderEntry{horizon, terminal_size, 0, kLadderHalf, kLadderHalf};
  for (std::size_t rank = 1; rank <= order.size(); ++rank) {
    const Jump& j = all[order[rank - 1]];
    std::int64_t f = ladder_length(rank);
    // The slope-2T piece leaving the new flat spot meets the next level above,
    // whose flat spot gives up exactly f.
    auto above = levels.upper_bound(j.t);
    above->second.final_len -= f;
    if (above->second.final_len <= 0) {
      throw InternalConsistencyError("flat ladder produced a non-positive flat spot");
    }
    levels[j.t] = LadderEntry{j.t, j.size, rank, f, f};
  }
  std::vector<LadderEntry> out;
  out.reserve(levels.size());
  for (auto& [t, e] : levels) out.push_back(e);
  return out;
}

ParametricRep canonical_rep(const CadlagPath& x) {
  const double horizon = x.horizon();
  const double two_t = 2.0 * horizon;
  const std::vector<LadderEntry> ladder = flat_ladder(x);
  auto to_s = [](std::int64_t units) {
    return static_cast<double>(units) / static_cast<double>(kLadderUnitsPerOne);
  };

  std::vector<RepKnot> knots;
  std::vector<FlatSpot> flats;
  if (ladder.size() == 1 && ladder.front().size == 0.0) {
    // continuous: r(s) = T s
    for (const Node& nd : x.nodes()) {
      if (!knots.empty() && nd.t == knots.back().r) continue;
      knots.push_back({nd.t / horizon, nd.v, nd.t});
    }
    if (knots.back().r < horizon) knots.push_back({1.0, knots.back().u, horizon});
    knots.back().s = 1.0;
    return ParametricRep(std::move(knots));
  }
  knots.push_back({0.0, x.value_at(0.0), 0.0});
  auto nodes = x.nodes();
  std::size_t node = 0;
  std::int64_t flat_before = 0;  // ladder units of flat spots at levels already passed
  for (const LadderEntry& level : ladder) {
    // Rising part: interior nodes of x strictly between the previous level and this one.
    for (; node < nodes.size() && nodes[node].t < level.t; ++node) {
      if (nodes[node].t <= knots.back().r) continue;
      double s = nodes[node].t / two_t + to_s(flat_before);
      knots.push_back({s, nodes[node].v, nodes[node].t});
    }
    double s_start = level.t / two_t + to_s(flat_before);
    flat_before += level.final_len;
    double s_end = level.t == horizon ? 1.0 : level.t / two_t + to_s(flat_before);
    double left = level.t > 0.0 ? x.left_limit(level.t) : x.value_at(0.0);
    knots.push_back({s_start, left, level.t});
    knots.push_back({s_end, x.value_at(level.t), level.t});
    flats.push_back({level.t, s_start, s_end, to_s(level.assigned)});
  }
  if (flat_before != kLadderHalf) {
    throw InternalConsistencyError("canonical flat lengths do not sum to 1/2");
  }
  return ParametricRep(std::move(knots), std::move(flats));
}

namespace {

struct ValueRange {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  void add(double v) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
};

// Range of x (values and left limits) over the time window [a, b] intersected with [0, T].
ValueRange window_range(const CadlagPath& x, double a, double b) {
  a = std::clamp(a, 0.0, x.horizon());
  b = std::clamp(b, 0.0, x.horizon());
  ValueRange range;
  range.add(x.value_at(a));
  range.add(x.value_at(b));
  if (b > a) {
    range.add(x.left_limit(b));
    for (const Node& n : x.nodes()) {
      if (n.t > a && n.t < b) range.add(n.v);
    }
  }
  if (a > 0.0) range.add(x.left_limit(a));
  return range;
}

double point_graph_distance(const CadlagPath& x, double u, double r, double tol) {
  double outside = std::max({0.0, -r, r - x.horizon()});
  ValueRange range = window_range(x, r - tol, r + tol);
  return std::max(outside, segment_dist(u, range.lo, range.hi));
}

// Max-metric distance from (v, t) to the segment between two rep knots.
double segment_point_distance(const RepKnot& a, const RepKnot& b, double v, double t) {
  const double du0 = a.u - v;
  const double dr0 = a.r - t;
  const double du = b.u - a.u;
  const double dr = b.r - a.r;
  auto cost = [&](double lambda) {
    return std::max(std::abs(du0 + lambda * du), std::abs(dr0 + lambda * dr));
  };
  double best = std::min(cost(0.0), cost(1.0));
  auto consider = [&](double lambda) {
    if (std::isfinite(lambda) && lambda > 0.0 && lambda < 1.0) best = std::min(best, cost(lambda));
  };
  if (du != 0.0) consider(-du0 / du);
  if (dr != 0.0) consider(-dr0 / dr);
  if (du != dr) consider((dr0 - du0) / (du - dr));
  if (du != -dr) consider(-(dr0 + du0) / (du + dr));
  return best;
}

}  // namespace

RepValidationReport validate_rep(const CadlagPath& x, const ParametricRep& rep, double tol) {
  if (!(tol > 0.0)) throw DomainError("validate_rep: tol must be > 0");
  RepValidationReport report;
  auto knots = rep.knots();
  const double horizon = x.horizon();

  report.endpoint_error = std::max({std::abs(knots.front().r), std::abs(knots.back().r - horizon),
                                    std::abs(knots.front().u - x.value_at(0.0)),
                                    std::abs(knots.back().u - x.value_at(horizon))});

  // Sample points: knots and piece midpoints, in parameter order.
  std::vector<RepKnot> samples;
  samples.reserve(2 * knots.size());
  for (std::size_t k = 0; k < knots.size(); ++k) {
    samples.push_back(knots[k]);
    if (k + 1 < knots.size()) {
      const RepKnot& a = knots[k];
      const RepKnot& b = knots[k + 1];
      samples.push_back({0.5 * (a.s + b.s), 0.5 * (a.u + b.u), 0.5 * (a.r + b.r)});
    }
  }
  const std::vector<Jump> js = jumps(x);
  auto jump_near = [&](double t) -> const Jump* {
    auto it = std::lower_bound(js.begin(), js.end(), t - tol,
                               [](const Jump& j, double value) { return j.t < value; });
    if (it != js.end() && std::abs(it->t - t) <= tol) return &*it;
    return nullptr;
  };
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const RepKnot& p = samples[i];
    report.graph_distance = std::max(report.graph_distance, point_graph_distance(x, p.u, p.r, tol));
    if (i == 0) continue;
    const RepKnot& q = samples[i - 1];
    if (p.r < q.r - tol) {
      report.monotonicity = std::max(report.monotonicity, q.r - p.r);
    } else if (std::abs(p.r - q.r) <= tol) {
      if (const Jump* j = jump_near(p.r)) {
        // Position along the vertical segment, measured in value units.
        double back = (q.u - p.u) * (j->increment > 0.0 ? 1.0 : -1.0);
        report.monotonicity = std::max(report.monotonicity, back);
      }
    }
  }

  // Coverage: every vertex of the completed graph must be reached.
  const bool ordered = report.monotonicity <= tol;
  for (const Node& vtx : x.nodes()) {
    std::size_t lo = 0;
    std::size_t hi = knots.size() - 1;
    if (ordered) {
      auto first = std::lower_bound(knots.begin(), knots.end(), vtx.t - tol,
                                    [](const RepKnot& k, double value) { return k.r < value; });
      auto last = std::upper_bound(knots.begin(), knots.end(), vtx.t + tol,
                                   [](double value, const RepKnot& k) { return value < k.r; });
      lo = first == knots.begin() ? 0 : static_cast<std::size_t>(first - knots.begin()) - 1;
      hi = std::min(knots.size() - 1, static_cast<std::size_t>(last - knots.begin()));
    }
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t k = lo; k < hi; ++k) {
      best = std::min(best, segment_point_distance(knots[k], knots[k + 1], vtx.v, vtx.t));
    }
    if (lo == hi) best = std::max(std::abs(knots[lo].u - vtx.v), std::abs(knots[lo].r - vtx.t));
    report.coverage = std::max(report.coverage, best);
  }

  report.pass = report.graph_distance <= tol && report.monotonicity <= tol &&
                report.endpoint_error <= tol && report.coverage <= tol;
  return report;
}

DerivProfile deriv_profile(const ParametricRep& rep) {
  DerivProfile out;
  auto knots = rep.knots();
  for (std::size_t k = 0; k + 1 < knots.size(); ++k) {
    double dr = knots[k + 1].r - knots[k].r;
    out.sup_slope = std::max(out.sup_slope, std::abs(dr / (knots[k + 1].s - knots[k].s)));
    out.l1_norm += std::abs(dr);
  }
  return out;
}

namespace {

std::vector<double> merged_grid(const ParametricRep& a, const ParametricRep& b, double s0, double s1) {
  if (std::abs(a.horizon() - b.horizon()) > 1e-9) {
    throw DomainError("representations have different horizons");
  }
  if (!(s0 >= 0.0 && s0 <= s1 && s1 <= 1.0)) throw DomainError("s-interval outside [0, 1]");
  std::vector<double> grid{s0, s1};
  for (const RepKnot& k : a.knots()) {
    if (k.s > s0 && k.s < s1) grid.push_back(k.s);
  }
  for (const RepKnot& k : b.knots()) {
    if (k.s > s0 && k.s < s1) grid.push_back(k.s);
  }
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  return grid;
}

}  // namespace

double l1_deriv_dist(const ParametricRep& a, const ParametricRep& b, double s0, double s1) {
  std::vector<double> grid = merged_grid(a, b, s0, s1);
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
    double mid = 0.5 * (grid[i] + grid[i + 1]);
    total += std::abs(a.r_slope(mid) - b.r_slope(mid)) * (grid[i + 1] - grid[i]);
  }
  return total;
}

RepDistance rep_distance(const ParametricRep& a, const ParametricRep& b, double s0, double s1) {
  RepDistance out;
  for (double s : merged_grid(a, b, s0, s1)) {
    out.u = std::max(out.u, std::abs(a.u(s) - b.u(s)));
    out.r = std::max(out.r, std::abs(a.r(s) - b.r(s)));
  }
  return out;
}

}  // namespace m1path
