#include "m1path/m1_metric.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <string>

#include "m1path/error.hpp"

namespace m1path {

GraphDiscretization discretize_graph(const CompletedGraph& g, double mesh) {
  if (!(mesh > 0.0) || !std::isfinite(mesh)) throw DomainError("discretize_graph: mesh must be > 0");
  if (g.vertices.empty()) throw DomainError("discretize_graph: empty graph");
  GraphDiscretization out;
  out.mesh = mesh;
  const auto& vs = g.vertices;
  out.points.push_back(vs.front());
  out.segment.push_back(0);
  for (std::size_t k = 0; k + 1 < vs.size(); ++k) {
    const Node& a = vs[k];
    const Node& b = vs[k + 1];
    double len = std::max(std::abs(b.v - a.v), std::abs(b.t - a.t));
    auto pieces = static_cast<std::size_t>(std::max(1.0, std::ceil(len / mesh)));
    for (std::size_t p = 1; p < pieces; ++p) {
      double f = static_cast<double>(p) / static_cast<double>(pieces);
      out.points.push_back({a.t + f * (b.t - a.t), a.v + f * (b.v - a.v)});
      out.segment.push_back(k);
    }
    out.points.push_back(b);
    out.segment.push_back(k + 1);
  }
  return out;
}

std::uint64_t path_fingerprint(const CadlagPath& x) {
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&h](std::uint64_t word) {
    for (int i = 0; i < 8; ++i) {
      h ^= (word >> (8 * i)) & 0xffu;
      h *= 1099511628211ull;
    }
  };
  mix(std::bit_cast<std::uint64_t>(x.horizon()));
  mix(x.kind() == PathKind::step ? 1u : 2u);
  for (const Node& n : x.nodes()) {
    mix(std::bit_cast<std::uint64_t>(n.t));
    mix(std::bit_cast<std::uint64_t>(n.v));
  }
  return h;
}

double default_mesh(const CadlagPath& x, const CadlagPath& y) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const CadlagPath* p : {&x, &y}) {
    for (const Node& n : p->nodes()) {
      lo = std::min(lo, n.v);
      hi = std::max(hi, n.v);
    }
  }
  return 1e-3 * std::max({x.horizon(), y.horizon(), hi - lo});
}

namespace {

constexpr std::size_t kMaxCells = std::size_t{400} * 1000 * 1000;

enum : std::uint8_t { kFromFirst = 1, kFromBoth = 2, kFromSecond = 3 };

// Min over monotone staircases of the max pair cost. Ties between predecessors go
// to the lowest bottleneck, then the closest predecessor pair, then advancing the
// first path. `back` receives the chosen moves when non-null.
template <class Cost>
double bottleneck_dp(std::size_t n, std::size_t m, const Cost& cost, std::vector<std::uint8_t>* back) {
  std::vector<double> prev(m), cur(m);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      double c = cost(i, j);
      if (i == 0 && j == 0) {
        cur[j] = c;
        continue;
      }
      double best = std::numeric_limits<double>::infinity();
      double best_local = best;
      std::uint8_t move = 0;
      auto offer = [&](double d, std::size_t pi, std::size_t pj, std::uint8_t mv) {
        if (d > best) return;
        double local = cost(pi, pj);
        if (move == 0 || d < best || local < best_local) {
          best = d;
          best_local = local;
          move = mv;
        }
      };
      if (i > 0) offer(prev[j], i - 1, j, kFromFirst);
      if (i > 0 && j > 0) offer(prev[j - 1], i - 1, j - 1, kFromBoth);
      if (j > 0) offer(cur[j - 1], i, j - 1, kFromSecond);
      cur[j] = std::max(c, best);
      if (back) (*back)[i * m + j] = move;
    }
    std::swap(prev, cur);
  }
  return prev[m - 1];
}

// Least total cost over monotone staircases; cells of infinite cost are excluded.
template <class Cost>
void minsum_dp(std::size_t n, std::size_t m, const Cost& cost, std::vector<std::uint8_t>& back) {
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> prev(m, inf), cur(m, inf);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      double c = cost(i, j);
      if (i == 0 && j == 0) {
        cur[j] = c;
        continue;
      }
      double best = inf;
      std::uint8_t move = 0;
      if (i > 0 && prev[j] < best) best = prev[j], move = kFromFirst;
      if (i > 0 && j > 0 && prev[j - 1] <= best) best = prev[j - 1], move = kFromBoth;
      if (j > 0 && cur[j - 1] < best) best = cur[j - 1], move = kFromSecond;
      cur[j] = c + best;
      back[i * m + j] = move;
    }
    std::swap(prev, cur);
  }
}

}  // namespace

M1Estimate m1_distance(const CadlagPath& x, const CadlagPath& y, double mesh, double time_weight) {
  if (x.horizon() != y.horizon()) {
    throw DomainError("m1_distance: horizons differ (" + std::to_string(x.horizon()) + " vs " +
                      std::to_string(y.horizon()) + ")");
  }
  if (!(mesh > 0.0) || !std::isfinite(mesh)) throw DomainError("m1_distance: mesh must be > 0");
  if (!(time_weight > 0.0) || !std::isfinite(time_weight)) {
    throw DomainError("m1_distance: time weight must be > 0");
  }
  GraphDiscretization gx = discretize_graph(completed_graph(x), mesh);
  GraphDiscretization gy = discretize_graph(completed_graph(y), mesh);
  const std::size_t n = gx.points.size();
  const std::size_t m = gy.points.size();
  if (n * m > kMaxCells) {
    throw DomainError("m1_distance: grid of " + std::to_string(n) + " x " + std::to_string(m) +
                      " points is too large; use a coarser mesh");
  }
  auto plain = [&](std::size_t i, std::size_t j) {
    const Node& a = gx.points[i];
    const Node& b = gy.points[j];
    return std::max(std::abs(a.v - b.v), std::abs(a.t - b.t));
  };

  std::vector<std::uint8_t> back(n * m, 0);
  double estimate = 0.0;
  if (time_weight == 1.0) {
    estimate = bottleneck_dp(n, m, plain, &back);
  } else {
    // Among couplings within the M1 bottleneck, minimise the summed time-weighted cost.
    estimate = bottleneck_dp(n, m, plain, nullptr);
    const double cap = estimate;
    auto weighted = [&](std::size_t i, std::size_t j) {
      if (plain(i, j) > cap) return std::numeric_limits<double>::infinity();
      const Node& a = gx.points[i];
      const Node& b = gy.points[j];
      return std::max(std::abs(a.v - b.v), time_weight * std::abs(a.t - b.t));
    };
    minsum_dp(n, m, weighted, back);
  }

  M1Estimate out;
  out.estimate = estimate;
  Coupling& cp = out.coupling;
  cp.cost = out.estimate;
  cp.mesh = mesh;
  cp.fingerprint_x = path_fingerprint(x);
  cp.fingerprint_y = path_fingerprint(y);
  std::size_t i = n - 1;
  std::size_t j = m - 1;
  cp.steps.emplace_back(static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j));
  while (i > 0 || j > 0) {
    switch (back[i * m + j]) {
      case kFromFirst: --i; break;
      case kFromBoth: --i; --j; break;
      case kFromSecond: --j; break;
      default: throw InternalConsistencyError("m1_distance: broken backpointer");
    }
    cp.steps.emplace_back(static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j));
  }
  std::reverse(cp.steps.begin(), cp.steps.end());
  cp.cost = 0.0;
  for (auto [a, b] : cp.steps) cp.cost = std::max(cp.cost, plain(a, b));
  cp.points_x = std::move(gx.points);
  cp.points_y = std::move(gy.points);
  return out;
}

CouplingReps coupling_to_reps(const CadlagPath& x, const CadlagPath& y, const Coupling& coupling) {
  if (path_fingerprint(x) != coupling.fingerprint_x || path_fingerprint(y) != coupling.fingerprint_y) {
    throw DomainError("coupling_to_reps: stale coupling, paths changed since m1_distance");
  }
  const std::size_t len = coupling.steps.size();
  if (len == 0) throw DomainError("coupling_to_reps: empty coupling");
  std::vector<RepKnot> kx, ky;
  kx.reserve(std::max<std::size_t>(len, 2));
  ky.reserve(std::max<std::size_t>(len, 2));
  auto push = [&](double s, std::uint32_t i, std::uint32_t j) {
    const Node& a = coupling.points_x.at(i);
    const Node& b = coupling.points_y.at(j);
    kx.push_back({s, a.v, a.t});
    ky.push_back({s, b.v, b.t});
  };
  if (len == 1) {
    push(0.0, coupling.steps[0].first, coupling.steps[0].second);
    push(1.0, coupling.steps[0].first, coupling.steps[0].second);
  } else {
    for (std::size_t k = 0; k < len; ++k) {
      double s = k + 1 == len ? 1.0 : static_cast<double>(k) / static_cast<double>(len - 1);
      push(s, coupling.steps[k].first, coupling.steps[k].second);
    }
  }
  return {ParametricRep(std::move(kx)), ParametricRep(std::move(ky))};
}

}  // namespace m1path
