#include "m1path/cadlag.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "m1path/error.hpp"

namespace m1path {

namespace {

std::string at_index(std::size_t i) { return "nodes[" + std::to_string(i) + "]: "; }

void require_finite_horizon(double horizon) {
  if (!std::isfinite(horizon) || horizon <= 0.0) {
    throw DomainError("horizon T must be finite and > 0");
  }
}

// Index of the last node with time <= t.
std::size_t last_at_or_before(std::span<const Node> nodes, double t) {
  auto it = std::upper_bound(nodes.begin(), nodes.end(), t,
                             [](double value, const Node& n) { return value < n.t; });
  return static_cast<std::size_t>(it - nodes.begin()) - 1;
}

// Index of the first node with time >= t.
std::size_t first_at_or_after(std::span<const Node> nodes, double t) {
  auto it = std::lower_bound(nodes.begin(), nodes.end(), t,
                             [](const Node& n, double value) { return n.t < value; });
  return static_cast<std::size_t>(it - nodes.begin());
}

double interpolate(const Node& a, const Node& b, double t) {
  if (a.v == b.v) return a.v;
  return a.v + (b.v - a.v) * ((t - a.t) / (b.t - a.t));
}

void check_horizons(const CadlagPath& x, const CadlagPath& y) {
  if (std::abs(x.horizon() - y.horizon()) > kValueTol) {
    throw DomainError("horizon mismatch: " + std::to_string(x.horizon()) + " vs " +
                      std::to_string(y.horizon()));
  }
}

}  // namespace

std::size_t CompletedGraph::vertical_segments() const {
  std::size_t count = 0;
  for (std::size_t i = 1; i < vertices.size(); ++i) {
    if (vertices[i].t == vertices[i - 1].t) ++count;
  }
  return count;
}

CadlagPath CadlagPath::step(double horizon, double initial, std::vector<Node> changes) {
  require_finite_horizon(horizon);
  if (!std::isfinite(initial)) throw DomainError("initial value must be finite");
  CadlagPath x;
  x.horizon_ = horizon;
  x.kind_ = PathKind::step;
  x.nodes_.push_back({0.0, initial});
  x.increments_.push_back(0.0);
  double current = initial;
  double last_t = 0.0;
  for (std::size_t i = 0; i < changes.size(); ++i) {
    const Node& c = changes[i];
    if (!std::isfinite(c.t) || !std::isfinite(c.v)) throw DomainError(at_index(i) + "non-finite entry");
    if (c.t <= 0.0) throw DomainError(at_index(i) + "time must be > 0 (no jump at t = 0)");
    if (c.t > horizon) throw DomainError(at_index(i) + "time exceeds horizon");
    if (c.t <= last_t) throw DomainError(at_index(i) + "times must be strictly increasing");
    last_t = c.t;
    if (c.v == current) continue;
    x.nodes_.push_back({c.t, current});
    x.increments_.push_back(0.0);
    x.nodes_.push_back({c.t, c.v});
    x.increments_.push_back(c.v - current);
    current = c.v;
  }
  if (x.nodes_.back().t < horizon) {
    x.nodes_.push_back({horizon, current});
    x.increments_.push_back(0.0);
  }
  return x;
}

CadlagPath CadlagPath::piecewise_linear(double horizon, std::vector<Node> nodes,
                                        std::span<const double> jump_increments) {
  require_finite_horizon(horizon);
  if (nodes.empty()) throw DomainError("piecewise-linear path needs at least one node");
  if (!jump_increments.empty() && jump_increments.size() != nodes.size()) {
    throw DomainError("jump increments must run parallel to nodes");
  }
  CadlagPath x;
  x.horizon_ = horizon;
  x.kind_ = PathKind::piecewise_linear;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const Node& n = nodes[i];
    if (!std::isfinite(n.t) || !std::isfinite(n.v)) throw DomainError(at_index(i) + "non-finite entry");
    if (i == 0 && n.t != 0.0) throw DomainError(at_index(i) + "first node must be at t = 0");
    if (n.t < 0.0 || n.t > horizon) throw DomainError(at_index(i) + "time outside [0, T]");
    if (i > 0) {
      const Node& prev = nodes[i - 1];
      if (n.t < prev.t) throw DomainError(at_index(i) + "times must be nondecreasing");
      if (n.t == prev.t) {
        if (n.t == 0.0) throw DomainError(at_index(i) + "jump at t = 0 is not allowed");
        if (i >= 2 && nodes[i - 2].t == n.t) {
          throw DomainError(at_index(i) + "more than two nodes share one time");
        }
        if (n.v == prev.v) continue;  // degenerate double node
        double inc = jump_increments.empty() ? n.v - prev.v : jump_increments[i];
        if (!jump_increments.empty() &&
            std::abs(inc - (n.v - prev.v)) > kValueTol * (1.0 + std::abs(n.v))) {
          throw DomainError(at_index(i) + "jump increment disagrees with node values");
        }
        x.nodes_.push_back(n);
        x.increments_.push_back(inc);
        continue;
      }
    }
    x.nodes_.push_back(n);
    x.increments_.push_back(0.0);
  }
  if (x.nodes_.back().t < horizon) {
    x.nodes_.push_back({horizon, x.nodes_.back().v});
    x.increments_.push_back(0.0);
  }
  return x;
}

CadlagPath CadlagPath::constant(double horizon, double value) {
  return step(horizon, value, {});
}

std::vector<double> CadlagPath::breakpoints() const {
  std::vector<double> out;
  for (const Node& n : nodes_) {
    if (n.t > 0.0 && (out.empty() || out.back() != n.t)) out.push_back(n.t);
  }
  return out;
}

double CadlagPath::value_at(double t) const {
  if (!(t >= 0.0 && t <= horizon_)) {
    throw DomainError("eval: t = " + std::to_string(t) + " outside [0, T]");
  }
  std::size_t i = last_at_or_before(nodes_, t);
  if (nodes_[i].t == t || i + 1 == nodes_.size()) return nodes_[i].v;
  return interpolate(nodes_[i], nodes_[i + 1], t);
}

double CadlagPath::left_limit(double t) const {
  if (!(t > 0.0 && t <= horizon_)) {
    throw DomainError("eval_left: t = " + std::to_string(t) + " outside (0, T]");
  }
  std::size_t j = first_at_or_after(nodes_, t);
  if (nodes_[j].t == t) return nodes_[j].v;
  return interpolate(nodes_[j - 1], nodes_[j], t);
}

std::vector<Node> CadlagPath::step_changes() const {
  std::vector<Node> out;
  if (kind_ != PathKind::step) return out;
  for (std::size_t i = 1; i < nodes_.size(); ++i) {
    if (nodes_[i].t == nodes_[i - 1].t) out.push_back(nodes_[i]);
  }
  return out;
}

bool CadlagPath::operator==(const CadlagPath& other) const {
  return horizon_ == other.horizon_ && kind_ == other.kind_ && nodes_ == other.nodes_;
}

double eval(const CadlagPath& x, double t) { return x.value_at(t); }
double eval_left(const CadlagPath& x, double t) { return x.left_limit(t); }

std::vector<Jump> jumps(const CadlagPath& x, double eps) {
  std::vector<Jump> out;
  auto nodes = x.nodes();
  for (std::size_t i = 1; i < nodes.size(); ++i) {
    if (nodes[i].t != nodes[i - 1].t) continue;
    double inc = x.increment_at_node(i);
    double size = std::abs(inc);
    if (size > eps) out.push_back({nodes[i].t, nodes[i - 1].v, nodes[i].v, inc, size});
  }
  return out;
}

double j_max(const CadlagPath& x) {
  double best = 0.0;
  for (const Jump& j : jumps(x)) best = std::max(best, j.size);
  return best;
}

double j_max_on(const CadlagPath& x, double a, double b) {
  double best = 0.0;
  for (const Jump& j : jumps(x)) {
    if (j.t >= a && j.t <= b) best = std::max(best, j.size);
  }
  return best;
}

namespace {

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  void add(double v) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  double spread() const { return hi >= lo ? hi - lo : 0.0; }
};

void check_interval(const CadlagPath& x, double a, double b) {
  if (!(a >= 0.0 && a <= b && b <= x.horizon())) {
    throw DomainError("interval [" + std::to_string(a) + ", " + std::to_string(b) +
                      "] is not inside [0, T]");
  }
}

// Node values with time strictly inside (a, b).
void add_interior(const CadlagPath& x, double a, double b, Range& r) {
  auto nodes = x.nodes();
  for (std::size_t i = last_at_or_before(nodes, a) + 1; i < nodes.size() && nodes[i].t < b; ++i) {
    if (nodes[i].t > a) r.add(nodes[i].v);
  }
}

}  // namespace

double oscillation(const CadlagPath& x, double a, double b) {
  check_interval(x, a, b);
  Range r;
  r.add(x.value_at(a));
  r.add(x.value_at(b));
  if (b > a) {
    r.add(x.left_limit(b));
    add_interior(x, a, b, r);
  }
  return r.spread();
}

double oscillation_before(const CadlagPath& x, double a, double b) {
  check_interval(x, a, b);
  if (b == a) return 0.0;
  Range r;
  r.add(x.value_at(a));
  r.add(x.left_limit(b));
  add_interior(x, a, b, r);
  return r.spread();
}

double modulus(const CadlagPath& x, double delta) {
  const double horizon = x.horizon();
  if (!(delta > 0.0 && delta <= horizon)) throw DomainError("modulus: delta must lie in (0, T]");
  const double last_start = horizon - delta;
  std::vector<double> starts{0.0, last_start};
  for (double b : x.breakpoints()) {
    starts.push_back(b);
    starts.push_back(b - delta);
  }
  double best = 0.0;
  for (double t : starts) {
    t = std::clamp(t, 0.0, last_start);
    best = std::max(best, oscillation(x, t, std::min(t + delta, horizon)));
  }
  return best;
}

double segment_dist(double c, double a, double b) {
  double lo = std::min(a, b);
  double hi = std::max(a, b);
  if (c < lo) return lo - c;
  if (c > hi) return c - hi;
  return 0.0;
}

namespace {

// Triple search over an ordered point sequence. Points i < j < k qualify when
// times[k] - reach[i] < window (strict) or <= window depending on `strict`.
double triple_search(const std::vector<double>& start_time, const std::vector<double>& end_time,
                     const std::vector<double>& values, double window, bool strict) {
  const std::size_t n = values.size();
  double best = 0.0;
  for (std::size_t i = 0; i + 2 < n; ++i) {
    double mid_hi = -std::numeric_limits<double>::infinity();
    double mid_lo = std::numeric_limits<double>::infinity();
    for (std::size_t k = i + 2; k < n; ++k) {
      double gap = start_time[k] - end_time[i];
      if (strict ? !(gap < window) : !(gap <= window)) break;
      mid_hi = std::max(mid_hi, values[k - 1]);
      mid_lo = std::min(mid_lo, values[k - 1]);
      double outer_hi = std::max(values[i], values[k]);
      double outer_lo = std::min(values[i], values[k]);
      best = std::max({best, mid_hi - outer_hi, outer_lo - mid_lo});
    }
  }
  return best;
}

}  // namespace

double ws_osc(const CadlagPath& x, double delta, double mesh) {
  if (!(delta > 0.0)) throw DomainError("ws_osc: delta must be > 0");
  auto nodes = x.nodes();
  const double window = 2.0 * delta;
  if (x.kind() == PathKind::step) {
    // Pieces [b_i, b_{i+1}) with constant value; a triple of pieces i < j < k is
    // reachable iff b_k - b_{i+1} < 2 delta.
    std::vector<double> piece_start{0.0};
    std::vector<double> values{nodes[0].v};
    for (std::size_t i = 1; i < nodes.size(); ++i) {
      if (nodes[i].t == nodes[i - 1].t) {
        piece_start.push_back(nodes[i].t);
        values.push_back(nodes[i].v);
      }
    }
    std::vector<double> piece_end(piece_start.begin() + 1, piece_start.end());
    piece_end.push_back(x.horizon());
    return triple_search(piece_start, piece_end, values, window, true);
  }
  const double h = mesh > 0.0 ? mesh : 1e-3 * x.horizon();
  std::vector<double> times;
  std::vector<double> values;
  times.push_back(nodes[0].t);
  values.push_back(nodes[0].v);
  for (std::size_t i = 1; i < nodes.size(); ++i) {
    const Node& a = nodes[i - 1];
    const Node& b = nodes[i];
    if (b.t > a.t) {
      auto pieces = static_cast<std::size_t>(std::ceil((b.t - a.t) / h));
      for (std::size_t p = 1; p < pieces; ++p) {
        double t = a.t + (b.t - a.t) * static_cast<double>(p) / static_cast<double>(pieces);
        times.push_back(t);
        values.push_back(interpolate(a, b, t));
      }
    }
    times.push_back(b.t);
    values.push_back(b.v);
  }
  return triple_search(times, times, values, window, false);
}

double uniform_norm(const CadlagPath& x) {
  double best = 0.0;
  for (const Node& n : x.nodes()) best = std::max(best, std::abs(n.v));
  return best;
}

double uniform_dist_on(const CadlagPath& x, const CadlagPath& y, double a, double b) {
  check_horizons(x, y);
  check_interval(x, a, b);
  std::vector<double> times{a, b};
  for (const Node& n : x.nodes()) {
    if (n.t > a && n.t < b) times.push_back(n.t);
  }
  for (const Node& n : y.nodes()) {
    if (n.t > a && n.t < b) times.push_back(n.t);
  }
  double best = 0.0;
  for (double t : times) {
    best = std::max(best, std::abs(x.value_at(t) - y.value_at(t)));
    if (t > a) best = std::max(best, std::abs(x.left_limit(t) - y.left_limit(t)));
  }
  return best;
}

double uniform_dist(const CadlagPath& x, const CadlagPath& y) {
  return uniform_dist_on(x, y, 0.0, x.horizon());
}

CompletedGraph completed_graph(const CadlagPath& x) {
  return CompletedGraph{std::vector<Node>(x.nodes().begin(), x.nodes().end())};
}

}  // namespace m1path
