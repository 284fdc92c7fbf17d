#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace m1path {

// Absolute tolerance for value comparisons in invariant checks.
inline constexpr double kValueTol = 1e-12;

enum class PathKind { step, piecewise_linear };

struct Node {
  double t = 0.0;
  double v = 0.0;
  bool operator==(const Node&) const = default;
};

struct Jump {
  double t = 0.0;
  double left = 0.0;
  double right = 0.0;
  double increment = 0.0;  // right - left, stored exactly as the path carries it
  double size = 0.0;       // |increment|
};

// Vertex polyline of the completed graph, in graph order starting at (x(0), 0).
// A vertical segment is a pair of consecutive vertices sharing the same time.
struct CompletedGraph {
  std::vector<Node> vertices;
  std::size_t vertical_segments() const;
};

// Right-continuous path on [0, T] with finitely many breakpoints.
//
// Both kinds are stored as the vertex list of the completed graph: a step path
// becomes alternating horizontal and vertical segments, a piecewise-linear path
// keeps its nodes, with a repeated time marking a jump (left limit first).
// Each jump carries its increment explicitly so that transforms which preserve
// jumps (the integral map) can reproduce them bit for bit.
class CadlagPath {
 public:
  // x(t) = initial on [0, changes[0].t), then changes[i].v from changes[i].t on.
  // Changes that do not alter the value are dropped.
  static CadlagPath step(double horizon, double initial, std::vector<Node> changes);

  // Linear interpolation between nodes. The first node must sit at t = 0, times
  // are nondecreasing, at most two nodes share a time (a jump), and the path is
  // held constant after the last node up to the horizon. `jump_increments`, when
  // given, runs parallel to `nodes` and supplies the exact increment for the
  // right node of each jump.
  static CadlagPath piecewise_linear(double horizon, std::vector<Node> nodes,
                                     std::span<const double> jump_increments = {});

  static CadlagPath constant(double horizon, double value);

  double horizon() const { return horizon_; }
  PathKind kind() const { return kind_; }
  std::span<const Node> nodes() const { return nodes_; }

  // Distinct node times in (0, T].
  std::vector<double> breakpoints() const;

  double value_at(double t) const;
  double left_limit(double t) const;

  // Exact increment of the jump whose right node is `node_index` (0 if none).
  double increment_at_node(std::size_t node_index) const { return increments_[node_index]; }

  // Step paths: the value changes as given to step(); empty for other kinds.
  std::vector<Node> step_changes() const;

  bool operator==(const CadlagPath& other) const;

 private:
  CadlagPath() = default;
  void validate() const;

  double horizon_ = 0.0;
  PathKind kind_ = PathKind::step;
  std::vector<Node> nodes_;
  std::vector<double> increments_;
};

double eval(const CadlagPath& x, double t);
double eval_left(const CadlagPath& x, double t);

// Jumps with size strictly greater than eps, sorted by time.
std::vector<Jump> jumps(const CadlagPath& x, double eps = 0.0);
double j_max(const CadlagPath& x);

// nu(x, [a, b]): sup |x(u1) - x(u2)| over the closed interval. Exact for both
// kinds, since the extremes sit at nodes, left limits or interval ends.
double oscillation(const CadlagPath& x, double a, double b);
// Same supremum over [a, b); left limit at b included, x(b) excluded.
double oscillation_before(const CadlagPath& x, double a, double b);
// nu(x, delta): sup over t of nu(x, [t, t + delta]).
double modulus(const CadlagPath& x, double delta);

// Distance from c to the segment spanned by a and b.
double segment_dist(double c, double a, double b);

// Strong M1 oscillation w_s(x, delta): sup over t1 < t2 < t3 with t3 - t1 <= 2 delta
// of segment_dist(x(t2), x(t1), x(t3)). Exact for step paths; piecewise-linear
// paths are evaluated on a refinement mesh (default 1e-3 T), which can only
// underestimate.
double ws_osc(const CadlagPath& x, double delta, double mesh = 0.0);

double uniform_norm(const CadlagPath& x);
double uniform_dist(const CadlagPath& x, const CadlagPath& y);
// Sup of |x - y| over the time window [a, b] (left limits inside (a, b] included).
double uniform_dist_on(const CadlagPath& x, const CadlagPath& y, double a, double b);
// Largest jump with location in [a, b].
double j_max_on(const CadlagPath& x, double a, double b);

CompletedGraph completed_graph(const CadlagPath& x);

}  // namespace m1path
