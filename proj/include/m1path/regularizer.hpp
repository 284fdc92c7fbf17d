#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "m1path/cadlag.hpp"
#include "m1path/param_rep.hpp"

namespace m1path {

enum class SubintervalKind { small_jump, connecting, large_jump };

struct Subinterval {
  double s0 = 0.0;
  double s1 = 0.0;
  SubintervalKind kind = SubintervalKind::small_jump;
  std::size_t jump = 0;  // index into PartitionSpec::large_jumps (for small_jump: the jump after it)
};

struct LargeJump {
  double t = 0.0;
  double size = 0.0;
  double s_minus = 0.0;  // r^-1(t - 2 eps2)
  double s_start = 0.0;  // flat spot of r at t
  double s_end = 0.0;
  double s_plus = 0.0;   // r^-1(t + 2 eps2)
  std::size_t pieces = 0;  // n_j
};

struct PartitionSpec {
  double eps = 0.0;
  double eps1 = 0.0;
  double eps2 = 0.0;
  double eps3 = 0.0;
  double eps4 = 0.0;
  double horizon = 0.0;
  std::vector<LargeJump> large_jumps;
  std::vector<Subinterval> subintervals;  // 4m + 1, covering [0, 1] in order
};

PartitionSpec build_partition(const CadlagPath& x, const ParametricRep& rep, double eps);

// Coupling rep of xn from m1_distance(xn, x), re-timed onto the parameter of
// canonical_rep(x). Flat spots of the result are exactly the jumps of xn.
struct TransportedRep {
  ParametricRep rep_n;
  double coupling_cost = 0.0;
};

// Couplings are computed with time differences weighted by kCouplingTimeWeight,
// which keeps matched points aligned in time when the M1 optimum is not unique.
inline constexpr double kCouplingTimeWeight = 16.0;

TransportedRep transported_coupling_rep(const CadlagPath& x, const CadlagPath& xn,
                                        const ParametricRep& rep, double mesh);

// One linear piece of the time component between anchors.
struct TimePiece {
  double s0 = 0.0;
  double s1 = 0.0;
  double t0 = 0.0;
  double t1 = 0.0;
  std::size_t subinterval = 0;
  std::vector<std::pair<double, double>> flats;  // (level, length) inserted in this piece
};

struct TimeComponent {
  std::vector<RepKnot> knots;  // u left at 0; only s and r are meaningful
  std::vector<TimePiece> pieces;
  std::size_t transplants = 0;       // flat spots inserted on small-jump intervals
  double transplanted_length = 0.0;
};

// The time component r~ assembled from the three constructions on the partition.
TimeComponent build_time_component(const PartitionSpec& spec, const ParametricRep& rep,
                                   const ParametricRep& rep_n);

struct PhiResult {
  std::vector<std::pair<double, double>> phi;  // knots (s, phi(s)), nondecreasing
  ParametricRep rep;                           // (u_n o phi, r~)
};

PhiResult build_phi(const ParametricRep& rep_n, std::span<const RepKnot> r_tilde);

struct BoundReport {
  double sup_slope = 0.0;
  double u_dist = 0.0;
  double r_dist = 0.0;
  double sup_dist = 0.0;
  double l1_dd = 0.0;
  double case1 = 0.0;  // L1 contributions per subinterval kind
  double case2 = 0.0;
  double case3 = 0.0;
  double coupling_cost = 0.0;
  double input_u_dist = 0.0;   // ||u_n - u||
  double phi_u_dist = 0.0;     // ||u o phi - u||
  std::size_t transplants = 0;
  double transplanted_length = 0.0;
};

struct RegularizedRep {
  ParametricRep rep;
  std::vector<std::pair<double, double>> phi;
  PartitionSpec partition;
  BoundReport bounds;
  ParametricRep canonical;
  ParametricRep rep_n;
};

RegularizedRep regularize(const CadlagPath& x, const CadlagPath& xn, double eps, double mesh);

}  // namespace m1path
