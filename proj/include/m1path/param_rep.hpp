#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "m1path/cadlag.hpp"

namespace m1path {

struct RepKnot {
  double s = 0.0;
  double u = 0.0;
  double r = 0.0;
  bool operator==(const RepKnot&) const = default;
};

// Maximal s-interval on which r is constant at level t. `length` is the length
// assigned by the construction that produced it (for canonical reps the f_j of
// the flat ladder); for detected flat spots it equals s2 - s1.
struct FlatSpot {
  double t = 0.0;
  double s1 = 0.0;
  double s2 = 0.0;
  double length = 0.0;
};

// Piecewise-linear pair (u, r) on [0, 1], linear between knots.
class ParametricRep {
 public:
  ParametricRep() = default;
  // Knot s-values must start at 0, end at 1 and increase strictly. When
  // `flat_spots` is empty they are detected from the r-values.
  explicit ParametricRep(std::vector<RepKnot> knots, std::vector<FlatSpot> flat_spots = {});

  std::span<const RepKnot> knots() const { return knots_; }
  std::span<const FlatSpot> flat_spots() const { return flat_spots_; }
  double horizon() const { return knots_.back().r; }

  double u(double s) const;
  double r(double s) const;
  // Slope of r on the piece containing s (right-hand piece at knots).
  double r_slope(double s) const;
  double slope_bound() const;

  // Smallest / largest s with r(s) == t, for t in [r(0), r(1)]; requires r
  // nondecreasing.
  double lower_inverse(double t) const;
  double upper_inverse(double t) const;

 private:
  std::size_t piece_index(double s) const;

  std::vector<RepKnot> knots_;
  std::vector<FlatSpot> flat_spots_;
};

std::vector<FlatSpot> detect_flat_spots(std::span<const RepKnot> knots);

// Flat-spot ladder used by the canonical representation. Lengths are integer
// multiples of 1 / (3 * 2^60), which makes 5/12 and every 4^-j (j <= 30) exact.
inline constexpr std::int64_t kLadderUnitsPerOne = std::int64_t{3} << 60;
inline constexpr std::int64_t kLadderHalf = kLadderUnitsPerOne / 2;
inline constexpr std::size_t kMaxLadderJumps = 30;

struct LadderEntry {
  double t = 0.0;
  double size = 0.0;         // jump size; 0 for the terminal flat spot at T without a jump
  std::size_t rank = 0;      // 1-based position in decreasing-size order; 0 for the terminal spot
  std::int64_t assigned = 0; // initial length f_j in ladder units
  std::int64_t final_len = 0;// length after every later insertion, ladder units
};

// Entries sorted by time; the last entry is the terminal flat spot at T.
std::vector<LadderEntry> flat_ladder(const CadlagPath& x);
std::int64_t ladder_length(std::size_t rank);  // f_rank in ladder units, rank >= 1

// Canonical representation: r rises with slope 2T between flat spots, one flat
// spot per jump with lengths from the ladder, residual length at T.
ParametricRep canonical_rep(const CadlagPath& x);

struct RepValidationReport {
  bool pass = false;
  double graph_distance = 0.0;     // max distance of sampled rep points from the graph
  double monotonicity = 0.0;       // max backwards step in graph order
  double endpoint_error = 0.0;     // start/end mismatch in (u, r)
  double coverage = 0.0;           // max distance from a graph vertex to the rep curve
};

RepValidationReport validate_rep(const CadlagPath& x, const ParametricRep& rep, double tol);

struct DerivProfile {
  double sup_slope = 0.0;
  double l1_norm = 0.0;
};

DerivProfile deriv_profile(const ParametricRep& rep);

// Integral of |r_a' - r_b'| over [s0, s1] (default the whole unit interval).
double l1_deriv_dist(const ParametricRep& a, const ParametricRep& b, double s0 = 0.0,
                     double s1 = 1.0);

struct RepDistance {
  double u = 0.0;
  double r = 0.0;
  double combined() const { return u > r ? u : r; }
};

// ||u_a - u_b|| and ||r_a - r_b|| over [s0, s1], exact on the merged knot set.
RepDistance rep_distance(const ParametricRep& a, const ParametricRep& b, double s0 = 0.0,
                         double s1 = 1.0);

}  // namespace m1path
