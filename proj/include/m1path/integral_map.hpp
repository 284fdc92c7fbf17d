#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>

#include "m1path/cadlag.hpp"

namespace m1path {

// Drift h with declared Lipschitz constant c. The rule must be stateless.
struct LipschitzDrift {
  std::function<double(double)> rule;
  double c = 0.0;
  std::string name;

  double operator()(double w) const { return rule(w); }
};

LipschitzDrift zero_drift();
// h(w) = -c w
LipschitzDrift linear_drift(double c);
// h(w) = -mu (w ^ 0) - theta (w v 0)
LipschitzDrift qed_drift(double mu, double theta);
LipschitzDrift constant_drift(double value);

// "zero", "linear:c=1", "qed:mu=1,theta=1", "constant:value=0.5".
LipschitzDrift parse_drift(std::string_view spec);

struct SolveReport {
  CadlagPath y = CadlagPath::constant(1.0, 0.0);
  double step = 0.0;         // widest sub-step actually used
  double error_bound = 0.0;  // a-posteriori bound on sup |y - psi(x)|
  std::size_t max_iterations = 0;
};

// y(t) = x(t) + int_0^t h(y(s)) ds. Jumps of y are those of x, increments copied.
SolveReport solve_map(const CadlagPath& x, const LipschitzDrift& h, double step);

// Largest difference quotient of h over a grid on [lo, hi] plus `samples` random pairs.
// Prints a warning to stderr when it exceeds the declared constant.
double check_lipschitz(const LipschitzDrift& h, double lo, double hi, std::size_t samples,
                       std::uint64_t seed = 20240607);

// (eta + h_sup * l1_dd) * exp(sup_slope * c)
double gronwall_bound(double eta, double h_sup, double l1_dd, double sup_slope, double c);

}  // namespace m1path
