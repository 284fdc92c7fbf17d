#pragma once

#include <string>
#include <vector>

#include "m1path/cadlag.hpp"
#include "m1path/integral_map.hpp"

namespace m1path {

struct ContinuityRow {
  double n = 0.0;
  double d_in = 0.0;
  double d_out = 0.0;
  double bound = 0.0;
  bool regularized = false;  // bound from regularize(); otherwise from the raw coupling rep
  std::string note;
};

// For each xn: d_in = d_M1(xn, x), d_out = d_M1(psi(xn), psi(x)) and the Gronwall
// bound max((eta + h_sup l1) e^{slope c}, ||r~_n - r||) from the regularized reps.
std::vector<ContinuityRow> continuity_experiment(const std::vector<CadlagPath>& x_seq,
                                                 const std::vector<double>& labels,
                                                 const CadlagPath& x, const LipschitzDrift& h,
                                                 double mesh, double step, double eps = 0.9);

// x_n rising linearly from 0 to 1 on [1 - 1/n, 1], horizon 2.
CadlagPath ramp_path(double n);
// 1 on [1, 2], 0 before.
CadlagPath unit_step_path();

}  // namespace m1path
