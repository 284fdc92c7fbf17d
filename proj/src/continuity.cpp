#include "m1path/continuity.hpp"

#include <algorithm>
#include <cmath>

#include "m1path/error.hpp"
#include "m1path/m1_metric.hpp"
#include "m1path/regularizer.hpp"

namespace m1path {

CadlagPath ramp_path(double n) {
  if (!(n >= 1.0)) throw DomainError("ramp_path: n must be >= 1");
  return CadlagPath::piecewise_linear(2.0, {{0.0, 0.0}, {1.0 - 1.0 / n, 0.0}, {1.0, 1.0}});
}

CadlagPath unit_step_path() { return CadlagPath::step(2.0, 0.0, {{1.0, 1.0}}); }

std::vector<ContinuityRow> continuity_experiment(const std::vector<CadlagPath>& x_seq,
                                                 const std::vector<double>& labels,
                                                 const CadlagPath& x, const LipschitzDrift& h,
                                                 double mesh, double step, double eps) {
  if (!labels.empty() && labels.size() != x_seq.size()) {
    throw DomainError("continuity_experiment: one label per path expected");
  }
  for (const CadlagPath& xn : x_seq) {
    if (xn.horizon() != x.horizon()) throw DomainError("continuity_experiment: horizons differ");
  }
  const SolveReport y = solve_map(x, h, step);
  double h_sup = 0.0;
  for (const Node& nd : y.y.nodes()) h_sup = std::max(h_sup, std::abs(h(nd.v)));

  std::vector<ContinuityRow> rows;
  for (std::size_t k = 0; k < x_seq.size(); ++k) {
    const CadlagPath& xn = x_seq[k];
    ContinuityRow row;
    row.n = labels.empty() ? static_cast<double>(k + 1) : labels[k];
    row.d_in = m1_distance(xn, x, mesh).estimate;
    const SolveReport yn = solve_map(xn, h, step);
    row.d_out = m1_distance(yn.y, y.y, mesh).estimate;
    try {
      RegularizedRep reg = regularize(x, xn, eps, mesh);
      const BoundReport& b = reg.bounds;
      row.bound = std::max(gronwall_bound(b.u_dist, h_sup, b.l1_dd, b.sup_slope, h.c), b.r_dist);
      row.regularized = true;
    } catch (const Error& e) {
      const ParametricRep canonical = canonical_rep(x);
      const TransportedRep tr = transported_coupling_rep(x, xn, canonical, mesh);
      const RepDistance d = rep_distance(tr.rep_n, canonical);
      const double l1 = l1_deriv_dist(tr.rep_n, canonical);
      const double slope = deriv_profile(tr.rep_n).sup_slope;
      row.bound = std::max(gronwall_bound(d.u, h_sup, l1, slope, h.c), d.r);
      row.note = e.what();
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace m1path
