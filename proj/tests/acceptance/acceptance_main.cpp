// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "m1path/cli.hpp"
#include "m1path/continuity.hpp"
#include "m1path/error.hpp"
#include "m1path/integral_map.hpp"
#include "m1path/m1_metric.hpp"
#include "m1path/param_rep.hpp"
#include "m1path/queue_sim.hpp"
#include "m1path/regularizer.hpp"
#include "m1path/stats.hpp"
#include "support/generators.hpp"

using namespace m1path;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

const std::vector<int> kRamps{4, 8, 16, 32, 64, 128, 256, 512};

Outcome solver_accuracy() {
  auto r = solve_map(CadlagPath::constant(1.0, 1.0), linear_drift(1.0), 1e-3);
  double worst = 0.0;
  for (int i = 0; i <= 10000; ++i) {
    double t = i / 10000.0;
    worst = std::max(worst, std::abs(eval(r.y, t) - std::exp(-t)));
  }
  for (const auto& nd : r.y.nodes()) worst = std::max(worst, std::abs(nd.v - std::exp(-nd.t)));
  double limit = 1e-3 * std::exp(1.0);
  return {worst <= limit, fmt("max|y - e^-t| = %.3g <= %.3g", worst, limit)};
}

Outcome jump_coincidence() {
  auto rng = gen::make_rng(1001);
  int checked = 0, bad = 0;
  for (int k = 0; k < 100; ++k) {
    auto x = gen::random_step(rng, 10, gen::uniform(rng, 0.5, 5.0), 2.0);
    for (const auto& h : {linear_drift(1.0), qed_drift(2.0, 3.0)}) {
      auto jx = jumps(x, 0.0), jy = jumps(solve_map(x, h, 1e-3).y, 0.0);
      bool same = jx.size() == jy.size();
      for (std::size_t i = 0; same && i < jx.size(); ++i) {
        same = jx[i].t == jy[i].t && jx[i].size == jy[i].size;
      }
      bad += !same;
      ++checked;
    }
  }
  return {bad == 0, fmt("%d of %d solves reproduce the jumps exactly", checked - bad, checked)};
}

Outcome canonical_contract() {
  auto rng = gen::make_rng(1002);
  int bad = 0, paths = 0;
  std::string first;
  auto note = [&](const std::string& what) {
    if (first.empty()) first = what;
    ++bad;
  };
  while (paths < 100) {
    auto x = gen::random_step(rng, 10, gen::uniform(rng, 0.5, 5.0));
    if (jumps(x).empty()) continue;
    ++paths;
    const double T = x.horizon();
    auto rep = canonical_rep(x);
    auto k = rep.knots();
    for (std::size_t i = 1; i < k.size(); ++i) {
      double slope = (k[i].r - k[i - 1].r) / (k[i].s - k[i - 1].s);
      if (slope != 0.0 && std::abs(slope - 2 * T) > 1e-9 * T) note(fmt("slope %.17g", slope));
    }
    auto ladder = flat_ladder(x);
    std::int64_t total = 0;
    std::vector<std::int64_t> assigned(ladder.size(), 0);
    for (const auto& e : ladder) {
      total += e.final_len;
      if (e.rank) assigned[e.rank - 1] = e.assigned;
    }
    if (total != kLadderHalf) note("flat total != 1/2");
    assigned.resize(ladder.size() - 1);
    for (std::size_t j = 0; j < assigned.size(); ++j) {
      std::int64_t rest = 0;
      for (std::size_t i = j + 1; i < assigned.size(); ++i) rest += assigned[i];
      if (!(assigned[j] > rest)) note("prefix inequality");
    }
    if (std::abs(deriv_profile(rep).sup_slope - 2 * T) > 1e-9 * T) note("sup slope != 2T");
    if (!validate_rep(x, rep, 1e-9).pass) note("validate_rep failed");
  }
  return {bad == 0, bad ? fmt("%d violations, first: %s", bad, first.c_str())
                        : std::string("100 paths: slopes in {0, 2T}, flats sum to 1/2 exactly, prefix ok, valid")};
}

Outcome metric_axioms() {
  auto rng = gen::make_rng(1003);
  const double mesh = 1e-3;
  double id = 0.0, sym = 0.0, tri = 0.0, dom = 0.0;
  for (int k = 0; k < 50; ++k) {
    auto x = gen::random_step(rng, 4), y = gen::random_step(rng, 4), z = gen::random_step(rng, 4);
    double xy = m1_distance(x, y, mesh).estimate;
    double yx = m1_distance(y, x, mesh).estimate;
    double yz = m1_distance(y, z, mesh).estimate;
    double xz = m1_distance(x, z, mesh).estimate;
    id = std::max(id, m1_distance(x, x, mesh).estimate);
    sym = std::max(sym, std::abs(xy - yx));
    tri = std::max(tri, xz - (xy + yz));
    dom = std::max(dom, xy - uniform_dist(x, y));
  }
  bool pass = id <= mesh && sym <= mesh && tri <= 3 * mesh && dom <= mesh;
  return {pass, fmt("identity %.3g, symmetry gap %.3g, triangle gap %.3g, dominance gap %.3g", id, sym, tri, dom)};
}

Outcome ramp_separation() {
  const double mesh = 1e-3;
  auto x = unit_step_path();
  bool pass = true;
  double prev = INFINITY;
  std::ostringstream os;
  for (int n : kRamps) {
    auto xn = ramp_path(n);
    double d = m1_distance(xn, x, mesh).estimate, u = uniform_dist(xn, x);
    pass = pass && d <= 1.0 / n + 2 * mesh && d < prev && u >= 1.0 - 1.0 / n;
    prev = d;
    os << " n=" << n << ":" << fmt("%.4g/%.3g", d, u);
  }
  return {pass, "d_M1/uniform" + os.str()};
}

Outcome continuity() {
  const double mesh = 1e-3;
  std::vector<CadlagPath> seq;
  std::vector<double> labels;
  for (int n : kRamps) {
    seq.push_back(ramp_path(n));
    labels.push_back(n);
  }
  auto rows = continuity_experiment(seq, labels, unit_step_path(), qed_drift(1.0, 1.0), mesh, 1e-3);
  bool pass = true;
  double prev = INFINITY;
  int regularized = 0;
  for (const auto& r : rows) {
    pass = pass && r.d_out < prev && r.d_out <= r.bound;
    prev = r.d_out;
    regularized += r.regularized;
  }
  pass = pass && rows.back().d_out <= 0.05;
  return {pass, fmt("d_out %.4g -> %.4g, all <= bound; %d of %zu bounds from regularized reps", rows.front().d_out,
                    rows.back().d_out, regularized, rows.size())};
}

Outcome regularization() {
  const double eps = 0.9, mesh = 1e-3;
  std::vector<std::pair<CadlagPath, CadlagPath>> pairs{{unit_step_path(), ramp_path(64)}};
  auto rng = gen::make_rng(1007);
  for (int k = 0; k < 20; ++k) {
    auto x = gen::random_step(rng, 4, 2.0);
    pairs.emplace_back(x, gen::perturb_values(x, rng, 0.005));
  }
  int ok = 0;
  double worst_sum = 0.0, worst_sup = 0.0;
  std::string first;
  for (const auto& [x, xn] : pairs) {
    try {
      auto r = regularize(x, xn, eps, mesh);
      const auto& b = r.bounds;
      double l1 = l1_deriv_dist(r.rep, r.canonical);
      double sum_gap = std::abs(b.case1 + b.case2 + b.case3 - l1);
      worst_sum = std::max(worst_sum, sum_gap);
      worst_sup = std::max(worst_sup, b.sup_dist);
      bool good = deriv_profile(r.rep).sup_slope <= 3 * x.horizon() + 1e-9 && b.sup_dist < eps &&
                  l1 <= 3 * r.partition.eps1 && sum_gap <= 1e-9 && validate_rep(xn, r.rep, 1e-9).pass;
      ok += good;
      if (!good && first.empty()) first = "bound violated";
    } catch (const Error& e) {
      if (first.empty()) first = e.what();
    }
  }
  std::string d = fmt("%d of %zu pairs; max sup_dist %.3g, max ledger gap %.2g", ok, pairs.size(), worst_sup, worst_sum);
  if (!first.empty()) d += "; first problem: " + first;
  return {ok == static_cast<int>(pairs.size()), d};
}

Outcome jump_functionals() {
  const double mesh = 1e-3;
  auto x = unit_step_path();
  bool pass = true;
  double worst_gap = 0.0;
  for (int n : kRamps) {
    auto xn = ramp_path(n);
    pass = pass && j_max(xn) == 0.0 && j_max(xn) <= j_max(x);
    if (n >= 64) pass = pass && uniform_dist(xn, x) <= j_max(x) + 0.05;
    auto e = m1_distance(xn, x, mesh);
    auto reps = coupling_to_reps(xn, x, e.coupling);
    auto d = rep_distance(reps.rep_x, reps.rep_y);
    double rhs = ws_osc(xn, std::max(d.r, 1e-15)) + 2 * j_max(xn) + j_max(x) + d.u;
    worst_gap = std::max(worst_gap, uniform_dist(xn, x) - rhs);
  }
  pass = pass && worst_gap <= 1e-12;
  return {pass, fmt("J(xn) = 0 throughout; max(||xn - x|| - rhs) = %.3g", worst_gap)};
}

struct QueueRuns {
  std::vector<std::int64_t> ns{100, 400, 1600};
  std::vector<double> fwlln, qv_s;
  std::size_t traces = 0, identity_failures = 0;
};

QueueRuns queue_runs() {
  QueueRuns out;
  const std::size_t reps = 20;
  for (std::int64_t n : out.ns) {
    QueueParams p = staffing(n, 1.0, 1.0, 1.0, 1.5);
    p.horizon = 10.0;
    std::vector<double> fw, qs;
    for (std::size_t r = 0; r < reps; ++r) {
      auto rng = replication_stream(kDefaultSeed, static_cast<std::uint64_t>(n), r, 0);
      auto tr = simulate_queue(p, rng);
      ++out.traces;
      out.identity_failures += tr.arrivals - tr.departures - tr.abandonments + p.q0 != tr.q_final ||
                               static_cast<double>(tr.q_final) != eval(tr.queue, p.horizon);
      fw.push_back(fluid_deviation(tr));
      qs.push_back(qv_at_horizon(tr).s);
    }
    out.fwlln.push_back(median(fw));
    out.qv_s.push_back(median(qs));
  }
  return out;
}

Outcome fwlln(const QueueRuns& q) {
  bool mono = q.fwlln[1] <= q.fwlln[0] && q.fwlln[2] <= q.fwlln[1];
  bool small = q.fwlln[2] <= 0.1;
  return {mono && small, fmt("median sup|Qbar - 1| = %.4g, %.4g, %.4g (non-increasing: %s, <= 0.1 at n=1600: %s)",
                             q.fwlln[0], q.fwlln[1], q.fwlln[2], mono ? "yes" : "no", small ? "yes" : "no")};
}

Outcome fclt_trend() {
  FcltConfig cfg;
  cfg.seed = kDefaultSeed;
  auto rows = fclt_experiment(cfg);
  bool pass = true;
  std::ostringstream os;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    os << fmt(" n=%lld:%.4g(se %.3g)", static_cast<long long>(rows[i].n), rows[i].ks, rows[i].ks_se);
    if (i > 0) {
      double slack = 2.0 * std::hypot(rows[i].ks_se, rows[i - 1].ks_se);
      pass = pass && rows[i].ks <= rows[i - 1].ks + slack;
    }
  }
  return {pass, "KS" + os.str()};
}

Outcome qv_vanishing(const QueueRuns& q) {
  bool pass = true;
  std::ostringstream os;
  for (std::size_t i = 1; i < q.ns.size(); ++i) {
    double ratio = q.qv_s[i] / q.qv_s[i - 1];
    double want = std::pow(static_cast<double>(q.ns[i]) / q.ns[i - 1], -1.0 / 3.0);
    pass = pass && q.qv_s[i] < q.qv_s[i - 1] && std::abs(ratio / want - 1.0) <= 0.25;
    os << fmt(" ratio %.4g vs %.4g;", ratio, want);
  }
  return {pass, fmt("median <S^>(T) = %.4g, %.4g, %.4g;", q.qv_s[0], q.qv_s[1], q.qv_s[2]) + os.str()};
}

Outcome counting_identity(const QueueRuns& q) {
  return {q.identity_failures == 0, fmt("%zu of %zu traces balance exactly", q.traces - q.identity_failures, q.traces)};
}

}  // namespace

int main() {
  int failures = 0;
  auto report = [&](int id, const char* name, double limit_s, const std::function<Outcome()>& body) {
    auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = body();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    bool in_time = limit_s <= 0.0 || secs <= limit_s;
    bool pass = o.pass && in_time;
    failures += !pass;
    std::printf("%s %2d %s: %s [%.2fs%s]\n", pass ? "PASS" : "FAIL", id, name, o.detail.c_str(), secs,
                in_time ? "" : ", over time limit");
    std::fflush(stdout);
  };

  report(1, "integral map accuracy", 1.0, solver_accuracy);
  report(2, "jump coincidence", 10.0, jump_coincidence);
  report(3, "canonical rep contract", 5.0, canonical_contract);
  report(4, "M1 metric axioms", 60.0, metric_axioms);
  report(5, "M1 vs uniform separation", 30.0, ramp_separation);
  report(6, "continuity of the integral map", 120.0, continuity);
  report(7, "regularized representations", 120.0, regularization);
  report(8, "jump functionals", 30.0, jump_functionals);
  QueueRuns runs;
  report(9, "fluid limit", 300.0, [&] {
    runs = queue_runs();
    return fwlln(runs);
  });
  report(10, "diffusion limit trend", 900.0, fclt_trend);
  report(11, "quadratic variation vanishing", 0.0, [&] { return qv_vanishing(runs); });
  report(12, "counting identity", 0.0, [&] { return counting_identity(runs); });
  std::printf("%d of 12 criteria passed\n", 12 - failures);
  return failures ? 1 : 0;
}
