#include "m1path/cli.hpp"

#include <charconv>
#include <cstdlib>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "m1path/continuity.hpp"
#include "m1path/error.hpp"
#include "m1path/io.hpp"
#include "m1path/m1_metric.hpp"
#include "m1path/queue_sim.hpp"
#include "m1path/regularizer.hpp"

#ifndef M1PATH_VERSION
#define M1PATH_VERSION "dev"
#endif

namespace m1path {

std::uint64_t default_seed() {
  if (const char* env = std::getenv("M1PATH_SEED")) {
    std::uint64_t v = 0;
    std::string_view s(env);
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec == std::errc{} && ptr == s.data() + s.size()) return v;
    throw ParseError("M1PATH_SEED must be a non-negative integer, got '" + std::string(s) + "'");
  }
  return kDefaultSeed;
}

std::string version_string() { return std::string("m1path ") + M1PATH_VERSION + " (built " __DATE__ ")"; }

namespace {

std::string num(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return ec == std::errc{} ? std::string(buf, ptr) : std::string("nan");
}

void emit(const std::string& file, const std::string& text, std::ostream& out) {
  if (file.empty()) {
    out << text;
  } else {
    write_text_file(file, text);
  }
}

const char* kFcltColumns = "n,ks,fwlln_sup,qv_sn,qv_ln,reps,seed";
const char* kContinuityColumns = "n,d_in,d_out,bound";

std::string fclt_csv(const std::vector<FcltRow>& rows) {
  std::ostringstream s;
  s << kFcltColumns << "\n";
  for (const FcltRow& r : rows) {
    s << r.n << "," << num(r.ks) << "," << num(r.fwlln_sup) << "," << num(r.qv_sn) << "," << num(r.qv_ln)
      << "," << r.reps << "," << r.seed << "\n";
  }
  return s.str();
}

std::string continuity_csv(const std::vector<ContinuityRow>& rows) {
  std::ostringstream s;
  s << kContinuityColumns << "\n";
  for (const ContinuityRow& r : rows) {
    s << num(r.n) << "," << num(r.d_in) << "," << num(r.d_out) << "," << num(r.bound) << "\n";
  }
  return s.str();
}

Json regularize_report(const RegularizedRep& reg) {
  const BoundReport& b = reg.bounds;
  const PartitionSpec& p = reg.partition;
  Json phi = Json::array();
  for (const auto& [s, v] : reg.phi) phi.push_back({s, v});
  return Json{{"bounds",
               {{"sup_slope", b.sup_slope},
                {"sup_dist", b.sup_dist},
                {"u_dist", b.u_dist},
                {"r_dist", b.r_dist},
                {"l1_dd", b.l1_dd},
                {"case1", b.case1},
                {"case2", b.case2},
                {"case3", b.case3},
                {"coupling_cost", b.coupling_cost},
                {"input_u_dist", b.input_u_dist},
                {"phi_u_dist", b.phi_u_dist},
                {"transplants", b.transplants},
                {"transplanted_length", b.transplanted_length}}},
              {"partition",
               {{"eps", p.eps},
                {"eps1", p.eps1},
                {"eps2", p.eps2},
                {"eps3", p.eps3},
                {"eps4", p.eps4},
                {"m", p.large_jumps.size()},
                {"subintervals", p.subintervals.size()}}},
              {"rep", rep_to_json(reg.rep)},
              {"phi", std::move(phi)}};
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Numerics for the M1 topology, the integral map psi and the G/M/n+M FCLT."};
  app.name("m1path");
  app.set_version_flag("--version", version_string());
  app.require_subcommand(1);

  std::string out_file;
  double mesh = 0.0;

  auto* m1 = app.add_subcommand("m1-dist", "Approximate M1 distance between two path files.");
  std::string path_a, path_b, rep_a, rep_b;
  m1->add_option("a", path_a, "First path JSON")->required();
  m1->add_option("b", path_b, "Second path JSON")->required();
  m1->add_option("--mesh", mesh, "Graph discretization mesh (default 1e-3 * max(T, value range))");
  m1->add_option("--rep-a", rep_a, "Write the coupling rep of the first path here");
  m1->add_option("--rep-b", rep_b, "Write the coupling rep of the second path here");

  auto* canon = app.add_subcommand("canon-rep", "Canonical parametric representation of a step path.");
  std::string canon_in;
  canon->add_option("x", canon_in, "Path JSON")->required();
  canon->add_option("-o,--output", out_file, "Rep JSON output (default stdout)");

  auto* solve = app.add_subcommand("solve-map", "Solve y = x + int h(y) for a path x.");
  std::string solve_in, drift = "qed:mu=1,theta=1";
  double step = 1e-3;
  solve->add_option("x", solve_in, "Path JSON")->required();
  solve->add_option("--drift", drift, "zero | linear:c=1 | qed:mu=1,theta=1 | constant:value=0")
      ->capture_default_str();
  solve->add_option("--step", step, "Sub-grid width")->capture_default_str();
  solve->add_option("-o,--output", out_file, "Path JSON output (default stdout)");

  auto* reg = app.add_subcommand("regularize", "Regularized parametric representation of xn against x.");
  std::string reg_x, reg_xn;
  double eps = 0.9;
  double reg_mesh = 1e-3;
  reg->add_option("x", reg_x, "Limit path JSON")->required();
  reg->add_option("xn", reg_xn, "Approximating path JSON")->required();
  reg->add_option("--eps", eps, "Target accuracy")->capture_default_str();
  reg->add_option("--mesh", reg_mesh, "Coupling mesh")->capture_default_str();
  reg->add_option("-o,--output", out_file, "Report JSON {bounds, partition, rep, phi}");

  auto* sim = app.add_subcommand("simulate", "Simulate one G/M/n+M trace in the modified QED regime.");
  std::int64_t n = 400;
  double mu = 1.0, theta = 1.0, beta = 1.0, alpha = 1.5, horizon = 10.0, shift = 0.0;
  std::uint64_t seed = 0;
  std::int64_t q0 = -1;
  std::string law = "pareto";
  sim->add_option("--n", n, "Servers")->capture_default_str();
  sim->add_option("--mu", mu, "Service rate")->capture_default_str();
  sim->add_option("--theta", theta, "Abandonment rate")->capture_default_str();
  sim->add_option("--beta", beta, "QED spare-capacity parameter")->capture_default_str();
  sim->add_option("--alpha", alpha, "Tail index in (1, 2)")->capture_default_str();
  sim->add_option("--T", horizon, "Horizon")->capture_default_str();
  auto* seed_opt = sim->add_option("--seed", seed, "RNG seed (default M1PATH_SEED or 20240607)");
  sim->add_option("--q0", q0, "Initial customers (default n)");
  sim->add_option("--interarrival", law, "pareto | exponential | deterministic")->capture_default_str();
  sim->add_option("--pareto-shift", shift, "Deterministic share of each Pareto interarrival")->capture_default_str();
  sim->add_option("-o,--output", out_file, "Trace JSON output (default stdout)");

  auto* fclt = app.add_subcommand("fclt-experiment", "FCLT, FWLLN and QV diagnostics over several n.");
  fclt->footer(std::string("CSV columns: ") + kFcltColumns);
  std::string config_file;
  std::size_t reps = 0, threads = 0;
  fclt->add_option("--config", config_file, "JSON config (ns, mu, theta, beta, alpha, T, reps, seed, ...)");
  fclt->add_option("--reps", reps, "Override the replication count");
  auto* fseed_opt = fclt->add_option("--seed", seed, "Override the master seed");
  fclt->add_option("--threads", threads, "Worker threads (0: all cores)");
  fclt->add_option("-o,--output", out_file, "CSV output (default stdout)");

  auto* cont = app.add_subcommand("continuity-experiment", "d_M1 before and after psi for a path sequence.");
  cont->footer(std::string("CSV columns: ") + kContinuityColumns);
  std::vector<std::string> cont_files;
  bool ramp = false;
  double cont_mesh = 1e-3, cont_step = 1e-3;
  std::string cont_drift = "qed:mu=1,theta=1";
  cont->add_option("paths", cont_files, "x.json followed by the xn files");
  cont->add_flag("--ramp-family", ramp, "Use ramps n = 4, 8, ..., 512 against the unit step on [1, 2]");
  cont->add_option("--drift", cont_drift, "Drift spec")->capture_default_str();
  cont->add_option("--mesh", cont_mesh, "Coupling mesh")->capture_default_str();
  cont->add_option("--step", cont_step, "Solver step")->capture_default_str();
  cont->add_option("--eps", eps, "Regularization accuracy")->capture_default_str();
  cont->add_option("-o,--output", out_file, "CSV output (default stdout)");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(std::move(reversed));
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (m1->parsed()) {
      CadlagPath a = load_path(path_a);
      CadlagPath b = load_path(path_b);
      double m = mesh > 0.0 ? mesh : default_mesh(a, b);
      M1Estimate est = m1_distance(a, b, m);
      if (!rep_a.empty() || !rep_b.empty()) {
        CouplingReps reps_ab = coupling_to_reps(a, b, est.coupling);
        if (!rep_a.empty()) write_text_file(rep_a, rep_to_json(reps_ab.rep_x).dump(2) + "\n");
        if (!rep_b.empty()) write_text_file(rep_b, rep_to_json(reps_ab.rep_y).dump(2) + "\n");
      }
      out << "estimate," << num(est.estimate) << "\nmesh," << num(m) << "\n";
    } else if (canon->parsed()) {
      emit(out_file, rep_to_json(canonical_rep(load_path(canon_in))).dump(2) + "\n", out);
    } else if (solve->parsed()) {
      SolveReport r = solve_map(load_path(solve_in), parse_drift(drift), step);
      emit(out_file, path_to_json(r.y).dump(2) + "\n", out);
      if (!out_file.empty()) out << "step," << num(r.step) << "\nerror_bound," << num(r.error_bound) << "\n";
    } else if (reg->parsed()) {
      RegularizedRep r = regularize(load_path(reg_x), load_path(reg_xn), eps, reg_mesh);
      Json report = regularize_report(r);
      if (out_file.empty()) {
        out << report.dump(2) << "\n";
      } else {
        write_text_file(out_file, report.dump(2) + "\n");
        for (const auto& [key, value] : report["bounds"].items()) out << key << "," << value.dump() << "\n";
      }
    } else if (sim->parsed()) {
      QueueParams p = staffing(n, mu, theta, beta, alpha);
      p.horizon = horizon;
      p.seed = seed_opt->count() ? seed : default_seed();
      if (q0 >= 0) p.q0 = q0;
      p.interarrival = parse_interarrival(law);
      p.pareto_shift = shift;
      emit(out_file, trace_to_json(simulate_queue(p)).dump(2) + "\n", out);
    } else if (fclt->parsed()) {
      FcltConfig cfg = config_file.empty() ? FcltConfig{} : load_fclt_config(config_file);
      if (config_file.empty()) cfg.seed = default_seed();
      if (reps) cfg.reps = reps;
      if (fseed_opt->count()) cfg.seed = seed;
      if (threads) cfg.threads = threads;
      emit(out_file, fclt_csv(fclt_experiment(cfg)), out);
    } else if (cont->parsed()) {
      std::vector<CadlagPath> seq;
      std::vector<double> labels;
      CadlagPath x = unit_step_path();
      if (ramp) {
        if (!cont_files.empty()) throw CLI::ValidationError("--ramp-family takes no path files");
        for (int k = 4; k <= 512; k *= 2) {
          seq.push_back(ramp_path(k));
          labels.push_back(k);
        }
      } else {
        if (cont_files.size() < 2) throw CLI::ValidationError("need x.json and at least one xn file");
        x = load_path(cont_files[0]);
        for (std::size_t i = 1; i < cont_files.size(); ++i) {
          seq.push_back(load_path(cont_files[i]));
          labels.push_back(static_cast<double>(i));
        }
      }
      auto rows = continuity_experiment(seq, labels, x, parse_drift(cont_drift), cont_mesh, cont_step, eps);
      emit(out_file, continuity_csv(rows), out);
    }
  } catch (const CLI::ValidationError& e) {
    err << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

int run(int argc, const char* const* argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args, std::cout, std::cerr);
}

}  // namespace m1path
