#include "m1path/queue_sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <exception>
#include <string>
#include <thread>

#include "m1path/error.hpp"
#include "m1path/integral_map.hpp"
#include "m1path/stats.hpp"

namespace m1path {

Interarrival parse_interarrival(std::string_view name) {
  if (name == "pareto") return Interarrival::pareto;
  if (name == "exponential") return Interarrival::exponential;
  if (name == "deterministic") return Interarrival::deterministic;
  throw ParseError("unknown interarrival law '" + std::string(name) +
                   "' (expected pareto, exponential, deterministic)");
}

std::string to_string(Interarrival law) {
  switch (law) {
    case Interarrival::pareto: return "pareto";
    case Interarrival::exponential: return "exponential";
    case Interarrival::deterministic: return "deterministic";
  }
  return "?";
}

QueueParams staffing(std::int64_t n, double mu, double theta, double beta, double alpha) {
  if (n < 1) throw DomainError("staffing: n must be >= 1");
  if (!(mu > 0.0) || !std::isfinite(mu)) throw DomainError("staffing: mu must be > 0");
  if (!(theta > 0.0) || !std::isfinite(theta)) throw DomainError("staffing: theta must be > 0");
  if (!(alpha > 1.0 && alpha < 2.0)) throw DomainError("staffing: alpha must lie in (1, 2)");
  if (!std::isfinite(beta)) throw DomainError("staffing: beta must be finite");
  QueueParams p;
  p.n = n;
  p.mu = mu;
  p.theta = theta;
  p.beta = beta;
  p.alpha = alpha;
  p.q0 = n;
  const double nd = static_cast<double>(n);
  p.c_n = std::pow(nd, 1.0 / alpha);
  if (!(beta * p.c_n < nd)) {
    throw DomainError("staffing: beta * c_n = " + std::to_string(beta * p.c_n) + " must be < n = " +
                      std::to_string(n));
  }
  p.rho = 1.0 - beta * p.c_n / nd;
  p.lambda = nd * mu * p.rho;
  return p;
}

namespace {

void check_params(const QueueParams& p) {
  if (p.n < 1 || p.q0 < 0) throw DomainError("simulate_queue: need n >= 1 and q0 >= 0");
  for (double v : {p.mu, p.theta, p.lambda, p.horizon, p.c_n}) {
    if (!std::isfinite(v) || v < 0.0) throw DomainError("simulate_queue: non-finite or negative rate");
  }
  if (!(p.horizon > 0.0)) throw DomainError("simulate_queue: horizon must be > 0");
  if (!(p.pareto_shift >= 0.0 && p.pareto_shift < 1.0)) {
    throw DomainError("simulate_queue: pareto shift must lie in [0, 1)");
  }
}

double draw_interarrival(const QueueParams& p, std::mt19937_64& rng) {
  switch (p.interarrival) {
    case Interarrival::exponential:
      return std::exponential_distribution<double>(p.lambda)(rng);
    case Interarrival::deterministic:
      return 1.0 / p.lambda;
    case Interarrival::pareto: {
      const double y_m = (p.alpha - 1.0) / p.alpha;  // Pareto-I(alpha, y_m) has mean 1
      const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
      const double pareto = y_m * std::pow(1.0 - u, -1.0 / p.alpha);
      return (p.pareto_shift + (1.0 - p.pareto_shift) * pareto) / p.lambda;
    }
  }
  return 0.0;
}

}  // namespace

QueueTrace simulate_queue(const QueueParams& p, std::mt19937_64& rng) {
  check_params(p);
  QueueTrace tr;
  tr.params = p;
  const double T = p.horizon;
  const double inf = std::numeric_limits<double>::infinity();
  std::int64_t q = p.q0;
  double t = 0.0;
  double next_arrival = p.lambda > 0.0 ? draw_interarrival(p, rng) : inf;
  std::vector<Node> q_changes;
  std::vector<Node> a_changes;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (;;) {
    const double serving = p.mu * static_cast<double>(std::min(q, p.n));
    const double waiting = p.theta * static_cast<double>(std::max<std::int64_t>(q - p.n, 0));
    const double rate = serving + waiting;
    const double next_clock = rate > 0.0 ? t + std::exponential_distribution<double>(rate)(rng) : inf;
    if (next_arrival <= next_clock) {
      if (next_arrival > T) break;
      t = next_arrival;
      ++q;
      ++tr.arrivals;
      tr.events.push_back({t, EventKind::arrival});
      a_changes.push_back({t, static_cast<double>(tr.arrivals)});
      next_arrival = t + draw_interarrival(p, rng);
    } else {
      if (next_clock > T) break;
      t = next_clock;
      --q;
      if (unit(rng) * rate < serving) {
        ++tr.departures;
        tr.events.push_back({t, EventKind::departure});
      } else {
        ++tr.abandonments;
        tr.events.push_back({t, EventKind::abandonment});
      }
    }
    q_changes.push_back({t, static_cast<double>(q)});
  }
  tr.q_final = q;
  tr.queue = CadlagPath::step(T, static_cast<double>(p.q0), std::move(q_changes));
  tr.arrival_count = CadlagPath::step(T, 0.0, std::move(a_changes));
  if (tr.arrivals - tr.departures - tr.abandonments + p.q0 != tr.q_final) {
    throw InternalConsistencyError("queue counts do not balance");
  }
  return tr;
}

QueueTrace simulate_queue(const QueueParams& p) {
  std::mt19937_64 rng(p.seed);
  return simulate_queue(p, rng);
}

namespace {

template <class F>
CadlagPath map_step(const CadlagPath& x, double initial, F&& f) {
  std::vector<Node> changes = x.step_changes();
  for (Node& c : changes) c.v = f(c.v);
  return CadlagPath::step(x.horizon(), f(initial), std::move(changes));
}

}  // namespace

CadlagPath fluid_scaled(const QueueTrace& tr) {
  const double n = static_cast<double>(tr.params.n);
  return map_step(tr.queue, static_cast<double>(tr.params.q0), [n](double v) { return v / n; });
}

CadlagPath diffusion_scaled(const QueueTrace& tr) {
  const double n = static_cast<double>(tr.params.n);
  const double c = tr.params.c_n;
  return map_step(tr.queue, static_cast<double>(tr.params.q0), [n, c](double v) { return (v - n) / c; });
}

CadlagPath arrivals_scaled(const QueueTrace& tr) {
  const double c = tr.params.c_n;
  const double lambda = tr.params.lambda;
  std::vector<Node> nodes{{0.0, 0.0}};
  std::vector<double> inc{0.0};
  double count = 0.0;
  for (const QueueEvent& e : tr.events) {
    if (e.kind != EventKind::arrival) continue;
    nodes.push_back({e.t, (count - lambda * e.t) / c});
    inc.push_back(0.0);
    count += 1.0;
    nodes.push_back({e.t, (count - lambda * e.t) / c});
    inc.push_back(1.0 / c);
  }
  const double T = tr.params.horizon;
  if (nodes.back().t < T) {
    nodes.push_back({T, (count - lambda * T) / c});
    inc.push_back(0.0);
  }
  return CadlagPath::piecewise_linear(T, std::move(nodes), inc);
}

double fluid_deviation(const QueueTrace& tr) {
  const double n = static_cast<double>(tr.params.n);
  double out = std::abs(static_cast<double>(tr.params.q0) / n - 1.0);
  for (const Node& c : tr.queue.step_changes()) out = std::max(out, std::abs(c.v / n - 1.0));
  return out;
}

namespace {

// Replays the trace, calling visit(t, q_before, event) at each event and once at T.
template <class Visit>
void replay(const QueueTrace& tr, Visit&& visit) {
  std::int64_t q = tr.params.q0;
  for (const QueueEvent& e : tr.events) {
    visit(e.t, q, &e);
    q += e.kind == EventKind::arrival ? 1 : -1;
  }
  visit(tr.params.horizon, q, nullptr);
}

}  // namespace

MartingaleDiagnostics martingale_diagnostics(const QueueTrace& tr) {
  const QueueParams& p = tr.params;
  const double n = static_cast<double>(p.n);
  const double c = p.c_n;
  const double T = p.horizon;
  std::vector<Node> s_nodes{{0.0, 0.0}}, l_nodes{{0.0, 0.0}}, qs_nodes{{0.0, 0.0}}, ql_nodes{{0.0, 0.0}};
  std::vector<double> s_inc{0.0}, l_inc{0.0};
  double t_prev = 0.0;
  double served = 0.0, abandoned = 0.0;       // event counts
  double comp_s = 0.0, comp_l = 0.0;          // compensators
  double int_s = 0.0, int_l = 0.0;            // integrals of (Qbar ^ 1), (Qbar - 1)^+
  replay(tr, [&](double t, std::int64_t q, const QueueEvent* e) {
    const double dt = t - t_prev;
    const double qd = static_cast<double>(q);
    comp_s += p.mu * std::min(qd, n) * dt;
    comp_l += p.theta * std::max(qd - n, 0.0) * dt;
    int_s += std::min(qd / n, 1.0) * dt;
    int_l += std::max(qd / n - 1.0, 0.0) * dt;
    t_prev = t;
    if (t > 0.0) {
      s_nodes.push_back({t, (served - comp_s) / c});
      s_inc.push_back(0.0);
      l_nodes.push_back({t, (abandoned - comp_l) / c});
      l_inc.push_back(0.0);
      qs_nodes.push_back({t, n * p.mu / (c * c) * int_s});
      ql_nodes.push_back({t, n * p.theta / (c * c) * int_l});
    }
    if (e && e->kind == EventKind::departure) {
      served += 1.0;
      s_nodes.push_back({t, (served - comp_s) / c});
      s_inc.push_back(1.0 / c);
    } else if (e && e->kind == EventKind::abandonment) {
      abandoned += 1.0;
      l_nodes.push_back({t, (abandoned - comp_l) / c});
      l_inc.push_back(1.0 / c);
    }
  });
  return {CadlagPath::piecewise_linear(T, std::move(s_nodes), s_inc),
          CadlagPath::piecewise_linear(T, std::move(l_nodes), l_inc),
          CadlagPath::piecewise_linear(T, std::move(qs_nodes)),
          CadlagPath::piecewise_linear(T, std::move(ql_nodes))};
}

QvAtHorizon qv_at_horizon(const QueueTrace& tr) {
  const QueueParams& p = tr.params;
  const double n = static_cast<double>(p.n);
  double t_prev = 0.0, int_s = 0.0, int_l = 0.0;
  replay(tr, [&](double t, std::int64_t q, const QueueEvent*) {
    const double qbar = static_cast<double>(q) / n;
    int_s += std::min(qbar, 1.0) * (t - t_prev);
    int_l += std::max(qbar - 1.0, 0.0) * (t - t_prev);
    t_prev = t;
  });
  const double c2 = p.c_n * p.c_n;
  return {n * p.mu / c2 * int_s, n * p.theta / c2 * int_l};
}

double stable_variate(double alpha, double skew, std::mt19937_64& rng) {
  constexpr double kPi = 3.14159265358979323846;
  const double v = std::uniform_real_distribution<double>(-kPi / 2.0, kPi / 2.0)(rng);
  const double w = std::exponential_distribution<double>(1.0)(rng);
  const double tan_term = skew * std::tan(kPi * alpha / 2.0);
  const double b = std::atan(tan_term) / alpha;
  const double s = std::pow(1.0 + tan_term * tan_term, 1.0 / (2.0 * alpha));
  return s * std::sin(alpha * (v + b)) / std::pow(std::cos(v), 1.0 / alpha) *
         std::pow(std::cos(v - alpha * (v + b)) / w, (1.0 - alpha) / alpha);
}

CadlagPath simulate_stable_levy(const StableLevyConfig& cfg, double horizon, std::mt19937_64& rng) {
  if (!(cfg.alpha > 1.0 && cfg.alpha <= 2.0)) throw DomainError("stable driver: alpha must lie in (1, 2]");
  if (!(cfg.skew >= -1.0 && cfg.skew <= 1.0)) throw DomainError("stable driver: skew must lie in [-1, 1]");
  if (!(cfg.scale >= 0.0) || !std::isfinite(cfg.scale)) throw DomainError("stable driver: scale must be >= 0");
  if (!(cfg.grid > 0.0) || !(horizon > 0.0)) throw DomainError("stable driver: grid and horizon must be > 0");
  const auto pieces = static_cast<std::size_t>(std::ceil(horizon / cfg.grid));
  const double h = horizon / static_cast<double>(pieces);
  const double factor = cfg.scale * std::pow(h, 1.0 / cfg.alpha);
  std::vector<Node> changes;
  changes.reserve(pieces);
  double level = 0.0;
  for (std::size_t k = 1; k <= pieces; ++k) {
    const double x = stable_variate(cfg.alpha, cfg.skew, rng);
    level += factor * x;
    const double t = k == pieces ? horizon : h * static_cast<double>(k);
    changes.push_back({t, level});
  }
  return CadlagPath::step(horizon, 0.0, std::move(changes));
}

CadlagPath simulate_stable_levy(const StableLevyConfig& cfg, double horizon, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return simulate_stable_levy(cfg, horizon, rng);
}

double limit_scale(const QueueParams& p) {
  if (p.interarrival != Interarrival::pareto) return 0.0;
  constexpr double kPi = 3.14159265358979323846;
  const double a = p.alpha;
  const double c_alpha = (1.0 - a) / (std::tgamma(2.0 - a) * std::cos(kPi * a / 2.0));
  const double y_m = (1.0 - p.pareto_shift) * (a - 1.0) / a;
  return y_m * std::pow(p.mu, 1.0 / a) / std::pow(c_alpha, 1.0 / a);
}

CadlagPath simulate_limit(double q0hat, const QueueParams& p, const CadlagPath& drv, double step) {
  if (drv.horizon() != p.horizon) throw DomainError("simulate_limit: driver horizon differs from T");
  auto graph = drv.nodes();
  std::vector<Node> nodes;
  std::vector<double> inc;
  nodes.reserve(graph.size());
  inc.reserve(graph.size());
  for (std::size_t i = 0; i < graph.size(); ++i) {
    nodes.push_back({graph[i].t, q0hat - p.mu * p.beta * graph[i].t + graph[i].v});
    inc.push_back(drv.increment_at_node(i));
  }
  CadlagPath x = CadlagPath::piecewise_linear(p.horizon, std::move(nodes), inc);
  return solve_map(x, qed_drift(p.mu, p.theta), step).y;
}

std::mt19937_64 replication_stream(std::uint64_t seed, std::uint64_t n, std::uint64_t rep,
                                   std::uint64_t purpose) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(n), static_cast<std::uint32_t>(rep),
                    static_cast<std::uint32_t>(purpose)};
  return std::mt19937_64(seq);
}

namespace {

// Runs body(i) for i in [0, count) on `threads` workers; results must be written by index.
template <class Body>
void parallel_for(std::size_t count, std::size_t threads, const Body& body) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, count);
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::vector<std::exception_ptr> errors(threads);
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < threads; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < count; i += threads) body(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (std::thread& th : pool) th.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace

std::vector<FcltRow> fclt_experiment(const FcltConfig& cfg) {
  if (cfg.reps < 100) throw DomainError("fclt_experiment: reps must be >= 100");
  if (cfg.ns.empty()) throw DomainError("fclt_experiment: no server counts given");
  if (!(cfg.limit_scale >= 0.0) || !(std::abs(cfg.limit_skew) <= 1.0)) {
    throw DomainError("fclt_experiment: limit_scale must be >= 0 and limit_skew in [-1, 1]");
  }
  std::vector<FcltRow> rows;
  for (std::int64_t n : cfg.ns) {
    QueueParams p = staffing(n, cfg.mu, cfg.theta, cfg.beta, cfg.alpha);
    p.horizon = cfg.horizon;
    p.interarrival = cfg.interarrival;
    p.pareto_shift = cfg.pareto_shift;
    const double scale = cfg.limit_scale > 0.0 ? cfg.limit_scale : limit_scale(p);
    const StableLevyConfig levy{cfg.alpha, scale, cfg.limit_skew, cfg.limit_grid};
    const double q0hat = (static_cast<double>(p.q0) - static_cast<double>(n)) / p.c_n;

    std::vector<double> q_hat(cfg.reps), limit(cfg.reps), fwlln(cfg.reps), qv_s(cfg.reps), qv_l(cfg.reps);
    const auto un = static_cast<std::uint64_t>(n);
    parallel_for(cfg.reps, cfg.threads, [&](std::size_t r) {
      std::mt19937_64 rng = replication_stream(cfg.seed, un, r, 0);
      QueueTrace tr = simulate_queue(p, rng);
      q_hat[r] = (static_cast<double>(tr.q_final) - static_cast<double>(n)) / p.c_n;
      fwlln[r] = fluid_deviation(tr);
      QvAtHorizon qv = qv_at_horizon(tr);
      qv_s[r] = qv.s;
      qv_l[r] = qv.l;
      std::mt19937_64 lrng = replication_stream(cfg.seed, un, r, 1);
      CadlagPath drv = simulate_stable_levy(levy, cfg.horizon, lrng);
      limit[r] = simulate_limit(q0hat, p, drv, cfg.limit_step).value_at(cfg.horizon);
    });

    FcltRow row;
    row.n = n;
    row.ks = ks_statistic(q_hat, limit);
    row.ks_se = ks_bootstrap_se(q_hat, limit, cfg.bootstrap, cfg.seed ^ (un * 0x9e3779b97f4a7c15ull));
    row.fwlln_sup = median(fwlln);
    row.qv_sn = median(qv_s);
    row.qv_ln = median(qv_l);
    row.reps = cfg.reps;
    row.seed = cfg.seed;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace m1path
