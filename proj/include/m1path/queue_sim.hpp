#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "m1path/cadlag.hpp"

namespace m1path {

enum class Interarrival { pareto, exponential, deterministic };

Interarrival parse_interarrival(std::string_view name);
std::string to_string(Interarrival law);

struct QueueParams {
  std::int64_t n = 1;
  double mu = 1.0;
  double theta = 1.0;
  double beta = 0.0;
  double alpha = 1.5;
  double horizon = 1.0;
  std::int64_t q0 = 0;
  std::uint64_t seed = 0;
  Interarrival interarrival = Interarrival::pareto;
  // Pareto interarrivals: shift + (1 - shift) * Pareto-I(alpha) with mean 1, all over lambda.
  double pareto_shift = 0.0;
  double c_n = 1.0;     // n^(1/alpha)
  double rho = 1.0;     // 1 - beta c_n / n
  double lambda = 0.0;  // n mu rho
};

// Fills the derived fields; q0 defaults to n.
QueueParams staffing(std::int64_t n, double mu, double theta, double beta, double alpha);

enum class EventKind : std::uint8_t { arrival, departure, abandonment };

struct QueueEvent {
  double t = 0.0;
  EventKind kind = EventKind::arrival;
};

struct QueueTrace {
  QueueParams params;
  std::vector<QueueEvent> events;
  std::int64_t arrivals = 0;
  std::int64_t departures = 0;
  std::int64_t abandonments = 0;
  std::int64_t q_final = 0;
  CadlagPath queue = CadlagPath::constant(1.0, 0.0);     // Q_n
  CadlagPath arrival_count = CadlagPath::constant(1.0, 0.0);  // A_n
};

QueueTrace simulate_queue(const QueueParams& p, std::mt19937_64& rng);
QueueTrace simulate_queue(const QueueParams& p);  // stream from p.seed

CadlagPath fluid_scaled(const QueueTrace& tr);      // Q_n / n
CadlagPath diffusion_scaled(const QueueTrace& tr);  // (Q_n - n) / c_n
CadlagPath arrivals_scaled(const QueueTrace& tr);   // (A_n - lambda t) / c_n

// sup_t |Q_n(t) / n - 1|
double fluid_deviation(const QueueTrace& tr);

struct MartingaleDiagnostics {
  CadlagPath s_hat = CadlagPath::constant(1.0, 0.0);
  CadlagPath l_hat = CadlagPath::constant(1.0, 0.0);
  CadlagPath qv_s = CadlagPath::constant(1.0, 0.0);  // (n mu / c^2) int (Qbar ^ 1)
  CadlagPath qv_l = CadlagPath::constant(1.0, 0.0);  // (n theta / c^2) int (Qbar - 1)^+
};

MartingaleDiagnostics martingale_diagnostics(const QueueTrace& tr);

struct QvAtHorizon {
  double s = 0.0;
  double l = 0.0;
};
QvAtHorizon qv_at_horizon(const QueueTrace& tr);

struct StableLevyConfig {
  double alpha = 1.5;
  double scale = 1.0;
  double skew = -1.0;
  double grid = 0.01;
};

// Stable variate with unit scale (Chambers-Mallows-Stuck).
double stable_variate(double alpha, double skew, std::mt19937_64& rng);

// Step path on a grid of width cfg.grid with i.i.d. stable increments.
CadlagPath simulate_stable_levy(const StableLevyConfig& cfg, double horizon, std::mt19937_64& rng);
CadlagPath simulate_stable_levy(const StableLevyConfig& cfg, double horizon, std::uint64_t seed);

// Scale of the stable limit of the centred, scaled arrival process for the
// configured interarrival law (0 for the light-tailed laws).
double limit_scale(const QueueParams& p);

// Q^ from x(t) = q0hat - mu beta t + drv(t) through the integral map.
CadlagPath simulate_limit(double q0hat, const QueueParams& p, const CadlagPath& drv, double step);

struct FcltConfig {
  std::vector<std::int64_t> ns{100, 400, 1600};
  double mu = 1.0;
  double theta = 1.0;
  double beta = 1.0;
  double alpha = 1.5;
  double horizon = 10.0;
  std::size_t reps = 500;
  std::uint64_t seed = 20240607;
  Interarrival interarrival = Interarrival::pareto;
  double pareto_shift = 0.0;
  double limit_grid = 0.01;
  double limit_step = 0.01;
  double limit_scale = 0.0;   // stable scale of the limit driver; 0: matched to the interarrival law
  double limit_skew = -1.0;
  std::size_t bootstrap = 200;
  std::size_t threads = 0;  // 0: hardware concurrency
};

struct FcltRow {
  std::int64_t n = 0;
  double ks = 0.0;
  double ks_se = 0.0;
  double fwlln_sup = 0.0;  // median over replications of sup |Qbar_n - 1|
  double qv_sn = 0.0;      // median <S^_n>(T)
  double qv_ln = 0.0;      // median <L^_n>(T)
  std::size_t reps = 0;
  std::uint64_t seed = 0;
};

std::vector<FcltRow> fclt_experiment(const FcltConfig& cfg);

// Independent stream for (seed, n, replication, purpose).
std::mt19937_64 replication_stream(std::uint64_t seed, std::uint64_t n, std::uint64_t rep,
                                   std::uint64_t purpose);

}  // namespace m1path
