#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <numbers>

#include "m1path/error.hpp"
#include "m1path/queue_sim.hpp"
#include "m1path/stats.hpp"
#include "support/generators.hpp"

using namespace m1path;

namespace {

QueueParams small_params(std::int64_t n, std::uint64_t seed, Interarrival law = Interarrival::pareto) {
  QueueParams p = staffing(n, 1.0, 1.0, 1.0, 1.5);
  p.horizon = 5.0;
  p.seed = seed;
  p.interarrival = law;
  return p;
}

double brute_ks(const std::vector<double>& a, const std::vector<double>& b) {
  auto cdf = [](const std::vector<double>& v, double x) {
    return static_cast<double>(std::count_if(v.begin(), v.end(), [x](double y) { return y <= x; })) / v.size();
  };
  double d = 0.0;
  for (const auto* v : {&a, &b})
    for (double x : *v) d = std::max(d, std::abs(cdf(a, x) - cdf(b, x)));
  return d;
}

}  // namespace

TEST(Staffing, DerivedFields) {
  auto p = staffing(400, 2.0, 1.0, 1.5, 1.5);
  double c = std::pow(400.0, 1.0 / 1.5);
  EXPECT_NEAR(p.c_n, c, 1e-12);
  EXPECT_NEAR(p.rho, 1.0 - 1.5 * c / 400.0, 1e-12);
  EXPECT_NEAR(p.lambda, 400.0 * 2.0 * p.rho, 1e-9);
  EXPECT_EQ(p.q0, 400);
  EXPECT_THROW(staffing(0, 1.0, 1.0, 1.0, 1.5), DomainError);
  EXPECT_THROW(staffing(100, 1.0, 1.0, 1.0, 2.5), DomainError);
  EXPECT_THROW(staffing(4, 1.0, 1.0, 5.0, 1.5), DomainError);
}

TEST(Interarrival, ParseRoundTrip) {
  for (auto law : {Interarrival::pareto, Interarrival::exponential, Interarrival::deterministic}) {
    EXPECT_EQ(parse_interarrival(to_string(law)), law);
  }
  EXPECT_THROW(parse_interarrival("weibull"), ParseError);
}

TEST(Simulate, CountingIdentity) {
  for (auto law : {Interarrival::pareto, Interarrival::exponential, Interarrival::deterministic}) {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      auto tr = simulate_queue(small_params(100, seed, law));
      EXPECT_EQ(tr.arrivals - tr.departures - tr.abandonments + tr.params.q0, tr.q_final);
      EXPECT_EQ(eval(tr.queue, tr.params.horizon), static_cast<double>(tr.q_final));
      std::int64_t a = 0, d = 0, ab = 0;
      for (const auto& ev : tr.events) {
        a += ev.kind == EventKind::arrival;
        d += ev.kind == EventKind::departure;
        ab += ev.kind == EventKind::abandonment;
      }
      EXPECT_EQ(a, tr.arrivals);
      EXPECT_EQ(d, tr.departures);
      EXPECT_EQ(ab, tr.abandonments);
    }
  }
}

TEST(Simulate, Reproducible) {
  auto a = simulate_queue(small_params(100, 9));
  auto b = simulate_queue(small_params(100, 9));
  EXPECT_EQ(a.queue, b.queue);
  auto c = simulate_queue(small_params(100, 10));
  EXPECT_NE(a.events.size() + a.q_final * 7, 0u);
  EXPECT_FALSE(a.queue == c.queue);
}

TEST(Simulate, ArrivalRateMatchesLambda) {
  for (auto law : {Interarrival::exponential, Interarrival::deterministic}) {
    auto p = small_params(400, 3, law);
    p.horizon = 50.0;
    auto tr = simulate_queue(p);
    EXPECT_NEAR(tr.arrivals / p.horizon / p.lambda, 1.0, 0.01) << to_string(law);
  }
}

TEST(Simulate, ParetoGapsFollowTheLaw) {
  auto p = small_params(100, 6);
  p.horizon = 40.0;
  auto tr = simulate_queue(p);
  std::vector<double> gaps;
  double last = 0.0;
  for (const auto& ev : tr.events) {
    if (ev.kind != EventKind::arrival) continue;
    gaps.push_back((ev.t - last) * p.lambda);
    last = ev.t;
  }
  ASSERT_GT(gaps.size(), 1000u);
  std::sort(gaps.begin(), gaps.end());
  // Pareto-I with scale (a - 1) / a and unit mean
  const double a = p.alpha, ym = (a - 1.0) / a;
  double d = 0.0;
  for (std::size_t i = 0; i < gaps.size(); ++i) {
    double f = gaps[i] < ym ? 0.0 : 1.0 - std::pow(ym / gaps[i], a);
    d = std::max({d, std::abs(f - static_cast<double>(i) / gaps.size()),
                  std::abs(f - static_cast<double>(i + 1) / gaps.size())});
  }
  EXPECT_LT(d, 1.63 / std::sqrt(static_cast<double>(gaps.size())));
}

TEST(Scaling, RecomputableFromQueue) {
  auto tr = simulate_queue(small_params(100, 4));
  auto fl = fluid_scaled(tr), df = diffusion_scaled(tr);
  const double n = 100.0, c = tr.params.c_n;
  for (double t : {0.0, 0.7, 1.9, 3.3, 5.0}) {
    double q = eval(tr.queue, t);
    EXPECT_EQ(eval(fl, t), q / n);
    EXPECT_EQ(eval(df, t), (q - n) / c);
  }
  double sup = 0.0;
  for (const auto& nd : tr.queue.nodes()) sup = std::max(sup, std::abs(nd.v / n - 1.0));
  EXPECT_EQ(fluid_deviation(tr), sup);
}

TEST(Martingales, QuadraticVariationShape) {
  auto tr = simulate_queue(small_params(100, 5));
  auto md = martingale_diagnostics(tr);
  double prev_s = 0.0, prev_l = 0.0;
  for (int i = 0; i <= 100; ++i) {
    double t = 5.0 * i / 100;
    double s = eval(md.qv_s, t), l = eval(md.qv_l, t);
    EXPECT_GE(s, prev_s - 1e-12);
    EXPECT_GE(l, prev_l - 1e-12);
    prev_s = s;
    prev_l = l;
  }
  const auto& p = tr.params;
  EXPECT_LE(eval(md.qv_s, p.horizon), p.n * p.mu * p.horizon / (p.c_n * p.c_n) + 1e-12);
  auto qv = qv_at_horizon(tr);
  EXPECT_EQ(qv.s, eval(md.qv_s, p.horizon));
  EXPECT_EQ(qv.l, eval(md.qv_l, p.horizon));
}

TEST(Martingales, ServiceQvClosedFormWhenSaturated) {
  // deterministic arrivals far above capacity keep Q >= n, so <S^> = n mu t / c^2
  QueueParams p = staffing(50, 1.0, 0.01, -20.0, 1.5);
  p.horizon = 1.0;
  p.seed = 2;
  p.interarrival = Interarrival::deterministic;
  auto tr = simulate_queue(p);
  double qv = qv_at_horizon(tr).s;
  EXPECT_NEAR(qv, p.n * p.mu / (p.c_n * p.c_n), 1e-9);
}

TEST(Stable, CharacteristicFunction) {
  std::mt19937_64 rng{17};
  const int count = 200000;
  std::complex<double> ecf{0.0, 0.0};
  for (int i = 0; i < count; ++i) ecf += std::exp(std::complex<double>{0.0, stable_variate(1.5, -1.0, rng)});
  ecf /= static_cast<double>(count);
  // exp(-|u|^a (1 - i b sgn(u) tan(pi a / 2))) at u = 1
  double tan_term = std::tan(std::numbers::pi * 0.75);
  std::complex<double> want = std::exp(-std::complex<double>{1.0, 1.0 * tan_term});
  EXPECT_NEAR(ecf.real(), want.real(), 0.01);
  EXPECT_NEAR(ecf.imag(), want.imag(), 0.01);
}

TEST(Stable, LevyPathGrid) {
  StableLevyConfig cfg;
  cfg.grid = 0.1;
  auto drv = simulate_stable_levy(cfg, 2.0, 5);
  EXPECT_EQ(drv.horizon(), 2.0);
  EXPECT_EQ(eval(drv, 0.0), 0.0);
  EXPECT_LE(drv.breakpoints().size(), 20u);
  EXPECT_EQ(drv, simulate_stable_levy(cfg, 2.0, 5));
}

TEST(Limit, ZeroDriverClosedForm) {
  auto p = staffing(100, 2.0, 3.0, 1.0, 1.5);
  p.horizon = 2.0;
  auto y = simulate_limit(0.0, p, CadlagPath::constant(2.0, 0.0), 1e-3);
  // y' = -mu beta - mu y below zero
  for (double t : {0.25, 1.0, 2.0}) EXPECT_NEAR(eval(y, t), -(1.0 - std::exp(-2.0 * t)), 1e-5) << t;
  auto up = simulate_limit(1.0, p, CadlagPath::constant(2.0, 0.0), 1e-3);
  // above zero: y' = -mu beta - theta y, until the first hit of zero
  double hit = std::log(1.0 + 3.0 / 2.0) / 3.0;
  for (double t : {0.05, 0.2}) EXPECT_NEAR(eval(up, t), (1.0 + 2.0 / 3) * std::exp(-3.0 * t) - 2.0 / 3, 1e-5);
  EXPECT_NEAR(eval(up, hit), 0.0, 1e-4);
}

TEST(Stats, MedianAndKs) {
  EXPECT_EQ(median({3.0, 1.0, 2.0}), 2.0);
  EXPECT_EQ(median({4.0, 1.0, 2.0, 3.0}), 2.5);
  auto rng = gen::make_rng(8);
  for (int k = 0; k < 10; ++k) {
    std::vector<double> a(40 + k), b(55);
    for (auto& v : a) v = std::round(gen::uniform(rng, 0, 5));
    for (auto& v : b) v = gen::uniform(rng, 0, 5);
    EXPECT_NEAR(ks_statistic(a, b), brute_ks(a, b), 1e-15);
  }
  EXPECT_EQ(ks_statistic({1, 2, 3}, {1, 2, 3}), 0.0);
  EXPECT_EQ(ks_statistic({0, 0}, {1, 1}), 1.0);
}

TEST(Stats, BootstrapSeDeterministic) {
  std::vector<double> a{1, 2, 3, 4, 5, 6}, b{2, 3, 4, 5, 6, 7};
  double se = ks_bootstrap_se(a, b, 200, 3);
  EXPECT_GT(se, 0.0);
  EXPECT_EQ(se, ks_bootstrap_se(a, b, 200, 3));
}

TEST(Fclt, ThreadCountDoesNotChangeResults) {
  FcltConfig cfg;
  cfg.ns = {20, 40};
  cfg.horizon = 2.0;
  cfg.reps = 100;
  cfg.bootstrap = 20;
  cfg.threads = 1;
  auto one = fclt_experiment(cfg);
  cfg.threads = 3;
  auto three = fclt_experiment(cfg);
  ASSERT_EQ(one.size(), 2u);
  for (std::size_t i = 0; i < one.size(); ++i) {
    EXPECT_EQ(one[i].ks, three[i].ks);
    EXPECT_EQ(one[i].fwlln_sup, three[i].fwlln_sup);
    EXPECT_EQ(one[i].qv_sn, three[i].qv_sn);
  }
  cfg.reps = 50;
  EXPECT_THROW(fclt_experiment(cfg), DomainError);
}

TEST(Fclt, StreamsAreDistinct) {
  auto a = replication_stream(1, 100, 0, 0);
  auto b = replication_stream(1, 100, 1, 0);
  auto c = replication_stream(1, 100, 0, 1);
  auto a2 = replication_stream(1, 100, 0, 0);
  auto va = a();
  EXPECT_NE(va, b());
  EXPECT_NE(va, c());
  EXPECT_EQ(va, a2());
}
