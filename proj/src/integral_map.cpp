#include "m1path/integral_map.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <iostream>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "m1path/error.hpp"

namespace m1path {

LipschitzDrift zero_drift() {
  return {[](double) { return 0.0; }, 0.0, "zero"};
}

LipschitzDrift linear_drift(double c) {
  if (!(c >= 0.0) || !std::isfinite(c)) throw DomainError("linear drift: c must be >= 0");
  return {[c](double w) { return -c * w; }, c, "linear:c=" + std::to_string(c)};
}

LipschitzDrift qed_drift(double mu, double theta) {
  if (!(mu >= 0.0) || !(theta >= 0.0) || !std::isfinite(mu) || !std::isfinite(theta)) {
    throw DomainError("qed drift: mu and theta must be >= 0");
  }
  return {[mu, theta](double w) { return -mu * std::min(w, 0.0) - theta * std::max(w, 0.0); },
          std::max(mu, theta), "qed:mu=" + std::to_string(mu) + ",theta=" + std::to_string(theta)};
}

LipschitzDrift constant_drift(double value) {
  if (!std::isfinite(value)) throw DomainError("constant drift: value must be finite");
  return {[value](double) { return value; }, 0.0, "constant:value=" + std::to_string(value)};
}

namespace {

std::map<std::string, double> parse_params(std::string_view text, std::string_view spec) {
  std::map<std::string, double> out;
  while (!text.empty()) {
    auto comma = text.find(',');
    std::string_view item = text.substr(0, comma);
    text = comma == std::string_view::npos ? std::string_view{} : text.substr(comma + 1);
    auto eq = item.find('=');
    if (eq == std::string_view::npos) {
      throw ParseError("drift '" + std::string(spec) + "': expected key=value, got '" +
                       std::string(item) + "'");
    }
    std::string_view num = item.substr(eq + 1);
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(num.data(), num.data() + num.size(), value);
    if (ec != std::errc{} || ptr != num.data() + num.size()) {
      throw ParseError("drift '" + std::string(spec) + "': bad number '" + std::string(num) + "'");
    }
    out[std::string(item.substr(0, eq))] = value;
  }
  return out;
}

double take(std::map<std::string, double>& params, const std::string& key, double fallback) {
  auto it = params.find(key);
  if (it == params.end()) return fallback;
  double v = it->second;
  params.erase(it);
  return v;
}

}  // namespace

LipschitzDrift parse_drift(std::string_view spec) {
  auto colon = spec.find(':');
  std::string_view kind = spec.substr(0, colon);
  auto params = parse_params(colon == std::string_view::npos ? std::string_view{} : spec.substr(colon + 1), spec);
  LipschitzDrift out;
  if (kind == "zero") {
    out = zero_drift();
  } else if (kind == "linear") {
    out = linear_drift(take(params, "c", 1.0));
  } else if (kind == "qed") {
    double mu = take(params, "mu", 1.0);
    out = qed_drift(mu, take(params, "theta", 1.0));
  } else if (kind == "constant") {
    out = constant_drift(take(params, "value", 0.0));
  } else {
    throw ParseError("unknown drift '" + std::string(kind) + "' (expected zero, linear, qed, constant)");
  }
  if (!params.empty()) {
    throw ParseError("drift '" + std::string(spec) + "': unknown parameter '" + params.begin()->first + "'");
  }
  return out;
}

namespace {

constexpr std::size_t kMaxPicard = 200;

double checked(double v) {
  if (!std::isfinite(v)) throw DomainError("drift returned a non-finite value");
  return v;
}

struct YNode {
  Node node;
  double increment = 0.0;
  bool jump = false;
};

// Drops interior nodes of exactly constant runs; jump nodes are kept.
std::vector<YNode> drop_flat_nodes(const std::vector<YNode>& in) {
  std::vector<YNode> out;
  out.reserve(in.size());
  for (std::size_t i = 0; i < in.size(); ++i) {
    bool interior = !out.empty() && i + 1 < in.size() && !in[i].jump && !in[i + 1].jump &&
                    in[i + 1].node.t > in[i].node.t;
    if (interior && out.back().node.v == in[i].node.v && in[i + 1].node.v == in[i].node.v) continue;
    out.push_back(in[i]);
  }
  return out;
}

}  // namespace

SolveReport solve_map(const CadlagPath& x, const LipschitzDrift& h, double step) {
  if (!(step > 0.0) || !std::isfinite(step)) throw DomainError("solve_map: step must be > 0");
  if (!h.rule) throw DomainError("solve_map: drift has no rule");
  const double horizon = x.horizon();
  double width = step;
  if (h.c > 0.0) width = std::min(width, 0.5 / h.c);

  std::map<double, double> jump_inc;
  for (const Jump& j : jumps(x)) jump_inc[j.t] = j.increment;

  std::vector<double> times{0.0};
  for (double b : x.breakpoints()) times.push_back(b);
  if (times.back() < horizon) times.push_back(horizon);

  SolveReport report;
  std::vector<YNode> ys;
  double integral = 0.0;  // I(t) = int_0^t h(y)
  double h_sup = std::abs(checked(h(x.value_at(0.0))));
  double variation = 0.0;  // total variation of the continuous part of x
  ys.push_back({{0.0, x.value_at(0.0)}, 0.0, false});

  for (std::size_t k = 0; k + 1 < times.size(); ++k) {
    const double a = times[k];
    const double b = times[k + 1];
    const double xa = x.value_at(a);
    const double xb = x.left_limit(b);
    variation += std::abs(xb - xa);
    auto pieces = static_cast<std::size_t>(std::ceil((b - a) / width));
    pieces = std::max<std::size_t>(pieces, 1);
    double t0 = a;
    double y0 = xa + integral;
    double h0 = checked(h(y0));
    for (std::size_t p = 1; p <= pieces; ++p) {
      double t1 = p == pieces ? b : a + (b - a) * (static_cast<double>(p) / static_cast<double>(pieces));
      double x1 = p == pieces ? xb : xa + (xb - xa) * ((t1 - a) / (b - a));
      double dt = t1 - t0;
      report.step = std::max(report.step, dt);
      double i1 = integral + dt * h0;
      std::size_t it = 0;
      for (;; ++it) {
        if (it == kMaxPicard) {
          throw NotConvergedEnough("solve_map: Picard iteration stalled at t = " + std::to_string(t1));
        }
        double next = integral + 0.5 * dt * (h0 + checked(h(x1 + i1)));
        double change = std::abs(next - i1);
        i1 = next;
        if (change <= 1e-12 * (1.0 + std::abs(x1 + i1))) break;
      }
      report.max_iterations = std::max(report.max_iterations, it + 1);
      integral = i1;
      t0 = t1;
      y0 = x1 + integral;
      h0 = checked(h(y0));
      h_sup = std::max(h_sup, std::abs(h0));
      ys.push_back({{t1, y0}, 0.0, false});
    }
    auto jit = jump_inc.find(b);
    if (jit != jump_inc.end()) {
      double yb = x.value_at(b) + integral;
      h_sup = std::max(h_sup, std::abs(checked(h(yb))));
      ys.push_back({{b, yb}, jit->second, true});
    }
  }

  ys = drop_flat_nodes(ys);
  std::vector<Node> nodes;
  std::vector<double> increments;
  nodes.reserve(ys.size());
  increments.reserve(ys.size());
  for (const YNode& n : ys) {
    nodes.push_back(n.node);
    increments.push_back(n.increment);
  }
  report.y = CadlagPath::piecewise_linear(horizon, std::move(nodes), increments);
  report.error_bound = (h_sup + variation / horizon) * report.step * std::exp(h.c * horizon);
  return report;
}

double check_lipschitz(const LipschitzDrift& h, double lo, double hi, std::size_t samples,
                       std::uint64_t seed) {
  if (!(lo < hi)) throw DomainError("check_lipschitz: need lo < hi");
  if (samples < 2) throw DomainError("check_lipschitz: need at least two samples");
  double best = 0.0;
  auto quotient = [&](double a, double b) {
    if (a == b) return;
    best = std::max(best, std::abs(checked(h(a)) - checked(h(b))) / std::abs(a - b));
  };
  double prev = lo;
  for (std::size_t i = 1; i < samples; ++i) {
    double w = lo + (hi - lo) * (static_cast<double>(i) / static_cast<double>(samples - 1));
    quotient(prev, w);
    prev = w;
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> pick(lo, hi);
  for (std::size_t i = 0; i < samples; ++i) quotient(pick(rng), pick(rng));
  if (best > h.c * (1.0 + 1e-9) + 1e-12) {
    std::cerr << "warning: drift " << h.name << " has estimated Lipschitz constant " << best
              << " above the declared " << h.c << "\n";
  }
  return best;
}

double gronwall_bound(double eta, double h_sup, double l1_dd, double sup_slope, double c) {
  for (double v : {eta, h_sup, l1_dd, sup_slope, c}) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw DomainError("gronwall_bound: inputs must be finite and >= 0");
  }
  return (eta + h_sup * l1_dd) * std::exp(sup_slope * c);
}

}  // namespace m1path
