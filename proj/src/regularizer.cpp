#include "m1path/regularizer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>

#include "m1path/error.hpp"

namespace m1path {

namespace {

struct Anchor {
  double s = 0.0;
  double t = 0.0;
  std::size_t subinterval = 0;  // subinterval of the piece starting here
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

void add_anchor(std::vector<Anchor>& out, double s, double t, std::size_t sub) {
  if (!out.empty() && out.back().s == s) {
    out.back().subinterval = sub;
    return;
  }
  if (!out.empty() && !(s > out.back().s)) {
    throw InternalConsistencyError("anchors out of order at s = " + fmt(s));
  }
  out.push_back({s, t, sub});
}

std::vector<Anchor> build_anchors(const PartitionSpec& spec, const ParametricRep& rep,
                                  const ParametricRep& rep_n) {
  const double T = spec.horizon;
  const double e2 = spec.eps2;
  std::vector<Anchor> out;
  for (std::size_t k = 0; k < spec.subintervals.size(); ++k) {
    const Subinterval& sub = spec.subintervals[k];
    switch (sub.kind) {
      case SubintervalKind::small_jump: {
        double t0 = sub.jump == 0 ? 0.0 : spec.large_jumps[sub.jump - 1].t + 2.0 * e2;
        double t1 = sub.jump == spec.large_jumps.size() ? T : spec.large_jumps[sub.jump].t - 2.0 * e2;
        add_anchor(out, sub.s0, t0, k);
        for (const RepKnot& kn : rep.knots()) {
          if (kn.s > sub.s0 && kn.s < sub.s1) add_anchor(out, kn.s, kn.r, k);
        }
        add_anchor(out, sub.s1, t1, k);
        break;
      }
      case SubintervalKind::connecting: {
        const LargeJump& lj = spec.large_jumps[sub.jump];
        const bool left = sub.s1 == lj.s_start;
        double t0 = left ? lj.t - 2.0 * e2 : rep_n.r(lj.s_end);
        double t1 = left ? rep_n.r(lj.s_start) : lj.t + 2.0 * e2;
        if (left && !(t1 > t0)) {
          throw NotConvergedEnough("r_n(s_start) = " + fmt(t1) + " must exceed t_j - 2 eps2 = " + fmt(t0));
        }
        if (!left && !(t1 > t0)) {
          throw NotConvergedEnough("r_n(s_end) = " + fmt(t0) + " must stay below t_j + 2 eps2 = " + fmt(t1));
        }
        double slope = (t1 - t0) / (sub.s1 - sub.s0);
        if (slope > 2.5 * T * (1.0 + 1e-12)) {
          throw NotConvergedEnough("connecting-interval slope " + fmt(slope) + " exceeds (5/2) T");
        }
        add_anchor(out, sub.s0, t0, k);
        add_anchor(out, sub.s1, t1, k);
        break;
      }
      case SubintervalKind::large_jump: {
        const LargeJump& lj = spec.large_jumps[sub.jump];
        const double w = (lj.s_end - lj.s_start) / static_cast<double>(lj.pieces);
        double prev_t = rep_n.r(lj.s_start);
        add_anchor(out, lj.s_start, prev_t, k);
        for (std::size_t p = 1; p <= lj.pieces; ++p) {
          double s = p == lj.pieces ? lj.s_end : lj.s_start + w * static_cast<double>(p);
          double t = rep_n.r(s);
          if ((t - prev_t) / w > T * (1.0 + 1e-12)) {
            throw NotConvergedEnough("r_n rises by " + fmt(t - prev_t) + " over a flat-spot piece of width " +
                                     fmt(w) + "; needs slope <= T (||r_n - r|| <= eps3)");
          }
          add_anchor(out, s, t, k);
          prev_t = t;
        }
        break;
      }
    }
  }
  return out;
}

}  // namespace

TimeComponent build_time_component(const PartitionSpec& spec, const ParametricRep& rep,
                                   const ParametricRep& rep_n) {
  const std::vector<Anchor> anchors = build_anchors(spec, rep, rep_n);
  const std::vector<FlatSpot> levels = detect_flat_spots(rep_n.knots());
  TimeComponent out;

  // Every flat spot of r_n gets exactly one flat spot of r~, found by level.
  std::size_t next = 0;
  for (std::size_t i = 0; i + 1 < anchors.size(); ++i) {
    TimePiece piece{anchors[i].s, anchors[i + 1].s, anchors[i].t, anchors[i + 1].t,
                    anchors[i].subinterval, {}};
    if (piece.t1 < piece.t0) {
      throw InternalConsistencyError("time anchors decrease at s = " + fmt(piece.s0));
    }
    if (next < levels.size() && levels[next].t < piece.t0) {
      throw InternalConsistencyError("flat spot of r_n at level " + fmt(levels[next].t) + " was skipped");
    }
    if (piece.t0 == piece.t1) {
      if (next < levels.size() && levels[next].t == piece.t0) ++next;
    } else {
      while (next < levels.size() && levels[next].t < piece.t1) {
        piece.flats.emplace_back(levels[next].t, 0.0);
        ++next;
      }
    }
    out.pieces.push_back(std::move(piece));
  }
  if (next != levels.size()) {
    throw InternalConsistencyError("flat spot of r_n at level " + fmt(levels[next].t) + " was skipped");
  }

  for (const TimePiece& p : out.pieces) {
    if (spec.subintervals[p.subinterval].kind == SubintervalKind::small_jump) out.transplants += p.flats.size();
  }
  const double T = spec.horizon;
  const double delta_n = spec.eps1 / (6.0 * T);
  for (TimePiece& p : out.pieces) {
    if (p.flats.empty()) continue;
    const double g = p.s1 - p.s0;
    const double count = static_cast<double>(p.flats.size());
    double len = 0.0;
    switch (spec.subintervals[p.subinterval].kind) {
      case SubintervalKind::large_jump: len = g / 2.0 / count; break;
      case SubintervalKind::connecting: len = g / 6.0 / count; break;
      case SubintervalKind::small_jump:
        len = std::min({delta_n / static_cast<double>(out.transplants), g / (3.0 * count),
                        spec.eps4 / (2.0 * T * count)});
        out.transplanted_length += len * count;
        break;
    }
    for (auto& f : p.flats) f.second = len;
  }

  auto push = [&](double s, double t) {
    if (!out.knots.empty() && !(s > out.knots.back().s)) {
      throw InternalConsistencyError("time component knots collide at s = " + fmt(s));
    }
    out.knots.push_back({s, 0.0, t});
  };
  push(0.0, anchors.front().t);
  for (const TimePiece& p : out.pieces) {
    if (!p.flats.empty()) {
      double flat_total = 0.0;
      for (const auto& f : p.flats) flat_total += f.second;
      const double slope = (p.t1 - p.t0) / (p.s1 - p.s0 - flat_total);
      double cur_s = p.s0;
      double cur_t = p.t0;
      for (const auto& [level, len] : p.flats) {
        double s_level = level == cur_t ? cur_s : cur_s + (level - cur_t) / slope;
        if (s_level > cur_s) push(s_level, level);
        push(s_level + len, level);
        cur_s = s_level + len;
        cur_t = level;
      }
    }
    push(p.s1, p.t1);
  }
  out.knots.back().s = 1.0;
  return out;
}

PhiResult build_phi(const ParametricRep& rep_n, std::span<const RepKnot> r_tilde) {
  const std::size_t n = r_tilde.size();
  if (n < 2) throw DomainError("build_phi: time component needs two knots");
  const double tol = 1e-12 * (1.0 + std::abs(r_tilde.back().r));
  auto unique_inverse = [&](double t) {
    double lo = rep_n.lower_inverse(t);
    double hi = rep_n.upper_inverse(t);
    if (hi - lo > tol) {
      throw InternalConsistencyError("r_n has a flat spot at level " + fmt(t) + " that r~ lacks");
    }
    return lo;
  };

  std::vector<double> at(n);
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && r_tilde[j + 1].r == r_tilde[i].r) ++j;
    if (j > i) {
      const double lo = rep_n.lower_inverse(r_tilde[i].r);
      const double hi = rep_n.upper_inverse(r_tilde[i].r);
      for (std::size_t k = i; k <= j; ++k) {
        at[k] = lo + (r_tilde[k].s - r_tilde[i].s) / (r_tilde[j].s - r_tilde[i].s) * (hi - lo);
      }
    } else {
      at[i] = unique_inverse(r_tilde[i].r);
    }
    i = j + 1;
  }
  if (std::abs(at.front()) > tol || std::abs(at.back() - 1.0) > tol) {
    throw InternalConsistencyError("phi does not fix the endpoints of [0, 1]");
  }
  at.front() = 0.0;
  at.back() = 1.0;

  auto knots_n = rep_n.knots();
  PhiResult out;
  auto& phi = out.phi;
  phi.emplace_back(r_tilde[0].s, at[0]);
  for (std::size_t k = 0; k + 1 < n; ++k) {
    const RepKnot& a = r_tilde[k];
    const RepKnot& b = r_tilde[k + 1];
    if (b.r > a.r) {
      // Rising piece: phi = r_n^-1 o r~, linear between the r_n knot times it crosses.
      auto first = std::upper_bound(knots_n.begin(), knots_n.end(), a.r,
                                    [](double v, const RepKnot& kn) { return v < kn.r; });
      for (auto it = first; it != knots_n.end() && it->r < b.r; ++it) {
        if (it != first && it->r == (it - 1)->r) continue;
        double s = a.s + (it->r - a.r) / (b.r - a.r) * (b.s - a.s);
        if (s > phi.back().first && s < b.s) phi.emplace_back(s, unique_inverse(it->r));
      }
    } else {
      // Flat piece: add preimages of the knots of (u_n, r_n) it passes over.
      const double pa = at[k];
      const double pb = at[k + 1];
      if (pb > pa) {
        auto first = std::upper_bound(knots_n.begin(), knots_n.end(), pa,
                                      [](double v, const RepKnot& kn) { return v < kn.s; });
        for (auto it = first; it != knots_n.end() && it->s < pb; ++it) {
          double s = a.s + (it->s - pa) / (pb - pa) * (b.s - a.s);
          if (s > phi.back().first && s < b.s) phi.emplace_back(s, it->s);
        }
      }
    }
    phi.emplace_back(b.s, at[k + 1]);
  }

  const ParametricRep rt{std::vector<RepKnot>(r_tilde.begin(), r_tilde.end())};
  std::vector<RepKnot> knots;
  knots.reserve(phi.size());
  for (std::size_t i = 0; i < phi.size(); ++i) {
    const auto [s, p] = phi[i];
    if (i > 0 && p < phi[i - 1].second) {
      throw InternalConsistencyError("phi decreases at s = " + fmt(s));
    }
    const double r = rt.r(s);
    if (std::abs(rep_n.r(p) - r) > 1e-9 * (1.0 + std::abs(r))) {
      throw InternalConsistencyError("r_n o phi differs from r~ at s = " + fmt(s));
    }
    knots.push_back({s, rep_n.u(p), r});
  }
  out.rep = ParametricRep(std::move(knots));
  return out;
}

namespace {

double eval_phi(const std::vector<std::pair<double, double>>& phi, double s) {
  auto it = std::upper_bound(phi.begin(), phi.end(), s,
                             [](double v, const std::pair<double, double>& k) { return v < k.first; });
  if (it == phi.begin()) return phi.front().second;
  if (it == phi.end()) return phi.back().second;
  const auto& [sa, pa] = *(it - 1);
  const auto& [sb, pb] = *it;
  return pa + (s - sa) / (sb - sa) * (pb - pa);
}

// sup |u(phi(s)) - u(s)|, exact on the breakpoints of both compositions.
double composed_u_dist(const ParametricRep& canonical, const std::vector<std::pair<double, double>>& phi) {
  std::vector<double> grid;
  for (const auto& k : phi) grid.push_back(k.first);
  for (const RepKnot& k : canonical.knots()) {
    grid.push_back(k.s);
    auto it = std::lower_bound(phi.begin(), phi.end(), k.s,
                               [](const std::pair<double, double>& p, double v) { return p.second < v; });
    if (it == phi.begin() || it == phi.end()) continue;
    const auto& [sa, pa] = *(it - 1);
    const auto& [sb, pb] = *it;
    if (pb > pa) grid.push_back(sa + (k.s - pa) / (pb - pa) * (sb - sa));
  }
  double out = 0.0;
  for (double s : grid) out = std::max(out, std::abs(canonical.u(eval_phi(phi, s)) - canonical.u(s)));
  return out;
}

}  // namespace

RegularizedRep regularize(const CadlagPath& x, const CadlagPath& xn, double eps, double mesh) {
  if (x.horizon() != xn.horizon()) throw DomainError("regularize: horizons differ");
  const double T = x.horizon();
  ParametricRep canonical = canonical_rep(x);
  PartitionSpec spec = build_partition(x, canonical, eps);
  const std::vector<Jump> jn = jumps(xn);
  if (!jn.empty() && jn.back().t == T) {
    throw UnsupportedInput("jump at horizon T = " + fmt(T) + " in x_n");
  }
  TransportedRep tr = transported_coupling_rep(x, xn, canonical, mesh);
  TimeComponent tc = build_time_component(spec, canonical, tr.rep_n);
  const ParametricRep rt{tc.knots};

  for (const Subinterval& sub : spec.subintervals) {
    if (sub.kind != SubintervalKind::small_jump) continue;
    const double ta = sub.jump == 0 ? 0.0 : spec.large_jumps[sub.jump - 1].t + 2.0 * spec.eps2;
    const double tb = sub.jump == spec.large_jumps.size() ? T : spec.large_jumps[sub.jump].t - 2.0 * spec.eps2;
    const double shift = rep_distance(rt, canonical, sub.s0, sub.s1).r;
    if (shift > spec.eps4 * (1.0 + 1e-9)) {
      throw NotConvergedEnough("||r~_n - r|| = " + fmt(shift) + " exceeds eps4 = " + fmt(spec.eps4) +
                               " on [" + fmt(ta) + ", " + fmt(tb) + "]");
    }
    const double jx = j_max_on(x, ta, tb);
    const double jxn = j_max_on(xn, ta, tb);
    if (jxn > jx + spec.eps1) {
      throw NotConvergedEnough("J(x_n) = " + fmt(jxn) + " exceeds J(x) + eps1 = " + fmt(jx + spec.eps1) +
                               " on [" + fmt(ta) + ", " + fmt(tb) + "]");
    }
    const double gap = uniform_dist_on(xn, x, ta, tb);
    if (gap > 3.0 * jx + spec.eps1) {
      throw NotConvergedEnough("||x_n - x|| = " + fmt(gap) + " exceeds 3 J(x) + eps1 = " +
                               fmt(3.0 * jx + spec.eps1) + " on [" + fmt(ta) + ", " + fmt(tb) + "]");
    }
  }

  PhiResult phi = build_phi(tr.rep_n, tc.knots);
  RegularizedRep out{std::move(phi.rep), std::move(phi.phi), std::move(spec), {}, std::move(canonical),
                     std::move(tr.rep_n)};
  BoundReport& b = out.bounds;
  b.sup_slope = deriv_profile(out.rep).sup_slope;
  RepDistance d = rep_distance(out.rep, out.canonical);
  b.u_dist = d.u;
  b.r_dist = d.r;
  b.sup_dist = d.combined();
  b.l1_dd = l1_deriv_dist(out.rep, out.canonical);
  for (const Subinterval& sub : out.partition.subintervals) {
    double part = l1_deriv_dist(out.rep, out.canonical, sub.s0, sub.s1);
    switch (sub.kind) {
      case SubintervalKind::large_jump: b.case1 += part; break;
      case SubintervalKind::connecting: b.case2 += part; break;
      case SubintervalKind::small_jump: b.case3 += part; break;
    }
  }
  b.coupling_cost = tr.coupling_cost;
  b.input_u_dist = rep_distance(out.rep_n, out.canonical).u;
  b.phi_u_dist = composed_u_dist(out.canonical, out.phi);
  b.transplants = tc.transplants;
  b.transplanted_length = tc.transplanted_length;
  return out;
}

}  // namespace m1path
