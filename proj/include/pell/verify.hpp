#pragma once

#include "pell/resolvent.hpp"

namespace pell {

/// Global solution of (lambda + A) u = f whose datum f vanishes, cell-exactly,
/// on the doubled patch Omega(x0, 2r) -- the hypothesis of the weak reverse
/// Hoelder estimates.
struct LocalSolution {
  DiscreteFunction u;
  DiscreteFunction f;  // the datum, kept for support verification
  Complex lambda{1.0, 0.0};
  Point x0 = Point::Zero();
  double r = 0.0;
  double support_radius = 0.0;  // f vanishes on Omega(x0, support_radius)
  bool degenerate = false;      // datum identically zero
};

namespace detail {

/// Zero a vertex function on every vertex of every cell of the given patches.
inline void zero_on_patches(const Grid& g, CVector& f,
                            const std::vector<std::pair<Point, double>>& balls) {
  for (const auto& [x0, rad] : balls)
    for (int v : g.patch_verts(x0, rad)) f(v) = Complex(0, 0);
}

/// Smoothly suppress f near each ball so the datum converges with the mesh;
/// the cell-exact zeroing afterwards then only trims an O(h) transition zone.
inline void smooth_exclusion(const Grid& g, CVector& f,
                             const std::vector<std::pair<Point, double>>& balls) {
  for (const auto& [x0, rad] : balls) {
    double w = 0.25 * rad;
    for (size_t v = 0; v < g.verts.size(); ++v) {
      double dist2 = 0.0;
      for (int a = 0; a < g.d; ++a)
        dist2 += (g.verts[v](a) - x0(a)) * (g.verts[v](a) - x0(a));
      double s = (std::sqrt(dist2) - rad) / w;
      if (s <= 0.0)
        f(v) = Complex(0, 0);
      else if (s < 1.0)
        f(v) *= s * s * (3.0 - 2.0 * s);
    }
  }
}

inline CVector smooth_bump_mix(const Grid& g, Rng& rng, int nbumps = 6) {
  CVector f = CVector::Zero(g.verts.size());
  std::uniform_real_distribution<double> uc(0.0, 1.0);
  std::uniform_real_distribution<double> lw(std::log(0.1), std::log(0.4));
  for (int b = 0; b < nbumps; ++b) {
    Point c = Point::Zero();
    for (int a = 0; a < g.d; ++a) c(a) = uc(rng);
    double w = std::exp(lw(rng));
    Complex amp = std::polar(1.0, 2.0 * pi * uc(rng));
    for (size_t v = 0; v < g.verts.size(); ++v) {
      double dist2 = 0.0;
      for (int a = 0; a < g.d; ++a)
        dist2 += (g.verts[v](a) - c(a)) * (g.verts[v](a) - c(a));
      f(v) += amp * std::exp(-dist2 / (w * w));
    }
  }
  return f;
}

}  // namespace detail

/// Batch construction: one shared datum vanishing on the union of the doubled
/// balls and one shared solve serve every requested patch.
inline std::vector<LocalSolution> make_local_solutions(
    const DiscreteOperator& op, Complex lambda,
    const std::vector<std::pair<Point, double>>& patches, std::uint64_t seed,
    double margin = 1.0) {
  const Grid& g = *op.grid;
  std::vector<std::pair<Point, double>> balls;
  for (const auto& [x0, r] : patches) {
    if (r < 2.0 * g.h)
      throw std::invalid_argument(
          "make_local_solution: radius below the admissible mesh radius");
    balls.emplace_back(x0, 2.0 * r * margin);
  }
  Rng rng(seed);
  CVector f = detail::smooth_bump_mix(g, rng);
  detail::smooth_exclusion(g, f, balls);
  detail::zero_on_patches(g, f, balls);
  for (size_t v = 0; v < g.verts.size(); ++v)
    if (g.constrained[v]) f(v) = Complex(0, 0);
  DiscreteFunction fd{f, &g};
  bool zero = f.lpNorm<Eigen::Infinity>() < 1e-300;
  DiscreteFunction u =
      zero ? fd : resolve(ResolventFactorization(op, lambda), fd);
  std::vector<LocalSolution> out;
  for (const auto& [x0, r] : patches)
    out.push_back({u, fd, lambda, x0, r, 2.0 * r * margin, zero});
  return out;
}

inline LocalSolution make_local_solution(const DiscreteOperator& op,
                                         Complex lambda, const Point& x0,
                                         double r, std::uint64_t seed,
                                         double margin = 1.0) {
  return make_local_solutions(op, lambda, {{x0, r}}, seed, margin).front();
}

// ---------------------------------------------------------------------------
// Weak reverse Hoelder
// ---------------------------------------------------------------------------

struct RHEntry {
  double p = 2.0;
  double q = 0.0;  // p d/(d-2), or a configured substitute when d = 2
  double c = 1.0;  // inner radius factor
  double lhs = 0.0, rhs = 0.0;
  double ratio = 0.0;       // r^{-d}-normalized means, the theorem's scaling
  double ratio_mean = 0.0;  // volume-normalized means (= 1 for constants)
  bool degenerate = false;
  bool q_substituted = false;
};

inline RHEntry rh_check(const LocalSolution& sol, double p, double c,
                        double q_override = 0.0) {
  if (p < 2.0) throw std::invalid_argument("rh_check: p must be >= 2");
  const Grid& g = *sol.u.grid;
  RHEntry e;
  e.p = p;
  e.c = c;
  if (g.d >= 3) {
    e.q = p * g.d / (g.d - 2);
  } else {
    if (!(q_override > p))
      throw std::invalid_argument("rh_check: d=2 requires q_override > p");
    e.q = q_override;
    e.q_substituted = true;
  }
  auto inner = g.patch_verts(sol.x0, c * sol.r);
  auto outer = g.patch_verts(sol.x0, 2.0 * sol.r);
  double mass_in = 0.0, mass_out = 0.0;
  for (int v : inner) mass_in += g.lumped[v];
  for (int v : outer) mass_out += g.lumped[v];
  double lq = lp_norm(sol.u, e.q, &inner);
  double l2 = lp_norm(sol.u, 2.0, &outer);
  double rd = std::pow(sol.r, double(g.d));
  e.lhs = lq / std::pow(rd, 1.0 / e.q);
  e.rhs = l2 / std::pow(rd, 0.5);
  if (sol.degenerate || l2 < 1e-300 || mass_in <= 0.0 || mass_out <= 0.0) {
    e.degenerate = true;
    return e;
  }
  e.ratio = e.lhs / e.rhs;
  e.ratio_mean =
      (lq / std::pow(mass_in, 1.0 / e.q)) / (l2 / std::pow(mass_out, 0.5));
  return e;
}

// ---------------------------------------------------------------------------
// Caccioppoli
// ---------------------------------------------------------------------------

struct CaccioppoliEntry {
  double lhs = 0.0, rhs = 0.0;
  double empirical = 0.0;       // lhs/rhs
  double paper_constant = 0.0;  // 2 d^2 C^2 C_d^2 c_upper^2 / c_lower
  bool degenerate = false;
};

/// lhs = |lambda| int_{r} |u|^2 + (c_lower/2) int_{r} |grad u|^2 against
/// rhs = r^{-2} int_{2r} |u|^2; the paper constant uses the Lax-Milgram
/// C_{theta0,theta} and the (undetermined) cutoff constant C_d as a parameter.
inline CaccioppoliEntry caccioppoli_check(const LocalSolution& sol,
                                          const DiscreteOperator& op,
                                          double theta, double C_d = 2.0) {
  const Grid& g = *sol.u.grid;
  CaccioppoliEntry e;
  double C = lax_milgram_constant(theta, op.theta0);
  e.paper_constant = 2.0 * g.d * g.d * C * C * C_d * C_d * op.c_upper *
                     op.c_upper / op.c_lower;
  auto inner_v = g.patch_verts(sol.x0, sol.r);
  auto inner_c = g.patch_cells(sol.x0, sol.r);
  auto outer_v = g.patch_verts(sol.x0, 2.0 * sol.r);
  double u2_in = std::pow(lp_norm(sol.u, 2.0, &inner_v), 2.0);
  CellField gu = gradient(sol.u);
  double gu2_in = std::pow(lp_norm(gu, 2.0, &inner_c), 2.0);
  double u2_out = std::pow(lp_norm(sol.u, 2.0, &outer_v), 2.0);
  e.lhs = std::abs(sol.lambda) * u2_in + 0.5 * op.c_lower * gu2_in;
  e.rhs = u2_out / (sol.r * sol.r);
  if (sol.degenerate || u2_out < 1e-300) {
    e.degenerate = true;
    return e;
  }
  e.empirical = e.lhs / e.rhs;
  return e;
}

// ---------------------------------------------------------------------------
// Gradient reverse Hoelder
// ---------------------------------------------------------------------------

struct GradRHEntry {
  double two_star = 0.0;  // 2d/(d+2)
  double rho = 0.0;       // enlarged radius 8 M^2 sqrt(d) r
  double lhs = 0.0, rhs = 0.0;
  double ratio = 0.0;
  bool truncated = false;  // enlarged ball clipped by the domain bounds
  bool degenerate = false;
};

inline GradRHEntry grad_rh_check(const LocalSolution& sol,
                                 const DomainSpec& spec) {
  const Grid& g = *sol.u.grid;
  GradRHEntry e;
  e.two_star = 2.0 * g.d / (g.d + 2.0);
  e.rho = 8.0 * spec.alpha() * sol.r;  // alpha = M^2 sqrt(d)
  for (int a = 0; a < g.d; ++a)
    if (sol.x0(a) - e.rho < 0.0 || sol.x0(a) + e.rho > 1.0) e.truncated = true;
  // composite integrand |lambda u| + |lambda|^{1/2} |grad u| per cell, with u
  // taken at the cell midpoint
  CellField gu = gradient(sol.u);
  double al = std::abs(sol.lambda), sq = std::sqrt(al);
  auto composite = [&](int c) {
    Complex umid(0, 0);
    for (int k = 0; k < g.verts_per_cell; ++k)
      umid += sol.u.values(g.cells[c][k]);
    umid /= double(g.verts_per_cell);
    return al * std::abs(umid) + sq * gu.values[c].norm();
  };
  double acc_in = 0.0, acc_out = 0.0;
  for (int c : g.patch_cells(sol.x0, sol.r))
    acc_in += g.cell_volume * std::pow(composite(c), 2.0);
  for (int c : g.patch_cells(sol.x0, e.rho))
    acc_out += g.cell_volume * std::pow(composite(c), e.two_star);
  e.lhs = std::sqrt(acc_in);
  e.rhs = std::pow(acc_out, 1.0 / e.two_star);
  if (sol.degenerate || e.rhs < 1e-300) {
    e.degenerate = true;
    return e;
  }
  e.ratio = e.lhs / e.rhs;
  return e;
}

// ---------------------------------------------------------------------------
// Moser iteration bookkeeping
// ---------------------------------------------------------------------------

struct MoserRung {
  double p = 0.0;    // exponent at this rung
  double rho = 0.0;  // radius at this rung
  double norm = 0.0; // (rho^{-d} int |u|^p)^{1/p} on Omega(x0, rho)
};

struct MoserReport {
  std::vector<MoserRung> rungs;
  std::vector<double> ratios;  // per-rung empirical constants
  double chained = 0.0;        // top norm / bottom norm
  double product = 1.0;        // product of rung ratios
  double inner_factor = 0.0;   // (2 alpha)^{-n0} / alpha, the default c
  int n0 = 0;
  bool capped = false;     // final rung uses p rather than the pure ladder
  bool truncated = false;  // mesh too coarse to realize every radius
  bool degenerate = false;
};

/// Exponent ladder of the Moser iteration: p_k = 2 (d/(d-2))^k for k < n0,
/// then p_{n0} = p and the top rung p_{n0+1} = (d/(d-2)) p, the reverse
/// Hoelder exponent p d/(d-2).
inline std::vector<double> moser_ladder(double p, int d) {
  if (d < 3) throw std::invalid_argument("moser_ladder: requires d >= 3");
  if (p < 2.0) throw std::invalid_argument("moser_ladder: p must be >= 2");
  const double step = double(d) / (d - 2);  // 2*/2
  std::vector<double> ladder;
  double pk = 2.0;
  while (pk < p) {
    ladder.push_back(pk);
    pk *= step;
  }
  ladder.push_back(p);         // p_{n0}
  ladder.push_back(step * p);  // p_{n0+1}
  return ladder;
}

inline MoserReport moser_chain(const LocalSolution& sol, double p,
                               const DomainSpec& spec) {
  const Grid& g = *sol.u.grid;
  MoserReport rep;
  auto ladder = moser_ladder(p, g.d);
  rep.n0 = static_cast<int>(ladder.size()) - 2;
  rep.capped = p != 2.0 * std::pow(double(g.d) / (g.d - 2), rep.n0);
  double alpha = spec.alpha();
  rep.inner_factor = std::pow(2.0 * alpha, -double(rep.n0)) / alpha;
  const double rd = std::pow(sol.r, double(g.d));  // fixed r^{-d} normalization
  for (size_t k = 0; k < ladder.size(); ++k) {
    // rho_0 = 2r, then r/alpha shrinking by factors of (2 alpha)
    double rho = (k == 0) ? 2.0 * sol.r
                          : sol.r / alpha * std::pow(2.0 * alpha, -double(k - 1));
    if (rho < g.h) rep.truncated = true;
    auto verts = g.patch_verts(sol.x0, rho);
    double norm = lp_norm(sol.u, ladder[k], &verts) / std::pow(rd, 1.0 / ladder[k]);
    rep.rungs.push_back({ladder[k], rho, norm});
  }
  if (sol.degenerate || rep.rungs.front().norm < 1e-300) {
    rep.degenerate = true;
    return rep;
  }
  for (size_t k = 1; k < rep.rungs.size(); ++k) {
    double ratio = rep.rungs[k].norm / rep.rungs[k - 1].norm;
    rep.ratios.push_back(ratio);
    rep.product *= ratio;
  }
  rep.chained = rep.rungs.back().norm / rep.rungs.front().norm;
  return rep;
}

// ---------------------------------------------------------------------------
// Shen extrapolation hypothesis
// ---------------------------------------------------------------------------

struct ShenTrial {
  Point x0 = Point::Zero();
  double r = 0.0;
  double ratio_resolvent = 0.0;  // empirical C for T = lambda (lambda+A)^{-1}
  double ratio_div = 0.0;        // empirical C for T = |l|^{1/2}(l+A)^{-1} div
  bool degenerate = false;
};

struct ShenReport {
  double p = 0.0;
  double alpha1 = 0.0, alpha2 = 0.0;
  Complex lambda{1.0, 0.0};
  std::vector<ShenTrial> trials;
  double max_resolvent = 0.0, max_div = 0.0;
};

/// Weak reverse Hoelder hypothesis of the extrapolation theorem: for data
/// vanishing on Omega(x0, alpha2 r), compare the L^p mean of Tf on
/// Omega(x0, r) against the L^2 mean on Omega(x0, alpha1 r); alpha1 = 2/c,
/// alpha2 = 3/c.
inline ShenReport shen_hypothesis_check(const DiscreteOperator& op, double p,
                                        Complex lambda, int trials,
                                        std::uint64_t seed, double c = 1.0) {
  if (p <= 2.0) throw std::invalid_argument("shen_hypothesis_check: p must be > 2");
  const Grid& g = *op.grid;
  ShenReport rep;
  rep.p = p;
  rep.alpha1 = 2.0 / c;
  rep.alpha2 = 3.0 / c;
  rep.lambda = lambda;
  Rng rng(seed);
  std::uniform_real_distribution<double> uc(0.0, 1.0);
  ResolventFactorization fac(op, lambda);
  double sq = std::sqrt(std::abs(lambda));
  for (int trial = 0; trial < trials; ++trial) {
    ShenTrial t;
    for (int a = 0; a < g.d; ++a) t.x0(a) = uc(rng);
    std::uniform_real_distribution<double> ur(2.0 * g.h, 0.25 / rep.alpha2);
    t.r = ur(rng);

    CVector f = detail::smooth_bump_mix(g, rng);
    detail::smooth_exclusion(g, f, {{t.x0, rep.alpha2 * t.r}});
    detail::zero_on_patches(g, f, {{t.x0, rep.alpha2 * t.r}});
    for (size_t v = 0; v < g.verts.size(); ++v)
      if (g.constrained[v]) f(v) = Complex(0, 0);
    DiscreteFunction fd{f, &g};
    DiscreteFunction u1 = resolve(fac, fd);
    u1.values *= lambda;

    CellField gf;
    gf.grid = &g;
    gf.values.assign(g.cells.size(), CVector::Zero(g.d));
    {
      CVector flat = detail::cell_probe(g, 3 * trial, rng);
      gf = detail::cellfield_from_flat(g, flat);
      for (int cidx : g.patch_cells(t.x0, rep.alpha2 * t.r))
        gf.values[cidx].setZero();
    }
    DiscreteFunction u2 = resolve_div(fac, gf);
    u2.values *= sq;

    auto mean_ratio = [&](const DiscreteFunction& w) {
      auto inner = g.patch_verts(t.x0, t.r);
      auto outer = g.patch_verts(t.x0, rep.alpha1 * t.r);
      double mass_in = 0.0, mass_out = 0.0;
      for (int v : inner) mass_in += g.lumped[v];
      for (int v : outer) mass_out += g.lumped[v];
      double num = lp_norm(w, p, &inner);
      double den = lp_norm(w, 2.0, &outer);
      if (den < 1e-300 || mass_in <= 0.0) return -1.0;
      return (num / std::pow(mass_in, 1.0 / p)) /
             (den / std::sqrt(mass_out));
    };
    double r1 = mean_ratio(u1), r2 = mean_ratio(u2);
    if (r1 < 0.0 || r2 < 0.0) {
      t.degenerate = true;
    } else {
      t.ratio_resolvent = r1;
      t.ratio_div = r2;
      rep.max_resolvent = std::max(rep.max_resolvent, r1);
      rep.max_div = std::max(rep.max_div, r2);
    }
    rep.trials.push_back(t);
  }
  return rep;
}

}  // namespace pell
