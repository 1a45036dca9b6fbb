#pragma once

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseLU>
#include <functional>
#include <memory>
#include <optional>

#include "pell/disc.hpp"
#include "pell/pcalc.hpp"

namespace pell {

struct SolverError : std::runtime_error {
  double residual;
  explicit SolverError(double res)
      : std::runtime_error("linear solver failed, relative residual " +
                           std::to_string(res)),
        residual(res) {}
};

/// Factorization of (lambda M + K) on the free dofs, shared across solves.
/// Direct sparse LU below a size threshold, ILUT-preconditioned BiCGSTAB
/// above it. Every solve is verified to relative residual 1e-10.
class ResolventFactorization {
 public:
  ResolventFactorization(const DiscreteOperator& op, Complex lambda,
                         int direct_limit = 20000)
      : op_(&op), lambda_(lambda) {
    A_ = op.K;
    for (int i = 0; i < A_.rows(); ++i) A_.coeffRef(i, i) += lambda * op.Mdiag(i);
    A_.makeCompressed();
    if (A_.rows() <= direct_limit) {
      lu_ = std::make_unique<Eigen::SparseLU<SparseC>>();
      lu_->compute(A_);
      if (lu_->info() != Eigen::Success) {
        lu_.reset();  // fall back to the iterative path
      }
    }
    if (!lu_) {
      bicg_ = std::make_unique<
          Eigen::BiCGSTAB<SparseC, Eigen::IncompleteLUT<Complex>>>();
      bicg_->preconditioner().setDroptol(1e-4);
      bicg_->preconditioner().setFillfactor(10);
      bicg_->setTolerance(1e-13);
      bicg_->setMaxIterations(4000);
      bicg_->compute(A_);
    }
  }

  CVector solve(const CVector& b) const {
    CVector x = lu_ ? CVector(lu_->solve(b)) : CVector(bicg_->solve(b));
    double bn = b.norm();
    if (bn == 0.0) return CVector::Zero(b.size());
    double res = (A_ * x - b).norm() / bn;
    if (!(res <= 1e-10)) throw SolverError(res);
    return x;
  }

  Complex lambda() const { return lambda_; }
  const DiscreteOperator& op() const { return *op_; }

 private:
  const DiscreteOperator* op_;
  Complex lambda_;
  SparseC A_;
  std::unique_ptr<Eigen::SparseLU<SparseC>> lu_;
  std::unique_ptr<Eigen::BiCGSTAB<SparseC, Eigen::IncompleteLUT<Complex>>> bicg_;
};

/// Solve (lambda M + K) u = M f.
inline DiscreteFunction resolve(const ResolventFactorization& fac,
                                const DiscreteFunction& f) {
  const Grid& g = *fac.op().grid;
  CVector rhs = to_free(g, f).cwiseProduct(fac.op().Mdiag.cast<Complex>());
  return from_free(g, fac.solve(rhs));
}

inline DiscreteFunction resolve(const DiscreteOperator& op, Complex lambda,
                                const DiscreteFunction& f) {
  return resolve(ResolventFactorization(op, lambda), f);
}

/// Solution operator of lambda (u,v) + t[u,v] = -(g, grad v): the discrete
/// (lambda + A)^{-1} div with the right-hand side assembled by cell-midpoint
/// quadrature.
inline DiscreteFunction resolve_div(const ResolventFactorization& fac,
                                    const CellField& gfield) {
  const Grid& g = *fac.op().grid;
  detail::Q1Reference ref(g.d, g.h);
  RMatrix gm = ref.midpoint_gradients();
  CVector rhs = CVector::Zero(g.n_free());
  for (size_t c = 0; c < g.cells.size(); ++c) {
    const CVector& gv = gfield.values[c];
    for (int i = 0; i < ref.nb; ++i) {
      int fi = g.free_index[g.cells[c][i]];
      if (fi < 0) continue;
      Complex dot(0, 0);
      for (int a = 0; a < g.d; ++a) dot += gv(a) * gm(i, a);
      rhs(fi) -= g.cell_volume * dot;
    }
  }
  return from_free(g, fac.solve(rhs));
}

inline DiscreteFunction resolve_div(const DiscreteOperator& op, Complex lambda,
                                    const CellField& gfield) {
  return resolve_div(ResolventFactorization(op, lambda), gfield);
}

struct ConvergenceReport {
  std::vector<int> ns;
  std::vector<double> errors;  // L2 error against the manufactured solution
  std::vector<double> orders;  // log2(error ratio) between consecutive levels
};

/// Solver correctness oracle: -Delta u = 2 pi^2 prod sin(pi x_a) on the unit
/// square/cube with full Dirichlet data, exact solution u* = prod sin(pi x_a),
/// expected Q1 convergence order 2.
inline ConvergenceReport manufactured_check(const std::vector<int>& ns, int d = 2) {
  DomainSpec spec = DomainSpec::box(d);
  for (int f = 0; f < spec.n_faces(); ++f) spec.dirichlet_faces.insert(f);
  auto field = make_constant(CMatrix::Identity(d, d));
  ConvergenceReport rep;
  rep.ns = ns;
  double coef = d * pi * pi;
  for (int n : ns) {
    Grid g = build_grid(spec, n);
    auto op = assemble(field, g);
    DiscreteFunction f = interpolate(g, [&](const Point& x) {
      double v = coef;
      for (int a = 0; a < d; ++a) v *= std::sin(pi * x(a));
      return Complex(v, 0.0);
    });
    ResolventFactorization fac(op, Complex(0.0, 0.0));
    DiscreteFunction u = resolve(fac, f);
    DiscreteFunction err = u;
    for (size_t v = 0; v < g.verts.size(); ++v) {
      double exact = 1.0;
      for (int a = 0; a < d; ++a) exact *= std::sin(pi * g.verts[v](a));
      err.values(v) -= exact;
    }
    rep.errors.push_back(lp_norm(err, 2.0));
  }
  for (size_t k = 1; k < rep.errors.size(); ++k)
    rep.orders.push_back(std::log2(rep.errors[k - 1] / rep.errors[k]));
  return rep;
}

// ---------------------------------------------------------------------------
// L^p -> L^p operator norm estimation (certified lower bounds)
// ---------------------------------------------------------------------------

struct OpNormProblem {
  std::function<CVector(const CVector&)> apply;
  std::function<double(const CVector&)> norm_in;
  std::function<double(const CVector&)> norm_out;
  /// probe(index, rng): deterministic sequence of probe vectors
  std::function<CVector(int, Rng&)> probe;
  /// optional map from an output vector to a refined input probe
  /// (p <-> p' duality); empty when in/out spaces differ
  std::function<CVector(const CVector&)> duality;
};

struct OpNormEstimate {
  double value = 0.0;
  int probes_used = 0;
};

/// Running max of ||T f||_out / ||f||_in over the probe sequence; every
/// improvement triggers one duality-refined probe when available. Always a
/// lower bound on the true norm.
inline OpNormEstimate opnorm_estimate(const OpNormProblem& prob, int probes,
                                      std::uint64_t seed) {
  if (probes < 1) throw std::invalid_argument("opnorm_estimate: probes < 1");
  Rng rng(seed);
  OpNormEstimate est;
  auto consider = [&](const CVector& f) -> std::optional<CVector> {
    double nf = prob.norm_in(f);
    if (!(nf > 0.0)) return std::nullopt;
    CVector out = prob.apply(f);
    double r = prob.norm_out(out) / nf;
    ++est.probes_used;
    if (r > est.value) {
      est.value = r;
      return out;
    }
    return std::nullopt;
  };
  for (int k = 0; k < probes; ++k) {
    auto improved = consider(prob.probe(k, rng));
    if (improved && prob.duality && est.probes_used < probes + probes / 2) {
      consider(prob.duality(*improved));
    }
  }
  return est;
}

/// p <-> p' duality map f -> |f|^{p-2} conj(f), the probe refinement step.
inline CVector duality_map(const CVector& f, double p) {
  CVector out(f.size());
  for (Eigen::Index i = 0; i < f.size(); ++i) {
    double a = std::abs(f(i));
    out(i) = (a < 1e-300) ? Complex(0, 0)
                          : Complex(std::pow(a, p - 2.0) * std::conj(f(i)));
  }
  return out;
}

namespace detail {

/// Probe mix on vertex functions: smooth bumps at random centers/widths,
/// Gaussian noise, and cycling vertex deltas.
inline CVector vertex_probe(const Grid& g, int k, Rng& rng, bool with_noise = true) {
  const int nv = static_cast<int>(g.verts.size());
  int kind = k % 3;
  if (!with_noise && kind == 1) kind = 0;
  if (kind == 2) {
    CVector f = CVector::Zero(nv);
    std::uniform_int_distribution<int> pick(0, nv - 1);
    f(pick(rng)) = 1.0;
    return f;
  }
  if (kind == 1) return gaussian_cvector(rng, nv);
  std::uniform_real_distribution<double> uc(0.0, 1.0);
  std::uniform_real_distribution<double> lw(std::log(2.0 * g.h), std::log(0.35));
  Point c = Point::Zero();
  for (int a = 0; a < g.d; ++a) c(a) = uc(rng);
  double w = std::exp(lw(rng));
  CVector f(nv);
  for (int v = 0; v < nv; ++v) {
    double dist2 = 0.0;
    for (int a = 0; a < g.d; ++a)
      dist2 += (g.verts[v](a) - c(a)) * (g.verts[v](a) - c(a));
    f(v) = std::exp(-dist2 / (w * w));
  }
  return f;
}

/// Probe mix on cell vector fields: oriented bumps, Gaussian noise, and
/// longitudinal plane waves (the extremizers of grad-resolvent-div for
/// constant coefficients).
inline CVector cell_probe(const Grid& g, int k, Rng& rng,
                          const std::vector<Point>& focus = {}) {
  const int nc = static_cast<int>(g.cells.size());
  if (k % 3 == 1) return gaussian_cvector(rng, nc * g.d);
  if (k % 3 == 2) {
    // geometric frequency sweep over [0.5, 8], random direction; the range is
    // resolution-independent so estimates are comparable across refinements
    int j = (k / 3) % 16;
    double m = 0.5 * std::pow(16.0, j / 15.0);
    RVector u = gaussian_vector(rng, g.d).normalized();
    CVector f = CVector::Zero(nc * g.d);
    for (int cc = 0; cc < nc; ++cc) {
      Complex phase = std::exp(Complex(0.0, 2.0 * pi * m * u.dot(
          g.cell_center(cc).head(g.d))));
      for (int a = 0; a < g.d; ++a) f(cc * g.d + a) = phase * u(a);
    }
    return f;
  }
  std::uniform_real_distribution<double> uc(0.0, 1.0);
  std::uniform_real_distribution<double> lw(std::log(2.0 * g.h), std::log(0.35));
  Point c = Point::Zero();
  if (!focus.empty() && k % 6 == 0) {
    std::uniform_int_distribution<int> pick(0, static_cast<int>(focus.size()) - 1);
    c = focus[pick(rng)];
    // widths shrinking with h probe the singular scale
    std::uniform_real_distribution<double> lw2(std::log(2.0 * g.h),
                                               std::log(16.0 * g.h));
    double w = std::exp(lw2(rng));
    RVector dir = gaussian_vector(rng, g.d).normalized();
    CVector f = CVector::Zero(nc * g.d);
    for (int cc = 0; cc < nc; ++cc) {
      Point mid = g.cell_center(cc);
      double dist2 = 0.0;
      for (int a = 0; a < g.d; ++a) dist2 += (mid(a) - c(a)) * (mid(a) - c(a));
      double amp = std::exp(-dist2 / (w * w));
      for (int a = 0; a < g.d; ++a) f(cc * g.d + a) = amp * dir(a);
    }
    return f;
  }
  for (int a = 0; a < g.d; ++a) c(a) = uc(rng);
  double w = std::exp(lw(rng));
  RVector dir = gaussian_vector(rng, g.d).normalized();
  CVector f = CVector::Zero(nc * g.d);
  for (int cc = 0; cc < nc; ++cc) {
    Point mid = g.cell_center(cc);
    double dist2 = 0.0;
    for (int a = 0; a < g.d; ++a) dist2 += (mid(a) - c(a)) * (mid(a) - c(a));
    double amp = std::exp(-dist2 / (w * w));
    for (int a = 0; a < g.d; ++a) f(cc * g.d + a) = amp * dir(a);
  }
  return f;
}

inline CellField cellfield_from_flat(const Grid& g, const CVector& flat) {
  CellField cf;
  cf.grid = &g;
  cf.values.resize(g.cells.size());
  for (size_t c = 0; c < g.cells.size(); ++c) {
    CVector v(g.d);
    for (int a = 0; a < g.d; ++a) v(a) = flat(c * g.d + a);
    cf.values[c] = v;
  }
  return cf;
}

inline CVector cellfield_to_flat(const Grid& g, const CellField& cf) {
  CVector flat(g.cells.size() * g.d);
  for (size_t c = 0; c < g.cells.size(); ++c)
    for (int a = 0; a < g.d; ++a) flat(c * g.d + a) = cf.values[c](a);
  return flat;
}

inline double cell_lp_norm_flat(const Grid& g, const CVector& flat, double p) {
  double acc = 0.0;
  for (size_t c = 0; c < g.cells.size(); ++c) {
    double m2 = 0.0;
    for (int a = 0; a < g.d; ++a) m2 += std::norm(flat(c * g.d + a));
    acc += g.cell_volume * std::pow(std::sqrt(m2), p);
  }
  return std::pow(acc, 1.0 / p);
}

}  // namespace detail

/// Lower-bound estimate of ||T||_{p->p} for a vertex-function operator.
inline OpNormEstimate opnorm_lp(
    const Grid& g, const std::function<CVector(const CVector&)>& apply, double p,
    int probes, std::uint64_t seed, bool noise_probes = true) {
  OpNormProblem prob;
  prob.apply = apply;
  DiscreteFunction tmp;
  prob.norm_in = prob.norm_out = [&g, p](const CVector& v) {
    DiscreteFunction u;
    u.grid = &g;
    u.values = v;
    return lp_norm(u, p);
  };
  prob.probe = [&g, noise_probes](int k, Rng& rng) {
    return detail::vertex_probe(g, k, rng, noise_probes);
  };
  prob.duality = [p](const CVector& out) { return duality_map(out, p); };
  return opnorm_estimate(prob, probes, seed);
}

// ---------------------------------------------------------------------------
// Sector scans
// ---------------------------------------------------------------------------

struct SectorSample {
  Complex lambda;
  double est_resolvent = 0.0;  // ||lambda (lambda+A)^{-1}||_{p->p}
  double est_gradient = 0.0;   // |lambda|^{1/2} ||grad (lambda+A)^{-1}||_{p->p}
  double est_div = 0.0;        // ||grad (lambda+A)^{-1} div||_{p->p}
  int probes = 0;
  bool solver_ok = true;
};

struct SectorScanResult {
  double theta = 0.0;
  double p = 2.0;
  int n = 0;
  std::vector<SectorSample> samples;
  double sup_resolvent = 0.0, sup_gradient = 0.0, sup_div = 0.0;
};

/// Deterministic lambda samples: log-uniform modulus over [mod_min, mod_max],
/// uniform argument over (-theta + margin, theta - margin).
inline std::vector<Complex> sample_sector(double theta, int n_lambda, Rng& rng,
                                          double mod_min = 1e-2,
                                          double mod_max = 1e4,
                                          double margin = 0.01) {
  if (n_lambda < 1) throw std::invalid_argument("sample_sector: n_lambda < 1");
  std::uniform_real_distribution<double> um(std::log(mod_min), std::log(mod_max));
  std::uniform_real_distribution<double> ua(-theta + margin, theta - margin);
  std::vector<Complex> out;
  out.reserve(n_lambda);
  for (int k = 0; k < n_lambda; ++k)
    out.push_back(std::polar(std::exp(um(rng)), ua(rng)));
  return out;
}

inline SectorScanResult sector_scan(const DiscreteOperator& op, double p,
                                    double theta, int n_lambda, int probes,
                                    std::uint64_t seed, double mod_min = 1e-2,
                                    double mod_max = 1e4) {
  if (!(theta > pi / 2.0 && theta < pi))
    throw std::invalid_argument("sector_scan: theta must lie in (pi/2, pi)");
  const Grid& g = *op.grid;
  SectorScanResult res;
  res.theta = theta;
  res.p = p;
  res.n = g.n;
  Rng rng(seed);
  auto lambdas = sample_sector(theta, n_lambda, rng, mod_min, mod_max);
  int idx = 0;
  for (Complex lam : lambdas) {
    SectorSample s;
    s.lambda = lam;
    std::uint64_t sub_seed = seed * 1315423911u + static_cast<std::uint64_t>(idx);
    try {
      ResolventFactorization fac(op, lam);
      auto apply_res = [&](const CVector& v) {
        DiscreteFunction f{v, &g};
        return CVector(lam * resolve(fac, f).values);
      };
      auto e1 = opnorm_lp(g, apply_res, p, probes, sub_seed);
      s.est_resolvent = e1.value;
      s.probes = e1.probes_used;

      double sq = std::sqrt(std::abs(lam));
      OpNormProblem grad_prob;
      grad_prob.apply = [&](const CVector& v) {
        DiscreteFunction f{v, &g};
        auto u = resolve(fac, f);
        return CVector(sq * detail::cellfield_to_flat(g, gradient(u)));
      };
      grad_prob.norm_in = [&g, p](const CVector& v) {
        DiscreteFunction u{v, &g};
        return lp_norm(u, p);
      };
      grad_prob.norm_out = [&g, p](const CVector& v) {
        return detail::cell_lp_norm_flat(g, v, p);
      };
      grad_prob.probe = [&g](int k, Rng& r) { return detail::vertex_probe(g, k, r); };
      s.est_gradient = opnorm_estimate(grad_prob, probes, sub_seed + 1).value;

      OpNormProblem div_prob;
      div_prob.apply = [&](const CVector& v) {
        auto cf = detail::cellfield_from_flat(g, v);
        auto u = resolve_div(fac, cf);
        return detail::cellfield_to_flat(g, gradient(u));
      };
      div_prob.norm_in = div_prob.norm_out = [&g, p](const CVector& v) {
        return detail::cell_lp_norm_flat(g, v, p);
      };
      div_prob.probe = [&g](int k, Rng& r) { return detail::cell_probe(g, k, r); };
      div_prob.duality = [p](const CVector& out) { return duality_map(out, p); };
      s.est_div = opnorm_estimate(div_prob, probes, sub_seed + 2).value;
    } catch (const SolverError&) {
      s.solver_ok = false;
    }
    res.samples.push_back(s);
    ++idx;
  }
  for (const auto& s : res.samples) {
    if (!s.solver_ok) continue;
    res.sup_resolvent = std::max(res.sup_resolvent, s.est_resolvent);
    res.sup_gradient = std::max(res.sup_gradient, s.est_gradient);
    res.sup_div = std::max(res.sup_div, s.est_div);
  }
  return res;
}

// ---------------------------------------------------------------------------
// Meyers sweeps
// ---------------------------------------------------------------------------

struct MeyersEntry {
  double p = 2.0;
  std::vector<std::pair<int, double>> estimates;  // (n, norm estimate)
  bool bounded = true;
};

struct MeyersReport {
  double contrast = 1.0;
  std::vector<MeyersEntry> entries;
  double eps = 0.0;          // sup of bounded p minus 2
  bool eps_is_max = false;   // every tested p was bounded
};

/// ||grad (lambda+A)^{-1} div||_{p->p} estimate with singular-corner focused
/// probes; p is classified bounded if the estimate grows less than 10% per
/// refinement doubling.
inline MeyersReport meyers_sweep(const CoefficientField& field,
                                 const DomainSpec& spec,
                                 const std::vector<double>& p_grid,
                                 const std::vector<int>& refinements,
                                 Complex lambda, int probes, std::uint64_t seed,
                                 double contrast = 1.0,
                                 double growth_tol = 0.10) {
  MeyersReport rep;
  rep.contrast = contrast;
  std::vector<Point> focus = {Point(0.5, 0.5, 0.5)};  // coefficient cross point
  for (double p : p_grid) {
    MeyersEntry entry;
    entry.p = p;
    for (int n : refinements) {
      Grid g = build_grid(spec, n);
      auto op = assemble(field, g);
      ResolventFactorization fac(op, lambda);
      OpNormProblem prob;
      prob.apply = [&](const CVector& v) {
        auto cf = detail::cellfield_from_flat(g, v);
        auto u = resolve_div(fac, cf);
        return detail::cellfield_to_flat(g, gradient(u));
      };
      prob.norm_in = prob.norm_out = [&g, p](const CVector& v) {
        return detail::cell_lp_norm_flat(g, v, p);
      };
      prob.probe = [&g, &focus](int k, Rng& r) {
        return detail::cell_probe(g, k, r, focus);
      };
      prob.duality = [p](const CVector& out) { return duality_map(out, p); };
      double est = opnorm_estimate(prob, probes, seed).value;
      entry.estimates.emplace_back(n, est);
    }
    // judge growth starting from the second refinement pair when three or
    // more grids are available: the coarsest estimate is still warming up and
    // its jump to the next level reflects estimator convergence, not the norm
    size_t first = entry.estimates.size() >= 3 ? 2 : 1;
    for (size_t k = first; k < entry.estimates.size(); ++k) {
      double growth =
          entry.estimates[k].second / entry.estimates[k - 1].second - 1.0;
      if (growth >= growth_tol) entry.bounded = false;
    }
    rep.entries.push_back(entry);
  }
  // eps spans the largest interval [2, 2+eps] of uninterrupted boundedness
  // (Meyers' theorem yields an interval, so a bounded p beyond an unbounded
  // one is estimator noise, not signal)
  double best = 0.0;
  bool all = true;
  for (const auto& e : rep.entries) {
    if (!e.bounded) {
      all = false;
      break;
    }
    best = std::max(best, e.p - 2.0);
  }
  rep.eps = best;
  rep.eps_is_max = all;
  return rep;
}

// ---------------------------------------------------------------------------
// Semigroup and kernel bounds
// ---------------------------------------------------------------------------

/// Crank-Nicolson: u <- (M + (t/2m) K)^{-1} (M - (t/2m) K) u, m times.
inline DiscreteFunction semigroup_apply(const DiscreteOperator& op, double t,
                                        const DiscreteFunction& f, int m) {
  if (!(t > 0.0) || m < 1)
    throw std::invalid_argument("semigroup_apply: need t > 0, m >= 1");
  const Grid& g = *op.grid;
  double tau = t / m;
  // (M + tau/2 K) u_{k+1} = (M - tau/2 K) u_k; rescale by 2/tau to reuse the
  // resolvent factorization at lambda = 2/tau
  ResolventFactorization fac(op, Complex(2.0 / tau, 0.0));
  CVector u = to_free(g, f);
  for (int k = 0; k < m; ++k) {
    CVector rhs = (2.0 / tau) * op.Mdiag.cast<Complex>().cwiseProduct(u) -
                  op.K * u;
    u = fac.solve(rhs);
  }
  return from_free(g, u);
}

struct KernelColumn {
  double t = 0.0;
  int source_vertex = -1;
  DiscreteFunction column;
};

/// Columns K_t(., y): the semigroup applied to the lumped-mass-normalized
/// discrete delta at y.
inline std::vector<KernelColumn> kernel_columns(const DiscreteOperator& op,
                                                const std::vector<double>& ts,
                                                const std::vector<int>& sources,
                                                int m_substeps) {
  const Grid& g = *op.grid;
  std::vector<KernelColumn> out;
  for (double t : ts)
    for (int y : sources) {
      if (y < 0 || y >= static_cast<int>(g.verts.size()) || g.constrained[y])
        throw std::invalid_argument("kernel_columns: source must be a free vertex");
      DiscreteFunction f;
      f.grid = &g;
      f.values = CVector::Zero(g.verts.size());
      f.values(y) = 1.0 / g.lumped[y];
      out.push_back({t, y, semigroup_apply(op, t, f, m_substeps)});
    }
  return out;
}

struct KernelFit {
  double b = 0.0, c = 0.0, omega = 0.0;
  double max_residual = 0.0;
  int samples = 0;
  bool accepted = false;
  bool envelope = true;
};

/// Least-squares fit of log|K_t(x,y)| = log c - (d/2) log t - b |x-y|^2/t
/// + omega t, the exponent of t pinned to -d/2; c then inflated minimally so
/// the bound is an upper envelope of every sample.
inline KernelFit gaussian_fit(const std::vector<KernelColumn>& columns, int d,
                              double floor = 1e-14) {
  if (columns.size() < 2)
    throw std::invalid_argument("gaussian_fit: need at least 2 columns");
  struct Sample {
    double s, t, logk;
  };
  std::vector<Sample> samples;
  const Grid& g = *columns.front().column.grid;
  for (const auto& col : columns) {
    const Point& y = g.verts[col.source_vertex];
    for (size_t v = 0; v < g.verts.size(); ++v) {
      double k = std::abs(col.column.values(v));
      if (k < floor) continue;
      double dist2 = 0.0;
      for (int a = 0; a < d; ++a)
        dist2 += (g.verts[v](a) - y(a)) * (g.verts[v](a) - y(a));
      samples.push_back({dist2 / col.t, col.t,
                         std::log(k) + 0.5 * d * std::log(col.t)});
    }
  }
  KernelFit fit;
  fit.samples = static_cast<int>(samples.size());
  if (samples.size() < 4) return fit;  // degenerate, all values below floor
  RMatrix A(samples.size(), 3);
  RVector rhs(samples.size());
  for (size_t i = 0; i < samples.size(); ++i) {
    A(i, 0) = 1.0;
    A(i, 1) = -samples[i].s;
    A(i, 2) = samples[i].t;
    rhs(i) = samples[i].logk;
  }
  RVector coef = A.colPivHouseholderQr().solve(rhs);
  double logc = coef(0);
  fit.b = coef(1);
  fit.omega = coef(2);
  // inflate c to an upper envelope
  double worst = 0.0;
  for (size_t i = 0; i < samples.size(); ++i) {
    double pred = logc - fit.b * samples[i].s + fit.omega * samples[i].t;
    worst = std::max(worst, samples[i].logk - pred);
  }
  logc += worst;
  fit.c = std::exp(logc);
  for (size_t i = 0; i < samples.size(); ++i) {
    double pred = logc - fit.b * samples[i].s + fit.omega * samples[i].t;
    fit.max_residual = std::max(fit.max_residual, samples[i].logk - pred);
    if (samples[i].logk > pred + 1e-9) fit.envelope = false;
  }
  fit.accepted = fit.b > 0.0 && fit.envelope;
  return fit;
}

/// Lax-Milgram resolvent constant 1/cos((theta + theta0)/2) for
/// lambda in S_theta against a form with numerical range in S_theta0.
inline double lax_milgram_constant(double theta, double theta0) {
  if (theta + theta0 >= pi)
    throw std::invalid_argument("lax_milgram_constant: theta + theta0 must be < pi");
  return 1.0 / std::cos(0.5 * (theta + theta0));
}

}  // namespace pell
