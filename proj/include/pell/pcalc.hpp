#pragma once

#include <limits>
#include <optional>

#include "pell/coeff.hpp"
#include "pell/common.hpp"

namespace pell {

/// J_p(xi) = 2 (Re(xi)/p' + i Im(xi)/p).
inline CVector jp_map(const CVector& xi, double p) {
  if (p <= 1.0 || !std::isfinite(p))
    throw std::invalid_argument("jp_map: p must lie in (1, inf)");
  const double pp = conjugate_exponent(p);
  CVector out(xi.size());
  for (Eigen::Index j = 0; j < xi.size(); ++j)
    out(j) = Complex(2.0 * xi(j).real() / pp, 2.0 * xi(j).imag() / p);
  return out;
}

/// The real quadratic form (alpha, beta) -> Re <mu (alpha + i beta),
/// J_p(alpha + i beta)> as a symmetric 2d x 2d matrix in the block variables
/// z = (alpha, beta).
struct LocalForm {
  double p = 2.0;
  RMatrix S;  // symmetric 2d x 2d

  double evaluate(const RVector& alpha, const RVector& beta) const {
    RVector z(alpha.size() + beta.size());
    z << alpha, beta;
    return z.dot(S * z);
  }
  double min_eigenvalue() const {
    Eigen::SelfAdjointEigenSolver<RMatrix> es(S);
    return es.eigenvalues()(0);
  }
};

inline LocalForm local_form(const CMatrix& mu_x, double p) {
  if (p <= 1.0 || !std::isfinite(p))
    throw std::invalid_argument("local_form: p must lie in (1, inf)");
  const int d = static_cast<int>(mu_x.rows());
  const double pp = conjugate_exponent(p);
  RMatrix re = mu_x.real();
  RMatrix im = mu_x.imag();
  RMatrix sym_re = 0.5 * (re + re.transpose());
  // Q(a,b) = (2/p') a^T Re(mu) a + (2/p) b^T Re(mu) b
  //        + (2/p) <Im(mu) a, b> - (2/p') <a, Im(mu) b>
  // so the off-diagonal block is B with Q-cross term 2 a^T B b.
  RMatrix off = 0.5 * ((2.0 / p) * im.transpose() - (2.0 / pp) * im);
  LocalForm lf;
  lf.p = p;
  lf.S.resize(2 * d, 2 * d);
  lf.S.topLeftCorner(d, d) = (2.0 / pp) * sym_re;
  lf.S.bottomRightCorner(d, d) = (2.0 / p) * sym_re;
  lf.S.topRightCorner(d, d) = off;
  lf.S.bottomLeftCorner(d, d) = off.transpose();
  lf.S = 0.5 * (lf.S + lf.S.transpose()).eval();
  return lf;
}

/// Pointwise p-ellipticity constant: min over the complex unit sphere of
/// Re <mu xi, J_p xi>, via the exact eigensolve of the local form.
inline double delta_p_point(const CMatrix& mu_x, double p) {
  return local_form(mu_x, p).min_eigenvalue();
}

/// Delta_p(mu): infimum of the pointwise constant over the field's sample set
/// (exact for constant and piecewise-constant fields).
inline double delta_p(const CoefficientField& field, double p) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& x : field.samples)
    best = std::min(best, delta_p_point(field.eval(x), p));
  return best;
}

/// Ratio Re <mu xi, xi> / |<mu xi, conj(xi)>| at a point of the unit sphere
/// of C^d, parametrized by v = (alpha, beta) in R^{2d}. The denominator is
/// the bilinear form xi^T mu xi.
inline double delta_ratio(const CMatrix& mu, const RVector& v) {
  const int d = static_cast<int>(mu.rows());
  CVector xi(d);
  for (int j = 0; j < d; ++j) xi(j) = Complex(v(j), v(d + j));
  CVector mxi = mu * xi;
  Complex numer = inner(mxi, xi);        // <mu xi, xi>
  Complex denom = xi.transpose() * mxi;  // <mu xi, conj xi> = xi^T mu xi
  double ad = std::abs(denom);
  if (ad < 1e-300) return std::numeric_limits<double>::infinity();
  return numer.real() / ad;
}

/// Brute-force minimization of the delta ratio over npts quasi-uniform sphere
/// points. Serves as an independent oracle for delta_mu.
inline double delta_mu_bruteforce(const CMatrix& mu, int npts) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& v : sphere_points(npts, 2 * static_cast<int>(mu.rows())))
    best = std::min(best, delta_ratio(mu, v));
  return best;
}

struct DeltaMuResult {
  double value = 0.0;
  bool converged = true;
};

/// delta(mu) = essinf_x min_xi Re <mu xi, xi> / |<mu xi, conj xi>|.
/// Scalar fields are evaluated in closed form; otherwise quasi-random sphere
/// seeding followed by projected-gradient descent at each sample point.
inline DeltaMuResult delta_mu(const CoefficientField& field, int seeds = 4096,
                              double tol = 1e-6) {
  if (field.scalar_constant)
    return {std::cos(std::arg(field.scalar_value)), true};
  DeltaMuResult res;
  res.value = std::numeric_limits<double>::infinity();
  const int m = 2 * field.d;
  auto seeds_pts = sphere_points(seeds, m);
  for (const auto& x : field.samples) {
    CMatrix mu = field.eval(x);
    auto f = [&mu](const RVector& v) { return delta_ratio(mu, v); };
    double best = std::numeric_limits<double>::infinity();
    RVector best_v;
    for (const auto& v : seeds_pts) {
      double val = f(v);
      if (val < best) {
        best = val;
        best_v = v;
      }
    }
    double refined = sphere_minimize(f, best_v, tol * 1e-2);
    if (refined > best + tol) res.converged = false;  // descent went astray
    res.value = std::min(res.value, std::min(best, refined));
  }
  return res;
}

inline constexpr double kPMax = 1e6;

struct P0Result {
  double value = std::numeric_limits<double>::infinity();  // inf means p0 = infinity
  double delta_route = std::numeric_limits<double>::infinity();
  bool warning = false;  // bisection and delta route disagree beyond 10*tol
};

/// p0(mu): the threshold with p-ellipticity exactly for p in (p0', p0).
/// Bisection on the sign of Delta_p over [2, P_MAX] (valid since p -> Delta_p
/// is decreasing on [2, inf)), cross-checked against p0 = 2/(1 - delta(mu)).
inline P0Result p0(const CoefficientField& field, double tol = 1e-4) {
  if (tol <= 0.0) throw std::invalid_argument("p0: tol must be > 0");
  P0Result res;
  double dmu = delta_mu(field).value;
  res.delta_route = (dmu >= 1.0) ? std::numeric_limits<double>::infinity()
                                 : 2.0 / (1.0 - dmu);
  if (delta_p(field, kPMax) > 0.0) {
    res.value = std::numeric_limits<double>::infinity();
    if (std::isfinite(res.delta_route)) res.warning = true;
    return res;
  }
  double lo = 2.0, hi = kPMax;
  while ((hi - lo) / hi > tol * 1e-2 && hi - lo > 1e-12) {
    double mid = 0.5 * (lo + hi);
    if (delta_p(field, mid) > 0.0)
      lo = mid;
    else
      hi = mid;
  }
  res.value = 0.5 * (lo + hi);
  if (std::isfinite(res.delta_route)) {
    if (std::abs(res.value - res.delta_route) > 10.0 * tol * res.value)
      res.warning = true;
  } else {
    res.warning = true;
  }
  return res;
}

/// The interval (p0 d / (d(p0-1)+2), p0 d / (d-2)) of sectoriality exponents.
inline std::pair<double, double> analyticity_interval(double p0_value, int d) {
  if (d < 2) throw std::invalid_argument("analyticity_interval: d must be >= 2");
  if (!(p0_value > 2.0))
    throw std::invalid_argument("analyticity_interval: p0 must be > 2");
  if (!std::isfinite(p0_value))
    return {1.0, std::numeric_limits<double>::infinity()};
  double lower = p0_value * d / (d * (p0_value - 1.0) + 2.0);
  double upper = (d == 2) ? std::numeric_limits<double>::infinity()
                          : p0_value * d / (d - 2.0);
  return {lower, upper};
}

/// Lower bound (p0 - 2)(d - 2) / (2 p0 d) on the half-width eps0 of the
/// exponent window around 2.
inline double eps0_lower(double p0_value, int d) {
  if (!std::isfinite(p0_value)) p0_value = kPMax;  // limiting value (d-2)/(2d)
  if (d <= 2) return 0.0;
  return (p0_value - 2.0) * (d - 2.0) / (2.0 * p0_value * d);
}

struct SectorAngles {
  double theta0 = 0.0;  // arctan(2 c_upper / c_lower)
  double omega = 0.0;   // numerical range angle of the recast form
  double theta = 0.0;   // 3 pi / 4 - max(theta0, omega)/2
  bool omega_fallback = false;
};

/// arg of <mu (2 alpha/p + i beta), 2 alpha/p' + i beta> at a sphere point
/// v = (alpha, beta).
inline double recast_arg(const CMatrix& mu, double p, const RVector& v) {
  const int d = static_cast<int>(mu.rows());
  const double pp = conjugate_exponent(p);
  CVector u(d), w(d);
  for (int j = 0; j < d; ++j) {
    u(j) = Complex(2.0 * v(j) / p, v(d + j));
    w(j) = Complex(2.0 * v(j) / pp, v(d + j));
  }
  Complex z = inner(CVector(mu * u), w);
  if (std::abs(z) < 1e-300) return 0.0;
  return std::abs(std::arg(z));
}

inline SectorAngles sector_angles(const CoefficientField& field, double p,
                                  double lambda_p, int seeds = 2048) {
  if (!(lambda_p > 0.0))
    throw std::invalid_argument("sector_angles: lambda_p must be > 0");
  SectorAngles sa;
  sa.theta0 = std::atan(2.0 * field.c_upper / field.c_lower);
  const int m = 2 * field.d;
  auto pts = sphere_points(seeds, m);
  double omega = 0.0;
  for (const auto& x : field.samples) {
    CMatrix mu = field.eval(x);
    auto neg = [&](const RVector& v) { return -recast_arg(mu, p, v); };
    double best = 0.0;
    RVector best_v;
    for (const auto& v : pts) {
      double a = recast_arg(mu, p, v);
      if (a > best) {
        best = a;
        best_v = v;
      }
    }
    if (best_v.size() > 0) best = std::max(best, -sphere_minimize(neg, best_v));
    omega = std::max(omega, best);
  }
  if (omega >= pi / 2.0 - 1e-12) {
    // the recast form must have positive real part under p-ellipticity; a
    // maximizer at or beyond pi/2 signals non-convergence
    double pp = conjugate_exponent(p);
    omega = std::atan(2.0 * field.c_upper * std::max(p, pp) / lambda_p);
    sa.omega_fallback = true;
  }
  sa.omega = omega;
  sa.theta = 0.75 * pi - 0.5 * std::max(sa.theta0, sa.omega);
  return sa;
}

/// Lemma-level perturbation bound: Delta_p(mu + nu) >= Delta_p(mu)
/// - 2 max(1/p, 1/p') ||nu||_inf.
inline double perturbed_delta_bound(double delta_p_base, double p, double nu_norm) {
  if (nu_norm < 0.0)
    throw std::invalid_argument("perturbed_delta_bound: nu_norm must be >= 0");
  double pp = conjugate_exponent(p);
  return delta_p_base - 2.0 * std::max(1.0 / p, 1.0 / pp) * nu_norm;
}

struct ImBoundReport {
  double worst_ratio = 0.0;  // max |Im mu| / |Re mu| over samples
  double bound = 0.0;        // sqrt(p-1)/(p-2)
  bool passes = true;
};

/// Checks |Im mu(x)| <= sqrt(p-1)/(p-2) |Re mu(x)| in operator norms.
inline ImBoundReport im_bound_check(const CoefficientField& field, double p) {
  if (!(p > 2.0)) throw std::invalid_argument("im_bound_check: requires p > 2");
  ImBoundReport rep;
  rep.bound = std::sqrt(p - 1.0) / (p - 2.0);
  for (const auto& x : field.samples) {
    CMatrix mu = field.eval(x);
    double re = opnorm(RMatrix(mu.real()));
    double im = opnorm(RMatrix(mu.imag()));
    if (re < 1e-300) continue;
    rep.worst_ratio = std::max(rep.worst_ratio, im / re);
  }
  rep.passes = rep.worst_ratio <= rep.bound + 1e-12;
  return rep;
}

/// Smallest p_c > 2 with sqrt(p_c - 1)/(p_c - 2) * c_upper < min(eps, c_upper,
/// c_lower / 2), via bisection on the decreasing map p -> sqrt(p-1)/(p-2).
inline double pc_threshold(double c_lower, double c_upper, double eps,
                           double tol = 1e-10) {
  if (!(eps > 0.0)) throw std::invalid_argument("pc_threshold: eps must be > 0");
  double target = std::min({eps, c_upper, 0.5 * c_lower}) / c_upper;
  auto g = [](double p) { return std::sqrt(p - 1.0) / (p - 2.0); };
  double lo = 2.0 + 1e-12, hi = 4.0;
  while (g(hi) >= target) {
    hi *= 2.0;
    if (hi > 1e300) return std::numeric_limits<double>::infinity();
  }
  while (hi - lo > tol * hi) {
    double mid = 0.5 * (lo + hi);
    if (g(mid) < target)
      hi = mid;
    else
      lo = mid;
  }
  return hi;
}

/// Full calculus summary for one coefficient field.
struct PEllipticityReport {
  std::vector<std::pair<double, double>> delta_curve;  // (p, Delta_p)
  double delta = 0.0;                                  // delta(mu)
  double p0_value = 0.0;
  double p0_delta_route = 0.0;
  bool p0_warning = false;
  std::pair<double, double> interval{1.0, std::numeric_limits<double>::infinity()};
  double eps0 = 0.0;
  SectorAngles angles;
};

inline PEllipticityReport pcalc_report(const CoefficientField& field, int d,
                                       const std::vector<double>& p_grid,
                                       double tol = 1e-4) {
  PEllipticityReport rep;
  for (double p : p_grid) rep.delta_curve.emplace_back(p, delta_p(field, p));
  rep.delta = delta_mu(field).value;
  auto r0 = p0(field, tol);
  rep.p0_value = r0.value;
  rep.p0_delta_route = r0.delta_route;
  rep.p0_warning = r0.warning;
  rep.interval = analyticity_interval(std::max(r0.value, 2.0 + 1e-12), d);
  rep.eps0 = eps0_lower(r0.value, d);
  double d2 = delta_p(field, 2.0);
  rep.angles = sector_angles(field, 2.0, std::max(d2, 1e-12));
  return rep;
}

}  // namespace pell
