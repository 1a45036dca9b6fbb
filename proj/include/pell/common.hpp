#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

namespace pell {

using Complex = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;
using RVector = Eigen::VectorXd;
using RMatrix = Eigen::MatrixXd;
using Point = Eigen::Vector3d;

inline constexpr double pi = 3.14159265358979323846;

/// Hermitian inner product with the convention <u,v> = sum_j u_j conj(v_j).
inline Complex inner(const CVector& u, const CVector& v) { return v.dot(u); }

/// Conjugate exponent p' = p/(p-1).
inline double conjugate_exponent(double p) {
  if (p <= 1.0) throw std::invalid_argument("conjugate_exponent: p must be > 1");
  return p / (p - 1.0);
}

/// Largest singular value of a small dense complex matrix.
inline double opnorm(const CMatrix& m) {
  return m.jacobiSvd().singularValues()(0);
}

inline double opnorm(const RMatrix& m) {
  return m.jacobiSvd().singularValues()(0);
}

/// Smallest eigenvalue of the Hermitian part (M + M^H)/2; the sharp constant
/// in Re <M xi, xi> >= c |xi|^2 over the complex unit sphere.
inline double hermitian_lower_bound(const CMatrix& m) {
  CMatrix h = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<CMatrix> es(h);
  return es.eigenvalues()(0);
}

/// Van der Corput radical inverse.
inline double radical_inverse(std::uint64_t i, std::uint64_t base) {
  double f = 1.0, r = 0.0;
  while (i > 0) {
    f /= static_cast<double>(base);
    r += f * static_cast<double>(i % base);
    i /= base;
  }
  return r;
}

namespace detail {
inline constexpr std::uint64_t halton_primes[8] = {2, 3, 5, 7, 11, 13, 17, 19};
}

/// Quasi-uniform deterministic points on the unit sphere of R^m, generated
/// from Halton points pushed through the Box-Muller map and normalized.
inline std::vector<RVector> sphere_points(int npts, int m) {
  if (m < 1) throw std::invalid_argument("sphere_points: dimension must be >= 1");
  std::vector<RVector> out;
  out.reserve(npts);
  const int pairs = (m + 1) / 2;
  for (int k = 0; k < npts; ++k) {
    RVector v(m);
    for (int j = 0; j < pairs; ++j) {
      // skip index 0 to avoid log(0)
      double u1 = radical_inverse(static_cast<std::uint64_t>(k) + 1,
                                  detail::halton_primes[(2 * j) % 8]);
      double u2 = radical_inverse(static_cast<std::uint64_t>(k) + 1,
                                  detail::halton_primes[(2 * j + 1) % 8]);
      u1 = std::min(std::max(u1, 1e-16), 1.0 - 1e-16);
      double rad = std::sqrt(-2.0 * std::log(u1));
      double g1 = rad * std::cos(2.0 * pi * u2);
      double g2 = rad * std::sin(2.0 * pi * u2);
      v(2 * j) = g1;
      if (2 * j + 1 < m) v(2 * j + 1) = g2;
    }
    double n = v.norm();
    if (n < 1e-12) continue;
    out.push_back(v / n);
  }
  return out;
}

/// Minimize a smooth function on the unit sphere of R^m by projected gradient
/// descent with numerical gradients and backtracking, starting from x0.
template <class F>
double sphere_minimize(const F& f, RVector x, double tol = 1e-8,
                       int max_iter = 200) {
  const int m = static_cast<int>(x.size());
  x.normalize();
  double fx = f(x);
  double step = 0.5;
  const double dh = 1e-6;
  for (int it = 0; it < max_iter; ++it) {
    RVector g(m);
    for (int j = 0; j < m; ++j) {
      RVector xp = x;
      xp(j) += dh;
      xp.normalize();
      RVector xm = x;
      xm(j) -= dh;
      xm.normalize();
      g(j) = (f(xp) - f(xm)) / (2.0 * dh);
    }
    // project onto tangent space
    g -= g.dot(x) * x;
    double gn = g.norm();
    if (gn < tol) break;
    bool improved = false;
    for (int bt = 0; bt < 30; ++bt) {
      RVector xn = (x - step * g).normalized();
      double fn = f(xn);
      if (fn < fx - 1e-14) {
        x = xn;
        fx = fn;
        improved = true;
        step *= 1.5;
        break;
      }
      step *= 0.5;
    }
    if (!improved) break;
  }
  return fx;
}

/// Deterministic RNG used throughout; all randomized routines take a seed.
using Rng = std::mt19937_64;

inline RVector gaussian_vector(Rng& rng, int n) {
  std::normal_distribution<double> dist(0.0, 1.0);
  RVector v(n);
  for (int i = 0; i < n; ++i) v(i) = dist(rng);
  return v;
}

inline CVector gaussian_cvector(Rng& rng, int n) {
  std::normal_distribution<double> dist(0.0, 1.0);
  CVector v(n);
  for (int i = 0; i < n; ++i) v(i) = Complex(dist(rng), dist(rng));
  return v;
}

}  // namespace pell
