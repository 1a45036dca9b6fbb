#pragma once

#include <algorithm>
#include <array>
#include <cstdio>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <string>

#include "pell/common.hpp"

namespace pell {

enum class FieldKind { Constant, ScalarRotation, Checkerboard, Table };

/// A coefficient field x -> mu(x), a complex d x d matrix, with its declared
/// ellipticity constants: Re <mu(x) xi, xi> >= c_lower |xi|^2 and
/// |mu(x)| <= c_upper in operator norm.
struct CoefficientField {
  int d = 0;
  FieldKind kind = FieldKind::Constant;
  std::function<CMatrix(const Point&)> eval;
  double c_lower = 0.0;
  double c_upper = 0.0;
  /// Representative sample points. Exact (one per tile) for constant and
  /// piecewise-constant fields, midpoints of a sampling grid otherwise.
  std::vector<Point> samples;
  /// Set for fields of the form mu(x) = z(x) * I with z constant.
  bool scalar_constant = false;
  Complex scalar_value = Complex(0, 0);

  CMatrix operator()(const Point& x) const { return eval(x); }
};

/// L-infinity perturbation of a base field.
struct Perturbation {
  CoefficientField base;
  std::function<CMatrix(const Point&)> nu;
  double nu_norm = 0.0;

  CoefficientField perturbed() const {
    CoefficientField f = base;
    auto b = base.eval;
    auto n = nu;
    f.eval = [b, n](const Point& x) { return CMatrix(b(x) + n(x)); };
    f.kind = FieldKind::Table;
    f.scalar_constant = false;
    // declared constants are not recomputed; callers validate if needed
    f.c_lower = std::max(base.c_lower - nu_norm, 0.0);
    f.c_upper = base.c_upper + nu_norm;
    return f;
  }
};

inline CoefficientField make_constant(const CMatrix& mu) {
  const int d = static_cast<int>(mu.rows());
  if (mu.cols() != d || d < 1 || d > 3)
    throw std::invalid_argument("make_constant: mu must be d x d with d <= 3");
  double cl = hermitian_lower_bound(mu);
  if (cl <= 0.0) throw std::invalid_argument("make_constant: matrix is not elliptic");
  CoefficientField f;
  f.d = d;
  f.kind = FieldKind::Constant;
  CMatrix m = mu;
  f.eval = [m](const Point&) { return m; };
  f.c_lower = cl;
  f.c_upper = opnorm(mu);
  f.samples = {Point::Constant(0.5)};
  return f;
}

/// mu(x) = e^{i phi} * I. Elliptic iff |phi| < pi/2, with c_lower = cos(phi).
inline CoefficientField make_scalar_rotation(double phi, int d) {
  if (std::abs(phi) >= pi / 2.0)
    throw std::invalid_argument("make_scalar_rotation: |phi| must be < pi/2");
  if (d < 1 || d > 3)
    throw std::invalid_argument("make_scalar_rotation: d must be in {1,2,3}");
  Complex z = std::polar(1.0, phi);
  CoefficientField f;
  f.d = d;
  f.kind = FieldKind::ScalarRotation;
  f.eval = [z, d](const Point&) { return CMatrix(z * CMatrix::Identity(d, d)); };
  f.c_lower = std::cos(phi);
  f.c_upper = 1.0;
  f.samples = {Point::Constant(0.5)};
  f.scalar_constant = true;
  f.scalar_value = z;
  return f;
}

namespace detail {

/// Tile index of x in a uniform tiling of the unit box, clamped to [0,1]^d.
inline std::array<int, 3> tile_of(const Point& x, int tiling, int d) {
  std::array<int, 3> idx{0, 0, 0};
  for (int k = 0; k < d; ++k) {
    double c = std::min(std::max(x(k), 0.0), 1.0 - 1e-12);
    idx[k] = static_cast<int>(c * tiling);
  }
  return idx;
}

inline void tile_constants(const std::vector<CMatrix>& values, int d, double& cl,
                           double& cu) {
  cl = std::numeric_limits<double>::infinity();
  cu = 0.0;
  for (const auto& m : values) {
    if (m.rows() != d || m.cols() != d)
      throw std::invalid_argument("tile matrices must be d x d");
    double l = hermitian_lower_bound(m);
    if (l <= 0.0) throw std::invalid_argument("non-elliptic tile matrix");
    cl = std::min(cl, l);
    cu = std::max(cu, opnorm(m));
  }
}

inline std::vector<Point> tile_midpoints(int tiling, int d) {
  std::vector<Point> pts;
  int nz = (d >= 3) ? tiling : 1;
  int ny = (d >= 2) ? tiling : 1;
  for (int iz = 0; iz < nz; ++iz)
    for (int iy = 0; iy < ny; ++iy)
      for (int ix = 0; ix < tiling; ++ix) {
        Point p = Point::Zero();
        p(0) = (ix + 0.5) / tiling;
        if (d >= 2) p(1) = (iy + 0.5) / tiling;
        if (d >= 3) p(2) = (iz + 0.5) / tiling;
        pts.push_back(p);
      }
  return pts;
}

}  // namespace detail

/// Piecewise-constant field on a uniform tiling of the unit box; tile values
/// alternate through `values` in a checkerboard (parity) pattern.
inline CoefficientField make_checkerboard(const std::vector<CMatrix>& values,
                                          int tiling, int d) {
  if (values.empty()) throw std::invalid_argument("make_checkerboard: no tiles");
  if (tiling < 1) throw std::invalid_argument("make_checkerboard: tiling < 1");
  if (d < 1 || d > 3) throw std::invalid_argument("make_checkerboard: bad d");
  CoefficientField f;
  f.d = d;
  f.kind = FieldKind::Checkerboard;
  detail::tile_constants(values, d, f.c_lower, f.c_upper);
  const int nv = static_cast<int>(values.size());
  std::vector<CMatrix> vals = values;
  f.eval = [vals, tiling, d, nv](const Point& x) {
    auto t = detail::tile_of(x, tiling, d);
    int parity = (t[0] + t[1] + t[2]) % nv;
    return vals[parity];
  };
  f.samples = detail::tile_midpoints(tiling, d);
  if (nv == 1) {
    f.kind = FieldKind::Constant;
    f.samples = {Point::Constant(0.5)};
  }
  return f;
}

/// Piecewise-constant field with one matrix per tile in row-major order.
inline CoefficientField make_table(const std::vector<CMatrix>& values, int tiling,
                                   int d) {
  int expected = 1;
  for (int k = 0; k < d; ++k) expected *= tiling;
  if (static_cast<int>(values.size()) != expected)
    throw std::invalid_argument("make_table: need tiling^d matrices");
  CoefficientField f;
  f.d = d;
  f.kind = FieldKind::Table;
  detail::tile_constants(values, d, f.c_lower, f.c_upper);
  std::vector<CMatrix> vals = values;
  f.eval = [vals, tiling, d](const Point& x) {
    auto t = detail::tile_of(x, tiling, d);
    int idx = t[0] + tiling * (t[1] + tiling * t[2]);
    return vals[idx];
  };
  f.samples = detail::tile_midpoints(tiling, d);
  return f;
}

/// Load tile matrices from a plain-text file: one line per tile, row-major
/// real parts then row-major imaginary parts, whitespace separated.
inline std::vector<CMatrix> load_table_file(const std::string& path, int d) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open coefficient table: " + path);
  std::vector<CMatrix> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    std::vector<double> vals;
    double v;
    while (ss >> v) vals.push_back(v);
    if (vals.empty()) continue;
    if (static_cast<int>(vals.size()) != 2 * d * d) {
      throw std::runtime_error("coefficient table line " + std::to_string(lineno) +
                               ": expected " + std::to_string(2 * d * d) +
                               " numbers");
    }
    CMatrix m(d, d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j)
        m(i, j) = Complex(vals[i * d + j], vals[d * d + i * d + j]);
    out.push_back(m);
  }
  return out;
}

/// Empirical ellipticity constants over sampled (x, xi).
struct EllipticityReport {
  double empirical_c_lower = 0.0;
  double empirical_c_upper = 0.0;
  bool violation = false;
  double tol = 1e-9;
};

inline EllipticityReport validate_ellipticity(const CoefficientField& field,
                                              int nsamples, double tol = 1e-9) {
  if (nsamples < 1) throw std::invalid_argument("validate_ellipticity: samples < 1");
  EllipticityReport rep;
  rep.tol = tol;
  rep.empirical_c_lower = std::numeric_limits<double>::infinity();
  std::vector<Point> pts = field.samples;
  // exact per-tile evaluation for piecewise-constant fields; refine by a
  // quasi-random sweep for anything else
  if (field.kind == FieldKind::Table || pts.empty()) {
    for (int k = 0; k < nsamples; ++k) {
      Point p = Point::Zero();
      for (int j = 0; j < field.d; ++j)
        p(j) = radical_inverse(static_cast<std::uint64_t>(k) + 1,
                               detail::halton_primes[j]);
      pts.push_back(p);
    }
  }
  for (const auto& x : pts) {
    CMatrix m = field.eval(x);
    rep.empirical_c_lower = std::min(rep.empirical_c_lower, hermitian_lower_bound(m));
    rep.empirical_c_upper = std::max(rep.empirical_c_upper, opnorm(m));
  }
  if (rep.empirical_c_lower < field.c_lower - tol ||
      rep.empirical_c_upper > field.c_upper + tol)
    rep.violation = true;
  return rep;
}

/// Scaled field t * mu.
inline CoefficientField scale_field(const CoefficientField& field, double t) {
  if (t <= 0.0) throw std::invalid_argument("scale_field: t must be > 0");
  CoefficientField f = field;
  auto e = field.eval;
  f.eval = [e, t](const Point& x) { return CMatrix(t * e(x)); };
  f.c_lower = t * field.c_lower;
  f.c_upper = t * field.c_upper;
  f.scalar_value = t * field.scalar_value;
  return f;
}

enum class Shape { Box2, Box3, LShape2 };

/// Boundary faces are labelled 0..2d-1 in the order x-,x+,y-,y+,z-,z+.
/// The L-shape [0,1]^2 \ [1/2,1]^2 has two extra inner faces:
///   4 = {x = 1/2, y >= 1/2}, 5 = {y = 1/2, x >= 1/2}.
struct DomainSpec {
  Shape shape = Shape::Box2;
  std::set<int> dirichlet_faces;
  double chart_constant = 1.0;  // M
  double kappa = 0.0, iota = 0.0, r0 = 0.0, s0 = 0.0;  // reporting only

  int dim() const { return shape == Shape::Box3 ? 3 : 2; }
  int n_faces() const {
    if (shape == Shape::LShape2) return 6;
    return 2 * dim();
  }
  bool face_is_dirichlet(int face) const { return dirichlet_faces.count(face) > 0; }
  double volume() const { return shape == Shape::LShape2 ? 0.75 : 1.0; }
  double alpha() const { return chart_constant * chart_constant * std::sqrt(dim()); }
  double beta() const { return 4.0 * alpha(); }

  static DomainSpec box(int d, bool all_dirichlet = true) {
    DomainSpec s;
    s.shape = (d == 3) ? Shape::Box3 : Shape::Box2;
    if (all_dirichlet)
      for (int f = 0; f < s.n_faces(); ++f) s.dirichlet_faces.insert(f);
    return s;
  }
  static DomainSpec lshape(std::set<int> dirichlet = {}) {
    DomainSpec s;
    s.shape = Shape::LShape2;
    s.dirichlet_faces = std::move(dirichlet);
    return s;
  }
};

}  // namespace pell
