#pragma once

#include <Eigen/Sparse>

#include "pell/grid.hpp"

namespace pell {

using SparseC = Eigen::SparseMatrix<Complex>;

/// Complex vertex-valued function; constrained entries are zero for members
/// of the discrete analogue of W^{1,p}_D.
struct DiscreteFunction {
  CVector values;  // one entry per vertex
  const Grid* grid = nullptr;
};

/// Galerkin image of the form t[u,v] = int <mu grad u, grad v> on the free
/// vertices, with a lumped (diagonal) mass matrix.
struct DiscreteOperator {
  SparseC K;       // free x free stiffness
  RVector Mdiag;   // lumped mass on free vertices
  const Grid* grid = nullptr;
  double c_lower = 0.0, c_upper = 0.0;
  double theta0 = 0.0;  // arctan(2 c_upper / c_lower)
};

namespace detail {

/// Reference-cell integrals T[a][b](i,j) = int_cell d_a phi_i d_b phi_j dx
/// for Q1 basis functions on an axis-aligned cell of edge h in dimension d.
/// Exact (2-point Gauss per axis).
struct Q1Reference {
  int d;
  double h;
  int nb;  // 2^d
  std::array<std::array<RMatrix, 3>, 3> T;

  Q1Reference(int dim, double edge) : d(dim), h(edge), nb(1 << dim) {
    const double gp[2] = {0.5 - 0.5 / std::sqrt(3.0), 0.5 + 0.5 / std::sqrt(3.0)};
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b) T[a][b] = RMatrix::Zero(nb, nb);
    const int nq = 1 << d;  // tensor 2-point rule
    const double w = std::pow(h, d) / nq;
    for (int q = 0; q < nq; ++q) {
      double xi[3] = {0.5, 0.5, 0.5};
      for (int k = 0; k < d; ++k) xi[k] = gp[(q >> k) & 1];
      // basis i has unit-coordinate factors xi or (1-xi) per axis
      RVector val(nb);
      RMatrix grad(nb, d);
      for (int i = 0; i < nb; ++i) {
        double v = 1.0;
        for (int k = 0; k < d; ++k) v *= ((i >> k) & 1) ? xi[k] : (1.0 - xi[k]);
        val(i) = v;
        for (int a = 0; a < d; ++a) {
          double gprod = 1.0;
          for (int k = 0; k < d; ++k) {
            if (k == a)
              gprod *= ((i >> k) & 1) ? 1.0 : -1.0;
            else
              gprod *= ((i >> k) & 1) ? xi[k] : (1.0 - xi[k]);
          }
          grad(i, a) = gprod / h;  // d/dx = (1/h) d/dxi
        }
      }
      for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b)
          for (int i = 0; i < nb; ++i)
            for (int j = 0; j < nb; ++j)
              T[a][b](i, j) += w * grad(i, a) * grad(j, b);
    }
  }

  /// Gradient of basis function i at the cell midpoint.
  RMatrix midpoint_gradients() const {
    RMatrix g(nb, d);
    for (int i = 0; i < nb; ++i)
      for (int a = 0; a < d; ++a) {
        double gprod = 1.0;
        for (int k = 0; k < d; ++k) {
          if (k == a)
            gprod *= ((i >> k) & 1) ? 1.0 : -1.0;
          else
            gprod *= 0.5;
        }
        g(i, a) = gprod / h;
      }
    return g;
  }
};

}  // namespace detail

/// Assemble the stiffness matrix with one-point (midpoint) quadrature for mu
/// per cell and exact integration of the Q1 gradient products; Dirichlet
/// dofs eliminated, mass lumped.
inline DiscreteOperator assemble(const CoefficientField& field, const Grid& grid) {
  if (field.d != grid.d)
    throw std::invalid_argument("assemble: field/grid dimension mismatch");
  DiscreteOperator op;
  op.grid = &grid;
  op.c_lower = field.c_lower;
  op.c_upper = field.c_upper;
  op.theta0 = std::atan(2.0 * field.c_upper / field.c_lower);

  detail::Q1Reference ref(grid.d, grid.h);
  std::vector<Eigen::Triplet<Complex>> trip;
  trip.reserve(grid.cells.size() * ref.nb * ref.nb);
  for (size_t c = 0; c < grid.cells.size(); ++c) {
    CMatrix mu = field.eval(grid.cell_center(static_cast<int>(c)));
    // local K_ij = sum_ab mu(a,b) int d_b phi_j d_a phi_i
    for (int i = 0; i < ref.nb; ++i) {
      int vi = grid.cells[c][i];
      int fi = grid.free_index[vi];
      if (fi < 0) continue;
      for (int j = 0; j < ref.nb; ++j) {
        int vj = grid.cells[c][j];
        int fj = grid.free_index[vj];
        if (fj < 0) continue;
        Complex kij(0, 0);
        for (int a = 0; a < grid.d; ++a)
          for (int b = 0; b < grid.d; ++b) kij += mu(a, b) * ref.T[a][b](i, j);
        trip.emplace_back(fi, fj, kij);
      }
    }
  }
  op.K.resize(grid.n_free(), grid.n_free());
  op.K.setFromTriplets(trip.begin(), trip.end());
  op.Mdiag.resize(grid.n_free());
  for (int f = 0; f < grid.n_free(); ++f)
    op.Mdiag(f) = grid.lumped[grid.free_verts[f]];
  return op;
}

/// Discrete L^p norm with lumped weights, optionally restricted to a vertex
/// patch.
inline double lp_norm(const DiscreteFunction& u, double p,
                      const std::vector<int>* patch = nullptr) {
  if (p < 1.0) throw std::invalid_argument("lp_norm: p must be >= 1");
  const Grid& g = *u.grid;
  double acc = 0.0;
  if (patch) {
    for (int v : *patch) acc += g.lumped[v] * std::pow(std::abs(u.values(v)), p);
  } else {
    for (Eigen::Index v = 0; v < u.values.size(); ++v)
      acc += g.lumped[v] * std::pow(std::abs(u.values(v)), p);
  }
  return std::pow(acc, 1.0 / p);
}

/// Per-cell Q1 gradient at cell midpoints.
struct CellField {
  std::vector<CVector> values;  // one d-vector per cell
  const Grid* grid = nullptr;
};

inline CellField gradient(const DiscreteFunction& u) {
  const Grid& g = *u.grid;
  detail::Q1Reference ref(g.d, g.h);
  RMatrix gm = ref.midpoint_gradients();
  CellField out;
  out.grid = &g;
  out.values.resize(g.cells.size());
  for (size_t c = 0; c < g.cells.size(); ++c) {
    CVector gr = CVector::Zero(g.d);
    for (int i = 0; i < ref.nb; ++i) {
      Complex ui = u.values(g.cells[c][i]);
      for (int a = 0; a < g.d; ++a) gr(a) += ui * gm(i, a);
    }
    out.values[c] = gr;
  }
  return out;
}

/// Cell-weighted L^p norm of a cell field, optionally on a cell patch.
inline double lp_norm(const CellField& f, double p,
                      const std::vector<int>* cells = nullptr) {
  if (p < 1.0) throw std::invalid_argument("lp_norm: p must be >= 1");
  const Grid& g = *f.grid;
  double acc = 0.0;
  auto add = [&](int c) { acc += g.cell_volume * std::pow(f.values[c].norm(), p); };
  if (cells) {
    for (int c : *cells) add(c);
  } else {
    for (int c = 0; c < static_cast<int>(g.cells.size()); ++c) add(c);
  }
  return std::pow(acc, 1.0 / p);
}

inline DiscreteFunction interpolate(const Grid& grid,
                                    const std::function<Complex(const Point&)>& f) {
  DiscreteFunction u;
  u.grid = &grid;
  u.values.resize(grid.verts.size());
  for (size_t v = 0; v < grid.verts.size(); ++v) u.values(v) = f(grid.verts[v]);
  return u;
}

/// Scatter a free-dof vector into a full vertex function (zeros on D).
inline DiscreteFunction from_free(const Grid& grid, const CVector& free_vals) {
  DiscreteFunction u;
  u.grid = &grid;
  u.values = CVector::Zero(grid.verts.size());
  for (int f = 0; f < grid.n_free(); ++f) u.values(grid.free_verts[f]) = free_vals(f);
  return u;
}

inline CVector to_free(const Grid& grid, const DiscreteFunction& u) {
  CVector out(grid.n_free());
  for (int f = 0; f < grid.n_free(); ++f) out(f) = u.values(grid.free_verts[f]);
  return out;
}

}  // namespace pell
