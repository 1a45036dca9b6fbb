#pragma once

#include <array>

#include "pell/coeff.hpp"
#include "pell/common.hpp"

namespace pell {

/// Uniform Q1 grid (quads in d=2, hexes in d=3) over a box or L-shape with
/// mixed Dirichlet/Neumann boundary labels derived from a DomainSpec.
struct Grid {
  int d = 2;
  int n = 0;  // cells per axis (per unit edge)
  DomainSpec spec;
  double h = 0.0;
  std::vector<Point> verts;
  std::vector<std::array<int, 8>> cells;  // vertex ids, first 2^d entries used
  int verts_per_cell = 4;
  double cell_volume = 0.0;
  std::vector<bool> constrained;  // per vertex: on a Dirichlet face
  std::vector<int> free_index;    // vertex -> dof or -1
  std::vector<int> free_verts;    // dof -> vertex
  std::vector<double> lumped;     // per-vertex lumped mass, sums to |Omega|

  int n_free() const { return static_cast<int>(free_verts.size()); }

  Point cell_center(int c) const {
    Point mid = Point::Zero();
    for (int k = 0; k < verts_per_cell; ++k) mid += verts[cells[c][k]];
    return mid / verts_per_cell;
  }

  /// Cells whose centroid lies in the ball B(x0, r); the discrete Omega(x0,r).
  std::vector<int> patch_cells(const Point& x0, double r) const {
    std::vector<int> out;
    for (int c = 0; c < static_cast<int>(cells.size()); ++c) {
      Point mid = cell_center(c);
      double dist2 = 0.0;
      for (int k = 0; k < d; ++k) dist2 += (mid(k) - x0(k)) * (mid(k) - x0(k));
      if (dist2 <= r * r) out.push_back(c);
    }
    return out;
  }

  /// Vertices belonging to patch cells, sorted and unique.
  std::vector<int> patch_verts(const Point& x0, double r) const {
    std::vector<int> out;
    for (int c : patch_cells(x0, r))
      for (int k = 0; k < verts_per_cell; ++k) out.push_back(cells[c][k]);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }
};

namespace detail {

inline bool lshape_cell_inside(double cx, double cy) {
  // L-shape [0,1]^2 minus the closed quadrant [1/2,1]^2
  return !(cx > 0.5 && cy > 0.5);
}

/// True if vertex x lies on face `face` of the domain.
inline bool on_face(const DomainSpec& spec, const Point& x, int face,
                    double tol = 1e-12) {
  const int d = spec.dim();
  auto at = [&](int axis, double v) { return std::abs(x(axis) - v) < tol; };
  if (spec.shape == Shape::LShape2) {
    bool in_l = x(0) <= 0.5 + tol || x(1) <= 0.5 + tol;
    if (!in_l) return false;
    switch (face) {
      case 0: return at(0, 0.0);
      case 1: return at(0, 1.0) && x(1) <= 0.5 + tol;
      case 2: return at(1, 0.0);
      case 3: return at(1, 1.0) && x(0) <= 0.5 + tol;
      case 4: return at(0, 0.5) && x(1) >= 0.5 - tol;
      case 5: return at(1, 0.5) && x(0) >= 0.5 - tol;
      default: return false;
    }
  }
  if (face < 0 || face >= 2 * d) return false;
  int axis = face / 2;
  return at(axis, (face % 2 == 0) ? 0.0 : 1.0);
}

}  // namespace detail

inline Grid build_grid(const DomainSpec& spec, int n) {
  if (n < 4) throw std::invalid_argument("build_grid: n must be >= 4");
  if (spec.shape == Shape::LShape2 && n % 2 != 0)
    throw std::invalid_argument("build_grid: L-shape requires even n");
  Grid g;
  g.spec = spec;
  g.d = spec.dim();
  g.n = n;
  g.h = 1.0 / n;
  g.verts_per_cell = 1 << g.d;
  g.cell_volume = std::pow(g.h, g.d);

  const int nv1 = n + 1;
  const int nz = (g.d == 3) ? nv1 : 1;
  std::vector<int> vid((g.d == 3) ? nv1 * nv1 * nv1 : nv1 * nv1, -1);
  auto vindex = [&](int i, int j, int k) { return i + nv1 * (j + nv1 * k); };

  auto vertex_used = [&](int i, int j, int k) {
    if (spec.shape != Shape::LShape2) return true;
    // a vertex survives if it touches at least one kept cell
    for (int dj = -1; dj <= 0; ++dj)
      for (int di = -1; di <= 0; ++di) {
        int ci = i + di, cj = j + dj;
        if (ci < 0 || cj < 0 || ci >= n || cj >= n) continue;
        if (detail::lshape_cell_inside((ci + 0.5) * g.h, (cj + 0.5) * g.h))
          return true;
      }
    (void)k;
    return false;
  };

  for (int k = 0; k < nz; ++k)
    for (int j = 0; j < nv1; ++j)
      for (int i = 0; i < nv1; ++i) {
        if (!vertex_used(i, j, k)) continue;
        vid[vindex(i, j, k)] = static_cast<int>(g.verts.size());
        Point p = Point::Zero();
        p(0) = i * g.h;
        p(1) = j * g.h;
        if (g.d == 3) p(2) = k * g.h;
        g.verts.push_back(p);
      }

  const int cz = (g.d == 3) ? n : 1;
  for (int k = 0; k < cz; ++k)
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        if (spec.shape == Shape::LShape2 &&
            !detail::lshape_cell_inside((i + 0.5) * g.h, (j + 0.5) * g.h))
          continue;
        std::array<int, 8> c{};
        if (g.d == 2) {
          c[0] = vid[vindex(i, j, 0)];
          c[1] = vid[vindex(i + 1, j, 0)];
          c[2] = vid[vindex(i, j + 1, 0)];
          c[3] = vid[vindex(i + 1, j + 1, 0)];
        } else {
          c[0] = vid[vindex(i, j, k)];
          c[1] = vid[vindex(i + 1, j, k)];
          c[2] = vid[vindex(i, j + 1, k)];
          c[3] = vid[vindex(i + 1, j + 1, k)];
          c[4] = vid[vindex(i, j, k + 1)];
          c[5] = vid[vindex(i + 1, j, k + 1)];
          c[6] = vid[vindex(i, j + 1, k + 1)];
          c[7] = vid[vindex(i + 1, j + 1, k + 1)];
        }
        g.cells.push_back(c);
      }

  // lumped mass: each cell spreads its volume equally over its vertices
  g.lumped.assign(g.verts.size(), 0.0);
  for (const auto& c : g.cells)
    for (int k = 0; k < g.verts_per_cell; ++k)
      g.lumped[c[k]] += g.cell_volume / g.verts_per_cell;

  // Dirichlet classification
  g.constrained.assign(g.verts.size(), false);
  for (size_t v = 0; v < g.verts.size(); ++v)
    for (int face : spec.dirichlet_faces)
      if (detail::on_face(spec, g.verts[v], face)) {
        g.constrained[v] = true;
        break;
      }

  g.free_index.assign(g.verts.size(), -1);
  for (size_t v = 0; v < g.verts.size(); ++v)
    if (!g.constrained[v]) {
      g.free_index[v] = static_cast<int>(g.free_verts.size());
      g.free_verts.push_back(static_cast<int>(v));
    }
  return g;
}

}  // namespace pell
