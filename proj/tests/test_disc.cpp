#include <catch2/catch_amalgamated.hpp>

#include "pell/resolvent.hpp"

using namespace pell;

namespace {

CoefficientField identity_field(int d) {
  return make_constant(CMatrix::Identity(d, d));
}

DomainSpec full_dirichlet_box(int d) {
  DomainSpec spec = DomainSpec::box(d);
  for (int f = 0; f < spec.n_faces(); ++f) spec.dirichlet_faces.insert(f);
  return spec;
}

}  // namespace

TEST_CASE("grid counting on the unit square") {
  Grid g = build_grid(DomainSpec::box(2, false), 4);
  CHECK(g.verts.size() == 25);
  CHECK(g.cells.size() == 16);
  CHECK(g.h == 0.25);
  // pure Neumann: every vertex free
  CHECK(g.n_free() == 25);

  Grid g3 = build_grid(DomainSpec::box(3), 4);
  CHECK(g3.verts.size() == 125);
  CHECK(g3.cells.size() == 64);
}

TEST_CASE("L-shape grid volume and counts") {
  Grid g = build_grid(DomainSpec::lshape(), 8);
  CHECK(g.cells.size() == 48);  // (3/4) n^2
  double vol = 0.0;
  for (double m : g.lumped) vol += m;
  CHECK(vol == Catch::Approx(0.75).epsilon(1e-12));
  CHECK_THROWS_AS(build_grid(DomainSpec::lshape(), 7), std::invalid_argument);
}

TEST_CASE("lumped mass sums to the domain volume") {
  for (int d : {2, 3}) {
    Grid g = build_grid(DomainSpec::box(d), 6);
    double vol = 0.0;
    for (double m : g.lumped) vol += m;
    CHECK(vol == Catch::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("Dirichlet classification") {
  Grid g = build_grid(full_dirichlet_box(2), 4);
  CHECK(g.n_free() == 9);  // (n-1)^2 interior vertices
  for (int v : g.free_verts) {
    CHECK(g.verts[v](0) > 0.0);
    CHECK(g.verts[v](0) < 1.0);
    CHECK(g.verts[v](1) > 0.0);
    CHECK(g.verts[v](1) < 1.0);
  }
}

TEST_CASE("Neumann Laplacian annihilates constants") {
  for (int d : {2, 3}) {
    Grid g = build_grid(DomainSpec::box(d, false), 5);
    auto op = assemble(identity_field(d), g);
    CVector ones = CVector::Ones(g.n_free());
    CHECK((op.K * ones).lpNorm<Eigen::Infinity>() < 1e-12);
  }
}

TEST_CASE("Dirichlet Laplacian ground eigenvalue approaches 2 pi^2") {
  // smallest generalized eigenvalue of (K, M) via inverse power iteration
  Grid g = build_grid(full_dirichlet_box(2), 24);
  auto op = assemble(identity_field(2), g);
  ResolventFactorization fac(op, Complex(0, 0));
  CVector x = CVector::Ones(g.n_free()).cwiseQuotient(
      CVector::Constant(g.n_free(), std::sqrt(double(g.n_free()))));
  double lam = 0.0;
  for (int it = 0; it < 60; ++it) {
    CVector y = fac.solve(op.Mdiag.cast<Complex>().cwiseProduct(x));
    double ny = y.norm();
    x = y / ny;
    lam = std::real(x.dot(op.K * x)) /
          std::real(x.dot(op.Mdiag.cast<Complex>().cwiseProduct(x)));
  }
  CHECK(lam == Catch::Approx(2.0 * pi * pi).epsilon(0.01));
}

TEST_CASE("assembly is linear in the coefficient: scalar rotation") {
  double phi = 0.7;
  Grid g = build_grid(full_dirichlet_box(2), 6);
  auto op_real = assemble(identity_field(2), g);
  auto op_rot = assemble(make_scalar_rotation(phi, 2), g);
  SparseC expect = std::polar(1.0, phi) * op_real.K;
  CHECK((SparseC(op_rot.K - expect)).coeffs().cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("adjoint coefficient gives the Hermitian adjoint stiffness") {
  Rng rng(99);
  CMatrix mu = CMatrix::Identity(2, 2);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      mu(i, j) += 0.3 * Complex(gaussian_vector(rng, 1)(0), gaussian_vector(rng, 1)(0));
  Grid g = build_grid(full_dirichlet_box(2), 5);
  auto op = assemble(make_constant(mu), g);
  auto op_adj = assemble(make_constant(CMatrix(mu.adjoint())), g);
  SparseC diff = SparseC(op_adj.K - SparseC(op.K.adjoint()));
  CHECK(diff.coeffs().cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("discrete form stays in the coefficient sector") {
  auto field = make_scalar_rotation(pi / 3.0, 2);
  Grid g = build_grid(full_dirichlet_box(2), 8);
  auto op = assemble(field, g);
  Rng rng(7);
  for (int k = 0; k < 100; ++k) {
    CVector u = gaussian_cvector(rng, g.n_free());
    Complex q = u.dot(op.K * u);  // <Ku, u> with Eigen's conjugation on u
    if (std::abs(q) < 1e-14) continue;
    CHECK(std::abs(std::arg(q)) <= op.theta0 + 1e-9);
  }
}

TEST_CASE("lp_norm of constants") {
  Grid g = build_grid(DomainSpec::box(2), 6);
  DiscreteFunction one = interpolate(g, [](const Point&) { return Complex(1, 0); });
  CHECK(lp_norm(one, 2.0) == Catch::Approx(1.0).epsilon(1e-12));
  CHECK(lp_norm(one, 5.0) == Catch::Approx(1.0).epsilon(1e-12));

  Grid gl = build_grid(DomainSpec::lshape(), 8);
  DiscreteFunction onel = interpolate(gl, [](const Point&) { return Complex(1, 0); });
  CHECK(lp_norm(onel, 2.0) == Catch::Approx(std::sqrt(0.75)).epsilon(1e-12));
}

TEST_CASE("lp_norm homogeneity") {
  Grid g = build_grid(DomainSpec::box(2), 5);
  Rng rng(3);
  DiscreteFunction u;
  u.grid = &g;
  u.values = gaussian_cvector(rng, g.verts.size());
  for (double p : {1.5, 2.0, 3.0, 7.0}) {
    DiscreteFunction su = u;
    su.values *= Complex(0.0, -2.5);
    CHECK(lp_norm(su, p) == Catch::Approx(2.5 * lp_norm(u, p)).epsilon(1e-12));
  }
}

TEST_CASE("gradient of linear and constant functions") {
  for (int d : {2, 3}) {
    Grid g = build_grid(DomainSpec::box(d), 4);
    DiscreteFunction lin =
        interpolate(g, [](const Point& x) { return Complex(x(0), 0.0); });
    CellField grad = gradient(lin);
    for (const auto& gv : grad.values) {
      CHECK(std::abs(gv(0) - 1.0) < 1e-13);
      for (int a = 1; a < d; ++a) CHECK(std::abs(gv(a)) < 1e-13);
    }
    DiscreteFunction cst = interpolate(g, [](const Point&) { return Complex(4, 1); });
    CHECK(lp_norm(gradient(cst), 2.0) < 1e-13);
  }
}

TEST_CASE("gradient L2 norm of the sine interpolant") {
  // analytic oracle: || grad(sin(pi x) sin(pi y)) ||_{L2}^2 = pi^2 / 2
  Grid g = build_grid(DomainSpec::box(2), 64);
  DiscreteFunction u = interpolate(g, [](const Point& x) {
    return Complex(std::sin(pi * x(0)) * std::sin(pi * x(1)), 0.0);
  });
  double n2 = lp_norm(gradient(u), 2.0);
  CHECK(n2 * n2 == Catch::Approx(pi * pi / 2.0).epsilon(5e-3));
}

TEST_CASE("patch nesting and restriction consistency") {
  Grid g = build_grid(DomainSpec::box(2), 16);
  Point x0(0.4, 0.6, 0.0);
  auto inner = g.patch_cells(x0, 0.15);
  auto outer = g.patch_cells(x0, 0.3);
  for (int c : inner) CHECK(std::count(outer.begin(), outer.end(), c) == 1);
  CHECK(inner.size() < outer.size());

  DiscreteFunction one = interpolate(g, [](const Point&) { return Complex(1, 0); });
  auto verts = g.patch_verts(x0, 0.15);
  double mass = 0.0;
  for (int v : verts) mass += g.lumped[v];
  CHECK(lp_norm(one, 2.0, &verts) == Catch::Approx(std::sqrt(mass)).epsilon(1e-12));
}

TEST_CASE("manufactured solution converges at order 2") {
  auto rep = manufactured_check({8, 16, 32}, 2);
  CHECK(rep.errors[0] < 0.05);
  for (double o : rep.orders) CHECK(o == Catch::Approx(2.0).margin(0.2));
  // n=16 -> 32 error ratio ~ 4
  CHECK(rep.errors[1] / rep.errors[2] == Catch::Approx(4.0).epsilon(0.2));
}
