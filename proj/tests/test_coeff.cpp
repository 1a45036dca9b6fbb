#include <catch2/catch_amalgamated.hpp>

#include "pell/coeff.hpp"

using namespace pell;

TEST_CASE("scalar rotation basics") {
  auto f = make_scalar_rotation(0.0, 3);
  CHECK(f.c_lower == Catch::Approx(1.0));
  CHECK(f.c_upper == Catch::Approx(1.0));
  CHECK(f.eval(Point::Zero()).isApprox(CMatrix::Identity(3, 3)));

  auto g = make_scalar_rotation(pi / 3.0, 3);
  CHECK(g.c_lower == Catch::Approx(0.5));
  CHECK(g.c_upper == Catch::Approx(1.0));

  CHECK_THROWS_AS(make_scalar_rotation(pi / 2.0, 3), std::invalid_argument);
  CHECK_THROWS_AS(make_scalar_rotation(-pi / 2.0 - 0.1, 2), std::invalid_argument);
}

TEST_CASE("checkerboard constants") {
  CMatrix one = CMatrix::Identity(2, 2);
  auto f = make_checkerboard({one}, 1, 2);
  CHECK(f.kind == FieldKind::Constant);
  CHECK(f.c_lower == Catch::Approx(1.0));

  CMatrix ten = 10.0 * CMatrix::Identity(2, 2);
  auto g = make_checkerboard({one, ten}, 2, 2);
  CHECK(g.c_lower == Catch::Approx(1.0));
  CHECK(g.c_upper == Catch::Approx(10.0));
  // parity pattern: (0,0) tile -> first value, (1,0) -> second
  CHECK(g.eval(Point(0.25, 0.25, 0)).isApprox(one));
  CHECK(g.eval(Point(0.75, 0.25, 0)).isApprox(ten));
  CHECK(g.eval(Point(0.75, 0.75, 0)).isApprox(one));

  CMatrix indef = -CMatrix::Identity(2, 2);
  CHECK_THROWS_AS(make_checkerboard({one, indef}, 2, 2), std::invalid_argument);
}

TEST_CASE("validate_ellipticity on exact fields") {
  auto id = make_scalar_rotation(0.0, 2);
  auto rep = validate_ellipticity(id, 16);
  CHECK(rep.empirical_c_lower == Catch::Approx(1.0).margin(1e-12));
  CHECK(rep.empirical_c_upper == Catch::Approx(1.0).margin(1e-12));
  CHECK_FALSE(rep.violation);

  auto rot = make_scalar_rotation(pi / 3.0, 3);
  auto rep2 = validate_ellipticity(rot, 16);
  CHECK(rep2.empirical_c_lower == Catch::Approx(0.5).margin(1e-9));
  CHECK_FALSE(rep2.violation);

  // declared constant too optimistic -> violation flag
  auto bad = rot;
  bad.c_lower = 0.9;
  CHECK(validate_ellipticity(bad, 16).violation);

  CHECK_THROWS_AS(validate_ellipticity(id, 0), std::invalid_argument);
}

TEST_CASE("ellipticity constants scale linearly") {
  auto f = make_scalar_rotation(pi / 6.0, 2);
  for (double t : {0.5, 2.0, 7.0}) {
    auto g = scale_field(f, t);
    auto rep = validate_ellipticity(g, 8);
    CHECK(rep.empirical_c_lower == Catch::Approx(t * std::cos(pi / 6.0)));
    CHECK(rep.empirical_c_upper == Catch::Approx(t));
  }
}

TEST_CASE("table file round trip") {
  const char* path = "coeff_table_test.txt";
  {
    std::ofstream out(path);
    out << "# 2x2 tiles, re then im\n";
    out << "1 0 0 1  0 0 0 0\n";
    out << "2 0 0 2  0.5 0 0 0.5\n";
    out << "2 0 0 2  0.5 0 0 0.5\n";
    out << "1 0 0 1  0 0 0 0\n";
  }
  auto vals = load_table_file(path, 2);
  REQUIRE(vals.size() == 4);
  CHECK(vals[1](0, 0) == Complex(2.0, 0.5));
  auto f = make_table(vals, 2, 2);
  CHECK(f.samples.size() == 4);
  CHECK(f.eval(Point(0.25, 0.25, 0))(0, 0) == Complex(1.0, 0.0));
  CHECK(f.eval(Point(0.75, 0.25, 0))(0, 0) == Complex(2.0, 0.5));
  std::remove(path);

  CHECK_THROWS_AS(make_table(vals, 3, 2), std::invalid_argument);
}

TEST_CASE("perturbation wrapper") {
  Perturbation pert;
  pert.base = make_scalar_rotation(0.0, 2);
  pert.nu = [](const Point&) {
    return CMatrix(Complex(0, 0.1) * CMatrix::Identity(2, 2));
  };
  pert.nu_norm = 0.1;
  auto f = pert.perturbed();
  CHECK(f.eval(Point::Zero())(0, 0) == Complex(1.0, 0.1));
  CHECK(f.c_lower == Catch::Approx(0.9));
}

TEST_CASE("domain spec faces and derived radii") {
  auto box = DomainSpec::box(2);
  CHECK(box.n_faces() == 4);
  CHECK(box.volume() == Catch::Approx(1.0));
  CHECK(box.alpha() == Catch::Approx(std::sqrt(2.0)));
  CHECK(box.beta() == Catch::Approx(4.0 * std::sqrt(2.0)));

  auto L = DomainSpec::lshape({0, 2});
  CHECK(L.n_faces() == 6);
  CHECK(L.volume() == Catch::Approx(0.75));
  CHECK(L.face_is_dirichlet(0));
  CHECK_FALSE(L.face_is_dirichlet(1));
}
