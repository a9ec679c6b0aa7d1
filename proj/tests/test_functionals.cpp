#include "meshcert/functionals.hpp"

#include <cmath>
#include <sstream>

#include "doctest.h"
#include "meshcert/error.hpp"
#include "meshcert/geometry.hpp"

using meshcert::Functional;
using meshcert::Operator;
using meshcert::Stencil;
using meshcert::Vector;

namespace {

// Classical five-point star at the origin with the center node last,
// assembled by hand so this test does not depend on the stencil builders.
Stencil unit_five_point() {
  Stencil s;
  s.functional = {{0.0, 0.0}, Operator::laplacian};
  s.support = {0, 1, 2, 3, 4};
  s.points = {{1.0, 0.0}, {-1.0, 0.0}, {0.0, 1.0}, {0.0, -1.0}, {0.0, 0.0}};
  s.weights = {1.0, 1.0, 1.0, 1.0, -4.0};
  s.h = 1.0;
  s.exactness = 4;
  return s;
}

}  // namespace

TEST_CASE("operator metadata") {
  CHECK(meshcert::operator_order(Operator::identity) == 0);
  CHECK(meshcert::operator_order(Operator::laplacian) == 2);
  CHECK(meshcert::operator_name(Operator::laplacian) == "laplacian");
  CHECK(meshcert::parse_operator("identity") == Operator::identity);
  CHECK_THROWS_AS(meshcert::parse_operator("gradient"), meshcert::error);
}

TEST_CASE("apply evaluates the nodal approximation") {
  const Stencil star = unit_five_point();

  // u(x,y) = x^2 + y^2 sampled at the five nodes; Laplacian is 4 and the
  // star is exact on quadratics.
  Vector u(5);
  for (std::size_t j = 0; j < 5; ++j) {
    u[j] = star.points[j][0] * star.points[j][0] +
           star.points[j][1] * star.points[j][1];
  }
  CHECK(meshcert::apply(star, u) == doctest::Approx(4.0).epsilon(1e-15));

  Stencil dirichlet;
  dirichlet.functional = {{1.0, 0.0}, Operator::identity};
  dirichlet.support = {3};
  dirichlet.points = {{1.0, 0.0}};
  dirichlet.weights = {1.0};
  const Vector values = {10.0, 20.0, 30.0, 40.0};
  CHECK(meshcert::apply(dirichlet, values) == 40.0);

  Stencil zero = unit_five_point();
  zero.weights.assign(5, 0.0);
  CHECK(meshcert::apply(zero, u) == 0.0);
}

TEST_CASE("apply is linear in the value vector") {
  const Stencil star = unit_five_point();
  const Vector u = {0.3, -1.2, 2.0, 0.7, -0.5};
  const Vector v = {1.1, 0.4, -0.9, 2.2, 0.6};
  Vector combo(5);
  for (std::size_t j = 0; j < 5; ++j) combo[j] = 2.0 * u[j] - 3.0 * v[j];
  CHECK(meshcert::apply(star, combo) ==
        doctest::Approx(2.0 * meshcert::apply(star, u) -
                        3.0 * meshcert::apply(star, v))
            .epsilon(1e-14));
}

TEST_CASE("apply rejects value vectors that omit support nodes") {
  Stencil s = unit_five_point();
  s.support = {0, 1, 2, 3, 9};
  const Vector five(5, 1.0);
  CHECK_THROWS_AS(meshcert::apply(s, five), meshcert::error);
  try {
    meshcert::apply(s, five);
  } catch (const meshcert::error& e) {
    CHECK(e.code() == meshcert::errc::dimension_mismatch);
  }
}

TEST_CASE("monomial basis enumeration") {
  const auto deg3 = meshcert::monomial_exponents(3);
  REQUIRE(deg3.size() == 6);
  CHECK(deg3[0] == std::array<std::size_t, 2>{0, 0});
  CHECK(deg3[1] == std::array<std::size_t, 2>{1, 0});
  CHECK(deg3[2] == std::array<std::size_t, 2>{0, 1});
  CHECK(deg3[3] == std::array<std::size_t, 2>{2, 0});
  CHECK(deg3[4] == std::array<std::size_t, 2>{1, 1});
  CHECK(deg3[5] == std::array<std::size_t, 2>{0, 2});
  CHECK(meshcert::monomial_exponents(6).size() == 21);
}

TEST_CASE("five-point star is order-4 exact and no more") {
  const Stencil star = unit_five_point();
  for (std::size_t k = 1; k <= 4; ++k) {
    CHECK(meshcert::exactness_defect(star, k) <= 1e-12);
  }
  // Order 5 fails on x^4: the true Laplacian 12x^2 vanishes at the anchor
  // while the star returns 2.
  CHECK(meshcert::exactness_defect(star, 5) ==
        doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("exactness defect is scale-aware") {
  // The same star shrunk to h = 0.01 with h^-2 weights must still pass; the
  // monomials are rescaled to the support radius, so no conditioning blowup.
  Stencil star = unit_five_point();
  const double h = 0.01;
  for (auto& p : star.points) {
    p[0] *= h;
    p[1] *= h;
  }
  for (auto& w : star.weights) w /= h * h;
  star.h = h;
  CHECK(meshcert::exactness_defect(star, 4) <= 1e-12);

  Stencil ident;
  ident.functional = {{0.25, -0.5}, Operator::identity};
  ident.support = {0};
  ident.points = {{0.25, -0.5}};
  ident.weights = {1.0};
  CHECK(meshcert::exactness_defect(ident, 1) == 0.0);
}

TEST_CASE("stencil JSON round trip") {
  // The unit star transplanted onto the h = 0.5 grid: node order matches the
  // point order of unit_five_point() and the weights carry the h^-2 factor.
  Stencil star = unit_five_point();
  star.support = {13, 11, 17, 7, 12};
  star.h = 0.5;
  for (auto& w : star.weights) w *= 4.0;
  std::stringstream buf;
  meshcert::write_stencil_json(star, buf);

  const Stencil back = meshcert::read_stencil_json(buf);
  CHECK(back.functional.op == Operator::laplacian);
  CHECK(back.functional.anchor == star.functional.anchor);
  CHECK(back.support == star.support);
  REQUIRE(back.weights.size() == star.weights.size());
  for (std::size_t j = 0; j < star.weights.size(); ++j) {
    CHECK(back.weights[j] == star.weights[j]);
  }
  CHECK(back.h == star.h);
  CHECK(back.points.empty());

  meshcert::NodeSet grid = meshcert::gen_grid(0.5);
  Stencil bound = back;
  meshcert::bind_points(bound, grid);
  REQUIRE(bound.points.size() == 5);
  CHECK(bound.points[4][0] == 0.0);  // node 12 is the grid center
  CHECK(bound.points[4][1] == 0.0);
  CHECK(bound.points[0][0] == 0.5);
  CHECK(meshcert::exactness_defect(bound, 4) <= 1e-12);
}

TEST_CASE("stencil JSON rejects malformed records") {
  auto read = [](const std::string& text) {
    std::istringstream in(text);
    return meshcert::read_stencil_json(in);
  };
  CHECK_THROWS_AS(read("not json"), meshcert::error);
  CHECK_THROWS_AS(
      read(R"({"anchor":[0,0],"operator":"laplacian","weights":[1],"h":1})"),
      meshcert::error);
  CHECK_THROWS_AS(
      read(
          R"({"anchor":[0,0],"operator":"laplacian","support_indices":[1,2],"weights":[1],"h":1})"),
      meshcert::error);
  CHECK_THROWS_AS(
      read(
          R"({"anchor":[0],"operator":"laplacian","support_indices":[1],"weights":[1],"h":1})"),
      meshcert::error);

  meshcert::NodeSet grid = meshcert::gen_grid(1.0);
  Stencil s;
  s.functional = {{0.0, 0.0}, Operator::identity};
  s.support = {42};
  s.weights = {1.0};
  CHECK_THROWS_AS(meshcert::bind_points(s, grid), meshcert::error);
}
