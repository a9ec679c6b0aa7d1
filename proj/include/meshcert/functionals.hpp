#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "meshcert/geometry.hpp"
#include "meshcert/linalg.hpp"

namespace meshcert {

// Differential operator applied at a point functional's anchor.  The enum is
// extensible (weak-form functionals would slot in here), but only the strong
// identity/Laplacian pair is implemented.
enum class Operator {
  identity,
  laplacian,
};

// Order p of the operator as a homogeneous differential operator.
std::size_t operator_order(Operator op);

std::string operator_name(Operator op);
Operator parse_operator(const std::string& name);

// A test functional lambda = delta_anchor composed with the operator.
struct Functional {
  Point anchor{0.0, 0.0};
  Operator op = Operator::identity;
};

// Nodal approximation lambda~(u) = sum_j weights[j] * u(x_{support[j]}).
// `points` snapshots the support coordinates so a stencil can be evaluated
// without the originating node set; it is rebuilt by bind_points() after
// deserialization.
struct Stencil {
  Functional functional;
  std::vector<std::size_t> support;
  std::vector<Point> points;
  Vector weights;
  double h = 1.0;
  std::size_t exactness = 0;
};

// Dot product of the weights with the supported nodal values; `values` is
// indexed by global node index.
double apply(const Stencil& s, const Vector& values);

// Exponent pairs (a, b) with a + b < k, ordered by total degree and, within
// a degree, by descending x-exponent.  Shared by the exactness tests and the
// polynomial constraint blocks in the weight solvers.
std::vector<std::array<std::size_t, 2>> monomial_exponents(std::size_t k);

// Value of the centered, scaled monomial ((x - anchor) / scale)^e at x.
double monomial_value(const std::array<std::size_t, 2>& e, const Point& x,
                      const Point& anchor, double scale);

// The operator applied to that monomial, evaluated at the anchor: only the
// constant survives the identity and only the pure quadratics survive the
// Laplacian.
double monomial_action(Operator op, const std::array<std::size_t, 2>& e,
                       double scale);

// Worst defect |lambda(p) - lambda~(p)| over monomials of total degree < k,
// centered at the anchor and scaled to the support radius.
double exactness_defect(const Stencil& s, std::size_t k);

// Fill `points` from `support` using the given node set.
void bind_points(Stencil& s, const NodeSet& nodes);

// JSON record {anchor, operator, support_indices, weights, h}; `points` is
// not serialized.
void write_stencil_json(const Stencil& s, std::ostream& out);
Stencil read_stencil_json(std::istream& in);

}  // namespace meshcert
