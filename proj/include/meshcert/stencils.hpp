#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "meshcert/functionals.hpp"
#include "meshcert/geometry.hpp"
#include "meshcert/kernels.hpp"

namespace meshcert {

// Classical five-point Laplacian star at the origin: weights
// h^-2 * (1, 1, 1, 1, -4) on the axis cross, center node last.  Exact of
// order 4.
Stencil five_point_star(double h);

// Kernel-optimal weights under polynomial exactness of order k (0 selects
// the kernel's own order): minimizes the native-space quadratic form over
// all order-k-exact weight vectors via the saddle-point system
// [Phi P^T; P 0] (a; beta) = (lambda K at nodes; lambda on monomials),
// solved in a shifted, unit-normalized frame.  The stencil's support indices
// are positions into `nodes`.
Stencil optimal_weights(const Kernel& K, const Functional& lambda,
                        const std::vector<Point>& nodes, std::size_t k = 0);

// Any order-k-exact weight vector with at most dim(polys of degree < k)
// nonzero entries, from a column-pivoted basic solution of the exactness
// system.  No kernel, no optimality.
Stencil basic_exact_weights(const Functional& lambda,
                            const std::vector<Point>& nodes, std::size_t k);

// Greedy support selection: seed with the smallest nearest-first subset
// admitting order-k exactness, then repeatedly add the candidate whose
// inclusion reduces the quadratic form most; stop when the relative
// reduction drops below 5% or the support reaches n_max.
Stencil greedy_weights(const Kernel& K, const Functional& lambda,
                       const std::vector<Point>& nodes, std::size_t n_max,
                       std::size_t k = 0);

// Exact scaling transport of a unit-scale stencil: weights pick up h^-p
// (p = operator order), support coordinates contract toward the anchor by h.
Stencil rescale(const Stencil& unit_stencil, double h);

// H = 1 / (mean pairwise distance); returns (H * (nodes - anchor), H).
std::pair<std::vector<Point>, double> normalize_to_unit(
    const std::vector<Point>& nodes, const Point& anchor);

// Method spec strings: "fivepoint" | "optimal:n=<neighbors>" |
// "basic:n=<neighbors>" | "greedy:n=<max>".
struct MethodSpec {
  enum class Kind { fivepoint, optimal, basic, greedy };
  Kind kind = Kind::fivepoint;
  std::size_t neighbors = 0;
};

MethodSpec parse_method_spec(const std::string& spec);
std::string method_spec_string(const MethodSpec& method);

}  // namespace meshcert
