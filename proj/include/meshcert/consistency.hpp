#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "meshcert/functionals.hpp"
#include "meshcert/geometry.hpp"
#include "meshcert/kernels.hpp"
#include "meshcert/linalg.hpp"

namespace meshcert {

// Worst-case consistency errors c(lambda_k) = Q(lambda_k, lambda~_k) of a
// family of stencils in the kernel's native space.
struct ConsistencyVector {
  Vector values;            // one entry per stencil, each >= 0 and finite
  std::string kernel_spec;  // native-space descriptor
};

// The native-space quadratic form
//   Q^2 = lambda^x lambda^y K - 2 sum_j a_j lambda_j^x lambda^y K
//       + sum_{j,l} a_j a_l lambda_j^x lambda_l^y K.
//
// Polyharmonic kernels induce only a seminorm, so the stencil must be exact
// of the kernel's order k; the evaluation then runs in the shifted
// unit-normalized frame and transports back through the exact scaling law,
// which sidesteps the log-scale cancellations of a direct evaluation.
// Whittle-Matern kernels evaluate directly with compensated summation.
// Raw negatives within 1e-8 of the leading term clamp to zero; anything
// worse aborts (it indicates a kernel or derivative bug).
double quadratic_form(const Kernel& K, const Functional& lambda,
                      const Stencil& s);

// Elementwise sqrt(quadratic_form); exact interpolation stencils (Dirichlet
// rows) yield exactly zero.
ConsistencyVector consistency_vector(const Kernel& K,
                                     const std::vector<Stencil>& stencils);

// Exact scaling transport: Q at scale h equals h^(m - d/2 - p) times Q at
// unit scale, for order-k-exact polyharmonic stencils.
double scaled_consistency(double q_unit, double h, double m, double d,
                          double p);

// CSV rows `node_index,x,y,c_value`, one per anchor node.
void write_consistency_field_csv(const NodeSet& nodes,
                                 const std::vector<std::size_t>& anchor_nodes,
                                 const Vector& c_values, std::ostream& out);

}  // namespace meshcert
