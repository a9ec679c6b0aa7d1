#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "meshcert/functionals.hpp"
#include "meshcert/geometry.hpp"
#include "meshcert/kernels.hpp"
#include "meshcert/linalg.hpp"
#include "meshcert/stencils.hpp"

namespace meshcert {

// Square stiffness system for the Dirichlet problem: row i carries the test
// functional of node i — the method's Laplacian stencil at interior nodes,
// the identity at boundary nodes.
struct StiffnessSystem {
  SparseMatrix A;                 // N x M, here N = M with row k <-> node k
  NodeSet nodes;
  std::vector<Stencil> stencils;  // one per row; functional embedded
  std::string kernel_spec;
  std::string method;
};

// Interior-to-interior block B and interior-to-boundary block C of the
// Dirichlet split B u_I = f_I - C g_B; identity boundary rows are dropped.
struct DirichletSplit {
  SparseMatrix B;
  SparseMatrix C;
  std::vector<std::size_t> interior_nodes;  // row/column order of B
  std::vector<std::size_t> boundary_nodes;  // column order of C
};

struct StabilityEstimate {
  double value = 0.0;
  std::string method;  // "svd2" | "pinv_inf" | "condest_inf"
  std::string norm_p = "inf";
  std::string norm_q = "inf";
};

// Builds one row per node; interior stencil construction parallelizes over
// rows. Stencil failures are annotated with the offending node index.
StiffnessSystem assemble(const NodeSet& nodes, const Kernel& K,
                         const MethodSpec& method, std::size_t threads = 1);

// C_S in the (2,2) norm pair: 1 / sigma_min.
StabilityEstimate stability_svd(const DenseMatrix& a);

// C_S in the (inf, inf) norm pair: max absolute row sum of the
// pseudoinverse; exactly the inverse for square systems.
StabilityEstimate stability_pinv_inf(const DenseMatrix& a);

// Hager-Higham estimate of the same (inf, inf) constant for square systems
// through one LU factorization; non-square systems route to
// stability_pinv_inf with a cost warning on stderr.
StabilityEstimate stability_condest(const SparseMatrix& a);

DirichletSplit dirichlet_split(const StiffnessSystem& system);

}  // namespace meshcert
