#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>

#include "meshcert/consistency.hpp"
#include "meshcert/kernels.hpp"
#include "meshcert/linalg.hpp"
#include "meshcert/stability.hpp"

namespace meshcert {

// Relative error bound record: ||u - u~||_p / ||u||_K <= bound, with
// bound = (1 + K) * C_S * ||c||_q exactly as stored.
struct Certificate {
  double stability = 0.0;         // C_S
  std::string stability_method;   // svd2 | pinv_inf | condest_inf
  double consistency_norm = 0.0;  // ||c||_q over every assembled row
  double admissibility = 0.0;     // K >= 0; 0 means the system is solved exactly
  double bound = 0.0;             // (1 + admissibility) * stability * consistency_norm
  std::string norm_p = "inf";
  std::string norm_q = "inf";
  std::string kernel_spec;
  std::string method;
  std::string digest;        // node-set digest, see node_digest()
  std::uint64_t seed = 0;    // node-generation seed, recorded for reproduction
};

// Sharpness construction: a data vector and a pair of admissible solutions
// whose error attains the lower end of the certified sandwich
//   (K-1) C_S ||u*||_K ||c||_inf <= ||u* - u~||_inf
//                                <= (K+1) C_S ||u*||_K ||c||_inf.
struct WorstCase {
  Vector u_star;   // nodal values of the representer-based exact solution
  Vector u_tilde;  // perturbed admissible solution u* + alpha C_S u_S
  Vector u_s;      // worst stability vector, ||u_S||_inf = 1
  Vector f;        // exact data f_k = lambda_k(u*)
  double achieved_K = 0.0;           // ||A u~ - f|| / ||A u* - f||
  double stability = 0.0;            // exact ||A^{-1}||_inf
  double c_norm = 0.0;               // ||c||_inf
  double u_star_native_norm = 0.0;   // ||u*||_K = c(lambda_j)
  double error = 0.0;                // ||u* - u~||_inf
  double lower = 0.0;                // (K-1) C_S ||u*||_K ||c||_inf
  double upper = 0.0;                // (K+1) C_S ||u*||_K ||c||_inf
  std::size_t worst_row = 0;         // j = argmax_k c_k
};

// r = f - A u~ together with ||r||_q (q = 2 selects the Euclidean norm,
// anything else the max norm).
std::pair<Vector, double> residual(const StiffnessSystem& system,
                                   const Vector& u_tilde, const Vector& f,
                                   int q);

// K(A) = ||A u~ - f||_q / ||A u* - f||_q, or 0 when the denominator
// vanishes (f attainable exactly).
double admissibility_K(const StiffnessSystem& system, const Vector& u_tilde,
                       const Vector& f, const Vector& u_star, int q);

// Assembles the bound from its factors; descriptor fields (kernel, method,
// digest, seed) are left for the caller to fill.
Certificate error_bound(const StabilityEstimate& stability, double c_norm,
                        double K);

// Full pipeline on an assembled system: consistency over every row, then
// stability (q = 2 -> SVD, otherwise condest on the square matrix), then the
// bound at the given admissibility constant.
Certificate certify(const StiffnessSystem& system, const Kernel& K,
                    double admissibility, int q);

// Sharpness worst case at target admissibility K > 1 on a square
// nonsingular system.  u_S realizes ||A^{-1}||_inf exactly through the
// sign-vector construction; u* is built from the native-space representer of
// the worst consistency functional; f holds exact functional values of u*.
WorstCase worst_case(const StiffnessSystem& system, const Kernel& K,
                     double K_target);

// FNV-1a (64-bit) over the coordinate bit patterns and boundary tags.
std::string node_digest(const NodeSet& nodes);

// Deterministic JSON report with every factor of the bound.
void write_certificate_json(const Certificate& cert, std::ostream& out);

}  // namespace meshcert
