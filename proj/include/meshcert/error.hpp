#pragma once

#include <stdexcept>
#include <string>

namespace meshcert {

// Failure classification. Input-side codes map to CLI exit code 2, numerical
// failures to exit code 3 (see is_input_error).
enum class errc {
  invalid_spacing,          // grid spacing does not divide the domain
  too_few_nodes,            // request exceeds available nodes
  rank_deficient,           // sigma_min/sigma_max below the rank tolerance
  no_solution,              // inconsistent linear system
  singular_matrix,          // factorization hit a zero pivot
  invalid_smoothness,       // kernel parameters violate 2m > d / nu > 0
  insufficient_smoothness,  // requested functional needs more derivatives
  exactness_violated,       // polyharmonic stencil lacks order-k exactness
  geometry_degenerate,      // non-unisolvent node configuration
  non_convergence,          // iteration cap reached
  nothing_to_split,         // Dirichlet split without boundary rows
  dimension_mismatch,       // incompatible operand shapes
  bad_input,                // malformed spec strings, files, CLI arguments
};

class error : public std::runtime_error {
 public:
  error(errc code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  errc code() const noexcept { return code_; }

 private:
  errc code_;
};

[[noreturn]] inline void fail(errc code, const std::string& message) {
  throw error(code, message);
}

// True for conditions caused by what the caller asked for (exit code 2), as
// opposed to numerical breakdown discovered along the way (exit code 3).
inline bool is_input_error(errc code) noexcept {
  switch (code) {
    case errc::invalid_spacing:
    case errc::too_few_nodes:
    case errc::invalid_smoothness:
    case errc::insufficient_smoothness:
    case errc::dimension_mismatch:
    case errc::bad_input:
      return true;
    default:
      return false;
  }
}

inline const char* errc_name(errc code) noexcept {
  switch (code) {
    case errc::invalid_spacing: return "invalid_spacing";
    case errc::too_few_nodes: return "too_few_nodes";
    case errc::rank_deficient: return "rank_deficient";
    case errc::no_solution: return "no_solution";
    case errc::singular_matrix: return "singular_matrix";
    case errc::invalid_smoothness: return "invalid_smoothness";
    case errc::insufficient_smoothness: return "insufficient_smoothness";
    case errc::exactness_violated: return "exactness_violated";
    case errc::geometry_degenerate: return "geometry_degenerate";
    case errc::non_convergence: return "non_convergence";
    case errc::nothing_to_split: return "nothing_to_split";
    case errc::dimension_mismatch: return "dimension_mismatch";
    case errc::bad_input: return "bad_input";
  }
  return "unknown";
}

}  // namespace meshcert
