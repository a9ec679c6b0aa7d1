#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <tuple>
#include <vector>

#include "meshcert/error.hpp"

namespace meshcert {

using Vector = std::vector<double>;

double dot(const Vector& x, const Vector& y);
double norm2(const Vector& x);
double norm1(const Vector& x);
double norm_inf(const Vector& x);
// Dispatch for the (p,q)-norm pairs used throughout: q is 2 or infinity.
double norm_q(const Vector& x, int q);

// Row-major dense matrix. Entries are expected to stay finite; operations that
// depend on it (svd, factorizations) check via is_finite().
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0);

  static DenseMatrix identity(std::size_t n);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  double& operator()(std::size_t i, std::size_t j) {
    return entries_[i * cols_ + j];
  }
  double operator()(std::size_t i, std::size_t j) const {
    return entries_[i * cols_ + j];
  }

  const std::vector<double>& entries() const noexcept { return entries_; }

  Vector multiply(const Vector& x) const;             // A x
  Vector multiply_transposed(const Vector& x) const;  // A^T x
  DenseMatrix multiply(const DenseMatrix& other) const;
  DenseMatrix transposed() const;

  double frobenius_norm() const;
  double inf_norm() const;  // max absolute row sum
  double one_norm() const;  // max absolute column sum
  bool is_finite() const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> entries_;
};

// Thin SVD A = U diag(sigma) V^T with sigma sorted descending, U: rows x k,
// V: cols x k, k = min(rows, cols). Columns of U and V are orthonormal.
struct SvdResult {
  DenseMatrix u;
  Vector sigma;
  DenseMatrix v;
};

// One-sided Jacobi SVD. Throws errc::non_convergence if the sweep cap is hit
// before all column pairs are numerically orthogonal.
SvdResult svd(const DenseMatrix& a);

// Least-squares minimizer of ||Ax - b||_2 for full-column-rank A (rows >=
// cols). Rank is tested as sigma_min/sigma_max < 1e-12 -> errc::rank_deficient.
Vector solve_least_squares(const DenseMatrix& a, const Vector& b);

// A "basic" solution of a consistent (typically underdetermined) system: at
// most rank(A) nonzero entries, chosen by column-pivoted elimination taking
// the largest-magnitude pivot among the remaining columns at each step (ties
// toward the lowest index). Throws errc::no_solution when the residual check
// ||Ax-b|| <= 1e-10 ||b|| fails.
Vector basic_solution(const DenseMatrix& a, const Vector& b);

// Moore-Penrose pseudoinverse of a full-column-rank matrix via SVD.
DenseMatrix pseudoinverse(const DenseMatrix& a);

// Dense LU with partial pivoting; solves with A and A^T share the factors.
class LuFactorization {
 public:
  static LuFactorization factor(const DenseMatrix& a);

  Vector solve(const Vector& b) const;             // A x = b
  Vector solve_transposed(const Vector& b) const;  // A^T x = b
  std::size_t size() const noexcept { return n_; }

 private:
  std::size_t n_ = 0;
  std::vector<double> lu_;        // packed L (unit diag, below) and U
  std::vector<std::size_t> piv_;  // row swap applied at step k
};

using ApplyFn = std::function<Vector(const Vector&)>;

// Hager-Higham style lower-bound estimate of ||A^{-1}||_1, given black-box
// solvers for A x = b and A^T x = b. At most five sign-vector sweeps, then the
// estimate is compared against the standard alternating-sign probe vector.
double onenorm_estimate(const ApplyFn& solve, const ApplyFn& solve_transposed,
                        std::size_t n);

// Compressed sparse row matrix; column indices strictly increase within a row.
class SparseMatrix {
 public:
  SparseMatrix() = default;

  using Triplet = std::tuple<std::size_t, std::size_t, double>;
  // Duplicate (i,j) entries are summed; exact zeros are kept (structural).
  static SparseMatrix from_triplets(std::size_t rows, std::size_t cols,
                                    std::vector<Triplet> triplets);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t nnz() const noexcept { return values_.size(); }

  const std::vector<std::size_t>& row_offsets() const noexcept {
    return row_offsets_;
  }
  const std::vector<std::size_t>& col_indices() const noexcept {
    return col_indices_;
  }
  const Vector& values() const noexcept { return values_; }

  Vector multiply(const Vector& x) const;
  DenseMatrix to_dense() const;
  double inf_norm() const;  // max absolute row sum

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<std::size_t> row_offsets_{0};
  std::vector<std::size_t> col_indices_;
  Vector values_;
};

// MatrixMarket coordinate format (1-based indices, real general).
void write_matrix_market(const SparseMatrix& a, std::ostream& out);

}  // namespace meshcert
