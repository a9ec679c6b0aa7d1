#include "meshcert/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>

namespace meshcert {

namespace {

constexpr double kRankTolerance = 1e-12;  // sigma_min/sigma_max cutoff

void check_same_size(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    std::ostringstream msg;
    msg << what << ": size " << a << " vs " << b;
    fail(errc::dimension_mismatch, msg.str());
  }
}

}  // namespace

double dot(const Vector& x, const Vector& y) {
  check_same_size(x.size(), y.size(), "dot");
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
  return s;
}

double norm2(const Vector& x) { return std::sqrt(dot(x, x)); }

double norm1(const Vector& x) {
  double s = 0.0;
  for (double v : x) s += std::fabs(v);
  return s;
}

double norm_inf(const Vector& x) {
  double s = 0.0;
  for (double v : x) s = std::max(s, std::fabs(v));
  return s;
}

double norm_q(const Vector& x, int q) {
  if (q == 2) return norm2(x);
  return norm_inf(x);
}

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), entries_(rows * cols, fill) {}

DenseMatrix DenseMatrix::identity(std::size_t n) {
  DenseMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Vector DenseMatrix::multiply(const Vector& x) const {
  check_same_size(x.size(), cols_, "DenseMatrix::multiply");
  Vector y(rows_, 0.0);
  for (std::size_t i = 0; i < rows_; ++i) {
    const double* row = entries_.data() + i * cols_;
    double s = 0.0;
    for (std::size_t j = 0; j < cols_; ++j) s += row[j] * x[j];
    y[i] = s;
  }
  return y;
}

Vector DenseMatrix::multiply_transposed(const Vector& x) const {
  check_same_size(x.size(), rows_, "DenseMatrix::multiply_transposed");
  Vector y(cols_, 0.0);
  for (std::size_t i = 0; i < rows_; ++i) {
    const double* row = entries_.data() + i * cols_;
    const double xi = x[i];
    for (std::size_t j = 0; j < cols_; ++j) y[j] += row[j] * xi;
  }
  return y;
}

DenseMatrix DenseMatrix::multiply(const DenseMatrix& other) const {
  check_same_size(cols_, other.rows_, "DenseMatrix::multiply(matrix)");
  DenseMatrix out(rows_, other.cols_);
  for (std::size_t i = 0; i < rows_; ++i) {
    for (std::size_t k = 0; k < cols_; ++k) {
      const double aik = (*this)(i, k);
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < other.cols_; ++j) {
        out(i, j) += aik * other(k, j);
      }
    }
  }
  return out;
}

DenseMatrix DenseMatrix::transposed() const {
  DenseMatrix out(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) out(j, i) = (*this)(i, j);
  return out;
}

double DenseMatrix::frobenius_norm() const {
  double s = 0.0;
  for (double v : entries_) s += v * v;
  return std::sqrt(s);
}

double DenseMatrix::inf_norm() const {
  double best = 0.0;
  for (std::size_t i = 0; i < rows_; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < cols_; ++j) s += std::fabs((*this)(i, j));
    best = std::max(best, s);
  }
  return best;
}

double DenseMatrix::one_norm() const {
  double best = 0.0;
  for (std::size_t j = 0; j < cols_; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < rows_; ++i) s += std::fabs((*this)(i, j));
    best = std::max(best, s);
  }
  return best;
}

bool DenseMatrix::is_finite() const {
  for (double v : entries_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

namespace {

// Appends an orthonormal column to u at position j (columns [0, j) are
// already orthonormal). Used to complete U when singular values vanish.
void complete_orthonormal_column(DenseMatrix& u, std::size_t j) {
  const std::size_t m = u.rows();
  Vector best;
  double best_norm = -1.0;
  for (std::size_t trial = 0; trial < m; ++trial) {
    Vector v(m, 0.0);
    v[trial] = 1.0;
    for (int pass = 0; pass < 2; ++pass) {
      for (std::size_t k = 0; k < j; ++k) {
        double proj = 0.0;
        for (std::size_t i = 0; i < m; ++i) proj += u(i, k) * v[i];
        for (std::size_t i = 0; i < m; ++i) v[i] -= proj * u(i, k);
      }
    }
    const double nrm = norm2(v);
    if (nrm > best_norm) {
      best_norm = nrm;
      best = std::move(v);
    }
    if (best_norm > 0.5) break;  // good enough, stop probing
  }
  for (std::size_t i = 0; i < m; ++i) u(i, j) = best[i] / best_norm;
}

SvdResult svd_tall(const DenseMatrix& a) {
  const std::size_t m = a.rows();
  const std::size_t n = a.cols();
  DenseMatrix w = a;
  DenseMatrix v = DenseMatrix::identity(n);

  // One-sided Jacobi: orthogonalize column pairs until a full sweep makes no
  // rotation. Pair (p,q) is skipped once |<wp,wq>| <= eps ||wp|| ||wq||.
  constexpr double kOrthTol = 1e-15;
  constexpr int kMaxSweeps = 60;
  bool converged = false;
  for (int sweep = 0; sweep < kMaxSweeps && !converged; ++sweep) {
    converged = true;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        double app = 0.0, aqq = 0.0, apq = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
          const double wp = w(i, p), wq = w(i, q);
          app += wp * wp;
          aqq += wq * wq;
          apq += wp * wq;
        }
        if (app == 0.0 || aqq == 0.0) continue;
        if (std::fabs(apq) <= kOrthTol * std::sqrt(app * aqq)) continue;
        converged = false;
        const double zeta = (aqq - app) / (2.0 * apq);
        const double t =
            (zeta >= 0.0 ? 1.0 : -1.0) / (std::fabs(zeta) + std::hypot(1.0, zeta));
        const double cs = 1.0 / std::sqrt(1.0 + t * t);
        const double sn = cs * t;
        for (std::size_t i = 0; i < m; ++i) {
          const double wp = w(i, p), wq = w(i, q);
          w(i, p) = cs * wp - sn * wq;
          w(i, q) = sn * wp + cs * wq;
        }
        for (std::size_t i = 0; i < n; ++i) {
          const double vp = v(i, p), vq = v(i, q);
          v(i, p) = cs * vp - sn * vq;
          v(i, q) = sn * vp + cs * vq;
        }
      }
    }
  }
  if (!converged) {
    fail(errc::non_convergence, "svd: Jacobi sweep cap reached");
  }

  Vector sigma(n);
  for (std::size_t j = 0; j < n; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < m; ++i) s += w(i, j) * w(i, j);
    sigma[j] = std::sqrt(s);
  }

  std::vector<std::size_t> order(n);
  for (std::size_t j = 0; j < n; ++j) order[j] = j;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    return sigma[x] > sigma[y];
  });

  SvdResult out;
  out.sigma.resize(n);
  out.u = DenseMatrix(m, n);
  out.v = DenseMatrix(n, n);
  const double sig_max = sigma.empty() ? 0.0 : sigma[order[0]];
  for (std::size_t j = 0; j < n; ++j) {
    const std::size_t src = order[j];
    out.sigma[j] = sigma[src];
    for (std::size_t i = 0; i < n; ++i) out.v(i, j) = v(i, src);
    if (sigma[src] > sig_max * 1e-14 && sigma[src] > 0.0) {
      for (std::size_t i = 0; i < m; ++i) out.u(i, j) = w(i, src) / sigma[src];
    } else {
      complete_orthonormal_column(out.u, j);
    }
  }
  return out;
}

}  // namespace

SvdResult svd(const DenseMatrix& a) {
  if (a.rows() == 0 || a.cols() == 0) {
    fail(errc::dimension_mismatch, "svd: empty matrix");
  }
  if (!a.is_finite()) fail(errc::bad_input, "svd: non-finite entries");
  if (a.rows() >= a.cols()) return svd_tall(a);
  SvdResult t = svd_tall(a.transposed());
  return SvdResult{std::move(t.v), std::move(t.sigma), std::move(t.u)};
}

Vector solve_least_squares(const DenseMatrix& a, const Vector& b) {
  if (a.rows() < a.cols()) {
    fail(errc::dimension_mismatch,
         "solve_least_squares: underdetermined system (use basic_solution)");
  }
  check_same_size(b.size(), a.rows(), "solve_least_squares rhs");
  SvdResult d = svd(a);
  const std::size_t k = d.sigma.size();
  if (d.sigma[0] == 0.0 || d.sigma[k - 1] / d.sigma[0] < kRankTolerance) {
    fail(errc::rank_deficient, "solve_least_squares: rank-deficient matrix");
  }
  Vector utb = d.u.multiply_transposed(b);
  for (std::size_t j = 0; j < k; ++j) utb[j] /= d.sigma[j];
  return d.v.multiply(utb);
}

Vector basic_solution(const DenseMatrix& a, const Vector& b) {
  const std::size_t rows = a.rows();
  const std::size_t cols = a.cols();
  check_same_size(b.size(), rows, "basic_solution rhs");

  DenseMatrix work = a;
  Vector rhs = b;
  double scale = 0.0;
  for (double v : work.entries()) scale = std::max(scale, std::fabs(v));
  const double pivot_tol = scale * 1e-12;

  std::vector<bool> col_used(cols, false);
  std::vector<std::pair<std::size_t, std::size_t>> pivots;  // (row, col)

  const std::size_t max_steps = std::min(rows, cols);
  for (std::size_t step = 0; step < max_steps; ++step) {
    // Full pivot over remaining rows x unused columns; ties keep the first
    // (lowest row, then lowest column), which makes [1 1] x = 2 pick x0.
    double best = 0.0;
    std::size_t pr = step, pc = cols;
    for (std::size_t i = step; i < rows; ++i) {
      for (std::size_t j = 0; j < cols; ++j) {
        if (col_used[j]) continue;
        const double mag = std::fabs(work(i, j));
        if (mag > best) {
          best = mag;
          pr = i;
          pc = j;
        }
      }
    }
    if (pc == cols || best <= pivot_tol) break;  // remaining block is zero

    if (pr != step) {
      for (std::size_t j = 0; j < cols; ++j) std::swap(work(step, j), work(pr, j));
      std::swap(rhs[step], rhs[pr]);
    }
    col_used[pc] = true;
    pivots.emplace_back(step, pc);

    const double piv = work(step, pc);
    for (std::size_t i = 0; i < rows; ++i) {
      if (i == step || work(i, pc) == 0.0) continue;
      const double factor = work(i, pc) / piv;
      for (std::size_t j = 0; j < cols; ++j) work(i, j) -= factor * work(step, j);
      work(i, pc) = 0.0;
      rhs[i] -= factor * rhs[step];
    }
  }

  Vector x(cols, 0.0);
  for (const auto& [row, col] : pivots) x[col] = rhs[row] / work(row, col);

  Vector res = a.multiply(x);
  double res_norm = 0.0;
  for (std::size_t i = 0; i < rows; ++i) {
    res_norm = std::max(res_norm, std::fabs(res[i] - b[i]));
  }
  if (res_norm > 1e-10 * norm_inf(b) + 1e-300) {
    fail(errc::no_solution, "basic_solution: inconsistent system");
  }
  return x;
}

DenseMatrix pseudoinverse(const DenseMatrix& a) {
  SvdResult d = svd(a);
  const std::size_t k = d.sigma.size();
  if (d.sigma[0] == 0.0 || d.sigma[k - 1] / d.sigma[0] < kRankTolerance) {
    fail(errc::rank_deficient, "pseudoinverse: rank-deficient matrix");
  }
  // A+ = V diag(1/sigma) U^T, sized cols x rows.
  DenseMatrix out(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.cols(); ++i) {
    for (std::size_t j = 0; j < a.rows(); ++j) {
      double s = 0.0;
      for (std::size_t l = 0; l < k; ++l) s += d.v(i, l) * d.u(j, l) / d.sigma[l];
      out(i, j) = s;
    }
  }
  return out;
}

LuFactorization LuFactorization::factor(const DenseMatrix& a) {
  if (a.rows() != a.cols()) {
    fail(errc::dimension_mismatch, "LU: matrix not square");
  }
  if (!a.is_finite()) fail(errc::bad_input, "LU: non-finite entries");

  LuFactorization f;
  f.n_ = a.rows();
  f.lu_ = a.entries();
  f.piv_.resize(f.n_);
  const std::size_t n = f.n_;
  const double singular_tol =
      static_cast<double>(n) * std::numeric_limits<double>::epsilon() * a.inf_norm();
  auto at = [&](std::size_t i, std::size_t j) -> double& {
    return f.lu_[i * n + j];
  };

  for (std::size_t k = 0; k < n; ++k) {
    std::size_t p = k;
    double best = std::fabs(at(k, k));
    for (std::size_t i = k + 1; i < n; ++i) {
      const double mag = std::fabs(at(i, k));
      if (mag > best) {
        best = mag;
        p = i;
      }
    }
    if (best <= singular_tol) {
      fail(errc::singular_matrix, "LU: pivot below singularity threshold");
    }
    f.piv_[k] = p;
    if (p != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(at(k, j), at(p, j));
    }
    const double piv = at(k, k);
    for (std::size_t i = k + 1; i < n; ++i) {
      const double l = at(i, k) / piv;
      at(i, k) = l;
      if (l == 0.0) continue;
      for (std::size_t j = k + 1; j < n; ++j) at(i, j) -= l * at(k, j);
    }
  }
  return f;
}

Vector LuFactorization::solve(const Vector& b) const {
  check_same_size(b.size(), n_, "LU solve rhs");
  Vector x = b;
  // Apply the recorded row swaps in elimination order: x <- P b.
  for (std::size_t k = 0; k < n_; ++k) {
    if (piv_[k] != k) std::swap(x[k], x[piv_[k]]);
  }
  for (std::size_t i = 1; i < n_; ++i) {  // L z = Pb, unit diagonal
    double s = x[i];
    const double* row = lu_.data() + i * n_;
    for (std::size_t j = 0; j < i; ++j) s -= row[j] * x[j];
    x[i] = s;
  }
  for (std::size_t ii = n_; ii-- > 0;) {  // U x = z
    double s = x[ii];
    const double* row = lu_.data() + ii * n_;
    for (std::size_t j = ii + 1; j < n_; ++j) s -= row[j] * x[j];
    x[ii] = s / row[ii];
  }
  return x;
}

Vector LuFactorization::solve_transposed(const Vector& b) const {
  check_same_size(b.size(), n_, "LU transposed solve rhs");
  // A^T = U^T L^T P, so solve U^T w = b, L^T v = w, then x = P^T v.
  Vector x = b;
  for (std::size_t i = 0; i < n_; ++i) {  // U^T w = b (lower triangular)
    double s = x[i];
    for (std::size_t j = 0; j < i; ++j) s -= lu_[j * n_ + i] * x[j];
    x[i] = s / lu_[i * n_ + i];
  }
  for (std::size_t ii = n_; ii-- > 0;) {  // L^T v = w (unit upper triangular)
    double s = x[ii];
    for (std::size_t j = ii + 1; j < n_; ++j) s -= lu_[j * n_ + ii] * x[j];
    x[ii] = s;
  }
  for (std::size_t kk = n_; kk-- > 0;) {  // x = P^T v: swaps in reverse order
    if (piv_[kk] != kk) std::swap(x[kk], x[piv_[kk]]);
  }
  return x;
}

double onenorm_estimate(const ApplyFn& solve, const ApplyFn& solve_transposed,
                        std::size_t n) {
  if (n == 0) fail(errc::dimension_mismatch, "onenorm_estimate: empty matrix");

  Vector x(n, 1.0 / static_cast<double>(n));
  double est = 0.0;
  double est_old = 0.0;
  std::size_t last_index = n;  // sentinel: no unit vector chosen yet
  constexpr int kMaxSweeps = 5;

  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    Vector y = solve(x);
    est = norm1(y);
    Vector xi(n);
    for (std::size_t i = 0; i < n; ++i) xi[i] = (y[i] >= 0.0) ? 1.0 : -1.0;
    Vector z = solve_transposed(xi);
    // Standard stopping rules: the dual certificate cannot improve, or the
    // estimate stalled.
    if (norm_inf(z) <= dot(z, x) || (sweep > 0 && est <= est_old)) break;
    est_old = est;
    std::size_t j = 0;
    for (std::size_t i = 1; i < n; ++i) {
      if (std::fabs(z[i]) > std::fabs(z[j])) j = i;
    }
    if (j == last_index) break;  // cycling on the same unit vector
    last_index = j;
    std::fill(x.begin(), x.end(), 0.0);
    x[j] = 1.0;
  }
  est = std::max(est, est_old);

  // Final comparison against the alternating-sign probe; ||v||_1 = 3n/2, so
  // the scaled value is a valid lower bound as well.
  Vector v(n);
  const double denom = (n > 1) ? static_cast<double>(n - 1) : 1.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double mag = 1.0 + static_cast<double>(i) / denom;
    v[i] = (i % 2 == 0) ? mag : -mag;
  }
  const double est2 = 2.0 * norm1(solve(v)) / (3.0 * static_cast<double>(n));
  return std::max(est, est2);
}

SparseMatrix SparseMatrix::from_triplets(std::size_t rows, std::size_t cols,
                                         std::vector<Triplet> triplets) {
  for (const auto& [i, j, v] : triplets) {
    (void)v;
    if (i >= rows || j >= cols) {
      fail(errc::dimension_mismatch, "SparseMatrix: triplet out of bounds");
    }
  }
  std::sort(triplets.begin(), triplets.end(),
            [](const Triplet& a, const Triplet& b) {
              return std::tie(std::get<0>(a), std::get<1>(a)) <
                     std::tie(std::get<0>(b), std::get<1>(b));
            });

  SparseMatrix m;
  m.rows_ = rows;
  m.cols_ = cols;
  m.row_offsets_.assign(rows + 1, 0);
  m.col_indices_.reserve(triplets.size());
  m.values_.reserve(triplets.size());

  std::size_t pos = 0;
  while (pos < triplets.size()) {
    const std::size_t i = std::get<0>(triplets[pos]);
    const std::size_t j = std::get<1>(triplets[pos]);
    double sum = 0.0;
    while (pos < triplets.size() && std::get<0>(triplets[pos]) == i &&
           std::get<1>(triplets[pos]) == j) {
      sum += std::get<2>(triplets[pos]);
      ++pos;
    }
    m.col_indices_.push_back(j);
    m.values_.push_back(sum);
    m.row_offsets_[i + 1] = m.col_indices_.size();
  }
  // Rows without entries inherit the previous offset.
  for (std::size_t i = 1; i <= rows; ++i) {
    m.row_offsets_[i] = std::max(m.row_offsets_[i], m.row_offsets_[i - 1]);
  }
  return m;
}

Vector SparseMatrix::multiply(const Vector& x) const {
  check_same_size(x.size(), cols_, "SparseMatrix::multiply");
  Vector y(rows_, 0.0);
  for (std::size_t i = 0; i < rows_; ++i) {
    double s = 0.0;
    for (std::size_t k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k) {
      s += values_[k] * x[col_indices_[k]];
    }
    y[i] = s;
  }
  return y;
}

DenseMatrix SparseMatrix::to_dense() const {
  DenseMatrix out(rows_, cols_);
  for (std::size_t i = 0; i < rows_; ++i) {
    for (std::size_t k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k) {
      out(i, col_indices_[k]) += values_[k];
    }
  }
  return out;
}

double SparseMatrix::inf_norm() const {
  double best = 0.0;
  for (std::size_t i = 0; i < rows_; ++i) {
    double s = 0.0;
    for (std::size_t k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k) {
      s += std::fabs(values_[k]);
    }
    best = std::max(best, s);
  }
  return best;
}

void write_matrix_market(const SparseMatrix& a, std::ostream& out) {
  out << "%%MatrixMarket matrix coordinate real general\n";
  out << a.rows() << " " << a.cols() << " " << a.nnz() << "\n";
  char buf[64];
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t k = a.row_offsets()[i]; k < a.row_offsets()[i + 1]; ++k) {
      std::snprintf(buf, sizeof(buf), "%zu %zu %.17g\n", i + 1,
                    a.col_indices()[k] + 1, a.values()[k]);
      out << buf;
    }
  }
}

}  // namespace meshcert
