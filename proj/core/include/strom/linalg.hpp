#pragma once

// Dense and compressed-row matrices plus the small set of factorizations the
// reduced-order pipeline needs: one-sided Jacobi SVD, Householder QR, LU with
// partial pivoting, Kronecker products and power-iteration norm estimates.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <span>
#include <vector>

namespace strom {

using Vector = std::vector<double>;

/// Column-major dense matrix of doubles.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0);

  static DenseMatrix identity(std::size_t n);
  /// Row-wise literal, convenient in tests: from_rows({{1, 2}, {3, 4}}).
  static DenseMatrix from_rows(std::initializer_list<std::initializer_list<double>> rows);
  static DenseMatrix from_columns(std::size_t rows, std::span<const double> column_major);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(std::size_t i, std::size_t j) { return data_[j * rows_ + i]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[j * rows_ + i]; }

  std::span<double> col(std::size_t j) { return {data_.data() + j * rows_, rows_}; }
  std::span<const double> col(std::size_t j) const { return {data_.data() + j * rows_, rows_}; }

  double* data() noexcept { return data_.data(); }
  const double* data() const noexcept { return data_.data(); }
  std::span<const double> values() const noexcept { return data_; }

  /// Appends a column; on an empty 0x0 matrix the row count is taken from it.
  void append_col(std::span<const double> column);
  /// Keeps the first n columns.
  void resize_cols(std::size_t n);

  DenseMatrix transpose() const;
  DenseMatrix block(std::size_t row0, std::size_t col0, std::size_t nrows, std::size_t ncols) const;
  DenseMatrix left_cols(std::size_t n) const { return block(0, 0, rows_, n); }

  DenseMatrix& operator+=(const DenseMatrix& other);
  DenseMatrix& operator-=(const DenseMatrix& other);
  DenseMatrix& operator*=(double s);

  friend bool operator==(const DenseMatrix&, const DenseMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

DenseMatrix operator+(DenseMatrix a, const DenseMatrix& b);
DenseMatrix operator-(DenseMatrix a, const DenseMatrix& b);
DenseMatrix operator*(double s, DenseMatrix a);
DenseMatrix operator*(const DenseMatrix& a, const DenseMatrix& b);

/// a^T b without forming the transpose.
DenseMatrix transpose_times(const DenseMatrix& a, const DenseMatrix& b);
Vector matvec(const DenseMatrix& a, std::span<const double> x);
Vector matvec_transpose(const DenseMatrix& a, std::span<const double> x);

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);
/// y += alpha * x
void axpy(double alpha, std::span<const double> x, std::span<double> y);
double frobenius_norm(const DenseMatrix& a);
double max_abs(const DenseMatrix& a);
double max_abs(std::span<const double> a);
double max_abs_diff(const DenseMatrix& a, const DenseMatrix& b);
double max_abs_diff(std::span<const double> a, std::span<const double> b);
bool all_finite(std::span<const double> values);
/// max |Q^T Q - I| over all entries.
double orthogonality_defect(const DenseMatrix& q);

/// Compressed sparse row matrix. Column indices are strictly increasing in
/// every row.
class SparseMatrix {
 public:
  struct Triplet {
    std::size_t row;
    std::size_t col;
    double value;
  };

  SparseMatrix() = default;
  SparseMatrix(std::size_t rows, std::size_t cols);

  /// Duplicate (row, col) entries are summed; explicit zeros are kept.
  static SparseMatrix from_triplets(std::size_t rows, std::size_t cols, std::vector<Triplet> triplets);
  static SparseMatrix from_dense(const DenseMatrix& dense, double drop_below = 0.0);
  static SparseMatrix identity(std::size_t n);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t nonzeros() const noexcept { return values_.size(); }

  std::span<const std::size_t> row_ptr() const noexcept { return row_ptr_; }
  std::span<const std::size_t> col_idx() const noexcept { return col_idx_; }
  std::span<const double> values() const noexcept { return values_; }

  /// Entry lookup by binary search; zero when not stored.
  double coeff(std::size_t i, std::size_t j) const;

  Vector multiply(std::span<const double> x) const;
  Vector multiply_transpose(std::span<const double> x) const;
  DenseMatrix multiply(const DenseMatrix& x) const;
  /// this^T * x for dense x.
  DenseMatrix transpose_multiply(const DenseMatrix& x) const;

  SparseMatrix transpose() const;
  DenseMatrix to_dense() const;
  std::vector<Triplet> triplets() const;

  /// Throws DimensionError/PreconditionError if the structure is inconsistent.
  void validate() const;

  friend bool operator==(const SparseMatrix&, const SparseMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<std::size_t> row_ptr_{0};
  std::vector<std::size_t> col_idx_;
  std::vector<double> values_;
};

struct SvdResult {
  DenseMatrix W;  // left singular vectors, rows x min(rows, cols)
  Vector sigma;   // non-increasing, non-negative
  DenseMatrix V;  // right singular vectors, cols x min(rows, cols)
};

struct SvdOptions {
  int max_sweeps = 80;
};

/// Thin SVD by one-sided Jacobi rotations. Each left singular vector is
/// normalised so that its entry of largest magnitude is non-negative (the
/// matching right vector is flipped with it), so the factorisation is
/// deterministic. Columns of W belonging to zero singular values are completed
/// to an orthonormal set.
SvdResult thin_svd(const DenseMatrix& m, const SvdOptions& options = {});

struct QrResult {
  DenseMatrix Q;  // rows x cols, orthonormal columns
  DenseMatrix R;  // cols x cols, upper triangular, non-negative diagonal
};

/// Householder QR of a tall (rows >= cols) matrix. Rank-deficient input is
/// fine: R then carries zero diagonal entries and Q stays orthonormal.
QrResult qr(const DenseMatrix& m);

/// LU factorisation with partial pivoting, reusable for several solves.
class DenseLu {
 public:
  /// Throws SingularMatrixError if a pivot falls below 1e-14 * ||a||_F.
  explicit DenseLu(const DenseMatrix& a);

  std::size_t dim() const noexcept { return lu_.rows(); }
  Vector solve(std::span<const double> b) const;

 private:
  DenseMatrix lu_;
  std::vector<std::size_t> perm_;
};

Vector solve_dense(const DenseMatrix& a, std::span<const double> b);

DenseMatrix kron(const DenseMatrix& a, const DenseMatrix& b);

/// y = op(x); x has the map's input dimension.
using LinearMap = std::function<Vector(std::span<const double>)>;

struct PowerIterationOptions {
  double tol = 1e-8;
  int max_iter = 10000;
  std::uint64_t seed = 0x5eedULL;
  /// Tolerance of the random adjoint-consistency probe, relative to
  /// ||v|| * ||w|| * (current norm estimate); set negative to skip.
  double adjoint_check_tol = 1e-10;
};

/// Largest singular value of a matrix-free operator by power iteration on
/// op^T op. Deterministic for a fixed seed. Throws ContractViolation when the
/// adjoint probe fails and ConvergenceError at the iteration cap.
double largest_singular_value(const LinearMap& apply, const LinearMap& apply_adjoint,
                              std::size_t dim_in, std::size_t dim_out,
                              const PowerIterationOptions& options = {});

}  // namespace strom
