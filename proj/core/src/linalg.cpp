#include "strom/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include "strom/error.hpp"

namespace strom {

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw DimensionError(what);
}

}  // namespace

// ---------------------------------------------------------------------------
// DenseMatrix

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

DenseMatrix DenseMatrix::identity(std::size_t n) {
  DenseMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

DenseMatrix DenseMatrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  const std::size_t nr = rows.size();
  const std::size_t nc = nr == 0 ? 0 : rows.begin()->size();
  DenseMatrix m(nr, nc);
  std::size_t i = 0;
  for (const auto& row : rows) {
    require(row.size() == nc, "from_rows: ragged rows");
    std::size_t j = 0;
    for (double v : row) m(i, j++) = v;
    ++i;
  }
  return m;
}

DenseMatrix DenseMatrix::from_columns(std::size_t rows, std::span<const double> column_major) {
  require(rows > 0 && column_major.size() % rows == 0, "from_columns: size is not a multiple of rows");
  DenseMatrix m(rows, column_major.size() / rows);
  std::copy(column_major.begin(), column_major.end(), m.data_.begin());
  return m;
}

void DenseMatrix::append_col(std::span<const double> column) {
  if (rows_ == 0 && cols_ == 0) rows_ = column.size();
  require(column.size() == rows_, "append_col: length mismatch");
  data_.insert(data_.end(), column.begin(), column.end());
  ++cols_;
}

void DenseMatrix::resize_cols(std::size_t n) {
  require(n <= cols_, "resize_cols: can only shrink");
  cols_ = n;
  data_.resize(rows_ * n);
}

DenseMatrix DenseMatrix::transpose() const {
  DenseMatrix t(cols_, rows_);
  for (std::size_t j = 0; j < cols_; ++j)
    for (std::size_t i = 0; i < rows_; ++i) t(j, i) = (*this)(i, j);
  return t;
}

DenseMatrix DenseMatrix::block(std::size_t row0, std::size_t col0, std::size_t nrows,
                               std::size_t ncols) const {
  require(row0 + nrows <= rows_ && col0 + ncols <= cols_, "block: out of range");
  DenseMatrix b(nrows, ncols);
  for (std::size_t j = 0; j < ncols; ++j)
    std::copy_n(data_.data() + (col0 + j) * rows_ + row0, nrows, b.data_.data() + j * nrows);
  return b;
}

DenseMatrix& DenseMatrix::operator+=(const DenseMatrix& other) {
  require(rows_ == other.rows_ && cols_ == other.cols_, "operator+=: shape mismatch");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
  return *this;
}

DenseMatrix& DenseMatrix::operator-=(const DenseMatrix& other) {
  require(rows_ == other.rows_ && cols_ == other.cols_, "operator-=: shape mismatch");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
  return *this;
}

DenseMatrix& DenseMatrix::operator*=(double s) {
  for (double& v : data_) v *= s;
  return *this;
}

DenseMatrix operator+(DenseMatrix a, const DenseMatrix& b) { return a += b; }
DenseMatrix operator-(DenseMatrix a, const DenseMatrix& b) { return a -= b; }
DenseMatrix operator*(double s, DenseMatrix a) { return a *= s; }

DenseMatrix operator*(const DenseMatrix& a, const DenseMatrix& b) {
  require(a.cols() == b.rows(), "matrix product: inner dimension mismatch");
  DenseMatrix c(a.rows(), b.cols());
  for (std::size_t j = 0; j < b.cols(); ++j) {
    auto cj = c.col(j);
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double bkj = b(k, j);
      if (bkj != 0.0) axpy(bkj, a.col(k), cj);
    }
  }
  return c;
}

DenseMatrix transpose_times(const DenseMatrix& a, const DenseMatrix& b) {
  require(a.rows() == b.rows(), "transpose_times: row mismatch");
  DenseMatrix c(a.cols(), b.cols());
  for (std::size_t j = 0; j < b.cols(); ++j)
    for (std::size_t i = 0; i < a.cols(); ++i) c(i, j) = dot(a.col(i), b.col(j));
  return c;
}

Vector matvec(const DenseMatrix& a, std::span<const double> x) {
  require(a.cols() == x.size(), "matvec: dimension mismatch");
  Vector y(a.rows(), 0.0);
  for (std::size_t j = 0; j < a.cols(); ++j)
    if (x[j] != 0.0) axpy(x[j], a.col(j), y);
  return y;
}

Vector matvec_transpose(const DenseMatrix& a, std::span<const double> x) {
  require(a.rows() == x.size(), "matvec_transpose: dimension mismatch");
  Vector y(a.cols());
  for (std::size_t j = 0; j < a.cols(); ++j) y[j] = dot(a.col(j), x);
  return y;
}

double dot(std::span<const double> a, std::span<const double> b) {
  require(a.size() == b.size(), "dot: length mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(std::span<const double> a) {
  // scaled accumulation avoids overflow for large entries
  double scale = 0.0;
  double ssq = 1.0;
  for (double v : a) {
    if (v == 0.0) continue;
    const double av = std::abs(v);
    if (scale < av) {
      ssq = 1.0 + ssq * (scale / av) * (scale / av);
      scale = av;
    } else {
      ssq += (av / scale) * (av / scale);
    }
  }
  return scale * std::sqrt(ssq);
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  require(x.size() == y.size(), "axpy: length mismatch");
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

double frobenius_norm(const DenseMatrix& a) { return norm2(a.values()); }

double max_abs(std::span<const double> a) {
  double m = 0.0;
  for (double v : a) m = std::max(m, std::abs(v));
  return m;
}

double max_abs(const DenseMatrix& a) { return max_abs(a.values()); }

double max_abs_diff(const DenseMatrix& a, const DenseMatrix& b) {
  require(a.rows() == b.rows() && a.cols() == b.cols(), "max_abs_diff: shape mismatch");
  return max_abs_diff(a.values(), b.values());
}

double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  require(a.size() == b.size(), "max_abs_diff: length mismatch");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

bool all_finite(std::span<const double> values) {
  return std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); });
}

double orthogonality_defect(const DenseMatrix& q) {
  const DenseMatrix g = transpose_times(q, q);
  double m = 0.0;
  for (std::size_t j = 0; j < g.cols(); ++j)
    for (std::size_t i = 0; i < g.rows(); ++i) m = std::max(m, std::abs(g(i, j) - (i == j ? 1.0 : 0.0)));
  return m;
}

// ---------------------------------------------------------------------------
// SparseMatrix

SparseMatrix::SparseMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), row_ptr_(rows + 1, 0) {}

SparseMatrix SparseMatrix::from_triplets(std::size_t rows, std::size_t cols,
                                         std::vector<Triplet> triplets) {
  for (const auto& t : triplets)
    require(t.row < rows && t.col < cols, "from_triplets: index out of range");
  std::sort(triplets.begin(), triplets.end(), [](const Triplet& a, const Triplet& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  SparseMatrix m(rows, cols);
  m.col_idx_.reserve(triplets.size());
  m.values_.reserve(triplets.size());
  std::vector<std::size_t> counts(rows, 0);
  for (std::size_t n = 0; n < triplets.size(); ++n) {
    const auto& t = triplets[n];
    if (n > 0 && triplets[n - 1].row == t.row && triplets[n - 1].col == t.col) {
      m.values_.back() += t.value;
      continue;
    }
    m.col_idx_.push_back(t.col);
    m.values_.push_back(t.value);
    ++counts[t.row];
  }
  for (std::size_t i = 0; i < rows; ++i) m.row_ptr_[i + 1] = m.row_ptr_[i] + counts[i];
  return m;
}

SparseMatrix SparseMatrix::from_dense(const DenseMatrix& dense, double drop_below) {
  std::vector<Triplet> t;
  for (std::size_t j = 0; j < dense.cols(); ++j)
    for (std::size_t i = 0; i < dense.rows(); ++i)
      if (std::abs(dense(i, j)) > drop_below || (drop_below == 0.0 && dense(i, j) != 0.0))
        t.push_back({i, j, dense(i, j)});
  return from_triplets(dense.rows(), dense.cols(), std::move(t));
}

SparseMatrix SparseMatrix::identity(std::size_t n) {
  std::vector<Triplet> t;
  t.reserve(n);
  for (std::size_t i = 0; i < n; ++i) t.push_back({i, i, 1.0});
  return from_triplets(n, n, std::move(t));
}

double SparseMatrix::coeff(std::size_t i, std::size_t j) const {
  require(i < rows_ && j < cols_, "coeff: index out of range");
  const auto first = col_idx_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[i]);
  const auto last = col_idx_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[i + 1]);
  const auto it = std::lower_bound(first, last, j);
  if (it == last || *it != j) return 0.0;
  return values_[static_cast<std::size_t>(it - col_idx_.begin())];
}

Vector SparseMatrix::multiply(std::span<const double> x) const {
  require(x.size() == cols_, "sparse multiply: dimension mismatch");
  Vector y(rows_, 0.0);
  for (std::size_t i = 0; i < rows_; ++i) {
    double s = 0.0;
    for (std::size_t n = row_ptr_[i]; n < row_ptr_[i + 1]; ++n) s += values_[n] * x[col_idx_[n]];
    y[i] = s;
  }
  return y;
}

Vector SparseMatrix::multiply_transpose(std::span<const double> x) const {
  require(x.size() == rows_, "sparse multiply_transpose: dimension mismatch");
  Vector y(cols_, 0.0);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t n = row_ptr_[i]; n < row_ptr_[i + 1]; ++n) y[col_idx_[n]] += values_[n] * x[i];
  return y;
}

DenseMatrix SparseMatrix::multiply(const DenseMatrix& x) const {
  require(x.rows() == cols_, "sparse-dense multiply: dimension mismatch");
  DenseMatrix y(rows_, x.cols());
  for (std::size_t j = 0; j < x.cols(); ++j) {
    const Vector yj = multiply(x.col(j));
    std::copy(yj.begin(), yj.end(), y.col(j).begin());
  }
  return y;
}

DenseMatrix SparseMatrix::transpose_multiply(const DenseMatrix& x) const {
  require(x.rows() == rows_, "sparse transpose-dense multiply: dimension mismatch");
  DenseMatrix y(cols_, x.cols());
  for (std::size_t j = 0; j < x.cols(); ++j) {
    const Vector yj = multiply_transpose(x.col(j));
    std::copy(yj.begin(), yj.end(), y.col(j).begin());
  }
  return y;
}

SparseMatrix SparseMatrix::transpose() const {
  std::vector<Triplet> t;
  t.reserve(values_.size());
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t n = row_ptr_[i]; n < row_ptr_[i + 1]; ++n) t.push_back({col_idx_[n], i, values_[n]});
  return from_triplets(cols_, rows_, std::move(t));
}

DenseMatrix SparseMatrix::to_dense() const {
  DenseMatrix d(rows_, cols_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t n = row_ptr_[i]; n < row_ptr_[i + 1]; ++n) d(i, col_idx_[n]) = values_[n];
  return d;
}

std::vector<SparseMatrix::Triplet> SparseMatrix::triplets() const {
  std::vector<Triplet> t;
  t.reserve(values_.size());
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t n = row_ptr_[i]; n < row_ptr_[i + 1]; ++n) t.push_back({i, col_idx_[n], values_[n]});
  return t;
}

void SparseMatrix::validate() const {
  require(row_ptr_.size() == rows_ + 1 && row_ptr_.front() == 0 && row_ptr_.back() == values_.size() &&
              col_idx_.size() == values_.size(),
          "sparse matrix: inconsistent storage");
  for (std::size_t i = 0; i < rows_; ++i) {
    for (std::size_t n = row_ptr_[i]; n < row_ptr_[i + 1]; ++n) {
      require(col_idx_[n] < cols_, "sparse matrix: column index out of range");
      if (n > row_ptr_[i] && col_idx_[n] <= col_idx_[n - 1])
        throw PreconditionError("sparse matrix: column indices not strictly increasing");
    }
  }
  if (!all_finite(values_)) throw PreconditionError("sparse matrix: non-finite value");
}

// ---------------------------------------------------------------------------
// SVD

namespace {

// Gram-Schmidt (twice) of the standard basis against the accepted columns of w
// fills columns listed in `missing`.
void complete_orthonormal(DenseMatrix& w, const std::vector<bool>& filled) {
  const std::size_t m = w.rows();
  std::vector<bool> have = filled;
  for (std::size_t j = 0; j < w.cols(); ++j) {
    if (have[j]) continue;
    double best_norm = -1.0;
    Vector best;
    for (std::size_t e = 0; e < m; ++e) {
      Vector v(m, 0.0);
      v[e] = 1.0;
      for (int pass = 0; pass < 2; ++pass)
        for (std::size_t c = 0; c < w.cols(); ++c)
          if (have[c]) axpy(-dot(w.col(c), v), w.col(c), v);
      const double nv = norm2(v);
      if (nv > best_norm) {
        best_norm = nv;
        best = std::move(v);
      }
      if (best_norm > 0.7) break;
    }
    for (double& x : best) x /= best_norm;
    std::copy(best.begin(), best.end(), w.col(j).begin());
    have[j] = true;
  }
}

SvdResult jacobi_svd_tall(const DenseMatrix& m, const SvdOptions& options) {
  const std::size_t rows = m.rows();
  const std::size_t n = m.cols();
  DenseMatrix a = m;
  DenseMatrix v = DenseMatrix::identity(n);
  constexpr double tol = 2.0 * std::numeric_limits<double>::epsilon();
  // a column this small is rounding noise of a rank-deficient input; rotating
  // against it never reduces its coupling, so it is left alone
  const double negligible = std::numeric_limits<double>::epsilon() * frobenius_norm(m);

  bool converged = n <= 1;
  double worst = 0.0;
  for (int sweep = 0; sweep < options.max_sweeps && !converged; ++sweep) {
    converged = true;
    worst = 0.0;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        auto ap = a.col(p);
        auto aq = a.col(q);
        const double alpha = dot(ap, ap);
        const double beta = dot(aq, aq);
        const double gamma = dot(ap, aq);
        if (gamma == 0.0 || std::sqrt(alpha) <= negligible || std::sqrt(beta) <= negligible) continue;
        // separate roots keep tiny columns from underflowing the product
        const double rel = std::abs(gamma) / (std::sqrt(alpha) * std::sqrt(beta));
        worst = std::max(worst, rel);
        if (rel <= tol) continue;
        converged = false;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (std::size_t i = 0; i < rows; ++i) {
          const double x = ap[i];
          const double y = aq[i];
          ap[i] = c * x - s * y;
          aq[i] = s * x + c * y;
        }
        auto vp = v.col(p);
        auto vq = v.col(q);
        for (std::size_t i = 0; i < n; ++i) {
          const double x = vp[i];
          const double y = vq[i];
          vp[i] = c * x - s * y;
          vq[i] = s * x + c * y;
        }
      }
    }
  }
  if (!converged) {
    std::ostringstream msg;
    msg << "thin_svd: one-sided Jacobi did not converge in " << options.max_sweeps
        << " sweeps (largest relative column coupling " << worst << ")";
    throw ConvergenceError(msg.str(), worst);
  }

  Vector norms(n);
  for (std::size_t j = 0; j < n; ++j) norms[j] = norm2(a.col(j));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return norms[x] > norms[y]; });

  SvdResult out{DenseMatrix(rows, n), Vector(n), DenseMatrix(n, n)};
  std::vector<bool> filled(n, false);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t j = order[k];
    out.sigma[k] = norms[j];
    std::copy(v.col(j).begin(), v.col(j).end(), out.V.col(k).begin());
    if (norms[j] >= std::numeric_limits<double>::min()) {
      auto src = a.col(j);
      auto dst = out.W.col(k);
      for (std::size_t i = 0; i < rows; ++i) dst[i] = src[i] / norms[j];
      filled[k] = true;
    } else {
      out.sigma[k] = 0.0;
    }
  }
  complete_orthonormal(out.W, filled);

  for (std::size_t k = 0; k < n; ++k) {
    auto w = out.W.col(k);
    std::size_t imax = 0;
    for (std::size_t i = 1; i < rows; ++i)
      if (std::abs(w[i]) > std::abs(w[imax])) imax = i;
    if (w[imax] < 0.0) {
      for (double& x : w) x = -x;
      for (double& x : out.V.col(k)) x = -x;
    }
  }
  return out;
}

}  // namespace

SvdResult thin_svd(const DenseMatrix& m, const SvdOptions& options) {
  if (m.rows() == 0 || m.cols() == 0) throw PreconditionError("thin_svd: empty matrix");
  if (!all_finite(m.values())) throw PreconditionError("thin_svd: non-finite entry");
  if (m.rows() >= m.cols()) return jacobi_svd_tall(m, options);
  SvdResult t = jacobi_svd_tall(m.transpose(), options);
  // the sign convention targets W; re-apply it after swapping roles
  SvdResult out{std::move(t.V), std::move(t.sigma), std::move(t.W)};
  for (std::size_t k = 0; k < out.sigma.size(); ++k) {
    auto w = out.W.col(k);
    std::size_t imax = 0;
    for (std::size_t i = 1; i < w.size(); ++i)
      if (std::abs(w[i]) > std::abs(w[imax])) imax = i;
    if (w[imax] < 0.0) {
      for (double& x : w) x = -x;
      for (double& x : out.V.col(k)) x = -x;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// QR

QrResult qr(const DenseMatrix& m) {
  const std::size_t rows = m.rows();
  const std::size_t n = m.cols();
  if (rows < n) throw PreconditionError("qr: requires rows >= cols");
  DenseMatrix a = m;
  std::vector<Vector> reflectors(n);
  for (std::size_t k = 0; k < n; ++k) {
    Vector u(rows - k);
    for (std::size_t i = k; i < rows; ++i) u[i - k] = a(i, k);
    const double nu = norm2(u);
    if (nu == 0.0) continue;
    u[0] += std::copysign(nu, u[0]);
    const double un = norm2(u);
    for (double& x : u) x /= un;
    for (std::size_t j = k; j < n; ++j) {
      double s = 0.0;
      for (std::size_t i = k; i < rows; ++i) s += u[i - k] * a(i, j);
      for (std::size_t i = k; i < rows; ++i) a(i, j) -= 2.0 * s * u[i - k];
    }
    reflectors[k] = std::move(u);
  }

  QrResult out{DenseMatrix(rows, n), DenseMatrix(n, n)};
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i <= j; ++i) out.R(i, j) = a(i, j);
  for (std::size_t j = 0; j < n; ++j) out.Q(j, j) = 1.0;
  for (std::size_t kk = n; kk-- > 0;) {
    const Vector& u = reflectors[kk];
    if (u.empty()) continue;
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0.0;
      for (std::size_t i = kk; i < rows; ++i) s += u[i - kk] * out.Q(i, j);
      for (std::size_t i = kk; i < rows; ++i) out.Q(i, j) -= 2.0 * s * u[i - kk];
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (out.R(i, i) < 0.0) {
      for (std::size_t j = i; j < n; ++j) out.R(i, j) = -out.R(i, j);
      for (double& x : out.Q.col(i)) x = -x;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// LU

DenseLu::DenseLu(const DenseMatrix& a) : lu_(a), perm_(a.rows()) {
  if (a.rows() != a.cols()) throw DimensionError("DenseLu: matrix is not square");
  const std::size_t n = a.rows();
  const double threshold = 1e-14 * frobenius_norm(a);
  std::iota(perm_.begin(), perm_.end(), 0);
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    for (std::size_t i = k + 1; i < n; ++i)
      if (std::abs(lu_(i, k)) > std::abs(lu_(piv, k))) piv = i;
    if (!(std::abs(lu_(piv, k)) > threshold)) {
      std::ostringstream msg;
      msg << "singular matrix: pivot " << k << " has magnitude " << std::abs(lu_(piv, k))
          << " below " << threshold;
      throw SingularMatrixError(msg.str(), k);
    }
    if (piv != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(lu_(k, j), lu_(piv, j));
      std::swap(perm_[k], perm_[piv]);
    }
    const double d = lu_(k, k);
    for (std::size_t i = k + 1; i < n; ++i) lu_(i, k) /= d;
    for (std::size_t j = k + 1; j < n; ++j) {
      const double ukj = lu_(k, j);
      if (ukj == 0.0) continue;
      for (std::size_t i = k + 1; i < n; ++i) lu_(i, j) -= lu_(i, k) * ukj;
    }
  }
}

Vector DenseLu::solve(std::span<const double> b) const {
  const std::size_t n = dim();
  if (b.size() != n) throw DimensionError("DenseLu::solve: dimension mismatch");
  Vector x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = b[perm_[i]];
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = j + 1; i < n; ++i) x[i] -= lu_(i, j) * x[j];
  for (std::size_t j = n; j-- > 0;) {
    x[j] /= lu_(j, j);
    for (std::size_t i = 0; i < j; ++i) x[i] -= lu_(i, j) * x[j];
  }
  return x;
}

Vector solve_dense(const DenseMatrix& a, std::span<const double> b) {
  if (a.rows() != b.size()) throw DimensionError("solve_dense: dimension mismatch");
  return DenseLu(a).solve(b);
}

// ---------------------------------------------------------------------------
// Kronecker product

DenseMatrix kron(const DenseMatrix& a, const DenseMatrix& b) {
  const std::size_t m = a.rows(), n = a.cols(), p = b.rows(), q = b.cols();
  DenseMatrix c(m * p, n * q);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i < m; ++i) {
      const double aij = a(i, j);
      for (std::size_t l = 0; l < q; ++l)
        for (std::size_t k = 0; k < p; ++k) c(i * p + k, j * q + l) = aij * b(k, l);
    }
  return c;
}

// ---------------------------------------------------------------------------
// Power iteration

double largest_singular_value(const LinearMap& apply, const LinearMap& apply_adjoint,
                              std::size_t dim_in, std::size_t dim_out,
                              const PowerIterationOptions& options) {
  if (dim_in == 0 || dim_out == 0) throw PreconditionError("largest_singular_value: empty operator");
  std::mt19937_64 rng(options.seed);
  std::normal_distribution<double> normal;
  auto random_unit = [&](std::size_t n) {
    Vector v(n);
    for (double& x : v) x = normal(rng);
    const double nv = norm2(v);
    for (double& x : v) x /= nv;
    return v;
  };
  auto checked = [](const Vector& y, std::size_t n, const char* which) {
    if (y.size() != n) throw DimensionError(std::string("largest_singular_value: ") + which +
                                            " returned a vector of the wrong length");
  };

  if (options.adjoint_check_tol >= 0.0) {
    const Vector v = random_unit(dim_in);
    const Vector w = random_unit(dim_out);
    const Vector av = apply(v);
    const Vector atw = apply_adjoint(w);
    checked(av, dim_out, "apply");
    checked(atw, dim_in, "apply_adjoint");
    const double lhs = dot(av, w);
    const double rhs = dot(v, atw);
    const double scale = std::max({norm2(av), norm2(atw), std::numeric_limits<double>::min()});
    if (std::abs(lhs - rhs) > options.adjoint_check_tol * scale) {
      std::ostringstream msg;
      msg << "largest_singular_value: adjoint check failed, |<Av,w> - <v,A^T w>| = "
          << std::abs(lhs - rhs) << " (scale " << scale << ")";
      throw ContractViolation(msg.str());
    }
  }

  Vector v = random_unit(dim_in);
  double previous = 0.0;
  double gap = std::numeric_limits<double>::infinity();
  for (int it = 0; it < options.max_iter; ++it) {
    const Vector y = apply(v);
    checked(y, dim_out, "apply");
    const double sigma = norm2(y);
    if (sigma == 0.0) return 0.0;
    Vector z = apply_adjoint(y);
    checked(z, dim_in, "apply_adjoint");
    const double nz = norm2(z);
    if (nz == 0.0) return sigma;
    for (double& x : z) x /= nz;
    v = std::move(z);
    gap = std::abs(sigma - previous);
    if (gap <= options.tol * sigma) return sigma;
    previous = sigma;
  }
  std::ostringstream msg;
  msg << "largest_singular_value: no convergence after " << options.max_iter
      << " iterations (last iterate gap " << gap << ")";
  throw ConvergenceError(msg.str(), gap);
}

}  // namespace strom
