#pragma once

// Random fixtures and Eigen bridges shared by the unit and acceptance tests.
// Eigen is used here as an independent oracle only.

#include <Eigen/Dense>
#include <random>

#include "strom/strom.hpp"

namespace strom::testing {

using Rng = std::mt19937_64;

inline Vector random_vector(std::size_t n, Rng& rng, double scale = 1.0) {
  std::normal_distribution<double> normal(0.0, scale);
  Vector v(n);
  for (double& x : v) x = normal(rng);
  return v;
}

inline DenseMatrix random_matrix(std::size_t rows, std::size_t cols, Rng& rng) {
  const Vector v = random_vector(rows * cols, rng);
  return DenseMatrix::from_columns(rows, v);
}

inline Eigen::MatrixXd to_eigen(const DenseMatrix& m) {
  return Eigen::Map<const Eigen::MatrixXd>(m.data(), static_cast<Eigen::Index>(m.rows()),
                                           static_cast<Eigen::Index>(m.cols()));
}

inline DenseMatrix from_eigen(const Eigen::MatrixXd& m) {
  DenseMatrix out(static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols()));
  Eigen::Map<Eigen::MatrixXd>(out.data(), m.rows(), m.cols()) = m;
  return out;
}

inline Eigen::VectorXd to_eigen(std::span<const double> v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

/// Orthonormal columns from Eigen's Householder QR of a Gaussian matrix.
inline DenseMatrix random_orthonormal(std::size_t rows, std::size_t cols, Rng& rng) {
  const Eigen::MatrixXd g = to_eigen(random_matrix(rows, cols, rng));
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  const Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(g.rows(), g.cols());
  return from_eigen(q);
}

inline BasisSet random_basis_set(std::size_t state_dim, std::size_t n_time, std::size_t n_s, std::size_t n_t,
                                 Rng& rng) {
  BasisSet b;
  b.Phi_s = random_orthonormal(state_dim, n_s, rng);
  for (std::size_t i = 0; i < n_s; ++i) b.temporal.push_back(random_orthonormal(n_time, n_t, rng));
  b.n_s = n_s;
  b.n_t = n_t;
  b.n_time = n_time;
  b.n_mu = n_t;
  return b;
}

/// Random sparse system with a strictly dominant negative diagonal (hence
/// stable), two inputs, one output and a random x0.
inline LinearDynamicalSystem random_system(std::size_t n, Rng& rng, bool time_varying_input = true) {
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  std::vector<SparseMatrix::Triplet> t;
  Vector row_off(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j : {i + 1, i + 3}) {
      if (j >= n) continue;
      const double a = uni(rng), b = uni(rng);
      t.push_back({i, j, a});
      t.push_back({j, i, b});
      row_off[i] += std::abs(a);
      row_off[j] += std::abs(b);
    }
  }
  for (std::size_t i = 0; i < n; ++i) t.push_back({i, i, -(1.0 + row_off[i] + std::abs(uni(rng)))});
  LinearDynamicalSystem sys;
  sys.A = SparseMatrix::from_triplets(n, n, t);
  sys.B = SparseMatrix::from_dense(random_matrix(n, 2, rng));
  sys.C = random_matrix(n, 1, rng);
  sys.x0 = random_vector(n, rng);
  if (time_varying_input) {
    const Vector phase = random_vector(2, rng);
    sys.input = InputSignal::from_function(2, [phase](std::size_t k) {
      return Vector{std::sin(0.3 * static_cast<double>(k) + phase[0]), std::cos(0.2 * static_cast<double>(k) + phase[1])};
    });
  } else {
    sys.input = InputSignal::constant(random_vector(2, rng));
  }
  return sys;
}

inline double relative_diff(std::span<const double> a, std::span<const double> b) {
  Vector d(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
  const double nb = norm2(b);
  return nb > 0.0 ? norm2(d) / nb : norm2(d);
}

}  // namespace strom::testing
