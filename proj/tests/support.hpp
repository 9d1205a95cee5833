#pragma once

// Helpers shared by the unit tests and the acceptance runner. The oracles
// here deliberately avoid the library's own routines.

#include "qosctl/statespace.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <vector>

namespace qosctl::testing {

using statespace::Matrix;
using statespace::Vector;

/// Real matrix similar to a block-diagonal matrix with the given moduli:
/// 1x1 blocks for real eigenvalues and rotation-scale 2x2 blocks for
/// complex pairs. The spectral radius is max(moduli) by construction.
inline Matrix matrix_with_moduli(const std::vector<double>& moduli, std::mt19937_64& rng) {
  const auto n = static_cast<Eigen::Index>(moduli.size());
  std::uniform_real_distribution<double> angle(0.2, 2.9);
  std::bernoulli_distribution coin(0.5);
  Matrix d = Matrix::Zero(n, n);
  Eigen::Index i = 0;
  while (i < n) {
    // Rotation blocks sit on the (even, odd) pairs that share a modulus.
    if (i % 2 == 0 && i + 1 < n && coin(rng)) {
      const double r = moduli[static_cast<std::size_t>(i)];
      const double th = angle(rng);
      d(i, i) = r * std::cos(th);
      d(i, i + 1) = -r * std::sin(th);
      d(i + 1, i) = r * std::sin(th);
      d(i + 1, i + 1) = r * std::cos(th);
      i += 2;
    } else {
      d(i, i) = coin(rng) ? moduli[static_cast<std::size_t>(i)] : -moduli[static_cast<std::size_t>(i)];
      i += 1;
    }
  }
  // Well-conditioned similarity: identity plus a small random perturbation.
  std::uniform_real_distribution<double> small(-0.3, 0.3);
  Matrix s = Matrix::Identity(n, n);
  for (Eigen::Index r = 0; r < n; ++r) {
    for (Eigen::Index c = 0; c < n; ++c) s(r, c) += small(rng);
  }
  return s * d * s.inverse();
}

/// Block moduli for a 2x2 rotation block must agree on both entries.
inline std::vector<double> random_moduli(std::size_t n, double max_modulus, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> frac(0.05, 1.0);
  std::vector<double> m(n);
  for (auto& v : m) v = max_modulus * frac(rng);
  // Pair up neighbours so rotation blocks see equal moduli on both entries.
  for (std::size_t i = 0; i + 1 < n; i += 2) m[i + 1] = m[i];
  const std::size_t top = 2 * std::uniform_int_distribution<std::size_t>(0, (n - 1) / 2)(rng);
  m[top] = max_modulus;
  if (top + 1 < n) m[top + 1] = max_modulus;
  return m;
}

/// Free response ||A^steps x0|| starting from a random unit vector.
inline double free_response_norm(const Matrix& a, int steps, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Vector x(a.rows());
  for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = g(rng);
  x.normalize();
  for (int k = 0; k < steps; ++k) x = a * x;
  return x.norm();
}

/// Dimension of span(vectors) by modified Gram-Schmidt with re-orthogonalization.
inline Eigen::Index gram_schmidt_rank(const std::vector<Vector>& vectors, double tol = 1e-9) {
  std::vector<Vector> basis;
  for (Vector v : vectors) {
    const double scale = std::max(1.0, v.norm());
    for (int pass = 0; pass < 2; ++pass) {
      for (const auto& q : basis) v -= q.dot(v) * q;
    }
    if (v.norm() > tol * scale) basis.push_back(v / v.norm());
  }
  return static_cast<Eigen::Index>(basis.size());
}

/// Exact rank of an integer matrix by fraction-free Gaussian elimination.
inline int integer_rank(std::vector<std::vector<std::int64_t>> m) {
  if (m.empty()) return 0;
  const std::size_t rows = m.size();
  const std::size_t cols = m.front().size();
  std::size_t rank = 0;
  std::int64_t prev = 1;
  for (std::size_t c = 0; c < cols && rank < rows; ++c) {
    std::size_t pivot = rank;
    while (pivot < rows && m[pivot][c] == 0) ++pivot;
    if (pivot == rows) continue;
    std::swap(m[pivot], m[rank]);
    for (std::size_t r = rank + 1; r < rows; ++r) {
      for (std::size_t k = c + 1; k < cols; ++k) {
        m[r][k] = (m[rank][c] * m[r][k] - m[r][c] * m[rank][k]) / prev;
      }
      m[r][c] = 0;
    }
    prev = m[rank][c];
    ++rank;
  }
  return static_cast<int>(rank);
}

}  // namespace qosctl::testing
