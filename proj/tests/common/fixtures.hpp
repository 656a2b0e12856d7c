#pragma once

#include <cmath>
#include <vector>

#include <Eigen/QR>

#include "lavdm/block_matrix.hpp"
#include "lavdm/kernel.hpp"
#include "lavdm/random.hpp"
#include "lavdm/types.hpp"

namespace lavdm::testing {

inline Matrix random_orthogonal(Index q, Rng& rng) {
  Matrix g(q, q);
  for (Index i = 0; i < q; ++i) {
    for (Index j = 0; j < q; ++j) g(i, j) = standard_normal(rng);
  }
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix out = qr.householderQ() * Matrix::Identity(q, q);
  if (uniform01(rng) < 0.5) out.col(0) *= -1.0;
  return out;
}

inline std::vector<Matrix> random_gauge(Index count, Index q, Rng& rng) {
  std::vector<Matrix> out;
  for (Index i = 0; i < count; ++i) out.push_back(random_orthogonal(q, rng));
  return out;
}

inline RowMatrix random_points(Index n, Index p, Rng& rng, double scale = 1.0) {
  RowMatrix out(n, p);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < p; ++j) out(i, j) = scale * standard_normal(rng);
  }
  return out;
}

/// Dense-pattern affinity with entries drawn from [lo, 1].
inline AffinityMatrix random_affinity(Index n, Index m, Rng& rng, double lo = 0.05) {
  Matrix dense(n, m);
  for (Index i = 0; i < n; ++i) {
    for (Index k = 0; k < m; ++k) dense(i, k) = lo + (1.0 - lo) * uniform01(rng);
  }
  AffinityMatrix w;
  w.entries = dense.sparseView();
  w.entries.makeCompressed();
  return w;
}

inline AffinityMatrix symmetric_random_affinity(Index n, Rng& rng, double lo = 0.05) {
  Matrix dense(n, n);
  for (Index i = 0; i < n; ++i) {
    dense(i, i) = 1.0;
    for (Index j = 0; j < i; ++j) dense(i, j) = dense(j, i) = lo + (1.0 - lo) * uniform01(rng);
  }
  AffinityMatrix w;
  w.entries = dense.sparseView();
  w.entries.makeCompressed();
  return w;
}

/// Random O(q) blocks on every entry of the pattern.
inline BlockSparseMatrix random_connections(const SparseRows& pattern, Index q, Rng& rng) {
  BlockSparseMatrix out(pattern, q);
  for (Index s = 0; s < out.nonzero_blocks(); ++s) out.block(s) = random_orthogonal(q, rng);
  return out;
}

/// Symmetric field: Omega_ji = Omega_ij^T and identities on the diagonal.
inline BlockSparseMatrix random_symmetric_connections(const SparseRows& pattern, Index q, Rng& rng) {
  BlockSparseMatrix out(pattern, q);
  for (Index i = 0; i < out.block_rows(); ++i) {
    for (Index s = out.row_offsets()[static_cast<std::size_t>(i)]; s < out.row_offsets()[static_cast<std::size_t>(i + 1)];
         ++s) {
      const Index j = out.col_indices()[static_cast<std::size_t>(s)];
      if (j == i) {
        out.block(s) = Matrix::Identity(q, q);
      } else if (j > i) {
        out.block(s) = random_orthogonal(q, rng);
        out.block(*out.find(j, i)) = out.block(s).transpose();
      }
    }
  }
  return out;
}

/// Omega_ik -> g_i Omega_ik h_k^T.
inline BlockSparseMatrix apply_gauge(const BlockSparseMatrix& c, const std::vector<Matrix>& g,
                                     const std::vector<Matrix>& h) {
  BlockSparseMatrix out = c;
  for (Index i = 0; i < c.block_rows(); ++i) {
    for (Index s = c.row_offsets()[static_cast<std::size_t>(i)]; s < c.row_offsets()[static_cast<std::size_t>(i + 1)];
         ++s) {
      const Index k = c.col_indices()[static_cast<std::size_t>(s)];
      out.block(s) = g[static_cast<std::size_t>(i)] * c.block(s) * h[static_cast<std::size_t>(k)].transpose();
    }
  }
  return out;
}

/// Block-diagonal action of a gauge on a stacked nq x r matrix.
inline Matrix gauge_vectors(const Matrix& v, const std::vector<Matrix>& g) {
  const Index q = g.front().rows();
  Matrix out(v.rows(), v.cols());
  for (std::size_t i = 0; i < g.size(); ++i) {
    const auto row = static_cast<Index>(i) * q;
    out.middleRows(row, q) = g[i] * v.middleRows(row, q);
  }
  return out;
}

/// Sine of the angle between the spans of two vectors.
inline double principal_angle_sine(const Vector& a, const Vector& b) {
  const Vector ua = a.normalized();
  const Vector ub = b.normalized();
  return (ua - ua.dot(ub) * ub).norm();
}

}  // namespace lavdm::testing
