#include "lavdm/kernel.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "lavdm/errors.hpp"

namespace lavdm {

AffinityMatrix gaussian_affinity(const RowMatrix& a, const RowMatrix& b, double epsilon,
                                 double truncation) {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
    throw Error(ErrorKind::BadBandwidth, "epsilon must be positive, got " + std::to_string(epsilon));
  }
  if (a.cols() != b.cols()) {
    throw Error(ErrorKind::DimensionMismatch, "point sets live in R^" + std::to_string(a.cols()) +
                                                  " and R^" + std::to_string(b.cols()));
  }
  if (!(truncation > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "truncation multiple must be positive");
  }
  const Index n = a.rows();
  const Index m = b.rows();
  const double cutoff = truncation * epsilon;

  // Row-wise fill into per-row buffers, then one compressed copy.
  std::vector<std::vector<std::pair<int, double>>> rows(static_cast<std::size_t>(n));
#pragma omp parallel for schedule(static)
  for (Index i = 0; i < n; ++i) {
    auto& row = rows[static_cast<std::size_t>(i)];
    if (std::isinf(truncation)) row.reserve(static_cast<std::size_t>(m));
    for (Index k = 0; k < m; ++k) {
      const double d2 = (a.row(i) - b.row(k)).squaredNorm();
      if (d2 <= cutoff) row.emplace_back(static_cast<int>(k), std::exp(-d2 / epsilon));
    }
  }
  AffinityMatrix w;
  w.epsilon = epsilon;
  w.truncation = truncation;
  w.entries.resize(n, m);
  Eigen::VectorXi counts(n);
  for (Index i = 0; i < n; ++i) counts(i) = static_cast<int>(rows[static_cast<std::size_t>(i)].size());
  w.entries.reserve(counts);
  for (Index i = 0; i < n; ++i) {
    for (const auto& [k, value] : rows[static_cast<std::size_t>(i)]) w.entries.insert(i, k) = value;
  }
  w.entries.makeCompressed();
  return w;
}

AffinityMatrix gaussian_affinity(const PointCloud& a, const PointCloud& b, double epsilon,
                                 double truncation) {
  return gaussian_affinity(a.points, b.points, epsilon, truncation);
}

Vector row_degrees(const AffinityMatrix& w) {
  Vector d = w.entries * Vector::Ones(w.cols());
  for (Index i = 0; i < d.size(); ++i) {
    if (!(d(i) > 0.0)) {
      throw Error(ErrorKind::IsolatedPoint,
                  "row " + std::to_string(i) + " has zero degree; bandwidth too small for the sampling");
    }
  }
  return d;
}

Vector column_degrees(const AffinityMatrix& w) {
  Vector d = w.entries.transpose() * Vector::Ones(w.rows());
  for (Index k = 0; k < d.size(); ++k) {
    if (!(d(k) > 0.0)) {
      throw Error(ErrorKind::IsolatedLandmark, "column " + std::to_string(k) + " has zero degree");
    }
  }
  return d;
}

AffinityMatrix alpha_normalize(const AffinityMatrix& w, const Vector& degrees, double alpha) {
  if (w.rows() != w.cols() || degrees.size() != w.rows()) {
    throw Error(ErrorKind::DimensionMismatch, "alpha_normalize needs a square matrix and matching degrees");
  }
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "alpha must lie in [0, 1]");
  }
  for (Index i = 0; i < degrees.size(); ++i) {
    if (!(degrees(i) > 0.0)) {
      throw Error(ErrorKind::IsolatedPoint, "row " + std::to_string(i) + " has zero degree");
    }
  }
  AffinityMatrix out = w;
  if (alpha == 0.0) return out;
  const Vector scale = degrees.array().pow(-alpha);
  for (Index i = 0; i < out.entries.outerSize(); ++i) {
    for (SparseRows::InnerIterator it(out.entries, i); it; ++it) {
      it.valueRef() *= scale(i) * scale(it.col());
    }
  }
  return out;
}

AffinityMatrix scaled(const AffinityMatrix& w, double c) {
  AffinityMatrix out = w;
  out.entries *= c;
  return out;
}

bool is_symmetric(const AffinityMatrix& w, double tol) {
  if (w.rows() != w.cols()) return false;
  const SparseRows transposed = w.entries.transpose();
  const double scale = w.entries.nonZeros() ? w.entries.coeffs().cwiseAbs().maxCoeff() : 1.0;
  SparseRows diff = w.entries - transposed;
  diff.makeCompressed();
  const double worst = diff.nonZeros() ? diff.coeffs().cwiseAbs().maxCoeff() : 0.0;
  return worst <= tol * scale;
}

}  // namespace lavdm
