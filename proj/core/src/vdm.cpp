#include "lavdm/vdm.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "lavdm/errors.hpp"

namespace lavdm {

VdmSystem assemble_vdm(const AffinityMatrix& w_alpha, const BlockSparseMatrix& connections) {
  const SparseRows& w = w_alpha.entries;
  if (w.rows() != w.cols()) {
    throw Error(ErrorKind::DimensionMismatch, "VDM affinity must be square");
  }
  if (connections.block_rows() != w.rows() || connections.block_cols() != w.cols()) {
    throw Error(ErrorKind::DimensionMismatch, "connection field does not match the affinity size");
  }
  if (!is_symmetric(w_alpha, 1e-12)) {
    throw Error(ErrorKind::AsymmetricInput, "VDM affinity is not symmetric");
  }
  const Index q = connections.block_size();
  VdmSystem system{BlockSparseMatrix(w, q), Vector::Zero(w.rows())};
  for (Index i = 0; i < w.outerSize(); ++i) {
    Index slot = system.S.row_offsets()[static_cast<std::size_t>(i)];
    for (SparseRows::InnerIterator it(w, i); it; ++it, ++slot) {
      const auto found = connections.find(i, it.col());
      if (!found) {
        throw Error(ErrorKind::MissingConnection, "no connection for edge (" + std::to_string(i) + ", " +
                                                      std::to_string(it.col()) + ")");
      }
      if (it.col() > i) {
        const auto mirror = connections.find(it.col(), i);
        if (!mirror || (connections.block(*mirror) - connections.block(*found).transpose()).cwiseAbs().maxCoeff() > 1e-10) {
          throw Error(ErrorKind::AsymmetricInput, "connection (" + std::to_string(i) + ", " +
                                                      std::to_string(it.col()) + ") is not the transpose of its mirror");
        }
      }
      system.S.block(slot) = it.value() * connections.block(*found);
      system.degrees(i) += it.value();
    }
    if (!(system.degrees(i) > 0.0)) {
      throw Error(ErrorKind::IsolatedPoint, "point " + std::to_string(i) + " has zero degree");
    }
  }
  return system;
}

SpectralResult SpectralResult::euclidean() const {
  SpectralResult out = *this;
  for (Index c = 0; c < out.vectors.cols(); ++c) {
    const double norm = out.vectors.col(c).norm();
    if (norm > 0.0) out.vectors.col(c) /= norm;
  }
  out.normalization = Normalization::Euclidean;
  return out;
}

namespace {

Vector expand_blocks(const Vector& per_point, Index q) {
  Vector out(per_point.size() * q);
  for (Index i = 0; i < per_point.size(); ++i) out.segment(i * q, q).setConstant(per_point(i));
  return out;
}

}  // namespace

SpectralResult vdm_spectrum(const VdmSystem& system, Index r, const EigenSolverOptions& options) {
  const Index q = system.fiber_dim();
  const Index dim = system.S.rows();
  if (r < 1 || r > dim) {
    throw Error(ErrorKind::InvalidArgument, "requested " + std::to_string(r) + " eigenpairs of a dimension-" +
                                                std::to_string(dim) + " operator");
  }
  if ((system.degrees.array() <= 0.0).any()) {
    throw Error(ErrorKind::IsolatedPoint, "VDM degrees must be positive");
  }
  const Vector scale = expand_blocks(system.degrees.cwiseSqrt().cwiseInverse(), q);

  EigenPairs pairs;
  if (dim <= options.dense_threshold) {
    const Matrix symmetric = scale.asDiagonal() * system.S.to_dense() * scale.asDiagonal();
    pairs = top_eigenpairs(symmetric, r);
  } else {
    const SymmetricOperator op = [&](const Matrix& x) -> Matrix {
      return scale.asDiagonal() * system.S.apply(Matrix(scale.asDiagonal() * x));
    };
    pairs = top_eigenpairs(op, dim, r, options);
  }
  canonicalize_signs(pairs.vectors);

  SpectralResult result;
  result.values = pairs.values;
  result.vectors = scale.asDiagonal() * pairs.vectors;
  result.q = q;
  result.normalization = Normalization::DegreeWeighted;
  result.iterations = pairs.iterations;
  result.dense = pairs.dense;
  return result;
}

double markov_residual(const VdmSystem& system, const SpectralResult& spectrum) {
  const Vector inv = expand_blocks(system.degrees.cwiseInverse(), system.fiber_dim());
  const Matrix applied = inv.asDiagonal() * system.S.apply(spectrum.vectors);
  double worst = 0.0;
  for (Index c = 0; c < spectrum.count(); ++c) {
    const double norm = spectrum.vectors.col(c).norm();
    worst = std::max(worst, (applied.col(c) - spectrum.values(c) * spectrum.vectors.col(c)).norm() / norm);
  }
  return worst;
}

Matrix Embedding::at(Index i) const {
  Matrix out(r, r);
  for (Index l = 0; l < r; ++l) {
    for (Index s = 0; s < r; ++s) out(l, s) = features(i, l * r + s);
  }
  return out;
}

Embedding spectral_embedding(const Vector& values, const Matrix& vectors, Index q, double t, Index r) {
  if (!(t > 0.0) || !std::isfinite(t)) throw Error(ErrorKind::InvalidArgument, "diffusion time must be positive");
  if (r < 1 || r > values.size() || r > vectors.cols()) {
    throw Error(ErrorKind::InvalidArgument, "embedding dimension exceeds the available eigenpairs");
  }
  if (q < 1 || vectors.rows() % q != 0) {
    throw Error(ErrorKind::DimensionMismatch, "vector length is not a multiple of the fiber dimension");
  }
  const bool integer_t = t == std::round(t);
  Matrix weight(r, r);
  for (Index l = 0; l < r; ++l) {
    for (Index s = 0; s < r; ++s) {
      const double product = values(l) * values(s);
      if (product < 0.0 && !integer_t) {
        throw Error(ErrorKind::FractionalPowerOfNegative,
                    "eigenvalue product for pair (" + std::to_string(l + 1) + ", " + std::to_string(s + 1) +
                        ") is negative and t = " + std::to_string(t) + " is not an integer");
      }
      weight(l, s) = std::pow(product, t);
    }
  }
  const Index n = vectors.rows() / q;
  Embedding out;
  out.r = r;
  out.t = t;
  out.features.resize(n, r * r);
  for (Index i = 0; i < n; ++i) {
    const auto block = vectors.block(i * q, 0, q, r);
    const Matrix gram = block.transpose() * block;
    for (Index l = 0; l < r; ++l) {
      for (Index s = 0; s < r; ++s) out.features(i, l * r + s) = weight(l, s) * gram(l, s);
    }
  }
  return out;
}

Embedding vdm_embed(const SpectralResult& spectrum, double t, Index r) {
  return spectral_embedding(spectrum.values, spectrum.vectors, spectrum.q, t, r);
}

}  // namespace lavdm
