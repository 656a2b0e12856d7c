#include "lavdm/landmark.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "lavdm/errors.hpp"

namespace lavdm {

namespace {

Vector expand_blocks(const Vector& per_point, Index q) {
  Vector out(per_point.size() * q);
  for (Index i = 0; i < per_point.size(); ++i) out.segment(i * q, q).setConstant(per_point(i));
  return out;
}

Vector power(const Vector& v, double exponent) {
  if (exponent == 0.0) return Vector::Ones(v.size());
  return v.array().pow(exponent).matrix();
}

void check_unit_interval(double value, const char* name) {
  if (!(value >= 0.0 && value <= 1.0)) {
    throw Error(ErrorKind::InvalidArgument, std::string(name) + " must lie in [0, 1], got " + std::to_string(value));
  }
}

}  // namespace

LandmarkAssembly assemble_landmark(const AffinityMatrix& w, const BlockSparseMatrix& connections) {
  const SparseRows& entries = w.entries;
  if (connections.block_rows() != entries.rows() || connections.block_cols() != entries.cols()) {
    throw Error(ErrorKind::DimensionMismatch, "connection field does not match the landmark affinity size");
  }
  Vector column_sums = Vector::Zero(entries.cols());
  for (Index i = 0; i < entries.outerSize(); ++i) {
    for (SparseRows::InnerIterator it(entries, i); it; ++it) column_sums(it.col()) += it.value();
  }

  LandmarkAssembly out;
  std::vector<Index> new_index(static_cast<std::size_t>(entries.cols()), -1);
  for (Index k = 0; k < entries.cols(); ++k) {
    if (column_sums(k) > 0.0) {
      new_index[static_cast<std::size_t>(k)] = static_cast<Index>(out.kept_landmarks.size());
      out.kept_landmarks.push_back(k);
    } else {
      out.dropped_landmarks.push_back(k);
    }
  }

  out.W.epsilon = w.epsilon;
  out.W.truncation = w.truncation;
  if (out.dropped_landmarks.empty()) {
    out.W.entries = entries;
  } else {
    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(static_cast<std::size_t>(entries.nonZeros()));
    for (Index i = 0; i < entries.outerSize(); ++i) {
      for (SparseRows::InnerIterator it(entries, i); it; ++it) {
        if (it.value() != 0.0) triplets.emplace_back(i, new_index[static_cast<std::size_t>(it.col())], it.value());
      }
    }
    out.W.entries.resize(entries.rows(), static_cast<Index>(out.kept_landmarks.size()));
    out.W.entries.setFromTriplets(triplets.begin(), triplets.end());
  }
  out.W.entries.makeCompressed();

  out.S = BlockSparseMatrix(out.W.entries, connections.block_size());
  const SparseRows& kept = out.W.entries;
  for (Index i = 0; i < kept.outerSize(); ++i) {
    Index slot = out.S.row_offsets()[static_cast<std::size_t>(i)];
    for (SparseRows::InnerIterator it(kept, i); it; ++it, ++slot) {
      const Index original = out.kept_landmarks[static_cast<std::size_t>(it.col())];
      const auto found = connections.find(i, original);
      if (!found) {
        throw Error(ErrorKind::MissingConnection, "no connection for edge (" + std::to_string(i) + ", " +
                                                      std::to_string(original) + ")");
      }
      out.S.block(slot) = it.value() * connections.block(*found);
    }
  }
  return out;
}

LandmarkAssembly assemble_landmark(const PointCloud& x, const PointCloud& z, double epsilon, double truncation,
                                   const BlockSparseMatrix& connections) {
  return assemble_landmark(gaussian_affinity(x, z, epsilon, truncation), connections);
}

LandmarkAssembly assemble_landmark(const PointCloud& x, const PointCloud& z, double epsilon, double truncation,
                                   const FrameField& frames_x, const FrameField& frames_z) {
  const AffinityMatrix w = gaussian_affinity(x, z, epsilon, truncation);
  return assemble_landmark(w, connections_on_pattern(w.entries, frames_x, frames_z));
}

LandmarkDegrees landmark_degrees(const AffinityMatrix& w, double beta, double alpha) {
  check_unit_interval(beta, "beta");
  check_unit_interval(alpha, "alpha");
  const Vector rows = row_degrees(w);
  const Vector cols = column_degrees(w);
  const SparseRows& e = w.entries;

  LandmarkDegrees d;
  d.d_z = e.transpose() * rows;
  const Vector z_scale = power(d.d_z, -beta);
  d.d_xbeta = e * Vector(z_scale.cwiseProduct(cols));
  const Vector x_scale = power(d.d_xbeta, -alpha);
  const Vector inner = e.transpose() * x_scale;
  d.d_ba = x_scale.cwiseProduct(e * Vector(z_scale.cwiseProduct(inner)));
  return d;
}

Vector LandmarkPipelineState::row_scale() const {
  return d_ba.cwiseSqrt().cwiseInverse().cwiseProduct(power(d_xbeta, -alpha));
}

Vector LandmarkPipelineState::col_scale() const { return power(d_z, -0.5 * beta); }

void LandmarkPipelineState::check_invariants(double tol) const {
  if ((d_z.array() <= 0.0).any() || (d_xbeta.array() <= 0.0).any() || (d_ba.array() <= 0.0).any()) {
    throw Error(ErrorKind::InvalidArgument, "landmark degrees must be strictly positive");
  }
  const SparseRows& e = W.entries;
  for (Index i = 0; i < e.outerSize(); ++i) {
    Index slot = S.row_offsets()[static_cast<std::size_t>(i)];
    for (SparseRows::InnerIterator it(e, i); it; ++it, ++slot) {
      const double norm = S.block(slot).jacobiSvd().singularValues()(0);
      if (std::abs(norm - it.value()) > tol * std::max(1.0, it.value())) {
        throw Error(ErrorKind::InvalidArgument, "block (" + std::to_string(i) + ", " + std::to_string(it.col()) +
                                                    ") has norm " + std::to_string(norm) + " but affinity " +
                                                    std::to_string(it.value()));
      }
    }
  }
  const Vector ones = Vector::Ones(e.cols());
  const Vector expected = e.transpose() * Vector(e * ones);
  if ((expected - d_z).cwiseAbs().maxCoeff() > tol * expected.cwiseAbs().maxCoeff()) {
    throw Error(ErrorKind::InvalidArgument, "landmark degree D_z differs from (W^T W) 1");
  }
}

LandmarkPipelineState make_pipeline_state(LandmarkAssembly assembly, double beta, double alpha) {
  LandmarkDegrees d = landmark_degrees(assembly.W, beta, alpha);
  LandmarkPipelineState state;
  state.S = std::move(assembly.S);
  state.W = std::move(assembly.W);
  state.d_z = std::move(d.d_z);
  state.d_xbeta = std::move(d.d_xbeta);
  state.d_ba = std::move(d.d_ba);
  state.beta = beta;
  state.alpha = alpha;
  return state;
}

SpectralResult LandmarkSpectralResult::as_spectrum() const {
  SpectralResult out;
  out.values = values;
  out.vectors = left_vectors;
  out.q = q;
  out.normalization = Normalization::DegreeWeighted;
  out.iterations = iterations;
  out.dense = dense;
  return out;
}

LandmarkSpectralResult landmark_svd(const LandmarkPipelineState& state, Index r, const EigenSolverOptions& options) {
  const Index q = state.fiber_dim();
  const Index n = state.points();
  const Index m = state.landmarks();
  const Index nq = n * q;
  const Index mq = m * q;
  if (r < 1 || r > mq || r > nq) {
    throw Error(ErrorKind::InvalidArgument, "requested " + std::to_string(r) + " singular triplets of a " +
                                                std::to_string(nq) + " x " + std::to_string(mq) + " matrix");
  }
  const Vector rs = state.row_scale();
  const Vector cs = state.col_scale();

  LandmarkSpectralResult out;
  out.q = q;
  if (nq <= options.dense_threshold) {
    const Matrix a = state.S.dense_rows(0, n, rs, cs);
    Eigen::BDCSVD<Matrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    if (svd.info() != Eigen::Success) throw Error(ErrorKind::SolverFailure, "dense SVD failed");
    out.singular_values = svd.singularValues().head(r);
    out.left_orthonormal = svd.matrixU().leftCols(r);
    out.right_vectors = svd.matrixV().leftCols(r);
    out.dense = true;
  } else {
    // Gram matrix A^T A, accumulated over row chunks of at most ~4M entries.
    Matrix gram = Matrix::Zero(mq, mq);
    const Index chunk = std::max<Index>(1, (Index{1} << 22) / std::max<Index>(1, q * mq));
    for (Index begin = 0; begin < n; begin += chunk) {
      const Index end = std::min(n, begin + chunk);
      const Matrix rows = state.S.dense_rows(begin, end, rs, cs);
      gram.selfadjointView<Eigen::Lower>().rankUpdate(rows.transpose());
    }
    gram.triangularView<Eigen::StrictlyUpper>() = gram.transpose();

    EigenPairs pairs;
    if (mq <= options.dense_threshold) {
      pairs = top_eigenpairs(gram, r);
    } else {
      const SymmetricOperator op = [&gram](const Matrix& x) -> Matrix { return gram * x; };
      pairs = top_eigenpairs(op, mq, r, options);
    }
    out.iterations = pairs.iterations;
    out.singular_values = pairs.values.cwiseMax(0.0).cwiseSqrt();
    out.right_vectors = pairs.vectors;

    const Vector rq = expand_blocks(rs, q);
    const Vector cq = expand_blocks(cs, q);
    Matrix av = rq.asDiagonal() * state.S.apply(Matrix(cq.asDiagonal() * out.right_vectors));
    for (Index j = 0; j < r; ++j) {
      const double sigma = out.singular_values(j);
      const double norm = av.col(j).norm();
      if (sigma > 0.0 && norm > 0.0) av.col(j) /= (sigma > 1e-8 * out.singular_values(0) ? sigma : norm);
    }
    out.left_orthonormal = std::move(av);
  }

  for (Index j = 0; j < r; ++j) {
    Index arg = 0;
    out.left_orthonormal.col(j).cwiseAbs().maxCoeff(&arg);
    if (out.left_orthonormal(arg, j) < 0.0) {
      out.left_orthonormal.col(j) *= -1.0;
      out.right_vectors.col(j) *= -1.0;
    }
  }
  out.values = out.singular_values.cwiseAbs2();
  out.left_vectors = expand_blocks(state.d_ba.cwiseSqrt().cwiseInverse(), q).asDiagonal() * out.left_orthonormal;
  return out;
}

DenseMarkovOracle dense_markov_oracle(const LandmarkPipelineState& state) {
  const Index q = state.fiber_dim();
  const Index nq = state.points() * q;
  if (nq > 4000) {
    throw Error(ErrorKind::SizeGuard, "dense oracle limited to nq <= 4000, got " + std::to_string(nq));
  }
  const Matrix s = state.S.to_dense();
  const Vector x_scale = expand_blocks(power(state.d_xbeta, -state.alpha), q);
  const Vector z_scale = expand_blocks(power(state.d_z, -state.beta), q);
  const Matrix left = x_scale.asDiagonal() * s;

  DenseMarkovOracle out;
  out.s_beta_alpha = left * z_scale.asDiagonal() * left.transpose();
  out.markov = expand_blocks(state.d_ba.cwiseInverse(), q).asDiagonal() * out.s_beta_alpha;

  Eigen::EigenSolver<Matrix> solver(out.markov, true);
  if (solver.info() != Eigen::Success) throw Error(ErrorKind::SolverFailure, "dense oracle eigensolver failed");
  const Vector re = solver.eigenvalues().real();
  std::vector<Index> order(static_cast<std::size_t>(nq));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return re(a) > re(b); });
  out.values.resize(nq);
  out.vectors.resize(nq, nq);
  const auto vecs = solver.eigenvectors();
  for (Index j = 0; j < nq; ++j) {
    const Index src = order[static_cast<std::size_t>(j)];
    out.values(j) = re(src);
    Vector v = vecs.col(src).real();
    // A complex eigenvector of a real eigenvalue may carry a global phase.
    if (v.norm() < 1e-8) v = vecs.col(src).imag();
    out.vectors.col(j) = v.normalized();
  }
  canonicalize_signs(out.vectors);
  return out;
}

Embedding lavdm_embed(const LandmarkSpectralResult& spectrum, double t, Index r) {
  return spectral_embedding(spectrum.values, spectrum.left_vectors, spectrum.q, t, r);
}

Matrix effective_transport(const Vector& w_x, const Vector& w_y, const Vector& d_z, double beta,
                           const std::vector<Matrix>& omega_x, const std::vector<Matrix>& omega_y) {
  const Index m = w_x.size();
  if (w_y.size() != m || static_cast<Index>(omega_x.size()) != m || static_cast<Index>(omega_y.size()) != m) {
    throw Error(ErrorKind::DimensionMismatch, "effective transport inputs disagree on the landmark count");
  }
  if (beta != 0.0 && d_z.size() != m) {
    throw Error(ErrorKind::DimensionMismatch, "landmark degrees are required when beta is nonzero");
  }
  if (m == 0) throw Error(ErrorKind::NoCommonLandmark, "no landmarks");
  const Index q = omega_x.front().rows();
  Matrix sum = Matrix::Zero(q, q);
  double total = 0.0;
  for (Index k = 0; k < m; ++k) {
    double c = w_x(k) * w_y(k);
    if (c <= 0.0) continue;
    if (beta != 0.0) c *= std::pow(d_z(k), -beta);
    sum.noalias() += c * omega_x[static_cast<std::size_t>(k)] * omega_y[static_cast<std::size_t>(k)].transpose();
    total += c;
  }
  if (!(total > 0.0)) {
    throw Error(ErrorKind::NoCommonLandmark, "no landmark lies within the truncation radius of both points");
  }
  return sum / total;
}

Matrix effective_transport(const Vector& x, const Vector& y, const PointCloud& z, double epsilon, double beta,
                           double truncation, const Matrix& frame_x, const Matrix& frame_y,
                           const FrameField& frames_z, const Vector& d_z) {
  if (!(epsilon > 0.0)) throw Error(ErrorKind::BadBandwidth, "epsilon must be positive");
  if (x.size() != z.dim() || y.size() != z.dim()) {
    throw Error(ErrorKind::DimensionMismatch, "points and landmarks live in different dimensions");
  }
  if (frames_z.size() != z.size()) {
    throw Error(ErrorKind::DimensionMismatch, "landmark frame count does not match the landmark cloud");
  }
  const Index m = z.size();
  const Index q = frame_x.cols();
  Vector w_x = Vector::Zero(m);
  Vector w_y = Vector::Zero(m);
  std::vector<Matrix> omega_x(static_cast<std::size_t>(m), Matrix::Zero(q, q));
  std::vector<Matrix> omega_y(static_cast<std::size_t>(m), Matrix::Zero(q, q));
  for (Index k = 0; k < m; ++k) {
    const double dx = (z.points.row(k).transpose() - x).squaredNorm();
    const double dy = (z.points.row(k).transpose() - y).squaredNorm();
    if (dx > truncation * epsilon || dy > truncation * epsilon) continue;
    w_x(k) = std::exp(-dx / epsilon);
    w_y(k) = std::exp(-dy / epsilon);
    const Matrix& fz = frames_z.frames[static_cast<std::size_t>(k)];
    omega_x[static_cast<std::size_t>(k)] = align_connection(frame_x, fz);
    omega_y[static_cast<std::size_t>(k)] = align_connection(frame_y, fz);
  }
  return effective_transport(w_x, w_y, d_z, beta, omega_x, omega_y);
}

}  // namespace lavdm
