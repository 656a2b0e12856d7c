#include "lavdm/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "lavdm/errors.hpp"

namespace lavdm {

namespace {

constexpr double kMaskCutoff = 1e-7;

Vector unit_column(const SpectralResult& s, Index column) {
  if (column < 0 || column >= s.vectors.cols()) {
    throw Error(ErrorKind::InvalidArgument, "eigenvector index " + std::to_string(column + 1) + " out of range");
  }
  Vector v = s.vectors.col(column);
  const double norm = v.norm();
  if (norm > 0.0) v /= norm;
  return v;
}

}  // namespace

Index MaskedVector::unmasked() const {
  return static_cast<Index>(std::count(masked.begin(), masked.end(), false));
}

double median_of(std::vector<double> values) {
  if (values.empty()) throw Error(ErrorKind::AllMasked, "median of an empty set");
  const std::size_t mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
  const double upper = values[mid];
  if (values.size() % 2 == 1) return upper;
  const double lower = *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

std::pair<double, double> median_mad(const std::vector<double>& values) {
  const double median = median_of(values);
  std::vector<double> deviations(values.size());
  std::transform(values.begin(), values.end(), deviations.begin(), [median](double x) { return std::abs(x - median); });
  return {median, median_of(std::move(deviations))};
}

std::pair<double, double> median_mad(const MaskedVector& values) {
  std::vector<double> kept;
  kept.reserve(static_cast<std::size_t>(values.size()));
  for (Index i = 0; i < values.size(); ++i) {
    if (!values.masked[static_cast<std::size_t>(i)]) kept.push_back(values.values(i));
  }
  if (kept.empty()) throw Error(ErrorKind::AllMasked, "every entry is masked");
  return median_mad(kept);
}

EigenComparison compare_eigenpair(const SpectralResult& candidate, Index candidate_column,
                                  const SpectralResult& reference, Index reference_column) {
  if (candidate.vectors.rows() != reference.vectors.rows()) {
    throw Error(ErrorKind::DimensionMismatch, "eigenvectors have different lengths");
  }
  const Vector w = unit_column(candidate, candidate_column);
  const Vector v = unit_column(reference, reference_column);
  const double mu = reference.values(reference_column);
  if (mu == 0.0) {
    throw Error(ErrorKind::ZeroReferenceEigenvalue,
                "reference eigenvalue " + std::to_string(reference_column + 1) + " is zero");
  }
  EigenComparison out;
  out.l = reference_column + 1;
  out.ratio = std::abs(candidate.values(candidate_column) - mu) / std::abs(mu);
  out.cosine = w.dot(v);
  const double plus = (w - v).norm();
  const double minus = (w + v).norm();
  out.sign = minus < plus ? -1 : 1;
  out.aligned_l2 = std::min(plus, minus);
  return out;
}

EigenComparison compare_eigenpair(Index column, const SpectralResult& candidate, const SpectralResult& reference) {
  return compare_eigenpair(candidate, column, reference, column);
}

PointwiseFields pointwise_fields(const Vector& w, const Vector& v, Index q) {
  if (q < 1 || w.size() != v.size() || v.size() % q != 0) {
    throw Error(ErrorKind::DimensionMismatch, "pointwise fields need equal lengths divisible by q");
  }
  const Index n = v.size() / q;
  PointwiseFields out;
  for (MaskedVector* f : {&out.i2, &out.ia, &out.im}) {
    f->values = Vector::Constant(n, std::nan(""));
    f->masked.assign(static_cast<std::size_t>(n), true);
  }
  for (Index i = 0; i < n; ++i) {
    const auto wi = w.segment(i * q, q);
    const auto vi = v.segment(i * q, q);
    const double nv = vi.norm();
    const double nw = wi.norm();
    const auto slot = static_cast<std::size_t>(i);
    if (nv >= kMaskCutoff) {
      out.i2.values(i) = (wi - vi).norm() / nv;
      out.im.values(i) = std::abs(nv - nw) / nv;
      out.i2.masked[slot] = false;
      out.im.masked[slot] = false;
      if (nw >= kMaskCutoff) {
        out.ia.values(i) = wi.dot(vi) / (nv * nw);
        out.ia.masked[slot] = false;
      }
    }
  }
  return out;
}

PointwiseFields pointwise_fields(const SpectralResult& candidate, Index candidate_column,
                                 const SpectralResult& reference, Index reference_column) {
  const Vector v = unit_column(reference, reference_column);
  Vector w = unit_column(candidate, candidate_column);
  if ((w + v).norm() < (w - v).norm()) w = -w;
  return pointwise_fields(w, v, reference.q);
}

std::string_view to_string(PairingMode mode) { return mode == PairingMode::Index ? "index" : "window"; }

PairingMode parse_pairing_mode(std::string_view name) {
  if (name == "index") return PairingMode::Index;
  if (name == "window") return PairingMode::Window;
  throw Error(ErrorKind::InvalidArgument, "unknown pairing mode '" + std::string(name) + "'");
}

Pairing match_eigenvectors(const SpectralResult& reference, const SpectralResult& candidate, Index r,
                           PairingMode mode, double width) {
  if (reference.count() < r || candidate.count() < r) {
    throw Error(ErrorKind::InvalidArgument, "both spectra need at least r pairs");
  }
  Pairing out;
  out.mode = mode;
  out.candidate_for.resize(static_cast<std::size_t>(r));
  for (Index l = 0; l < r; ++l) out.candidate_for[static_cast<std::size_t>(l)] = l;
  if (mode == PairingMode::Index) return out;

  const Index available = candidate.count();
  std::vector<bool> used(static_cast<std::size_t>(available), false);
  std::vector<Vector> cand(static_cast<std::size_t>(available));
  for (Index j = 0; j < available; ++j) cand[static_cast<std::size_t>(j)] = unit_column(candidate, j);
  for (Index l = 0; l < r; ++l) {
    const Vector v = unit_column(reference, l);
    const double lambda = reference.values(l);
    Index best = -1;
    double best_cos = -1.0;
    for (Index j = 0; j < available; ++j) {
      if (used[static_cast<std::size_t>(j)]) continue;
      if (std::abs(candidate.values(j) - lambda) > width * std::abs(lambda)) continue;
      const double c = std::abs(cand[static_cast<std::size_t>(j)].dot(v));
      if (c > best_cos) {
        best_cos = c;
        best = j;
      }
    }
    if (best < 0) {
      // Nothing inside the window: keep the index pairing when possible.
      if (!used[static_cast<std::size_t>(l)]) best = l;
      for (Index j = 0; j < available && best < 0; ++j) {
        if (!used[static_cast<std::size_t>(j)]) {
          best = j;
          break;
        }
      }
    }
    used[static_cast<std::size_t>(best)] = true;
    out.candidate_for[static_cast<std::size_t>(l)] = best;
  }
  return out;
}

}  // namespace lavdm
