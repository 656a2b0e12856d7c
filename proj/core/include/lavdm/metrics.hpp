#pragma once

#include <cstdint>
#include <string_view>
#include <utility>
#include <vector>

#include "lavdm/types.hpp"
#include "lavdm/vdm.hpp"

namespace lavdm {

/// Values with a per-entry mask; masked entries are ignored by aggregation.
struct MaskedVector {
  Vector values;
  std::vector<bool> masked;

  Index size() const { return values.size(); }
  Index unmasked() const;
};

double median_of(std::vector<double> values);

/// Median over unmasked entries and the (unscaled) median absolute deviation
/// from it. Throws AllMasked when nothing is left.
std::pair<double, double> median_mad(const MaskedVector& values);
std::pair<double, double> median_mad(const std::vector<double>& values);

struct EigenComparison {
  Index l = 0;  // 1-based index into the reference spectrum
  double ratio = 0.0;
  double cosine = 0.0;
  double aligned_l2 = 0.0;
  int sign = 1;
};

/// Compares column `candidate_column` of `candidate` with column
/// `reference_column` of `reference`. Vectors are normalised to unit length;
/// the cosine is raw, aligned_l2 uses the better global sign.
EigenComparison compare_eigenpair(const SpectralResult& candidate, Index candidate_column,
                                  const SpectralResult& reference, Index reference_column);
EigenComparison compare_eigenpair(Index column, const SpectralResult& candidate, const SpectralResult& reference);

struct PointwiseFields {
  MaskedVector i2;
  MaskedVector ia;
  MaskedVector im;
};

/// Relative L2 error, cosine and relative magnitude error per q-block of w
/// against v, as given (no normalisation). I2 and Im are masked where
/// |v[i]| < 1e-7, Ia also where |w[i]| < 1e-7.
PointwiseFields pointwise_fields(const Vector& w, const Vector& v, Index q);

/// Same on unit-normalised eigenvectors, with w flipped by the sign that
/// minimises the aligned L2 distance.
PointwiseFields pointwise_fields(const SpectralResult& candidate, Index candidate_column,
                                 const SpectralResult& reference, Index reference_column);

enum class PairingMode : std::uint8_t { Index, Window };

std::string_view to_string(PairingMode mode);
PairingMode parse_pairing_mode(std::string_view name);

struct Pairing {
  PairingMode mode = PairingMode::Index;
  /// candidate column matched to each reference column 0..r-1
  std::vector<Index> candidate_for;
};

/// Index mode pairs by descending order. Window mode pairs each reference
/// vector with the unused candidate of largest |cosine| among those whose
/// eigenvalue lies within a relative window of `width` around it.
Pairing match_eigenvectors(const SpectralResult& reference, const SpectralResult& candidate, Index r,
                           PairingMode mode = PairingMode::Index, double width = 0.02);

}  // namespace lavdm
