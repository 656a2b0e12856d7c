#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace lavdm {

enum class ErrorKind : std::uint8_t {
  UnsupportedDensity,
  DegenerateJacobian,
  ChartExit,
  BadBandwidth,
  DimensionMismatch,
  IsolatedPoint,
  IsolatedLandmark,
  TooFewNeighbors,
  RankDeficient,
  AsymmetricInput,
  SolverFailure,
  FractionalPowerOfNegative,
  MissingConnection,
  SizeGuard,
  NoCommonLandmark,
  ZeroReferenceEigenvalue,
  AllMasked,
  InvalidArgument,
  ConfigError,
  IoError,
  FormatError,
};

std::string_view to_string(ErrorKind kind);

/// Every failure raised by the library carries a machine-checkable kind.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message);

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace lavdm
