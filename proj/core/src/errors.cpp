#include "lavdm/errors.hpp"

namespace lavdm {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::UnsupportedDensity: return "UnsupportedDensity";
    case ErrorKind::DegenerateJacobian: return "DegenerateJacobian";
    case ErrorKind::ChartExit: return "ChartExit";
    case ErrorKind::BadBandwidth: return "BadBandwidth";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::IsolatedPoint: return "IsolatedPoint";
    case ErrorKind::IsolatedLandmark: return "IsolatedLandmark";
    case ErrorKind::TooFewNeighbors: return "TooFewNeighbors";
    case ErrorKind::RankDeficient: return "RankDeficient";
    case ErrorKind::AsymmetricInput: return "AsymmetricInput";
    case ErrorKind::SolverFailure: return "SolverFailure";
    case ErrorKind::FractionalPowerOfNegative: return "FractionalPowerOfNegative";
    case ErrorKind::MissingConnection: return "MissingConnection";
    case ErrorKind::SizeGuard: return "SizeGuard";
    case ErrorKind::NoCommonLandmark: return "NoCommonLandmark";
    case ErrorKind::ZeroReferenceEigenvalue: return "ZeroReferenceEigenvalue";
    case ErrorKind::AllMasked: return "AllMasked";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::ConfigError: return "ConfigError";
    case ErrorKind::IoError: return "IoError";
    case ErrorKind::FormatError: return "FormatError";
  }
  return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

}  // namespace lavdm
