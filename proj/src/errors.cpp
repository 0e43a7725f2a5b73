#include "fcs/errors.hpp"

namespace fcs {

const char* error_kind_name(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::NotHermitian: return "NotHermitian";
    case ErrorKind::SingularMatrix: return "SingularMatrix";
    case ErrorKind::DimensionTooLarge: return "DimensionTooLarge";
    case ErrorKind::NonIntegerSpectrum: return "NonIntegerSpectrum";
    case ErrorKind::SpectrumOutOfRange: return "SpectrumOutOfRange";
    case ErrorKind::DegenerateFermiLevel: return "DegenerateFermiLevel";
    case ErrorKind::CutoffTooSmall: return "CutoffTooSmall";
    case ErrorKind::EmptyWindow: return "EmptyWindow";
    case ErrorKind::NonCommutingState: return "NonCommutingState";
    case ErrorKind::UnwrapFailure: return "UnwrapFailure";
    case ErrorKind::StepUnderflow: return "StepUnderflow";
    case ErrorKind::KTooLarge: return "KTooLarge";
    case ErrorKind::UnknownKind: return "UnknownKind";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
  }
  return "UnknownError";
}

bool is_numerical_failure(ErrorKind kind) {
  return kind == ErrorKind::UnwrapFailure || kind == ErrorKind::StepUnderflow;
}

}  // namespace fcs
