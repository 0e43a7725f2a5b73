#pragma once

#include <stdexcept>
#include <string>

namespace fcs {

enum class ErrorKind {
  NotHermitian,
  SingularMatrix,
  DimensionTooLarge,
  NonIntegerSpectrum,
  SpectrumOutOfRange,
  DegenerateFermiLevel,
  CutoffTooSmall,
  EmptyWindow,
  NonCommutingState,
  UnwrapFailure,
  StepUnderflow,
  KTooLarge,
  UnknownKind,
  InvalidArgument,
};

const char* error_kind_name(ErrorKind kind);

/// True for failures of the numerics (as opposed to invalid inputs).
/// The CLI maps these to exit code 3, everything else to 2.
bool is_numerical_failure(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(error_kind_name(kind)) + ": " + message),
        kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace fcs
