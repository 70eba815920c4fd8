#pragma once

#include <stdexcept>
#include <string>

namespace yaglom {

// Error taxonomy mirrored by the C API status codes and the CLI exit codes.
struct ValidationError : std::runtime_error {
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

struct NumericalError : std::runtime_error {
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

// A Sylvester operator with (numerically) overlapping spectra. Recoverable:
// the critical-point search uses this as a signal, not as a failure.
struct SingularSylvesterError : NumericalError {
  explicit SingularSylvesterError(const std::string& what) : NumericalError(what) {}
};

struct IoError : std::runtime_error {
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

struct UnsupportedError : std::runtime_error {
  explicit UnsupportedError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace yaglom
