#pragma once

#include <stdexcept>
#include <string>

namespace faultloc {

// Bad documents, bad parameters, violated invariants. CLI exit code 2.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

// Missing or unreadable/unwritable files. CLI exit code 3.
class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

// Singular systems, non-finite arithmetic, diverged solves. CLI exit code 4.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

// Raised when a recovered injection vector is identically zero.
class NoFaultDetected : public std::runtime_error {
 public:
  NoFaultDetected() : std::runtime_error("no fault detected") {}
};

}  // namespace faultloc
