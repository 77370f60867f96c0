#pragma once

#include <stdexcept>
#include <string>

namespace hsc {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NonPositiveInertia : public Error {
 public:
  using Error::Error;
};

class DegenerateStiffness : public Error {
 public:
  using Error::Error;
};

class ZeroActivation : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class EmptyHorizon : public Error {
 public:
  using Error::Error;
};

class GmresBreakdown : public Error {
 public:
  using Error::Error;
};

class EmptyTrace : public Error {
 public:
  using Error::Error;
};

/// Raised when a config or settings struct violates one of its invariants.
class ValidationError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(int line, std::string key, const std::string& what)
      : Error("line " + std::to_string(line) + (key.empty() ? "" : " [" + key + "]") + ": " + what),
        line_(line),
        key_(std::move(key)) {}

  int line() const { return line_; }
  const std::string& key() const { return key_; }

 private:
  int line_;
  std::string key_;
};

/// Solver failures carry the simulation time at which they happened.
class SolverFailure : public Error {
 public:
  SolverFailure(const std::string& what, double t)
      : Error(what + " at t=" + std::to_string(t)), time_(t) {}
  double time() const { return time_; }

 private:
  double time_;
};

class InitializationFailed : public SolverFailure {
 public:
  using SolverFailure::SolverFailure;
};

class SolverDiverged : public SolverFailure {
 public:
  using SolverFailure::SolverFailure;
};

}  // namespace hsc
