#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace latentgeo {

// Base of every error raised by the library. kind() is a stable
// machine-readable tag used by the CLI error documents.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual const char* kind() const noexcept { return "error"; }
};

class DimensionError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "dimension_mismatch"; }
};

class DomainError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "outside_domain"; }
};

class NumericalError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "non_finite"; }
};

// Jacobian (or weight matrix) rank fell below the relative singular-value
// tolerance, so the image of the map is not an immersion at that point.
class RankDeficiencyError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "rank_deficient"; }
};

class SingularMetricError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "singular_metric"; }
};

// A transported vector was projected to (almost) nothing.
class DegenerateTransportError : public Error {
 public:
  DegenerateTransportError(const std::string& what, std::size_t step)
      : Error(what), step_(step) {}
  const char* kind() const noexcept override { return "degenerate_transport"; }
  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

class EncoderDivergenceError : public Error {
 public:
  EncoderDivergenceError(const std::string& what, std::size_t step,
                         double round_trip_error)
      : Error(what), step_(step), round_trip_error_(round_trip_error) {}
  const char* kind() const noexcept override { return "encoder_divergence"; }
  std::size_t step() const noexcept { return step_; }
  double round_trip_error() const noexcept { return round_trip_error_; }

 private:
  std::size_t step_;
  double round_trip_error_;
};

class FormatError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "malformed_input"; }
};

// A file could not be opened or written.
class IoError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "io_error"; }
};

class TrainingDivergedError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "training_diverged"; }
};

}  // namespace latentgeo
