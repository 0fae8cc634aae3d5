#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ksdagg {

/// Input data contains non-finite values or has the wrong shape.
class InvalidDataError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Data is finite but carries no usable spread (e.g. all points coincide).
class DegenerateDataError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Invalid parameters: sizes, levels, bandwidths, collections.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A point lies outside the support of a model density.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A score function returned a non-finite value.
class ModelEvaluationError : public std::runtime_error {
 public:
  ModelEvaluationError(const std::string& what, std::size_t row)
      : std::runtime_error(what), row_(row) {}

  std::size_t row() const noexcept { return row_; }

 private:
  std::size_t row_;
};

/// The requested operation needs something the model cannot provide.
class CapabilityError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace ksdagg
