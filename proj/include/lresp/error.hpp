#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace lresp {

// Numerical breakdown: diverging chart, rank collapse, near-tangent splitting.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what, std::optional<std::size_t> step = std::nullopt)
      : std::runtime_error(step ? what + " (step " + std::to_string(*step) + ")" : what),
        step_(step) {}

  std::optional<std::size_t> step() const { return step_; }

 private:
  std::optional<std::size_t> step_;
};

// Invalid configuration or parameter outside its admissible range.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace lresp
