#pragma once

#include <stdexcept>
#include <string>

namespace doseforge {

// invalid configuration, arguments, or input data
class config_error : public std::runtime_error {
 public:
  explicit config_error(const std::string& msg) : std::runtime_error(msg) {}
};

// sampler failed to converge or to initialize
class convergence_error : public std::runtime_error {
 public:
  explicit convergence_error(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace doseforge
