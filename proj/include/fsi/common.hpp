#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace fsi {

using Index = std::int64_t;
using Vector2 = Eigen::Vector2d;

/// Thrown when a caller breaks a documented precondition (wrong sizes,
/// a fluid form on a solid triangle, ...). Never thrown for numerical trouble.
class ContractViolation : public std::logic_error {
public:
  using std::logic_error::logic_error;
};

/// Numerical failure tagged with the module that raised it.
class NumericalError : public std::runtime_error {
public:
  NumericalError(std::string module, const std::string& what)
      : std::runtime_error(module + ": " + what), module_(std::move(module)) {}

  const std::string& module() const noexcept { return module_; }

private:
  std::string module_;
};

inline void require(bool condition, const std::string& message) {
  if (!condition) throw ContractViolation(message);
}

} // namespace fsi
