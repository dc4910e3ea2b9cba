#pragma once

#include <stdexcept>
#include <string>

namespace relnav {

/// Thrown for contract violations and unrecoverable numerical failures.
/// Recoverable domain outcomes (FDE failure, map unavailability, planner
/// infeasibility) are values, not exceptions.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace relnav
