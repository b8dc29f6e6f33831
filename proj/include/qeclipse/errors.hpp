#pragma once

#include <stdexcept>
#include <string>

namespace qeclipse {

// Too many trials lost to non-converged solves.
struct SolverBudgetError : std::runtime_error {
  explicit SolverBudgetError(const std::string& what) : std::runtime_error(what) {}
};

struct IoError : std::runtime_error {
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace qeclipse
