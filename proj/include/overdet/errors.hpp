#pragma once

#include <stdexcept>
#include <string>

namespace overdet {

/// Base class for all numerical/domain failures raised by the library.
/// `kind()` is a stable machine-readable tag used by the CLI when mapping
/// failures to exit codes and messages.
class OverdetError : public std::runtime_error {
public:
  OverdetError(std::string kind, const std::string& what)
      : std::runtime_error(what), kind_(std::move(kind)) {}
  const std::string& kind() const { return kind_; }

private:
  std::string kind_;
};

struct InvalidParams : OverdetError {
  explicit InvalidParams(const std::string& w) : OverdetError("invalid_params", w) {}
};

struct StepFailure : OverdetError {
  explicit StepFailure(const std::string& w) : OverdetError("step_failure", w) {}
};

struct HorizonTooShort : OverdetError {
  explicit HorizonTooShort(const std::string& w) : OverdetError("horizon_too_short", w) {}
};

struct DegenerateCritical : OverdetError {
  explicit DegenerateCritical(const std::string& w) : OverdetError("degenerate_critical", w) {}
};

struct GridTooCoarse : OverdetError {
  explicit GridTooCoarse(const std::string& w) : OverdetError("grid_too_coarse", w) {}
};

struct SolverFailure : OverdetError {
  explicit SolverFailure(const std::string& w) : OverdetError("solver_failure", w) {}
};

struct ZeroDenominator : OverdetError {
  explicit ZeroDenominator(const std::string& w) : OverdetError("zero_denominator", w) {}
};

struct PositiveGroundEigenvalue : OverdetError {
  explicit PositiveGroundEigenvalue(const std::string& w)
      : OverdetError("positive_ground_eigenvalue", w) {}
};

struct DomainCollapse : OverdetError {
  explicit DomainCollapse(const std::string& w) : OverdetError("domain_collapse", w) {}
};

struct FloorDominated : OverdetError {
  explicit FloorDominated(const std::string& w) : OverdetError("floor_dominated", w) {}
};

struct ConfigError : OverdetError {
  explicit ConfigError(const std::string& w) : OverdetError("config_error", w) {}
};

}  // namespace overdet
