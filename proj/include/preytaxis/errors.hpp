#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace preytaxis {

// Error classes map 1:1 onto CLI exit codes; library code throws, the driver
// translates.
enum class ErrorClass : int {
  config = 2,       // bad configuration file or override
  convergence = 3,  // an iteration failed to converge
  precondition = 4, // operation not applicable for the given inputs
  internal = 5,     // a computed result violated a guaranteed bound
};

class Error : public std::runtime_error {
public:
  Error(ErrorClass cls, std::string kind, const std::string& msg)
      : std::runtime_error(msg), cls_(cls), kind_(std::move(kind)) {}

  ErrorClass error_class() const { return cls_; }
  int exit_code() const { return static_cast<int>(cls_); }
  const std::string& kind() const { return kind_; }

private:
  ErrorClass cls_;
  std::string kind_;
};

// Iteration failure carrying the residual history for diagnosis.
class ConvergenceError : public Error {
public:
  ConvergenceError(std::string kind, const std::string& msg,
                   std::vector<double> residual_history = {})
      : Error(ErrorClass::convergence, std::move(kind), msg),
        residual_history_(std::move(residual_history)) {}

  const std::vector<double>& residual_history() const { return residual_history_; }

private:
  std::vector<double> residual_history_;
};

inline Error config_error(const std::string& msg) {
  return Error(ErrorClass::config, "config", msg);
}

inline Error config_error(const std::string& kind, const std::string& msg) {
  return Error(ErrorClass::config, kind, msg);
}

inline Error precondition_error(const std::string& kind, const std::string& msg) {
  return Error(ErrorClass::precondition, kind, msg);
}

inline Error internal_error(const std::string& kind, const std::string& msg) {
  return Error(ErrorClass::internal, kind, msg);
}

} // namespace preytaxis
