#include "spglm/error.hpp"

namespace spglm {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Validation: return "validation";
    case ErrorKind::NonExistence: return "non-existence";
    case ErrorKind::NonConvergence: return "non-convergence";
    case ErrorKind::SingularHessian: return "singular-hessian";
    case ErrorKind::MassImbalance: return "mass-imbalance";
    case ErrorKind::Infeasible: return "infeasible";
  }
  return "unknown";
}

Error::Error(ErrorKind kind, std::string stage, const std::string& message)
    : std::runtime_error(std::string(stage) + ": " + message), kind_(kind), stage_(std::move(stage)) {}

void fail(ErrorKind kind, std::string stage, const std::string& message) {
  throw Error(kind, std::move(stage), message);
}

}  // namespace spglm
