#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace spglm {

enum class ErrorKind {
  Validation,       // malformed input or violated precondition
  NonExistence,     // maximizer does not exist (boundary data, divergent iterates)
  NonConvergence,   // iteration cap reached
  SingularHessian,  // information matrix not safely invertible
  MassImbalance,    // transport problem is not balanced
  Infeasible        // LP reported infeasibility; indicates a solver bug
};

std::string_view to_string(ErrorKind kind);

// Every failure raised by the library carries the pipeline stage that produced it.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string stage, const std::string& message);

  ErrorKind kind() const noexcept { return kind_; }
  const std::string& stage() const noexcept { return stage_; }
  bool numerical() const noexcept { return kind_ != ErrorKind::Validation; }

 private:
  ErrorKind kind_;
  std::string stage_;
};

[[noreturn]] void fail(ErrorKind kind, std::string stage, const std::string& message);

}  // namespace spglm
