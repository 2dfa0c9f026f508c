// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mindriven {

enum class ErrorKind {
  EmptyState,
  TerminalState,
  ZeroMass,
  MissingSizeOne,
  MassOverflow,
  PrefixViolation,
  NoCrossing,
  StepUnderflow,
  TruncationOverflow,
  ClampViolation,
  MassDrift,
  DominanceViolation,
  StepTooLarge,
  RepresentationMismatch,
  MissingDelta,
  MissingWeights,
  HorizonExceedsSolution,
  Infeasible,
  TooCloseToSwitch,
  Parse,
  InvalidArgument,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Every failure raised by the library carries a machine-readable kind.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

}  // namespace mindriven
