// SPDX-License-Identifier: Apache-2.0
#include "mindriven/error.hpp"

namespace mindriven {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::EmptyState: return "empty_state";
    case ErrorKind::TerminalState: return "terminal_state";
    case ErrorKind::ZeroMass: return "zero_mass";
    case ErrorKind::MissingSizeOne: return "missing_size_one";
    case ErrorKind::MassOverflow: return "mass_overflow";
    case ErrorKind::PrefixViolation: return "prefix_violation";
    case ErrorKind::NoCrossing: return "no_crossing";
    case ErrorKind::StepUnderflow: return "step_underflow";
    case ErrorKind::TruncationOverflow: return "truncation_overflow";
    case ErrorKind::ClampViolation: return "clamp_violation";
    case ErrorKind::MassDrift: return "mass_drift";
    case ErrorKind::DominanceViolation: return "dominance_violation";
    case ErrorKind::StepTooLarge: return "step_too_large";
    case ErrorKind::RepresentationMismatch: return "representation_mismatch";
    case ErrorKind::MissingDelta: return "missing_delta";
    case ErrorKind::MissingWeights: return "missing_weights";
    case ErrorKind::HorizonExceedsSolution: return "horizon_exceeds_solution";
    case ErrorKind::Infeasible: return "infeasible";
    case ErrorKind::TooCloseToSwitch: return "too_close_to_switch";
    case ErrorKind::Parse: return "parse";
    case ErrorKind::InvalidArgument: return "invalid_argument";
  }
  return "unknown";
}

}  // namespace mindriven
