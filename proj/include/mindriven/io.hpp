// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

#include <json.hpp>

#include "mindriven/coupling.hpp"
#include "mindriven/generator.hpp"
#include "mindriven/hydro.hpp"
#include "mindriven/lifespan.hpp"
#include "mindriven/model.hpp"
#include "mindriven/ode.hpp"
#include "mindriven/ssa.hpp"

namespace mindriven::io {

using nlohmann::json;

/// Initial data as given on the command line.
struct InitialSpec {
  Sequence sequence;                  // unnormalized concentrations
  std::optional<ParticleState> exact;  // set for mono:<size>x<count>
};

/// Accepts e1, mono:<size>x<count>, inline "1:0.5,2:0.25" or a CSV path
/// with size,value rows (a non-numeric header line is skipped).
InitialSpec parse_initial(const std::string& spec);
/// Deterministic use: normalized to first moment 1.
Sequence deterministic_initial(const InitialSpec& spec);
/// Stochastic use: the exact state, or the sequence discretized at mass N.
ParticleState stochastic_initial(const InitialSpec& spec, std::optional<Count> N);

/// Header {"initial":{...},"seed":..,"kernel":..}, then one {"t","l","j"}
/// line per event.
void write_trajectory_jsonl(std::ostream& os, const Trajectory& traj, std::uint64_t seed);
Trajectory read_trajectory_jsonl(std::istream& is);

void write_dense_csv(std::ostream& os, const PiecewiseSolution& sol);
/// t, ell and a JSON object of the nonzero entries.
void write_dense_sparse_csv(std::ostream& os, const PiecewiseSolution& sol);
void write_switch_csv(std::ostream& os, const PiecewiseSolution& sol);
json solution_summary(const PiecewiseSolution& sol);
json lyapunov_json(const LyapunovReport& rep);

void write_convergence_csv(std::ostream& os, const ConvergenceRun& run);
void write_convergence_summary_csv(std::ostream& os, const ConvergenceRun& run);
json convergence_json(const ConvergenceRun& run);

json dichotomy_json(const DichotomyReport& rep);
void write_dichotomy_csv(std::ostream& os, const DichotomyReport& rep);
json blowup_json(const BlowupReport& rep);

json validation_json(const ValidationReport& rep);
json generator_json(const GeneratorReport& rep);

json state_json(const ParticleState& state);

/// Writes text to a file, failing with a clear error if it cannot be opened.
void write_file(const std::string& path, const std::string& content);

}  // namespace mindriven::io
