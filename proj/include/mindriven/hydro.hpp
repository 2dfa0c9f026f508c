// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "mindriven/kernel.hpp"
#include "mindriven/ode.hpp"
#include "mindriven/particle_state.hpp"
#include "mindriven/ssa.hpp"
#include "mindriven/types.hpp"

namespace mindriven {

struct DiscretizedInitial {
  ParticleState state;
  Size cutoff = 0;         // J
  double l1_error = 0.0;   // ||X/N - x0||_1
  double error_bound = 0.0;
};

/// Floor-rounds N x_j for 2 <= j <= J and gives the remaining mass to size 1,
/// so sum_j j X_j = N exactly. J = min(largest support point, ceil(sqrt N)).
/// The returned bound (J-1)(J+4)/(2N) + sum_{j>J} (j+1) x_j always holds.
DiscretizedInitial discretize_initial(const Sequence& x0, Count N);

/// sup over [0, horizon] of ||X(s)/N - x(s)||_1, evaluated just before and
/// after every event and on a uniform grid of `grid` intervals.
double trajectory_distance(const Trajectory& traj, const PiecewiseSolution& sol, Count N,
                           double horizon, std::size_t grid = 512);

struct SwitchDeviation {
  Count N = 0;
  Size i = 0;
  double t_i = 0.0;
  double median = 0.0;  // of |T_i^N - t_i|
  double q25 = 0.0;
  double q75 = 0.0;
  double max = 0.0;
};

struct ConvergenceSummary {
  Count N = 0;
  double median_error = 0.0;
  double q25 = 0.0;
  double q75 = 0.0;
};

struct ConvergenceRun {
  std::vector<Count> N_values;
  std::size_t replicas = 0;
  double horizon = 0.0;
  std::uint64_t seed = 0;
  std::vector<std::vector<double>> sup_errors;  // [N index][replica]
  std::vector<double> switch_times;             // deterministic t_i used below
  /// |T_i^N - t_i| per [N index][replica][i - 1].
  std::vector<std::vector<std::vector<double>>> switch_deviations;
  std::vector<SwitchDeviation> deviation_table;
  std::vector<ConvergenceSummary> summary;
  double fitted_slope = 0.0;
  double fitted_slope_stderr = 0.0;
};

struct ConvergenceOptions {
  std::size_t grid = 512;
  unsigned threads = 0;
  OdeControls ode;
};

/// Ensemble comparison of the rescaled stochastic paths with the ODE.
/// T_i statistics cover every i with t_i < horizon and always i = 1.
ConvergenceRun convergence_experiment(const Sequence& x0, const Kernel& k, double horizon,
                                      const std::vector<Count>& N_values,
                                      std::size_t replicas, std::uint64_t seed,
                                      const ConvergenceOptions& options = {});

}  // namespace mindriven
