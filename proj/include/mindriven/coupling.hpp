// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

#include "mindriven/kernel.hpp"
#include "mindriven/particle_state.hpp"
#include "mindriven/rng.hpp"
#include "mindriven/ssa.hpp"

namespace mindriven {

/// Shared randomness of a coupled pair. At step m (1-based) both processes
/// merge their smallest particle with their k_m-th smallest one, k_m uniform
/// on {2, ..., n - m + 1}, and wait eps_m / ((n - m) phi(l)) with their own l.
struct CouplingStream {
  std::vector<std::uint64_t> partner_indices;
  std::vector<double> exponentials;
};

struct CoupledRun {
  Trajectory x;
  Trajectory y;
  CouplingStream stream;
  /// Event indices after which S_m(y) <= S_m(x) was verified for all m.
  std::size_t dominance_checks = 0;
};

/// Runs both processes to a singleton on one stream. Requires equal particle
/// counts n >= 2 and S_m(y0) <= S_m(x0) for every m.
CoupledRun coupled_simulate(const ParticleState& x0, const ParticleState& y0,
                            const Phi& phi, RandomStream& rng);

struct ScalingPair {
  double t_i_from_nei = 0.0;  // T_i starting from n particles of size i
  double t_1_from_ne1 = 0.0;  // T_1 starting from n particles of size 1
};

/// Couples n e_i with n e_1; the first is a size-scaled copy of the second,
/// so T_i^{n e_i} phi(i) = T_1^{n e_1} phi(1) on every path.
ScalingPair scaling_coupling(Count n, Size i, const Phi& phi, RandomStream& rng);

}  // namespace mindriven
