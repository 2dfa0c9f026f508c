// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

#include "mindriven/kernel.hpp"
#include "mindriven/particle_state.hpp"
#include "mindriven/types.hpp"

namespace mindriven {

/// Drift of the rescaled process X / N at xi, including the 1/N corrections
/// on the same-size channel.
SparseVector drift(const SparseVector& xi, const Kernel& k, std::uint64_t N);

/// Per-component quadratic variation rate of X / N at xi.
SparseVector local_variance(const SparseVector& xi, const Kernel& k, std::uint64_t N);

/// sum_j j * v_j, evaluated in the given order of keys.
double first_moment(const SparseVector& v);

SparseVector rescale(const ParticleState& state, double N);

struct GeneratorComponent {
  Size size = 0;
  double mean_increment = 0.0;
  double predicted = 0.0;  // drift * h
  double stderr_mean = 0.0;
  double z = 0.0;
};

struct GeneratorReport {
  double h = 0.0;
  std::uint64_t replicas = 0;
  double expected_events = 0.0;  // lambda * h at the initial state
  std::vector<GeneratorComponent> components;

  double max_abs_z() const;
};

/// Compares the Monte Carlo mean increment of X / N over [0, h] with drift * h.
/// Requires lambda * h < 0.2 at the initial state.
GeneratorReport generator_consistency(const ParticleState& x0, const Kernel& k, double h,
                                      std::uint64_t replicas, std::uint64_t seed,
                                      unsigned threads = 0);

}  // namespace mindriven
