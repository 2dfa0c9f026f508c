// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "mindriven/kernel.hpp"
#include "mindriven/particle_state.hpp"
#include "mindriven/types.hpp"

namespace mindriven {

enum class KernelProperty {
  Negative,
  Symmetry,
  GlobalBound,  // K(i,j) <= kappa i j
  RowBound,     // K(i,j) <= kappa_i for j >= i
  RowFloor,     // K(i,j) >= delta_i > 0 for j >= i
  MinForm,      // K(i,j) = min(phi(i), phi(j))
  Monotone,     // phi non-decreasing
};

std::string to_string(KernelProperty p);

struct KernelViolation {
  KernelProperty property;
  Size i = 0;
  Size j = 0;
  std::string detail;
};

/// Findings of a sampled hypothesis check; empty means consistent up to the
/// cutoff (the hypotheses quantify over all sizes, so this is never a proof).
struct ValidationReport {
  std::string kernel;
  Size cutoff = 0;
  std::vector<KernelViolation> violations;

  bool consistent() const { return violations.empty(); }
};

/// Checks every pair i, j <= size_cutoff. Relative slack 1e-12 on bounds.
ValidationReport validate_kernel(const Kernel& k, Size size_cutoff);

struct NormalizedInitial {
  Sequence x0;
  double scale = 0.0;  // first moment of the input
};

/// Rescales x so that sum i * x_i = 1. Requires x_1 > 0.
NormalizedInitial normalize_initial(const Sequence& x);

double first_moment(const Sequence& x);

}  // namespace mindriven
