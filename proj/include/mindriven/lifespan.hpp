// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "mindriven/kernel.hpp"
#include "mindriven/ode.hpp"
#include "mindriven/types.hpp"

namespace mindriven {

enum class SeriesClass { Summable, Divergent, Inconclusive };
std::string to_string(SeriesClass c);

struct SeriesReport {
  std::vector<double> partial_sums;  // partial_sums[k] = sum_{i=1}^{k+1} 1 / (i phi(i))
  SeriesClass classification = SeriesClass::Inconclusive;
};

/// Partial sums of sum_i 1 / (i phi(i)); classified from the closed-form
/// family when phi has one.
SeriesReport series_test(const Phi& phi, std::size_t cutoff);

struct MonteCarloEstimate {
  double mean = 0.0;
  double stderr_mean = 0.0;
  std::size_t replicas = 0;
  std::optional<double> exact;
};

/// E[T] for n particles of size 1 under K = min(phi(i), phi(j)).
/// exact = H_{n-1} / c when phi is the constant c.
MonteCarloEstimate expected_T_monodisperse(Count n, const Phi& phi, std::size_t replicas,
                                           std::uint64_t seed, unsigned threads = 0);

/// sum_{m=1}^{n-1} 1 / (m phi(n / m)).
double lower_bound_check(Count n, const Phi& phi);

struct DichotomyRow {
  Count n = 0;
  MonteCarloEstimate estimate;
  double lower_bound = 0.0;
};

struct DichotomyReport {
  std::string phi_name;
  SeriesReport series;
  std::vector<DichotomyRow> rows;
  /// Weighted fit of mean against ln n over the upper half of the ladder.
  double plateau_slope = 0.0;
  double plateau_slope_stderr = 0.0;
  std::size_t plateau_points = 0;
  bool plateau = false;     // |slope| <= 3 stderr
  bool increasing = false;  // means strictly increase along the ladder
};

DichotomyReport dichotomy_scan(const std::string& phi_name, const Phi& phi,
                               const std::vector<Count>& n_values, std::size_t replicas,
                               std::uint64_t seed, unsigned threads = 0,
                               std::size_t series_cutoff = 10000);

/// Weights for the finite-lifetime argument: K(i, j) >= phi_i for j >= i and
/// phi_i (psi_i - psi_{i+j}) >= epsilon for j >= i.
struct LyapunovWeights {
  std::function<double(Size)> phi_seq;
  std::function<double(Size)> psi_seq;
  double epsilon = 0.0;
  std::string description;
};

/// Known weights for min-pow:a (a > 0) and min-logpow kernels.
std::optional<LyapunovWeights> default_weights(const Kernel& k);

struct WeightViolation {
  Size i = 0;
  Size j = 0;
  std::string detail;
};

std::vector<WeightViolation> check_weights(const LyapunovWeights& w, const Kernel& k,
                                           Size cutoff);

enum class BlowupEvidence { GrowsUnbounded, FiniteLifetime };
std::string to_string(BlowupEvidence e);

struct BlowupRow {
  Size i = 0;
  double t_i = 0.0;
  double s_i = 0.0;
  double bound = 0.0;  // slow: lower bound on t_i; fast: upper bound on t_i
  double ratio_term = 0.0;  // fast: (M_psi / M_0)(t_i) + epsilon t_i
  bool holds = false;
};

struct BlowupReport {
  BlowupEvidence evidence = BlowupEvidence::GrowsUnbounded;
  std::vector<BlowupRow> rows;
  std::vector<WeightViolation> weight_violations;
  double m0_initial = 0.0;
  double mpsi_initial = 0.0;  // fast branch only
  double epsilon = 0.0;
  TInfEstimate t_inf;
  bool all_hold() const;
};

/// Slow branch when the kernel declares the logarithmic bound constant A0,
/// otherwise the fast branch with weights (explicit or default_weights).
BlowupReport blowup_classify(const Kernel& k, const Sequence& x0, Size I,
                             const OdeControls& controls,
                             const std::optional<LyapunovWeights>& weights = std::nullopt);

}  // namespace mindriven
