// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <limits>
#include <optional>
#include <vector>

#include "mindriven/kernel.hpp"
#include "mindriven/types.hpp"

namespace mindriven {

/// Numerical controls for the deterministic solver.
struct OdeControls {
  Size truncation = 256;  // M: sizes 1..M are tracked, larger ones overflow
  double atol = 1e-10;
  double rtol = 1e-8;
  double tol_event = 1e-10;
  double tol_mass = 1e-8;
  double tol_overflow = 1e-6;
  double tol_neg = 1e-12;
  double segment_time_budget = 1e6;
  double min_step = 1e-14;
  std::size_t max_steps = 5'000'000;
  /// Extra dense samples every dense_dt inside each step (0 = step ends only).
  double dense_dt = 0.0;
  bool store_dense = true;
};

/// Truncated deterministic state: x[j - 1] is the concentration of size j.
struct DenseState {
  Sequence x;
  Size ell = 1;
  double overflow_mass = 0.0;  // first moment that coagulated past the cap
  double t = 0.0;
  double segment_start = 0.0;

  Size truncation() const { return x.size(); }
  double at(Size j) const { return j >= 1 && j <= x.size() ? x[j - 1] : 0.0; }
  double first_moment() const;
};

struct DenseSample {
  double t = 0.0;
  Size ell = 1;
  Sequence x;
  Sequence dxdt;
  double overflow_mass = 0.0;
};

/// b^(i)(x) evaluated literally. Gains landing past the cap are dropped from
/// the returned vector; their first-moment rate goes to *overflow_rate.
Sequence vector_field_b(Size i, const Sequence& x, const Kernel& k,
                        double* overflow_rate = nullptr);

/// Auxiliary linear field: F_i = -a_i y_i - sum_{j>=i} a_j y_j and
/// F_j = a_{j-i} y_{j-i} - a_j y_j for j > i. a[j - 1] holds a_j.
Sequence vector_field_F(Size i, const Sequence& a, const Sequence& y);

struct SegmentResult {
  DenseState state;             // at the vanishing time, x_ell set to 0
  double duration = 0.0;        // s = vanish time - start time
  bool reached_time_limit = false;
  double root_slope = 0.0;      // dx_ell/dt at the located root (< 0)
  double root_residual = 0.0;   // |x_ell| before it was zeroed
  std::size_t steps = 0;
  std::size_t clamps = 0;
  double max_clamp = 0.0;
  std::vector<DenseSample> samples;
};

/// Integrates dx/dt = b^(ell)(x) from state until x_ell reaches 0 (or t_stop).
SegmentResult integrate_segment(const DenseState& state, const Kernel& k,
                                const OdeControls& controls,
                                double t_stop = std::numeric_limits<double>::infinity());

struct PiecewiseStop {
  std::optional<Size> max_min_size;  // stop after t_I
  std::optional<double> max_time;
};

struct TInfEstimate {
  double partial_sum = 0.0;
  std::optional<double> extrapolated;  // heuristic only
  std::string note;
};

/// Output of the piecewise solve.
struct PiecewiseSolution {
  std::vector<double> switch_times;        // t_1 < t_2 < ... (ties allowed for skips)
  std::vector<double> durations;           // s_i = t_i - t_{i-1}
  std::vector<DenseState> segment_states;  // state at each t_i
  std::vector<double> root_slopes;         // dx_i/dt at t_i (0 for skipped sizes)
  std::vector<Size> skipped;               // sizes that vanished with s_i = 0
  std::vector<DenseSample> dense;
  DenseState final_state;
  double initial_first_moment = 0.0;
  double max_mass_error = 0.0;
  std::size_t clamps = 0;
  double max_clamp = 0.0;
  double end_time = 0.0;

  double t_inf_partial() const { return switch_times.empty() ? 0.0 : switch_times.back(); }
  TInfEstimate t_inf_estimate() const;
  /// Cubic Hermite interpolation of the dense output.
  Sequence evaluate(double t) const;
  Size ell_at(double t) const;
};

PiecewiseSolution integrate_piecewise(const Sequence& x0, const Kernel& k,
                                      const PiecewiseStop& stop,
                                      const OdeControls& controls);

/// Sum over the tracked sizes of g(j) x_j.
double moment(const DenseState& state, const std::function<double(Size)>& g);

struct MomentCheck {
  double finite_difference = 0.0;
  double identity_rhs = 0.0;  // sum_j (g(l+j) - g(l) - g(j)) K(l,j) x_j
  double error = 0.0;         // scaled as described in moment_derivative_check
  double tolerance = 0.0;
  bool passed = false;
};

/// Central difference of sum g_j x_j over [t - h, t + h] on the current
/// segment against the moment identity. Error is relative to the larger of
/// |rhs| and the sum of absolute identity terms, after discounting rounding
/// noise of the difference quotient; tolerance max(1e-6, C h^2).
MomentCheck moment_derivative_check(const DenseState& state, const Kernel& k,
                                    const std::function<double(Size)>& g, double h,
                                    const OdeControls& controls, double c_h2 = 1.0);

struct LyapunovSegment {
  Size i = 0;
  double delta = 0.0;
  double bound = 0.0;      // -delta / (2 i)
  double max_slope = 0.0;  // largest d/dt (M_{-1} / M_0) seen on the segment
  std::size_t samples = 0;
  bool passed = false;
};

struct LyapunovReport {
  double tol_slope = 0.0;
  std::vector<LyapunovSegment> segments;
  bool passed() const;
};

/// Differentiates M_{-1}/M_0 by central differences at every dense sample
/// and compares with -delta_i / (2 i) + tol_slope.
LyapunovReport lyapunov_report(const PiecewiseSolution& solution, const Kernel& k,
                               double tol_slope = 1e-3);

}  // namespace mindriven
