// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mindriven/types.hpp"

namespace mindriven {

/// Closed-form family of a min-form rate function, used by the series test.
enum class PhiFamily {
  Constant,  // phi = c
  Power,     // phi(x) = x^a
  LogPower,  // phi(x) = c * ln(x + 1)^p
  Table,
  Other,
};

/// Positive non-decreasing rate function phi, extended to real arguments.
struct Phi {
  std::function<double(double)> fn;
  PhiFamily family = PhiFamily::Other;
  double exponent = 0.0;  // a for Power, p for LogPower

  double operator()(double x) const { return fn(x); }

  static Phi constant(double c);
  static Phi power(double a);
  static Phi log_power(double scale, double p);
  /// Linear interpolation in ln(size); constant beyond the table ends.
  static Phi table(std::vector<std::pair<double, double>> points);
};

enum class KernelKind { Generic, MinForm };

/// Symmetric coalescence rate K(i, j) with optional bound metadata.
///
/// A min-form kernel evaluates min(phi(i), phi(j)); that structure lets the
/// simulator pick the partner uniformly and makes the total jump rate
/// phi(l) * (n - 1).
class Kernel {
 public:
  using Eval = std::function<double(Size, Size)>;
  using Bound = std::function<double(Size)>;

  static Kernel generic(std::string name, Eval eval);
  static Kernel min_form(std::string name, Phi phi);

  double operator()(Size i, Size j) const { return eval_(i, j); }

  KernelKind kind() const { return kind_; }
  bool is_min_form() const { return kind_ == KernelKind::MinForm; }
  const std::optional<Phi>& phi() const { return phi_; }
  const std::string& name() const { return name_; }

  /// K(i, j) <= kappa * i * j.
  const std::optional<double>& kappa() const { return kappa_; }
  /// K(i, j) <= kappa_i(i) for j >= i.
  const std::optional<Bound>& kappa_i() const { return kappa_i_; }
  /// K(i, j) >= delta_i(i) for j >= i.
  const std::optional<Bound>& delta_i() const { return delta_i_; }
  /// K(i, j) <= (ln(i+1) ^ ln(j+1)) / (4 A0): the slow-growth hypothesis.
  const std::optional<double>& log_bound_a0() const { return log_bound_a0_; }

  Kernel& with_kappa(double kappa);
  Kernel& with_kappa_i(Bound bound);
  Kernel& with_delta_i(Bound bound);
  Kernel& with_log_bound_a0(double a0);

 private:
  Kernel(std::string name, KernelKind kind, Eval eval)
      : name_(std::move(name)), kind_(kind), eval_(std::move(eval)) {}

  std::string name_;
  KernelKind kind_;
  Eval eval_;
  std::optional<Phi> phi_;
  std::optional<double> kappa_;
  std::optional<Bound> kappa_i_;
  std::optional<Bound> delta_i_;
  std::optional<double> log_bound_a0_;
};

/// Parses a preset: const:c, min-pow:a, min-log:A0, min-logpow:a0,alpha,
/// min-table:<csv path>.
Kernel parse_kernel(std::string_view preset);

Kernel constant_kernel(double c);
Kernel min_power_kernel(double a);
Kernel min_log_kernel(double a0);
Kernel min_log_power_kernel(double a0, double alpha);
Kernel min_table_kernel(const std::string& path);

}  // namespace mindriven
