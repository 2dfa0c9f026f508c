// SPDX-License-Identifier: Apache-2.0
#include "mindriven/model.hpp"

#include <cmath>
#include <sstream>

#include "mindriven/error.hpp"
#include "mindriven/text.hpp"

namespace mindriven {

std::string to_string(KernelProperty p) {
  switch (p) {
    case KernelProperty::Negative: return "negative";
    case KernelProperty::Symmetry: return "symmetry";
    case KernelProperty::GlobalBound: return "global_bound";
    case KernelProperty::RowBound: return "row_bound";
    case KernelProperty::RowFloor: return "row_floor";
    case KernelProperty::MinForm: return "min_form";
    case KernelProperty::Monotone: return "monotone";
  }
  return "unknown";
}

namespace {

constexpr double kSlack = 1e-12;

bool exceeds(double value, double bound) {
  return value > bound + kSlack * std::max(1.0, std::abs(bound));
}

}  // namespace

ValidationReport validate_kernel(const Kernel& k, Size size_cutoff) {
  if (size_cutoff < 2) fail(ErrorKind::InvalidArgument, "size cutoff must be >= 2");
  ValidationReport report{k.name(), size_cutoff, {}};
  auto add = [&](KernelProperty p, Size i, Size j, double lhs, double rhs) {
    report.violations.push_back(
        {p, i, j, format_number(lhs) + " vs " + format_number(rhs)});
  };

  const Size n = size_cutoff;
  std::vector<double> values(n * n);
  for (Size i = 1; i <= n; ++i) {
    for (Size j = 1; j <= n; ++j) values[(i - 1) * n + (j - 1)] = k(i, j);
  }
  auto at = [&](Size i, Size j) { return values[(i - 1) * n + (j - 1)]; };

  std::vector<double> kappa_row(n + 1, 0.0), delta_row(n + 1, 0.0);
  for (Size i = 1; i <= n; ++i) {
    if (k.kappa_i()) kappa_row[i] = (*k.kappa_i())(i);
    if (k.delta_i()) {
      delta_row[i] = (*k.delta_i())(i);
      if (!(delta_row[i] > 0.0)) add(KernelProperty::RowFloor, i, i, delta_row[i], 0.0);
    }
  }

  for (Size i = 1; i <= n; ++i) {
    for (Size j = 1; j <= n; ++j) {
      const double kij = at(i, j);
      if (kij < 0.0) add(KernelProperty::Negative, i, j, kij, 0.0);
      if (j > i && kij != at(j, i)) add(KernelProperty::Symmetry, i, j, kij, at(j, i));
      if (k.kappa()) {
        const double bound = *k.kappa() * static_cast<double>(i) * static_cast<double>(j);
        if (exceeds(kij, bound)) add(KernelProperty::GlobalBound, i, j, kij, bound);
      }
      if (j >= i && k.kappa_i() && exceeds(kij, kappa_row[i])) {
        add(KernelProperty::RowBound, i, j, kij, kappa_row[i]);
      }
      if (j >= i && k.delta_i() && exceeds(delta_row[i], kij)) {
        add(KernelProperty::RowFloor, i, j, kij, delta_row[i]);
      }
    }
  }

  if (k.is_min_form()) {
    const Phi& phi = *k.phi();
    double prev = 0.0;
    for (Size i = 1; i <= n; ++i) {
      const double p = phi(static_cast<double>(i));
      if (!(p > 0.0)) add(KernelProperty::Monotone, i, i, p, 0.0);
      if (i > 1 && p < prev) add(KernelProperty::Monotone, i - 1, i, prev, p);
      prev = p;
    }
    for (Size i = 1; i <= n; ++i) {
      for (Size j = 1; j <= n; ++j) {
        const double expected = phi(static_cast<double>(std::min(i, j)));
        if (at(i, j) != expected) add(KernelProperty::MinForm, i, j, at(i, j), expected);
      }
    }
  }
  return report;
}

double first_moment(const Sequence& x) {
  double m = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) m += static_cast<double>(k + 1) * x[k];
  return m;
}

NormalizedInitial normalize_initial(const Sequence& x) {
  for (double v : x) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      fail(ErrorKind::InvalidArgument, "initial sequence must be finite and nonnegative");
    }
  }
  const double scale = first_moment(x);
  if (!(scale > 0.0)) fail(ErrorKind::ZeroMass, "initial sequence has zero first moment");
  if (x.empty() || !(x[0] > 0.0)) {
    fail(ErrorKind::MissingSizeOne, "initial sequence needs x_1 > 0");
  }
  NormalizedInitial out{x, scale};
  for (double& v : out.x0) v /= scale;
  // Trim trailing zeros so the support is explicit.
  while (!out.x0.empty() && out.x0.back() == 0.0) out.x0.pop_back();
  return out;
}

}  // namespace mindriven
