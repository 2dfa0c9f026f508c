// SPDX-License-Identifier: Apache-2.0
#include "mindriven/kernel.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "mindriven/error.hpp"
#include "mindriven/text.hpp"

namespace mindriven {

Phi Phi::constant(double c) {
  if (!(c > 0.0)) fail(ErrorKind::InvalidArgument, "constant rate must be > 0");
  return Phi{[c](double) { return c; }, PhiFamily::Constant, 0.0};
}

Phi Phi::power(double a) {
  if (!(a >= 0.0)) fail(ErrorKind::InvalidArgument, "power exponent must be >= 0");
  if (a == 0.0) return Phi{[](double) { return 1.0; }, PhiFamily::Constant, 0.0};
  return Phi{[a](double x) { return std::pow(x, a); }, PhiFamily::Power, a};
}

Phi Phi::log_power(double scale, double p) {
  if (!(scale > 0.0) || !(p > 0.0)) {
    fail(ErrorKind::InvalidArgument, "log-power rate needs scale > 0 and p > 0");
  }
  return Phi{[scale, p](double x) { return scale * std::pow(std::log(x + 1.0), p); },
             PhiFamily::LogPower, p};
}

Phi Phi::table(std::vector<std::pair<double, double>> points) {
  if (points.empty()) fail(ErrorKind::InvalidArgument, "empty rate table");
  std::sort(points.begin(), points.end());
  for (std::size_t k = 0; k < points.size(); ++k) {
    const auto& [size, value] = points[k];
    if (!(size >= 1.0) || !(value > 0.0)) {
      fail(ErrorKind::InvalidArgument, "rate table needs sizes >= 1 and values > 0");
    }
    if (k > 0 && size == points[k - 1].first) {
      fail(ErrorKind::InvalidArgument, "duplicate size in rate table");
    }
  }
  auto fn = [pts = std::move(points)](double x) {
    if (x <= pts.front().first) return pts.front().second;
    if (x >= pts.back().first) return pts.back().second;
    auto hi = std::upper_bound(pts.begin(), pts.end(), x,
                               [](double v, const auto& p) { return v < p.first; });
    auto lo = hi - 1;
    const double w = (std::log(x) - std::log(lo->first)) /
                     (std::log(hi->first) - std::log(lo->first));
    return lo->second + w * (hi->second - lo->second);
  };
  return Phi{std::move(fn), PhiFamily::Table, 0.0};
}

Kernel Kernel::generic(std::string name, Eval eval) {
  return Kernel(std::move(name), KernelKind::Generic, std::move(eval));
}

Kernel Kernel::min_form(std::string name, Phi phi) {
  auto fn = phi.fn;
  Kernel k(std::move(name), KernelKind::MinForm, [fn](Size i, Size j) {
    return std::min(fn(static_cast<double>(i)), fn(static_cast<double>(j)));
  });
  k.phi_ = std::move(phi);
  // With phi non-decreasing, K(i, j) = phi(i) for every j >= i.
  k.kappa_i_ = [fn](Size i) { return fn(static_cast<double>(i)); };
  k.delta_i_ = k.kappa_i_;
  return k;
}

Kernel& Kernel::with_kappa(double kappa) {
  kappa_ = kappa;
  return *this;
}

Kernel& Kernel::with_kappa_i(Bound bound) {
  kappa_i_ = std::move(bound);
  return *this;
}

Kernel& Kernel::with_delta_i(Bound bound) {
  delta_i_ = std::move(bound);
  return *this;
}

Kernel& Kernel::with_log_bound_a0(double a0) {
  log_bound_a0_ = a0;
  return *this;
}

namespace {

// sup over m of phi(m) / m^2, the smallest kappa with phi(min(i,j)) <= kappa*i*j.
double kappa_from_phi(const Phi& phi, Size scan_to) {
  double best = 0.0;
  for (Size m = 1; m <= scan_to; ++m) {
    const double md = static_cast<double>(m);
    best = std::max(best, phi(md) / (md * md));
  }
  return best;
}

}  // namespace

Kernel constant_kernel(double c) {
  Kernel k = Kernel::min_form("const:" + format_number(c), Phi::constant(c));
  k.with_kappa(c);
  return k;
}

Kernel min_power_kernel(double a) {
  Kernel k = Kernel::min_form("min-pow:" + format_number(a), Phi::power(a));
  if (a <= 2.0) k.with_kappa(1.0);
  return k;
}

Kernel min_log_kernel(double a0) {
  if (!(a0 > 0.0)) fail(ErrorKind::InvalidArgument, "min-log needs A0 > 0");
  Kernel k = Kernel::min_form("min-log:" + format_number(a0),
                              Phi::log_power(1.0 / (4.0 * a0), 1.0));
  // ln(m + 1) <= m <= i * j.
  k.with_kappa(1.0 / (4.0 * a0)).with_log_bound_a0(a0);
  return k;
}

Kernel min_log_power_kernel(double a0, double alpha) {
  if (!(alpha > 0.0)) fail(ErrorKind::InvalidArgument, "min-logpow needs alpha > 0");
  Phi phi = Phi::log_power(a0, 1.0 + alpha);
  const double kappa = kappa_from_phi(phi, 100000);
  Kernel k = Kernel::min_form(
      "min-logpow:" + format_number(a0) + "," + format_number(alpha), std::move(phi));
  k.with_kappa(kappa);
  return k;
}

Kernel min_table_kernel(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Parse, "cannot open rate table '" + path + "'");
  std::vector<std::pair<double, double>> points;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto fields = split(line, ',');
    if (fields.size() != 2) {
      fail(ErrorKind::Parse, path + ":" + std::to_string(line_no) + ": expected size,value");
    }
    const auto size = try_parse_double(fields[0]);
    const auto value = try_parse_double(fields[1]);
    if (!size || !value) {
      if (points.empty() && line_no == 1) continue;  // header
      fail(ErrorKind::Parse, path + ":" + std::to_string(line_no) + ": bad number");
    }
    points.emplace_back(*size, *value);
  }
  Phi phi = Phi::table(points);
  const Size last = static_cast<Size>(std::max_element(points.begin(), points.end())->first);
  const double kappa = kappa_from_phi(phi, std::max<Size>(last, 1));
  Kernel k = Kernel::min_form("min-table:" + path, std::move(phi));
  k.with_kappa(kappa);
  return k;
}

Kernel parse_kernel(std::string_view preset) {
  const auto colon = preset.find(':');
  if (colon == std::string_view::npos) {
    fail(ErrorKind::Parse, "kernel preset '" + std::string(preset) + "' lacks ':'");
  }
  const std::string family(preset.substr(0, colon));
  const std::string args(preset.substr(colon + 1));
  auto number = [&](const std::string& token) {
    auto v = try_parse_double(token);
    if (!v) fail(ErrorKind::Parse, "bad kernel parameter '" + token + "'");
    return *v;
  };
  Kernel k = [&] {
    if (family == "const") return constant_kernel(number(args));
    if (family == "min-pow") return min_power_kernel(number(args));
    if (family == "min-log") return min_log_kernel(number(args));
    if (family == "min-logpow") {
      const auto parts = split(args, ',');
      if (parts.size() != 2) fail(ErrorKind::Parse, "min-logpow expects a0,alpha");
      return min_log_power_kernel(number(parts[0]), number(parts[1]));
    }
    if (family == "min-table") return min_table_kernel(args);
    fail(ErrorKind::Parse, "unknown kernel family '" + family + "'");
  }();
  return k;
}

}  // namespace mindriven
