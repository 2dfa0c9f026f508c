// SPDX-License-Identifier: Apache-2.0
#include "mindriven/generator.hpp"

#include <cmath>
#include <limits>

#include "mindriven/error.hpp"
#include "mindriven/parallel.hpp"
#include "mindriven/ssa.hpp"

namespace mindriven {

namespace {

Size rescaled_min_size(const SparseVector& xi) {
  for (const auto& [j, v] : xi) {
    if (v > 0.0) return j;
  }
  fail(ErrorKind::EmptyState, "rescaled state has no positive component");
}

double value_at(const SparseVector& xi, Size j) {
  auto it = xi.find(j);
  return it == xi.end() ? 0.0 : it->second;
}

// Sizes that can carry a nonzero drift or variance: the support at or above
// l, and each of those shifted by l.
std::vector<Size> affected_sizes(const SparseVector& xi, Size l) {
  std::map<Size, bool> sizes;
  for (const auto& [j, v] : xi) {
    if (j < l || v == 0.0) continue;
    sizes[j] = true;
    sizes[j + l] = true;
  }
  std::vector<Size> out;
  for (const auto& [j, _] : sizes) out.push_back(j);
  return out;
}

}  // namespace

SparseVector drift(const SparseVector& xi, const Kernel& k, std::uint64_t N) {
  if (N == 0) fail(ErrorKind::InvalidArgument, "N must be positive");
  const Size l = rescaled_min_size(xi);
  const double inv_n = 1.0 / static_cast<double>(N);
  const double k_ll = k(l, l);
  SparseVector beta;

  double outflow = 0.0;
  for (const auto& [j, v] : xi) {
    if (j > l && v != 0.0) outflow += k(l, j) * v;
  }
  beta[l] = -outflow - 2.0 * k_ll * value_at(xi, l) + 2.0 * inv_n * k_ll;

  for (Size j : affected_sizes(xi, l)) {
    if (j <= l) continue;
    double b = 0.0;
    if (j == 2 * l) {
      b = k_ll * (value_at(xi, l) - inv_n) - k(l, j) * value_at(xi, j);
    } else {
      const Size src = j - l;
      const double gain = src >= l ? k(l, src) * value_at(xi, src) : 0.0;
      b = gain - k(l, j) * value_at(xi, j);
    }
    beta[j] = b;
  }
  return beta;
}

SparseVector local_variance(const SparseVector& xi, const Kernel& k, std::uint64_t N) {
  if (N == 0) fail(ErrorKind::InvalidArgument, "N must be positive");
  const Size l = rescaled_min_size(xi);
  const double inv_n = 1.0 / static_cast<double>(N);
  const double k_ll = k(l, l);
  SparseVector alpha;

  double outflow = 0.0;
  for (const auto& [j, v] : xi) {
    if (j > l && v != 0.0) outflow += k(l, j) * v;
  }
  alpha[l] = inv_n * outflow + 4.0 * inv_n * k_ll * value_at(xi, l) -
             4.0 * inv_n * inv_n * k_ll;

  for (Size j : affected_sizes(xi, l)) {
    if (j <= l) continue;
    double a = 0.0;
    if (j == 2 * l) {
      a = inv_n * k_ll * (value_at(xi, l) - inv_n) + inv_n * k(l, j) * value_at(xi, j);
    } else {
      const Size src = j - l;
      const double gain = src >= l ? k(l, src) * value_at(xi, src) : 0.0;
      a = inv_n * gain + inv_n * k(l, j) * value_at(xi, j);
    }
    alpha[j] = a;
  }
  return alpha;
}

double first_moment(const SparseVector& v) {
  double total = 0.0;
  for (const auto& [j, value] : v) total += static_cast<double>(j) * value;
  return total;
}

SparseVector rescale(const ParticleState& state, double N) {
  SparseVector out;
  for (const auto& [j, count] : state.counts()) out[j] = static_cast<double>(count) / N;
  return out;
}

double GeneratorReport::max_abs_z() const {
  double m = 0.0;
  for (const auto& c : components) m = std::max(m, std::abs(c.z));
  return m;
}

GeneratorReport generator_consistency(const ParticleState& x0, const Kernel& k, double h,
                                      std::uint64_t replicas, std::uint64_t seed,
                                      unsigned threads) {
  if (!(h > 0.0)) fail(ErrorKind::InvalidArgument, "h must be positive");
  if (replicas < 2) fail(ErrorKind::InvalidArgument, "need at least 2 replicas");
  const double lambda = jump_menu(x0, k).total_rate;
  if (lambda * h >= 0.2) {
    fail(ErrorKind::StepTooLarge,
         "lambda * h = " + std::to_string(lambda * h) + " must be below 0.2");
  }
  const double N = static_cast<double>(x0.total_mass());

  std::vector<ParticleState> finals(replicas);
  parallel_for(replicas, threads, [&](std::size_t r) {
    RandomStream rng(seed, r, StreamRole::Simulation);
    finals[r] = simulate(x0, k, StopRule::until_time(h), rng).final_state;
  });

  // Sequential reduction keeps the result independent of the thread count.
  std::map<Size, std::pair<double, double>> moments;  // sum, sum of squares
  const SparseVector start = rescale(x0, N);
  for (const auto& final_state : finals) {
    SparseVector inc;
    for (const auto& [j, v] : start) inc[j] -= v;
    for (const auto& [j, c] : final_state.counts()) inc[j] += static_cast<double>(c) / N;
    for (const auto& [j, d] : inc) {
      auto& m = moments[j];
      m.first += d;
      m.second += d * d;
    }
  }

  const SparseVector beta = drift(start, k, x0.total_mass());
  for (const auto& [j, b] : beta) moments.try_emplace(j, 0.0, 0.0);

  GeneratorReport report;
  report.h = h;
  report.replicas = replicas;
  report.expected_events = lambda * h;
  const double R = static_cast<double>(replicas);
  for (const auto& [j, m] : moments) {
    GeneratorComponent c;
    c.size = j;
    c.mean_increment = m.first / R;
    c.predicted = value_at(beta, j) * h;
    const double var = std::max(0.0, (m.second - R * c.mean_increment * c.mean_increment) / (R - 1));
    c.stderr_mean = std::sqrt(var / R);
    const double diff = c.mean_increment - c.predicted;
    if (c.stderr_mean > 0.0) {
      c.z = diff / c.stderr_mean;
    } else {
      c.z = diff == 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), diff);
    }
    report.components.push_back(c);
  }
  return report;
}

}  // namespace mindriven
