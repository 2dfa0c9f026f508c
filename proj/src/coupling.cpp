// SPDX-License-Identifier: Apache-2.0
#include "mindriven/coupling.hpp"

#include <algorithm>
#include <functional>
#include <string>

#include "mindriven/error.hpp"

namespace mindriven {

namespace {

// One coupled process held as its sorted size vector.
struct SortedProcess {
  std::vector<Size> sizes;
  CompensatedSum clock;
  Trajectory traj;

  void merge_with(std::size_t k_index, double eps, double remaining, const Phi& phi) {
    const Size smallest = sizes.front();
    const Size partner = sizes[k_index];
    clock.add(eps / (remaining * phi(static_cast<double>(smallest))));
    sizes.erase(sizes.begin() + static_cast<std::ptrdiff_t>(k_index));
    sizes.erase(sizes.begin());
    const Size merged = smallest + partner;
    sizes.insert(std::upper_bound(sizes.begin(), sizes.end(), merged), merged);
    const double t = clock.value();
    traj.events.push_back({t, partner, smallest, eps});
    if (sizes.front() > smallest) traj.min_size_jumps.emplace_back(sizes.front(), t);
  }

  void finish() {
    traj.final_state = ParticleState::from_sorted(SortedSizes{sizes});
    if (sizes.size() == 1) {
      traj.last_coalescence = traj.events.empty() ? 0.0 : traj.events.back().t;
    } else {
      traj.end_time = traj.events.empty() ? 0.0 : traj.events.back().t;
    }
  }
};

SortedProcess make_process(const ParticleState& s0) {
  SortedProcess p;
  p.sizes = sorted_sizes(s0).sizes;
  p.traj.initial = s0;
  p.traj.kernel = "min-form";
  p.traj.min_form = true;
  return p;
}

void check_pair(const ParticleState& x0, const ParticleState& y0) {
  if (x0.total_count() != y0.total_count()) {
    fail(ErrorKind::InvalidArgument, "coupled states need equal particle counts");
  }
  if (x0.total_count() < 2) fail(ErrorKind::InvalidArgument, "coupling needs n >= 2");
  if (auto m = first_dominance_violation(sorted_sizes(y0), sorted_sizes(x0))) {
    fail(ErrorKind::DominanceViolation,
         "S_m(y0) > S_m(x0) first at m = " + std::to_string(*m + 1));
  }
}

// Steps both processes until `done` holds or both are singletons.
std::size_t run_coupled(SortedProcess& x, SortedProcess& y, const Phi& phi,
                        RandomStream& rng, CouplingStream* stream,
                        const std::function<bool()>& done) {
  const std::size_t n = x.sizes.size();
  std::size_t checks = 0;
  for (std::size_t m = 1; m < n; ++m) {
    if (done && done()) break;
    const std::size_t len = n - m + 1;
    const std::uint64_t k = rng.uniform_int(2, len);
    const double eps = rng.exponential();
    if (stream) {
      stream->partner_indices.push_back(k);
      stream->exponentials.push_back(eps);
    }
    const double remaining = static_cast<double>(n - m);
    x.merge_with(k - 1, eps, remaining, phi);
    y.merge_with(k - 1, eps, remaining, phi);
    if (auto bad = first_dominance_violation(SortedSizes{y.sizes}, SortedSizes{x.sizes})) {
      fail(ErrorKind::DominanceViolation,
           "coupling lost dominance after event " + std::to_string(m) + " at m = " +
               std::to_string(*bad + 1));
    }
    ++checks;
  }
  return checks;
}

}  // namespace

CoupledRun coupled_simulate(const ParticleState& x0, const ParticleState& y0,
                            const Phi& phi, RandomStream& rng) {
  check_pair(x0, y0);
  SortedProcess x = make_process(x0);
  SortedProcess y = make_process(y0);
  CoupledRun run;
  run.dominance_checks = run_coupled(x, y, phi, rng, &run.stream, {});
  x.finish();
  y.finish();
  run.x = std::move(x.traj);
  run.y = std::move(y.traj);
  return run;
}

ScalingPair scaling_coupling(Count n, Size i, const Phi& phi, RandomStream& rng) {
  if (n < 2 || i < 1) fail(ErrorKind::InvalidArgument, "scaling coupling needs n >= 2, i >= 1");
  SortedProcess scaled = make_process(ParticleState::monodisperse(i, n));
  SortedProcess unit = make_process(ParticleState::monodisperse(1, n));
  auto done = [&] { return scaled.sizes.front() > i && unit.sizes.front() > 1; };
  run_coupled(scaled, unit, phi, rng, nullptr, done);
  scaled.finish();
  unit.finish();
  return {*scaled.traj.exhaustion_time(i), *unit.traj.exhaustion_time(1)};
}

}  // namespace mindriven
