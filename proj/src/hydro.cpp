// SPDX-License-Identifier: Apache-2.0
#include "mindriven/hydro.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "mindriven/error.hpp"
#include "mindriven/model.hpp"
#include "mindriven/parallel.hpp"
#include "mindriven/rng.hpp"
#include "mindriven/stats.hpp"

namespace mindriven {

DiscretizedInitial discretize_initial(const Sequence& x0, Count N) {
  if (N < 2) fail(ErrorKind::InvalidArgument, "N must be at least 2");
  if (x0.empty()) fail(ErrorKind::ZeroMass, "empty initial sequence");
  for (double v : x0)
    if (!(v >= 0.0) || !std::isfinite(v))
      fail(ErrorKind::InvalidArgument, "initial data must be finite and nonnegative");
  const double m1 = first_moment(x0);
  if (!(m1 > 0.0)) fail(ErrorKind::ZeroMass, "initial data has no mass");
  if (std::abs(m1 - 1.0) > 1e-9)
    fail(ErrorKind::InvalidArgument, "initial data must have first moment 1");

  Size support = x0.size();
  while (support > 0 && x0[support - 1] == 0.0) --support;
  const auto root = static_cast<Size>(std::ceil(std::sqrt(static_cast<double>(N))));
  DiscretizedInitial out;
  out.cutoff = std::min(support, root);

  std::map<Size, Count> counts;
  Count used = 0;
  for (Size j = 2; j <= out.cutoff; ++j) {
    const auto c = static_cast<Count>(std::floor(static_cast<double>(N) * x0[j - 1]));
    if (c == 0) continue;
    counts[j] = c;
    used += j * c;
  }
  if (used > N) fail(ErrorKind::Infeasible, "rounded mass exceeds N");
  const Count rest = N - used;
  if (rest > 0) {
    if (!(x0[0] > 0.0))
      fail(ErrorKind::Infeasible, "no size-1 mass to absorb the rounding remainder");
    counts[1] = rest;
  }
  out.state = ParticleState(counts);

  const double n = static_cast<double>(N);
  double err = 0.0, tail = 0.0;
  for (Size j = 1; j <= x0.size(); ++j) {
    const double rescaled = static_cast<double>(out.state.count(j)) / n;
    err += std::abs(rescaled - x0[j - 1]);
    if (j > out.cutoff) tail += static_cast<double>(j + 1) * x0[j - 1];
  }
  out.l1_error = err;
  const double J = static_cast<double>(out.cutoff);
  out.error_bound = (J - 1.0) * (J + 4.0) / (2.0 * n) + tail;
  return out;
}

double trajectory_distance(const Trajectory& traj, const PiecewiseSolution& sol, Count N,
                           double horizon, std::size_t grid) {
  if (N == 0) fail(ErrorKind::InvalidArgument, "N must be positive");
  if (!(horizon >= 0.0) || grid == 0) fail(ErrorKind::InvalidArgument, "bad horizon or grid");
  if (sol.dense.empty() || sol.dense.back().t < horizon) {
    std::ostringstream msg;
    msg << "deterministic solution ends before t=" << horizon;
    fail(ErrorKind::HorizonExceedsSolution, msg.str());
  }
  const bool singleton = traj.last_coalescence.has_value();
  if (!singleton && traj.end_time < horizon)
    fail(ErrorKind::InvalidArgument, "trajectory does not cover the horizon");
  const double end = singleton ? std::min(horizon, *traj.last_coalescence) : horizon;

  const Size cap = sol.dense.front().x.size();
  const double n = static_cast<double>(N);
  std::vector<double> low(cap, 0.0);  // X_j / N for j <= cap
  double high = 0.0;                  // sum of X_j / N beyond the cap
  const auto add = [&](Size j, double delta) {
    if (j <= cap)
      low[j - 1] += delta;
    else
      high += delta;
  };
  for (const auto& [size, count] : traj.initial.counts()) add(size, static_cast<double>(count) / n);

  const auto distance_at = [&](double t) {
    const Sequence x = sol.evaluate(t);
    double d = high;
    for (Size j = 0; j < cap; ++j) d += std::abs(low[j] - x[j]);
    return d;
  };

  double sup = 0.0;
  std::size_t next_grid = 0;
  const double inv_n = 1.0 / n;
  const auto grid_time = [&](std::size_t g) {
    return horizon * static_cast<double>(g) / static_cast<double>(grid);
  };
  for (const Event& ev : traj.events) {
    if (ev.t > end) break;
    while (next_grid <= grid && grid_time(next_grid) < ev.t) {
      if (grid_time(next_grid) <= end) sup = std::max(sup, distance_at(grid_time(next_grid)));
      ++next_grid;
    }
    sup = std::max(sup, distance_at(ev.t));  // left limit
    add(ev.min_size, -inv_n);
    add(ev.partner, -inv_n);
    add(ev.min_size + ev.partner, inv_n);
    sup = std::max(sup, distance_at(ev.t));
  }
  for (; next_grid <= grid; ++next_grid) {
    if (grid_time(next_grid) <= end) sup = std::max(sup, distance_at(grid_time(next_grid)));
  }
  return sup;
}

ConvergenceRun convergence_experiment(const Sequence& x0, const Kernel& k, double horizon,
                                      const std::vector<Count>& N_values,
                                      std::size_t replicas, std::uint64_t seed,
                                      const ConvergenceOptions& options) {
  if (!(horizon > 0.0)) fail(ErrorKind::InvalidArgument, "horizon must be positive");
  if (N_values.empty() || replicas == 0)
    fail(ErrorKind::InvalidArgument, "need at least one N value and one replica");

  OdeControls ode = options.ode;
  if (!(ode.dense_dt > 0.0)) ode.dense_dt = horizon / static_cast<double>(options.grid);
  const PiecewiseSolution sol = integrate_piecewise(x0, k, PiecewiseStop{{}, horizon}, ode);

  ConvergenceRun run;
  run.N_values = N_values;
  run.replicas = replicas;
  run.horizon = horizon;
  run.seed = seed;
  run.switch_times = sol.switch_times;
  if (run.switch_times.empty()) {
    OdeControls quick = ode;
    quick.store_dense = false;
    run.switch_times =
        integrate_piecewise(x0, k, PiecewiseStop{Size{1}, {}}, quick).switch_times;
  }
  const Size tracked = run.switch_times.size();

  run.sup_errors.assign(N_values.size(), std::vector<double>(replicas, 0.0));
  run.switch_deviations.assign(N_values.size(),
                               std::vector<std::vector<double>>(replicas));
  for (std::size_t a = 0; a < N_values.size(); ++a) {
    const Count N = N_values[a];
    const ParticleState start = discretize_initial(x0, N).state;
    parallel_for(replicas, options.threads, [&](std::size_t r) {
      RandomStream rng = RandomStream(seed, r, StreamRole::Ensemble).split(N);
      const Trajectory traj =
          simulate(start, k, StopRule::until_time_and_min_size(horizon, tracked + 1), rng);
      run.sup_errors[a][r] = trajectory_distance(traj, sol, N, horizon, options.grid);
      std::vector<double> dev(tracked, std::numeric_limits<double>::infinity());
      for (Size i = 1; i <= tracked; ++i) {
        if (const auto T = traj.exhaustion_time(i)) dev[i - 1] = std::abs(*T - run.switch_times[i - 1]);
      }
      run.switch_deviations[a][r] = std::move(dev);
    });
  }

  std::vector<double> log_n, log_err;
  for (std::size_t a = 0; a < N_values.size(); ++a) {
    ConvergenceSummary s;
    s.N = N_values[a];
    s.median_error = stats::median(run.sup_errors[a]);
    s.q25 = stats::quantile(run.sup_errors[a], 0.25);
    s.q75 = stats::quantile(run.sup_errors[a], 0.75);
    run.summary.push_back(s);
    log_n.push_back(std::log(static_cast<double>(s.N)));
    log_err.push_back(std::log(s.median_error));
    for (Size i = 1; i <= tracked; ++i) {
      std::vector<double> col;
      for (const auto& dev : run.switch_deviations[a]) col.push_back(dev[i - 1]);
      SwitchDeviation d;
      d.N = s.N;
      d.i = i;
      d.t_i = run.switch_times[i - 1];
      d.median = stats::median(col);
      d.q25 = stats::quantile(col, 0.25);
      d.q75 = stats::quantile(col, 0.75);
      d.max = *std::max_element(col.begin(), col.end());
      run.deviation_table.push_back(d);
    }
  }
  if (N_values.size() >= 2) {
    const auto fit = stats::least_squares(log_n, log_err);
    run.fitted_slope = fit.slope;
    run.fitted_slope_stderr = fit.slope_stderr;
  }
  return run;
}

}  // namespace mindriven
