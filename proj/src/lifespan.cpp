// SPDX-License-Identifier: Apache-2.0
#include "mindriven/lifespan.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "mindriven/error.hpp"
#include "mindriven/parallel.hpp"
#include "mindriven/rng.hpp"
#include "mindriven/ssa.hpp"
#include "mindriven/stats.hpp"

namespace mindriven {

std::string to_string(SeriesClass c) {
  switch (c) {
    case SeriesClass::Summable: return "summable";
    case SeriesClass::Divergent: return "divergent";
    case SeriesClass::Inconclusive: return "inconclusive";
  }
  return "inconclusive";
}

std::string to_string(BlowupEvidence e) {
  return e == BlowupEvidence::GrowsUnbounded ? "grows_unbounded_evidence"
                                             : "t_inf_finite_evidence";
}

SeriesReport series_test(const Phi& phi, std::size_t cutoff) {
  if (cutoff < 10) fail(ErrorKind::InvalidArgument, "series cutoff must be at least 10");
  SeriesReport rep;
  rep.partial_sums.reserve(cutoff);
  CompensatedSum sum;
  for (std::size_t i = 1; i <= cutoff; ++i) {
    const double x = static_cast<double>(i);
    sum.add(1.0 / (x * phi(x)));
    rep.partial_sums.push_back(sum.value());
  }
  switch (phi.family) {
    case PhiFamily::Constant:
      rep.classification = SeriesClass::Divergent;
      break;
    case PhiFamily::Power:
      rep.classification = phi.exponent > 0.0 ? SeriesClass::Summable : SeriesClass::Divergent;
      break;
    case PhiFamily::LogPower:
      rep.classification = phi.exponent > 1.0 ? SeriesClass::Summable : SeriesClass::Divergent;
      break;
    default:
      rep.classification = SeriesClass::Inconclusive;
  }
  return rep;
}

MonteCarloEstimate expected_T_monodisperse(Count n, const Phi& phi, std::size_t replicas,
                                           std::uint64_t seed, unsigned threads) {
  if (n < 2) fail(ErrorKind::InvalidArgument, "n must be at least 2");
  if (replicas == 0) fail(ErrorKind::InvalidArgument, "need at least one replica");
  const Kernel k = Kernel::min_form("phi", phi);
  const ParticleState start = ParticleState::monodisperse(1, n);
  std::vector<double> samples(replicas);
  parallel_for(replicas, threads, [&](std::size_t r) {
    RandomStream rng = RandomStream(seed, r, StreamRole::Simulation).split(n);
    samples[r] = sample_last_coalescence_time(start, k, rng);
  });
  MonteCarloEstimate est;
  est.replicas = replicas;
  est.mean = stats::mean(samples);
  est.stderr_mean = stats::standard_error(samples);
  if (phi.family == PhiFamily::Constant) {
    CompensatedSum h;
    for (Count m = 1; m < n; ++m) h.add(1.0 / static_cast<double>(m));
    est.exact = h.value() / phi(1.0);
  }
  return est;
}

double lower_bound_check(Count n, const Phi& phi) {
  if (n < 2) fail(ErrorKind::InvalidArgument, "n must be at least 2");
  CompensatedSum sum;
  const double nn = static_cast<double>(n);
  for (Count m = 1; m < n; ++m) {
    const double mm = static_cast<double>(m);
    sum.add(1.0 / (mm * phi(nn / mm)));
  }
  return sum.value();
}

DichotomyReport dichotomy_scan(const std::string& phi_name, const Phi& phi,
                               const std::vector<Count>& n_values, std::size_t replicas,
                               std::uint64_t seed, unsigned threads,
                               std::size_t series_cutoff) {
  if (n_values.empty()) fail(ErrorKind::InvalidArgument, "empty n ladder");
  for (std::size_t a = 0; a < n_values.size(); ++a) {
    if (n_values[a] < 2) fail(ErrorKind::InvalidArgument, "ladder values must be >= 2");
    if (a > 0 && n_values[a] <= n_values[a - 1])
      fail(ErrorKind::InvalidArgument, "ladder must be increasing");
  }
  DichotomyReport rep;
  rep.phi_name = phi_name;
  rep.series = series_test(phi, series_cutoff);
  for (Count n : n_values) {
    DichotomyRow row;
    row.n = n;
    row.estimate = expected_T_monodisperse(n, phi, replicas, seed, threads);
    row.lower_bound = lower_bound_check(n, phi);
    rep.rows.push_back(row);
  }
  rep.increasing = true;
  for (std::size_t a = 1; a < rep.rows.size(); ++a)
    if (!(rep.rows[a].estimate.mean > rep.rows[a - 1].estimate.mean)) rep.increasing = false;

  const std::size_t first = rep.rows.size() / 2;
  std::vector<double> x, y, w;
  for (std::size_t a = first; a < rep.rows.size(); ++a) {
    const auto& e = rep.rows[a].estimate;
    x.push_back(std::log(static_cast<double>(rep.rows[a].n)));
    y.push_back(e.mean);
    w.push_back(e.stderr_mean > 0.0 ? 1.0 / (e.stderr_mean * e.stderr_mean) : 1.0);
  }
  rep.plateau_points = x.size();
  if (x.size() >= 2) {
    const auto fit = stats::weighted_least_squares(x, y, w);
    rep.plateau_slope = fit.slope;
    rep.plateau_slope_stderr = fit.slope_stderr;
    rep.plateau = std::abs(fit.slope) <= 3.0 * fit.slope_stderr;
  }
  return rep;
}

std::optional<LyapunovWeights> default_weights(const Kernel& k) {
  if (!k.is_min_form()) return std::nullopt;
  const Phi& phi = *k.phi();
  if (phi.family == PhiFamily::Power && phi.exponent > 0.0) {
    const double a = phi.exponent;
    LyapunovWeights w;
    w.phi_seq = [a](Size j) { return std::pow(static_cast<double>(j), a); };
    w.psi_seq = [a](Size j) { return std::pow(static_cast<double>(j), -a); };
    w.epsilon = 1.0 - std::pow(2.0, -a);
    w.description = "phi_j = j^a, psi_j = j^-a";
    return w;
  }
  if (phi.family == PhiFamily::LogPower && phi.exponent > 1.0) {
    const double alpha = phi.exponent - 1.0;
    const double scale = phi(1.0) / std::pow(std::log(2.0), phi.exponent);
    LyapunovWeights w;
    w.phi_seq = [phi](Size j) { return phi(static_cast<double>(j)); };
    w.psi_seq = [alpha](Size j) { return std::pow(std::log(static_cast<double>(j) + 1.0), -alpha); };
    w.epsilon = scale * alpha * std::pow(2.0, -1.0 - alpha) * std::log(1.5);
    w.description = "phi_j = c ln(j+1)^(1+a), psi_j = ln(j+1)^-a";
    return w;
  }
  return std::nullopt;
}

std::vector<WeightViolation> check_weights(const LyapunovWeights& w, const Kernel& k,
                                           Size cutoff) {
  std::vector<WeightViolation> out;
  if (!(w.epsilon > 0.0)) out.push_back({0, 0, "epsilon must be positive"});
  const double slack = 1e-12;
  for (Size i = 1; i <= cutoff; ++i) {
    const double phi_i = w.phi_seq(i);
    if (i > 1 && phi_i < w.phi_seq(i - 1) * (1 - slack))
      out.push_back({i, 0, "phi sequence decreases"});
    if (i > 1 && w.psi_seq(i) > w.psi_seq(i - 1) * (1 + slack))
      out.push_back({i, 0, "psi sequence increases"});
    for (Size j = i; j <= cutoff; ++j) {
      if (k(i, j) < phi_i * (1 - slack)) {
        std::ostringstream msg;
        msg << "K(" << i << "," << j << ") = " << k(i, j) << " < phi_i = " << phi_i;
        out.push_back({i, j, msg.str()});
      }
      const double gap = phi_i * (w.psi_seq(i) - w.psi_seq(i + j));
      if (gap < w.epsilon * (1 - slack)) {
        std::ostringstream msg;
        msg << "phi_i (psi_i - psi_{i+j}) = " << gap << " < epsilon = " << w.epsilon;
        out.push_back({i, j, msg.str()});
      }
      if (out.size() > 100) return out;
    }
  }
  return out;
}

bool BlowupReport::all_hold() const {
  return weight_violations.empty() &&
         std::all_of(rows.begin(), rows.end(), [](const BlowupRow& r) { return r.holds; });
}

BlowupReport blowup_classify(const Kernel& k, const Sequence& x0, Size I,
                             const OdeControls& controls,
                             const std::optional<LyapunovWeights>& weights) {
  if (I == 0) fail(ErrorKind::InvalidArgument, "I must be at least 1");
  BlowupReport rep;
  const bool slow = k.log_bound_a0().has_value();
  std::optional<LyapunovWeights> w = weights;
  if (!slow && !w) w = default_weights(k);
  if (!slow && !w)
    fail(ErrorKind::MissingWeights, "kernel " + k.name() + " has no Lyapunov weights");

  OdeControls c = controls;
  c.store_dense = false;
  const PiecewiseSolution sol = integrate_piecewise(x0, k, PiecewiseStop{I, {}}, c);
  rep.t_inf = sol.t_inf_estimate();
  for (double v : x0) rep.m0_initial += v;

  if (slow) {
    rep.evidence = BlowupEvidence::GrowsUnbounded;
    const double a0 = *k.log_bound_a0();
    double weighted = 0.0;  // sum_{j<i} ln((j+2)/(j+1)) t_j
    for (Size i = 1; i <= sol.switch_times.size(); ++i) {
      const double li = std::log(static_cast<double>(i) + 1.0);
      BlowupRow row;
      row.i = i;
      row.t_i = sol.switch_times[i - 1];
      row.s_i = sol.durations[i - 1];
      row.bound = 4.0 * a0 * std::log(static_cast<double>(i)) / li + weighted / li +
                  4.0 * a0 / li * std::log(rep.m0_initial);
      row.holds = row.t_i >= row.bound - 1e-9 * std::max(1.0, std::abs(row.bound));
      rep.rows.push_back(row);
      weighted += std::log((static_cast<double>(i) + 2.0) / (static_cast<double>(i) + 1.0)) *
                  row.t_i;
    }
    return rep;
  }

  rep.evidence = BlowupEvidence::FiniteLifetime;
  rep.epsilon = w->epsilon;
  rep.weight_violations = check_weights(*w, k, std::max<Size>(2 * I, 64));
  for (std::size_t q = 0; q < x0.size(); ++q) rep.mpsi_initial += w->psi_seq(q + 1) * x0[q];
  const double budget = rep.mpsi_initial / rep.m0_initial;
  for (Size i = 1; i <= sol.switch_times.size(); ++i) {
    const DenseState& s = sol.segment_states[i - 1];
    double m0 = 0.0, mpsi = 0.0;
    for (Size j = 1; j <= s.truncation(); ++j) {
      m0 += s.x[j - 1];
      mpsi += w->psi_seq(j) * s.x[j - 1];
    }
    BlowupRow row;
    row.i = i;
    row.t_i = sol.switch_times[i - 1];
    row.s_i = sol.durations[i - 1];
    row.bound = budget / w->epsilon;
    row.ratio_term = mpsi / m0 + w->epsilon * row.t_i;
    const double slack = 1e-9 * std::max(1.0, budget);
    row.holds = row.t_i <= row.bound + slack && row.ratio_term <= budget + slack;
    rep.rows.push_back(row);
  }
  return rep;
}

}  // namespace mindriven
