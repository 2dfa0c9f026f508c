// SPDX-License-Identifier: Apache-2.0
#include "mindriven/ode.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "mindriven/error.hpp"

namespace mindriven {

namespace {

// Dormand-Prince 5(4) coefficients.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                 b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
constexpr double d1 = -12715105075.0 / 11282082432, d3 = 87487479700.0 / 32700410799,
                 d4 = -10690763975.0 / 1880347072, d5 = 701980252875.0 / 199316789632,
                 d6 = -1453857185.0 / 822651844, d7 = 69997945.0 / 29380423;

// Field b^(ell) on the augmented vector [x_1..x_M, overflow mass].
class SegmentField {
 public:
  SegmentField(Size ell, Size cap, const Kernel& k) : ell_(ell), cap_(cap), rates_(cap, 0.0) {
    for (Size j = ell; j <= cap; ++j) rates_[j - 1] = k(ell, j);
  }

  Size ell() const { return ell_; }
  Size cap() const { return cap_; }
  const Sequence& rates() const { return rates_; }

  double max_rate() const {
    double m = 0.0;
    for (double r : rates_) m = std::max(m, r);
    return m;
  }

  void operator()(const Sequence& y, Sequence& dy) const {
    std::fill(dy.begin(), dy.end(), 0.0);
    double loss = 0.0;
    double overflow = 0.0;
    for (Size s = ell_; s <= cap_; ++s) {
      const double flow = rates_[s - 1] * y[s - 1];
      if (flow == 0.0) continue;
      loss += flow;
      if (s != ell_) dy[s - 1] -= flow;
      const Size target = s + ell_;
      if (target <= cap_)
        dy[target - 1] += flow;
      else
        overflow += static_cast<double>(target) * flow;
    }
    dy[ell_ - 1] -= rates_[ell_ - 1] * y[ell_ - 1] + loss;
    dy[cap_] = overflow;
  }

 private:
  Size ell_;
  Size cap_;
  Sequence rates_;
};

// One explicit DP5 step with all stages kept for dense output.
struct Stepper {
  const SegmentField& field;
  std::size_t n;
  Sequence k1, k2, k3, k4, k5, k6, k7, tmp, y5;

  explicit Stepper(const SegmentField& f)
      : field(f), n(f.cap() + 1), k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), tmp(n),
        y5(n) {}

  // Requires k1 = f(y). Leaves the 5th-order result in y5 and f(y5) in k7.
  void step(const Sequence& y, double h) {
    for (std::size_t q = 0; q < n; ++q) tmp[q] = y[q] + h * a21 * k1[q];
    field(tmp, k2);
    for (std::size_t q = 0; q < n; ++q) tmp[q] = y[q] + h * (a31 * k1[q] + a32 * k2[q]);
    field(tmp, k3);
    for (std::size_t q = 0; q < n; ++q)
      tmp[q] = y[q] + h * (a41 * k1[q] + a42 * k2[q] + a43 * k3[q]);
    field(tmp, k4);
    for (std::size_t q = 0; q < n; ++q)
      tmp[q] = y[q] + h * (a51 * k1[q] + a52 * k2[q] + a53 * k3[q] + a54 * k4[q]);
    field(tmp, k5);
    for (std::size_t q = 0; q < n; ++q)
      tmp[q] = y[q] + h * (a61 * k1[q] + a62 * k2[q] + a63 * k3[q] + a64 * k4[q] + a65 * k5[q]);
    field(tmp, k6);
    for (std::size_t q = 0; q < n; ++q)
      y5[q] = y[q] + h * (b1 * k1[q] + b3 * k3[q] + b4 * k4[q] + b5 * k5[q] + b6 * k6[q]);
    field(y5, k7);
  }

  double error_norm(const Sequence& y, double h, double atol, double rtol) const {
    double worst = 0.0;
    for (std::size_t q = 0; q < n; ++q) {
      const double err = h * (e1 * k1[q] + e3 * k3[q] + e4 * k4[q] + e5 * k5[q] +
                              e6 * k6[q] + e7 * k7[q]);
      const double scale = atol + rtol * std::max(std::abs(y[q]), std::abs(y5[q]));
      worst = std::max(worst, std::abs(err) / scale);
    }
    return worst;
  }

  // Continuous extension at theta in [0, 1] of the step just taken.
  void interpolate(const Sequence& y, double h, double theta, Sequence& out) const {
    out.resize(n);
    for (std::size_t q = 0; q < n; ++q) {
      const double diff = y5[q] - y[q];
      const double bspl = h * k1[q] - diff;
      const double r4 = diff - h * k7[q] - bspl;
      const double r5 = h * (d1 * k1[q] + d3 * k3[q] + d4 * k4[q] + d5 * k5[q] + d6 * k6[q] +
                             d7 * k7[q]);
      out[q] = y[q] + theta * (diff + (1 - theta) * (bspl + theta * (r4 + (1 - theta) * r5)));
    }
  }
};

Sequence augmented(const DenseState& s) {
  Sequence y(s.x);
  y.push_back(s.overflow_mass);
  return y;
}

DenseSample make_sample(double t, Size ell, const Sequence& y, const Sequence& dy) {
  DenseSample s;
  s.t = t;
  s.ell = ell;
  s.x.assign(y.begin(), y.end() - 1);
  s.dxdt.assign(dy.begin(), dy.end() - 1);
  s.overflow_mass = y.back();
  return s;
}

double augmented_mass(const Sequence& y) {
  double m = y.back();
  for (std::size_t q = 0; q + 1 < y.size(); ++q) m += static_cast<double>(q + 1) * y[q];
  return m;
}

double initial_step(const SegmentField& field) {
  return std::min(1e-2, 0.01 / (2.0 * field.max_rate() + 1e-300));
}

double grow_factor(double err) {
  if (err == 0.0) return 5.0;
  return std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
}

void check_tracked(const Sequence& y, double t, const OdeControls& c, double mass0,
                   SegmentResult& out) {
  for (std::size_t q = 0; q + 1 < y.size(); ++q) {
    if (y[q] >= 0.0) continue;
    if (y[q] < -c.tol_neg) {
      std::ostringstream msg;
      msg << "component " << q + 1 << " reached " << y[q] << " at t=" << t;
      fail(ErrorKind::ClampViolation, msg.str());
    }
  }
  if (y.back() > c.tol_overflow) {
    std::ostringstream msg;
    msg << "overflow mass " << y.back() << " exceeds " << c.tol_overflow << " at t=" << t
        << "; raise the truncation cap";
    fail(ErrorKind::TruncationOverflow, msg.str());
  }
  const double drift = std::abs(augmented_mass(y) - mass0) / mass0;
  if (drift > c.tol_mass) {
    std::ostringstream msg;
    msg << "first moment drifted by " << drift << " at t=" << t;
    fail(ErrorKind::MassDrift, msg.str());
  }
  (void)out;
}

std::size_t clamp_negatives(Sequence& y, SegmentResult& out) {
  std::size_t n = 0;
  for (std::size_t q = 0; q + 1 < y.size(); ++q) {
    if (y[q] < 0.0) {
      out.max_clamp = std::max(out.max_clamp, -y[q]);
      y[q] = 0.0;
      ++n;
    }
  }
  out.clamps += n;
  return n;
}

// Adaptive DP5 over a fixed field for a signed duration, no events.
Sequence advance_fixed(const SegmentField& field, Sequence y, double duration,
                       const OdeControls& c) {
  Stepper st(field);
  field(y, st.k1);
  const double dir = duration < 0 ? -1.0 : 1.0;
  double remaining = std::abs(duration);
  double h = initial_step(field);
  std::size_t steps = 0;
  while (remaining > 0.0) {
    if (++steps > c.max_steps) fail(ErrorKind::StepUnderflow, "step budget exhausted");
    const double take = std::min(h, remaining);
    st.step(y, dir * take);
    const double err = st.error_norm(y, take, c.atol, c.rtol);
    if (err <= 1.0) {
      y = st.y5;
      st.k1 = st.k7;
      remaining = take == remaining ? 0.0 : remaining - take;
    }
    h = take * grow_factor(err);
    if (h < c.min_step) fail(ErrorKind::StepUnderflow, "step size underflow");
  }
  return y;
}

}  // namespace

double DenseState::first_moment() const {
  double m = 0.0;
  for (std::size_t q = 0; q < x.size(); ++q) m += static_cast<double>(q + 1) * x[q];
  return m;
}

Sequence vector_field_b(Size i, const Sequence& x, const Kernel& k, double* overflow_rate) {
  const Size cap = x.size();
  if (i == 0 || i > cap) fail(ErrorKind::InvalidArgument, "segment index outside the state");
  for (Size j = 1; j < i; ++j) {
    if (x[j - 1] != 0.0) {
      fail(ErrorKind::PrefixViolation,
           "x_" + std::to_string(j) + " is nonzero below the minimal size " + std::to_string(i));
    }
  }
  Sequence out(cap, 0.0);
  double overflow = 0.0;
  double loss = 0.0;
  for (Size j = i; j <= cap; ++j) loss += k(i, j) * x[j - 1];
  out[i - 1] = -k(i, i) * x[i - 1] - loss;
  for (Size j = i + 1; j <= cap; ++j) {
    double gain = 0.0;
    if (j - i >= i) gain = k(j - i, i) * x[j - i - 1];
    out[j - 1] = gain - k(i, j) * x[j - 1];
  }
  for (Size s = std::max(i, cap - i + 1); s <= cap; ++s) {
    if (s + i > cap) overflow += static_cast<double>(s + i) * k(i, s) * x[s - 1];
  }
  if (overflow_rate != nullptr) *overflow_rate = overflow;
  return out;
}

Sequence vector_field_F(Size i, const Sequence& a, const Sequence& y) {
  const Size cap = y.size();
  if (a.size() < cap) fail(ErrorKind::InvalidArgument, "coefficient vector shorter than state");
  if (i == 0 || i > cap) fail(ErrorKind::InvalidArgument, "segment index outside the state");
  Sequence out(cap, 0.0);
  double loss = 0.0;
  for (Size j = i; j <= cap; ++j) loss += a[j - 1] * y[j - 1];
  out[i - 1] = -a[i - 1] * y[i - 1] - loss;
  for (Size j = i + 1; j <= cap; ++j) {
    const double gain = j - i >= i ? a[j - i - 1] * y[j - i - 1] : 0.0;
    out[j - 1] = gain - a[j - 1] * y[j - 1];
  }
  return out;
}

SegmentResult integrate_segment(const DenseState& state, const Kernel& k,
                                const OdeControls& c, double t_stop) {
  const Size cap = state.truncation();
  const Size ell = state.ell;
  if (ell == 0 || ell > cap) fail(ErrorKind::InvalidArgument, "minimal size outside the cap");
  if (state.x[ell - 1] <= 0.0) fail(ErrorKind::InvalidArgument, "x_ell already vanished");
  if (!(t_stop > state.t)) fail(ErrorKind::InvalidArgument, "stop time not after start");

  const SegmentField field(ell, cap, k);
  Stepper st(field);
  SegmentResult out;
  Sequence y = augmented(state);
  double mass0 = 0.0;
  {
    DenseState probe = state;
    mass0 = probe.first_moment() + probe.overflow_mass;
  }
  if (!(mass0 > 0.0)) fail(ErrorKind::ZeroMass, "state has no mass");

  double t = state.t;
  field(y, st.k1);
  if (c.store_dense) out.samples.push_back(make_sample(t, ell, y, st.k1));

  double h = initial_step(field);
  Sequence scratch(y.size());
  Sequence dscratch(y.size());

  const auto emit_grid = [&](double t0, double step, double t_end) {
    if (!c.store_dense || !(c.dense_dt > 0.0)) return;
    double g = std::floor(t0 / c.dense_dt + 1.0) * c.dense_dt;
    while (g < t_end - 1e-12 * std::max(1.0, std::abs(t_end))) {
      st.interpolate(y, step, (g - t0) / step, scratch);
      field(scratch, dscratch);
      out.samples.push_back(make_sample(g, ell, scratch, dscratch));
      g += c.dense_dt;
    }
  };

  while (true) {
    if (++out.steps > c.max_steps) fail(ErrorKind::StepUnderflow, "step budget exhausted");
    if (t - state.segment_start > c.segment_time_budget) {
      std::ostringstream msg;
      msg << "x_" << ell << " did not vanish within " << c.segment_time_budget
          << " time units (x_" << ell << " = " << y[ell - 1] << ")";
      fail(ErrorKind::NoCrossing, msg.str());
    }
    bool last = false;
    if (t + h >= t_stop) {
      h = t_stop - t;
      last = true;
    }
    st.step(y, h);
    const double err = st.error_norm(y, h, c.atol, c.rtol);
    if (err > 1.0) {
      h *= grow_factor(err);
      if (h < c.min_step) {
        std::ostringstream msg;
        msg << "step size underflow at t=" << t << " on segment " << ell;
        fail(ErrorKind::StepUnderflow, msg.str());
      }
      continue;
    }

    if (st.y5[ell - 1] <= 0.0) {
      // Crossing inside this step: solve x_ell(tau) = 0 on the one-step map.
      const Sequence y0 = y;
      const Sequence k1_saved = st.k1;
      const double h_full = h;
      const Sequence y_full = st.y5;
      const Sequence k7_full = st.k7;
      auto g = [&](double tau) {
        st.k1 = k1_saved;
        st.step(y0, tau);
        return st.y5[ell - 1];
      };
      double lo = 0.0, flo = y0[ell - 1];
      double hi = h_full, fhi = y_full[ell - 1];
      double root = hi, froot = fhi;
      int side = 0;
      for (int it = 0; it < 200; ++it) {
        if (std::abs(froot) <= 1e-16 || hi - lo <= 4e-16 * std::max(1.0, std::abs(t) + hi)) break;
        double mid = (flo * hi - fhi * lo) / (flo - fhi);
        if (!(mid > lo && mid < hi)) mid = 0.5 * (lo + hi);
        const double fm = g(mid);
        root = mid;
        froot = fm;
        if (fm > 0.0) {
          lo = mid;
          flo = fm;
          if (side == -1) fhi *= 0.5;
          side = -1;
        } else {
          hi = mid;
          fhi = fm;
          if (side == 1) flo *= 0.5;
          side = 1;
        }
      }
      if (std::abs(froot) > c.tol_event) {
        std::ostringstream msg;
        msg << "could not localize the zero of x_" << ell << " (residual " << froot << ")";
        fail(ErrorKind::NoCrossing, msg.str());
      }
      // Re-evaluate the step at the root so stages match for the dense grid.
      st.k1 = k1_saved;
      st.step(y0, root);
      y = y0;
      emit_grid(t, root, t + root);
      Sequence y_root = st.y5;
      out.root_residual = std::abs(y_root[ell - 1]);
      y_root[ell - 1] = 0.0;
      check_tracked(y_root, t + root, c, mass0, out);
      clamp_negatives(y_root, out);
      field(y_root, dscratch);
      out.root_slope = dscratch[ell - 1];
      t += root;
      if (c.store_dense) out.samples.push_back(make_sample(t, ell, y_root, dscratch));
      out.state.x.assign(y_root.begin(), y_root.end() - 1);
      out.state.overflow_mass = y_root.back();
      out.state.ell = ell;
      out.state.t = t;
      out.state.segment_start = state.segment_start;
      out.duration = t - state.segment_start;
      return out;
    }

    // Negative excursions are inspected before clamping.
    check_tracked(st.y5, t + h, c, mass0, out);
    emit_grid(t, h, t + h);
    y = st.y5;
    st.k1 = st.k7;
    if (clamp_negatives(y, out) > 0) field(y, st.k1);
    t = last ? t_stop : t + h;
    if (c.store_dense) out.samples.push_back(make_sample(t, ell, y, st.k1));
    if (last) {
      out.reached_time_limit = true;
      out.state.x.assign(y.begin(), y.end() - 1);
      out.state.overflow_mass = y.back();
      out.state.ell = ell;
      out.state.t = t;
      out.state.segment_start = state.segment_start;
      out.duration = t - state.segment_start;
      return out;
    }
    h *= grow_factor(err);
  }
}

PiecewiseSolution integrate_piecewise(const Sequence& x0, const Kernel& k,
                                      const PiecewiseStop& stop, const OdeControls& c) {
  if (!stop.max_min_size && !stop.max_time)
    fail(ErrorKind::InvalidArgument, "piecewise solve needs a size or time limit");
  const Size cap = c.truncation;
  if (stop.max_min_size) {
    if (*stop.max_min_size == 0) fail(ErrorKind::InvalidArgument, "size limit must be >= 1");
    if (cap < 2 * *stop.max_min_size) {
      fail(ErrorKind::InvalidArgument, "truncation cap " + std::to_string(cap) +
                                           " is below twice the size limit");
    }
  }
  if (stop.max_time && !(*stop.max_time > 0.0))
    fail(ErrorKind::InvalidArgument, "time limit must be positive");
  if (x0.size() > cap) fail(ErrorKind::InvalidArgument, "initial support exceeds the cap");
  double mass = 0.0;
  for (std::size_t q = 0; q < x0.size(); ++q) {
    if (x0[q] < 0.0 || !std::isfinite(x0[q]))
      fail(ErrorKind::InvalidArgument, "initial data must be finite and nonnegative");
    mass += static_cast<double>(q + 1) * x0[q];
  }
  if (!(mass > 0.0)) fail(ErrorKind::ZeroMass, "initial data has no mass");
  if (x0.empty() || !(x0[0] > 0.0)) fail(ErrorKind::MissingSizeOne, "x_1(0) must be positive");

  PiecewiseSolution sol;
  sol.initial_first_moment = mass;
  DenseState state;
  state.x = x0;
  state.x.resize(cap, 0.0);
  const double t_stop = stop.max_time.value_or(std::numeric_limits<double>::infinity());
  const auto limit_reached = [&](Size ell) {
    return stop.max_min_size && ell > *stop.max_min_size;
  };
  const auto track_mass = [&](const DenseState& s) {
    sol.max_mass_error =
        std::max(sol.max_mass_error, std::abs(s.first_moment() + s.overflow_mass - mass) / mass);
  };

  while (!limit_reached(state.ell) && state.t < t_stop) {
    SegmentResult seg = integrate_segment(state, k, c, t_stop);
    sol.clamps += seg.clamps;
    sol.max_clamp = std::max(sol.max_clamp, seg.max_clamp);
    if (c.store_dense)
      std::move(seg.samples.begin(), seg.samples.end(), std::back_inserter(sol.dense));
    track_mass(seg.state);
    if (seg.reached_time_limit) {
      state = seg.state;
      break;
    }
    const double prev = sol.switch_times.empty() ? 0.0 : sol.switch_times.back();
    sol.switch_times.push_back(seg.state.t);
    sol.durations.push_back(seg.state.t - prev);
    sol.segment_states.push_back(seg.state);
    sol.root_slopes.push_back(seg.root_slope);
    state = seg.state;
    state.ell += 1;
    state.segment_start = state.t;
    while (state.ell <= cap && !limit_reached(state.ell) &&
           state.x[state.ell - 1] <= c.tol_event) {
      state.x[state.ell - 1] = 0.0;
      DenseState snap = state;
      sol.switch_times.push_back(state.t);
      sol.durations.push_back(0.0);
      sol.segment_states.push_back(snap);
      sol.root_slopes.push_back(0.0);
      sol.skipped.push_back(state.ell);
      state.ell += 1;
    }
    if (state.ell > cap) fail(ErrorKind::TruncationOverflow, "every tracked size vanished");
  }
  sol.final_state = state;
  sol.end_time = state.t;
  return sol;
}

TInfEstimate PiecewiseSolution::t_inf_estimate() const {
  TInfEstimate est;
  est.partial_sum = t_inf_partial();
  std::vector<double> s;
  for (double d : durations)
    if (d > 0.0) s.push_back(d);
  if (s.size() < 3) {
    est.note = "fewer than three segments";
    return est;
  }
  const double last = s[s.size() - 1];
  const double ratio = last / s[s.size() - 2];
  if (!(ratio < 1.0)) {
    est.note = "durations not decreasing; no extrapolation";
    return est;
  }
  est.extrapolated = est.partial_sum + last * ratio / (1.0 - ratio);
  est.note = "geometric tail extrapolation (heuristic)";
  return est;
}

Sequence PiecewiseSolution::evaluate(double t) const {
  if (dense.empty()) fail(ErrorKind::HorizonExceedsSolution, "no dense output stored");
  if (t < dense.front().t || t > dense.back().t) {
    std::ostringstream msg;
    msg << "t=" << t << " outside the dense output [" << dense.front().t << ", "
        << dense.back().t << "]";
    fail(ErrorKind::HorizonExceedsSolution, msg.str());
  }
  auto it = std::upper_bound(dense.begin(), dense.end(), t,
                             [](double v, const DenseSample& s) { return v < s.t; });
  const DenseSample& a = *(it - 1);
  if (a.t == t || it == dense.end()) return a.x;
  const DenseSample& b = *it;
  const double h = b.t - a.t;
  const double th = (t - a.t) / h;
  const double h00 = (2 * th - 3) * th * th + 1;
  const double h10 = ((th - 2) * th + 1) * th;
  const double h01 = (3 - 2 * th) * th * th;
  const double h11 = (th - 1) * th * th;
  Sequence x(a.x.size());
  for (std::size_t q = 0; q < x.size(); ++q) {
    x[q] = h00 * a.x[q] + h10 * h * a.dxdt[q] + h01 * b.x[q] + h11 * h * b.dxdt[q];
  }
  return x;
}

Size PiecewiseSolution::ell_at(double t) const {
  if (dense.empty() || t < dense.front().t || t > dense.back().t)
    fail(ErrorKind::HorizonExceedsSolution, "time outside the dense output");
  auto it = std::upper_bound(dense.begin(), dense.end(), t,
                             [](double v, const DenseSample& s) { return v < s.t; });
  return (it - 1)->ell;
}

double moment(const DenseState& state, const std::function<double(Size)>& g) {
  double m = 0.0;
  for (Size j = 1; j <= state.truncation(); ++j) {
    if (state.x[j - 1] != 0.0) m += g(j) * state.x[j - 1];
  }
  return m;
}

MomentCheck moment_derivative_check(const DenseState& state, const Kernel& k,
                                    const std::function<double(Size)>& g, double h,
                                    const OdeControls& c, double c_h2) {
  if (!(h > 0.0)) fail(ErrorKind::InvalidArgument, "step must be positive");
  const Size ell = state.ell;
  const Size cap = state.truncation();
  if (ell == 0 || ell > cap || !(state.x[ell - 1] > 0.0))
    fail(ErrorKind::TooCloseToSwitch, "x_ell has already vanished");
  if (state.t - h < state.segment_start)
    fail(ErrorKind::TooCloseToSwitch, "t - h falls before the segment start");

  const SegmentField field(ell, cap, k);
  const Sequence y = augmented(state);
  const Sequence fwd = advance_fixed(field, y, h, c);
  if (!(fwd[ell - 1] > c.tol_event))
    fail(ErrorKind::TooCloseToSwitch, "x_ell vanishes before t + h");
  const Sequence bwd = advance_fixed(field, y, -h, c);

  const auto sum_g = [&](const Sequence& v) {
    double m = 0.0;
    for (Size j = 1; j <= cap; ++j)
      if (v[j - 1] != 0.0) m += g(j) * v[j - 1];
    return m;
  };
  MomentCheck out;
  out.finite_difference = (sum_g(fwd) - sum_g(bwd)) / (2.0 * h);
  const double g_ell = g(ell);
  double abs_terms = 0.0;
  for (Size j = ell; j <= cap; ++j) {
    const double w = field.rates()[j - 1] * state.x[j - 1];
    if (w == 0.0) continue;
    const double g_sum = ell + j <= cap ? g(ell + j) : 0.0;
    const double term = (g_sum - g_ell - g(j)) * w;
    out.identity_rhs += term;
    abs_terms += std::abs(term);
  }
  // Cancellation in the difference quotient is not counted as error.
  double abs_moment = 0.0;
  for (Size j = 1; j <= cap; ++j) abs_moment += std::abs(g(j) * state.x[j - 1]);
  const double noise = 64.0 * std::numeric_limits<double>::epsilon() * abs_moment / h;
  double denom = std::max(std::abs(out.identity_rhs), abs_terms);
  if (denom == 0.0) denom = 1.0;
  out.error =
      std::max(0.0, std::abs(out.finite_difference - out.identity_rhs) - noise) / denom;
  out.tolerance = std::max(1e-6, c_h2 * h * h);
  out.passed = out.error <= out.tolerance;
  return out;
}

bool LyapunovReport::passed() const {
  return std::all_of(segments.begin(), segments.end(),
                     [](const LyapunovSegment& s) { return s.passed; });
}

LyapunovReport lyapunov_report(const PiecewiseSolution& solution, const Kernel& k,
                               double tol_slope) {
  if (!k.delta_i()) fail(ErrorKind::MissingDelta, "kernel " + k.name() + " declares no delta_i");
  LyapunovReport rep;
  rep.tol_slope = tol_slope;
  const auto ratio = [&](double t) {
    const Sequence x = solution.evaluate(t);
    double m_inv = 0.0, m0 = 0.0;
    for (std::size_t q = 0; q < x.size(); ++q) {
      m_inv += x[q] / static_cast<double>(q + 1);
      m0 += x[q];
    }
    return m_inv / m0;
  };

  std::size_t idx = 0;
  while (idx < solution.dense.size()) {
    const Size ell = solution.dense[idx].ell;
    std::size_t end = idx;
    while (end < solution.dense.size() && solution.dense[end].ell == ell) ++end;
    const double a = solution.dense[idx].t;
    const double b = solution.dense[end - 1].t;
    LyapunovSegment seg;
    seg.i = ell;
    seg.delta = (*k.delta_i())(ell);
    seg.bound = -seg.delta / (2.0 * static_cast<double>(ell));
    seg.max_slope = -std::numeric_limits<double>::infinity();
    if (b > a) {
      const double d = std::min(1e-4, (b - a) / 8.0);
      for (std::size_t p = idx; p < end; ++p) {
        const double t = solution.dense[p].t;
        double slope;
        if (t - d >= a && t + d <= b) {
          slope = (ratio(t + d) - ratio(t - d)) / (2.0 * d);
        } else if (t + 2 * d <= b) {
          slope = (-3.0 * ratio(t) + 4.0 * ratio(t + d) - ratio(t + 2 * d)) / (2.0 * d);
        } else {
          slope = (3.0 * ratio(t) - 4.0 * ratio(t - d) + ratio(t - 2 * d)) / (2.0 * d);
        }
        seg.max_slope = std::max(seg.max_slope, slope);
        ++seg.samples;
      }
    }
    seg.passed = seg.samples == 0 || seg.max_slope <= seg.bound + tol_slope;
    rep.segments.push_back(seg);
    idx = end;
  }
  return rep;
}

}  // namespace mindriven
