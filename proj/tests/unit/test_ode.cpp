#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <functional>
#include <vector>

#include "mindriven/error.hpp"
#include "mindriven/kernel.hpp"
#include "mindriven/ode.hpp"

using namespace mindriven;

namespace {

template <class F>
ErrorKind kind_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::InvalidArgument;
}

double weighted_sum(const Sequence& x, const std::function<double(double)>& w) {
  double s = 0.0;
  for (std::size_t q = 0; q < x.size(); ++q) s += w(static_cast<double>(q + 1)) * x[q];
  return s;
}

// Reference solver: classical RK4 with a fixed step on the truncated
// min-driven system, written out from the rate rules directly.
struct Rk4Oracle {
  std::function<double(double, double)> rate;
  std::size_t cap;
  std::size_t ell = 1;

  Sequence field(const Sequence& x) const {
    Sequence d(cap, 0.0);
    const double l = static_cast<double>(ell);
    for (std::size_t j = ell; j <= cap; ++j) {
      const double flow = rate(l, static_cast<double>(j)) * x[j - 1];
      d[ell - 1] -= flow;  // the minimal particle disappears in every merge
      d[j - 1] -= flow;    // and so does its partner
      if (j + ell <= cap) d[j + ell - 1] += flow;
    }
    return d;
  }

  Sequence advance(Sequence x, double dt) const {
    const auto add = [](const Sequence& a, const Sequence& b, double s) {
      Sequence r(a);
      for (std::size_t q = 0; q < r.size(); ++q) r[q] += s * b[q];
      return r;
    };
    const Sequence k1 = field(x), k2 = field(add(x, k1, dt / 2)), k3 = field(add(x, k2, dt / 2)),
                   k4 = field(add(x, k3, dt));
    for (std::size_t q = 0; q < x.size(); ++q)
      x[q] += dt / 6 * (k1[q] + 2 * k2[q] + 2 * k3[q] + k4[q]);
    return x;
  }
};

}  // namespace

TEST_CASE("vector field examples") {
  const Kernel one = constant_kernel(1.0);
  const Sequence b1 = vector_field_b(1, Sequence{1, 0, 0, 0}, one);
  CHECK(b1 == Sequence{-2, 1, 0, 0});
  const Sequence b2 = vector_field_b(2, Sequence{0, 1, 0, 0, 0}, one);
  CHECK(b2 == Sequence{0, -2, 0, 1, 0});
  CHECK(kind_of([&] { vector_field_b(2, Sequence{0.1, 1, 0, 0}, one); }) ==
        ErrorKind::PrefixViolation);

  const Kernel lin = min_power_kernel(1.0);
  const Sequence x{0, 0.2, 0.1, 0.05, 0.3, 0.01, 0.02, 0.0};
  double overflow = 0.0;
  const Sequence b = vector_field_b(2, x, lin, &overflow);
  CHECK(std::abs(weighted_sum(b, [](double j) { return j; }) + overflow) < 1e-14);
  CHECK(overflow > 0.0);
}

TEST_CASE("auxiliary field examples") {
  const Sequence a1(6, 1.0);
  CHECK(vector_field_F(2, a1, Sequence{0, 1, 0, 0, 0, 0}) == Sequence{0, -2, 0, 1, 0, 0});
  Sequence aj(6);
  for (std::size_t q = 0; q < 6; ++q) aj[q] = static_cast<double>(q + 1);
  CHECK(vector_field_F(3, aj, Sequence{0, 0, 1, 0, 0, 0}) == Sequence{0, 0, -6, 0, 0, 3});

  const Kernel k = min_log_power_kernel(1.0, 1.0);
  const Sequence y{0, 0, 0.3, 0.1, 0.2, 0.05, 0.04, 0.01, 0.02};
  Sequence rates(y.size());
  for (Size j = 1; j <= y.size(); ++j) rates[j - 1] = k(3, j);
  const Sequence f = vector_field_F(3, rates, y), b = vector_field_b(3, y, k);
  for (std::size_t q = 0; q < y.size(); ++q) CHECK(f[q] == doctest::Approx(b[q]).epsilon(1e-14));
}

TEST_CASE("constant kernel first segment matches the closed form") {
  OdeControls c;
  c.truncation = 64;
  c.dense_dt = 1e-3;
  const PiecewiseSolution sol =
      integrate_piecewise(Sequence{1.0}, constant_kernel(1.0), PiecewiseStop{Size{1}, {}}, c);
  REQUIRE(sol.switch_times.size() == 1);
  CHECK(std::abs(sol.switch_times[0] - 1.0) < 1e-6);
  double worst_x1 = 0.0, worst_m0 = 0.0;
  for (const DenseSample& s : sol.dense) {
    worst_x1 = std::max(worst_x1, std::abs(s.x[0] - (1 - s.t) * std::exp(-s.t)));
    worst_m0 = std::max(worst_m0, std::abs(weighted_sum(s.x, [](double) { return 1.0; }) -
                                           std::exp(-s.t)));
  }
  CHECK(worst_x1 < 1e-8);
  CHECK(worst_m0 < 1e-8);
  CHECK(sol.root_slopes[0] == doctest::Approx(-std::exp(-1.0)).epsilon(1e-6));
  CHECK(sol.max_mass_error < 1e-12);
}

TEST_CASE("first switch of min-form kernels is 1/phi(1)") {
  OdeControls c;
  c.truncation = 64;
  for (const auto& phi : {Phi::constant(2.0), Phi::power(1.0), Phi::log_power(3.0, 2.0)}) {
    const Kernel k = Kernel::min_form("phi", phi);
    const auto sol = integrate_piecewise(Sequence{1.0}, k, PiecewiseStop{Size{1}, {}}, c);
    CHECK(sol.switch_times[0] == doctest::Approx(1.0 / phi(1.0)).epsilon(1e-7));
  }
}

TEST_CASE("piecewise solve agrees with an independent RK4 oracle") {
  const Kernel lin = min_power_kernel(1.0);
  OdeControls c;
  c.truncation = 48;
  c.dense_dt = 0.05;
  const auto sol = integrate_piecewise(Sequence{0.6, 0.2}, lin, PiecewiseStop{Size{3}, {}}, c);
  REQUIRE(sol.switch_times.size() == 3);

  Rk4Oracle oracle{[](double i, double j) { return std::min(i, j); }, 48};
  Sequence x{0.6, 0.2};
  x.resize(48, 0.0);
  const double dt = 2e-4;
  double t = 0.0;
  std::vector<double> switches;
  double worst = 0.0;
  while (switches.size() < 3) {
    Sequence next = oracle.advance(x, dt);
    if (next[oracle.ell - 1] <= 0.0) {
      // Refine the crossing inside the step by bisection on the RK4 map.
      double lo = 0.0, hi = dt;
      for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (lo + hi);
        (oracle.advance(x, mid)[oracle.ell - 1] > 0.0 ? lo : hi) = mid;
      }
      next = oracle.advance(x, lo);
      next[oracle.ell - 1] = 0.0;
      t += lo;
      switches.push_back(t);
      oracle.ell += 1;
    } else {
      t += dt;
    }
    x = next;
    if (std::abs(t / 0.25 - std::round(t / 0.25)) < 1e-9 && switches.size() < 3) {
      const Sequence y = sol.evaluate(t);
      for (std::size_t q = 0; q < x.size(); ++q) worst = std::max(worst, std::abs(x[q] - y[q]));
    }
  }
  for (std::size_t q = 0; q < 3; ++q) CHECK(sol.switch_times[q] == doctest::Approx(switches[q]).epsilon(1e-7));
  CHECK(worst < 1e-7);
  CHECK(sol.switch_times[0] < sol.switch_times[1]);
}

TEST_CASE("positivity after each switch") {
  OdeControls c;
  c.truncation = 64;
  const auto sol = integrate_piecewise(Sequence{1.0}, min_power_kernel(1.0),
                                       PiecewiseStop{Size{3}, {}}, c);
  REQUIRE(sol.switch_times.size() == 3);
  CHECK(sol.switch_times[0] == doctest::Approx(1.0).epsilon(1e-8));
  for (std::size_t q = 0; q < 3; ++q) {
    const DenseState& s = sol.segment_states[q];
    const Size i = q + 1;
    CHECK(s.at(i) == 0.0);
    for (Size j = 1; j < i; ++j) CHECK(s.at(j) == 0.0);
    CHECK(s.at(i + 1) > 0.0);
    for (Size j = i + 1; j <= 2 * (i + 1); ++j) CHECK(s.at(j) >= -c.tol_event);
    CHECK(sol.root_slopes[q] < 0.0);
  }
}

TEST_CASE("empty size two is refilled before its segment") {
  OdeControls c;
  c.truncation = 32;
  const auto sol = integrate_piecewise(Sequence{0.5, 0.0, 0.5 / 3}, constant_kernel(1.0),
                                       PiecewiseStop{Size{2}, {}}, c);
  REQUIRE(sol.switch_times.size() == 2);
  CHECK(sol.durations[0] > 0.0);
  CHECK(sol.durations[1] > 0.0);
  CHECK(sol.skipped.empty());
}

TEST_CASE("moments along the solution") {
  OdeControls c;
  c.truncation = 64;
  c.dense_dt = 0.01;
  const auto sol = integrate_piecewise(Sequence{1.0}, constant_kernel(1.0),
                                       PiecewiseStop{Size{4}, {}}, c);
  DenseState start;
  start.x = Sequence(64, 0.0);
  start.x[0] = 1.0;
  CHECK(moment(start, [](Size j) { return 1.0 / static_cast<double>(j); }) == 1.0);
  for (const DenseState& s : sol.segment_states) {
    CHECK(moment(s, [](Size j) { return static_cast<double>(j); }) + s.overflow_mass ==
          doctest::Approx(1.0).epsilon(1e-8));
    CHECK(moment(s, [](Size) { return 1.0; }) == doctest::Approx(std::exp(-s.t)).epsilon(1e-8));
  }
}

TEST_CASE("moment identity against finite differences") {
  OdeControls c;
  c.truncation = 64;
  const auto sol = integrate_piecewise(Sequence{1.0}, constant_kernel(1.0),
                                       PiecewiseStop{{}, 0.3}, c);
  DenseState s = sol.final_state;
  REQUIRE(s.t == 0.3);

  const auto mass = moment_derivative_check(s, constant_kernel(1.0),
                                            [](Size j) { return static_cast<double>(j); }, 1e-3, c);
  CHECK(std::abs(mass.identity_rhs) < 1e-15);
  CHECK(std::abs(mass.finite_difference) < 1e-9);
  INFO("fd " << mass.finite_difference << " err " << mass.error << " tol " << mass.tolerance);
  CHECK(mass.passed);

  const auto count = moment_derivative_check(s, constant_kernel(1.0), [](Size) { return 1.0; }, 1e-3, c);
  CHECK(count.identity_rhs == doctest::Approx(-std::exp(-0.3)).epsilon(1e-8));
  CHECK(count.passed);

  const auto inv = moment_derivative_check(
      s, constant_kernel(1.0), [](Size j) { return 1.0 / static_cast<double>(j); }, 1e-3, c);
  CHECK(inv.passed);

  const auto lin = moment_derivative_check(
      s, min_power_kernel(1.0), [](Size j) { return std::sqrt(static_cast<double>(j)); }, 1e-3, c);
  CHECK(lin.passed);

  CHECK(kind_of([&] {
          moment_derivative_check(s, constant_kernel(1.0), [](Size) { return 1.0; }, 0.5, c);
        }) == ErrorKind::TooCloseToSwitch);
  // t + h runs past the first switch at t = 1
  const auto near = integrate_piecewise(Sequence{1.0}, constant_kernel(1.0),
                                        PiecewiseStop{{}, 0.9}, c);
  CHECK(kind_of([&] {
          moment_derivative_check(near.final_state, constant_kernel(1.0), [](Size) { return 1.0; },
                                  0.2, c);
        }) == ErrorKind::TooCloseToSwitch);
}

TEST_CASE("Lyapunov slope bound") {
  OdeControls c;
  c.truncation = 64;
  c.dense_dt = 0.01;
  const auto sol = integrate_piecewise(Sequence{1.0}, constant_kernel(1.0),
                                       PiecewiseStop{Size{3}, {}}, c);
  const auto rep = lyapunov_report(sol, constant_kernel(1.0));
  REQUIRE(rep.segments.size() >= 3);
  CHECK(rep.segments[0].bound == -0.5);
  CHECK(rep.segments[0].max_slope <= -0.5 + 1e-3);
  CHECK(rep.passed());

  const auto lin_sol = integrate_piecewise(Sequence{1.0}, min_power_kernel(1.0),
                                           PiecewiseStop{Size{3}, {}}, c);
  const auto lin_rep = lyapunov_report(lin_sol, min_power_kernel(1.0));
  for (const auto& seg : lin_rep.segments) CHECK(seg.bound == -0.5);
  CHECK(lin_rep.passed());

  const Kernel bare = Kernel::generic("bare", [](Size, Size) { return 1.0; });
  CHECK(kind_of([&] { lyapunov_report(sol, bare); }) == ErrorKind::MissingDelta);
}

TEST_CASE("solver errors") {
  OdeControls small;
  small.truncation = 8;
  CHECK(kind_of([&] {
          integrate_piecewise(Sequence{1.0}, constant_kernel(1.0), PiecewiseStop{Size{4}, {}}, small);
        }) == ErrorKind::TruncationOverflow);
  CHECK(kind_of([&] {
          integrate_piecewise(Sequence{1.0}, constant_kernel(1.0), PiecewiseStop{Size{5}, {}}, small);
        }) == ErrorKind::InvalidArgument);
  CHECK(kind_of([&] {
          integrate_piecewise(Sequence{0.0, 0.5}, constant_kernel(1.0), PiecewiseStop{Size{1}, {}}, small);
        }) == ErrorKind::MissingSizeOne);

  OdeControls budget;
  budget.truncation = 16;
  budget.segment_time_budget = 0.5;
  CHECK(kind_of([&] {
          integrate_piecewise(Sequence{1.0}, constant_kernel(1.0), PiecewiseStop{Size{1}, {}}, budget);
        }) == ErrorKind::NoCrossing);

  OdeControls ok;
  ok.truncation = 16;
  ok.dense_dt = 0.1;
  const auto sol = integrate_piecewise(Sequence{1.0}, constant_kernel(1.0), PiecewiseStop{{}, 0.5}, ok);
  CHECK(kind_of([&] { sol.evaluate(0.6); }) == ErrorKind::HorizonExceedsSolution);
}

TEST_CASE("time-limited solve and extrapolation label") {
  OdeControls c;
  c.truncation = 256;
  c.store_dense = false;
  const auto sol = integrate_piecewise(Sequence{1.0}, min_power_kernel(2.0),
                                       PiecewiseStop{Size{12}, {}}, c);
  const TInfEstimate est = sol.t_inf_estimate();
  CHECK(est.partial_sum == sol.switch_times.back());
  REQUIRE(est.extrapolated.has_value());
  CHECK(*est.extrapolated > est.partial_sum);
  CHECK(est.note.find("heuristic") != std::string::npos);
}
