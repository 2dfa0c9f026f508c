#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "mindriven/error.hpp"
#include "mindriven/hydro.hpp"
#include "mindriven/kernel.hpp"
#include "mindriven/ode.hpp"
#include "mindriven/rng.hpp"
#include "mindriven/ssa.hpp"
#include "mindriven/stats.hpp"

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

}  // namespace

TEST_CASE("discretization examples") {
  const auto mono = discretize_initial(Sequence{1.0}, 1000);
  CHECK(mono.state == ParticleState{{1, 1000}});
  CHECK(mono.l1_error == 0.0);

  // sizes 1 and 2 each carry 1/3 of the particles (mass 1/3 + 2/3)
  const Sequence third{1.0 / 3, 1.0 / 3};
  const auto exact = discretize_initial(third, 9);
  CHECK(exact.state == ParticleState{{1, 3}, {2, 3}});
  CHECK(exact.l1_error == doctest::Approx(0.0).epsilon(1e-12));

  const auto rounded = discretize_initial(third, 10);
  CHECK(rounded.state == ParticleState{{1, 4}, {2, 3}});
  CHECK(rounded.state.total_mass() == 10);
  CHECK(rounded.l1_error == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(rounded.l1_error <= rounded.error_bound);
}

TEST_CASE("discretization keeps the mass and meets its bound") {
  const Sequence geometric = [] {
    Sequence x(40);
    double mass = 0.0;
    for (std::size_t q = 0; q < x.size(); ++q) {
      x[q] = std::pow(0.5, static_cast<double>(q + 1));
      mass += static_cast<double>(q + 1) * x[q];
    }
    for (double& v : x) v /= mass;
    return x;
  }();
  for (Count N : {Count{10}, Count{97}, Count{1000}, Count{12345}, Count{1000000}}) {
    const auto d = discretize_initial(geometric, N);
    CHECK(d.state.total_mass() == N);
    CHECK(d.cutoff <= static_cast<Size>(std::ceil(std::sqrt(static_cast<double>(N)))));
    CHECK(d.l1_error <= d.error_bound + 1e-15);
  }
}

TEST_CASE("discretization preconditions") {
  CHECK(kind_of([] { discretize_initial(Sequence{0.0, 0.5}, 101); }) == ErrorKind::Infeasible);
  CHECK(kind_of([] { discretize_initial(Sequence{0.5}, 100); }) == ErrorKind::InvalidArgument);
}

TEST_CASE("distance is zero before the first event") {
  OdeControls c;
  c.truncation = 64;
  c.dense_dt = 0.01;
  const auto sol = integrate_piecewise(Sequence{1.0}, constant_kernel(1.0), PiecewiseStop{{}, 0.5}, c);
  RandomStream rng(3, 0, StreamRole::Simulation);
  Trajectory tr = simulate(ParticleState{{1, 1000}}, constant_kernel(1.0),
                           StopRule::until_time(0.5), rng);
  CHECK(trajectory_distance(tr, sol, 1000, 0.0) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(trajectory_distance(tr, sol, 1000, 0.5) > 0.0);
  CHECK(kind_of([&] { trajectory_distance(tr, sol, 1000, 0.7); }) ==
        ErrorKind::HorizonExceedsSolution);
}

TEST_CASE("small ensemble is close to the ODE") {
  ConvergenceOptions opt;
  opt.ode.truncation = 256;
  const auto run = convergence_experiment(Sequence{1.0}, constant_kernel(1.0), 0.5,
                                          {Count{10000}}, 20, 11, opt);
  REQUIRE(run.summary.size() == 1);
  CHECK(run.summary[0].median_error < 0.05);
  REQUIRE(run.switch_times.size() >= 1);
  CHECK(run.switch_times[0] == doctest::Approx(1.0).epsilon(1e-6));
  REQUIRE(!run.deviation_table.empty());
  CHECK(run.deviation_table[0].i == 1);
  CHECK(run.deviation_table[0].median < 0.1);

  const auto again = convergence_experiment(Sequence{1.0}, constant_kernel(1.0), 0.5,
                                            {Count{10000}}, 20, 11, opt);
  CHECK(again.sup_errors == run.sup_errors);
}
