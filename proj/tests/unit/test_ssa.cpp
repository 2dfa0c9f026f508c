#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>
#include <vector>

#include "mindriven/coupling.hpp"
#include "mindriven/error.hpp"
#include "mindriven/generator.hpp"
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

// Partner law implied by uniform choice among the other n - 1 particles.
std::map<Size, double> uniform_partner_law(const ParticleState& s) {
  const Size l = s.min_size();
  const double others = static_cast<double>(s.total_count() - 1);
  std::map<Size, double> law;
  for (const auto& [size, count] : s.counts()) {
    const double c = static_cast<double>(count) - (size == l ? 1.0 : 0.0);
    if (c > 0) law[size] = c / others;
  }
  return law;
}

std::map<Size, double> menu_partner_law(const ParticleState& s, const Kernel& k) {
  const JumpMenu menu = jump_menu(s, k);
  std::map<Size, double> law;
  for (const auto& ch : menu.channels) law[ch.partner] = ch.rate / menu.total_rate;
  return law;
}

ParticleState random_state(RandomStream& rng, Count max_particles) {
  for (;;) {
    ParticleState s;
    const Count n = rng.uniform_int(2, max_particles);
    for (Count q = 0; q < n; ++q) s.add(rng.uniform_int(1, 6));
    if (s.total_count() >= 2) return s;
  }
}

}  // namespace

TEST_CASE("jump menu examples") {
  const Kernel c = constant_kernel(3.0);
  auto m1 = jump_menu(ParticleState{{1, 2}}, c);
  REQUIRE(m1.channels.size() == 1);
  CHECK(m1.channels[0].partner == 1);
  CHECK(m1.channels[0].rate == 3.0);
  CHECK(m1.total_rate == 3.0);

  auto m2 = jump_menu(ParticleState{{1, 1}, {2, 1}}, c);
  REQUIRE(m2.channels.size() == 1);
  CHECK(m2.channels[0].partner == 2);
  CHECK(m2.total_rate == 3.0);

  auto m3 = jump_menu(ParticleState{{2, 3}, {5, 1}}, min_power_kernel(1.0));
  REQUIRE(m3.channels.size() == 2);
  CHECK(m3.channels[0].partner == 2);
  CHECK(m3.channels[0].rate == 4.0);
  CHECK(m3.channels[1].partner == 5);
  CHECK(m3.channels[1].rate == 2.0);
  CHECK(m3.total_rate == 6.0);

  CHECK(kind_of([&] { jump_menu(ParticleState{{4, 1}}, c); }) == ErrorKind::TerminalState);
}

TEST_CASE("uniform partner law equals the menu law for min-form kernels") {
  RandomStream rng(5, 0, StreamRole::Initial);
  const std::vector<Kernel> kernels = {constant_kernel(1.0), min_power_kernel(1.0),
                                       min_power_kernel(2.0), min_log_kernel(1.0)};
  for (int rep = 0; rep < 300; ++rep) {
    const ParticleState s = random_state(rng, 10);
    for (const Kernel& k : kernels) {
      const auto a = uniform_partner_law(s), b = menu_partner_law(s, k);
      REQUIRE(a.size() == b.size());
      for (const auto& [size, p] : a) REQUIRE(b.at(size) == doctest::Approx(p).epsilon(1e-14));
      REQUIRE(jump_menu(s, k).total_rate ==
              doctest::Approx(k(s.min_size(), s.min_size()) *
                              static_cast<double>(s.total_count() - 1)));
    }
  }
}

TEST_CASE("sampled partners follow the law in both sampling modes") {
  const ParticleState s{{2, 2}, {3, 3}, {7, 1}};
  const Kernel k = min_power_kernel(1.0);
  const auto law = uniform_partner_law(s);
  for (PartnerSampling mode : {PartnerSampling::Automatic, PartnerSampling::Menu}) {
    RandomStream rng(9, static_cast<std::uint64_t>(mode), StreamRole::Simulation);
    std::map<Size, int> hist;
    const int draws = 60000;
    for (int q = 0; q < draws; ++q) ++hist[step(s, k, rng, mode).partner];
    double chi2 = 0.0;
    for (const auto& [size, p] : law) {
      const double e = p * draws;
      chi2 += (hist[size] - e) * (hist[size] - e) / e;
    }
    CHECK(hist.size() == law.size());
    CHECK(chi2 < 13.8);  // 0.1% point, 2 dof
  }
}

TEST_CASE("single-step examples") {
  RandomStream rng(1, 0, StreamRole::Simulation);
  const int reps = 100000;
  std::vector<double> dts;
  for (int q = 0; q < reps; ++q) {
    auto r = step(ParticleState{{1, 2}}, constant_kernel(2.0), rng);
    REQUIRE(r.next == ParticleState{{2, 1}});
    dts.push_back(r.dt);
  }
  CHECK(std::abs(stats::mean(dts) - 0.5) < 3 * stats::standard_error(dts));

  int two = 0;
  for (int q = 0; q < reps; ++q)
    two += step(ParticleState{{1, 1}, {2, 1}, {3, 1}}, constant_kernel(1.0), rng).partner == 2;
  const double sigma = std::sqrt(0.25 / reps);
  CHECK(std::abs(two / double(reps) - 0.5) < 3 * sigma);

  dts.clear();
  const Kernel k = Kernel::min_form("phi", Phi::constant(2.0));
  for (int q = 0; q < reps; ++q) dts.push_back(step(ParticleState{{1, 3}}, k, rng).dt);
  CHECK(std::abs(stats::mean(dts) - 0.25) < 3 * stats::standard_error(dts));
}

TEST_CASE("trajectory invariants") {
  RandomStream rng(11, 0, StreamRole::Simulation);
  for (const char* name : {"const", "pow", "log"}) {
    const Kernel k = std::string(name) == "const" ? constant_kernel(1.0)
                     : std::string(name) == "pow" ? min_power_kernel(1.0)
                                                  : min_log_kernel(1.0);
    for (int rep = 0; rep < 50; ++rep) {
      const ParticleState x0 = random_state(rng, 40);
      const Trajectory tr = simulate(x0, k, StopRule::until_singleton(), rng);
      REQUIRE(tr.events.size() == x0.total_count() - 1);
      for (std::size_t m = 1; m < tr.events.size(); ++m) {
        REQUIRE(tr.events[m].t > tr.events[m - 1].t);
        REQUIRE(tr.events[m].min_size >= tr.events[m - 1].min_size);
      }
      REQUIRE(tr.replay() == tr.final_state);
      REQUIRE(tr.final_state.total_mass() == x0.total_mass());
      REQUIRE(tr.last_coalescence.has_value());
      REQUIRE(*tr.last_coalescence == tr.events.back().t);
    }
  }
}

TEST_CASE("last coalescence time means") {
  RandomStream rng(13, 0, StreamRole::Simulation);
  std::vector<double> two, three;
  for (int q = 0; q < 100000; ++q) {
    two.push_back(sample_last_coalescence_time(ParticleState{{1, 2}}, constant_kernel(1.0), rng));
    three.push_back(sample_last_coalescence_time(ParticleState{{1, 3}}, constant_kernel(1.0), rng));
  }
  CHECK(std::abs(stats::mean(two) - 1.0) < 3 * stats::standard_error(two));
  CHECK(std::abs(stats::mean(three) - 1.5) < 3 * stats::standard_error(three));
  const Trajectory tr = simulate(ParticleState{{1, 2}}, constant_kernel(1.0),
                                 StopRule::until_singleton(), rng);
  CHECK(tr.events.size() == 1);
}

TEST_CASE("representation replay reproduces the last coalescence time") {
  RandomStream rng(17, 0, StreamRole::Simulation);
  const Trajectory t2 = simulate(ParticleState{{1, 2}}, constant_kernel(1.0),
                                 StopRule::until_singleton(), rng);
  CHECK(replay_T_from_representation(t2, Phi::constant(1.0)) == t2.events[0].exponential);
  CHECK(*t2.last_coalescence == t2.events[0].exponential);

  const Phi lin = Phi::power(1.0);
  for (Count n : {Count{4}, Count{50}}) {
    const Trajectory tr = simulate(ParticleState::monodisperse(1, n),
                                   Kernel::min_form("lin", lin), StopRule::until_singleton(), rng);
    double manual = 0.0;
    for (std::size_t m = 1; m <= tr.events.size(); ++m) {
      manual += tr.events[m - 1].exponential /
                (static_cast<double>(n - m) * lin(static_cast<double>(tr.events[m - 1].min_size)));
    }
    CHECK(replay_T_from_representation(tr, lin) == doctest::Approx(*tr.last_coalescence).epsilon(1e-14));
    CHECK(manual == doctest::Approx(*tr.last_coalescence).epsilon(1e-13));
  }

  const Kernel generic = Kernel::generic("sum", [](Size i, Size j) { return double(i + j); });
  const Trajectory tg = simulate(ParticleState{{1, 3}}, generic, StopRule::until_singleton(), rng);
  CHECK(kind_of([&] { replay_T_from_representation(tg, lin); }) ==
        ErrorKind::RepresentationMismatch);
}

TEST_CASE("stop rules and exhaustion times") {
  RandomStream rng(19, 0, StreamRole::Simulation);
  const ParticleState x0 = ParticleState::monodisperse(1, 200);
  const Trajectory tt = simulate(x0, constant_kernel(1.0), StopRule::until_time(0.3), rng);
  CHECK(tt.end_time == 0.3);
  CHECK_FALSE(tt.events.empty());
  CHECK(tt.events.back().t <= 0.3);

  const Trajectory tm = simulate(x0, constant_kernel(1.0), StopRule::until_min_size_at_least(3), rng);
  CHECK(tm.final_state.min_size() >= 3);
  const auto t1 = tm.exhaustion_time(1), t2 = tm.exhaustion_time(2);
  REQUIRE(t1.has_value());
  REQUIRE(t2.has_value());
  CHECK(*t1 <= *t2);
  CHECK(tm.state_at(*t1).min_size() >= 2);
  CHECK(tm.state_at(std::nextafter(*t1, 0.0)).count(1) == 1);
  CHECK(tm.exhaustion_time(0).value() == 0.0);

  const Trajectory both =
      simulate(x0, constant_kernel(1.0), StopRule::until_time_and_min_size(0.2, 2), rng);
  CHECK(both.final_state.min_size() >= 2);
  CHECK(both.end_time >= 0.2);
}

TEST_CASE("drift examples") {
  const SparseVector xi{{1, 0.5}, {2, 0.5}};
  const SparseVector b = drift(xi, constant_kernel(1.0), 10);
  CHECK(b.at(1) == doctest::Approx(-1.3));
  CHECK(b.at(2) == doctest::Approx(-0.1));
  CHECK(b.at(3) == doctest::Approx(0.5));
  CHECK(first_moment(b) == doctest::Approx(0.0).epsilon(1e-15));

  // Large N approaches the deterministic field at e_1.
  const SparseVector big = drift({{1, 1.0}}, constant_kernel(1.0), 1000000000ULL);
  const Sequence field = vector_field_b(1, Sequence{1.0, 0.0}, constant_kernel(1.0));
  CHECK(big.at(1) == doctest::Approx(field[0]).epsilon(1e-8));
  CHECK(big.at(2) == doctest::Approx(field[1]).epsilon(1e-8));
}

TEST_CASE("drift is mass neutral on random states") {
  RandomStream rng(23, 0, StreamRole::Initial);
  const std::vector<Kernel> kernels = {constant_kernel(1.0), min_power_kernel(2.0),
                                       min_log_kernel(1.0), min_log_power_kernel(1.0, 1.0)};
  for (int rep = 0; rep < 200; ++rep) {
    const ParticleState s = random_state(rng, 30);
    const auto N = s.total_mass();
    const SparseVector xi = rescale(s, static_cast<double>(N));
    for (const Kernel& k : kernels) {
      const SparseVector b = drift(xi, k, N);
      double scale = 0.0;
      for (const auto& [j, v] : b) scale += std::abs(static_cast<double>(j) * v);
      REQUIRE(std::abs(first_moment(b)) <= 1e-13 * scale);
    }
  }
}

TEST_CASE("local variance examples") {
  const SparseVector a = local_variance({{1, 1.0}}, constant_kernel(1.0), 100);
  CHECK(a.at(1) == doctest::Approx(4.0 / 100 - 4.0 / 1e4));
  CHECK(a.at(2) == doctest::Approx((1.0 - 1.0 / 100) / 100));

  const SparseVector xi{{1, 0.3}, {2, 0.2}, {5, 0.06}};
  const Kernel k = min_power_kernel(1.0);
  const SparseVector a1 = local_variance(xi, k, 1000), a2 = local_variance(xi, k, 2000);
  double total = 0.0;
  for (const auto& [j, v] : a1) {
    CHECK(v >= 0.0);
    total += v;
    CHECK(a2.at(j) <= 0.5 * v + 1e-6);
  }
  CHECK(total >= 0.0);
}

TEST_CASE("generator consistency on a two-particle state") {
  const GeneratorReport rep =
      generator_consistency(ParticleState{{1, 2}}, constant_kernel(1.0), 1e-4, 200000, 3, 2);
  const GeneratorComponent* c2 = nullptr;
  for (const auto& c : rep.components)
    if (c.size == 2) c2 = &c;
  REQUIRE(c2 != nullptr);
  CHECK(c2->predicted == doctest::Approx(1e-4 * 1.0 * 1.0 / 2.0));
  CHECK(std::abs(c2->mean_increment - c2->predicted) < 4 * c2->stderr_mean);
  CHECK(kind_of([] {
          generator_consistency(ParticleState{{1, 100}}, constant_kernel(1.0), 0.01, 10, 1, 1);
        }) == ErrorKind::StepTooLarge);
}

TEST_CASE("coupling examples") {
  const Phi lin = Phi::power(1.0);
  RandomStream rng(29, 0, StreamRole::Coupling);
  for (int rep = 0; rep < 500; ++rep) {
    const CoupledRun run =
        coupled_simulate(ParticleState{{1, 2}, {3, 1}, {4, 1}}, ParticleState{{1, 4}}, lin, rng);
    REQUIRE(*run.x.last_coalescence <= *run.y.last_coalescence);
    REQUIRE(run.dominance_checks == run.x.events.size());
  }

  const CoupledRun same = coupled_simulate(ParticleState{{1, 3}, {2, 2}},
                                           ParticleState{{1, 3}, {2, 2}}, lin, rng);
  CHECK(*same.x.last_coalescence == *same.y.last_coalescence);
  CHECK(same.x.final_state == same.y.final_state);

  const CoupledRun one = coupled_simulate(ParticleState{{2, 1}, {1, 1}}, ParticleState{{1, 2}}, lin, rng);
  CHECK(*one.x.last_coalescence == *one.y.last_coalescence);

  CHECK(kind_of([&] {
          coupled_simulate(ParticleState{{1, 4}}, ParticleState{{1, 2}, {3, 1}, {4, 1}}, lin, rng);
        }) == ErrorKind::DominanceViolation);
  CHECK(kind_of([&] {
          coupled_simulate(ParticleState{{1, 3}}, ParticleState{{1, 2}}, lin, rng);
        }) == ErrorKind::InvalidArgument);
}

TEST_CASE("scaling coupling examples") {
  RandomStream rng(31, 0, StreamRole::Scaling);
  const auto p = scaling_coupling(5, 3, Phi::power(1.0), rng);
  CHECK(p.t_i_from_nei / p.t_1_from_ne1 == doctest::Approx(1.0 / 3).epsilon(1e-14));
  const auto q = scaling_coupling(7, 1, Phi::power(1.0), rng);
  CHECK(q.t_i_from_nei == q.t_1_from_ne1);
  for (Size i : {Size{2}, Size{5}}) {
    const auto r = scaling_coupling(2, i, Phi::power(2.0), rng);
    CHECK(r.t_i_from_nei / r.t_1_from_ne1 ==
          doctest::Approx(1.0 / static_cast<double>(i * i)).epsilon(1e-14));
  }
}
