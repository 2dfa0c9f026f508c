// SPDX-License-Identifier: Apache-2.0
#include "mindriven/ssa.hpp"

#include <cmath>
#include <string>

#include "mindriven/error.hpp"

namespace mindriven {

void CompensatedSum::add(double v) {
  const double t = sum_ + v;
  if (std::abs(sum_) >= std::abs(v)) {
    comp_ += (sum_ - t) + v;
  } else {
    comp_ += (v - t) + sum_;
  }
  sum_ = t;
}

JumpMenu jump_menu(const ParticleState& state, const Kernel& k) {
  if (state.total_count() < 2) {
    fail(ErrorKind::TerminalState, "no jump possible from a state with fewer than 2 particles");
  }
  JumpMenu menu;
  menu.min_size = state.min_size();
  const Size l = menu.min_size;
  for (const auto& [j, count] : state.counts()) {
    const Count available = (j == l) ? count - 1 : count;
    if (available == 0) continue;
    const double rate = k(l, j) * static_cast<double>(available);
    if (rate <= 0.0) continue;
    menu.channels.push_back({j, rate});
    menu.total_rate += rate;
  }
  return menu;
}

namespace {

struct Draw {
  double rate = 0.0;
  double exponential = 0.0;
  Size partner = 0;
  Size min_size = 0;
};

// Uniform choice among the n - 1 particles other than one minimal particle.
Size uniform_partner(const ParticleState& state, Size l, RandomStream& rng) {
  std::uint64_t r = rng.uniform_int(0, state.total_count() - 2);
  Size last = l;
  for (const auto& [j, count] : state.counts()) {
    const Count available = (j == l) ? count - 1 : count;
    if (r < available) return j;
    r -= available;
    if (available > 0) last = j;
  }
  return last;
}

Size menu_partner(const JumpMenu& menu, RandomStream& rng) {
  const double target = rng.uniform01() * menu.total_rate;
  double cumulative = 0.0;
  for (const auto& channel : menu.channels) {
    cumulative += channel.rate;
    if (target < cumulative) return channel.partner;
  }
  return menu.channels.back().partner;
}

// Draws the waiting-time variate first, then the partner. rate == 0 means the
// state is absorbing for this kernel.
Draw draw_jump(const ParticleState& state, const Kernel& k, RandomStream& rng,
               PartnerSampling mode) {
  if (state.total_count() < 2) {
    fail(ErrorKind::TerminalState, "no jump possible from a state with fewer than 2 particles");
  }
  Draw d;
  d.min_size = state.min_size();
  if (mode == PartnerSampling::Automatic && k.is_min_form()) {
    d.rate = static_cast<double>(state.total_count() - 1) * k(d.min_size, d.min_size);
    if (d.rate <= 0.0) return d;
    d.exponential = rng.exponential();
    d.partner = uniform_partner(state, d.min_size, rng);
    return d;
  }
  const JumpMenu menu = jump_menu(state, k);
  d.rate = menu.total_rate;
  if (d.rate <= 0.0) return d;
  d.exponential = rng.exponential();
  d.partner = menu_partner(menu, rng);
  return d;
}

}  // namespace

StepResult step(const ParticleState& state, const Kernel& k, RandomStream& rng,
                PartnerSampling mode) {
  const Draw d = draw_jump(state, k, rng, mode);
  StepResult out;
  out.min_size = d.min_size;
  out.next = state;
  if (d.rate <= 0.0) {
    out.dt = std::numeric_limits<double>::infinity();
    return out;
  }
  out.exponential = d.exponential;
  out.dt = d.exponential / d.rate;
  out.partner = d.partner;
  out.next.merge(d.min_size, d.partner);
  return out;
}

Trajectory simulate(const ParticleState& x0, const Kernel& k, const StopRule& stop,
                    RandomStream& rng, PartnerSampling mode) {
  if (x0.empty()) fail(ErrorKind::EmptyState, "cannot simulate an empty state");
  Trajectory tr;
  tr.initial = x0;
  tr.kernel = k.name();
  tr.min_form = k.is_min_form();

  ParticleState state = x0;
  CompensatedSum clock;
  Size current_min = state.min_size();
  auto min_target_met = [&] {
    return !stop.min_size_at_least || current_min >= *stop.min_size_at_least;
  };

  bool stopped_early = false;
  while (state.total_count() >= 2) {
    if (!stop.time && stop.min_size_at_least && min_target_met()) {
      tr.end_time = clock.value();
      stopped_early = true;
      break;
    }
    const Draw d = draw_jump(state, k, rng, mode);
    if (d.rate <= 0.0) {
      // Absorbing under this kernel: nothing ever happens again.
      tr.end_time = std::numeric_limits<double>::infinity();
      stopped_early = true;
      break;
    }
    const double dt = d.exponential / d.rate;
    CompensatedSum tentative = clock;
    tentative.add(dt);
    if (stop.time && tentative.value() > *stop.time && min_target_met()) {
      tr.end_time = std::max(*stop.time, clock.value());
      stopped_early = true;
      break;
    }
    clock = tentative;
    state.merge(d.min_size, d.partner);
    tr.events.push_back({clock.value(), d.partner, d.min_size, d.exponential});
    const Size new_min = state.min_size();
    if (new_min > current_min) {
      tr.min_size_jumps.emplace_back(new_min, clock.value());
      current_min = new_min;
    }
  }

  if (!stopped_early) {
    tr.last_coalescence = tr.events.empty() ? 0.0 : tr.events.back().t;
    tr.end_time = std::numeric_limits<double>::infinity();
    tr.stop_unreachable = !min_target_met();
  }
  tr.final_state = std::move(state);
  return tr;
}

double sample_last_coalescence_time(const ParticleState& x0, const Kernel& k,
                                    RandomStream& rng) {
  if (x0.empty()) fail(ErrorKind::EmptyState, "cannot simulate an empty state");
  ParticleState state = x0;
  CompensatedSum clock;
  while (state.total_count() >= 2) {
    const Draw d = draw_jump(state, k, rng, PartnerSampling::Automatic);
    if (d.rate <= 0.0) return std::numeric_limits<double>::infinity();
    clock.add(d.exponential / d.rate);
    state.merge(d.min_size, d.partner);
  }
  return clock.value();
}

double replay_T_from_representation(const Trajectory& traj, const Phi& phi) {
  if (!traj.min_form) {
    fail(ErrorKind::RepresentationMismatch,
         "time representation needs a min-form kernel, trajectory used " + traj.kernel);
  }
  if (!traj.has_exponentials) {
    fail(ErrorKind::RepresentationMismatch, "trajectory carries no exponential variates");
  }
  const Count n = traj.initial.total_count();
  if (!traj.last_coalescence || traj.events.size() + 1 != n) {
    fail(ErrorKind::RepresentationMismatch, "trajectory did not run to a singleton");
  }
  CompensatedSum total;
  for (std::size_t idx = 0; idx < traj.events.size(); ++idx) {
    const Event& e = traj.events[idx];
    const double remaining = static_cast<double>(n - (idx + 1));  // n - m
    total.add(e.exponential / (remaining * phi(static_cast<double>(e.min_size))));
  }
  return total.value();
}

std::optional<double> Trajectory::exhaustion_time(Size i) const {
  if (i < initial.min_size()) return 0.0;
  for (const auto& [new_min, t] : min_size_jumps) {
    if (new_min > i) return t;
  }
  return std::nullopt;
}

std::vector<std::pair<Size, double>> Trajectory::exhaustion_times(Size up_to) const {
  std::vector<std::pair<Size, double>> out;
  for (Size i = 1; i <= up_to; ++i) {
    auto t = exhaustion_time(i);
    if (!t) break;
    out.emplace_back(i, *t);
  }
  return out;
}

std::vector<Size> Trajectory::min_size_sequence() const {
  std::vector<Size> out;
  out.reserve(events.size());
  for (const Event& e : events) out.push_back(e.min_size);
  return out;
}

void TrajectoryCursor::advance() {
  const Event& e = traj_->events[next_];
  state_.merge(e.min_size, e.partner);
  ++next_;
}

ParticleState Trajectory::state_at(double t) const {
  TrajectoryCursor cursor(*this);
  while (!cursor.done() && cursor.next_event().t <= t) cursor.advance();
  return cursor.state();
}

ParticleState Trajectory::replay() const {
  TrajectoryCursor cursor(*this);
  while (!cursor.done()) cursor.advance();
  return cursor.state();
}

}  // namespace mindriven
