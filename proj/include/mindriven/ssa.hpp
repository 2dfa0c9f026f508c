// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mindriven/kernel.hpp"
#include "mindriven/particle_state.hpp"
#include "mindriven/rng.hpp"
#include "mindriven/types.hpp"

namespace mindriven {

struct JumpChannel {
  Size partner = 0;
  double rate = 0.0;
};

/// Outgoing transitions of a state: the minimal particle merges with a
/// partner of size j >= l at rate K(l, j) X_j, or K(l, l) (X_l - 1) when
/// j = l. Zero-rate channels are omitted.
struct JumpMenu {
  Size min_size = 0;
  std::vector<JumpChannel> channels;
  double total_rate = 0.0;
};

JumpMenu jump_menu(const ParticleState& state, const Kernel& k);

/// Min-form kernels may draw the partner uniformly among the other n - 1
/// particles; Menu forces the generic channel scan for every kernel.
enum class PartnerSampling { Automatic, Menu };

struct StepResult {
  double dt = 0.0;
  double exponential = 0.0;  // unit-mean variate with dt = exponential / rate
  Size partner = 0;
  Size min_size = 0;
  ParticleState next;
};

StepResult step(const ParticleState& state, const Kernel& k, RandomStream& rng,
                PartnerSampling mode = PartnerSampling::Automatic);

/// Stops once every configured condition holds, or at a singleton.
struct StopRule {
  std::optional<double> time;
  std::optional<Size> min_size_at_least;

  static StopRule until_singleton() { return {}; }
  static StopRule until_time(double t) { return {t, std::nullopt}; }
  static StopRule until_min_size_at_least(Size i) { return {std::nullopt, i}; }
  static StopRule until_time_and_min_size(double t, Size i) { return {t, i}; }
};

struct Event {
  double t = 0.0;
  Size partner = 0;
  Size min_size = 0;  // minimal size before the event
  double exponential = 0.0;
};

/// A simulated path stored as its initial state plus the merge events.
struct Trajectory {
  ParticleState initial;
  std::vector<Event> events;
  ParticleState final_state;
  std::string kernel;
  bool min_form = false;
  bool has_exponentials = true;
  /// The path is determined on [0, end_time]; infinite after a singleton.
  double end_time = std::numeric_limits<double>::infinity();
  /// Time of the last coalescence when the run reached a singleton.
  std::optional<double> last_coalescence;
  /// Set when a min-size target could not be reached before the singleton.
  bool stop_unreachable = false;
  /// (new minimal size, time) each time the minimal size increases.
  std::vector<std::pair<Size, double>> min_size_jumps;

  /// T_i: first time every particle of size <= i is gone; nullopt if never.
  std::optional<double> exhaustion_time(Size i) const;
  std::vector<std::pair<Size, double>> exhaustion_times(Size up_to) const;
  /// L(m), the minimal size before event m (m = 1..events.size()).
  std::vector<Size> min_size_sequence() const;
  ParticleState state_at(double t) const;
  ParticleState replay() const;
};

Trajectory simulate(const ParticleState& x0, const Kernel& k, const StopRule& stop,
                    RandomStream& rng,
                    PartnerSampling mode = PartnerSampling::Automatic);

/// Last-coalescence time of one run without recording the path.
double sample_last_coalescence_time(const ParticleState& x0, const Kernel& k,
                                    RandomStream& rng);

/// Recomputes T from the stored variates as
/// sum_m eps_m / ((n - m) phi(L(m))).
double replay_T_from_representation(const Trajectory& traj, const Phi& phi);

/// Applies events to a state one at a time.
class TrajectoryCursor {
 public:
  explicit TrajectoryCursor(const Trajectory& traj)
      : traj_(&traj), state_(traj.initial) {}

  bool done() const { return next_ == traj_->events.size(); }
  const Event& next_event() const { return traj_->events[next_]; }
  void advance();
  const ParticleState& state() const { return state_; }
  std::size_t applied() const { return next_; }

 private:
  const Trajectory* traj_;
  ParticleState state_;
  std::size_t next_ = 0;
};

/// Neumaier-compensated running sum.
class CompensatedSum {
 public:
  void add(double v);
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

}  // namespace mindriven
