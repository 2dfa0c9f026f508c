// SPDX-License-Identifier: Apache-2.0
#include "mindriven/particle_state.hpp"

#include <limits>
#include <string>

#include "mindriven/error.hpp"

namespace mindriven {

namespace {

Size checked_mass(Size size, Count count) {
  Size mass = 0;
  if (__builtin_mul_overflow(size, count, &mass)) {
    fail(ErrorKind::MassOverflow, "particle mass overflows 64 bits");
  }
  return mass;
}

}  // namespace

ParticleState::ParticleState(
    std::initializer_list<std::pair<const Size, Count>> entries) {
  for (const auto& [size, count] : entries) add(size, count);
}

ParticleState::ParticleState(const std::map<Size, Count>& entries) {
  for (const auto& [size, count] : entries) add(size, count);
}

ParticleState ParticleState::monodisperse(Size size, Count count) {
  ParticleState state;
  state.add(size, count);
  return state;
}

ParticleState ParticleState::from_sorted(const SortedSizes& sorted) {
  ParticleState state;
  for (Size s : sorted.sizes) state.add(s, 1);
  return state;
}

void ParticleState::add(Size size, Count count) {
  if (size == 0) fail(ErrorKind::InvalidArgument, "particle size must be >= 1");
  if (count == 0) return;
  const Size mass = checked_mass(size, count);
  Size new_mass = 0;
  if (__builtin_add_overflow(total_mass_, mass, &new_mass)) {
    fail(ErrorKind::MassOverflow, "total mass overflows 64 bits");
  }
  counts_[size] += count;
  total_mass_ = new_mass;
  total_count_ += count;
}

void ParticleState::remove(Size size, Count count) {
  if (count == 0) return;
  auto it = counts_.find(size);
  if (it == counts_.end() || it->second < count) {
    fail(ErrorKind::InvalidArgument,
         "cannot remove " + std::to_string(count) + " particle(s) of size " +
             std::to_string(size));
  }
  it->second -= count;
  if (it->second == 0) counts_.erase(it);
  total_mass_ -= size * count;
  total_count_ -= count;
}

void ParticleState::merge(Size a, Size b) {
  if (a == b) {
    remove(a, 2);
  } else {
    remove(a, 1);
    remove(b, 1);
  }
  add(a + b, 1);
}

Count ParticleState::count(Size size) const {
  auto it = counts_.find(size);
  return it == counts_.end() ? 0 : it->second;
}

Size ParticleState::min_size() const {
  if (counts_.empty()) fail(ErrorKind::EmptyState, "state has no particles");
  return counts_.begin()->first;
}

std::optional<Size> ParticleState::min_size_if_any() const {
  if (counts_.empty()) return std::nullopt;
  return counts_.begin()->first;
}

Size ParticleState::max_size() const {
  if (counts_.empty()) fail(ErrorKind::EmptyState, "state has no particles");
  return counts_.rbegin()->first;
}

bool ParticleState::totals_consistent() const {
  Size mass = 0;
  Count n = 0;
  for (const auto& [size, count] : counts_) {
    if (count == 0) return false;
    mass += size * count;
    n += count;
  }
  return mass == total_mass_ && n == total_count_;
}

Size min_size(const ParticleState& state) { return state.min_size(); }

SortedSizes sorted_sizes(const ParticleState& state) {
  if (state.empty()) fail(ErrorKind::EmptyState, "state has no particles");
  SortedSizes out;
  out.sizes.reserve(state.total_count());
  for (const auto& [size, count] : state.counts()) {
    out.sizes.insert(out.sizes.end(), count, size);
  }
  return out;
}

std::optional<std::size_t> first_dominance_violation(const SortedSizes& y,
                                                     const SortedSizes& x) {
  if (y.size() != x.size()) {
    fail(ErrorKind::InvalidArgument, "sorted size vectors differ in length");
  }
  for (std::size_t m = 0; m < y.size(); ++m) {
    if (y[m] > x[m]) return m;
  }
  return std::nullopt;
}

}  // namespace mindriven
