// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <initializer_list>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "mindriven/types.hpp"

namespace mindriven {

/// Non-decreasing list of particle sizes, S_1 <= S_2 <= ... <= S_n.
struct SortedSizes {
  std::vector<Size> sizes;

  std::size_t size() const { return sizes.size(); }
  Size operator[](std::size_t m) const { return sizes[m]; }
};

/// Sparse particle configuration: number of particles of each size.
///
/// Zero counts are never stored. Total mass and particle count are cached
/// and kept exact; mass overflow raises ErrorKind::MassOverflow.
class ParticleState {
 public:
  ParticleState() = default;
  ParticleState(std::initializer_list<std::pair<const Size, Count>> entries);
  explicit ParticleState(const std::map<Size, Count>& entries);

  static ParticleState monodisperse(Size size, Count count);
  static ParticleState from_sorted(const SortedSizes& sorted);

  void add(Size size, Count count = 1);
  void remove(Size size, Count count = 1);

  /// Coalesce one particle of size `a` with one of size `b`.
  void merge(Size a, Size b);

  Count count(Size size) const;
  Size total_mass() const { return total_mass_; }
  Count total_count() const { return total_count_; }
  bool empty() const { return total_count_ == 0; }
  const std::map<Size, Count>& counts() const { return counts_; }

  /// Smallest size present; throws EmptyState when there are no particles.
  Size min_size() const;
  std::optional<Size> min_size_if_any() const;
  Size max_size() const;

  /// Recomputes the cached totals from the map; used by invariant checks.
  bool totals_consistent() const;

  bool operator==(const ParticleState& other) const {
    return counts_ == other.counts_;
  }

 private:
  std::map<Size, Count> counts_;
  Size total_mass_ = 0;
  Count total_count_ = 0;
};

Size min_size(const ParticleState& state);
SortedSizes sorted_sizes(const ParticleState& state);

/// S_m(y) <= S_m(x) for every m; index of the first violation otherwise.
std::optional<std::size_t> first_dominance_violation(const SortedSizes& y,
                                                     const SortedSizes& x);

}  // namespace mindriven
