// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <map>
#include <vector>

namespace mindriven {

using Size = std::uint64_t;
using Count = std::uint64_t;

/// Real-valued sequence indexed by particle size; absent keys are zero.
using SparseVector = std::map<Size, double>;

/// Dense real sequence: element k holds the value for size k + 1.
using Sequence = std::vector<double>;

}  // namespace mindriven
