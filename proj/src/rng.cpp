// SPDX-License-Identifier: Apache-2.0
#include "mindriven/rng.hpp"

#include <cmath>

#include "mindriven/error.hpp"

namespace mindriven {

double RandomStream::exponential() { return -std::log(uniform_open_closed()); }

std::uint64_t RandomStream::uniform_int(std::uint64_t lo, std::uint64_t hi) {
  if (hi < lo) fail(ErrorKind::InvalidArgument, "uniform_int: empty range");
  const std::uint64_t span = hi - lo;
  if (span == std::numeric_limits<std::uint64_t>::max()) return (*this)();
  const std::uint64_t range = span + 1;
  // Lemire's multiply-shift with rejection.
  unsigned __int128 m = static_cast<unsigned __int128>((*this)()) * range;
  auto low = static_cast<std::uint64_t>(m);
  if (low < range) {
    const std::uint64_t threshold = (0 - range) % range;
    while (low < threshold) {
      m = static_cast<unsigned __int128>((*this)()) * range;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return lo + static_cast<std::uint64_t>(m >> 64);
}

}  // namespace mindriven
