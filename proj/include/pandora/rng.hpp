#pragma once

#include <cstdint>

#include "pandora/normal.hpp"

namespace pandora {

namespace detail {
// SplitMix64 finalizer; also used to hash (seed, stream) pairs.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}
}  // namespace detail

// Counter-based splittable generator.  The whole sequence is a pure function
// of (seed, streamId), so any stream can be replayed independently of draw
// order elsewhere, and substreams can be derived without coordination.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed, std::uint64_t streamId = 0) noexcept
      : seed_(seed), stream_(streamId) {
    state_ = detail::mix64(seed + 0x9e3779b97f4a7c15ULL) ^
             detail::mix64(streamId + 0xd1b54a32d192ed03ULL);
  }

  std::uint64_t next_u64() noexcept {
    state_ += 0x9e3779b97f4a7c15ULL;
    return detail::mix64(state_);
  }

  // uniform on [0,1)
  double next_double() noexcept { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // uniform on (0,1) — safe to feed through log or the normal quantile
  double next_open() noexcept {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  double next_gaussian() noexcept { return normal_quantile(next_open()); }

  // Derived independent stream; deterministic in (seed, streamId, k).
  RngStream substream(std::uint64_t k) const noexcept {
    return RngStream(seed_, detail::mix64(stream_ ^ detail::mix64(k + 0xa0761d6478bd642fULL)));
  }

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream_id() const noexcept { return stream_; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t state_;
};

}  // namespace pandora
