#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace ksdagg {

/// A reproducible random stream identified by (seed, stream id).
///
/// Streams never share generator state: every consumer derives its own child
/// stream from a parent and a list of indices, so the draws a computation sees
/// do not depend on how work is scheduled across threads.
class RngStream {
 public:
  using Engine = std::mt19937_64;

  explicit RngStream(std::uint64_t seed = 0, std::uint64_t stream = 0) noexcept
      : seed_(seed), stream_(stream) {}

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream() const noexcept { return stream_; }

  /// Child stream keyed by `path`; same seed, new stream id.
  RngStream child(std::initializer_list<std::uint64_t> path) const;
  RngStream child(std::uint64_t index) const { return child({index}); }

  /// Fresh engine positioned at the start of this stream.
  Engine engine() const;

  friend bool operator==(const RngStream&, const RngStream&) = default;

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
};

}  // namespace ksdagg
