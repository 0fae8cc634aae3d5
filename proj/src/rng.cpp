#include "ksdagg/rng.hpp"

#include <array>
#include <vector>

namespace ksdagg {

namespace {

void push_words(std::vector<std::uint32_t>& words, std::uint64_t value) {
  words.push_back(static_cast<std::uint32_t>(value & 0xffffffffULL));
  words.push_back(static_cast<std::uint32_t>(value >> 32));
}

}  // namespace

RngStream RngStream::child(std::initializer_list<std::uint64_t> path) const {
  std::vector<std::uint32_t> words;
  words.reserve(4 + 2 * path.size() + 1);
  push_words(words, seed_);
  push_words(words, stream_);
  // path length keeps {a} and {a, 0} apart
  words.push_back(static_cast<std::uint32_t>(path.size()));
  for (auto index : path) push_words(words, index);

  std::seed_seq seq(words.begin(), words.end());
  std::array<std::uint32_t, 2> out{};
  seq.generate(out.begin(), out.end());
  return RngStream(seed_, (static_cast<std::uint64_t>(out[1]) << 32) | out[0]);
}

RngStream::Engine RngStream::engine() const {
  std::vector<std::uint32_t> words;
  push_words(words, seed_);
  push_words(words, stream_);
  std::seed_seq seq(words.begin(), words.end());
  return Engine(seq);
}

}  // namespace ksdagg
