#include "aesprice/rng.hpp"

namespace aesprice {

namespace {

std::uint64_t splitmix64(std::uint64_t& x) {
  std::uint64_t z = (x += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id) : seed_(seed), stream_id_(stream_id) {
  // Mix each key component separately before combining so that (s, i) and
  // (s + 1, i - 1) style neighbours land on unrelated states.
  std::uint64_t a = seed;
  std::uint64_t b = stream_id ^ 0x6A09E667F3BCC909ULL;
  std::uint64_t key = splitmix64(a) ^ (splitmix64(b) * 0xD1B54A32D192ED03ULL);
  for (auto& word : state_) {
    word = splitmix64(key);
  }
}

}  // namespace aesprice
