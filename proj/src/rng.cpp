#include "hetcard/rng.hpp"

#include <algorithm>
#include <bit>

namespace hetcard {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t RngStream::next_below(std::uint64_t bound) {
  // Rejection on the top of the range keeps the draw exactly uniform.
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
  std::uint64_t w = next_word();
  while (w >= limit) w = next_word();
  return w % bound;
}

std::uint32_t RngStream::geometric_block(std::uint32_t t) {
  // Trailing zeros of a uniform word are geometric with P(k) = 2^-(k+1).
  const std::uint64_t w = next_word();
  const std::uint32_t tz = w == 0 ? 64u : static_cast<std::uint32_t>(std::countr_zero(w));
  return std::min(tz + 1, t);
}

std::optional<std::uint32_t> RngStream::bb_choice(double p, std::uint32_t blocks) {
  if (!bernoulli(p)) return std::nullopt;
  return static_cast<std::uint32_t>(next_below(blocks));
}

RngStream StreamFactory::stream(int type, Purpose purpose, std::uint64_t index) const {
  std::uint64_t key = splitmix64(master_);
  key = splitmix64(key ^ (static_cast<std::uint64_t>(type) + 1) * 0x100000001b3ULL);
  key = splitmix64(key ^ static_cast<std::uint64_t>(purpose) << 48);
  key = splitmix64(key ^ index);
  return RngStream(key);
}

StreamFactory StreamFactory::replicate(std::uint64_t replicate) const {
  return StreamFactory(splitmix64(master_ ^ splitmix64(replicate + 0x5eed)));
}

}  // namespace hetcard
