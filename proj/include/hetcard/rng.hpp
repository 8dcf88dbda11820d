#pragma once

#include <cstdint>
#include <optional>
#include <random>

namespace hetcard {

/// What a random stream is used for. Streams are keyed by (type, purpose,
/// index) so two schemes that need the same node behaviour can replay it.
enum class Purpose : std::uint32_t {
  Activity = 1,  // sampling n_b from (D, q)
  Phase1 = 2,    // per-trial block / slot choice; index = trial number
  Phase2 = 3,    // balls-and-bins participation and block choice
};

/// One independent pseudo-random stream. Every draw is built from raw 64-bit
/// engine words, so sequences are identical across standard libraries.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_word() { return engine_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double next_unit() { return static_cast<double>(next_word() >> 11) * 0x1.0p-53; }

  /// Uniform on {0, ..., bound - 1}; bound > 0.
  std::uint64_t next_below(std::uint64_t bound);

  bool bernoulli(double p) { return next_unit() < p; }

  /// Block index in {1, ..., t} with P(i) = 2^-i for i < t and 2^-(t-1) for
  /// i = t. Consumes exactly one word.
  std::uint32_t geometric_block(std::uint32_t t);

  /// One balls-and-bins choice: consumes the participation draw and, if the
  /// node participates, a block draw. Returns the 0-based block.
  std::optional<std::uint32_t> bb_choice(double p, std::uint32_t blocks);

 private:
  std::mt19937_64 engine_;
};

class StreamFactory {
 public:
  explicit StreamFactory(std::uint64_t master_seed) : master_(master_seed) {}

  std::uint64_t master_seed() const { return master_; }

  /// `type` is 0-based.
  RngStream stream(int type, Purpose purpose, std::uint64_t index = 0) const;

  /// Derives the factory used by replicate `replicate` of an experiment.
  StreamFactory replicate(std::uint64_t replicate) const;

 private:
  std::uint64_t master_;
};

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace hetcard
