#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "hetcard/core.hpp"
#include "hetcard/rng.hpp"
#include "hetcard/symbols.hpp"

namespace hetcard {

enum class BlockMode : std::uint8_t { Trial, BallsAndBins };

/// How active nodes choose a stage-1 block.
struct BlockDistribution {
  BlockMode mode = BlockMode::Trial;
  std::uint32_t blocks = 0;          // t_T in trial mode, l in BB mode
  std::vector<double> participation;  // BB mode only, one p_b per type

  static BlockDistribution trial(std::uint32_t t_blocks);
  static BlockDistribution balls_and_bins(std::uint32_t ell, std::vector<double> participation);
};

/// Ground truth of one stage 1: the block each active node picked and the
/// resulting per-block node counts.
struct Placement {
  int types = 0;
  std::uint32_t blocks = 0;
  /// chosen[b][i]: 0-based block of node i of type b, or -1 if it sat out.
  std::vector<std::vector<std::int32_t>> chosen;
  /// counts[block * types + b]
  std::vector<std::uint32_t> counts;

  std::uint32_t count(std::uint32_t block, int type) const {
    return counts[static_cast<std::size_t>(block) * types + type];
  }
  std::vector<Category> categories(std::uint32_t block) const;
  /// Exact presence sets implied by the placement.
  PresenceSets truth() const;
};

/// Each type's nodes draw, in node order, from stream(type, purpose, index):
/// one geometric block per node in trial mode, one balls-and-bins choice per
/// node otherwise. A standalone LoF or BB trial fed the same stream makes
/// identical choices.
Placement place_nodes(std::span<const std::uint32_t> active, const BlockDistribution& dist,
                      const StreamFactory& streams, Purpose purpose, std::uint64_t index);

/// Result of one multi-type 3-SS or 2-SS run (trial or BB mode).
struct MultiTypeFrame {
  PresenceSets presence;  // what the base station inferred
  PresenceSets truth;     // simulator ground truth
  SlotLedger ledger;
  EnergyLedger energy;    // slot counts only; unpriced
  /// j_b (trial mode: first block absent from I_b) or z_b = blocks - |I_b|.
  std::vector<std::uint32_t> statistic;
};

/// Fills `frame.statistic` from `frame.presence` according to the mode.
void finish_statistic(MultiTypeFrame& frame, BlockMode mode);

}  // namespace hetcard
