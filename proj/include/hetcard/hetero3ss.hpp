#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "hetcard/core.hpp"
#include "hetcard/frame.hpp"
#include "hetcard/rng.hpp"
#include "hetcard/symbols.hpp"

/// The 3-Stage Scheme and its balls-and-bins variant.
namespace hetcard::three_stage {

struct Stage1Result {
  Placement placement;
  std::vector<BlockOutcome> outcomes;
  std::vector<std::uint32_t> flagged;  // 1-based, ascending: blocks where every slot collided
};

Stage1Result run_stage1(std::span<const std::uint32_t> active, const BlockDistribution& dist,
                        const StreamFactory& streams, Purpose purpose, std::uint64_t index);

/// Verdicts for one stage-1 block; T is the outcome length plus one.
std::vector<Presence> decode_block(const BlockOutcome& outcome);

/// Stage 2 and, if needed, stage 3 for one all-collision block, given the
/// per-type node categories in that block.
struct FlaggedResolution {
  SlotOutcome stage2 = SlotOutcome::Empty;
  bool r_list = false;                // stage-2 slot collided; stage 3 runs
  std::vector<std::uint8_t> present;  // per type, as inferred by the base station

  std::uint32_t slots() const {
    return 1 + (r_list ? static_cast<std::uint32_t>(present.size() - 1) : 0);
  }
};

FlaggedResolution resolve_flagged(std::span<const Category> categories);

struct FollowupResult {
  PresenceSets presence;
  SlotLedger ledger;
  std::vector<std::uint32_t> r_list;  // 1-based, ascending
};

/// Decodes every block, runs stages 2 and 3, and accounts all slots and
/// broadcast packets.
FollowupResult run_followup(const Stage1Result& stage1, std::uint32_t slot_width);

/// One complete 3-SS execution over t_T geometric blocks; index selects the
/// Phase1 stream (trial number).
MultiTypeFrame run_trial(std::span<const std::uint32_t> active, const ProtocolConfig& config,
                         const StreamFactory& streams, std::uint64_t index = 0);

/// 3-SS-BB over l uniform blocks with p_b from the rough estimates; draws from
/// the Phase2 streams.
MultiTypeFrame run_bb(std::span<const std::uint32_t> active, std::span<const double> rough,
                      const ProtocolConfig& config, const StreamFactory& streams);

}  // namespace hetcard::three_stage
