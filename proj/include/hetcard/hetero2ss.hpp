#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "hetcard/core.hpp"
#include "hetcard/frame.hpp"
#include "hetcard/rng.hpp"
#include "hetcard/symbols.hpp"

/// The 2-Stage Scheme and 2-SS-BB. With T <= 3 types both are the 3-SS
/// versions, run on the same random streams.
namespace hetcard::two_stage {

inline SymbolMatrix build_matrix(int types) { return build_sym2_matrix(types); }

/// Verdicts for one stage-1 block of the T-type 2-SS matrix.
std::vector<Presence> decode_block(const BlockOutcome& outcome, int types);

enum class Action : std::uint8_t {
  None,       // block decoded unambiguously
  Dedicated,  // one probe slot per listed type; Empty means absent
  Recurse,    // every slot collided: each group reruns stage 1 on its own matrix
  StageTwoThree,  // every slot collided with at most three types: 3-SS stages 2 and 3
};

struct BlockPlan {
  Action action = Action::None;
  std::vector<int> probes;               // Dedicated: 0-based types, ascending
  std::vector<std::vector<int>> groups;  // Recurse: 0-based types
};

struct ResolutionPlan {
  std::vector<BlockPlan> blocks;
  /// Slots known up front: probe slots plus one sub-instance block per group.
  std::uint64_t committed_slots() const;
};

/// Plan for one block of the `types`-type matrix. Partial ambiguity gets the
/// smallest set of probed types (lexicographically first on ties) that tells
/// all consistent scenarios apart; all-collision blocks split into
/// {1..ceil(T/2)} and the rest. Plans are cached per outcome.
const BlockPlan& plan_block(int types, const BlockOutcome& outcome);

ResolutionPlan plan_resolution(std::span<const BlockOutcome> outcomes, int types);

/// Follow-up for one block whose nodes fall in the given categories.
struct BlockResolution {
  std::uint32_t slots = 0;
  std::vector<std::uint8_t> present;  // as inferred by the base station
  std::vector<std::uint32_t> tx;      // follow-up transmissions per node of each type
};

/// Resolves one stage-1 block of the |categories|-type matrix. For fewer than
/// four types this is the 3-SS stage 2/3 follow-up.
BlockResolution resolve_block(std::span<const Category> categories);

/// Follow-up slots needed for a block with these categories (no randomness).
std::uint32_t followup_slots(std::span<const Category> categories);

/// Expected follow-up slots per block when type b's node count in a block
/// is 0 with probability u[b] and 1 with probability v[b].
double expected_followup_slots(std::span<const double> u, std::span<const double> v);

/// BP cost of announcing the follow-up plan: two bits per stage-1 block.
inline std::uint64_t announcement_slots(std::uint64_t blocks, std::uint32_t slot_width) {
  return ceil_div(2 * blocks, slot_width);
}

MultiTypeFrame run_trial(std::span<const std::uint32_t> active, const ProtocolConfig& config,
                         const StreamFactory& streams, std::uint64_t index = 0);

MultiTypeFrame run_bb(std::span<const std::uint32_t> active, std::span<const double> rough,
                      const ProtocolConfig& config, const StreamFactory& streams);

}  // namespace hetcard::two_stage
