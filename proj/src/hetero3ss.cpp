#include "hetcard/hetero3ss.hpp"

#include <string>

#include "hetcard/homogeneous.hpp"

namespace hetcard::three_stage {

Stage1Result run_stage1(std::span<const std::uint32_t> active, const BlockDistribution& dist,
                        const StreamFactory& streams, Purpose purpose, std::uint64_t index) {
  const int types = static_cast<int>(active.size());
  const SymbolMatrix& matrix = shared_decoder(Scheme::ThreeStage, types).matrix();

  Stage1Result out;
  out.placement = place_nodes(active, dist, streams, purpose, index);
  out.outcomes.reserve(dist.blocks);
  for (std::uint32_t h = 0; h < dist.blocks; ++h) {
    out.outcomes.push_back(matrix.outcome(out.placement.categories(h)));
    if (out.outcomes.back().all_collision()) out.flagged.push_back(h + 1);
  }
  return out;
}

std::vector<Presence> decode_block(const BlockOutcome& outcome) {
  const int types = static_cast<int>(outcome.slots.size()) + 1;
  return shared_decoder(Scheme::ThreeStage, types).decode(outcome).verdicts;
}

FlaggedResolution resolve_flagged(std::span<const Category> categories) {
  const std::size_t types = categories.size();
  FlaggedResolution out;
  out.present.assign(types, 1);
  // Stage 2: only the block's T_1 nodes send alpha.
  out.stage2 = categories[0] == 0   ? SlotOutcome::Empty
               : categories[0] == 1 ? SlotOutcome::SingleAlpha
                                    : SlotOutcome::Collision;
  switch (out.stage2) {
    case SlotOutcome::Empty:
      // No T_1, so every beta slot collided on its own: at least two of each other type.
      out.present[0] = 0;
      break;
    case SlotOutcome::SingleAlpha:
      // A lone T_1 collided everywhere: every other type is there too.
      break;
    default:
      out.r_list = true;
      for (std::size_t b = 1; b < types; ++b) out.present[b] = categories[b] > 0 ? 1 : 0;
      break;
  }
  return out;
}

FollowupResult run_followup(const Stage1Result& stage1, std::uint32_t slot_width) {
  const Placement& pl = stage1.placement;
  const int types = pl.types;
  const BlockDecoder& decoder = shared_decoder(Scheme::ThreeStage, types);

  FollowupResult out;
  out.presence = PresenceSets(types, pl.blocks);
  for (std::uint32_t h = 0; h < pl.blocks; ++h) {
    const BlockOutcome& outcome = stage1.outcomes[h];
    if (outcome.all_collision()) {
      out.presence.set_bp_bit(h + 1);
      continue;
    }
    const BlockDecode& dec = decoder.decode(outcome);
    for (int b = 0; b < types; ++b) {
      if (dec.verdicts[b] == Presence::Ambiguous)
        throw InconsistentOutcome("3-SS block " + std::to_string(h + 1) +
                                  " is ambiguous without being all-collision");
      if (dec.verdicts[b] == Presence::Present) out.presence.insert(b, h + 1);
    }
  }

  for (std::uint32_t h : stage1.flagged) {
    const FlaggedResolution res = resolve_flagged(pl.categories(h - 1));
    if (res.r_list) out.r_list.push_back(h);
    for (int b = 0; b < types; ++b)
      if (res.present[b]) out.presence.insert(b, h);
  }

  const std::uint64_t flagged = stage1.flagged.size();
  out.ledger.stage1 = std::uint64_t(types - 1) * pl.blocks;
  out.ledger.stage2 = flagged;
  out.ledger.stage3 = std::uint64_t(types - 1) * out.r_list.size();
  out.ledger.bp = ceil_div(pl.blocks, slot_width) + ceil_div(flagged, slot_width);
  out.ledger.recompute_total();
  return out;
}

namespace {

MultiTypeFrame run_frame(std::span<const std::uint32_t> active, const BlockDistribution& dist,
                         const StreamFactory& streams, Purpose purpose, std::uint64_t index,
                         std::uint32_t slot_width) {
  const int types = static_cast<int>(active.size());
  const Stage1Result s1 = run_stage1(active, dist, streams, purpose, index);
  FollowupResult fu = run_followup(s1, slot_width);

  MultiTypeFrame frame;
  frame.truth = s1.placement.truth();
  frame.presence = std::move(fu.presence);
  frame.ledger = fu.ledger;
  frame.energy = EnergyLedger(active);

  std::vector<std::uint8_t> in_r(s1.placement.blocks, 0);
  for (auto h : fu.r_list) in_r[h - 1] = 1;

  const std::uint64_t bp1 = ceil_div(s1.placement.blocks, slot_width);
  for (int b = 0; b < types; ++b) {
    for (std::size_t i = 0; i < frame.energy.count(b); ++i) {
      const std::int32_t h = s1.placement.chosen[b][i];
      if (h < 0) continue;  // sat out: idle for the whole frame
      NodeEnergy& node = frame.energy.node(b, i);
      const bool flagged = frame.presence.bp_bit(h + 1);
      node.rx = bp1;
      if (b == 0) {
        node.tx = static_cast<std::uint64_t>(types - 1) + (flagged ? 1 : 0);
      } else {
        node.tx = 1 + (in_r[h] ? 1 : 0);
        // reads its own bit of BP2
        if (flagged) node.rx += 1;
      }
    }
  }
  frame.energy.close_window(frame.ledger.total);
  finish_statistic(frame, dist.mode);
  return frame;
}

}  // namespace

MultiTypeFrame run_trial(std::span<const std::uint32_t> active, const ProtocolConfig& config,
                         const StreamFactory& streams, std::uint64_t index) {
  return run_frame(active, BlockDistribution::trial(config.t_blocks), streams, Purpose::Phase1,
                   index, config.slot_width);
}

MultiTypeFrame run_bb(std::span<const std::uint32_t> active, std::span<const double> rough,
                      const ProtocolConfig& config, const StreamFactory& streams) {
  if (rough.size() != active.size())
    throw ConfigError("rough", "expected one rough estimate per type");
  std::vector<double> p(rough.size());
  for (std::size_t b = 0; b < rough.size(); ++b)
    p[b] = homogeneous::participation_probability(config.ell, rough[b]);
  return run_frame(active, BlockDistribution::balls_and_bins(config.ell, std::move(p)), streams,
                   Purpose::Phase2, 0, config.slot_width);
}

}  // namespace hetcard::three_stage
