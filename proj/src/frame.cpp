#include "hetcard/frame.hpp"

namespace hetcard {

BlockDistribution BlockDistribution::trial(std::uint32_t t_blocks) {
  return {BlockMode::Trial, t_blocks, {}};
}

BlockDistribution BlockDistribution::balls_and_bins(std::uint32_t ell,
                                                    std::vector<double> participation) {
  return {BlockMode::BallsAndBins, ell, std::move(participation)};
}

std::vector<Category> Placement::categories(std::uint32_t block) const {
  std::vector<Category> cats(static_cast<std::size_t>(types));
  for (int b = 0; b < types; ++b) cats[b] = category_of(count(block, b));
  return cats;
}

PresenceSets Placement::truth() const {
  PresenceSets sets(types, blocks);
  for (std::uint32_t h = 0; h < blocks; ++h)
    for (int b = 0; b < types; ++b)
      if (count(h, b) > 0) sets.insert(b, h + 1);
  return sets;
}

Placement place_nodes(std::span<const std::uint32_t> active, const BlockDistribution& dist,
                      const StreamFactory& streams, Purpose purpose, std::uint64_t index) {
  if (dist.blocks < 1) throw ConfigError("blocks", "stage 1 needs at least one block");
  const int types = static_cast<int>(active.size());
  if (dist.mode == BlockMode::BallsAndBins && dist.participation.size() != active.size())
    throw ConfigError("p", "expected one participation probability per type");

  Placement pl;
  pl.types = types;
  pl.blocks = dist.blocks;
  pl.chosen.resize(active.size());
  pl.counts.assign(static_cast<std::size_t>(dist.blocks) * types, 0);

  for (int b = 0; b < types; ++b) {
    RngStream rng = streams.stream(b, purpose, index);
    auto& chosen = pl.chosen[b];
    chosen.resize(active[b]);
    for (std::uint32_t i = 0; i < active[b]; ++i) {
      std::int32_t block = -1;
      if (dist.mode == BlockMode::Trial) {
        block = static_cast<std::int32_t>(rng.geometric_block(dist.blocks)) - 1;
      } else if (auto pick = rng.bb_choice(dist.participation[b], dist.blocks)) {
        block = static_cast<std::int32_t>(*pick);
      }
      chosen[i] = block;
      if (block >= 0) ++pl.counts[static_cast<std::size_t>(block) * types + b];
    }
  }
  return pl;
}

void finish_statistic(MultiTypeFrame& frame, BlockMode mode) {
  const int types = frame.presence.types();
  frame.statistic.assign(static_cast<std::size_t>(types), 0);
  for (int b = 0; b < types; ++b) {
    frame.statistic[b] =
        mode == BlockMode::Trial
            ? frame.presence.first_absent(b)
            : static_cast<std::uint32_t>(frame.presence.blocks() - frame.presence.size(b));
  }
}

}  // namespace hetcard
