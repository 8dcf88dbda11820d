#include "hetcard/hetero2ss.hpp"

#include <map>
#include <mutex>
#include <set>

#include "hetcard/hetero3ss.hpp"
#include "hetcard/homogeneous.hpp"

namespace hetcard::two_stage {

std::vector<Presence> decode_block(const BlockOutcome& outcome, int types) {
  return shared_decoder(Scheme::TwoStage, types).decode(outcome).verdicts;
}

namespace {

std::vector<int> minimal_distinguisher(const BlockDecode& dec) {
  std::vector<int> ambiguous;
  for (int b = 0; b < static_cast<int>(dec.verdicts.size()); ++b)
    if (dec.verdicts[b] == Presence::Ambiguous) ambiguous.push_back(b);

  std::set<std::vector<std::uint8_t>> patterns;
  for (const auto& sc : dec.scenarios) {
    std::vector<std::uint8_t> p;
    for (int b : ambiguous) p.push_back(sc[b] > 0);
    patterns.insert(std::move(p));
  }

  const int m = static_cast<int>(ambiguous.size());
  for (int k = 1; k <= m; ++k) {
    std::vector<int> pick(k);
    for (int i = 0; i < k; ++i) pick[i] = i;
    while (true) {
      std::set<std::vector<std::uint8_t>> seen;
      for (const auto& p : patterns) {
        std::vector<std::uint8_t> proj;
        for (int i : pick) proj.push_back(p[i]);
        seen.insert(std::move(proj));
      }
      if (seen.size() == patterns.size()) {
        std::vector<int> probes;
        for (int i : pick) probes.push_back(ambiguous[i]);
        return probes;
      }
      // next k-combination of {0..m-1} in lexicographic order
      int i = k - 1;
      while (i >= 0 && pick[i] == m - k + i) --i;
      if (i < 0) break;
      ++pick[i];
      for (int j = i + 1; j < k; ++j) pick[j] = pick[j - 1] + 1;
    }
  }
  return ambiguous;
}

BlockPlan make_plan(int types, const BlockOutcome& outcome) {
  const BlockDecode& dec = shared_decoder(Scheme::TwoStage, types).decode(outcome);
  BlockPlan plan;
  if (!dec.ambiguous()) return plan;
  if (outcome.all_collision()) {
    if (types <= 3) {
      plan.action = Action::StageTwoThree;
      return plan;
    }
    plan.action = Action::Recurse;
    const int split = (types + 1) / 2;
    plan.groups.resize(2);
    for (int b = 0; b < types; ++b) plan.groups[b < split ? 0 : 1].push_back(b);
    return plan;
  }
  plan.action = Action::Dedicated;
  plan.probes = minimal_distinguisher(dec);
  return plan;
}

const std::vector<std::uint32_t>& scenario_costs(int types);

}  // namespace

const BlockPlan& plan_block(int types, const BlockOutcome& outcome) {
  static std::mutex mutex;
  static std::map<std::pair<int, std::uint32_t>, BlockPlan> cache;
  const std::pair key{types, encode_outcome(outcome)};
  {
    const std::lock_guard lock(mutex);
    if (auto it = cache.find(key); it != cache.end()) return it->second;
  }
  BlockPlan plan = make_plan(types, outcome);
  const std::lock_guard lock(mutex);
  return cache.try_emplace(key, std::move(plan)).first->second;
}

std::uint64_t ResolutionPlan::committed_slots() const {
  std::uint64_t slots = 0;
  for (const auto& p : blocks) {
    switch (p.action) {
      case Action::None: break;
      case Action::Dedicated: slots += p.probes.size(); break;
      case Action::StageTwoThree: slots += 1; break;
      case Action::Recurse:
        for (const auto& g : p.groups) slots += sym2_slots(static_cast<int>(g.size()));
        break;
    }
  }
  return slots;
}

ResolutionPlan plan_resolution(std::span<const BlockOutcome> outcomes, int types) {
  ResolutionPlan plan;
  plan.blocks.reserve(outcomes.size());
  for (const auto& o : outcomes) plan.blocks.push_back(plan_block(types, o));
  return plan;
}

BlockResolution resolve_block(std::span<const Category> categories) {
  const int types = static_cast<int>(categories.size());
  const BlockDecoder& decoder = shared_decoder(Scheme::TwoStage, types);
  const BlockOutcome outcome = decoder.matrix().outcome(categories);
  const BlockDecode& dec = decoder.decode(outcome);
  const BlockPlan& plan = plan_block(types, outcome);

  BlockResolution out;
  out.present.assign(types, 0);
  out.tx.assign(types, 0);
  for (int b = 0; b < types; ++b) out.present[b] = dec.verdicts[b] == Presence::Present;

  switch (plan.action) {
    case Action::None:
      break;

    case Action::StageTwoThree: {
      const auto res = three_stage::resolve_flagged(categories);
      out.slots = res.slots();
      out.present = res.present;
      out.tx[0] = 1;
      if (res.r_list)
        for (int b = 1; b < types; ++b) out.tx[b] = 1;
      break;
    }

    case Action::Dedicated: {
      out.slots = static_cast<std::uint32_t>(plan.probes.size());
      for (int b : plan.probes) out.tx[b] = 1;
      const std::vector<Category>* match = nullptr;
      for (const auto& sc : dec.scenarios) {
        bool agrees = true;
        for (int b : plan.probes) agrees = agrees && ((sc[b] > 0) == (categories[b] > 0));
        if (agrees) {
          match = &sc;
          break;
        }
      }
      if (!match) throw InconsistentOutcome("2-SS probe slots match no consistent scenario");
      for (int b = 0; b < types; ++b) out.present[b] = (*match)[b] > 0;
      break;
    }

    case Action::Recurse:
      for (const auto& group : plan.groups) {
        const int g = static_cast<int>(group.size());
        const SymbolMatrix& sub = shared_decoder(Scheme::TwoStage, g).matrix();
        std::vector<Category> sub_cats(g);
        for (int i = 0; i < g; ++i) sub_cats[i] = categories[group[i]];
        const BlockResolution inner = resolve_block(sub_cats);
        out.slots += static_cast<std::uint32_t>(sub.slots()) + inner.slots;
        for (int i = 0; i < g; ++i) {
          out.present[group[i]] = inner.present[i];
          out.tx[group[i]] += static_cast<std::uint32_t>(sub.transmissions(i)) + inner.tx[i];
        }
      }
      break;
  }
  return out;
}

namespace {

const std::vector<std::uint32_t>& scenario_costs(int types) {
  static std::mutex mutex;
  static std::map<int, std::vector<std::uint32_t>> cache;
  {
    const std::lock_guard lock(mutex);
    if (auto it = cache.find(types); it != cache.end()) return it->second;
  }
  std::uint32_t count = 1;
  for (int b = 0; b < types; ++b) count *= 3;
  std::vector<std::uint32_t> costs(count);
  std::vector<Category> cats(types);
  for (std::uint32_t sc = 0; sc < count; ++sc) {
    std::uint32_t rest = sc;
    for (int b = 0; b < types; ++b) {
      cats[b] = static_cast<Category>(rest % 3);
      rest /= 3;
    }
    costs[sc] = resolve_block(cats).slots;
  }
  const std::lock_guard lock(mutex);
  return cache.try_emplace(types, std::move(costs)).first->second;
}

}  // namespace

std::uint32_t followup_slots(std::span<const Category> categories) {
  return resolve_block(categories).slots;
}

double expected_followup_slots(std::span<const double> u, std::span<const double> v) {
  const int types = static_cast<int>(u.size());
  if (v.size() != u.size()) throw ConfigError("v", "size mismatch");
  const std::vector<std::uint32_t>& costs = scenario_costs(types);
  double expected = 0.0;
  for (std::uint32_t sc = 0; sc < costs.size(); ++sc) {
    if (costs[sc] == 0) continue;
    double prob = 1.0;
    std::uint32_t rest = sc;
    for (int b = 0; b < types && prob > 0.0; ++b) {
      const std::uint32_t c = rest % 3;
      rest /= 3;
      prob *= c == 0 ? u[b] : c == 1 ? v[b] : 1.0 - u[b] - v[b];
    }
    expected += prob * costs[sc];
  }
  return expected;
}

namespace {

MultiTypeFrame run_frame(std::span<const std::uint32_t> active, const BlockDistribution& dist,
                         const StreamFactory& streams, Purpose purpose, std::uint64_t index,
                         std::uint32_t slot_width) {
  const int types = static_cast<int>(active.size());
  const SymbolMatrix& matrix = shared_decoder(Scheme::TwoStage, types).matrix();
  const Placement pl = place_nodes(active, dist, streams, purpose, index);

  MultiTypeFrame frame;
  frame.truth = pl.truth();
  frame.presence = PresenceSets(types, pl.blocks);
  frame.energy = EnergyLedger(active);

  std::vector<std::vector<std::uint32_t>> followup_tx(pl.blocks);
  std::uint64_t stage2 = 0;
  for (std::uint32_t h = 0; h < pl.blocks; ++h) {
    BlockResolution res = resolve_block(pl.categories(h));
    if (res.slots > 0) frame.presence.set_bp_bit(h + 1);
    stage2 += res.slots;
    for (int b = 0; b < types; ++b)
      if (res.present[b]) frame.presence.insert(b, h + 1);
    followup_tx[h] = std::move(res.tx);
  }

  const std::uint64_t announce = announcement_slots(pl.blocks, slot_width);
  frame.ledger.stage1 = static_cast<std::uint64_t>(matrix.slots()) * pl.blocks;
  frame.ledger.stage2 = stage2;
  frame.ledger.bp = ceil_div(pl.blocks, slot_width) + announce;
  frame.ledger.bp_overhead = announce;
  frame.ledger.recompute_total();

  for (int b = 0; b < types; ++b) {
    const auto row_tx = static_cast<std::uint64_t>(matrix.transmissions(b));
    for (std::size_t i = 0; i < frame.energy.count(b); ++i) {
      const std::int32_t h = pl.chosen[b][i];
      if (h < 0) continue;
      NodeEnergy& node = frame.energy.node(b, i);
      node.tx = row_tx + followup_tx[h][b];
      node.rx = frame.ledger.bp;
    }
  }
  frame.energy.close_window(frame.ledger.total);
  finish_statistic(frame, dist.mode);
  return frame;
}

}  // namespace

MultiTypeFrame run_trial(std::span<const std::uint32_t> active, const ProtocolConfig& config,
                         const StreamFactory& streams, std::uint64_t index) {
  if (active.size() <= 3) return three_stage::run_trial(active, config, streams, index);
  return run_frame(active, BlockDistribution::trial(config.t_blocks), streams, Purpose::Phase1,
                   index, config.slot_width);
}

MultiTypeFrame run_bb(std::span<const std::uint32_t> active, std::span<const double> rough,
                      const ProtocolConfig& config, const StreamFactory& streams) {
  if (active.size() <= 3) return three_stage::run_bb(active, rough, config, streams);
  if (rough.size() != active.size())
    throw ConfigError("rough", "expected one rough estimate per type");
  std::vector<double> p(rough.size());
  for (std::size_t b = 0; b < rough.size(); ++b)
    p[b] = homogeneous::participation_probability(config.ell, rough[b]);
  return run_frame(active, BlockDistribution::balls_and_bins(config.ell, std::move(p)), streams,
                   Purpose::Phase2, 0, config.slot_width);
}

}  // namespace hetcard::two_stage
