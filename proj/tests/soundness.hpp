#pragma once
// Frame-level invariants shared by the decoder tests and the acceptance run.

#include <cstdint>
#include <string>

#include "hetcard/core.hpp"
#include "hetcard/frame.hpp"
#include "hetcard/symbols.hpp"

namespace soundness {

// Empty string when the frame is sound, otherwise the first violation.
inline std::string check_frame(const hetcard::MultiTypeFrame& f, hetcard::Scheme scheme,
                               hetcard::BlockMode mode, int types, std::uint32_t blocks,
                               std::uint32_t slot_width) {
  using namespace hetcard;
  if (!f.presence.same_sets(f.truth)) return "presence sets differ from ground truth";
  if (!f.ledger.consistent()) return "ledger total mismatch";
  const int slots = scheme == Scheme::ThreeStage ? types - 1 : sym2_slots(types);
  if (f.ledger.stage1 != std::uint64_t(slots) * blocks) return "stage-1 slot count";
  if (f.ledger.bp < ceil_div(blocks, slot_width)) return "missing stage-1 broadcast";
  if (int(f.statistic.size()) != types) return "statistic size";
  for (int b = 0; b < types; ++b) {
    const std::uint32_t want = mode == BlockMode::Trial
                                   ? f.truth.first_absent(b)
                                   : blocks - static_cast<std::uint32_t>(f.truth.size(b));
    if (f.statistic[b] != want) return "statistic of type " + std::to_string(b + 1);
  }
  for (int b = 0; b < types; ++b)
    for (const auto& n : f.energy.nodes(b)) {
      if (n.window() != f.ledger.total) return "energy window differs from frame length";
    }
  return {};
}

}  // namespace soundness
