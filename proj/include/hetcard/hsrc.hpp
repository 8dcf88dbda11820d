#pragma once

#include <cstdint>
#include <optional>
#include <span>

#include "hetcard/core.hpp"
#include "hetcard/rng.hpp"

/// The composite estimators HSRC-1 (3-SS based) and HSRC-2 (2-SS based),
/// and the repeated-trial baselines they are compared against.
namespace hetcard::hsrc {

enum class Variant : std::uint8_t { HSRC1, HSRC2 };

enum class Baseline : std::uint8_t { ThreeStageRepeated, TwoStageRepeated, TRepSRCS };

const char* to_string(Variant variant);
const char* to_string(Baseline baseline);

/// Rough-estimate broadcast between the phases: t_T bits per type.
inline std::uint64_t boundary_slots(int types, std::uint32_t t_blocks, std::uint32_t slot_width) {
  return ceil_div(static_cast<std::uint64_t>(types) * t_blocks, slot_width);
}

/// M' multi-type trials (trial m uses the Phase1 streams with index m), the
/// rough-estimate broadcast, then T-Rep-BB or the variant's BB scheme on the
/// Phase2 streams. Under identical streams the final estimates equal those
/// of T separate SRC_S runs.
EstimateReport run_hsrc(Variant variant, std::span<const std::uint32_t> active,
                        const ProtocolConfig& config, const StreamFactory& streams,
                        std::optional<Phase2Method> phase2_override = {});

/// 3-SS or 2-SS repeated config.m_lof times with the LoF estimate, or T
/// separate SRC_S runs.
EstimateReport run_baseline(Baseline baseline, std::span<const std::uint32_t> active,
                            const ProtocolConfig& config, const StreamFactory& streams);

}  // namespace hetcard::hsrc
