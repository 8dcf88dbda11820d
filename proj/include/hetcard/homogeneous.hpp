#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "hetcard/core.hpp"
#include "hetcard/rng.hpp"

/// Single-type estimators: the LoF protocol and the two-phase SRC_S protocol.
namespace hetcard::homogeneous {

inline constexpr double kLofScale = 1.2897;
inline constexpr double kParticipationLoad = 1.6;

/// Slot in {1..t} picked by one LoF node.
std::uint32_t lof_slot_index(RngStream& rng, std::uint32_t t);

/// One LoF trial with n nodes over t slots: the first empty slot, or t if
/// every slot is busy.
std::uint32_t lof_trial(std::uint32_t n, std::uint32_t t, RngStream& rng);

/// 1.2897 * 2^(mean of j - 1). Throws EmptyInput on an empty list.
double lof_estimate(std::span<const std::uint32_t> j);

struct Phase1Result {
  double rough = 0.0;
  std::vector<std::uint32_t> j;
  std::uint64_t slots = 0;
};

/// M' LoF trials over t_T slots; trial m draws from stream(type, Phase1, m).
Phase1Result srcs_phase1(std::uint32_t n, const ProtocolConfig& config,
                         const StreamFactory& streams, int type);

/// p = min(1, 1.6 l / rough).
double participation_probability(std::uint32_t ell, double rough);

struct BBTrialPlan {
  std::uint32_t ell = 1;
  double p = 1.0;

  static BBTrialPlan from_rough(std::uint32_t ell, double rough) {
    return {ell, participation_probability(ell, rough)};
  }
};

struct BBTrialResult {
  std::uint32_t empty = 0;  // z
  std::uint32_t participants = 0;
  std::vector<std::uint32_t> occupancy;
  /// Per node: 0-based slot, or -1 if it did not participate.
  std::vector<std::int32_t> choices;
};

BBTrialResult bb_trial(std::uint32_t n, const BBTrialPlan& plan, RngStream& rng);

/// ln(z/l) / ln(1 - p/l). Throws AllSlotsBusy when z = 0.
double srcs_final_estimate(std::uint32_t z, std::uint32_t ell, double p);

struct FinalEstimate {
  double value = 0.0;
  bool fallback = false;
};

/// As srcs_final_estimate, but z = 0 yields the half-slot pseudo-count
/// ln(1/(2l)) / ln(1 - p/l) with `fallback` set.
FinalEstimate final_estimate_or_fallback(std::uint32_t z, std::uint32_t ell, double p);

/// Runs SRC_S once per type. Per type the ledger holds M' t_T phase-1 slots,
/// one phase-boundary broadcast slot and l phase-2 slots. Every node's energy
/// window is its own type's run.
EstimateReport t_repetitions_srcs(std::span<const std::uint32_t> active,
                                  const ProtocolConfig& config, const StreamFactory& streams);

}  // namespace hetcard::homogeneous
