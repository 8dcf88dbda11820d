#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "hetcard/core.hpp"
#include "hetcard/frame.hpp"

/// Closed-form slot counts, phase-2 selection thresholds and expected energy.
namespace hetcard::analysis {

struct Occupancy {
  double u = 1.0;  // no node in a given block
  double v = 0.0;  // exactly one node
};

/// n nodes each landing in a given block with probability p/l.
Occupancy occupancy(double n, double p, double ell);

/// p'_h of the geometric block choice over t blocks (h is 1-based).
double geometric_block_probability(std::uint32_t h, std::uint32_t t);

/// n nodes each landing in block h with probability p'_h.
Occupancy occupancy_geometric(double n, std::uint32_t h, std::uint32_t t);

struct QProbs {
  double q1 = 0.0;  // two or more T_1 nodes
  double q2 = 0.0;  // one T_1 node, every other type present
  double q3 = 0.0;  // no T_1, two or more of every other type
  double sum() const { return q1 + q2 + q3; }
};

/// Per-block probabilities of the three all-collision cases in 3-SS-BB, with
/// p_b derived from the rough estimates.
QProbs q_probs(std::span<const double> n, std::span<const double> rough, std::uint32_t ell);

struct KR {
  double k = 0.0;  // E(K_T): stage-2 slots
  double r = 0.0;  // E(R_T): blocks needing stage 3
};

KR expected_k_r(std::span<const double> n, std::span<const double> rough, std::uint32_t ell);

/// Expected 3-SS trial length from (empirical) moments of K'_T and R'_T.
double lambda_I(int types, std::uint32_t t_blocks, std::uint32_t slot_width, double expected_k,
                double expected_r);

/// Expected 3-SS-BB length.
double lambda_II(std::span<const double> n, std::span<const double> rough, std::uint32_t ell,
                 std::uint32_t slot_width);

/// Expected 2-SS-BB length: sigma(T) l stage-1 slots, the stage-1 broadcast,
/// and the enumerated expected follow-up. With `include_announcement` the
/// plan broadcast is added. Equals lambda_II for T <= 3.
double lambda_2ss_bb(std::span<const double> n, std::span<const double> rough, std::uint32_t ell,
                     std::uint32_t slot_width, bool include_announcement = false);

// Threshold functions for the phase-2 decision.
double threshold_g1(int types);
double threshold_g2(int types);
double threshold_f(double x, int types);
double threshold_f1(double x, int types);

inline constexpr int kZetaMinTypes = 2;
inline constexpr int kZetaMaxTypes = 50;

/// zeta_1 (which = 1) solves f(x, T) = 6T - 3.88; zeta_2 (which = 2) solves
/// f1(x, T) = 6T - 4. Bisection on (0, 10] to 1e-6. Throws NoBracket.
double zeta(int types, int which);

/// n1*/l: the T_1 load at which lambda_II equals T l when every other type
/// is saturated (rough = n for all types).
double crossover_ratio(int types, std::uint32_t ell, std::uint32_t slot_width);

enum class Phase2Zone : std::uint8_t { SSBB, TRepBB, Indeterminate };

const char* to_string(Phase2Zone zone);

struct Phase2Selection {
  Phase2Zone zone = Phase2Zone::TRepBB;
  Phase2Method method = Phase2Method::TRepBB;  // zone decision, or lambda_II vs T l inside the band
};

/// HSRC-1 rule: SSBB below zeta_1 l, TRepBB above zeta_2 l or at 1.6 l and
/// beyond; in between the plug-in lambda_II is compared with T l.
Phase2Selection select_phase2(std::span<const double> rough, std::uint32_t ell,
                              std::uint32_t slot_width);

/// HSRC-2 rule: the plug-in expected 2-SS-BB length against T l (the HSRC-1
/// rule for T <= 3).
Phase2Method select_phase2_two_stage(std::span<const double> rough, std::uint32_t ell,
                                     std::uint32_t slot_width);

/// Expected radio-state slots of one active node and their energy.
struct ExpectedEnergy {
  double tx = 0.0;
  double rx = 0.0;
  double idle = 0.0;
  double energy = 0.0;

  double window() const { return tx + rx + idle; }
};

/// Per-type expected energy of an active node over one 3-SS (trial mode,
/// averaged over its geometric block) or 3-SS-BB frame (BB mode, including
/// the chance it sits out). `frame_slots` is the expected frame length; it
/// is required in trial mode and defaults to lambda_II in BB mode.
std::vector<ExpectedEnergy> expected_energy_3ss(std::span<const double> n,
                                                std::span<const double> rough,
                                                const ProtocolConfig& config, BlockMode mode,
                                                std::optional<double> frame_slots = {});

/// p_b tau + (l - p_b) iota per type; no reception.
std::vector<ExpectedEnergy> expected_energy_trepbb(std::span<const double> rough,
                                                   std::uint32_t ell, double gamma_tau,
                                                   double gamma_iota);

/// M' 3-SS trials of expected length `trial_slots`, `boundary_slots` of
/// phase-boundary reception, then the given phase-2 method.
std::vector<ExpectedEnergy> expected_energy_hsrc1(std::span<const double> n,
                                                  std::span<const double> rough,
                                                  const ProtocolConfig& config,
                                                  Phase2Method method, double trial_slots,
                                                  double boundary_slots = 0.0);

}  // namespace hetcard::analysis
