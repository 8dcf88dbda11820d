#include "hetcard/homogeneous.hpp"

#include <algorithm>
#include <cmath>

namespace hetcard::homogeneous {

std::uint32_t lof_slot_index(RngStream& rng, std::uint32_t t) {
  if (t < 1) throw ConfigError("t", "must be at least 1");
  return rng.geometric_block(t);
}

std::uint32_t lof_trial(std::uint32_t n, std::uint32_t t, RngStream& rng) {
  if (t < 1 || t > 64) throw ConfigError("t", "must lie in [1, 64]");
  std::uint64_t busy = 0;
  for (std::uint32_t i = 0; i < n; ++i) busy |= std::uint64_t{1} << (rng.geometric_block(t) - 1);
  for (std::uint32_t s = 0; s < t; ++s)
    if (!(busy >> s & 1)) return s + 1;
  return t;
}

double lof_estimate(std::span<const std::uint32_t> j) {
  if (j.empty()) throw EmptyInput("LoF estimate needs at least one trial");
  double sum = 0.0;
  for (auto v : j) sum += static_cast<double>(v) - 1.0;
  return kLofScale * std::exp2(sum / static_cast<double>(j.size()));
}

Phase1Result srcs_phase1(std::uint32_t n, const ProtocolConfig& config,
                         const StreamFactory& streams, int type) {
  if (config.m_prime < 1) throw ConfigError("m_prime", "must be at least 1");
  Phase1Result out;
  out.j.reserve(config.m_prime);
  for (std::uint32_t m = 0; m < config.m_prime; ++m) {
    RngStream rng = streams.stream(type, Purpose::Phase1, m);
    out.j.push_back(lof_trial(n, config.t_blocks, rng));
  }
  out.rough = lof_estimate(out.j);
  out.slots = std::uint64_t{config.m_prime} * config.t_blocks;
  return out;
}

double participation_probability(std::uint32_t ell, double rough) {
  if (!(rough > 0.0)) return 1.0;
  return std::min(1.0, kParticipationLoad * static_cast<double>(ell) / rough);
}

BBTrialResult bb_trial(std::uint32_t n, const BBTrialPlan& plan, RngStream& rng) {
  if (plan.ell < 1) throw ConfigError("ell", "must be at least 1");
  BBTrialResult out;
  out.occupancy.assign(plan.ell, 0);
  out.choices.assign(n, -1);
  for (std::uint32_t i = 0; i < n; ++i) {
    if (auto slot = rng.bb_choice(plan.p, plan.ell)) {
      ++out.occupancy[*slot];
      ++out.participants;
      out.choices[i] = static_cast<std::int32_t>(*slot);
    }
  }
  out.empty = static_cast<std::uint32_t>(std::count(out.occupancy.begin(), out.occupancy.end(), 0u));
  return out;
}

double srcs_final_estimate(std::uint32_t z, std::uint32_t ell, double p) {
  if (ell < 1) throw ConfigError("ell", "must be at least 1");
  if (!(p > 0.0 && p <= 1.0)) throw ConfigError("p", "must lie in (0, 1]");
  if (z > ell) throw ConfigError("z", "exceeds the trial length");
  if (z == 0) throw AllSlotsBusy("every balls-and-bins slot was busy");
  const double l = static_cast<double>(ell);
  const double n = std::log(static_cast<double>(z) / l) / std::log1p(-p / l);
  return n == 0.0 ? 0.0 : n;  // avoid -0.0 at z = l
}

FinalEstimate final_estimate_or_fallback(std::uint32_t z, std::uint32_t ell, double p) {
  if (z > 0) return {srcs_final_estimate(z, ell, p), false};
  if (!(p > 0.0 && p <= 1.0)) throw ConfigError("p", "must lie in (0, 1]");
  const double l = static_cast<double>(ell);
  return {std::log(1.0 / (2.0 * l)) / std::log1p(-p / l), true};
}

EstimateReport t_repetitions_srcs(std::span<const std::uint32_t> active,
                                  const ProtocolConfig& config, const StreamFactory& streams) {
  config.validate();
  const int types = static_cast<int>(active.size());
  EstimateReport report;
  report.phase2_method = Phase2Method::TRepBB;
  report.rough.resize(types);
  report.final_estimate.resize(types);
  report.fallback.assign(types, false);
  report.energy = EnergyLedger(active);

  const std::uint64_t phase1_slots = std::uint64_t{config.m_prime} * config.t_blocks;
  const std::uint64_t window = phase1_slots + 1 + config.ell;

  for (int b = 0; b < types; ++b) {
    const Phase1Result p1 = srcs_phase1(active[b], config, streams, b);
    report.rough[b] = p1.rough;

    const BBTrialPlan plan = BBTrialPlan::from_rough(config.ell, p1.rough);
    RngStream rng = streams.stream(b, Purpose::Phase2, 0);
    const BBTrialResult p2 = bb_trial(active[b], plan, rng);
    const FinalEstimate est = final_estimate_or_fallback(p2.empty, config.ell, plan.p);
    report.final_estimate[b] = est.value;
    report.fallback[b] = est.fallback;

    report.phase1.stage1 += p1.slots;
    report.phase2.stage1 += config.ell;

    for (std::uint32_t i = 0; i < active[b]; ++i) {
      NodeEnergy& node = report.energy.node(b, i);
      node.tx = config.m_prime + (p2.choices[i] >= 0 ? 1 : 0);
      node.rx = 1;
      node.idle = window - node.tx - node.rx;
    }
  }
  report.phase1.recompute_total();
  report.phase2.recompute_total();

  report.ledger = report.phase1;
  report.ledger += report.phase2;
  report.ledger.bp += static_cast<std::uint64_t>(types);
  report.ledger.bp_overhead += static_cast<std::uint64_t>(types);
  report.ledger.recompute_total();

  report.energy.price(config.gamma_tau, config.gamma_rho, config.gamma_iota);
  return report;
}

}  // namespace hetcard::homogeneous
