#include "hetcard/hsrc.hpp"

#include <vector>

#include "hetcard/analysis.hpp"
#include "hetcard/frame.hpp"
#include "hetcard/hetero2ss.hpp"
#include "hetcard/hetero3ss.hpp"
#include "hetcard/homogeneous.hpp"

namespace hetcard::hsrc {

const char* to_string(Variant variant) {
  return variant == Variant::HSRC1 ? "HSRC-1" : "HSRC-2";
}

const char* to_string(Baseline baseline) {
  switch (baseline) {
    case Baseline::ThreeStageRepeated: return "3SS";
    case Baseline::TwoStageRepeated: return "2SS";
    case Baseline::TRepSRCS: return "TxSRCS";
  }
  return "?";
}

namespace {

using TrialFn = MultiTypeFrame (*)(std::span<const std::uint32_t>, const ProtocolConfig&,
                                   const StreamFactory&, std::uint64_t);

struct RepeatedTrials {
  std::vector<std::vector<std::uint32_t>> j;  // per type
  SlotLedger ledger;
  EnergyLedger energy;
};

RepeatedTrials repeat_trials(TrialFn trial, std::span<const std::uint32_t> active,
                             const ProtocolConfig& config, const StreamFactory& streams,
                             std::uint32_t count) {
  RepeatedTrials out;
  out.j.resize(active.size());
  out.energy = EnergyLedger(active);
  for (std::uint32_t m = 0; m < count; ++m) {
    MultiTypeFrame f = trial(active, config, streams, m);
    for (std::size_t b = 0; b < active.size(); ++b) out.j[b].push_back(f.statistic[b]);
    out.ledger += f.ledger;
    out.energy.append(f.energy);
  }
  return out;
}

}  // namespace

EstimateReport run_hsrc(Variant variant, std::span<const std::uint32_t> active,
                        const ProtocolConfig& config, const StreamFactory& streams,
                        std::optional<Phase2Method> phase2_override) {
  config.validate();
  const int types = static_cast<int>(active.size());
  if (types < 2) throw ConfigError("T", "at least two node types are required");

  const TrialFn trial = variant == Variant::HSRC1 ? &three_stage::run_trial : &two_stage::run_trial;
  RepeatedTrials p1 = repeat_trials(trial, active, config, streams, config.m_prime);

  EstimateReport report;
  report.rough.resize(types);
  for (int b = 0; b < types; ++b) report.rough[b] = homogeneous::lof_estimate(p1.j[b]);
  report.phase1 = p1.ledger;
  report.energy = std::move(p1.energy);

  const std::uint64_t boundary = boundary_slots(types, config.t_blocks, config.slot_width);
  for (int b = 0; b < types; ++b)
    for (std::size_t i = 0; i < report.energy.count(b); ++i) report.energy.node(b, i).rx += boundary;

  if (phase2_override) {
    report.phase2_method = *phase2_override;
  } else if (variant == Variant::HSRC1) {
    report.phase2_method = analysis::select_phase2(report.rough, config.ell, config.slot_width).method;
  } else {
    report.phase2_method =
        analysis::select_phase2_two_stage(report.rough, config.ell, config.slot_width);
  }

  std::vector<double> p(types);
  for (int b = 0; b < types; ++b)
    p[b] = homogeneous::participation_probability(config.ell, report.rough[b]);

  std::vector<std::uint32_t> z(types);
  EnergyLedger phase2_energy(active);
  if (report.phase2_method == Phase2Method::TRepBB) {
    for (int b = 0; b < types; ++b) {
      RngStream rng = streams.stream(b, Purpose::Phase2, 0);
      const auto trial_b = homogeneous::bb_trial(active[b], {config.ell, p[b]}, rng);
      z[b] = trial_b.empty;
      report.phase2.stage1 += config.ell;
      for (std::uint32_t i = 0; i < active[b]; ++i) {
        NodeEnergy& node = phase2_energy.node(b, i);
        node.tx = trial_b.choices[i] >= 0 ? 1 : 0;
        node.idle = config.ell - node.tx;
      }
    }
    report.phase2.recompute_total();
  } else {
    MultiTypeFrame f = variant == Variant::HSRC1
                           ? three_stage::run_bb(active, report.rough, config, streams)
                           : two_stage::run_bb(active, report.rough, config, streams);
    z = f.statistic;
    report.phase2 = f.ledger;
    phase2_energy = std::move(f.energy);
  }
  report.energy.append(phase2_energy);

  report.final_estimate.resize(types);
  report.fallback.assign(types, false);
  for (int b = 0; b < types; ++b) {
    const auto est = homogeneous::final_estimate_or_fallback(z[b], config.ell, p[b]);
    report.final_estimate[b] = est.value;
    report.fallback[b] = est.fallback;
  }

  report.ledger = report.phase1;
  report.ledger += report.phase2;
  report.ledger.bp += boundary;
  report.ledger.bp_overhead += boundary;
  report.ledger.recompute_total();

  report.energy.price(config.gamma_tau, config.gamma_rho, config.gamma_iota);
  return report;
}

EstimateReport run_baseline(Baseline baseline, std::span<const std::uint32_t> active,
                            const ProtocolConfig& config, const StreamFactory& streams) {
  if (baseline == Baseline::TRepSRCS)
    return homogeneous::t_repetitions_srcs(active, config, streams);

  config.validate();
  const int types = static_cast<int>(active.size());
  const TrialFn trial =
      baseline == Baseline::ThreeStageRepeated ? &three_stage::run_trial : &two_stage::run_trial;
  RepeatedTrials r = repeat_trials(trial, active, config, streams, config.m_lof);

  EstimateReport report;
  report.rough.resize(types);
  for (int b = 0; b < types; ++b) report.rough[b] = homogeneous::lof_estimate(r.j[b]);
  report.final_estimate = report.rough;
  report.fallback.assign(types, false);
  report.phase1 = r.ledger;
  report.ledger = r.ledger;
  report.energy = std::move(r.energy);
  report.energy.price(config.gamma_tau, config.gamma_rho, config.gamma_iota);
  return report;
}

}  // namespace hetcard::hsrc
