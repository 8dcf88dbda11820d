#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hetcard/core.hpp"

/// Monte-Carlo experiment driver, figure presets, accuracy validation and
/// trial-length calibration.
namespace hetcard::harness {

enum class Scheme : std::uint8_t {
  HSRC1,
  HSRC2,
  HSRC1_TRepBB,
  HSRC1_SSBB,
  HSRC2_TRepBB,
  HSRC2_SSBB,
  TxSRCS,
  Repeated3SS,
  Repeated2SS,
  // phase 2 alone, fed the rough estimates of the sweep point
  Phase2_TRepBB,
  Phase2_3SSBB,
  Phase2_2SSBB,
};

const char* scheme_name(Scheme scheme);
std::optional<Scheme> parse_scheme(std::string_view name);

enum class SweepVar : std::uint8_t { q, D, T, epsilon, ell, n1, n2, rough1, rough23 };

const char* sweep_name(SweepVar var);
std::optional<SweepVar> parse_sweep(std::string_view name);

struct ExperimentSpec {
  std::string label;  // appended to scheme names in the output, may be empty
  std::vector<Scheme> schemes;
  SweepVar sweep_var = SweepVar::q;
  std::vector<double> sweep_values;

  int types = 4;
  double epsilon = 0.03;
  double delta = 0.2;
  std::optional<std::uint32_t> ell;  // overrides the tabulated value
  std::uint64_t manufactured = 1'000'000;  // n_{b,all}, fixes t_T
  std::uint32_t slot_width = 6;
  double gamma_tau = 1.0;
  double gamma_rho = 0.5;
  double gamma_iota = 0.05;

  /// Either an activity model (D, q) sampled per replicate, or fixed counts.
  std::optional<ActivityModel> activity;
  std::vector<std::uint32_t> counts;
  /// Rough estimates for the phase-2-only schemes; defaults to the counts.
  std::vector<double> rough;

  std::uint32_t replicates = 500;
  std::uint64_t seed = 1;
  bool include_overhead = false;
  unsigned workers = 0;  // 0: one per hardware thread

  /// Throws ConfigError naming the offending field.
  void validate() const;
};

struct ResultRow {
  std::string sweep_var;
  double sweep_value = 0.0;
  std::string scheme;
  std::uint32_t replicates = 0;
  double mean_slots = 0.0;
  double se_slots = 0.0;
  double stage1 = 0.0;
  double stage2 = 0.0;
  double stage3 = 0.0;
  double bp = 0.0;
  double acc_rate_min = 1.0;
  std::vector<double> energy_mean_per_type;
};

std::vector<ResultRow> run_experiment(const ExperimentSpec& spec);

void write_csv(std::ostream& out, const std::vector<ResultRow>& rows);

struct PresetOptions {
  std::optional<std::uint32_t> replicates;
  std::uint64_t seed = 1;
  bool include_overhead = false;
  unsigned workers = 0;
};

std::vector<std::string> preset_names();
/// Experiment specs behind a simulation preset (empty for the analytic ones).
std::vector<ExperimentSpec> preset_specs(std::string_view name, const PresetOptions& options);
std::vector<ResultRow> run_preset(std::string_view name, const PresetOptions& options);

struct AccuracyRow {
  std::size_t point = 0;  // index into the population grid
  int type = 0;           // 0-based
  std::uint32_t n = 0;
  std::uint32_t successes = 0;
  std::uint32_t trials = 0;
  double rate = 0.0;
  double wilson_low = 0.0;
  double wilson_high = 0.0;
};

struct Interval {
  double low = 0.0;
  double high = 0.0;
};

/// 95% Wilson score interval.
Interval wilson_interval(std::uint32_t successes, std::uint32_t trials);

/// Empirical P(|n_hat - n| <= eps n) per type at each grid population.
/// Needs at least 100 replicates.
std::vector<AccuracyRow> validate_accuracy(Scheme scheme,
                                           const std::vector<std::vector<std::uint32_t>>& grid,
                                           const ProtocolConfig& config, std::uint32_t replicates,
                                           std::uint64_t seed = 1, unsigned workers = 0);

/// Smallest l whose SRC_S accuracy reaches 1 - delta at every n of the grid,
/// found by binary search with the same random numbers at every l.
std::uint32_t calibrate_ell(double epsilon, double delta, const std::vector<std::uint32_t>& n_grid,
                            std::uint32_t replicates, std::uint64_t seed = 1,
                            std::uint32_t m_prime = 10, std::uint32_t t_blocks = 20);

/// Empirical n1*/l for T-type 3-SS-BB: the T_1 load where the mean phase-2
/// length equals T l, with the other types fixed at `others` (n = rough).
double empirical_crossover(std::uint32_t ell, const std::vector<double>& others,
                           std::uint32_t replicates, std::uint64_t seed = 1);

struct ZetaRow {
  int types = 0;
  double zeta1 = 0.0;
  double zeta2 = 0.0;
  double crossover = 0.0;  // analytic n1*/l with the other types saturated
};

std::vector<ZetaRow> zeta_table(int t_min, int t_max, std::uint32_t ell = 3009,
                                std::uint32_t slot_width = 6);

}  // namespace hetcard::harness
