#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "hetcard/analysis.hpp"
#include "hetcard/core.hpp"
#include "hetcard/harness.hpp"

using namespace hetcard;

namespace {

struct Common {
  int types = 4;
  double eps = 0.03;
  double delta = 0.2;
  std::uint32_t ell = 0;  // 0: tabulated
  std::uint32_t d = 0;
  double q = -1.0;
  std::string counts;  // "1=500,2=800" (1-based types) or "500,800"
  std::uint32_t replicates = 0;
  std::uint64_t seed = 1;
  std::string out;
  bool include_overhead = false;
  unsigned workers = 0;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--T", c.types, "number of node types");
  cmd->add_option("--eps", c.eps, "relative accuracy epsilon");
  cmd->add_option("--delta", c.delta, "failure probability delta");
  cmd->add_option("--ell", c.ell, "phase-2 trial length (default: tabulated)");
  cmd->add_option("--D", c.d, "manufactured devices per type in the activity model");
  cmd->add_option("--q", c.q, "activation probability in the activity model");
  cmd->add_option("--n", c.counts, "fixed active counts, b=count,... or count,...");
  cmd->add_option("--replicates", c.replicates, "Monte-Carlo replicates");
  cmd->add_option("--seed", c.seed, "master seed");
  cmd->add_option("--out", c.out, "CSV output path (default: stdout)");
  cmd->add_flag("--include-overhead", c.include_overhead,
                "count phase-boundary and plan broadcasts in the totals");
  cmd->add_option("--workers", c.workers, "worker threads (0: all cores)");
}

std::vector<std::uint32_t> parse_counts(const std::string& text, int types) {
  std::vector<std::uint32_t> out;
  if (text.empty()) return out;
  std::map<int, std::uint32_t> keyed;
  std::stringstream ss(text);
  std::string item;
  int position = 0;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    const auto eq = item.find('=');
    int b = position + 1;
    std::string value = item;
    if (eq != std::string::npos) {
      b = std::stoi(item.substr(0, eq));
      value = item.substr(eq + 1);
    }
    if (b < 1 || b > types) throw ConfigError("n", "type index out of range: " + item);
    keyed[b] = static_cast<std::uint32_t>(std::stoul(value));
    ++position;
  }
  out.assign(types, 0);
  for (auto [b, v] : keyed) out[b - 1] = v;
  return out;
}

std::vector<double> parse_values(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto colon = item.find(':');
    if (colon == std::string::npos) {
      out.push_back(std::stod(item));
      continue;
    }
    // from:to:step
    const auto second = item.find(':', colon + 1);
    const double from = std::stod(item.substr(0, colon));
    const double to = std::stod(item.substr(colon + 1, second - colon - 1));
    const double step = second == std::string::npos ? 1.0 : std::stod(item.substr(second + 1));
    if (step <= 0) throw ConfigError("values", "step must be positive");
    for (double x = from; x <= to + step * 1e-9; x += step) out.push_back(x);
  }
  return out;
}

void emit(const Common& c, const std::vector<harness::ResultRow>& rows) {
  if (c.out.empty()) {
    harness::write_csv(std::cout, rows);
    return;
  }
  std::ofstream f(c.out, std::ios::binary);
  if (!f) throw Error("cannot open " + c.out);
  harness::write_csv(f, rows);
}

ProtocolConfig config_from(const Common& c) {
  std::vector<std::uint64_t> manufactured(c.types, 1'000'000);
  DeriveOptions opts;
  if (c.ell) opts.ell = c.ell;
  return derive_config(c.eps, c.delta, manufactured, 6, opts);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Per-type cardinality estimation for heterogeneous M2M networks"};
  app.set_config("--config", "", "flat key=value file with flag names as keys");
  app.require_subcommand(1);

  Common c;

  auto* simulate = app.add_subcommand("simulate", "ad-hoc Monte-Carlo run");
  add_common(simulate, c);
  std::string schemes = "HSRC-1,HSRC-2";
  std::string sweep;
  std::string values;
  simulate->add_option("--schemes", schemes, "comma-separated scheme names");
  simulate->add_option("--sweep", sweep, "q, D, T, eps, ell, n1, n2, rough1, rough23");
  simulate->add_option("--values", values, "comma list, or from:to:step");

  auto* figure = app.add_subcommand("figure", "run a figure preset");
  add_common(figure, c);
  std::string preset;
  figure->add_option("name", preset, "preset name")->required();

  auto* zeta = app.add_subcommand("zeta", "threshold table");
  int t_min = 2;
  int t_max = 8;
  zeta->add_option("--t-min", t_min);
  zeta->add_option("--t-max", t_max);
  zeta->add_option("--out", c.out, "also write CSV here");

  auto* analyze = app.add_subcommand("analyze", "closed-form lengths, selection and energy");
  add_common(analyze, c);
  std::string rough_text;
  analyze->add_option("--rough", rough_text, "rough estimates, comma list (default: --n)");

  auto* calibrate = app.add_subcommand("calibrate-ell", "search the phase-2 trial length");
  add_common(calibrate, c);
  std::string grid = "500,1000,2000,5000,10000";
  calibrate->add_option("--grid", grid, "population sizes to calibrate over");

  auto* validate = app.add_subcommand("validate", "empirical accuracy with Wilson intervals");
  add_common(validate, c);
  std::string scheme = "HSRC-1";
  validate->add_option("--scheme", scheme, "HSRC-1, HSRC-2 or TxSRCS");

  CLI11_PARSE(app, argc, argv);

  try {
    if (simulate->parsed()) {
      harness::ExperimentSpec spec;
      std::stringstream ss(schemes);
      std::string name;
      while (std::getline(ss, name, ',')) {
        auto s = harness::parse_scheme(name);
        if (!s) throw ConfigError("schemes", "unknown scheme " + name);
        spec.schemes.push_back(*s);
      }
      spec.types = c.types;
      spec.epsilon = c.eps;
      spec.delta = c.delta;
      if (c.ell) spec.ell = c.ell;
      if (c.d || c.q >= 0.0) spec.activity = ActivityModel{c.d ? c.d : 100, c.q >= 0.0 ? c.q : 0.15};
      spec.counts = parse_counts(c.counts, c.types);
      if (sweep.empty()) {
        spec.sweep_var = harness::SweepVar::T;
        spec.sweep_values = {static_cast<double>(c.types)};
      } else {
        auto v = harness::parse_sweep(sweep);
        if (!v) throw ConfigError("sweep", "unknown sweep variable " + sweep);
        spec.sweep_var = *v;
        spec.sweep_values = parse_values(values);
      }
      spec.replicates = c.replicates ? c.replicates : 500;
      spec.seed = c.seed;
      spec.include_overhead = c.include_overhead;
      spec.workers = c.workers;
      emit(c, harness::run_experiment(spec));
    } else if (figure->parsed()) {
      harness::PresetOptions opts;
      if (c.replicates) opts.replicates = c.replicates;
      opts.seed = c.seed;
      opts.include_overhead = c.include_overhead;
      opts.workers = c.workers;
      emit(c, harness::run_preset(preset, opts));
    } else if (zeta->parsed()) {
      const auto rows = harness::zeta_table(t_min, t_max);
      std::printf("%3s %8s %8s %10s\n", "T", "zeta1", "zeta2", "n1*/l");
      for (const auto& r : rows)
        std::printf("%3d %8.4f %8.4f %10.4f\n", r.types, r.zeta1, r.zeta2, r.crossover);
      if (!c.out.empty()) {
        std::ofstream f(c.out, std::ios::binary);
        f << "T,zeta1,zeta2,n1star_ratio\n";
        for (const auto& r : rows)
          f << r.types << ',' << r.zeta1 << ',' << r.zeta2 << ',' << r.crossover << '\n';
      }
    } else if (analyze->parsed()) {
      const ProtocolConfig cfg = config_from(c);
      const auto counts = parse_counts(c.counts.empty() ? "1000" : c.counts, c.types);
      std::vector<double> n(counts.begin(), counts.end());
      if (c.counts.find(',') == std::string::npos && c.counts.find('=') == std::string::npos)
        n.assign(c.types, n[0]);
      std::vector<double> rough = n;
      if (!rough_text.empty()) rough = parse_values(rough_text);
      if (rough.size() != n.size()) throw ConfigError("rough", "one rough estimate per type");

      const auto kr = analysis::expected_k_r(n, rough, cfg.ell);
      const double l2 = analysis::lambda_II(n, rough, cfg.ell, cfg.slot_width);
      const double l2ss = analysis::lambda_2ss_bb(n, rough, cfg.ell, cfg.slot_width);
      const auto sel = analysis::select_phase2(rough, cfg.ell, cfg.slot_width);
      const auto sel2 = analysis::select_phase2_two_stage(rough, cfg.ell, cfg.slot_width);
      std::printf("T=%d l=%u S_W=%u\n", c.types, cfg.ell, cfg.slot_width);
      std::printf("E(K)=%.3f E(R)=%.3f\n", kr.k, kr.r);
      std::printf("3SSBB=%.3f 2SSBB=%.3f TRepBB=%u\n", l2, l2ss, cfg.ell * c.types);
      std::printf("HSRC-1 phase 2: %s (zone %s)\n", to_string(sel.method), analysis::to_string(sel.zone));
      std::printf("HSRC-2 phase 2: %s\n", to_string(sel2));
      const auto e_bb = analysis::expected_energy_3ss(n, rough, cfg, BlockMode::BallsAndBins);
      const auto e_rep = analysis::expected_energy_trepbb(rough, cfg.ell, cfg.gamma_tau, cfg.gamma_iota);
      for (int b = 0; b < c.types; ++b)
        std::printf("type %d energy: 3SSBB=%.4f TRepBB=%.4f\n", b + 1, e_bb[b].energy, e_rep[b].energy);
    } else if (calibrate->parsed()) {
      std::vector<std::uint32_t> n_grid;
      for (double v : parse_values(grid)) n_grid.push_back(static_cast<std::uint32_t>(v));
      const auto ell = harness::calibrate_ell(c.eps, c.delta, n_grid,
                                              c.replicates ? c.replicates : 300, c.seed);
      std::printf("eps=%g delta=%g ell=%u\n", c.eps, c.delta, ell);
    } else if (validate->parsed()) {
      auto s = harness::parse_scheme(scheme);
      if (!s) throw ConfigError("scheme", "unknown scheme " + scheme);
      const ProtocolConfig cfg = config_from(c);
      std::vector<std::vector<std::uint32_t>> grid_points;
      if (!c.counts.empty()) {
        grid_points.push_back(parse_counts(c.counts, c.types));
      } else {
        for (std::uint32_t v : {500u, 1000u, 1500u, 2000u}) grid_points.emplace_back(c.types, v);
      }
      const auto rows = harness::validate_accuracy(*s, grid_points, cfg,
                                                   c.replicates ? c.replicates : 300, c.seed,
                                                   c.workers);
      std::printf("point,type,n,successes,trials,rate,wilson_low,wilson_high\n");
      for (const auto& r : rows)
        std::printf("%zu,%d,%u,%u,%u,%.4f,%.4f,%.4f\n", r.point, r.type + 1, r.n, r.successes,
                    r.trials, r.rate, r.wilson_low, r.wilson_high);
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
