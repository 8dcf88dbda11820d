#include "hetcard/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <functional>
#include <mutex>
#include <ostream>
#include <thread>

#include "hetcard/analysis.hpp"
#include "hetcard/hetero2ss.hpp"
#include "hetcard/hetero3ss.hpp"
#include "hetcard/homogeneous.hpp"
#include "hetcard/hsrc.hpp"
#include "hetcard/rng.hpp"
#include "hetcard/symbols.hpp"

namespace hetcard::harness {

namespace {

struct SchemeName {
  Scheme scheme;
  const char* name;
};

constexpr SchemeName kSchemeNames[] = {
    {Scheme::HSRC1, "HSRC-1"},
    {Scheme::HSRC2, "HSRC-2"},
    {Scheme::HSRC1_TRepBB, "HSRC-1/TRepBB"},
    {Scheme::HSRC1_SSBB, "HSRC-1/3SSBB"},
    {Scheme::HSRC2_TRepBB, "HSRC-2/TRepBB"},
    {Scheme::HSRC2_SSBB, "HSRC-2/2SSBB"},
    {Scheme::TxSRCS, "TxSRCS"},
    {Scheme::Repeated3SS, "3SS"},
    {Scheme::Repeated2SS, "2SS"},
    {Scheme::Phase2_TRepBB, "TRepBB"},
    {Scheme::Phase2_3SSBB, "3SSBB"},
    {Scheme::Phase2_2SSBB, "2SSBB"},
};

struct SweepNameEntry {
  SweepVar var;
  const char* name;
};

constexpr SweepNameEntry kSweepNames[] = {
    {SweepVar::q, "q"},         {SweepVar::D, "D"},           {SweepVar::T, "T"},
    {SweepVar::epsilon, "eps"}, {SweepVar::ell, "ell"},       {SweepVar::n1, "n1"},
    {SweepVar::n2, "n2"},       {SweepVar::rough1, "rough1"}, {SweepVar::rough23, "rough23"},
};

bool is_phase2_only(Scheme s) {
  return s == Scheme::Phase2_TRepBB || s == Scheme::Phase2_3SSBB || s == Scheme::Phase2_2SSBB;
}

unsigned worker_count(unsigned requested, std::size_t jobs) {
  unsigned w = requested ? requested : std::max(1u, std::thread::hardware_concurrency());
  return static_cast<unsigned>(std::min<std::size_t>(w, std::max<std::size_t>(jobs, 1)));
}

// Runs job(i) for i in [0, jobs) on a small pool. Results must be written by
// index so the outcome does not depend on scheduling.
void parallel_for(std::size_t jobs, unsigned workers, const std::function<void(std::size_t)>& job) {
  workers = worker_count(workers, jobs);
  if (workers <= 1) {
    for (std::size_t i = 0; i < jobs; ++i) job(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto body = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= jobs) return;
      try {
        job(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(jobs);
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) pool.emplace_back(body);
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

// One resolved sweep point.
struct Point {
  int types = 0;
  ProtocolConfig config;
  std::optional<ActivityModel> activity;
  std::vector<std::uint32_t> counts;
  std::vector<double> rough;
};

Point make_point(const ExperimentSpec& spec, double x) {
  Point pt;
  pt.types = spec.types;
  double eps = spec.epsilon;
  std::optional<std::uint32_t> ell = spec.ell;
  pt.activity = spec.activity;
  pt.counts = spec.counts;
  pt.rough = spec.rough;

  switch (spec.sweep_var) {
    case SweepVar::q: pt.activity->activation = x; break;
    case SweepVar::D: pt.activity->total_per_type = static_cast<std::uint32_t>(std::lround(x)); break;
    case SweepVar::T: pt.types = static_cast<int>(std::lround(x)); break;
    case SweepVar::epsilon: eps = x; break;
    case SweepVar::ell: ell = static_cast<std::uint32_t>(std::lround(x)); break;
    default: break;
  }

  if (!pt.activity) {
    const std::uint32_t fill = pt.counts.empty() ? 0 : pt.counts.back();
    pt.counts.resize(pt.types, fill);
    if (pt.rough.empty()) pt.rough.assign(pt.counts.begin(), pt.counts.end());
    pt.rough.resize(pt.types, pt.rough.empty() ? 0.0 : pt.rough.back());
    const auto v = static_cast<std::uint32_t>(std::lround(x));
    switch (spec.sweep_var) {
      case SweepVar::n1: pt.counts[0] = v; pt.rough[0] = v; break;
      case SweepVar::n2: pt.counts[1] = v; pt.rough[1] = v; break;
      case SweepVar::rough1: pt.counts[0] = v; pt.rough[0] = x; break;
      case SweepVar::rough23:
        for (int b = 1; b < pt.types; ++b) {
          pt.counts[b] = v;
          pt.rough[b] = x;
        }
        break;
      default: break;
    }
  }

  std::vector<std::uint64_t> manufactured(pt.types, spec.manufactured);
  DeriveOptions opts;
  opts.ell = ell;
  pt.config = derive_config(eps, spec.delta, manufactured, spec.slot_width, opts);
  pt.config.gamma_tau = spec.gamma_tau;
  pt.config.gamma_rho = spec.gamma_rho;
  pt.config.gamma_iota = spec.gamma_iota;
  return pt;
}

std::vector<std::uint32_t> sample_active(const Point& pt, const StreamFactory& streams) {
  if (!pt.activity) return pt.counts;
  std::vector<std::uint32_t> n(pt.types, 0);
  for (int b = 0; b < pt.types; ++b) {
    RngStream rng = streams.stream(b, Purpose::Activity, 0);
    for (std::uint32_t i = 0; i < pt.activity->total_per_type; ++i)
      n[b] += rng.bernoulli(pt.activity->activation) ? 1 : 0;
  }
  return n;
}

// Phase 2 on its own, fed the given rough estimates.
EstimateReport run_phase2_only(Scheme scheme, std::span<const std::uint32_t> active,
                               std::span<const double> rough, const ProtocolConfig& config,
                               const StreamFactory& streams) {
  const int types = static_cast<int>(active.size());
  EstimateReport report;
  report.rough.assign(rough.begin(), rough.end());
  std::vector<double> p(types);
  for (int b = 0; b < types; ++b)
    p[b] = homogeneous::participation_probability(config.ell, rough[b]);

  std::vector<std::uint32_t> z(types);
  if (scheme == Scheme::Phase2_TRepBB) {
    report.phase2_method = Phase2Method::TRepBB;
    report.energy = EnergyLedger(active);
    for (int b = 0; b < types; ++b) {
      RngStream rng = streams.stream(b, Purpose::Phase2, 0);
      const auto trial = homogeneous::bb_trial(active[b], {config.ell, p[b]}, rng);
      z[b] = trial.empty;
      report.phase2.stage1 += config.ell;
      for (std::uint32_t i = 0; i < active[b]; ++i) {
        NodeEnergy& node = report.energy.node(b, i);
        node.tx = trial.choices[i] >= 0 ? 1 : 0;
        node.idle = config.ell - node.tx;
      }
    }
    report.phase2.recompute_total();
  } else {
    report.phase2_method = Phase2Method::SSBB;
    MultiTypeFrame f = scheme == Scheme::Phase2_3SSBB
                           ? three_stage::run_bb(active, rough, config, streams)
                           : two_stage::run_bb(active, rough, config, streams);
    z = f.statistic;
    report.phase2 = f.ledger;
    report.energy = std::move(f.energy);
  }
  report.final_estimate.resize(types);
  report.fallback.assign(types, false);
  for (int b = 0; b < types; ++b) {
    const auto est = homogeneous::final_estimate_or_fallback(z[b], config.ell, p[b]);
    report.final_estimate[b] = est.value;
    report.fallback[b] = est.fallback;
  }
  report.ledger = report.phase2;
  report.energy.price(config.gamma_tau, config.gamma_rho, config.gamma_iota);
  return report;
}

EstimateReport run_scheme(Scheme scheme, std::span<const std::uint32_t> active,
                          std::span<const double> rough, const ProtocolConfig& config,
                          const StreamFactory& streams) {
  using hsrc::Variant;
  switch (scheme) {
    case Scheme::HSRC1: return hsrc::run_hsrc(Variant::HSRC1, active, config, streams);
    case Scheme::HSRC2: return hsrc::run_hsrc(Variant::HSRC2, active, config, streams);
    case Scheme::HSRC1_TRepBB:
      return hsrc::run_hsrc(Variant::HSRC1, active, config, streams, Phase2Method::TRepBB);
    case Scheme::HSRC1_SSBB:
      return hsrc::run_hsrc(Variant::HSRC1, active, config, streams, Phase2Method::SSBB);
    case Scheme::HSRC2_TRepBB:
      return hsrc::run_hsrc(Variant::HSRC2, active, config, streams, Phase2Method::TRepBB);
    case Scheme::HSRC2_SSBB:
      return hsrc::run_hsrc(Variant::HSRC2, active, config, streams, Phase2Method::SSBB);
    case Scheme::TxSRCS: return hsrc::run_baseline(hsrc::Baseline::TRepSRCS, active, config, streams);
    case Scheme::Repeated3SS:
      return hsrc::run_baseline(hsrc::Baseline::ThreeStageRepeated, active, config, streams);
    case Scheme::Repeated2SS:
      return hsrc::run_baseline(hsrc::Baseline::TwoStageRepeated, active, config, streams);
    default: return run_phase2_only(scheme, active, rough, config, streams);
  }
}

struct Sample {
  SlotLedger ledger;
  std::vector<std::uint32_t> active;
  std::vector<std::uint8_t> success;
  std::vector<double> energy;  // per type mean; NaN if the type had no node
};

bool within(double estimate, std::uint32_t n, double eps) {
  return std::abs(estimate - static_cast<double>(n)) <= eps * static_cast<double>(n);
}

Sample make_sample(const EstimateReport& report, std::vector<std::uint32_t> active, double eps) {
  Sample s;
  s.ledger = report.ledger;
  const int types = static_cast<int>(active.size());
  s.success.resize(types);
  s.energy.resize(types);
  for (int b = 0; b < types; ++b) {
    s.success[b] = within(report.final_estimate[b], active[b], eps) ? 1 : 0;
    s.energy[b] = active[b] ? report.energy.mean_energy(b) : std::nan("");
  }
  s.active = std::move(active);
  return s;
}

ResultRow aggregate(const std::vector<Sample>& samples, bool include_overhead) {
  ResultRow row;
  row.replicates = static_cast<std::uint32_t>(samples.size());
  const double r = static_cast<double>(samples.size());
  const int types = samples.empty() ? 0 : static_cast<int>(samples.front().active.size());

  double sum = 0.0;
  double sum_sq = 0.0;
  std::vector<double> succ(types, 0.0);
  std::vector<double> esum(types, 0.0);
  std::vector<double> ecount(types, 0.0);
  for (const auto& s : samples) {
    const double total =
        static_cast<double>(include_overhead ? s.ledger.total : s.ledger.protocol_total());
    sum += total;
    sum_sq += total * total;
    row.stage1 += static_cast<double>(s.ledger.stage1);
    row.stage2 += static_cast<double>(s.ledger.stage2);
    row.stage3 += static_cast<double>(s.ledger.stage3);
    row.bp += static_cast<double>(include_overhead ? s.ledger.bp : s.ledger.bp - s.ledger.bp_overhead);
    for (int b = 0; b < types; ++b) {
      succ[b] += s.success[b];
      if (!std::isnan(s.energy[b])) {
        esum[b] += s.energy[b];
        ecount[b] += 1.0;
      }
    }
  }
  row.mean_slots = sum / r;
  if (samples.size() > 1) {
    const double var = std::max(0.0, (sum_sq - sum * sum / r) / (r - 1.0));
    row.se_slots = std::sqrt(var / r);
  }
  row.stage1 /= r;
  row.stage2 /= r;
  row.stage3 /= r;
  row.bp /= r;
  row.acc_rate_min = 1.0;
  for (int b = 0; b < types; ++b) row.acc_rate_min = std::min(row.acc_rate_min, succ[b] / r);
  row.energy_mean_per_type.resize(types);
  for (int b = 0; b < types; ++b)
    row.energy_mean_per_type[b] = ecount[b] > 0 ? esum[b] / ecount[b] : 0.0;
  return row;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::vector<double> range(double from, double to, double step) {
  std::vector<double> out;
  for (int i = 0;; ++i) {
    const double x = from + i * step;
    if (x > to + step * 1e-6) break;
    out.push_back(std::round(x * 1e6) / 1e6);
  }
  return out;
}

std::vector<double> powers_of_two(int from_exp, int to_exp) {
  std::vector<double> out;
  for (int e = from_exp; e <= to_exp; ++e) out.push_back(std::ldexp(1.0, e));
  return out;
}

}  // namespace

const char* scheme_name(Scheme scheme) {
  for (const auto& e : kSchemeNames)
    if (e.scheme == scheme) return e.name;
  return "?";
}

std::optional<Scheme> parse_scheme(std::string_view name) {
  for (const auto& e : kSchemeNames)
    if (name == e.name) return e.scheme;
  return std::nullopt;
}

const char* sweep_name(SweepVar var) {
  for (const auto& e : kSweepNames)
    if (e.var == var) return e.name;
  return "?";
}

std::optional<SweepVar> parse_sweep(std::string_view name) {
  for (const auto& e : kSweepNames)
    if (name == e.name) return e.var;
  if (name == "epsilon") return SweepVar::epsilon;
  return std::nullopt;
}

void ExperimentSpec::validate() const {
  if (replicates < 1) throw ConfigError("replicates", "must be at least 1");
  if (schemes.empty()) throw ConfigError("schemes", "no scheme given");
  if (sweep_values.empty()) throw ConfigError("sweep", "empty sweep range");
  if (types < 2 && sweep_var != SweepVar::T) throw ConfigError("T", "at least two node types");
  if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("delta", "must lie in (0, 1)");
  if (slot_width < 1) throw ConfigError("slot_width", "must be positive");
  if (manufactured < 1) throw ConfigError("n_all", "must be positive");

  const bool activity_sweep = sweep_var == SweepVar::q || sweep_var == SweepVar::D;
  if (activity_sweep && !activity)
    throw ConfigError(sweep_name(sweep_var), "sweeping the activity model needs D and q");
  if (!activity && counts.empty()) throw ConfigError("n", "give either D and q or fixed counts");
  if (activity && activity->activation < 0.0) throw ConfigError("q", "must lie in [0, 1]");
  if (activity && activity->activation > 1.0) throw ConfigError("q", "must lie in [0, 1]");

  const bool count_sweep = sweep_var == SweepVar::n1 || sweep_var == SweepVar::n2 ||
                           sweep_var == SweepVar::rough1 || sweep_var == SweepVar::rough23;
  if (count_sweep && activity)
    throw ConfigError(sweep_name(sweep_var), "count sweeps need fixed counts, not D and q");
  if (sweep_var == SweepVar::n2 && types < 2) throw ConfigError("T", "n2 sweep needs two types");

  for (double x : sweep_values) {
    if (!std::isfinite(x)) throw ConfigError(sweep_name(sweep_var), "non-finite sweep value");
    switch (sweep_var) {
      case SweepVar::q:
        if (x < 0.0 || x > 1.0) throw ConfigError("q", "must lie in [0, 1]");
        break;
      case SweepVar::T:
        if (x < 2 || x > kMaxDecodeTypes) throw ConfigError("T", "must lie in [2, 10]");
        break;
      case SweepVar::epsilon:
        if (x <= 0.0 || x >= 1.0) throw ConfigError("eps", "must lie in (0, 1)");
        break;
      default:
        if (x < 0.0) throw ConfigError(sweep_name(sweep_var), "must be non-negative");
        break;
    }
  }
  if (types > kMaxDecodeTypes) throw ConfigError("T", "at most 10 types");
  for (Scheme s : schemes)
    if (is_phase2_only(s) && activity)
      throw ConfigError("schemes", std::string(scheme_name(s)) + " needs fixed counts");
  if (!rough.empty() && rough.size() != counts.size())
    throw ConfigError("rough", "one rough estimate per type");
}

std::vector<ResultRow> run_experiment(const ExperimentSpec& spec) {
  spec.validate();
  std::vector<ResultRow> rows;
  const StreamFactory master(spec.seed);

  for (double x : spec.sweep_values) {
    const Point pt = make_point(spec, x);
    for (Scheme scheme : spec.schemes) {
      std::vector<Sample> samples(spec.replicates);
      parallel_for(spec.replicates, spec.workers, [&](std::size_t r) {
        const StreamFactory streams = master.replicate(r);
        std::vector<std::uint32_t> active = sample_active(pt, streams);
        std::vector<double> rough = pt.rough;
        if (pt.activity) rough.assign(active.begin(), active.end());
        const EstimateReport report = run_scheme(scheme, active, rough, pt.config, streams);
        samples[r] = make_sample(report, std::move(active), pt.config.epsilon);
      });
      ResultRow row = aggregate(samples, spec.include_overhead);
      row.sweep_var = sweep_name(spec.sweep_var);
      row.sweep_value = x;
      row.scheme = scheme_name(scheme);
      if (!spec.label.empty()) row.scheme += spec.label;
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

void write_csv(std::ostream& out, const std::vector<ResultRow>& rows) {
  out << "sweep_var,sweep_value,scheme,replicates,mean_slots,se_slots,stage1,stage2,stage3,bp,"
         "acc_rate_min,energy_mean_per_type\n";
  for (const auto& r : rows) {
    out << r.sweep_var << ',' << fmt(r.sweep_value) << ',' << r.scheme << ',' << r.replicates
        << ',' << fmt(r.mean_slots) << ',' << fmt(r.se_slots) << ',' << fmt(r.stage1) << ','
        << fmt(r.stage2) << ',' << fmt(r.stage3) << ',' << fmt(r.bp) << ','
        << fmt(r.acc_rate_min) << ',';
    for (std::size_t b = 0; b < r.energy_mean_per_type.size(); ++b) {
      if (b) out << ';';
      out << fmt(r.energy_mean_per_type[b]);
    }
    out << '\n';
  }
}

// ---------------------------------------------------------------------------
// Presets

std::vector<std::string> preset_names() {
  return {"fig7a", "fig7b", "fig8a", "fig8b", "fig9a", "fig9b", "fig10", "fig11a", "fig11b",
          "n1-T4", "n1-T5", "baseline-q", "baseline-D"};
}

std::vector<ExperimentSpec> preset_specs(std::string_view name, const PresetOptions& options) {
  ExperimentSpec base;
  base.replicates = options.replicates.value_or(500);
  base.seed = options.seed;
  base.include_overhead = options.include_overhead;
  base.workers = options.workers;

  const std::vector<Scheme> phase1_mix = {Scheme::HSRC1_TRepBB, Scheme::HSRC1_SSBB,
                                          Scheme::HSRC2_TRepBB, Scheme::HSRC2_SSBB};
  const std::vector<Scheme> phase2_only = {Scheme::Phase2_TRepBB, Scheme::Phase2_3SSBB,
                                           Scheme::Phase2_2SSBB};
  const std::vector<Scheme> all_schemes = {Scheme::HSRC2, Scheme::HSRC1, Scheme::TxSRCS,
                                           Scheme::Repeated2SS, Scheme::Repeated3SS};
  std::vector<ExperimentSpec> out;

  if (name == "fig7a" || name == "fig7b") {
    ExperimentSpec s = base;
    s.types = 4;
    s.epsilon = 0.03;
    s.schemes = phase1_mix;
    if (name == "fig7a") {
      s.activity = ActivityModel{1000, 0.1};
      s.sweep_var = SweepVar::q;
      s.sweep_values = range(0.1, 0.9, 0.1);
    } else {
      s.activity = ActivityModel{8, 0.8};
      s.sweep_var = SweepVar::D;
      s.sweep_values = powers_of_two(3, 12);
    }
    out.push_back(s);
  } else if (name == "fig8a" || name == "fig8b" || name == "n1-T4" || name == "n1-T5") {
    const int types = (name == "fig8a" || name == "n1-T4") ? 4 : 5;
    const bool n1 = name.starts_with("n1");
    for (std::uint32_t rest : {500u, 1000u}) {
      ExperimentSpec s = base;
      s.types = types;
      s.epsilon = 0.03;
      s.ell = 3009;
      s.schemes = phase2_only;
      s.counts.assign(types, rest);
      s.sweep_var = n1 ? SweepVar::n1 : SweepVar::n2;
      s.sweep_values = range(500, 3000, 100);
      s.label = "@rest=" + std::to_string(rest);
      out.push_back(s);
    }
  } else if (name == "fig10") {
    for (std::uint32_t n1 : {1500u, 4000u}) {
      ExperimentSpec s = base;
      s.types = 3;
      s.epsilon = 0.03;
      s.ell = 3009;
      s.schemes = {Scheme::Phase2_3SSBB, Scheme::Phase2_TRepBB};
      s.counts = {n1, 1000, 1000};
      s.sweep_var = SweepVar::rough23;
      s.sweep_values = {1000, 2000, 3000, 4000, 4814.4, 5000, 6018, 7000, 8000, 9000, 10000};
      s.label = "@n1=" + std::to_string(n1);
      out.push_back(s);
    }
  } else if (name == "fig11a") {
    ExperimentSpec s = base;
    s.activity = ActivityModel{100, 0.15};
    s.epsilon = 0.03;
    s.schemes = all_schemes;
    s.sweep_var = SweepVar::T;
    s.sweep_values = range(3, 8, 1);
    out.push_back(s);
  } else if (name == "fig11b") {
    ExperimentSpec s = base;
    s.types = 4;
    s.activity = ActivityModel{100, 0.15};
    s.schemes = all_schemes;
    s.sweep_var = SweepVar::epsilon;
    s.sweep_values = {0.02, 0.03, 0.04, 0.05};
    out.push_back(s);
  } else if (name == "baseline-q" || name == "baseline-D") {
    ExperimentSpec s = base;
    s.types = 4;
    s.epsilon = 0.03;
    s.schemes = all_schemes;
    if (name == "baseline-q") {
      s.activity = ActivityModel{100, 0.1};
      s.sweep_var = SweepVar::q;
      s.sweep_values = range(0.1, 0.5, 0.1);
    } else {
      s.activity = ActivityModel{8, 0.15};
      s.sweep_var = SweepVar::D;
      s.sweep_values = powers_of_two(3, 8);
    }
    out.push_back(s);
  } else if (name != "fig9a" && name != "fig9b") {
    throw ConfigError("figure", "unknown preset " + std::string(name));
  }
  return out;
}

std::vector<ResultRow> run_preset(std::string_view name, const PresetOptions& options) {
  std::vector<ResultRow> rows;
  auto scalar_row = [](std::string var, double x, std::string scheme, std::uint32_t reps,
                       double value) {
    ResultRow r;
    r.sweep_var = std::move(var);
    r.sweep_value = x;
    r.scheme = std::move(scheme);
    r.replicates = reps;
    r.mean_slots = value;
    return r;
  };

  if (name == "fig9a") {
    for (const auto& z : zeta_table(2, 8)) {
      rows.push_back(scalar_row("T", z.types, "zeta1", 0, z.zeta1));
      rows.push_back(scalar_row("T", z.types, "zeta2", 0, z.zeta2));
      rows.push_back(scalar_row("T", z.types, "n1star_ratio", 0, z.crossover));
    }
    return rows;
  }
  if (name == "fig9b") {
    const std::uint32_t reps = options.replicates.value_or(100);
    for (double load : {1.6, 2.0}) {
      for (std::uint32_t ell : {1075u, 1674u, 3009u, 6638u}) {
        const double other = load * ell;
        const double ratio = empirical_crossover(ell, {other, other}, reps, options.seed);
        rows.push_back(scalar_row("ell", ell, "n1star_ratio@n23=" + fmt(load) + "l", reps, ratio));
      }
    }
    return rows;
  }
  for (const auto& spec : preset_specs(name, options)) {
    auto part = run_experiment(spec);
    rows.insert(rows.end(), part.begin(), part.end());
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Accuracy, calibration, crossover

Interval wilson_interval(std::uint32_t successes, std::uint32_t trials) {
  if (trials == 0) return {0.0, 1.0};
  constexpr double z = 1.959963984540054;
  const double n = trials;
  const double ph = successes / n;
  const double denom = 1.0 + z * z / n;
  const double centre = (ph + z * z / (2.0 * n)) / denom;
  const double half = z * std::sqrt(ph * (1.0 - ph) / n + z * z / (4.0 * n * n)) / denom;
  return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

std::vector<AccuracyRow> validate_accuracy(Scheme scheme,
                                           const std::vector<std::vector<std::uint32_t>>& grid,
                                           const ProtocolConfig& config, std::uint32_t replicates,
                                           std::uint64_t seed, unsigned workers) {
  if (replicates < 100) throw ConfigError("replicates", "accuracy validation needs at least 100");
  config.validate();
  std::vector<AccuracyRow> out;
  const StreamFactory master(seed);
  for (std::size_t g = 0; g < grid.size(); ++g) {
    const auto& active = grid[g];
    const int types = static_cast<int>(active.size());
    const std::vector<double> rough(active.begin(), active.end());
    std::vector<std::vector<std::uint8_t>> ok(replicates);
    parallel_for(replicates, workers, [&](std::size_t r) {
      const auto report = run_scheme(scheme, active, rough, config, master.replicate(r));
      ok[r].resize(types);
      for (int b = 0; b < types; ++b)
        ok[r][b] = within(report.final_estimate[b], active[b], config.epsilon) ? 1 : 0;
    });
    for (int b = 0; b < types; ++b) {
      AccuracyRow row;
      row.point = g;
      row.type = b;
      row.n = active[b];
      row.trials = replicates;
      for (const auto& v : ok) row.successes += v[b];
      row.rate = static_cast<double>(row.successes) / replicates;
      const Interval ci = wilson_interval(row.successes, row.trials);
      row.wilson_low = ci.low;
      row.wilson_high = ci.high;
      out.push_back(row);
    }
  }
  return out;
}

std::uint32_t calibrate_ell(double epsilon, double delta, const std::vector<std::uint32_t>& n_grid,
                            std::uint32_t replicates, std::uint64_t seed, std::uint32_t m_prime,
                            std::uint32_t t_blocks) {
  if (n_grid.empty() || replicates == 0) return 1;
  ProtocolConfig config;
  config.epsilon = epsilon;
  config.delta = delta;
  config.m_prime = m_prime;
  config.t_blocks = t_blocks;
  const StreamFactory master(seed);

  // The phase-1 estimate does not depend on l, so it is drawn once.
  std::vector<std::vector<double>> rough(n_grid.size(), std::vector<double>(replicates));
  for (std::size_t g = 0; g < n_grid.size(); ++g)
    for (std::uint32_t r = 0; r < replicates; ++r)
      rough[g][r] = homogeneous::srcs_phase1(n_grid[g], config, master.replicate(r), 0).rough;

  const double target = 1.0 - delta;
  auto passes = [&](std::uint32_t ell) {
    for (std::size_t g = 0; g < n_grid.size(); ++g) {
      std::uint32_t hits = 0;
      for (std::uint32_t r = 0; r < replicates; ++r) {
        const double p = homogeneous::participation_probability(ell, rough[g][r]);
        RngStream rng = master.replicate(r).stream(0, Purpose::Phase2, 0);
        const auto trial = homogeneous::bb_trial(n_grid[g], {ell, p}, rng);
        const auto est = homogeneous::final_estimate_or_fallback(trial.empty, ell, p);
        hits += within(est.value, n_grid[g], epsilon) ? 1 : 0;
      }
      if (static_cast<double>(hits) / replicates < target) return false;
    }
    return true;
  };

  std::uint32_t lo = 1;
  std::uint32_t hi = 1u << 17;
  if (!passes(hi)) return hi;
  while (lo < hi) {
    const std::uint32_t mid = lo + (hi - lo) / 2;
    if (passes(mid)) hi = mid;
    else lo = mid + 1;
  }
  return lo;
}

double empirical_crossover(std::uint32_t ell, const std::vector<double>& others,
                           std::uint32_t replicates, std::uint64_t seed) {
  const int types = static_cast<int>(others.size()) + 1;
  ProtocolConfig config;
  config.ell = ell;
  const StreamFactory master(seed);
  const double budget = static_cast<double>(types) * ell;

  // Mean 3-SS-BB length minus T l at n1 = x l, same random numbers for every x.
  auto excess = [&](double x) {
    std::vector<std::uint32_t> active(types);
    std::vector<double> rough(types);
    active[0] = static_cast<std::uint32_t>(std::lround(x * ell));
    rough[0] = active[0];
    for (int b = 1; b < types; ++b) {
      active[b] = static_cast<std::uint32_t>(std::lround(others[b - 1]));
      rough[b] = others[b - 1];
    }
    std::vector<double> totals(replicates);
    parallel_for(replicates, 0, [&](std::size_t r) {
      const auto f = three_stage::run_bb(active, rough, config, master.replicate(r));
      totals[r] = static_cast<double>(f.ledger.protocol_total());
    });
    double sum = 0.0;
    for (double t : totals) sum += t;
    return sum / replicates - budget;
  };

  double lo = 0.05;
  double hi = 2.0;
  if (excess(lo) >= 0.0) return lo;
  if (excess(hi) <= 0.0) return hi;
  for (int it = 0; it < 18; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (excess(mid) < 0.0) lo = mid;
    else hi = mid;
  }
  return 0.5 * (lo + hi);
}

std::vector<ZetaRow> zeta_table(int t_min, int t_max, std::uint32_t ell, std::uint32_t slot_width) {
  std::vector<ZetaRow> rows;
  for (int t = t_min; t <= t_max; ++t) {
    ZetaRow row;
    row.types = t;
    row.zeta1 = analysis::zeta(t, 1);
    row.zeta2 = analysis::zeta(t, 2);
    row.crossover = analysis::crossover_ratio(t, ell, slot_width);
    rows.push_back(row);
  }
  return rows;
}

}  // namespace hetcard::harness
