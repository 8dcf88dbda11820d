#include "hetcard/core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace hetcard {

namespace {

struct EllEntry {
  double epsilon;
  std::uint32_t ell;
};

// Balls-and-bins trial lengths achieving relative error epsilon at delta = 0.2.
constexpr EllEntry kEllTable[] = {
    {0.02, 6638},
    {0.03, 3009},
    {0.04, 1674},
    {0.05, 1075},
};

struct MPrimeEntry {
  double delta;
  std::uint32_t m_prime;
};

constexpr MPrimeEntry kMPrimeTable[] = {
    {0.2, 10},
};

constexpr double kKeyTolerance = 1e-9;

}  // namespace

const char* to_string(SlotOutcome outcome) {
  switch (outcome) {
    case SlotOutcome::Empty: return "E";
    case SlotOutcome::SingleAlpha: return "a";
    case SlotOutcome::SingleBeta: return "b";
    case SlotOutcome::Collision: return "C";
  }
  return "?";
}

const char* to_string(Phase2Method method) {
  return method == Phase2Method::SSBB ? "SSBB" : "TRepBB";
}

SlotOutcome resolve_slot(std::span<const Symbol> symbols) {
  int transmitters = 0;
  Symbol last = Symbol::None;
  for (Symbol s : symbols) {
    if (s == Symbol::None) continue;
    ++transmitters;
    last = s;
    if (transmitters > 1) return SlotOutcome::Collision;
  }
  if (transmitters == 0) return SlotOutcome::Empty;
  return last == Symbol::Alpha ? SlotOutcome::SingleAlpha : SlotOutcome::SingleBeta;
}

bool BlockOutcome::all_collision() const {
  return !slots.empty() && std::all_of(slots.begin(), slots.end(), [](SlotOutcome s) {
    return s == SlotOutcome::Collision;
  });
}

void PopulationSpec::validate() const {
  if (types < 2) throw ConfigError("T", "at least two node types are required");
  if (active.size() != static_cast<std::size_t>(types))
    throw ConfigError("n", "expected one active count per type");
  if (manufactured.size() != static_cast<std::size_t>(types))
    throw ConfigError("n_all", "expected one manufactured count per type");
  for (int b = 0; b < types; ++b) {
    if (active[b] > manufactured[b])
      throw ConfigError("n", "active count exceeds manufactured count for type " +
                                 std::to_string(b + 1));
  }
  if (activity) {
    if (activity->activation < 0.0 || activity->activation > 1.0)
      throw ConfigError("q", "activation probability must lie in [0, 1]");
    for (int b = 0; b < types; ++b) {
      if (activity->total_per_type > manufactured[b])
        throw ConfigError("D", "exceeds manufactured count");
    }
  }
}

PopulationSpec PopulationSpec::fixed(std::vector<std::uint32_t> active,
                                     std::uint64_t manufactured_per_type) {
  PopulationSpec spec;
  spec.types = static_cast<int>(active.size());
  spec.manufactured.assign(active.size(), manufactured_per_type);
  spec.active = std::move(active);
  return spec;
}

void ProtocolConfig::validate() const {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw ConfigError("eps", "must lie in (0, 1)");
  if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("delta", "must lie in (0, 1)");
  if (ell < 1) throw ConfigError("ell", "must be at least 1");
  if (m_prime < 1) throw ConfigError("m_prime", "must be at least 1");
  if (m_lof < 1) throw ConfigError("m_lof", "must be at least 1");
  if (t_blocks < 1 || t_blocks > 64) throw ConfigError("t_T", "must lie in [1, 64]");
  if (slot_width < 1) throw ConfigError("s_w", "must be at least 1");
  if (gamma_tau < 0 || gamma_rho < 0 || gamma_iota < 0)
    throw ConfigError("gamma", "energies must be non-negative");
}

std::optional<std::uint32_t> tabulated_ell(double epsilon) {
  for (const auto& e : kEllTable)
    if (std::abs(e.epsilon - epsilon) < kKeyTolerance) return e.ell;
  return std::nullopt;
}

std::optional<std::uint32_t> tabulated_m_prime(double delta) {
  for (const auto& e : kMPrimeTable)
    if (std::abs(e.delta - delta) < kKeyTolerance) return e.m_prime;
  return std::nullopt;
}

std::uint32_t ceil_log2(std::uint64_t n) {
  std::uint32_t t = 0;
  while (t < 64 && (std::uint64_t{1} << t) < n) ++t;
  return std::max<std::uint32_t>(t, 1);
}

double erf_inv(double y) {
  if (!(y > -1.0 && y < 1.0)) {
    if (y == 1.0) return std::numeric_limits<double>::infinity();
    if (y == -1.0) return -std::numeric_limits<double>::infinity();
    return std::numeric_limits<double>::quiet_NaN();
  }
  if (y == 0.0) return 0.0;
  // Starting point from the logarithmic approximation, polished by Newton
  // steps on erf(x) - y.
  constexpr double a = 0.147;
  const double ln = std::log(1.0 - y * y);
  const double term = 2.0 / (std::numbers::pi * a) + ln / 2.0;
  double x = std::copysign(std::sqrt(std::sqrt(term * term - ln / a) - term), y);
  const double scale = 2.0 / std::sqrt(std::numbers::pi);
  for (int i = 0; i < 6; ++i) {
    const double err = std::erf(x) - y;
    const double deriv = scale * std::exp(-x * x);
    const double step = err / deriv;
    // Halley correction
    x -= step / (1.0 + x * step);
    if (std::abs(step) < 1e-16 * std::max(1.0, std::abs(x))) break;
  }
  return x;
}

std::uint32_t lof_trial_count(double epsilon, double delta) {
  const double c = std::numbers::sqrt2 * erf_inv(1.0 - delta);
  const double lower = -1.1213 * c / std::log2(1.0 - epsilon);
  const double upper = 1.1213 * c / std::log2(1.0 + epsilon);
  return static_cast<std::uint32_t>(std::ceil(std::max(lower * lower, upper * upper)));
}

ProtocolConfig derive_config(double epsilon, double delta,
                             std::span<const std::uint64_t> manufactured,
                             std::uint32_t slot_width, const DeriveOptions& options) {
  if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("delta", "must lie in (0, 1)");
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw ConfigError("eps", "must lie in (0, 1)");
  if (manufactured.empty()) throw ConfigError("n_all", "no node types given");

  ProtocolConfig config;
  config.epsilon = epsilon;
  config.delta = delta;
  config.slot_width = slot_width;

  if (options.ell) {
    config.ell = *options.ell;
  } else if (auto ell = tabulated_ell(epsilon)) {
    config.ell = *ell;
  } else {
    throw UnknownAccuracyKey("no tabulated trial length for epsilon = " +
                             std::to_string(epsilon) + "; run calibrate-ell");
  }

  if (options.m_prime) {
    config.m_prime = *options.m_prime;
  } else if (auto m = tabulated_m_prime(delta)) {
    config.m_prime = *m;
  } else {
    throw UnknownAccuracyKey("no tabulated phase-1 repetition count for delta = " +
                             std::to_string(delta));
  }

  config.m_lof = lof_trial_count(epsilon, delta);
  config.t_blocks = ceil_log2(*std::max_element(manufactured.begin(), manufactured.end()));
  config.validate();
  return config;
}

SlotLedger& SlotLedger::operator+=(const SlotLedger& other) {
  stage1 += other.stage1;
  stage2 += other.stage2;
  stage3 += other.stage3;
  bp += other.bp;
  bp_overhead += other.bp_overhead;
  total += other.total;
  return *this;
}

EnergyLedger::EnergyLedger(std::span<const std::uint32_t> active) {
  nodes_.resize(active.size());
  for (std::size_t b = 0; b < active.size(); ++b) {
    nodes_[b].resize(active[b]);
    for (auto& n : nodes_[b]) n.type = static_cast<int>(b);
  }
}

void EnergyLedger::close_window(std::uint64_t window) {
  for (auto& type_nodes : nodes_) {
    for (auto& n : type_nodes) {
      if (n.tx + n.rx > window) throw Error("energy ledger: busy slots exceed the window");
      n.idle = window - n.tx - n.rx;
    }
  }
}

void EnergyLedger::append(const EnergyLedger& other) {
  if (nodes_.empty()) {
    *this = other;
    return;
  }
  if (other.nodes_.size() != nodes_.size()) throw Error("energy ledger: type count mismatch");
  for (std::size_t b = 0; b < nodes_.size(); ++b) {
    if (other.nodes_[b].size() != nodes_[b].size())
      throw Error("energy ledger: population mismatch");
    for (std::size_t i = 0; i < nodes_[b].size(); ++i) {
      nodes_[b][i].tx += other.nodes_[b][i].tx;
      nodes_[b][i].rx += other.nodes_[b][i].rx;
      nodes_[b][i].idle += other.nodes_[b][i].idle;
      nodes_[b][i].energy += other.nodes_[b][i].energy;
    }
  }
}

void EnergyLedger::price(double gamma_tau, double gamma_rho, double gamma_iota) {
  for (auto& type_nodes : nodes_)
    for (auto& n : type_nodes)
      n.energy = static_cast<double>(n.tx) * gamma_tau + static_cast<double>(n.rx) * gamma_rho +
                 static_cast<double>(n.idle) * gamma_iota;
}

namespace {

template <typename F>
double mean_over(const std::vector<NodeEnergy>& nodes, F field) {
  if (nodes.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& n : nodes) sum += field(n);
  return sum / static_cast<double>(nodes.size());
}

}  // namespace

double EnergyLedger::mean_energy(int type) const {
  return mean_over(nodes_[type], [](const NodeEnergy& n) { return n.energy; });
}
double EnergyLedger::mean_tx(int type) const {
  return mean_over(nodes_[type], [](const NodeEnergy& n) { return double(n.tx); });
}
double EnergyLedger::mean_rx(int type) const {
  return mean_over(nodes_[type], [](const NodeEnergy& n) { return double(n.rx); });
}
double EnergyLedger::mean_idle(int type) const {
  return mean_over(nodes_[type], [](const NodeEnergy& n) { return double(n.idle); });
}

PresenceSets::PresenceSets(int types, std::size_t blocks)
    : blocks_(blocks),
      hits_(static_cast<std::size_t>(types), std::vector<std::uint8_t>(blocks, 0)),
      bp_bits_(blocks, 0) {}

std::size_t PresenceSets::size(int type) const {
  return static_cast<std::size_t>(std::count(hits_[type].begin(), hits_[type].end(), 1));
}

std::vector<std::size_t> PresenceSets::members(int type) const {
  std::vector<std::size_t> out;
  for (std::size_t h = 0; h < blocks_; ++h)
    if (hits_[type][h]) out.push_back(h + 1);
  return out;
}

std::uint32_t PresenceSets::first_absent(int type) const {
  for (std::size_t h = 0; h < blocks_; ++h)
    if (!hits_[type][h]) return static_cast<std::uint32_t>(h + 1);
  return static_cast<std::uint32_t>(blocks_);
}

}  // namespace hetcard
