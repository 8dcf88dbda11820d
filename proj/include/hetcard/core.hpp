#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

/// Shared domain types for the heterogeneous cardinality estimators: slot
/// outcomes, protocol parameters, slot and energy ledgers, estimate reports.
namespace hetcard {

// ---------------------------------------------------------------------------
// Errors

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Requested epsilon or delta has no tabulated parameter and none was supplied.
class UnknownAccuracyKey : public Error {
 public:
  using Error::Error;
};

class EmptyInput : public Error {
 public:
  using Error::Error;
};

/// Every slot of a balls-and-bins trial was busy, so ln(z/l) is undefined.
class AllSlotsBusy : public Error {
 public:
  using Error::Error;
};

/// No population scenario reproduces an observed block outcome. Only a
/// simulator bug can produce this.
class InconsistentOutcome : public Error {
 public:
  using Error::Error;
};

class NoBracket : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  ConfigError(std::string field, const std::string& what)
      : Error(field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

// ---------------------------------------------------------------------------
// Channel model

enum class Symbol : std::uint8_t { None, Alpha, Beta };

enum class SlotOutcome : std::uint8_t { Empty, SingleAlpha, SingleBeta, Collision };

const char* to_string(SlotOutcome outcome);

/// Ideal channel: zero transmitters is Empty, one is a success carrying its
/// symbol, two or more always collide. `None` entries are ignored.
SlotOutcome resolve_slot(std::span<const Symbol> symbols);

struct BlockOutcome {
  std::vector<SlotOutcome> slots;

  bool all_collision() const;
  bool operator==(const BlockOutcome&) const = default;
};

// ---------------------------------------------------------------------------
// Population and parameters

/// Activity model: each of `total_per_type` nodes of every type is active
/// independently with probability `activation`.
struct ActivityModel {
  std::uint32_t total_per_type = 0;
  double activation = 0.0;
};

struct PopulationSpec {
  int types = 0;
  std::vector<std::uint32_t> active;        // n_b
  std::vector<std::uint64_t> manufactured;  // n_{b,all}
  std::optional<ActivityModel> activity;

  /// Validates the invariants; throws ConfigError.
  void validate() const;

  static PopulationSpec fixed(std::vector<std::uint32_t> active,
                              std::uint64_t manufactured_per_type);
};

enum class Phase2Method : std::uint8_t { TRepBB, SSBB };

const char* to_string(Phase2Method method);

struct ProtocolConfig {
  double epsilon = 0.03;
  double delta = 0.2;
  std::uint32_t ell = 3009;       // phase-2 trial length
  std::uint32_t m_prime = 10;     // phase-1 repetitions
  std::uint32_t m_lof = 1;        // LoF repetitions for standalone accuracy
  std::uint32_t t_blocks = 20;    // t_T
  std::uint32_t slot_width = 6;   // S_W, bits per slot
  double gamma_tau = 1.0;
  double gamma_rho = 0.5;
  double gamma_iota = 0.05;

  void validate() const;
};

struct DeriveOptions {
  std::optional<std::uint32_t> ell;      // calibrated value for an untabulated epsilon
  std::optional<std::uint32_t> m_prime;  // for an untabulated delta
};

/// Looks up l and M' from the published tables, evaluates the LoF repetition
/// count M, and sets t_T from the largest manufactured count.
ProtocolConfig derive_config(double epsilon, double delta,
                             std::span<const std::uint64_t> manufactured,
                             std::uint32_t slot_width,
                             const DeriveOptions& options = {});

std::optional<std::uint32_t> tabulated_ell(double epsilon);
std::optional<std::uint32_t> tabulated_m_prime(double delta);

/// ceil(log2(n)), at least 1.
std::uint32_t ceil_log2(std::uint64_t n);

/// Minimum LoF trial count for (epsilon, delta).
std::uint32_t lof_trial_count(double epsilon, double delta);

/// Inverse of the Gauss error function on (-1, 1).
double erf_inv(double y);

inline std::uint64_t ceil_div(std::uint64_t a, std::uint64_t b) {
  return (a + b - 1) / b;
}

// ---------------------------------------------------------------------------
// Ledgers

/// Exact slot counts of one protocol run. `bp` holds every broadcast-packet
/// slot; `bp_overhead` is the part of `bp` spent on signalling that the
/// published slot totals do not include (phase-boundary broadcasts, 2-SS plan
/// announcements).
struct SlotLedger {
  std::uint64_t stage1 = 0;
  std::uint64_t stage2 = 0;
  std::uint64_t stage3 = 0;
  std::uint64_t bp = 0;
  std::uint64_t bp_overhead = 0;
  std::uint64_t total = 0;

  void recompute_total() { total = stage1 + stage2 + stage3 + bp; }
  bool consistent() const {
    return total == stage1 + stage2 + stage3 + bp && bp_overhead <= bp;
  }
  std::uint64_t protocol_total() const { return total - bp_overhead; }

  SlotLedger& operator+=(const SlotLedger& other);
};

struct NodeEnergy {
  int type = 0;
  std::uint64_t tx = 0;
  std::uint64_t rx = 0;
  std::uint64_t idle = 0;
  double energy = 0.0;

  std::uint64_t window() const { return tx + rx + idle; }
};

/// Per active node radio-state slot counts. A node's window is the span of
/// slots it is scheduled over: the whole frame, except under T-Rep-BB where a
/// node only stays awake for its own type's trial.
class EnergyLedger {
 public:
  EnergyLedger() = default;
  explicit EnergyLedger(std::span<const std::uint32_t> active);

  int types() const { return static_cast<int>(nodes_.size()); }
  std::size_t count(int type) const { return nodes_[type].size(); }
  NodeEnergy& node(int type, std::size_t index) { return nodes_[type][index]; }
  const NodeEnergy& node(int type, std::size_t index) const { return nodes_[type][index]; }
  std::span<const NodeEnergy> nodes(int type) const { return nodes_[type]; }

  /// Fills idle slots so every node's window equals `window`.
  void close_window(std::uint64_t window);
  /// Adds `other` node-wise; both ledgers must cover the same population.
  void append(const EnergyLedger& other);
  void price(double gamma_tau, double gamma_rho, double gamma_iota);

  double mean_energy(int type) const;
  double mean_tx(int type) const;
  double mean_rx(int type) const;
  double mean_idle(int type) const;

 private:
  std::vector<std::vector<NodeEnergy>> nodes_;
};

// ---------------------------------------------------------------------------
// Presence sets

/// Base-station knowledge after a multi-type trial: for every type, which
/// stage-1 blocks carried at least one of its nodes, plus the BP1 bitmap.
class PresenceSets {
 public:
  PresenceSets() = default;
  PresenceSets(int types, std::size_t blocks);

  int types() const { return static_cast<int>(hits_.size()); }
  std::size_t blocks() const { return blocks_; }

  /// Blocks are 1-based.
  bool contains(int type, std::size_t block) const { return hits_[type][block - 1] != 0; }
  void insert(int type, std::size_t block) { hits_[type][block - 1] = 1; }
  std::size_t size(int type) const;
  std::vector<std::size_t> members(int type) const;

  bool bp_bit(std::size_t block) const { return bp_bits_[block - 1] != 0; }
  void set_bp_bit(std::size_t block) { bp_bits_[block - 1] = 1; }

  /// Smallest block absent from I_b, or the last block if all are present.
  std::uint32_t first_absent(int type) const;

  bool same_sets(const PresenceSets& other) const { return hits_ == other.hits_; }

 private:
  std::size_t blocks_ = 0;
  std::vector<std::vector<std::uint8_t>> hits_;
  std::vector<std::uint8_t> bp_bits_;
};

// ---------------------------------------------------------------------------
// Reports

struct EstimateReport {
  std::vector<double> rough;
  std::vector<double> final_estimate;
  std::vector<bool> fallback;  // per type: z_b was 0 and the pseudo-count was used
  Phase2Method phase2_method = Phase2Method::TRepBB;
  SlotLedger phase1;
  SlotLedger phase2;
  SlotLedger ledger;  // everything, including phase-boundary broadcasts
  EnergyLedger energy;
};

}  // namespace hetcard
