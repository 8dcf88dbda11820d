#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "hetcard/core.hpp"

namespace hetcard {

/// Per-type node count in one block, saturated at two: 0, 1, or "2 or more".
/// The channel cannot tell 2 from 3 transmitters, so outcomes depend on
/// counts only through this category.
using Category = std::uint8_t;

inline Category category_of(std::uint32_t count) {
  return static_cast<Category>(count < 2 ? count : 2);
}

/// Which symbol each node type sends in each slot of a block. Types and
/// slots are 0-based here; type 0 is T_1.
class SymbolMatrix {
 public:
  SymbolMatrix() = default;
  SymbolMatrix(int types, int slots);

  int types() const { return types_; }
  int slots() const { return slots_; }

  Symbol at(int type, int slot) const { return cells_[type * slots_ + slot]; }
  void set(int type, int slot, Symbol symbol) { cells_[type * slots_ + slot] = symbol; }

  /// Number of slots in which a node of `type` transmits.
  int transmissions(int type) const;

  BlockOutcome outcome(std::span<const Category> categories) const;
  /// Base-4 encoding of outcome(categories), slot 0 least significant.
  std::uint32_t outcome_code(std::span<const Category> categories) const;

  bool operator==(const SymbolMatrix&) const = default;

 private:
  int types_ = 0;
  int slots_ = 0;
  std::vector<Symbol> cells_;
};

std::uint32_t encode_outcome(const BlockOutcome& outcome);

/// 3-SS: T_1 sends alpha in all T-1 slots, T_b (b >= 2) sends beta in slot b-1.
SymbolMatrix build_sym3_matrix(int types);

/// eta_T = T/2 for even T, (T-1)/2 for odd T.
int sym2_eta(int types);
/// Slots per 2-SS block; T <= 3 falls back to the 3-SS layout of T-1 slots.
int sym2_slots(int types);

/// 2-SS: types 1..eta send alpha prefixes of growing length, the next types
/// send beta suffixes of growing length, and for odd T the last type sends
/// beta in the first slot and alpha in the last. T = 2, 3 use the 3-SS matrix.
SymbolMatrix build_sym2_matrix(int types);

enum class Presence : std::uint8_t { Absent, Present, Ambiguous };

const char* to_string(Presence presence);

struct BlockDecode {
  std::vector<Presence> verdicts;
  /// Every category vector that reproduces the outcome.
  std::vector<std::vector<Category>> scenarios;

  bool ambiguous() const;
};

/// Largest type count whose blocks can be decoded (3^T scenarios are
/// enumerated up front).
inline constexpr int kMaxDecodeTypes = 10;

/// Decodes block outcomes by consistency enumeration: a scenario (one
/// category per type) is consistent if it reproduces every slot; a type is
/// Ambiguous when consistent scenarios disagree on its presence.
class BlockDecoder {
 public:
  explicit BlockDecoder(SymbolMatrix matrix);

  const SymbolMatrix& matrix() const { return matrix_; }

  /// Throws InconsistentOutcome if no scenario matches.
  const BlockDecode& decode(const BlockOutcome& outcome) const;
  const BlockDecode& decode_code(std::uint32_t code) const;

 private:
  SymbolMatrix matrix_;
  std::vector<std::int32_t> index_;
  std::vector<BlockDecode> entries_;
};

enum class Scheme : std::uint8_t { ThreeStage, TwoStage };

/// Process-wide decoder for the scheme's matrix with `types` types. Built on
/// first use; safe to call from several threads.
const BlockDecoder& shared_decoder(Scheme scheme, int types);

}  // namespace hetcard
