#include "hetcard/symbols.hpp"

#include <algorithm>
#include <map>
#include <memory>
#include <mutex>
#include <string>

namespace hetcard {

SymbolMatrix::SymbolMatrix(int types, int slots)
    : types_(types),
      slots_(slots),
      cells_(static_cast<std::size_t>(types) * static_cast<std::size_t>(slots), Symbol::None) {}

int SymbolMatrix::transmissions(int type) const {
  int n = 0;
  for (int s = 0; s < slots_; ++s)
    if (at(type, s) != Symbol::None) ++n;
  return n;
}

namespace {

SlotOutcome slot_outcome(const SymbolMatrix& m, int slot, std::span<const Category> categories) {
  int load = 0;
  Symbol single = Symbol::None;
  for (int b = 0; b < m.types(); ++b) {
    const Symbol sym = m.at(b, slot);
    if (sym == Symbol::None || categories[b] == 0) continue;
    load += categories[b];
    single = sym;
    if (load >= 2) return SlotOutcome::Collision;
  }
  if (load == 0) return SlotOutcome::Empty;
  return single == Symbol::Alpha ? SlotOutcome::SingleAlpha : SlotOutcome::SingleBeta;
}

}  // namespace

BlockOutcome SymbolMatrix::outcome(std::span<const Category> categories) const {
  BlockOutcome out;
  out.slots.reserve(static_cast<std::size_t>(slots_));
  for (int s = 0; s < slots_; ++s) out.slots.push_back(slot_outcome(*this, s, categories));
  return out;
}

std::uint32_t SymbolMatrix::outcome_code(std::span<const Category> categories) const {
  std::uint32_t code = 0;
  for (int s = slots_ - 1; s >= 0; --s)
    code = code * 4 + static_cast<std::uint32_t>(slot_outcome(*this, s, categories));
  return code;
}

std::uint32_t encode_outcome(const BlockOutcome& outcome) {
  std::uint32_t code = 0;
  for (auto it = outcome.slots.rbegin(); it != outcome.slots.rend(); ++it)
    code = code * 4 + static_cast<std::uint32_t>(*it);
  return code;
}

SymbolMatrix build_sym3_matrix(int types) {
  if (types < 2) throw ConfigError("T", "3-SS needs at least two types");
  SymbolMatrix m(types, types - 1);
  for (int s = 0; s < types - 1; ++s) m.set(0, s, Symbol::Alpha);
  for (int b = 1; b < types; ++b) m.set(b, b - 1, Symbol::Beta);
  return m;
}

int sym2_eta(int types) { return types % 2 == 0 ? types / 2 : (types - 1) / 2; }

int sym2_slots(int types) { return types <= 3 ? types - 1 : sym2_eta(types); }

SymbolMatrix build_sym2_matrix(int types) {
  if (types < 2) throw ConfigError("T", "2-SS needs at least two types");
  if (types <= 3) return build_sym3_matrix(types);

  const int eta = sym2_eta(types);
  const int slots = eta;
  SymbolMatrix m(types, slots);
  // alpha prefixes: type k (1-based, k <= eta) sends alpha in slots 1..k
  for (int k = 1; k <= eta; ++k)
    for (int s = 0; s < k; ++s) m.set(k - 1, s, Symbol::Alpha);
  // beta suffixes: type eta+k sends beta in the last k slots
  for (int k = 1; k <= eta; ++k)
    for (int s = slots - k; s < slots; ++s) m.set(eta + k - 1, s, Symbol::Beta);
  if (types % 2 == 1) {
    m.set(types - 1, 0, Symbol::Beta);
    m.set(types - 1, slots - 1, Symbol::Alpha);
  }
  return m;
}

const char* to_string(Presence presence) {
  switch (presence) {
    case Presence::Absent: return "Absent";
    case Presence::Present: return "Present";
    case Presence::Ambiguous: return "Ambiguous";
  }
  return "?";
}

bool BlockDecode::ambiguous() const {
  return std::any_of(verdicts.begin(), verdicts.end(),
                     [](Presence p) { return p == Presence::Ambiguous; });
}

BlockDecoder::BlockDecoder(SymbolMatrix matrix) : matrix_(std::move(matrix)) {
  const int types = matrix_.types();
  if (types < 1 || types > kMaxDecodeTypes)
    throw ConfigError("T", "block decoding supports at most " + std::to_string(kMaxDecodeTypes) +
                               " types");
  std::uint32_t codes = 1;
  for (int s = 0; s < matrix_.slots(); ++s) codes *= 4;
  index_.assign(codes, -1);

  std::uint32_t scenarios = 1;
  for (int b = 0; b < types; ++b) scenarios *= 3;

  std::vector<Category> cats(static_cast<std::size_t>(types), 0);
  for (std::uint32_t sc = 0; sc < scenarios; ++sc) {
    std::uint32_t rest = sc;
    for (int b = 0; b < types; ++b) {
      cats[b] = static_cast<Category>(rest % 3);
      rest /= 3;
    }
    const std::uint32_t code = matrix_.outcome_code(cats);
    if (index_[code] < 0) {
      index_[code] = static_cast<std::int32_t>(entries_.size());
      entries_.emplace_back();
    }
    entries_[index_[code]].scenarios.push_back(cats);
  }

  for (auto& entry : entries_) {
    entry.verdicts.assign(static_cast<std::size_t>(types), Presence::Absent);
    for (int b = 0; b < types; ++b) {
      bool any_absent = false;
      bool any_present = false;
      for (const auto& sc : entry.scenarios) (sc[b] == 0 ? any_absent : any_present) = true;
      entry.verdicts[b] = any_absent && any_present ? Presence::Ambiguous
                          : any_present             ? Presence::Present
                                                    : Presence::Absent;
    }
  }
}

const BlockDecode& BlockDecoder::decode(const BlockOutcome& outcome) const {
  if (outcome.slots.size() != static_cast<std::size_t>(matrix_.slots()))
    throw InconsistentOutcome("block outcome has " + std::to_string(outcome.slots.size()) +
                              " slots, expected " + std::to_string(matrix_.slots()));
  return decode_code(encode_outcome(outcome));
}

const BlockDecode& BlockDecoder::decode_code(std::uint32_t code) const {
  if (code >= index_.size() || index_[code] < 0)
    throw InconsistentOutcome("no population scenario reproduces block outcome code " +
                              std::to_string(code));
  return entries_[index_[code]];
}

const BlockDecoder& shared_decoder(Scheme scheme, int types) {
  static std::mutex mutex;
  static std::map<std::pair<Scheme, int>, std::unique_ptr<BlockDecoder>> cache;
  const std::lock_guard lock(mutex);
  auto& slot = cache[{scheme, types}];
  if (!slot) {
    slot = std::make_unique<BlockDecoder>(scheme == Scheme::ThreeStage ? build_sym3_matrix(types)
                                                                       : build_sym2_matrix(types));
  }
  return *slot;
}

}  // namespace hetcard
