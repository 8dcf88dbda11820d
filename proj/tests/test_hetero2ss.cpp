#include <cmath>
#include <vector>

#include "doctest.h"
#include "hetcard/analysis.hpp"
#include "hetcard/hetero2ss.hpp"
#include "hetcard/hetero3ss.hpp"
#include "hetcard/homogeneous.hpp"
#include "soundness.hpp"

using namespace hetcard;
namespace tw = hetcard::two_stage;

namespace {

constexpr auto E = SlotOutcome::Empty;
constexpr auto A = SlotOutcome::SingleAlpha;
constexpr auto B = SlotOutcome::SingleBeta;
constexpr auto C = SlotOutcome::Collision;
constexpr auto N = Symbol::None;
constexpr auto a = Symbol::Alpha;
constexpr auto b = Symbol::Beta;

std::vector<std::vector<Symbol>> rows(const SymbolMatrix& m) {
  std::vector<std::vector<Symbol>> out(m.types());
  for (int t = 0; t < m.types(); ++t)
    for (int s = 0; s < m.slots(); ++s) out[t].push_back(m.at(t, s));
  return out;
}

}  // namespace

TEST_CASE("2-SS symbol matrix") {
  CHECK(sym2_eta(4) == 2);
  CHECK(sym2_eta(5) == 2);
  CHECK(sym2_eta(8) == 4);
  CHECK(sym2_slots(2) == 1);
  CHECK(sym2_slots(3) == 2);
  CHECK(sym2_slots(7) == 3);

  CHECK(rows(tw::build_matrix(4)) ==
        std::vector<std::vector<Symbol>>{{a, N}, {a, a}, {N, b}, {b, b}});
  CHECK(tw::build_matrix(2) == build_sym3_matrix(2));
  CHECK(tw::build_matrix(3) == build_sym3_matrix(3));

  const auto m5 = rows(tw::build_matrix(5));
  CHECK(m5.size() == 5);
  CHECK(m5[4] == std::vector<Symbol>{b, a});
  for (int i = 0; i < 5; ++i)
    for (int j = i + 1; j < 5; ++j) CHECK(m5[i] != m5[j]);
}

TEST_CASE("2-SS block decoding") {
  using P = Presence;
  CHECK(tw::decode_block({{B, C}}, 4) == std::vector<P>{P::Absent, P::Absent, P::Present, P::Present});
  CHECK(tw::decode_block({{A, C}}, 4) ==
        std::vector<P>{P::Ambiguous, P::Ambiguous, P::Present, P::Absent});
  for (auto v : tw::decode_block({{E, E}}, 4)) CHECK(v == P::Absent);
  for (auto v : tw::decode_block({{E, E, E}}, 7)) CHECK(v == P::Absent);
}

TEST_CASE("2-SS resolution plans") {
  const auto& all = tw::plan_block(5, {{C, C}});
  CHECK(all.action == tw::Action::Recurse);
  CHECK(all.groups == std::vector<std::vector<int>>{{0, 1, 2}, {3, 4}});

  const auto& none = tw::plan_block(4, {{E, B}});
  CHECK(none.action == tw::Action::None);

  const auto& one = tw::plan_block(4, {{A, C}});
  CHECK(one.action == tw::Action::Dedicated);
  CHECK(one.probes == std::vector<int>{0});

  const auto plan = tw::plan_resolution(std::vector<BlockOutcome>{{{E, E}}, {{A, E}}}, 4);
  CHECK(plan.committed_slots() == 0);
}

TEST_CASE("2-SS block resolution is exact over every category pattern") {
  for (int types = 2; types <= 7; ++types) {
    int patterns = 1;
    for (int t = 0; t < types; ++t) patterns *= 3;
    for (int code = 0; code < patterns; ++code) {
      std::vector<Category> cats(types);
      for (int t = 0, x = code; t < types; ++t, x /= 3) cats[t] = static_cast<Category>(x % 3);
      const auto r = tw::resolve_block(cats);
      for (int t = 0; t < types; ++t) CHECK(r.present[t] == (cats[t] > 0 ? 1 : 0));
      CHECK(r.slots == tw::followup_slots(cats));
    }
  }
}

TEST_CASE("2-SS with two or three types is 3-SS") {
  ProtocolConfig c;
  for (int seed = 0; seed < 20; ++seed) {
    StreamFactory f(seed);
    const std::vector<std::uint32_t> n{50u + seed, 300, 2000};
    const auto x = tw::run_trial(n, c, f, 2);
    const auto y = three_stage::run_trial(n, c, f, 2);
    CHECK(x.statistic == y.statistic);
    CHECK(x.ledger.total == y.ledger.total);
    CHECK(x.ledger.stage3 == y.ledger.stage3);

    const std::vector<double> rough{60, 280, 2100};
    const auto u = tw::run_bb(n, rough, c, f);
    const auto v = three_stage::run_bb(n, rough, c, f);
    CHECK(u.statistic == v.statistic);
    CHECK(u.ledger.total == v.ledger.total);
  }
}

TEST_CASE("2-SS soundness and shared randomness") {
  ProtocolConfig c;
  c.ell = 1075;
  for (int types = 4; types <= 8; ++types) {
    for (int seed = 0; seed < 10; ++seed) {
      StreamFactory f(seed * 31 + types);
      std::vector<std::uint32_t> n(types);
      std::vector<double> rough(types);
      for (int t = 0; t < types; ++t) {
        n[t] = 50 + 400 * ((seed + t) % 5);
        rough[t] = n[t] * (0.8 + 0.1 * (t % 4));
      }
      const auto tr = tw::run_trial(n, c, f, 1);
      CHECK(soundness::check_frame(tr, Scheme::TwoStage, BlockMode::Trial, types, c.t_blocks,
                                   c.slot_width) == "");
      for (int t = 0; t < types; ++t) {
        auto s = f.stream(t, Purpose::Phase1, 1);
        CHECK(tr.statistic[t] == homogeneous::lof_trial(n[t], c.t_blocks, s));
      }

      const auto bb = tw::run_bb(n, rough, c, f);
      CHECK(soundness::check_frame(bb, Scheme::TwoStage, BlockMode::BallsAndBins, types, c.ell,
                                   c.slot_width) == "");
      CHECK(bb.ledger.bp_overhead == tw::announcement_slots(c.ell, c.slot_width));
      for (int t = 0; t < types; ++t) {
        auto s = f.stream(t, Purpose::Phase2, 0);
        const auto plan = homogeneous::BBTrialPlan::from_rough(c.ell, rough[t]);
        CHECK(bb.statistic[t] == homogeneous::bb_trial(n[t], plan, s).empty);
      }
    }
  }

  const std::vector<std::uint32_t> zeros(5, 0);
  const auto z = tw::run_trial(zeros, c, StreamFactory(4));
  CHECK(z.ledger.stage2 == 0);
  CHECK(z.statistic == std::vector<std::uint32_t>(5, 1));
  const std::vector<double> r(5, 100.0);
  const auto zb = tw::run_bb(zeros, r, c, StreamFactory(4));
  CHECK(zb.statistic == std::vector<std::uint32_t>(5, 1075));
  CHECK(zb.ledger.stage2 == 0);
}

TEST_CASE("2-SS-BB grows with n2") {
  ProtocolConfig c;
  const int reps = 60;
  double previous = 0.0;
  for (std::uint32_t n2 = 500; n2 <= 3000; n2 += 500) {
    const std::vector<std::uint32_t> n{500, n2, 500, 500};
    const std::vector<double> rough(n.begin(), n.end());
    double mean = 0.0;
    for (int r = 0; r < reps; ++r)
      mean += tw::run_bb(n, rough, c, StreamFactory(8).replicate(r)).ledger.protocol_total();
    mean /= reps;
    CHECK(mean > previous);
    previous = mean;
  }
}

TEST_CASE("2-SS-BB mean length against the enumerated expectation") {
  ProtocolConfig c;
  const int reps = 300;
  for (int types : {4, 5}) {
    std::vector<std::uint32_t> n(types, 1000);
    n[1] = 1800;
    const std::vector<double> rough(n.begin(), n.end());
    double sum = 0.0, sq = 0.0;
    for (int r = 0; r < reps; ++r) {
      const double x = tw::run_bb(n, rough, c, StreamFactory(12).replicate(r)).ledger.protocol_total();
      sum += x;
      sq += x * x;
    }
    const double mean = sum / reps;
    const double se = std::sqrt((sq / reps - mean * mean) / (reps - 1));
    const double want = analysis::lambda_2ss_bb(std::vector<double>(n.begin(), n.end()), rough,
                                                c.ell, c.slot_width);
    CHECK(std::abs(mean - want) < 4 * se + 1.0);
  }
}
