#include <array>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "hetcard/core.hpp"
#include "hetcard/rng.hpp"
#include "oracles.hpp"

using namespace hetcard;

TEST_CASE("resolve_slot on small multisets") {
  CHECK(resolve_slot({}) == SlotOutcome::Empty);
  std::array<Symbol, 1> a{Symbol::Alpha};
  CHECK(resolve_slot(a) == SlotOutcome::SingleAlpha);
  std::array<Symbol, 1> b{Symbol::Beta};
  CHECK(resolve_slot(b) == SlotOutcome::SingleBeta);

  // every multiset of size <= 3 over {None, alpha, beta}
  const Symbol all[] = {Symbol::None, Symbol::Alpha, Symbol::Beta};
  for (int size = 0; size <= 3; ++size) {
    int combos = 1;
    for (int i = 0; i < size; ++i) combos *= 3;
    for (int c = 0; c < combos; ++c) {
      std::vector<Symbol> v;
      int x = c, senders = 0;
      Symbol last = Symbol::None;
      for (int i = 0; i < size; ++i) {
        v.push_back(all[x % 3]);
        if (v.back() != Symbol::None) {
          ++senders;
          last = v.back();
        }
        x /= 3;
      }
      SlotOutcome want = SlotOutcome::Collision;
      if (senders == 0) want = SlotOutcome::Empty;
      if (senders == 1) want = last == Symbol::Alpha ? SlotOutcome::SingleAlpha : SlotOutcome::SingleBeta;
      CHECK(resolve_slot(v) == want);
    }
  }
}

TEST_CASE("derive_config tables") {
  const std::vector<std::uint64_t> n_all{1'000'000, 1'000'000};
  auto c = derive_config(0.03, 0.2, n_all, 6);
  CHECK(c.ell == 3009);
  CHECK(c.m_prime == 10);
  CHECK(c.t_blocks == 20);
  CHECK(derive_config(0.05, 0.2, n_all, 6).ell == 1075);
  CHECK(derive_config(0.02, 0.2, n_all, 6).ell == 6638);
  CHECK(derive_config(0.04, 0.2, n_all, 6).ell == 1674);

  CHECK_THROWS_AS(derive_config(0.01, 0.2, n_all, 6), UnknownAccuracyKey);
  CHECK_THROWS_AS(derive_config(0.03, 0.1, n_all, 6), UnknownAccuracyKey);
  DeriveOptions opts;
  opts.ell = 12000;
  CHECK(derive_config(0.01, 0.2, n_all, 6, opts).ell == 12000);

  try {
    derive_config(0.03, 1.5, n_all, 6);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.field() == "delta");
  }
}

TEST_CASE("t_T follows the largest manufactured count") {
  const std::vector<std::uint64_t> small{100, 64};
  CHECK(derive_config(0.03, 0.2, small, 6).t_blocks == 7);
  CHECK(ceil_log2(1) == 1);
  CHECK(ceil_log2(2) == 1);
  CHECK(ceil_log2(1024) == 10);
  CHECK(ceil_log2(1025) == 11);
}

TEST_CASE("erf_inv against independent inverses") {
  for (double y : {-0.7, -0.2, 0.05, 0.3, 0.5, 0.8}) {
    CHECK(erf_inv(y) == doctest::Approx(oracle::erf_inv_series(y)).epsilon(1e-9));
    CHECK(erf_inv(y) == doctest::Approx(oracle::erf_inv_bisect(y)).epsilon(1e-9));
  }
  CHECK(erf_inv(0.0) == 0.0);
  CHECK(std::isinf(erf_inv(1.0)));
}

TEST_CASE("LoF trial count") {
  for (double eps : {0.02, 0.03, 0.04, 0.05})
    CHECK(lof_trial_count(eps, 0.2) == oracle::lof_m(eps, 0.2));
  // tighter accuracy needs more trials
  CHECK(lof_trial_count(0.02, 0.2) > lof_trial_count(0.05, 0.2));
  CHECK(lof_trial_count(0.03, 0.1) > lof_trial_count(0.03, 0.2));
}

TEST_CASE("slot ledger arithmetic") {
  SlotLedger a{10, 2, 3, 4, 1, 0};
  a.recompute_total();
  CHECK(a.total == 19);
  CHECK(a.consistent());
  CHECK(a.protocol_total() == 18);
  SlotLedger b = a;
  b += a;
  CHECK(b.total == 38);
  CHECK(b.bp_overhead == 2);
  CHECK(b.consistent());
}

TEST_CASE("energy ledger window and pricing") {
  const std::vector<std::uint32_t> active{2, 1};
  EnergyLedger e(active);
  e.node(0, 0).tx = 3;
  e.node(0, 1).rx = 2;
  e.node(1, 0).tx = 1;
  e.close_window(10);
  for (int b = 0; b < 2; ++b)
    for (const auto& n : e.nodes(b)) CHECK(n.window() == 10);
  e.price(0.7, 0.7, 0.7);
  for (int b = 0; b < 2; ++b)
    for (const auto& n : e.nodes(b)) CHECK(n.energy == doctest::Approx(7.0));
  e.price(1.0, 0.5, 0.05);
  CHECK(e.mean_energy(1) == doctest::Approx(1.0 + 9 * 0.05));
}

TEST_CASE("presence sets") {
  PresenceSets p(2, 5);
  CHECK(p.first_absent(0) == 1);
  p.insert(0, 1);
  p.insert(0, 2);
  p.insert(0, 4);
  CHECK(p.first_absent(0) == 3);
  CHECK(p.size(0) == 3);
  CHECK(p.members(0) == std::vector<std::size_t>{1, 2, 4});
  for (std::size_t h = 1; h <= 5; ++h) p.insert(1, h);
  CHECK(p.first_absent(1) == 5);
}

TEST_CASE("geometric block distribution") {
  StreamFactory f(7);
  RngStream s1 = f.stream(0, Purpose::Phase1, 0);
  for (int i = 0; i < 100; ++i) CHECK(s1.geometric_block(1) == 1);

  RngStream s = f.stream(0, Purpose::Phase1, 1);
  const int draws = 100000;
  std::array<int, 5> hist{};
  for (int i = 0; i < draws; ++i) ++hist[s.geometric_block(4)];
  const double want[] = {0, 0.5, 0.25, 0.125, 0.125};
  for (int i = 1; i <= 4; ++i) {
    const double sd = std::sqrt(want[i] * (1 - want[i]) / draws);
    CHECK(std::abs(hist[i] / double(draws) - want[i]) < 3 * sd);
  }

  RngStream s2 = f.stream(0, Purpose::Phase1, 2);
  int ones = 0;
  for (int i = 0; i < draws; ++i) ones += s2.geometric_block(2) == 1;
  CHECK(std::abs(ones / double(draws) - 0.5) < 3 * std::sqrt(0.25 / draws));
}

TEST_CASE("streams are keyed and reproducible") {
  StreamFactory f(42);
  auto a = f.stream(1, Purpose::Phase2, 0);
  auto b = f.stream(1, Purpose::Phase2, 0);
  auto c = f.stream(2, Purpose::Phase2, 0);
  auto d = f.stream(1, Purpose::Phase1, 0);
  const auto wa = a.next_word();
  CHECK(wa == b.next_word());
  CHECK(wa != c.next_word());
  CHECK(wa != d.next_word());
  CHECK(f.replicate(3).master_seed() == StreamFactory(42).replicate(3).master_seed());
  CHECK(f.replicate(3).master_seed() != f.replicate(4).master_seed());

  auto r = f.stream(0, Purpose::Activity, 0);
  for (int i = 0; i < 1000; ++i) CHECK(r.next_below(7) < 7);
  CHECK_FALSE(r.bb_choice(0.0, 10).has_value());
}
