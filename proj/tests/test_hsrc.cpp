#include <cmath>
#include <vector>

#include "doctest.h"
#include "hetcard/homogeneous.hpp"
#include "hetcard/hsrc.hpp"

using namespace hetcard;
using hsrc::Baseline;
using hsrc::Variant;

TEST_CASE("empty network") {
  ProtocolConfig c;
  const std::vector<std::uint32_t> zeros(4, 0);
  for (Variant v : {Variant::HSRC1, Variant::HSRC2}) {
    const auto r = hsrc::run_hsrc(v, zeros, c, StreamFactory(1));
    for (int b = 0; b < 4; ++b) {
      CHECK(r.rough[b] == doctest::Approx(1.2897));
      CHECK(r.final_estimate[b] == 0.0);
    }
    CHECK(r.ledger.consistent());
  }
  for (Baseline b : {Baseline::ThreeStageRepeated, Baseline::TwoStageRepeated}) {
    c.m_lof = 5;
    const auto r = hsrc::run_baseline(b, zeros, c, StreamFactory(1));
    for (double e : r.final_estimate) CHECK(e == doctest::Approx(1.2897));
  }
}

TEST_CASE("final estimates agree with T separate SRC_S runs") {
  ProtocolConfig c;
  for (int inst = 0; inst < 40; ++inst) {
    const int types = 2 + inst % 5;
    StreamFactory f(1000 + inst);
    auto pick = f.stream(0, Purpose::Activity, 99);
    std::vector<std::uint32_t> n(types);
    for (auto& x : n) x = static_cast<std::uint32_t>(pick.next_below(4000));
    const auto ref = hsrc::run_baseline(Baseline::TRepSRCS, n, c, f);
    for (Variant v : {Variant::HSRC1, Variant::HSRC2}) {
      for (auto m : {Phase2Method::TRepBB, Phase2Method::SSBB}) {
        const auto r = hsrc::run_hsrc(v, n, c, f, m);
        CHECK(r.rough == ref.rough);
        CHECK(r.final_estimate == ref.final_estimate);
      }
      CHECK(hsrc::run_hsrc(v, n, c, f).final_estimate == ref.final_estimate);
    }
  }
}

TEST_CASE("T-Rep-BB phase 2 length") {
  for (std::uint32_t ell : {1075u, 3009u}) {
    ProtocolConfig c;
    c.ell = ell;
    for (int types = 2; types <= 6; ++types) {
      const std::vector<std::uint32_t> n(types, 800);
      for (Variant v : {Variant::HSRC1, Variant::HSRC2}) {
        const auto r = hsrc::run_hsrc(v, n, c, StreamFactory(types), Phase2Method::TRepBB);
        CHECK(r.phase2.total == std::uint64_t(types) * ell);
      }
    }
  }
}

TEST_CASE("ledger composition") {
  ProtocolConfig c;
  const std::vector<std::uint32_t> n{300, 2000, 50, 900};
  for (Variant v : {Variant::HSRC1, Variant::HSRC2}) {
    const auto r = hsrc::run_hsrc(v, n, c, StreamFactory(2));
    const std::uint64_t boundary = hsrc::boundary_slots(4, c.t_blocks, c.slot_width);
    CHECK(boundary == 14);
    CHECK(r.ledger.total == r.phase1.total + r.phase2.total + boundary);
    CHECK(r.ledger.bp_overhead >= boundary);
    CHECK(r.ledger.consistent());
  }
}

TEST_CASE("equal prices make energy proportional to the window") {
  ProtocolConfig c;
  c.gamma_tau = c.gamma_rho = c.gamma_iota = 0.25;
  const std::vector<std::uint32_t> n{300, 700, 1200};
  for (Variant v : {Variant::HSRC1, Variant::HSRC2}) {
    const auto r = hsrc::run_hsrc(v, n, c, StreamFactory(3), Phase2Method::SSBB);
    for (int b = 0; b < 3; ++b)
      for (const auto& node : r.energy.nodes(b)) {
        CHECK(node.window() == r.ledger.total);
        CHECK(node.energy == doctest::Approx(r.ledger.total * 0.25));
      }
  }
}

TEST_CASE("repeated baselines") {
  ProtocolConfig c;
  c.m_lof = 30;
  const std::vector<std::uint32_t> n{20, 10, 5};
  const auto a = hsrc::run_baseline(Baseline::ThreeStageRepeated, n, c, StreamFactory(5));
  const auto b = hsrc::run_baseline(Baseline::TwoStageRepeated, n, c, StreamFactory(5));
  CHECK(a.ledger.total == b.ledger.total);
  CHECK(a.final_estimate == b.final_estimate);

  // phase 1 of T x SRC_S scales with M'
  c.m_prime = 10;
  const auto p10 = hsrc::run_baseline(Baseline::TRepSRCS, n, c, StreamFactory(5));
  c.m_prime = 20;
  const auto p20 = hsrc::run_baseline(Baseline::TRepSRCS, n, c, StreamFactory(5));
  CHECK(p20.phase1.total == 2 * p10.phase1.total);
}

TEST_CASE("slot ordering at T = 4, D = 100, q = 0.15") {
  ProtocolConfig c;
  c.m_lof = lof_trial_count(0.03, 0.2);
  const int reps = 20;
  double h2 = 0, h1 = 0, tx = 0, s2 = 0, s3 = 0;
  for (int r = 0; r < reps; ++r) {
    StreamFactory f = StreamFactory(77).replicate(r);
    std::vector<std::uint32_t> n(4, 0);
    for (int b = 0; b < 4; ++b) {
      auto s = f.stream(b, Purpose::Activity, 0);
      for (int i = 0; i < 100; ++i) n[b] += s.bernoulli(0.15);
    }
    h2 += hsrc::run_hsrc(Variant::HSRC2, n, c, f).ledger.protocol_total();
    h1 += hsrc::run_hsrc(Variant::HSRC1, n, c, f).ledger.protocol_total();
    tx += hsrc::run_baseline(Baseline::TRepSRCS, n, c, f).ledger.protocol_total();
    s2 += hsrc::run_baseline(Baseline::TwoStageRepeated, n, c, f).ledger.protocol_total();
    s3 += hsrc::run_baseline(Baseline::ThreeStageRepeated, n, c, f).ledger.protocol_total();
  }
  CHECK(h2 < h1);
  CHECK(h1 < tx);
  CHECK(tx < s2);
  CHECK(s2 < s3);
}
