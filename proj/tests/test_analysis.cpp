#include <cmath>
#include <vector>

#include "doctest.h"
#include "hetcard/analysis.hpp"
#include "hetcard/hetero3ss.hpp"
#include "hetcard/homogeneous.hpp"

using namespace hetcard;
using namespace hetcard::analysis;

TEST_CASE("occupancy") {
  auto o = occupancy(0, 0.5, 100);
  CHECK(o.u == 1.0);
  CHECK(o.v == 0.0);
  o = occupancy(50, 0.0, 100);
  CHECK(o.u == 1.0);
  CHECK(o.v == 0.0);
  o = occupancy(10, 1.0, 10);
  CHECK(o.u == doctest::Approx(std::pow(0.9, 10)));
  CHECK(o.v == doctest::Approx(std::pow(0.9, 9)));

  // all 10^10 placements of 10 nodes into 10 blocks, counted by block-0 load
  double zero = 0, one = 0, total = std::pow(10.0, 10);
  zero = std::pow(9.0, 10);
  one = 10 * std::pow(9.0, 9);
  CHECK(o.u == doctest::Approx(zero / total));
  CHECK(o.v == doctest::Approx(one / total));

  double sum = 0;
  for (std::uint32_t h = 1; h <= 20; ++h) sum += geometric_block_probability(h, 20);
  CHECK(sum == doctest::Approx(1.0));
}

TEST_CASE("Q probabilities") {
  const std::vector<double> zeros(4, 0.0);
  const auto q0 = q_probs(zeros, zeros, 3009);
  CHECK(q0.q1 == 0.0);
  CHECK(q0.q2 == 0.0);
  CHECK(q0.q3 == 0.0);

  const std::vector<double> huge{1e9, 500, 500};
  const auto qh = q_probs(huge, huge, 3009);
  CHECK(qh.q1 == doctest::Approx(1 - std::exp(-1.6) - 1.6 * std::exp(-1.6)).epsilon(1e-5));

  for (double load : {100.0, 1000.0, 5000.0}) {
    const std::vector<double> n{load, 2 * load, 0.5 * load};
    const auto kr = expected_k_r(n, n, 1075);
    CHECK(kr.r <= kr.k);
  }
  const auto kz = expected_k_r(zeros, zeros, 3009);
  CHECK(kz.k == 0.0);
  CHECK(kz.r == 0.0);
}

TEST_CASE("Q sum against simulated all-collision frequency") {
  const std::vector<std::uint32_t> n(4, 1000);
  const std::vector<double> nd(4, 1000.0);
  const std::uint32_t ell = 3009;
  const auto q = q_probs(nd, nd, ell);
  std::vector<double> p(4);
  for (int b = 0; b < 4; ++b) p[b] = homogeneous::participation_probability(ell, nd[b]);
  std::size_t flagged = 0, blocks = 0;
  for (int r = 0; r < 4; ++r) {
    const auto s1 = three_stage::run_stage1(n, BlockDistribution::balls_and_bins(ell, p),
                                            StreamFactory(21).replicate(r), Purpose::Phase2, 0);
    flagged += s1.flagged.size();
    blocks += ell;
  }
  const double freq = double(flagged) / blocks;
  const double sd = std::sqrt(q.sum() * (1 - q.sum()) / blocks);
  CHECK(std::abs(freq - q.sum()) < 3 * sd);
}

TEST_CASE("expected lengths") {
  CHECK(lambda_I(3, 7, 6, 0, 0) == doctest::Approx(16));
  CHECK(lambda_I(3, 7, 6, 2.5, 0) > lambda_I(3, 7, 6, 2.0, 0));

  const std::vector<double> zeros(3, 0.0);
  CHECK(lambda_II(zeros, zeros, 3009, 6) == doctest::Approx(6520));
  for (double load : {10.0, 1000.0, 20000.0}) {
    const std::vector<double> n(3, load);
    CHECK(lambda_II(n, n, 3009, 6) >= 2 * 3009 + 502);
    CHECK(lambda_2ss_bb(n, n, 3009, 6) == doctest::Approx(lambda_II(n, n, 3009, 6)));
  }
  const std::vector<double> four(4, 1000.0);
  CHECK(lambda_2ss_bb(four, four, 3009, 6, true) ==
        doctest::Approx(lambda_2ss_bb(four, four, 3009, 6) + 1003));

  // crossover at T = 3, l = 3009
  const std::vector<double> low{1500, 6018, 6018};
  const std::vector<double> high{4000, 6018, 6018};
  CHECK(lambda_II(low, low, 3009, 6) < 9027);
  CHECK(lambda_II(high, high, 3009, 6) > 9027);
}

TEST_CASE("zeta thresholds") {
  CHECK(zeta(3, 1) == doctest::Approx(0.6286).epsilon(0.005));
  CHECK(zeta(3, 2) == doctest::Approx(0.6622).epsilon(0.005));
  CHECK(zeta(2, 1) == doctest::Approx(0.4932).epsilon(0.005));
  CHECK(zeta(2, 2) == doctest::Approx(0.5384).epsilon(0.005));
  CHECK(zeta(8, 1) == doctest::Approx(0.4926).epsilon(0.005));
  CHECK(zeta(8, 2) == doctest::Approx(0.5174).epsilon(0.005));
  for (int t = 2; t <= 50; ++t) {
    const double z1 = zeta(t, 1), z2 = zeta(t, 2);
    CHECK(z1 < z2);
    CHECK(threshold_f(z1, t) == doctest::Approx(6 * t - 3.88).epsilon(1e-4));
    CHECK(threshold_f1(z2, t) == doctest::Approx(6 * t - 4).epsilon(1e-4));
  }
  CHECK_THROWS_AS(zeta(1, 1), NoBracket);
  CHECK_THROWS_AS(zeta(51, 2), NoBracket);
}

TEST_CASE("phase-2 selection") {
  const std::vector<double> low{1500, 6018, 6018};
  const std::vector<double> high{4000, 6018, 6018};
  CHECK(select_phase2(low, 3009, 6).zone == Phase2Zone::SSBB);
  CHECK(select_phase2(low, 3009, 6).method == Phase2Method::SSBB);
  CHECK(select_phase2(high, 3009, 6).zone == Phase2Zone::TRepBB);

  const std::vector<double> mid{0.645 * 3009, 6018, 6018};
  const auto s = select_phase2(mid, 3009, 6);
  CHECK(s.zone == Phase2Zone::Indeterminate);
  const bool cheaper = lambda_II(mid, mid, 3009, 6) < 3 * 3009;
  CHECK(s.method == (cheaper ? Phase2Method::SSBB : Phase2Method::TRepBB));

  const std::vector<double> sparse(4, 100.0);
  CHECK(select_phase2_two_stage(sparse, 3009, 6) == Phase2Method::SSBB);
  const std::vector<double> dense(4, 8000.0);
  CHECK(select_phase2_two_stage(dense, 3009, 6) == Phase2Method::TRepBB);
}

TEST_CASE("crossover ratio series") {
  const double want[] = {0.5307, 0.6537, 0.6421, 0.6078, 0.5716, 0.5377, 0.5075};
  for (int t = 2; t <= 8; ++t) {
    const double r = crossover_ratio(t, 3009, 6);
    CHECK(r == doctest::Approx(want[t - 2]).epsilon(0.005));
    CHECK(r > zeta(t, 1));
    CHECK(r < zeta(t, 2));
  }
}

TEST_CASE("expected energy") {
  ProtocolConfig c;
  const std::vector<double> rough{6018};
  auto e = expected_energy_trepbb(rough, 3009, 1.0, 0.05);
  CHECK(e[0].energy == doctest::Approx(0.8 + (3009 - 0.8) * 0.05));
  e = expected_energy_trepbb(std::vector<double>{100}, 3009, 1.0, 0.0);
  CHECK(e[0].energy == doctest::Approx(1.0));
  e = expected_energy_trepbb(std::vector<double>{9000}, 3009, 0.3, 0.3);
  CHECK(e[0].energy == doctest::Approx(3009 * 0.3));

  // lone participant in an otherwise empty 3-SS-BB frame, no idle cost
  c.gamma_iota = 0.0;
  const std::vector<double> zeros(3, 0.0);
  const auto lone = expected_energy_3ss(zeros, zeros, c, BlockMode::BallsAndBins);
  CHECK(lone[0].energy == doctest::Approx(2 + 502 * 0.5));
  CHECK(lone[1].energy == doctest::Approx(1 + 502 * 0.5));

  // state partition
  c.gamma_tau = c.gamma_rho = c.gamma_iota = 0.4;
  const std::vector<double> n{900, 1200, 3000};
  const double frame = lambda_II(n, n, c.ell, c.slot_width);
  for (const auto& x : expected_energy_3ss(n, n, c, BlockMode::BallsAndBins))
    CHECK(x.energy == doctest::Approx(frame * 0.4));
  for (const auto& x : expected_energy_3ss(n, n, c, BlockMode::Trial, 77.0))
    CHECK(x.energy == doctest::Approx(77.0 * 0.4));
  CHECK_THROWS_AS(expected_energy_3ss(n, n, c, BlockMode::Trial), ConfigError);

  // no phase-1 trials: phase 2 alone
  c = ProtocolConfig{};
  c.m_prime = 0;
  const auto h = expected_energy_hsrc1(n, n, c, Phase2Method::TRepBB, 70.0);
  const auto p2 = expected_energy_trepbb(n, c.ell, c.gamma_tau, c.gamma_iota);
  for (int b = 0; b < 3; ++b) CHECK(h[b].energy == doctest::Approx(p2[b].energy));
  c.m_prime = 10;
  const auto h10 = expected_energy_hsrc1(n, n, c, Phase2Method::TRepBB, 70.0);
  c.m_prime = 20;
  const auto h20 = expected_energy_hsrc1(n, n, c, Phase2Method::TRepBB, 70.0);
  for (int b = 0; b < 3; ++b)
    CHECK(h20[b].energy - p2[b].energy == doctest::Approx(2 * (h10[b].energy - p2[b].energy)));
}
