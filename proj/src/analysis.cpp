#include "hetcard/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "hetcard/hetero2ss.hpp"
#include "hetcard/homogeneous.hpp"
#include "hetcard/symbols.hpp"

namespace hetcard::analysis {

namespace {

void check_sizes(std::span<const double> n, std::span<const double> rough) {
  if (n.size() != rough.size()) throw ConfigError("rough", "expected one rough estimate per type");
  if (n.size() < 2) throw ConfigError("T", "at least two node types are required");
}

std::vector<double> participation(std::span<const double> rough, std::uint32_t ell) {
  std::vector<double> p(rough.size());
  for (std::size_t b = 0; b < rough.size(); ++b)
    p[b] = homogeneous::participation_probability(ell, rough[b]);
  return p;
}

double ceil_real(double x) { return std::ceil(x - 1e-9); }

// Occupancy of a block hit with probability q per node.
Occupancy occupancy_q(double n, double q) {
  if (n <= 0.0) return {1.0, 0.0};
  const double miss = 1.0 - q;
  return {std::pow(miss, n), n * q * std::pow(miss, n - 1.0)};
}

}  // namespace

Occupancy occupancy(double n, double p, double ell) {
  if (ell < 1.0) throw ConfigError("ell", "must be at least 1");
  return occupancy_q(n, p / ell);
}

double geometric_block_probability(std::uint32_t h, std::uint32_t t) {
  if (h < 1 || h > t) throw ConfigError("h", "block index out of range");
  return std::exp2(-static_cast<double>(h < t ? h : t - 1));
}

Occupancy occupancy_geometric(double n, std::uint32_t h, std::uint32_t t) {
  return occupancy_q(n, geometric_block_probability(h, t));
}

QProbs q_probs(std::span<const double> n, std::span<const double> rough, std::uint32_t ell) {
  check_sizes(n, rough);
  const auto p = participation(rough, ell);
  const double l = static_cast<double>(ell);
  const Occupancy o1 = occupancy(n[0], p[0], l);
  double any_rest = 1.0;
  double many_rest = 1.0;
  for (std::size_t b = 1; b < n.size(); ++b) {
    const Occupancy o = occupancy(n[b], p[b], l);
    any_rest *= 1.0 - o.u;
    many_rest *= 1.0 - o.u - o.v;
  }
  return {1.0 - o1.u - o1.v, o1.v * any_rest, o1.u * many_rest};
}

KR expected_k_r(std::span<const double> n, std::span<const double> rough, std::uint32_t ell) {
  const QProbs q = q_probs(n, rough, ell);
  return {ell * q.sum(), ell * q.q1};
}

double lambda_I(int types, std::uint32_t t_blocks, std::uint32_t slot_width, double expected_k,
                double expected_r) {
  const double t = static_cast<double>(t_blocks);
  return (types - 1) * t + ceil_real(t / slot_width) + expected_k +
         ceil_real(expected_k / slot_width) + (types - 1) * expected_r;
}

double lambda_II(std::span<const double> n, std::span<const double> rough, std::uint32_t ell,
                 std::uint32_t slot_width) {
  const KR kr = expected_k_r(n, rough, ell);
  const int types = static_cast<int>(n.size());
  const double l = static_cast<double>(ell);
  return (types - 1) * l + ceil_real(l / slot_width) + kr.k + ceil_real(kr.k / slot_width) +
         (types - 1) * kr.r;
}

double lambda_2ss_bb(std::span<const double> n, std::span<const double> rough, std::uint32_t ell,
                     std::uint32_t slot_width, bool include_announcement) {
  check_sizes(n, rough);
  const int types = static_cast<int>(n.size());
  if (types <= 3) return lambda_II(n, rough, ell, slot_width);
  const auto p = participation(rough, ell);
  const double l = static_cast<double>(ell);
  std::vector<double> u(n.size()), v(n.size());
  for (std::size_t b = 0; b < n.size(); ++b) {
    const Occupancy o = occupancy(n[b], p[b], l);
    u[b] = o.u;
    v[b] = o.v;
  }
  double total = sym2_slots(types) * l + ceil_real(l / slot_width) +
                 l * two_stage::expected_followup_slots(u, v);
  if (include_announcement)
    total += static_cast<double>(two_stage::announcement_slots(ell, slot_width));
  return total;
}

double threshold_g1(int types) { return (1.0 + 6.0 * types) - 7.0 * std::pow(0.4751, types - 1); }

double threshold_g2(int types) { return (1.0 + 6.0 * types) - 7.0 * std::pow(0.7981, types - 1); }

double threshold_f(double x, int types) {
  return std::pow(0.366, x) * (threshold_g1(types) + x * threshold_g2(types));
}

double threshold_f1(double x, int types) {
  return std::pow(0.3679, x) * (threshold_g1(types) + x * threshold_g2(types) / 0.99);
}

double zeta(int types, int which) {
  if (which != 1 && which != 2) throw ConfigError("which", "must be 1 or 2");
  if (types < kZetaMinTypes || types > kZetaMaxTypes)
    throw NoBracket("zeta is only defined for 2 <= T <= 50, got T = " + std::to_string(types));
  const double level = which == 1 ? 6.0 * types - 3.88 : 6.0 * types - 4.0;
  auto g = [&](double x) {
    return (which == 1 ? threshold_f(x, types) : threshold_f1(x, types)) - level;
  };
  double lo = 0.0;
  double hi = 10.0;
  if (!(g(lo) > 0.0 && g(hi) < 0.0))
    throw NoBracket("threshold function does not cross its level in (0, 10] for T = " +
                    std::to_string(types));
  while (hi - lo > 1e-7) {
    const double mid = 0.5 * (lo + hi);
    (g(mid) > 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double crossover_ratio(int types, std::uint32_t ell, std::uint32_t slot_width) {
  constexpr double kSaturated = 1e12;
  const double l = static_cast<double>(ell);
  std::vector<double> n(static_cast<std::size_t>(types), kSaturated);
  auto excess = [&](double x) {
    n[0] = x * l;
    return lambda_II(n, n, ell, slot_width) - types * l;
  };
  double lo = 1e-6;
  double hi = homogeneous::kParticipationLoad;
  if (!(excess(lo) < 0.0 && excess(hi) > 0.0))
    throw NoBracket("3-SS-BB never matches T-Rep-BB for T = " + std::to_string(types));
  while (hi - lo > 1e-7) {
    const double mid = 0.5 * (lo + hi);
    (excess(mid) < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

const char* to_string(Phase2Zone zone) {
  switch (zone) {
    case Phase2Zone::SSBB: return "SSBB";
    case Phase2Zone::TRepBB: return "TRepBB";
    case Phase2Zone::Indeterminate: return "Indeterminate";
  }
  return "?";
}

Phase2Selection select_phase2(std::span<const double> rough, std::uint32_t ell,
                              std::uint32_t slot_width) {
  const int types = static_cast<int>(rough.size());
  const double l = static_cast<double>(ell);
  const double n1 = rough[0];
  if (n1 <= zeta(types, 1) * l) return {Phase2Zone::SSBB, Phase2Method::SSBB};
  if (n1 >= zeta(types, 2) * l || n1 >= homogeneous::kParticipationLoad * l)
    return {Phase2Zone::TRepBB, Phase2Method::TRepBB};
  const bool faster = lambda_II(rough, rough, ell, slot_width) < types * l;
  return {Phase2Zone::Indeterminate, faster ? Phase2Method::SSBB : Phase2Method::TRepBB};
}

Phase2Method select_phase2_two_stage(std::span<const double> rough, std::uint32_t ell,
                                     std::uint32_t slot_width) {
  const int types = static_cast<int>(rough.size());
  if (types <= 3) return select_phase2(rough, ell, slot_width).method;
  return lambda_2ss_bb(rough, rough, ell, slot_width) < types * static_cast<double>(ell)
             ? Phase2Method::SSBB
             : Phase2Method::TRepBB;
}

namespace {

struct NodeSlots {
  double tx = 0.0;
  double rx = 0.0;
};

// Expected transmissions and receptions of a participating node of each type
// whose block is hit by every other node of type i with probability q[i].
std::vector<NodeSlots> participant_slots(std::span<const double> n, std::span<const double> q,
                                         double bp1) {
  const std::size_t types = n.size();
  std::vector<Occupancy> all(types), others(types);
  for (std::size_t i = 0; i < types; ++i) {
    all[i] = occupancy_q(n[i], q[i]);
    others[i] = occupancy_q(std::max(n[i] - 1.0, 0.0), q[i]);
  }
  std::vector<NodeSlots> out(types);

  // T_1: stage 2 whenever its block is flagged.
  double rest_present = 1.0;
  for (std::size_t i = 1; i < types; ++i) rest_present *= 1.0 - all[i].u;
  const double q1a = 1.0 - others[0].u;
  const double q1b = others[0].u * rest_present;
  out[0] = {static_cast<double>(types - 1) + q1a + q1b, bp1};

  // T_b: stage 3 when two or more T_1 share the block; reads its BP2 bit when flagged.
  const double many_t1 = 1.0 - all[0].u - all[0].v;
  for (std::size_t b = 1; b < types; ++b) {
    double present = 1.0;
    double many = 1.0;
    for (std::size_t i = 1; i < types; ++i) {
      if (i == b) continue;
      present *= 1.0 - all[i].u;
      many *= 1.0 - all[i].u - all[i].v;
    }
    const double q2 = all[0].v * present;
    const double q3 = all[0].u * (1.0 - others[b].u) * many;
    out[b] = {1.0 + many_t1, bp1 + many_t1 + q2 + q3};
  }
  return out;
}

ExpectedEnergy priced(double tx, double rx, double window, const ProtocolConfig& c) {
  ExpectedEnergy e{tx, rx, window - tx - rx, 0.0};
  e.energy = e.tx * c.gamma_tau + e.rx * c.gamma_rho + e.idle * c.gamma_iota;
  return e;
}

}  // namespace

std::vector<ExpectedEnergy> expected_energy_3ss(std::span<const double> n,
                                                std::span<const double> rough,
                                                const ProtocolConfig& config, BlockMode mode,
                                                std::optional<double> frame_slots) {
  const std::size_t types = n.size();
  if (types < 2) throw ConfigError("T", "at least two node types are required");
  std::vector<ExpectedEnergy> out(types);

  if (mode == BlockMode::Trial) {
    if (!frame_slots) throw ConfigError("frame_slots", "trial mode needs the expected frame length");
    const std::uint32_t t = config.t_blocks;
    const double bp1 = static_cast<double>(ceil_div(t, config.slot_width));
    std::vector<NodeSlots> acc(types);
    for (std::uint32_t h = 1; h <= t; ++h) {
      const double w = geometric_block_probability(h, t);
      const std::vector<double> q(types, w);
      const auto s = participant_slots(n, q, bp1);
      for (std::size_t b = 0; b < types; ++b) {
        acc[b].tx += w * s[b].tx;
        acc[b].rx += w * s[b].rx;
      }
    }
    for (std::size_t b = 0; b < types; ++b) out[b] = priced(acc[b].tx, acc[b].rx, *frame_slots, config);
    return out;
  }

  check_sizes(n, rough);
  const double window = frame_slots ? *frame_slots
                                    : lambda_II(n, rough, config.ell, config.slot_width);
  const auto p = participation(rough, config.ell);
  const double l = static_cast<double>(config.ell);
  std::vector<double> q(types);
  for (std::size_t b = 0; b < types; ++b) q[b] = p[b] / l;
  const double bp1 = static_cast<double>(ceil_div(config.ell, config.slot_width));
  const auto s = participant_slots(n, q, bp1);
  // a node that sits out phase 2 idles through it
  for (std::size_t b = 0; b < types; ++b) out[b] = priced(p[b] * s[b].tx, p[b] * s[b].rx, window, config);
  return out;
}

std::vector<ExpectedEnergy> expected_energy_trepbb(std::span<const double> rough,
                                                   std::uint32_t ell, double gamma_tau,
                                                   double gamma_iota) {
  std::vector<ExpectedEnergy> out;
  out.reserve(rough.size());
  for (double r : rough) {
    const double p = homogeneous::participation_probability(ell, r);
    ExpectedEnergy e{p, 0.0, static_cast<double>(ell) - p, 0.0};
    e.energy = p * gamma_tau + e.idle * gamma_iota;
    out.push_back(e);
  }
  return out;
}

std::vector<ExpectedEnergy> expected_energy_hsrc1(std::span<const double> n,
                                                  std::span<const double> rough,
                                                  const ProtocolConfig& config,
                                                  Phase2Method method, double trial_slots,
                                                  double boundary_slots) {
  const auto trial = expected_energy_3ss(n, rough, config, BlockMode::Trial, trial_slots);
  const auto phase2 =
      method == Phase2Method::TRepBB
          ? expected_energy_trepbb(rough, config.ell, config.gamma_tau, config.gamma_iota)
          : expected_energy_3ss(n, rough, config, BlockMode::BallsAndBins);
  std::vector<ExpectedEnergy> out(n.size());
  const double m = static_cast<double>(config.m_prime);
  for (std::size_t b = 0; b < n.size(); ++b) {
    ExpectedEnergy& e = out[b];
    e.tx = m * trial[b].tx + phase2[b].tx;
    e.rx = m * trial[b].rx + phase2[b].rx + boundary_slots;
    e.idle = m * trial[b].idle + phase2[b].idle;
    e.energy = m * trial[b].energy + phase2[b].energy + boundary_slots * config.gamma_rho;
  }
  return out;
}

}  // namespace hetcard::analysis
