#include "snspd/validate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "snspd/characterization.hpp"
#include "snspd/io.hpp"
#include "snspd/montecarlo.hpp"
#include "snspd/povm_cw.hpp"
#include "snspd/povm_independent.hpp"

namespace snspd {

double worst_z(const std::vector<double>& analytic, const std::vector<double>& empirical, double windows) {
  double worst = 0.0;
  const std::size_t n = std::max(analytic.size(), empirical.size());
  for (std::size_t k = 0; k < n; ++k) {
    const double a = k < analytic.size() ? analytic[k] : 0.0;
    const double e = k < empirical.size() ? empirical[k] : 0.0;
    const double p = std::max(a, e);
    const double se = std::sqrt(p * (1.0 - p) / windows);
    if (se == 0.0) {
      if (a != e) return std::numeric_limits<double>::infinity();
      continue;
    }
    worst = std::max(worst, std::abs(a - e) / se);
  }
  return worst;
}

double total_variation(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t k = 0; k < std::max(a.size(), b.size()); ++k)
    s += std::abs((k < a.size() ? a[k] : 0.0) - (k < b.size() ? b[k] : 0.0));
  return 0.5 * s;
}

namespace {

DetectorConfig relaxation(double eta = 1.0) {
  DetectorConfig c;
  c.eta = eta;
  c.efficiency = EfficiencyProfile::exponential(0.05, 0.2);
  return c;
}

class Report {
 public:
  void add(std::string name, double value, double threshold, std::string detail = {}) {
    out.push_back({std::move(name), value <= threshold, value, threshold, std::move(detail)});
  }
  std::vector<CheckResult> out;
};

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

std::vector<double> mix(const ConditionalMatrix& m, const PhotonNumberDist& s) {
  std::vector<double> p(m.n_max() + 1, 0.0);
  for (int n = 0; n <= m.n_max(); ++n)
    for (int k = 0; k <= std::min(s.m_max(), m.m_max()); ++k) p[n] += m(n, k) * s.probs[k];
  return p;
}

}  // namespace

std::vector<CheckResult> run_validation(Suite suite, std::uint64_t seed) {
  const std::uint64_t trials = suite == Suite::full ? 1000000 : 200000;
  Report r;
  const DetectorConfig e = relaxation();

  {
    DetectorConfig ideal;
    const auto P = cond_prob_matrix(ideal, 10, 10);
    double d = 0.0;
    for (int n = 0; n <= 10; ++n)
      for (int m = 0; m <= 10; ++m) d = std::max(d, std::abs(P(n, m) - (n == m ? 1.0 : 0.0)));
    r.add("pnr_matrix_identity", d, 1e-12);
    const auto c = click_distribution_independent(StateSpec::coherent(2.0), ideal);
    double dp = 0.0;
    for (int n = 0; n <= c.n_max(); ++n)
      dp = std::max(dp, std::abs(c[n] - std::exp(-4.0 + n * std::log(4.0) - std::lgamma(n + 1.0))));
    r.add("pnr_coherent_poisson", dp, 1e-12);
  }
  {
    DetectorConfig dt;
    dt.efficiency = EfficiencyProfile::dead_time(0.05);
    const auto P = cond_prob_matrix(dt, 6, 6);
    double d = 0.0;
    for (int n = 0; n <= 6; ++n)
      for (int m = 0; m <= 6; ++m) d = std::max(d, std::abs(P(n, m) - deadtime_closed_form(dt, n, m)));
    r.add("deadtime_closed_form", d, 1e-4, "P_1|2 = " + fmt(P(1, 2)));
  }
  {
    const double diag = diag_same_number(e, 2);
    r.add("diag_closed_form_value", std::abs(diag - 0.601808), 1e-5, "P_2|2 = " + fmt(diag));
    const auto P = cond_prob_matrix(e, 6, 6);
    double d = 0.0;
    for (int n = 2; n <= 6; ++n) d = std::max(d, std::abs(P(n, n) - diag_same_number(e, n)));
    r.add("diag_closed_form_vs_chain", d, 1e-4);
    const auto q = cond_prob_direct(e, 2, 2);
    r.add("diag_closed_form_vs_simplex", std::abs(q.value - diag), 1e-4);
  }
  {
    const auto P = cond_prob_matrix(e, 10, 10);
    double d = 0.0;
    for (int m = 0; m <= 10; ++m) d = std::max(d, std::abs(P.column_sum(m) - 1.0));
    r.add("column_normalization", d, 1e-5);
  }

  struct Case {
    const char* name;
    StateSpec state;
    double eta;
  };
  const Case cases[] = {{"coherent_alpha2", StateSpec::coherent(2.0), 1.0},
                        {"fock4_eta1", StateSpec::fock(4), 1.0},
                        {"fock4_eta0.8", StateSpec::fock(4), 0.8},
                        {"squeezed_r1.5_eta0.8", StateSpec::squeezed_vacuum(1.5), 0.8}};
  std::uint64_t stream = 0;
  for (const auto& c : cases) {
    const DetectorConfig cfg = relaxation(c.eta);
    const auto dist = click_distribution_independent(c.state, cfg);
    r.add(std::string("normalization_") + c.name, std::abs(dist.total() - 1.0), 1e-5);
    SimSpec s;
    s.trials = trials;
    s.seed = seed + 1000 * ++stream;
    const auto sim = empirical_distribution(c.state, cfg, s);
    r.add(std::string("mc_independent_") + c.name, worst_z(dist.probs, sim.probs(), sim.windows), 4.0, "max |z|");
  }

  const auto coh = photon_number_dist(StateSpec::coherent(2.0), 1.0, 0.0);
  CwConfig cw;
  cw.delta = 0.3;
  cw.window_count = 3;
  {
    std::vector<double> sym(22);
    for (int n = 0; n < 22; ++n) sym[n] = povm_symbol_tau(e, n, 4.0, 0.0);
    SimSpec s;
    s.trials = trials;
    s.seed = seed + 1000 * ++stream;
    s.carry = CarryMode::fixed_tau;
    s.tau = 0.0;
    const auto sim = empirical_distribution(StateSpec::coherent(2.0), e, s);
    r.add("mc_fixed_carry_tau0", worst_z(sym, sim.probs(), sim.windows), 4.0, "max |z|");
  }
  const auto k = memory_kernels(e, cw, coh.m_max());
  {
    SimSpec s;
    s.trials = trials;
    s.seed = seed + 1000 * ++stream;
    s.carry = CarryMode::uniform_tau;
    s.delta = cw.delta;
    const auto sim = empirical_distribution(StateSpec::coherent(2.0), e, s);
    r.add("mc_averaged_carry_d_matrix", worst_z(mix(k.d, coh), sim.probs(), sim.windows), 4.0, "max |z|");
  }
  {
    const auto dist = click_distribution_cw(coh, e, cw);
    SimSpec s;
    s.trials = trials;
    s.seed = seed + 1000 * ++stream;
    s.carry = CarryMode::contiguous;
    s.warm_up = cw.window_count - 1;
    const auto sim = empirical_distribution(StateSpec::coherent(2.0), e, s);
    r.add("mc_continuous_wave_l3", worst_z(dist.probs, sim.probs(), sim.windows), 4.0,
          "max |z|; uniform last-pulse approximation");
    CwConfig c6 = cw, c7 = cw;
    c6.window_count = 6;
    c7.window_count = 7;
    r.add("cw_ergodicity_l6_l7", total_variation(click_distribution_cw(coh, e, c6).probs,
                                                 click_distribution_cw(coh, e, c7).probs),
          1e-3, "total variation");
  }
  {
    double d = 0.0;
    for (int m = 0; m <= k.m_max(); ++m) d = std::max(d, std::abs(k.c[m] - (k.a[m] - k.b[m])));
    r.add("kernel_c_equals_a_minus_b", d, 0.0);
    r.add("kernel_vacuum", std::abs(k.a[0] - 1.0) + std::abs(k.b[0] - 1.0) + std::abs(k.c[0]), 0.0);
    DetectorConfig ideal;
    const auto ki = memory_kernels(ideal, cw, coh.m_max());
    double ci = 0.0;
    for (double v : ki.c) ci = std::max(ci, std::abs(v));
    r.add("kernel_ideal_no_memory", ci, 1e-10);
    const auto a = click_distribution_cw(coh, ideal, cw);
    const auto b = click_distribution_independent(coh, ideal);
    double d2 = 0.0;
    for (int n = 0; n <= std::max(a.n_max(), b.n_max()); ++n) d2 = std::max(d2, std::abs(a[n] - b[n]));
    r.add("cw_ideal_equals_independent", d2, 1e-10);
  }
  {
    const DetectorConfig cfg = relaxation(0.8);
    const auto dist = click_distribution_independent(StateSpec::squeezed_vacuum(1.5), cfg);
    QuadratureSpec q;
    q.qmc_samples = 1u << 24;  // n = 6 runs on Sobol points
    const int top = suite == Suite::full ? 6 : 4;
    double d = 0.0;
    for (int n = 0; n <= top; ++n) d = std::max(d, std::abs(squeezed_click_probability(cfg, n, 1.5, q).value - dist[n]));
    r.add("squeezed_route_equivalence", d, 1e-5, "n <= " + std::to_string(top));
    const auto s1 = photon_number_dist(StateSpec::squeezed_vacuum(1.5), 1.0, 0.0);
    double odd = 0.0;
    for (int m = 1; m <= s1.m_max(); m += 2) odd = std::max(odd, std::abs(s1.probs[m]));
    r.add("squeezed_odd_vanish", odd, 1e-12);
  }
  {
    const int K = 2000;
    std::vector<double> tau(K + 1);
    for (int i = 0; i <= K; ++i) tau[i] = static_cast<double>(i) / K;
    const auto G = last_pulse_density_first_window(e, 4.0, tau);
    double integral = 0.0;
    for (int i = 0; i < K; ++i) integral += 0.5 * (G[i] + G[i + 1]) / K;
    r.add("first_window_normalization", std::abs(std::exp(-4.0) + integral - 1.0), 1e-5);
  }
  {
    const auto gaps = simulate_gaps(e.efficiency, 1.0, 10000000, seed + 1000 * ++stream);
    ReconstructionSpec rs;
    rs.bin_width = 0.01;
    rs.t_max = 2.0;
    const auto rec = reconstruct_efficiency(gaps, rs);
    double d = 0.0;
    const auto& t = rec.profile.table_t();
    for (std::size_t i = 0; i < t.size(); ++i)
      if (t[i] <= 0.65) d = std::max(d, std::abs(rec.profile.table_xi()[i] - e.efficiency(t[i])));
    r.add("reconstruction_max_error", d, 0.02, "bin centers in [0, tau_d + 3 tau_r]");
    DetectorConfig back;
    back.efficiency = rec.profile;
    const auto P1 = cond_prob_matrix(e, 4, 4), P2 = cond_prob_matrix(back, 4, 4);
    double dp = 0.0;
    for (int n = 0; n <= 4; ++n)
      for (int m = 0; m <= 4; ++m) dp = std::max(dp, std::abs(P1(n, m) - P2(n, m)));
    r.add("reconstruction_round_trip", dp, 0.01);
  }
  {
    SimSpec s;
    s.trials = 20000;
    s.seed = seed;
    const auto a = empirical_distribution(StateSpec::coherent(2.0), e, s);
    const auto b = empirical_distribution(StateSpec::coherent(2.0), e, s);
    r.add("mc_determinism", a.counts == b.counts ? 0.0 : 1.0, 0.0);
  }
  return r.out;
}

}  // namespace snspd
