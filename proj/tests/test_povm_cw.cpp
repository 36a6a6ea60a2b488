#include <doctest.h>

#include <cmath>

#include "snspd/errors.hpp"
#include "snspd/gauss_rules.hpp"
#include "snspd/povm_cw.hpp"

using namespace snspd;

namespace {
DetectorConfig relaxation() {
  DetectorConfig c;
  c.efficiency = EfficiencyProfile::exponential(0.05, 0.2);
  return c;
}
CwConfig fig3() {
  CwConfig cw;
  cw.delta = 0.3;
  cw.window_count = 3;
  return cw;
}

// No click in the final delta given m photons, by nested simplex quadrature
// (independent of the transfer-operator route). tau < 0 means fresh.
double no_tail(const DetectorConfig& c, int m, double delta, double tau) {
  double total = 0.0;
  for (int n = 0; n <= m; ++n) {
    const double pre = std::exp(std::lgamma(m + 1.0) - std::lgamma(m - n + 1.0));
    if (n == 0) {
      total += std::pow(1.0 - (tau < 0 ? 1.0 : xi0_tau(c, tau)), m);
      continue;
    }
    SimplexHints h;
    h.min_gap = c.efficiency.tau_d();
    if (tau >= 0) h.lead = std::max(0.0, c.efficiency.tau_d() - tau);
    auto f = [&](std::span<const double> t) {
      const auto w = tau < 0 ? pulse_weights(c, t) : pulse_weights_tau(c, t, tau);
      return pre * w.script_i * std::pow(std::max(1.0 - w.big_xi, 0.0), m - n);
    };
    total += integrate_ordered(n, c.tau_m - delta, f, QuadratureSpec{}, h).value;
  }
  return total;
}
}  // namespace

TEST_CASE("xi0_tau") {
  const auto c = relaxation();
  CHECK(xi0_tau(c, 0.05) == doctest::Approx(1.0 - 0.2 * (1.0 - std::exp(-5.0))).epsilon(1e-12));
  CHECK(xi0_tau(c, 0.05) == doctest::Approx(0.801347).epsilon(1e-6));
  CHECK(xi0_tau(c, 100.0) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(xi0_tau(DetectorConfig{}, 0.0) == 1.0);
  // tau < tau_d: only t > tau_d - tau contributes
  const double tau = 0.02;
  CHECK(xi0_tau(c, tau) == doctest::Approx(c.efficiency.integral(1.0 + tau)).epsilon(1e-12));
}

TEST_CASE("tau-conditioned weights") {
  const auto c = relaxation();
  const OrderedTimes t({0.3, 0.6}, 1.0);
  const auto a = pulse_weights(c, t), b = pulse_weights_tau(c, t, 10.0);
  CHECK(b.script_i == doctest::Approx(a.script_i).epsilon(1e-9));
  CHECK(b.big_xi == doctest::Approx(a.big_xi).epsilon(1e-9));
  CHECK(pulse_weights_tau(c, OrderedTimes({0.02}, 1.0), 0.0).script_i == 0.0);
  const auto z = pulse_weights_tau(c, OrderedTimes({}, 1.0), 0.05);
  CHECK(z.big_xi == doctest::Approx(xi0_tau(c, 0.05)));
  DetectorConfig ideal;
  const auto i = pulse_weights_tau(ideal, t, 0.0), j = pulse_weights(ideal, t);
  CHECK(i.script_i == j.script_i);
  CHECK(i.big_xi == doctest::Approx(j.big_xi));
}

TEST_CASE("tau-conditioned symbols") {
  const auto c = relaxation();
  CHECK(povm_symbol_tau(c, 0, 4.0, 0.05) == doctest::Approx(std::exp(-4.0 * xi0_tau(c, 0.05))));
  const double horizon = 0.05 + 20 * 0.2;
  for (int n = 0; n <= 8; ++n) CHECK(std::abs(povm_symbol_tau(c, n, 4.0, horizon) - povm_symbol(c, n, 4.0)) < 1e-6);
  // frozen; a 10^6-trial simulation with carry-in tau = 0 gives 0.28893 +- 0.00045
  CHECK(povm_symbol_tau(c, 1, 4.0, 0.0) == doctest::Approx(0.2890124094).epsilon(1e-8));
}

TEST_CASE("averaged matrix") {
  const auto c = relaxation();
  const auto D = d_matrix(c, fig3(), 10, 10);
  CHECK(D(0, 0) == 1.0);
  for (int m = 0; m <= 10; ++m) CHECK(std::abs(D.column_sum(m) - 1.0) < 1e-6);
  // D_{1|1} = (1/delta) int_0^delta Xi_0(tau) dtau
  const auto& g = gauss_legendre(32);
  double ref = 0.0;
  const double cuts[] = {0.0, 0.05, 0.3};
  for (int p = 0; p < 2; ++p) {
    const double a = cuts[p], b = cuts[p + 1];
    for (std::size_t i = 0; i < g.x.size(); ++i)
      ref += 0.5 * (b - a) * g.w[i] * xi0_tau(c, 0.5 * (a + b) + 0.5 * (b - a) * g.x[i]) / 0.3;
  }
  CHECK(D(1, 1) == doctest::Approx(ref).epsilon(1e-9));
  CHECK(D(1, 1) < 1.0);
  DetectorConfig ideal;
  const auto Di = d_matrix(ideal, fig3(), 6, 6);
  for (int n = 0; n <= 6; ++n)
    for (int m = 0; m <= 6; ++m) CHECK(Di(n, m) == (n == m ? 1.0 : 0.0));
}

TEST_CASE("memory kernels") {
  const auto c = relaxation();
  const auto k = memory_kernels(c, fig3(), 12);
  CHECK(k.a[0] == 1.0);
  CHECK(k.b[0] == 1.0);
  CHECK(k.c[0] == 0.0);
  for (int m = 0; m <= 12; ++m) {
    CHECK(k.c[m] == k.a[m] - k.b[m]);
    CHECK(k.a[m] >= 0.0);
    CHECK(k.a[m] <= 1.0);
    CHECK(k.b[m] >= 0.0);
    CHECK(k.b[m] <= 1.0);
  }
  // frozen brute-force values: nested simplex quadrature for A, 30 x 16-point
  // Gauss panels over the carry-in for B (agree with the kernels to 2e-9)
  CHECK(k.a[4] == doctest::Approx(0.3721192352).epsilon(1e-8));
  CHECK(k.b[4] == doctest::Approx(0.3725779314).epsilon(1e-8));
  CHECK(k.c[4] == doctest::Approx(-0.0004586962).epsilon(1e-5));
  CHECK(no_tail(c, 4, 0.3, -1.0) == doctest::Approx(k.a[4]).epsilon(1e-8));
  CHECK(no_tail(c, 2, 0.3, 0.1) > 0.0);

  DetectorConfig ideal;
  const auto ki = memory_kernels(ideal, fig3(), 12);
  for (int m = 0; m <= 12; ++m) {
    CHECK(ki.c[m] == 0.0);
    CHECK(ki.a[m] == doctest::Approx(std::pow(0.7, m)).epsilon(1e-14));
  }
}

TEST_CASE("memory probability") {
  const auto c = relaxation();
  const auto coh = photon_number_dist(StateSpec::coherent(2.0), 1.0, 0.0);
  const auto k = memory_kernels(c, fig3(), coh.m_max());
  auto cw = fig3();
  cw.window_count = 1;
  CHECK(memory_probability_q(k, {coh}, cw) == 1.0);
  const auto vac = photon_number_dist(StateSpec::vacuum(), 1.0, 0.0);
  cw.window_count = 5;
  CHECK(memory_probability_q(k, {vac}, cw) == 1.0);

  double b = 0.0, cc = 0.0;
  for (int m = 0; m <= coh.m_max(); ++m) {
    b += coh.probs[m] * k.b[m];
    cc += coh.probs[m] * k.c[m];
  }
  cw.window_count = 100;
  cw.memory_depth = 8;
  const double q8 = memory_probability_q(k, {coh}, cw);
  cw.geometric_limit = true;
  const double qinf = memory_probability_q(k, {coh}, cw);
  CHECK(qinf == doctest::Approx(b / (1.0 - cc)).epsilon(1e-14));
  CHECK(std::abs(q8 - qinf) < std::pow(std::abs(cc), 8));
  cw.geometric_limit = false;
  cw.window_count = 3;
  CHECK(memory_probability_q(k, {coh}, cw) == doctest::Approx(b + b * cc + cc * cc).epsilon(1e-14));
  // explicit history, most recent first
  CHECK(memory_probability_q(k, {coh, vac}, cw) == doctest::Approx(b + cc * 1.0).epsilon(1e-14));
}

TEST_CASE("continuous-wave distribution") {
  const auto c = relaxation();
  const auto coh = photon_number_dist(StateSpec::coherent(2.0), 1.0, 0.0);
  const auto d = click_distribution_cw(coh, c, fig3());
  CHECK(d.total() == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(!d.meta.warnings.empty());  // xi(0.3) < 0.99
  auto c6 = fig3(), c7 = fig3();
  c6.window_count = 6;
  c7.window_count = 7;
  const auto a = click_distribution_cw(coh, c, c6), b = click_distribution_cw(coh, c, c7);
  double tv = 0.0;
  for (int n = 0; n <= a.n_max(); ++n) tv += 0.5 * std::abs(a[n] - b[n]);
  CHECK(tv < 1e-3);

  DetectorConfig ideal;
  const auto x = click_distribution_cw(coh, ideal, fig3());
  const auto y = click_distribution_independent(coh, ideal);
  for (int n = 0; n <= 20; ++n) CHECK(std::abs(x[n] - y[n]) < 1e-10);
  // first window is unaffected
  auto one = fig3();
  one.window_count = 1;
  const auto f = click_distribution_cw(coh, c, one);
  const auto g = click_distribution_independent(coh, c);
  for (int n = 0; n <= 10; ++n) CHECK(std::abs(f[n] - g[n]) < 1e-12);
}

TEST_CASE("default delta") {
  CHECK(default_delta(relaxation()) == doctest::Approx(0.3));
  DetectorConfig d;
  d.efficiency = EfficiencyProfile::dead_time(0.05);
  CHECK(default_delta(d) == doctest::Approx(0.05));
  d.efficiency = EfficiencyProfile::exponential(0.01, 0.02);
  CHECK(default_delta(d) == doctest::Approx(0.01 + 0.02 * std::log(100.0)));
  d.efficiency = EfficiencyProfile::tabulated({0.0, 0.1, 0.2}, {0.0, 0.0, 1.0});
  CHECK(default_delta(d) == doctest::Approx(0.199).epsilon(1e-9));
  CwConfig bad;
  bad.delta = 1.5;
  CHECK_THROWS_AS(bad.validate(relaxation()), DomainError);
}

TEST_CASE("first-window last-pulse density") {
  const auto c = relaxation();
  CHECK(last_pulse_density_first_window(c, 0.0, 0.3) == 0.0);
  const int K = 2000;
  std::vector<double> tau(K + 1);
  for (int i = 0; i <= K; ++i) tau[i] = static_cast<double>(i) / K;
  const auto G = last_pulse_density_first_window(c, 4.0, tau);
  double s = 0.0;
  for (int i = 0; i < K; ++i) s += 0.5 * (G[i] + G[i + 1]) / K;
  CHECK(std::exp(-4.0) + s == doctest::Approx(1.0).epsilon(1e-5));
  DetectorConfig ideal;
  for (double t : {0.0, 0.4, 1.0})
    CHECK(last_pulse_density_first_window(ideal, 4.0, t) == doctest::Approx(4.0 * std::exp(-4.0 * t)));
}
