#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "snspd/errors.hpp"
#include "snspd/montecarlo.hpp"
#include "snspd/povm_cw.hpp"
#include "snspd/povm_independent.hpp"
#include "snspd/validate.hpp"

using namespace snspd;

namespace {
DetectorConfig relaxation(double eta = 1.0) {
  DetectorConfig c;
  c.eta = eta;
  c.efficiency = EfficiencyProfile::exponential(0.05, 0.2);
  return c;
}
SimSpec spec(std::uint64_t trials, std::uint64_t seed) {
  SimSpec s;
  s.trials = trials;
  s.seed = seed;
  return s;
}
}  // namespace

TEST_CASE("single photon always clicks once") {
  const auto r = empirical_distribution(StateSpec::fock(1), relaxation(), spec(10000, 3));
  CHECK(r.windows == 10000);
  CHECK(r.counts.at(1) == 10000);
  const auto v = empirical_distribution(StateSpec::vacuum(), relaxation(), spec(5000, 3));
  CHECK(v.counts.at(0) == 5000);
  CHECK(v.mean_clicks() == 0.0);
}

TEST_CASE("ideal detector counts photons") {
  const auto r = empirical_distribution(StateSpec::coherent(2.0), DetectorConfig{}, spec(400000, 11));
  // Poisson mean 4, standard error 2/sqrt(N)
  CHECK(std::abs(r.mean_clicks() - 4.0) < 4 * 2.0 / std::sqrt(400000.0));
  const auto f = empirical_distribution(StateSpec::fock(5), DetectorConfig{}, spec(2000, 1));
  CHECK(f.counts.at(5) == 2000);
}

TEST_CASE("dead time caps the click count") {
  DetectorConfig d;
  d.efficiency = EfficiencyProfile::dead_time(0.05);
  SimSpec s = spec(20000, 5);
  s.record_gaps = true;
  const auto r = empirical_distribution(StateSpec::coherent(10.0), d, s);
  CHECK(static_cast<int>(r.counts.size()) - 1 <= 20);
  CHECK(!r.gaps.empty());
  CHECK(*std::min_element(r.gaps.begin(), r.gaps.end()) >= 0.05);
}

TEST_CASE("determinism and seed sensitivity") {
  const auto c = relaxation();
  const auto a = empirical_distribution(StateSpec::coherent(2.0), c, spec(30000, 42));
  const auto b = empirical_distribution(StateSpec::coherent(2.0), c, spec(30000, 42));
  const auto d = empirical_distribution(StateSpec::coherent(2.0), c, spec(30000, 43));
  CHECK(a.counts == b.counts);
  CHECK(a.counts != d.counts);
}

TEST_CASE("simulation matches the analytic distribution") {
  const auto c = relaxation(0.8);
  for (const auto& st : {StateSpec::coherent(2.0), StateSpec::fock(4), StateSpec::squeezed_vacuum(1.0)}) {
    const auto dist = click_distribution_independent(st, c);
    const auto r = empirical_distribution(st, c, spec(100000, 9));
    CHECK(worst_z(dist.probs, r.probs(), r.windows) < 4.0);
  }
}

TEST_CASE("fixed carry-in far from the window is fresh") {
  const auto c = relaxation();
  SimSpec s = spec(50000, 17);
  s.carry = CarryMode::fixed_tau;
  s.tau = std::numeric_limits<double>::infinity();
  const auto a = empirical_distribution(StateSpec::coherent(2.0), c, s);
  const auto b = empirical_distribution(StateSpec::coherent(2.0), c, spec(50000, 17));
  CHECK(a.counts == b.counts);
  s.tau = 0.0;
  const auto t = empirical_distribution(StateSpec::coherent(2.0), c, s);
  CHECK(t.mean_clicks() < b.mean_clicks());
}

TEST_CASE("contiguous windows are stationary after warm-up") {
  const auto c = relaxation();
  SimSpec s = spec(40000, 23);
  s.carry = CarryMode::contiguous;
  s.warm_up = 2;
  s.record_offsets = true;
  const auto a = empirical_distribution(StateSpec::coherent(2.0), c, s);
  s.warm_up = 8;
  s.windows_per_trial = 4;
  const auto b = empirical_distribution(StateSpec::coherent(2.0), c, s);
  CHECK(b.windows == 4 * 40000);
  CHECK(total_variation(a.probs(), b.probs()) < 0.01);
  CHECK(a.offsets.size() == a.windows);
  // contiguous windows see less efficiency than fresh ones
  const auto f = empirical_distribution(StateSpec::coherent(2.0), c, spec(40000, 23));
  CHECK(a.mean_clicks() < f.mean_clicks());
}

TEST_CASE("renewal gaps") {
  const auto c = relaxation();
  const auto g = simulate_gaps(c.efficiency, 1.0, 200000, 5);
  CHECK(g.size() == 200000);
  CHECK(*std::min_element(g.begin(), g.end()) >= 0.05);
  double mean = 0.0;
  for (double x : g) mean += x;
  mean /= g.size();
  // E[gap] = int_0^inf exp(-Phi(t)) dt
  double ref = 0.0;
  const double h = 1e-3;
  for (int i = 0; i < 40000; ++i) ref += h * std::exp(-c.efficiency.integral((i + 0.5) * h));
  CHECK(mean == doctest::Approx(ref).epsilon(1e-2));
  CHECK(simulate_gaps(c.efficiency, 1.0, 1000, 5) == simulate_gaps(c.efficiency, 1.0, 1000, 5));
}

TEST_CASE("invalid simulation specs") {
  SimSpec s;
  s.trials = 0;
  CHECK_THROWS_AS(s.validate(), DomainError);
  s = SimSpec{};
  s.carry = CarryMode::uniform_tau;
  CHECK_THROWS_AS(s.validate(), DomainError);
  s = SimSpec{};
  s.carry = CarryMode::contiguous;
  s.windows_per_trial = 0;
  CHECK_THROWS_AS(s.validate(), DomainError);
}
