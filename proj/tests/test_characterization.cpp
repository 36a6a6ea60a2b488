#include <doctest.h>

#include <cmath>

#include "snspd/characterization.hpp"
#include "snspd/errors.hpp"
#include "snspd/montecarlo.hpp"

using namespace snspd;

TEST_CASE("dead time shows as an empty histogram head") {
  const auto p = EfficiencyProfile::dead_time(0.1);
  const auto g = simulate_gaps(p, 1.0, 500000, 2);
  ReconstructionSpec s;
  s.bin_width = 0.02;
  s.t_max = 2.0;
  const auto r = reconstruct_efficiency(g, s);
  CHECK(r.tail_corrected);
  CHECK(!r.warnings.empty());
  CHECK(r.samples_used == g.size());
  CHECK(r.lambda == doctest::Approx(1.0).epsilon(0.02));
  for (std::size_t i = 0; i < r.profile.table_t().size(); ++i) {
    const double t = r.profile.table_t()[i], x = r.profile.table_xi()[i];
    if (t < 0.1) CHECK(x == 0.0);
    if (t > 0.12) CHECK(x == doctest::Approx(1.0).epsilon(0.08));
  }
}

TEST_CASE("exponential recovery is recovered") {
  const auto p = EfficiencyProfile::exponential(0.05, 0.2);
  const auto g = simulate_gaps(p, 1.0, 2000000, 8);
  ReconstructionSpec s;
  s.bin_width = 0.02;
  s.t_max = 2.0;
  const auto r = reconstruct_efficiency(g, s);
  double worst = 0.0;
  for (std::size_t i = 0; i < r.profile.table_t().size(); ++i) {
    const double t = r.profile.table_t()[i];
    if (t <= 0.65) worst = std::max(worst, std::abs(r.profile.table_xi()[i] - p(t)));
  }
  CHECK(worst < 0.03);
}

TEST_CASE("low rate uses the raw density") {
  const auto p = EfficiencyProfile::exponential(0.05, 0.2);
  const auto g = simulate_gaps(p, 0.02, 400000, 4);
  ReconstructionSpec s;
  s.bin_width = 0.05;
  s.t_max = 1.0;
  s.lambda_hint = 0.02;
  const auto r = reconstruct_efficiency(g, s);
  CHECK(!r.tail_corrected);
  CHECK(r.lambda == 0.02);
  CHECK(r.warnings.empty());
  // the density of a gap is lambda xi(t) exp(-lambda Phi(t)); exp(-0.02) ~ 0.98 at most
  const auto& t = r.profile.table_t();
  for (std::size_t i = 0; i < t.size(); ++i)
    if (t[i] > 0.3) CHECK(r.profile.table_xi()[i] == doctest::Approx(p(t[i])).epsilon(0.2));
}

TEST_CASE("time rescaling") {
  const auto p = EfficiencyProfile::exponential(0.05, 0.2);
  auto g = simulate_gaps(p, 1.0, 200000, 6);
  ReconstructionSpec s;
  s.bin_width = 0.02;
  s.t_max = 2.0;
  const auto a = reconstruct_efficiency(g, s);
  for (double& x : g) x *= 1e-9;
  s.bin_width *= 1e-9;
  s.t_max *= 1e-9;
  const auto b = reconstruct_efficiency(g, s);
  CHECK(b.lambda == doctest::Approx(a.lambda * 1e9).epsilon(1e-9));
  REQUIRE(a.profile.table_xi().size() == b.profile.table_xi().size());
  for (std::size_t i = 0; i < a.profile.table_xi().size(); ++i)
    CHECK(a.profile.table_xi()[i] == doctest::Approx(b.profile.table_xi()[i]).epsilon(1e-9));
}

TEST_CASE("previous-gap filter") {
  const std::vector<double> g = {0.5, 0.1, 0.9, 0.2, 0.3};
  ReconstructionSpec s;
  s.bin_width = 0.1;
  s.t_max = 1.0;
  s.lambda_hint = 1.0;
  s.previous_gap_min = 0.4;
  CHECK(reconstruct_efficiency(g, s).samples_used == 2);
}

TEST_CASE("reconstruction input errors") {
  ReconstructionSpec s;
  CHECK_THROWS_AS(reconstruct_efficiency(std::vector<double>{}, s), DomainError);
  CHECK_THROWS_AS(reconstruct_efficiency(std::vector<double>{0.1, -1.0}, s), DomainError);
  s.bin_width = 0.0;
  CHECK_THROWS_AS(reconstruct_efficiency(std::vector<double>{0.1}, s), DomainError);
  s = ReconstructionSpec{};
  s.t_max = 0.005;
  CHECK_THROWS_AS(s.validate(), DomainError);
}
