#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>

#include "snspd/detector_model.hpp"
#include "snspd/errors.hpp"

using namespace snspd;

TEST_CASE("efficiency profiles") {
  auto ideal = EfficiencyProfile::ideal();
  CHECK(ideal(0.0) == 1.0);
  CHECK(ideal(3.0) == 1.0);
  CHECK(ideal(-0.1) == 0.0);

  auto dt = EfficiencyProfile::dead_time(0.05);
  CHECK(dt(0.049) == 0.0);
  CHECK(dt(0.05) == 1.0);  // right-continuous at tau_d
  CHECK(dt.has_dead_time());

  auto ex = EfficiencyProfile::exponential(0.05, 0.2);
  CHECK(ex(0.05) == 0.0);
  CHECK(ex(0.25) == doctest::Approx(1.0 - std::exp(-1.0)).epsilon(1e-14));
  CHECK(ex(1e9) == doctest::Approx(1.0));

  // tau_r = 0 collapses to a pure dead time
  CHECK(EfficiencyProfile::exponential(0.05, 0.0).kind() == ProfileKind::dead_time_only);

  CHECK_THROWS_AS(EfficiencyProfile::dead_time(-1.0), DomainError);
  CHECK_THROWS_AS(EfficiencyProfile::tabulated({0.0, 1.0}, {0.0, 1.2}), DomainError);
}

TEST_CASE("profile integral matches quadrature") {
  auto ex = EfficiencyProfile::exponential(0.05, 0.2);
  for (double u : {0.0, 0.03, 0.05, 0.1, 0.7, 1.3}) {
    const int K = 20000;
    double s = 0.0;
    for (int i = 0; i < K; ++i) s += ex((i + 0.5) * u / K) * u / K;
    CHECK(ex.integral(u) == doctest::Approx(s).epsilon(1e-7));
  }
  auto tab = EfficiencyProfile::tabulated({0.0, 0.1, 0.3}, {0.0, 0.5, 1.0});
  CHECK(tab(0.05) == doctest::Approx(0.25));
  CHECK(tab.integral(0.3) == doctest::Approx(0.025 + 0.15));
  CHECK(tab.integral(0.5) == doctest::Approx(0.175 + 0.2));
}

TEST_CASE("scaled profile") {
  auto ex = EfficiencyProfile::exponential(0.05, 0.2).scaled(2.0);
  CHECK(ex.tau_d() == doctest::Approx(0.1));
  CHECK(ex.tau_r() == doctest::Approx(0.4));
}

TEST_CASE("mode profile normalization") {
  auto m = ModeProfile::tabulated({0.0, 0.5, 1.0}, {0.0, 2.0, 0.0});
  CHECK(m.shape_cumulative(1.0) == doctest::Approx(1.0));
  CHECK(m.shape_cumulative(0.5) == doctest::Approx(0.5));
  CHECK(m.shape_quantile(0.5) == doctest::Approx(0.5));
  for (double u : {0.1, 0.3, 0.77}) CHECK(m.shape_cumulative(m.shape_quantile(u)) == doctest::Approx(u));
  CHECK(cumulative_intensity(m, 2.0, 0.0, 2.0) == doctest::Approx(1.0));
  CHECK(eval_intensity(ModeProfile::monochromatic(), 2.0, 0.7) == doctest::Approx(0.5));
}

TEST_CASE("detector config") {
  DetectorConfig c;
  c.efficiency = EfficiencyProfile::dead_time(0.05);
  CHECK(c.max_clicks() == 21);
  c.efficiency = EfficiencyProfile::ideal();
  CHECK(c.max_clicks() == -1);
  c.eta = 0.8;
  c.nu = 0.1;
  CHECK(effective_mean(c, 4.0) == doctest::Approx(3.3));
  c.eta = 1.2;
  CHECK_THROWS_AS(c.validate(), DomainError);
}

TEST_CASE("exposure") {
  DetectorConfig c;
  c.efficiency = EfficiencyProfile::exponential(0.05, 0.2);
  // click at -inf: plain cumulative intensity
  CHECK(exposure(c, -INFINITY, 0.2, 0.7) == doctest::Approx(0.5));
  const double e = exposure(c, 0.1, 0.1, 1.0);
  CHECK(e == doctest::Approx(c.efficiency.integral(0.9)));
  // general mode path agrees with the closed form for a flat table
  DetectorConfig g = c;
  g.mode = ModeProfile::tabulated({0.0, 1.0}, {1.0, 1.0});
  CHECK(exposure(g, 0.1, 0.1, 1.0) == doctest::Approx(e).epsilon(1e-9));
  CHECK(exposure(g, -0.03, 0.0, 0.6) == doctest::Approx(exposure(c, -0.03, 0.0, 0.6)).epsilon(1e-9));
}

TEST_CASE("profile csv round trip") {
  const std::string path = "test_profile_rt.csv";
  auto tab = EfficiencyProfile::tabulated({0.0, 0.1, 0.2}, {0.0, 0.4, 1.0});
  save_profile_csv(tab, path);
  auto back = load_profile_csv(path);
  CHECK(back.table_t() == tab.table_t());
  CHECK(back.table_xi() == tab.table_xi());
  auto scaled = load_profile_csv(path, 2.0);
  CHECK(scaled.table_t()[2] == doctest::Approx(0.4));
  std::remove(path.c_str());
  CHECK_THROWS_AS(load_profile_csv("does_not_exist.csv"), DomainError);
}
