#include <doctest.h>

#include <atomic>
#include <cmath>
#include <numeric>

#include "snspd/errors.hpp"
#include "snspd/gauss_rules.hpp"
#include "snspd/parallel.hpp"
#include "snspd/simplex_quad.hpp"

using namespace snspd;

namespace {
double factorial(int n) { return std::tgamma(n + 1.0); }
}  // namespace

TEST_CASE("gauss legendre rules") {
  for (int order : {2, 8, 32}) {
    const auto& g = gauss_legendre(order);
    CHECK(g.x.size() == static_cast<std::size_t>(order));
    CHECK(std::accumulate(g.w.begin(), g.w.end(), 0.0) == doctest::Approx(2.0).epsilon(1e-14));
    // exact through degree 2 order - 1
    double s = 0.0;
    for (int i = 0; i < order; ++i) s += g.w[i] * std::pow(g.x[i], 2 * order - 2);
    CHECK(s == doctest::Approx(2.0 / (2 * order - 1)).epsilon(1e-12));
  }
}

TEST_CASE("composite weights integrate cubics exactly") {
  for (int k : {1, 2, 3, 7, 10}) {
    const double h = 1.0 / k;
    auto w = composite_weights(k, h);
    double s = 0.0;
    for (int i = 0; i <= k; ++i) s += w[i] * (k == 1 ? i * h : std::pow(i * h, 3));
    CHECK(s == doctest::Approx(k == 1 ? 0.5 : 0.25).epsilon(1e-13));
  }
}

TEST_CASE("simplex volume and moments") {
  QuadratureSpec q;
  for (int n = 1; n <= 5; ++n) {
    auto r = integrate_ordered(n, 2.0, [](std::span<const double>) { return 1.0; }, q);
    CHECK(r.value == doctest::Approx(std::pow(2.0, n) / factorial(n)).epsilon(1e-12));
  }
  // integral of t_n over the unit simplex is n / (n+1)!
  auto r = integrate_ordered(3, 1.0, [](std::span<const double> t) { return t[2]; }, q);
  CHECK(r.value == doctest::Approx(3.0 / 24.0).epsilon(1e-12));
}

TEST_CASE("symmetric integrand: ordered simplex equals cube over n!") {
  auto f = [](std::span<const double> t) {
    double p = 1.0;
    for (double x : t) p *= std::exp(-x) * (1.0 + x);
    return p;
  };
  QuadratureSpec q;
  for (int n = 1; n <= 4; ++n) {
    const double cube = integrate_cube(n, 1.0, f, 16).value;
    CHECK(integrate_ordered(n, 1.0, f, q).value == doctest::Approx(cube / factorial(n)).epsilon(1e-10));
  }
}

TEST_CASE("dead-time support hints") {
  // volume of {t ordered in [0,1], gaps >= d} is (1 - (n-1) d)^n / n!
  const double d = 0.1;
  SimplexHints h;
  h.min_gap = d;
  QuadratureSpec q;
  for (int n = 2; n <= 4; ++n) {
    auto f = [&](std::span<const double> t) {
      for (std::size_t i = 1; i < t.size(); ++i)
        if (t[i] - t[i - 1] < d) return 0.0;
      return 1.0;
    };
    auto r = integrate_ordered(n, 1.0, f, q, h);
    CHECK(r.value == doctest::Approx(std::pow(1.0 - (n - 1) * d, n) / factorial(n)).epsilon(1e-10));
  }
}

TEST_CASE("qmc agrees with nested gauss") {
  auto f = [](std::span<const double> t) {
    double s = 0.0;
    for (double x : t) s += x * x;
    return std::exp(-s);
  };
  QuadratureSpec g, m;
  m.method = QuadMethod::qmc_sobol;
  for (int n : {2, 4}) {
    const auto a = integrate_ordered(n, 1.0, f, g);
    const auto b = integrate_ordered(n, 1.0, f, m);
    CHECK(std::abs(a.value - b.value) < 1e-5 * a.value + 5 * b.error);
  }
  // reproducible for a given seed
  CHECK(integrate_ordered(7, 1.0, f, m).value == integrate_ordered(7, 1.0, f, m).value);
  // high dimension: volume 1/n!
  auto v = integrate_ordered(10, 1.0, [](std::span<const double>) { return 1.0; }, m);
  CHECK(v.value == doctest::Approx(1.0 / factorial(10)).epsilon(1e-12));
}

TEST_CASE("errors") {
  QuadratureSpec q;
  CHECK_THROWS_AS(integrate_ordered(6, 1.0, [](std::span<const double>) { return 1.0; }, q), DomainError);
  CHECK_THROWS_AS(integrate_ordered(2, 1.0, [](std::span<const double>) { return NAN; }, q), NumericalError);
  CHECK_THROWS_AS(OrderedTimes({0.5, 0.2}, 1.0), DomainError);
  CHECK_THROWS_AS(OrderedTimes({0.5, 1.2}, 1.0), DomainError);
  QuadratureSpec bad;
  bad.rel_tol = 0.0;
  CHECK_THROWS_AS(bad.validate(), DomainError);
}

TEST_CASE("parallel_for covers every index once") {
  std::vector<std::atomic<int>> hits(1000);
  parallel_for(hits.size(), [&](std::size_t i) { ++hits[i]; });
  for (auto& h : hits) CHECK(h.load() == 1);
  CHECK_THROWS(parallel_for(10, [](std::size_t i) {
    if (i == 3) throw std::runtime_error("x");
  }));
}
