#include "snspd/simplex_quad.hpp"

#include <algorithm>
#include <boost/random/sobol.hpp>
#include <cmath>
#include <random>
#include <sstream>

#include "snspd/errors.hpp"
#include "snspd/gauss_rules.hpp"

namespace snspd {

const char* to_string(QuadMethod m) { return m == QuadMethod::nested_gauss ? "nested_gauss" : "qmc_sobol"; }

void QuadratureSpec::validate() const {
  if (!(rel_tol > 0.0) || !(abs_tol > 0.0)) throw DomainError("quadrature tolerances must be > 0");
  if (gauss_order < 2) throw DomainError("gauss_order must be >= 2");
  if (qmc_samples < (1u << 10)) throw DomainError("qmc_samples must be >= 1024");
  if (chain_nodes < 16) throw DomainError("chain_nodes must be >= 16");
}

OrderedTimes::OrderedTimes(std::vector<double> times, double tau_m) : t_(std::move(times)) {
  check_ordered(t_, tau_m);
}

void check_ordered(std::span<const double> t, double tau_m) {
  const double slack = 1e-12 * tau_m;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (!std::isfinite(t[i]) || t[i] < -slack || t[i] > tau_m + slack)
      throw DomainError("click time outside the measurement window");
    if (i > 0 && t[i] < t[i - 1]) throw DomainError("click times are not ordered");
  }
}

namespace {

std::string describe_point(std::span<const double> t) {
  std::ostringstream os;
  os.precision(17);
  os << '(';
  for (std::size_t i = 0; i < t.size(); ++i) os << (i ? ", " : "") << t[i];
  os << ')';
  return os.str();
}

double checked_eval(const SimplexIntegrand& f, std::span<const double> t) {
  const double v = f(t);
  if (!std::isfinite(v)) throw NumericalError("non-finite integrand at t = " + describe_point(t));
  return v;
}

struct NestedGauss {
  int n;
  double lead, gap;
  const SimplexIntegrand& f;
  const GaussRule& rule;
  std::vector<double> s, t;
  std::uint64_t evals = 0;

  // Integral over s_1 <= ... <= s_k <= upper of the remaining coordinates.
  double inner(int k, double lo, double hi) {
    const double half = 0.5 * (hi - lo), mid = 0.5 * (hi + lo);
    double sum = 0.0;
    for (std::size_t q = 0; q < rule.x.size(); ++q) {
      s[k - 1] = mid + half * rule.x[q];
      double v;
      if (k == 1) {
        for (int i = 0; i < n; ++i) t[i] = s[i] + lead + i * gap;
        v = checked_eval(f, t);
        ++evals;
      } else {
        v = s[k - 1] > 0.0 ? inner(k - 1, 0.0, s[k - 1]) : 0.0;
      }
      sum += rule.w[q] * v;
    }
    return half * sum;
  }
};

double nested_value(int n, double L, double lead, double gap, const std::vector<double>& cuts,
                    const SimplexIntegrand& f, int order, std::uint64_t& evals) {
  NestedGauss ng{n, lead, gap, f, gauss_legendre(order), std::vector<double>(n), std::vector<double>(n)};
  double total = 0.0;
  for (std::size_t c = 0; c + 1 < cuts.size(); ++c) total += ng.inner(n, cuts[c], cuts[c + 1]);
  (void)L;
  evals += ng.evals;
  return total;
}

double lgamma_factorial(int n) { return std::lgamma(static_cast<double>(n) + 1.0); }

}  // namespace

QuadResult integrate_ordered(int n, double tau_m, const SimplexIntegrand& f, const QuadratureSpec& spec,
                             const SimplexHints& hints) {
  spec.validate();
  if (n < 1) throw DomainError("integrate_ordered: n must be >= 1");
  if (!(tau_m > 0.0)) throw DomainError("integrate_ordered: tau_m must be > 0");
  const double L = tau_m - hints.lead - (n - 1) * hints.min_gap;
  QuadResult res;
  if (L <= 0.0) return res;

  if (spec.method == QuadMethod::nested_gauss) {
    if (n > 5) throw DomainError("nested_gauss is limited to n <= 5; use qmc_sobol");
    std::vector<double> cuts{0.0};
    const double shift = hints.lead + (n - 1) * hints.min_gap;
    for (double b : hints.last_breaks) {
      const double sb = b - shift;
      if (sb > 1e-14 * tau_m && sb < L - 1e-14 * tau_m) cuts.push_back(sb);
    }
    cuts.push_back(L);
    std::sort(cuts.begin(), cuts.end());
    const int low = std::max(2, spec.gauss_order / 2);
    res.value = nested_value(n, L, hints.lead, hints.min_gap, cuts, f, spec.gauss_order, res.evaluations);
    const double coarse = nested_value(n, L, hints.lead, hints.min_gap, cuts, f, low, res.evaluations);
    res.error = std::abs(res.value - coarse);
    return res;
  }

  // Randomly shifted Sobol replicates, mapped onto the simplex by sorting.
  constexpr int replicates = 16;
  const std::uint64_t per = std::max<std::uint64_t>(spec.qmc_samples / replicates, 64);
  std::vector<std::uint64_t> pts(per * static_cast<std::uint64_t>(n));
  {
    boost::random::sobol eng(static_cast<std::size_t>(n));
    for (auto& v : pts) v = eng();
  }
  std::mt19937_64 shift_rng(spec.seed);
  const double volume = std::exp(n * std::log(L) - lgamma_factorial(n));
  std::vector<double> u(n), t(n);
  std::vector<double> estimates;
  for (int r = 0; r < replicates; ++r) {
    std::vector<std::uint64_t> shift(n);
    for (auto& s : shift) s = shift_rng();
    double sum = 0.0;
    for (std::uint64_t p = 0; p < per; ++p) {
      for (int d = 0; d < n; ++d) {
        const std::uint64_t v = pts[p * n + d] ^ shift[d];
        u[d] = (static_cast<double>(v >> 11) + 0.5) * 0x1.0p-53;
      }
      std::sort(u.begin(), u.end());
      for (int i = 0; i < n; ++i) t[i] = L * u[i] + hints.lead + i * hints.min_gap;
      sum += checked_eval(f, t);
    }
    estimates.push_back(volume * sum / static_cast<double>(per));
    res.evaluations += per;
  }
  double mean = 0.0;
  for (double e : estimates) mean += e;
  mean /= replicates;
  double var = 0.0;
  for (double e : estimates) var += (e - mean) * (e - mean);
  var /= (replicates - 1);
  res.value = mean;
  res.error = std::sqrt(var / replicates);
  return res;
}

QuadResult integrate_cube(int n, double tau_m, const SimplexIntegrand& f, int order) {
  if (n < 1 || n > 6) throw DomainError("integrate_cube: 1 <= n <= 6");
  const auto& rule = gauss_legendre(order);
  const std::size_t G = rule.x.size();
  std::vector<std::size_t> idx(n, 0);
  std::vector<double> t(n);
  QuadResult res;
  while (true) {
    double w = 1.0;
    for (int d = 0; d < n; ++d) {
      t[d] = 0.5 * tau_m * (1.0 + rule.x[idx[d]]);
      w *= 0.5 * tau_m * rule.w[idx[d]];
    }
    res.value += w * checked_eval(f, t);
    ++res.evaluations;
    int d = 0;
    while (d < n && ++idx[d] == G) idx[d++] = 0;
    if (d == n) break;
  }
  return res;
}

}  // namespace snspd
