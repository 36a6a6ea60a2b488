#include "snspd/povm_independent.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "fock_tables.hpp"
#include "snspd/errors.hpp"
#include "snspd/io.hpp"
#include "snspd/pulse_chain.hpp"

namespace snspd {

PulseWeights pulse_weights(const DetectorConfig& config, std::span<const double> t) {
  check_ordered(t, config.tau_m);
  PulseWeights w;
  const std::size_t n = t.size();
  if (n == 0) return w;
  const auto& xi = config.efficiency;
  const double tau_m = config.tau_m;
  double script = config.intensity(t[0]);
  for (std::size_t i = 1; i < n && script != 0.0; ++i) script *= config.intensity(t[i]) * xi(t[i] - t[i - 1]);
  double big = cumulative_intensity(config.mode, tau_m, 0.0, t[0]);
  for (std::size_t i = 0; i < n; ++i) {
    const double end = (i + 1 < n) ? t[i + 1] : tau_m;
    big += exposure(config, t[i], t[i], end);
  }
  w.script_i = script;
  w.big_xi = big;
  return w;
}

ConditionalMatrix::ConditionalMatrix(int n_max, int m_max, std::string scenario)
    : n_max_(n_max), m_max_(m_max), scenario_(std::move(scenario)) {
  if (n_max < 0 || m_max < 0) throw DomainError("matrix dimensions must be >= 0");
  e_.assign(static_cast<std::size_t>(n_max + 1) * (m_max + 1), 0.0);
}

double ConditionalMatrix::operator()(int n, int m) const {
  if (n < 0 || m < 0 || m > m_max_) throw DomainError("matrix index out of range");
  if (n > n_max_) return 0.0;
  return e_[static_cast<std::size_t>(n) * (m_max_ + 1) + m];
}

double& ConditionalMatrix::at(int n, int m) {
  if (n < 0 || n > n_max_ || m < 0 || m > m_max_) throw DomainError("matrix index out of range");
  return e_[static_cast<std::size_t>(n) * (m_max_ + 1) + m];
}

double ConditionalMatrix::column_sum(int m) const {
  double s = 0.0;
  for (int n = 0; n <= n_max_; ++n) s += (*this)(n, m);
  return s;
}

double ClickDistribution::total() const {
  double s = 0.0;
  for (double p : probs) s += p;
  return s;
}

int default_n_max(const DetectorConfig& config, int m_max) {
  const int cap = config.max_clicks();
  return cap >= 0 ? std::min(cap, m_max) : m_max;
}

namespace detail {

double clamp_probability(double v, const char* what) {
  constexpr double slack = 1e-6;
  if (!std::isfinite(v) || v < -slack || v > 1.0 + slack) {
    std::ostringstream os;
    os << what << ": value " << v << " outside [0,1]";
    throw NumericalError(os.str());
  }
  return std::clamp(v, 0.0, 1.0);
}

FockTables fock_tables(const DetectorConfig& config, int n_max, int m_max, double delta, bool averaged,
                       const QuadratureSpec& spec) {
  spec.validate();
  config.validate();
  if (m_max < 0 || m_max > kMaxPhotonCutoff) throw DomainError("m_max must lie in [0, 256]");
  if (n_max < 0) throw DomainError("n_max must be >= 0");
  FockTables out;
  out.p = ConditionalMatrix(n_max, m_max, "independent");
  out.regular = ConditionalMatrix(n_max, m_max, "independent_regular");
  if (averaged) out.d = ConditionalMatrix(n_max, m_max, "continuous_wave_averaged");
  out.a.assign(m_max + 1, 1.0);
  out.b.assign(m_max + 1, 1.0);
  const auto& xi = config.efficiency;

  if (xi.kind() == ProfileKind::ideal) {
    // Memoryless detector: every photon clicks.
    const double tail = delta > 0.0 ? cumulative_intensity(config.mode, config.tau_m, config.tau_m - delta, config.tau_m)
                                    : 0.0;
    for (int m = 0; m <= m_max; ++m) {
      if (m <= n_max) {
        out.p.at(m, m) = 1.0;
        out.regular.at(m, m) = 1.0;
        if (averaged) out.d.at(m, m) = 1.0;
      }
      out.a[m] = out.b[m] = std::pow(1.0 - tail, m);
    }
    return out;
  }

  const DetectorConfig unit = config.unit_efficiency();
  PulseChain chain(unit, n_max, delta, spec.chain_nodes);
  const int L = chain.levels();
  const std::size_t fresh_outputs = 2 * static_cast<std::size_t>(L + 1) + 1;
  const std::size_t outputs = fresh_outputs + (averaged ? static_cast<std::size_t>(L + 2) : 0);
  auto fn = [&](cplx x, int max_level) {
    const int lv = std::min(L, max_level);
    std::vector<cplx> v(outputs, 0.0);
    const auto f = chain.evaluate(x, CarryIn::fresh(), lv);
    for (int n = 0; n <= lv; ++n) {
      v[n] = f.pi[n];
      v[L + 1 + n] = f.regular[n];
    }
    v[2 * (L + 1)] = f.tail;
    if (averaged) {
      const auto g = chain.evaluate(x, CarryIn::averaged(), lv);
      for (int n = 0; n <= lv; ++n) v[fresh_outputs + n] = g.pi[n];
      v[fresh_outputs + L + 1] = g.tail;
    }
    return v;
  };
  const auto coef = fock_coefficients(fn, outputs, m_max);
  for (int n = 0; n <= std::min(n_max, L); ++n)
    for (int m = n; m <= m_max; ++m) {
      out.p.at(n, m) = clamp_probability(coef[n][m], "P_{n|m}");
      out.regular.at(n, m) = clamp_probability(coef[L + 1 + n][m], "regular P_{n|m}");
      if (averaged) out.d.at(n, m) = clamp_probability(coef[fresh_outputs + n][m], "D_{n|m}");
    }
  if (delta > 0.0)
    for (int m = 0; m <= m_max; ++m) {
      out.a[m] = clamp_probability(1.0 - coef[2 * (L + 1)][m], "A_m");
      if (averaged) out.b[m] = clamp_probability(1.0 - coef[fresh_outputs + L + 1][m], "B_m");
    }
  // The no-click column is exact: vacuum never clicks.
  out.a[0] = out.b[0] = 1.0;
  return out;
}

}  // namespace detail

std::vector<double> povm_symbols(const DetectorConfig& config, double alpha_sq, int n_max, const QuadratureSpec& spec) {
  config.validate();
  spec.validate();
  if (!(alpha_sq >= 0.0)) throw DomainError("alpha_sq must be >= 0");
  if (n_max < 0) throw DomainError("n_max must be >= 0");
  const double x = effective_mean(config, alpha_sq);
  std::vector<double> out(n_max + 1, 0.0);
  if (config.efficiency.kind() == ProfileKind::ideal) {
    for (int n = 0; n <= n_max; ++n)
      out[n] = x == 0.0 ? (n == 0 ? 1.0 : 0.0) : std::exp(-x + n * std::log(x) - std::lgamma(n + 1.0));
    return out;
  }
  PulseChain chain(config, n_max, 0.0, spec.chain_nodes);
  const auto v = chain.evaluate(cplx(x, 0.0), CarryIn::fresh());
  out[0] = detail::clamp_probability(v.pi[0].real(), "Pi_0");
  for (int n = 1; n < static_cast<int>(v.pi.size()) && n <= n_max; ++n)
    out[n] = detail::clamp_probability(v.pi[n].real(), "Pi_n");
  return out;
}

double povm_symbol(const DetectorConfig& config, int n, double alpha_sq, const QuadratureSpec& spec) {
  if (n < 0) throw DomainError("n must be >= 0");
  const int cap = config.max_clicks();
  if (cap >= 0 && n > cap) return 0.0;
  return povm_symbols(config, alpha_sq, n, spec)[n];
}

ConditionalMatrix cond_prob_matrix(const DetectorConfig& config, int n_max, int m_max, const QuadratureSpec& spec) {
  if (m_max < n_max) throw DomainError("cond_prob_matrix: m_max must be >= n_max");
  return detail::fock_tables(config, n_max, m_max, 0.0, false, spec).p;
}

ConditionalMatrix regular_matrix(const DetectorConfig& config, int n_max, int m_max, const QuadratureSpec& spec) {
  if (m_max < n_max) throw DomainError("regular_matrix: m_max must be >= n_max");
  return detail::fock_tables(config, n_max, m_max, 0.0, false, spec).regular;
}

namespace {

double falling_factorial_log(int m, int n) { return std::lgamma(m + 1.0) - std::lgamma(m - n + 1.0); }

// (1 - xi)^k in log space; tiny negative bases are clamped to zero.
double survival_power(double big_xi, int k) {
  const double base = 1.0 - big_xi;
  if (base < -1e-12) throw NumericalError("exposure exceeds one at a quadrature node");
  if (k == 0) return 1.0;
  if (base <= 0.0) return 0.0;
  return std::exp(k * std::log(base));
}

QuadratureSpec spec_for_dimension(QuadratureSpec spec, int n) {
  if (n > 5 && spec.method == QuadMethod::nested_gauss) spec.method = QuadMethod::qmc_sobol;
  return spec;
}

SimplexHints support_hints(const DetectorConfig& config) {
  SimplexHints h;
  if (config.efficiency.has_dead_time()) {
    h.min_gap = config.efficiency.tau_d();
    h.last_breaks.push_back(config.tau_m - config.efficiency.tau_d());
  }
  return h;
}

}  // namespace

QuadResult cond_prob_direct(const DetectorConfig& config, int n, int m, const QuadratureSpec& spec) {
  if (n < 0 || m < 0) throw DomainError("indices must be >= 0");
  if (m < n) return {};
  if (n == 0) return {m == 0 ? 1.0 : 0.0, 0.0, 0};
  const int cap = config.max_clicks();
  if (cap >= 0 && n > cap) return {};
  if (config.efficiency.kind() == ProfileKind::ideal) return {m == n ? 1.0 : 0.0, 0.0, 0};
  const DetectorConfig unit = config.unit_efficiency();
  const double pre = std::exp(falling_factorial_log(m, n));
  auto f = [&](std::span<const double> t) {
    const auto w = pulse_weights(unit, t);
    if (w.script_i == 0.0) return 0.0;
    return pre * w.script_i * survival_power(w.big_xi, m - n);
  };
  return integrate_ordered(n, config.tau_m, f, spec_for_dimension(spec, n), support_hints(config));
}

SplitParts regular_irregular_split(const DetectorConfig& config, int n, int m, const QuadratureSpec& spec) {
  const auto& xi = config.efficiency;
  if (xi.kind() != ProfileKind::dead_time_only && xi.kind() != ProfileKind::exponential_recovery)
    throw ContractError("regular/irregular split needs a built-in dead-time profile");
  if (n < 0 || m < 0) throw DomainError("indices must be >= 0");
  SplitParts out;
  if (m < n) return out;
  if (n == 0) {
    out.regular = m == 0 ? 1.0 : 0.0;
    return out;
  }
  const int cap = config.max_clicks();
  if (cap >= 0 && n > cap) return out;
  const double tau_m = config.tau_m, tau_d = xi.tau_d();
  const double pre = std::exp(falling_factorial_log(m, n));
  const auto qspec = spec_for_dimension(spec, n);

  if (!config.mode.is_monochromatic()) {
    const DetectorConfig unit = config.unit_efficiency();
    auto part = [&](bool regular) {
      SimplexHints hints = support_hints(config);
      hints.last_breaks = {tau_m - tau_d};
      return integrate_ordered(
          n, tau_m,
          [&](std::span<const double> t) {
            if ((t.back() <= tau_m - tau_d) != regular) return 0.0;
            const auto w = pulse_weights(unit, t);
            return w.script_i == 0.0 ? 0.0 : pre * w.script_i * survival_power(w.big_xi, m - n);
          },
          qspec, hints);
    };
    const auto r = part(true), i = part(false);
    return {r.value, i.value, r.error + i.error};
  }

  // Gap coordinates: first click time, then the free parts of each gap after
  // its dead time. recovery(g) = 1 - exp(-g/tau_r) is the efficiency reached.
  const double tau_r = xi.tau_r();
  auto recovery = [&](double g) {
    if (xi.kind() == ProfileKind::dead_time_only) return 1.0;
    return -std::expm1(-std::max(g, 0.0) / tau_r);
  };
  const double eta_n = (tau_m - n * tau_d) / tau_m;
  const double eta_prev = (tau_m - (n - 1) * tau_d) / tau_m;
  const double ratio = (xi.kind() == ProfileKind::dead_time_only) ? 0.0 : tau_r / tau_m;
  const double scale = std::pow(tau_m, -n);

  // Regular part: the final dead time fits inside the window.
  const double Lr = tau_m - n * tau_d;
  if (Lr > 0.0) {
    auto f = [&](std::span<const double> s) {
      double prod = 1.0, sum_rec = 0.0;
      for (int k = 0; k + 1 < n; ++k) {
        const double r = recovery(s[k + 1] - s[k]);
        prod *= r;
        sum_rec += r;
      }
      sum_rec += recovery(Lr - s[n - 1]);
      const double big = eta_n - ratio * sum_rec;
      return pre * scale * prod * survival_power(big, m - n);
    };
    const auto r = integrate_ordered(n, Lr, f, qspec);
    out.regular = r.value;
    out.error += r.error;
  }
  // Irregular part: the last click lies within tau_d of the window end.
  const double Li = tau_m - (n - 1) * tau_d;
  if (Li > 0.0) {
    const double wmax = std::min(tau_d, Li);
    auto f = [&](std::span<const double> s) {
      const double w = Li - s[n - 1];
      if (w > wmax) return 0.0;
      double prod = 1.0, sum_rec = 0.0;
      for (int k = 0; k + 1 < n; ++k) {
        const double r = recovery(s[k + 1] - s[k]);
        prod *= r;
        sum_rec += r;
      }
      const double big = eta_prev - w / tau_m - ratio * sum_rec;
      return pre * scale * prod * survival_power(big, m - n);
    };
    SimplexHints hints;
    hints.last_breaks = {Li - wmax};
    const auto r = integrate_ordered(n, Li, f, qspec, hints);
    out.irregular = r.value;
    out.error += r.error;
  }
  return out;
}

namespace {

// <m| F_k[eta] |m> = C(m,k) eta^k (1-eta)^(m-k).
double binomial_element(int m, int k, double eta) {
  if (k < 0 || k > m) return 0.0;
  eta = std::clamp(eta, 0.0, 1.0);
  if (eta == 1.0) return k == m ? 1.0 : 0.0;
  if (eta == 0.0) return k == 0 ? 1.0 : 0.0;
  return std::exp(std::lgamma(m + 1.0) - std::lgamma(k + 1.0) - std::lgamma(m - k + 1.0) + k * std::log(eta) +
                  (m - k) * std::log1p(-eta));
}

}  // namespace

double deadtime_closed_form(const DetectorConfig& config, int n, int m) {
  const auto& xi = config.efficiency;
  if (xi.kind() == ProfileKind::exponential_recovery)
    throw ContractError("deadtime_closed_form requires zero relaxation time");
  if (xi.kind() == ProfileKind::tabulated) throw ContractError("deadtime_closed_form requires a dead-time profile");
  if (!config.mode.is_monochromatic()) throw ContractError("deadtime_closed_form requires the monochromatic mode");
  if (n < 0 || m < 0) throw DomainError("indices must be >= 0");
  if (m < n) return 0.0;
  if (!xi.has_dead_time()) return n == m ? 1.0 : 0.0;
  const double tau_m = config.tau_m, tau_d = xi.tau_d();
  const int N = config.max_clicks() - 1;
  auto eta = [&](int j) { return std::max(0.0, (tau_m - j * tau_d) / tau_m); };
  if (n > N + 1) return 0.0;
  if (n == N + 1) {
    double s = 0.0;
    for (int k = 0; k <= N; ++k) s += binomial_element(m, k, eta(N));
    return std::clamp(1.0 - s, 0.0, 1.0);
  }
  double v = binomial_element(m, n, eta(n));
  for (int k = 0; k < n; ++k) v += binomial_element(m, k, eta(n)) - binomial_element(m, k, eta(n - 1));
  return std::clamp(v, 0.0, 1.0);
}

double diag_same_number(const DetectorConfig& config, int n) {
  if (n < 0) throw DomainError("n must be >= 0");
  if (n <= 1) return 1.0;
  const auto& xi = config.efficiency;
  if (!config.mode.is_monochromatic()) throw ContractError("diag_same_number requires the monochromatic mode");
  if (xi.kind() == ProfileKind::tabulated) throw ContractError("diag_same_number requires a built-in profile");
  if (xi.kind() == ProfileKind::ideal) return 1.0;
  const int cap = config.max_clicks();
  if (cap >= 0 && n > cap) return 0.0;
  const long double tau_m = config.tau_m, tau_d = xi.tau_d();
  const long double L = tau_m - (n - 1) * tau_d;
  if (L <= 0) return 0.0;
  if (xi.kind() == ProfileKind::dead_time_only) return static_cast<double>(std::pow(L / tau_m, n));

  const long double tau_r = xi.tau_r();
  const long double a = L / tau_r;
  auto lf = [](int k) { return std::lgamma(static_cast<long double>(k) + 1.0L); };
  long double first = 0.0L;
  for (int l = 0; l <= n; ++l) {
    const long double mag =
        std::exp(l * std::log(a) + lf(n) + lf(2 * n - 2 - l) - lf(l) - lf(n - l) - lf(n - 2));
    first += ((n - l) % 2 == 0 ? 1.0L : -1.0L) * mag;
  }
  long double second = 0.0L;
  for (int l = 0; l <= n - 2; ++l) second += std::exp(l * std::log(a) + lf(2 * n - 2 - l) - lf(l) - lf(n - l - 2));
  second *= ((n - 1) % 2 == 0 ? 1.0L : -1.0L) * std::exp(-a);
  const long double v = std::pow(tau_r / tau_m, static_cast<long double>(n)) * (first + second);
  return std::clamp(static_cast<double>(v), 0.0, 1.0);
}

namespace {

RunMetadata metadata(const DetectorConfig& config, const QuadratureSpec& spec, std::string scenario) {
  RunMetadata meta;
  meta.scenario = std::move(scenario);
  meta.config_digest = config_digest(config);
  meta.quadrature = spec;
  meta.seed = spec.seed;
  return meta;
}

void require_tail(const PhotonNumberDist& state) {
  constexpr double limit = 1e-8;
  if (state.tail < limit) return;
  // Extrapolate the decay of the last entries to estimate the cutoff needed.
  const int M = state.m_max();
  int need = kMaxPhotonCutoff;
  if (M >= 2 && state.probs[M] > 0.0 && state.probs[M - 1] > 0.0) {
    const double ratio = state.probs[M] / state.probs[M - 1];
    if (ratio > 0.0 && ratio < 1.0)
      need = M + static_cast<int>(std::ceil(std::log(limit / state.tail) / std::log(ratio)));
  }
  std::ostringstream os;
  os << "photon-number tail " << state.tail << " exceeds 1e-8; increase m_max to about " << need;
  throw DomainError(os.str());
}

}  // namespace

ClickDistribution click_distribution_independent(const PhotonNumberDist& state, const DetectorConfig& config,
                                                 const QuadratureSpec& spec) {
  config.validate();
  require_tail(state);
  const int M = state.m_max();
  const int n_max = default_n_max(config, M);
  const auto P = cond_prob_matrix(config, n_max, M, spec);
  ClickDistribution out;
  out.meta = metadata(config, spec, "independent");
  out.probs.assign(n_max + 1, 0.0);
  for (int n = 0; n <= n_max; ++n)
    for (int m = n; m <= M; ++m) out.probs[n] += P(n, m) * state.probs[m];
  const double total = out.total();
  const double mass = 1.0 - state.tail;
  if (std::abs(total - mass) > 1e-4) {
    std::ostringstream os;
    os << "click distribution sums to " << total << " against photon mass " << mass;
    throw NumericalError(os.str());
  }
  return out;
}

ClickDistribution click_distribution_independent(const StateSpec& state, const DetectorConfig& config,
                                                 const QuadratureSpec& spec) {
  return click_distribution_independent(photon_number_dist(state, config.eta, config.nu), config, spec);
}

ClickDistribution click_distribution_coherent(double alpha_sq, const DetectorConfig& config,
                                              const QuadratureSpec& spec) {
  const double x = effective_mean(config, alpha_sq);
  const int m_max = default_cutoff(StateSpec::coherent(std::sqrt(std::max(x, 0.0))), 1.0, 0.0);
  ClickDistribution out;
  out.meta = metadata(config, spec, "independent_symbol");
  out.probs = povm_symbols(config, alpha_sq, default_n_max(config, m_max), spec);
  return out;
}

}  // namespace snspd
