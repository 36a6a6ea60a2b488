#include "snspd/povm_cw.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "fock_tables.hpp"
#include "snspd/errors.hpp"
#include "snspd/io.hpp"
#include "snspd/pulse_chain.hpp"

namespace snspd {

void CwConfig::validate(const DetectorConfig& config) const {
  if (!(delta > 0.0 && delta < config.tau_m)) throw DomainError("delta must lie in (0, tau_m)");
  if (window_count < 1) throw DomainError("window_count must be >= 1");
  if (memory_depth < 1) throw DomainError("memory_depth must be >= 1");
}

double default_delta(const DetectorConfig& config) {
  const auto& xi = config.efficiency;
  const double cap = 0.3 * config.tau_m;
  double d = 0.0;
  switch (xi.kind()) {
    case ProfileKind::ideal:
      return cap;
    case ProfileKind::dead_time_only:
      d = xi.tau_d();
      break;
    case ProfileKind::exponential_recovery:
      d = xi.tau_d() + xi.tau_r() * std::log(100.0);
      break;
    case ProfileKind::tabulated: {
      // Scan, then bisect the first crossing.
      const int steps = 3000;
      double lo = 0.0, hi = cap;
      bool found = false;
      for (int i = 0; i <= steps; ++i) {
        const double t = cap * i / steps;
        if (xi(t) >= 0.99) {
          hi = t;
          found = true;
          break;
        }
        lo = t;
      }
      if (!found) return cap;
      for (int it = 0; it < 60 && hi - lo > 1e-14 * cap; ++it) {
        const double mid = 0.5 * (lo + hi);
        (xi(mid) >= 0.99 ? hi : lo) = mid;
      }
      d = hi;
      break;
    }
  }
  if (d <= 0.0) return cap;
  return std::min(d, cap);
}

CwConfig resolved(const CwConfig& cw, const DetectorConfig& config) {
  CwConfig out = cw;
  if (out.delta == 0.0) out.delta = default_delta(config);
  out.validate(config);
  return out;
}

double xi0_tau(const DetectorConfig& config, double tau) {
  if (!(tau >= 0.0)) throw DomainError("tau must be >= 0");
  if (std::isinf(tau)) return 1.0;
  return std::clamp(exposure(config, -tau, 0.0, config.tau_m), 0.0, 1.0);
}

PulseWeights pulse_weights_tau(const DetectorConfig& config, std::span<const double> t, double tau) {
  if (!(tau >= 0.0)) throw DomainError("tau must be >= 0");
  if (t.empty()) return {1.0, xi0_tau(config, tau)};
  PulseWeights w = pulse_weights(config, t);
  w.script_i *= config.efficiency(tau + t[0]);
  w.big_xi += exposure(config, -tau, 0.0, t[0]) - cumulative_intensity(config.mode, config.tau_m, 0.0, t[0]);
  w.big_xi = std::clamp(w.big_xi, 0.0, 1.0);
  return w;
}

double povm_symbol_tau(const DetectorConfig& config, int n, double alpha_sq, double tau, const QuadratureSpec& spec) {
  config.validate();
  spec.validate();
  if (n < 0) throw DomainError("n must be >= 0");
  if (!(alpha_sq >= 0.0)) throw DomainError("alpha_sq must be >= 0");
  if (!(tau >= 0.0)) throw DomainError("tau must be >= 0");
  const double x = effective_mean(config, alpha_sq);
  if (n == 0) return std::exp(-x * xi0_tau(config, tau));
  const int cap = config.max_clicks();
  if (cap >= 0 && n > cap) return 0.0;
  if (config.efficiency.kind() == ProfileKind::ideal) return povm_symbol(config, n, alpha_sq, spec);
  PulseChain chain(config, n, 0.0, spec.chain_nodes);
  const auto v = chain.evaluate(cplx(x, 0.0), CarryIn::fixed(tau));
  return detail::clamp_probability(v.pi[n].real(), "Pi_n(tau)");
}

ConditionalMatrix d_matrix(const DetectorConfig& config, const CwConfig& cw, int n_max, int m_max,
                           const QuadratureSpec& spec) {
  const CwConfig c = resolved(cw, config);
  if (m_max < n_max) throw DomainError("d_matrix: m_max must be >= n_max");
  return detail::fock_tables(config, n_max, m_max, c.delta, true, spec).d;
}

MemoryKernels memory_kernels(const DetectorConfig& config, const CwConfig& cw, int m_max, const QuadratureSpec& spec) {
  const CwConfig c = resolved(cw, config);
  auto t = detail::fock_tables(config, default_n_max(config, m_max), m_max, c.delta, true, spec);
  MemoryKernels k;
  k.a = std::move(t.a);
  k.b = std::move(t.b);
  k.c.resize(k.a.size());
  for (std::size_t m = 0; m < k.a.size(); ++m) k.c[m] = k.a[m] - k.b[m];
  k.p = std::move(t.p);
  k.d = std::move(t.d);
  return k;
}

namespace {

std::pair<double, double> averaged_bc(const MemoryKernels& k, const PhotonNumberDist& s) {
  if (s.m_max() > k.m_max()) throw DomainError("state cutoff exceeds the kernel cutoff");
  double b = 0.0, c = 0.0;
  for (int m = 0; m <= s.m_max(); ++m) {
    b += s.probs[m] * k.b[m];
    c += s.probs[m] * k.c[m];
  }
  if (std::abs(c) >= 1.0) {
    std::ostringstream os;
    os << "memory series diverges: averaged C = " << c;
    throw NumericalError(os.str());
  }
  return {b, c};
}

}  // namespace

double memory_probability_q(const MemoryKernels& kernels, const std::vector<PhotonNumberDist>& history,
                            const CwConfig& cw) {
  if (cw.window_count < 1) throw DomainError("window_count must be >= 1");
  if (cw.memory_depth < 1) throw DomainError("memory_depth must be >= 1");
  if (cw.window_count == 1) return 1.0;
  if (history.empty()) throw DomainError("memory_probability_q: no previous window state given");
  if (cw.geometric_limit) {
    if (history.size() != 1) throw ContractError("geometric limit needs identical windows");
    const auto [b, c] = averaged_bc(kernels, history[0]);
    return std::clamp(b / (1.0 - c), 0.0, 1.0);
  }
  const int d = std::min(cw.window_count - 1, cw.memory_depth);
  if (history.size() != 1 && static_cast<int>(history.size()) < d)
    throw DomainError("memory_probability_q: history shorter than the memory depth");
  // Start from an unaffected window d steps back and run the recurrence forward.
  double q = 1.0;
  for (int j = d - 1; j >= 0; --j) {
    const auto [b, c] = averaged_bc(kernels, history.size() == 1 ? history[0] : history[j]);
    q = b + c * q;
  }
  return std::clamp(q, 0.0, 1.0);
}

ClickDistribution click_distribution_cw(const PhotonNumberDist& state, const std::vector<PhotonNumberDist>& history,
                                        const DetectorConfig& config, const CwConfig& cw, const QuadratureSpec& spec) {
  config.validate();
  const CwConfig c = resolved(cw, config);
  if (state.tail >= 1e-8) throw DomainError("photon-number tail exceeds 1e-8; increase m_max");
  int M = state.m_max();
  for (const auto& h : history) M = std::max(M, h.m_max());
  const auto k = memory_kernels(config, c, M, spec);
  const double q = memory_probability_q(k, history, c);
  const int n_max = k.p.n_max();

  ClickDistribution out;
  out.meta.scenario = "continuous_wave";
  out.meta.config_digest = config_digest(config);
  out.meta.quadrature = spec;
  out.meta.seed = spec.seed;
  out.probs.assign(n_max + 1, 0.0);
  for (int n = 0; n <= n_max; ++n)
    for (int m = n; m <= state.m_max(); ++m) {
      const double p = k.p(n, m), d = k.d(n, m);
      out.probs[n] += state.probs[m] * ((p - d) * q + d);
    }

  const double total = out.total(), mass = 1.0 - state.tail;
  if (std::abs(total - mass) > 1e-4) {
    double sp = 0.0, sd = 0.0;
    for (int m = 0; m <= state.m_max(); ++m) {
      sp += state.probs[m] * k.p.column_sum(m);
      sd += state.probs[m] * k.d.column_sum(m);
    }
    std::ostringstream os;
    os << "continuous-wave distribution sums to " << total << " (P part " << sp << ", D part " << sd << ", q " << q
       << ")";
    throw NumericalError(os.str());
  }

  const auto& xi = config.efficiency;
  if (xi(c.delta) < 0.99) {
    std::ostringstream os;
    os << "xi(delta) = " << xi(c.delta) << " < 0.99; the uniform last-pulse approximation is rough";
    out.meta.warnings.push_back(os.str());
  }
  const double recovery = xi.tau_d() + xi.tau_r();
  if (recovery > 0.0 && c.delta >= config.tau_m - state.mean() * recovery) {
    std::ostringstream os;
    os << "delta is not small against tau_m - <n>(tau_d + tau_r) = " << config.tau_m - state.mean() * recovery;
    out.meta.warnings.push_back(os.str());
  }
  return out;
}

ClickDistribution click_distribution_cw(const PhotonNumberDist& state, const DetectorConfig& config,
                                        const CwConfig& cw, const QuadratureSpec& spec) {
  return click_distribution_cw(state, std::vector<PhotonNumberDist>{state}, config, cw, spec);
}

std::vector<double> last_pulse_density_first_window(const DetectorConfig& config, double alpha_sq,
                                                    std::span<const double> tau, const QuadratureSpec& spec) {
  config.validate();
  spec.validate();
  if (!(alpha_sq >= 0.0)) throw DomainError("alpha_sq must be >= 0");
  const double tau_m = config.tau_m;
  std::vector<double> t(tau.size());
  for (std::size_t i = 0; i < tau.size(); ++i) {
    if (!(tau[i] >= 0.0 && tau[i] <= tau_m)) throw DomainError("tau must lie in [0, tau_m]");
    t[i] = tau_m - tau[i];
  }
  const double x = effective_mean(config, alpha_sq);
  if (x == 0.0) return std::vector<double>(tau.size(), 0.0);
  if (config.efficiency.kind() == ProfileKind::ideal) {
    std::vector<double> out(t.size());
    for (std::size_t i = 0; i < t.size(); ++i)
      out[i] = x * config.intensity(t[i]) * std::exp(-x * cumulative_intensity(config.mode, tau_m, t[i], tau_m));
    return out;
  }
  int levels = config.max_clicks();
  if (levels < 0) levels = static_cast<int>(std::ceil(x + 12.0 * std::sqrt(x) + 30.0));
  PulseChain chain(config.unit_efficiency(), levels, 0.0, spec.chain_nodes);
  return chain.last_click_density(x, CarryIn::fresh(), t);
}

double last_pulse_density_first_window(const DetectorConfig& config, double alpha_sq, double tau,
                                       const QuadratureSpec& spec) {
  return last_pulse_density_first_window(config, alpha_sq, std::span<const double>(&tau, 1), spec)[0];
}

}  // namespace snspd
