#include "snspd/states.hpp"

#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <sstream>

#include "snspd/errors.hpp"
#include "snspd/povm_independent.hpp"

namespace snspd {

const char* to_string(StateKind kind) {
  switch (kind) {
    case StateKind::coherent: return "coherent";
    case StateKind::fock: return "fock";
    case StateKind::squeezed_vacuum: return "squeezed_vacuum";
    case StateKind::custom: return "custom";
  }
  return "?";
}

StateSpec StateSpec::coherent(std::complex<double> alpha) {
  StateSpec s;
  s.kind = StateKind::coherent;
  s.alpha = alpha;
  return s;
}

StateSpec StateSpec::fock(int k) {
  if (k < 0) throw DomainError("Fock number must be >= 0");
  StateSpec s;
  s.kind = StateKind::fock;
  s.k = k;
  return s;
}

StateSpec StateSpec::squeezed_vacuum(double r) {
  if (!(r >= 0.0) || !std::isfinite(r)) throw DomainError("squeezing parameter must be >= 0");
  StateSpec s;
  s.kind = StateKind::squeezed_vacuum;
  s.r = r;
  return s;
}

StateSpec StateSpec::custom(std::vector<double> probs) {
  StateSpec s;
  s.kind = StateKind::custom;
  s.probs = std::move(probs);
  s.validate();
  return s;
}

void StateSpec::validate() const {
  if (kind == StateKind::custom) {
    if (probs.empty()) throw DomainError("custom distribution is empty");
    if (static_cast<int>(probs.size()) > kMaxPhotonCutoff + 1) throw DomainError("custom distribution is too long");
    double sum = 0.0;
    for (double p : probs) {
      if (!(p >= 0.0)) throw DomainError("custom probabilities must be >= 0");
      sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw DomainError("custom probabilities must sum to 1");
  }
}

double StateSpec::mean_photons() const {
  switch (kind) {
    case StateKind::coherent: return std::norm(alpha);
    case StateKind::fock: return k;
    case StateKind::squeezed_vacuum: return std::sinh(r) * std::sinh(r);
    case StateKind::custom: {
      double m = 0.0;
      for (std::size_t i = 0; i < probs.size(); ++i) m += i * probs[i];
      return m;
    }
  }
  return 0.0;
}

StateSpec parse_state(const std::string& text) {
  const auto colon = text.find(':');
  const std::string head = text.substr(0, colon);
  const std::string rest = colon == std::string::npos ? "" : text.substr(colon + 1);
  auto numbers = [&]() {
    std::vector<double> v;
    std::stringstream ss(rest);
    std::string item;
    while (std::getline(ss, item, ',')) {
      std::size_t used = 0;
      double d;
      try {
        d = std::stod(item, &used);
      } catch (const std::exception&) {
        throw DomainError("bad number '" + item + "' in state '" + text + "'");
      }
      if (used != item.size()) throw DomainError("bad number '" + item + "' in state '" + text + "'");
      v.push_back(d);
    }
    return v;
  };
  if (head == "vacuum" && rest.empty()) return StateSpec::vacuum();
  const auto v = numbers();
  if (head == "coherent" && (v.size() == 1 || v.size() == 2))
    return StateSpec::coherent({v[0], v.size() == 2 ? v[1] : 0.0});
  if (head == "fock" && v.size() == 1 && v[0] == std::floor(v[0])) return StateSpec::fock(static_cast<int>(v[0]));
  if ((head == "squeezed" || head == "squeezed_vacuum") && v.size() == 1) return StateSpec::squeezed_vacuum(v[0]);
  if (head == "custom" && !v.empty()) return StateSpec::custom(v);
  throw DomainError("cannot parse state '" + text + "'");
}

std::string describe(const StateSpec& s) {
  std::ostringstream os;
  os.precision(17);
  switch (s.kind) {
    case StateKind::coherent:
      os << "coherent:" << s.alpha.real();
      if (s.alpha.imag() != 0.0) os << ',' << s.alpha.imag();
      break;
    case StateKind::fock: os << "fock:" << s.k; break;
    case StateKind::squeezed_vacuum: os << "squeezed:" << s.r; break;
    case StateKind::custom:
      os << "custom:";
      for (std::size_t i = 0; i < s.probs.size(); ++i) os << (i ? "," : "") << s.probs[i];
      break;
  }
  return os.str();
}

double PhotonNumberDist::mean() const {
  double m = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) m += i * probs[i];
  return m;
}

namespace {

std::vector<double> poisson(double mu, int m_max) {
  std::vector<double> p(m_max + 1, 0.0);
  if (mu == 0.0) {
    p[0] = 1.0;
    return p;
  }
  for (int m = 0; m <= m_max; ++m) p[m] = std::exp(-mu + m * std::log(mu) - std::lgamma(m + 1.0));
  return p;
}

// Binomial loss applied to a photon-number distribution.
std::vector<double> thin(const std::vector<double>& p, double eta, int m_max) {
  std::vector<double> q(m_max + 1, 0.0);
  for (std::size_t m = 0; m < p.size(); ++m) {
    if (p[m] == 0.0) continue;
    for (int j = 0; j <= static_cast<int>(m) && j <= m_max; ++j) {
      double b;
      if (eta == 1.0) {
        b = (j == static_cast<int>(m)) ? 1.0 : 0.0;
      } else if (eta == 0.0) {
        b = (j == 0) ? 1.0 : 0.0;
      } else {
        b = std::exp(std::lgamma(m + 1.0) - std::lgamma(j + 1.0) - std::lgamma(m - j + 1.0) + j * std::log(eta) +
                     (m - j) * std::log1p(-eta));
      }
      q[j] += p[m] * b;
    }
  }
  return q;
}

std::vector<double> convolve_poisson(const std::vector<double>& p, double nu) {
  if (nu == 0.0) return p;
  const int M = static_cast<int>(p.size()) - 1;
  const auto d = poisson(nu, M);
  std::vector<double> q(M + 1, 0.0);
  for (int m = 0; m <= M; ++m)
    for (int j = 0; j <= m; ++j) q[m] += p[j] * d[m - j];
  return q;
}

std::vector<double> squeezed(double r, double eta, int m_max) {
  const double s = std::sinh(r);
  const double D = 1.0 + (2.0 - eta) * eta * s * s;
  const double sqD = std::sqrt(D);
  const std::complex<double> z(0.0, -(1.0 - eta) * s / sqD);
  std::vector<double> p(m_max + 1, 0.0);
  // (i eta s)^n / D^{(n+1)/2} P_n(z), with the powers built incrementally.
  std::complex<double> pre = 1.0 / sqD;
  std::complex<double> P0 = 1.0, P1 = z;
  for (int n = 0; n <= m_max; ++n) {
    std::complex<double> Pn;
    if (n == 0) {
      Pn = P0;
    } else if (n == 1) {
      Pn = P1;
    } else {
      Pn = (static_cast<double>(2 * n - 1) * z * P1 - static_cast<double>(n - 1) * P0) / static_cast<double>(n);
      P0 = P1;
      P1 = Pn;
    }
    if (n > 0) pre *= std::complex<double>(0.0, eta * s / sqD);
    const auto v = pre * Pn;
    if (std::abs(v.imag()) > 1e-10 * std::abs(v.real()) + 1e-300)
      throw NumericalError("squeezed photon-number probability has an imaginary residual");
    p[n] = v.real();
  }
  return p;
}

double check_and_tail(std::vector<double>& p) {
  double sum = 0.0;
  for (double& v : p) {
    if (v < -1e-12) throw NumericalError("negative photon-number probability; higher working precision needed");
    v = std::max(v, 0.0);
    sum += v;
  }
  return std::max(0.0, 1.0 - sum);
}

}  // namespace

PhotonNumberDist photon_number_dist(const StateSpec& state, double eta, double nu, int m_max) {
  state.validate();
  if (!(eta >= 0.0 && eta <= 1.0)) throw DomainError("eta must lie in [0,1]");
  if (!(nu >= 0.0)) throw DomainError("nu must be >= 0");
  if (m_max < 0 || m_max > kMaxPhotonCutoff) throw DomainError("photon-number cutoff outside [0, 256]");
  PhotonNumberDist d;
  switch (state.kind) {
    case StateKind::coherent: {
      const double mu = eta * std::norm(state.alpha) + nu;
      d.probs = poisson(mu, m_max);
      d.tail = mu == 0.0 ? 0.0 : boost::math::gamma_p(m_max + 1.0, mu);
      return d;
    }
    case StateKind::fock: {
      std::vector<double> base(state.k + 1, 0.0);
      base[state.k] = 1.0;
      auto thinned = thin(base, eta, std::max(m_max, state.k));
      d.probs = convolve_poisson(thinned, nu);
      break;
    }
    case StateKind::squeezed_vacuum: d.probs = convolve_poisson(squeezed(state.r, eta, m_max), nu); break;
    case StateKind::custom: {
      auto thinned = thin(state.probs, eta, std::max<int>(m_max, static_cast<int>(state.probs.size()) - 1));
      d.probs = convolve_poisson(thinned, nu);
      break;
    }
  }
  d.probs.resize(m_max + 1);
  d.tail = check_and_tail(d.probs);
  return d;
}

int default_cutoff(const StateSpec& state, double eta, double nu) {
  const auto full = photon_number_dist(state, eta, nu, kMaxPhotonCutoff);
  if (state.kind == StateKind::coherent) {
    const double mu = eta * std::norm(state.alpha) + nu;
    for (int m = 0; m <= kMaxPhotonCutoff; ++m)
      if (mu == 0.0 || boost::math::gamma_p(m + 1.0, mu) < 1e-8) return m;
    return kMaxPhotonCutoff;
  }
  double cum = 0.0;
  for (int m = 0; m <= kMaxPhotonCutoff; ++m) {
    cum += full.probs[m];
    if (1.0 - cum < 1e-8) {
      if (state.kind == StateKind::squeezed_vacuum && m % 2 == 1 && m < kMaxPhotonCutoff) ++m;
      return m;
    }
  }
  return kMaxPhotonCutoff;
}

PhotonNumberDist photon_number_dist(const StateSpec& state, double eta, double nu) {
  return photon_number_dist(state, eta, nu, default_cutoff(state, eta, nu));
}

std::complex<double> legendre(int n, std::complex<double> z) {
  if (n < 0) throw DomainError("legendre: degree must be >= 0");
  if (n == 0) return 1.0;
  std::complex<double> p0 = 1.0, p1 = z;
  for (int k = 1; k < n; ++k) {
    const auto p2 = (static_cast<double>(2 * k + 1) * z * p1 - static_cast<double>(k) * p0) / static_cast<double>(k + 1);
    p0 = p1;
    p1 = p2;
  }
  return p1;
}

namespace {

// (-d/dl)^k of h(l) = [1 + (2l - l^2) sinh^2 r]^{-1/2}.
double h_derivative(int k, double lambda, double s) {
  const double S = std::sqrt(1.0 + s * s * lambda * (2.0 - lambda));
  if (!(S > 0.0)) throw NumericalError("squeezed density: non-positive normalization S");
  const std::complex<double> z(0.0, -(1.0 - lambda) * s / S);
  std::complex<double> pre = std::exp(std::lgamma(k + 1.0)) / S;
  for (int j = 0; j < k; ++j) pre *= std::complex<double>(0.0, s / S);
  const auto v = pre * legendre(k, z);
  if (std::abs(v.imag()) > 1e-10 * std::abs(v.real()) + 1e-300)
    throw NumericalError("squeezed density has an imaginary residual");
  return v.real();
}

}  // namespace

double squeezed_pulse_density(const DetectorConfig& config, std::span<const double> times, double r) {
  if (!(r >= 0.0)) throw DomainError("squeezing parameter must be >= 0");
  const auto w = pulse_weights(config, times);
  const int n = static_cast<int>(times.size());
  if (w.script_i == 0.0) return 0.0;
  const double s = std::sinh(r);
  const double eta = config.eta, nu = config.nu;
  // Leibniz rule on exp(-nu l) h(eta l) at l = Xi.
  double acc = 0.0;
  for (int k = 0; k <= n; ++k) {
    const double binom = std::exp(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0));
    const double nu_part = (n - k == 0) ? 1.0 : std::pow(nu, n - k);
    if (nu_part == 0.0) continue;
    const double eta_part = (k == 0) ? 1.0 : std::pow(eta, k);
    acc += binom * nu_part * eta_part * h_derivative(k, eta * w.big_xi, s);
  }
  return w.script_i * std::exp(-nu * w.big_xi) * acc;
}

double squeezed_pulse_density(const DetectorConfig& config, const OrderedTimes& times, double r) {
  return squeezed_pulse_density(config, times.view(), r);
}

QuadResult squeezed_click_probability(const DetectorConfig& config, int n, double r, const QuadratureSpec& spec) {
  if (n < 0) throw DomainError("click number must be >= 0");
  if (n == 0) return {squeezed_pulse_density(config, std::span<const double>{}, r), 0.0, 1};
  const int cap = config.max_clicks();
  if (cap >= 0 && n > cap) return {};
  SimplexHints hints;
  if (config.efficiency.has_dead_time()) {
    hints.min_gap = config.efficiency.tau_d();
    hints.last_breaks.push_back(config.tau_m - config.efficiency.tau_d());
  }
  QuadratureSpec q = spec;
  if (n > 5 && q.method == QuadMethod::nested_gauss) q.method = QuadMethod::qmc_sobol;
  return integrate_ordered(
      n, config.tau_m, [&](std::span<const double> t) { return squeezed_pulse_density(config, t, r); }, q, hints);
}

}  // namespace snspd
