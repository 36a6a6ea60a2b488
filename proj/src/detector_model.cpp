#include "snspd/detector_model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "snspd/errors.hpp"
#include "snspd/gauss_rules.hpp"

namespace snspd {

const char* to_string(ProfileKind kind) {
  switch (kind) {
    case ProfileKind::exponential_recovery: return "exponential_recovery";
    case ProfileKind::dead_time_only: return "dead_time_only";
    case ProfileKind::ideal: return "ideal";
    case ProfileKind::tabulated: return "tabulated";
  }
  return "?";
}

namespace {

constexpr double kClampSlack = 1e-6;

// Cumulative trapezoid of a piecewise-linear table, starting at x[0].
std::vector<double> cumulative_trapezoid(const std::vector<double>& x, const std::vector<double>& y) {
  std::vector<double> c(x.size(), 0.0);
  for (std::size_t k = 1; k < x.size(); ++k) c[k] = c[k - 1] + 0.5 * (y[k] + y[k - 1]) * (x[k] - x[k - 1]);
  return c;
}

void check_table(const std::vector<double>& x, const std::vector<double>& y, const char* what) {
  if (x.size() != y.size() || x.empty())
    throw DomainError(std::string(what) + ": table columns must be non-empty and of equal length");
  for (std::size_t k = 0; k < x.size(); ++k) {
    if (!std::isfinite(x[k]) || !std::isfinite(y[k])) throw DomainError(std::string(what) + ": non-finite table entry");
    if (k > 0 && !(x[k] > x[k - 1])) throw DomainError(std::string(what) + ": table times must be strictly increasing");
  }
  if (x.front() < 0.0) throw DomainError(std::string(what) + ": table times must be >= 0");
}

// Linear interpolation with constant extension outside the table.
double interp(const std::vector<double>& x, const std::vector<double>& y, double t) {
  if (t <= x.front()) return y.front();
  if (t >= x.back()) return y.back();
  auto it = std::upper_bound(x.begin(), x.end(), t);
  const std::size_t k = static_cast<std::size_t>(it - x.begin());
  const double f = (t - x[k - 1]) / (x[k] - x[k - 1]);
  return y[k - 1] + f * (y[k] - y[k - 1]);
}

// Integral of the interpolant over [x.front(), t] for t inside the table.
double interp_integral(const std::vector<double>& x, const std::vector<double>& y, const std::vector<double>& cum,
                       double t) {
  if (t <= x.front()) return 0.0;
  if (t >= x.back()) return cum.back();
  auto it = std::upper_bound(x.begin(), x.end(), t);
  const std::size_t k = static_cast<std::size_t>(it - x.begin());
  const double dt = t - x[k - 1];
  const double slope = (y[k] - y[k - 1]) / (x[k] - x[k - 1]);
  return cum[k - 1] + y[k - 1] * dt + 0.5 * slope * dt * dt;
}

}  // namespace

EfficiencyProfile::EfficiencyProfile() = default;

EfficiencyProfile EfficiencyProfile::ideal() { return {}; }

EfficiencyProfile EfficiencyProfile::dead_time(double tau_d) {
  if (!(tau_d >= 0.0) || !std::isfinite(tau_d)) throw DomainError("dead time must be finite and >= 0");
  EfficiencyProfile p;
  p.kind_ = ProfileKind::dead_time_only;
  p.tau_d_ = tau_d;
  return p;
}

EfficiencyProfile EfficiencyProfile::exponential(double tau_d, double tau_r) {
  if (!(tau_r >= 0.0) || !std::isfinite(tau_r)) throw DomainError("relaxation time must be finite and >= 0");
  if (tau_r == 0.0) return dead_time(tau_d);
  EfficiencyProfile p = dead_time(tau_d);
  p.kind_ = ProfileKind::exponential_recovery;
  p.tau_r_ = tau_r;
  return p;
}

EfficiencyProfile EfficiencyProfile::tabulated(std::vector<double> t, std::vector<double> xi) {
  check_table(t, xi, "efficiency profile");
  for (double& v : xi) {
    if (v < -kClampSlack || v > 1.0 + kClampSlack)
      throw DomainError("efficiency profile: xi values must lie in [0,1]");
    v = std::clamp(v, 0.0, 1.0);
  }
  EfficiencyProfile p;
  p.kind_ = ProfileKind::tabulated;
  p.t_ = std::move(t);
  p.xi_ = std::move(xi);
  p.cum_ = cumulative_trapezoid(p.t_, p.xi_);
  return p;
}

double EfficiencyProfile::operator()(double t) const {
  if (t < 0.0) return 0.0;
  switch (kind_) {
    case ProfileKind::ideal: return 1.0;
    case ProfileKind::dead_time_only: return t >= tau_d_ ? 1.0 : 0.0;
    case ProfileKind::exponential_recovery:
      if (t < tau_d_) return 0.0;
      if (std::isinf(t)) return 1.0;
      return -std::expm1(-(t - tau_d_) / tau_r_);
    case ProfileKind::tabulated: return interp(t_, xi_, t);
  }
  return 0.0;
}

double EfficiencyProfile::integral(double u) const {
  if (u <= 0.0) return 0.0;
  switch (kind_) {
    case ProfileKind::ideal: return u;
    case ProfileKind::dead_time_only: return std::max(u - tau_d_, 0.0);
    case ProfileKind::exponential_recovery: {
      const double v = u - tau_d_;
      if (v <= 0.0) return 0.0;
      return v + tau_r_ * std::expm1(-v / tau_r_);
    }
    case ProfileKind::tabulated: {
      const double head = xi_.front() * std::min(u, t_.front());
      if (u <= t_.front()) return head;
      const double body = interp_integral(t_, xi_, cum_, u);
      const double tail = u > t_.back() ? xi_.back() * (u - t_.back()) : 0.0;
      return head + body + tail;
    }
  }
  return 0.0;
}

bool EfficiencyProfile::has_dead_time() const {
  return (kind_ == ProfileKind::dead_time_only || kind_ == ProfileKind::exponential_recovery) && tau_d_ > 0.0;
}

EfficiencyProfile EfficiencyProfile::scaled(double factor) const {
  if (!(factor > 0.0)) throw DomainError("time scale factor must be > 0");
  EfficiencyProfile p = *this;
  p.tau_d_ *= factor;
  p.tau_r_ *= factor;
  for (double& t : p.t_) t *= factor;
  if (kind_ == ProfileKind::tabulated) p.cum_ = cumulative_trapezoid(p.t_, p.xi_);
  return p;
}

ModeProfile ModeProfile::tabulated(std::vector<double> s, std::vector<double> intensity) {
  check_table(s, intensity, "mode profile");
  if (s.back() > 1.0 + 1e-12) throw DomainError("mode profile: samples must lie inside the window");
  for (double v : intensity)
    if (v < 0.0) throw DomainError("mode profile: intensity must be >= 0");
  // Extend to cover [0,1] by constant continuation before normalizing.
  if (s.front() > 0.0) {
    s.insert(s.begin(), 0.0);
    intensity.insert(intensity.begin(), intensity.front());
  }
  if (s.back() < 1.0) {
    s.push_back(1.0);
    intensity.push_back(intensity.back());
  }
  s.back() = 1.0;
  auto cum = cumulative_trapezoid(s, intensity);
  const double total = cum.back();
  if (!(total > 0.0)) throw DomainError("mode profile: intensity integrates to zero");
  for (double& v : intensity) v /= total;
  for (double& v : cum) v /= total;
  ModeProfile m;
  m.kind_ = ModeKind::tabulated;
  m.s_ = std::move(s);
  m.g_ = std::move(intensity);
  m.cum_ = std::move(cum);
  return m;
}

double ModeProfile::shape(double s) const {
  if (is_monochromatic()) return 1.0;
  return interp(s_, g_, s);
}

double ModeProfile::shape_cumulative(double s) const {
  if (is_monochromatic()) return std::clamp(s, 0.0, 1.0);
  return interp_integral(s_, g_, cum_, std::clamp(s, 0.0, 1.0));
}

double ModeProfile::shape_quantile(double u) const {
  u = std::clamp(u, 0.0, 1.0);
  if (is_monochromatic()) return u;
  auto it = std::upper_bound(cum_.begin(), cum_.end(), u);
  if (it == cum_.end()) return 1.0;
  const std::size_t k = std::max<std::size_t>(static_cast<std::size_t>(it - cum_.begin()), 1);
  // Solve cum[k-1] + g0 d + slope d^2 / 2 = u on the cell.
  const double g0 = g_[k - 1];
  const double slope = (g_[k] - g_[k - 1]) / (s_[k] - s_[k - 1]);
  const double r = u - cum_[k - 1];
  double d;
  if (std::abs(slope) < 1e-14) {
    d = g0 > 0.0 ? r / g0 : 0.0;
  } else {
    const double disc = std::max(g0 * g0 + 2.0 * slope * r, 0.0);
    d = 2.0 * r / (g0 + std::sqrt(disc));
  }
  return std::clamp(s_[k - 1] + d, s_[k - 1], s_[k]);
}

namespace {

void check_window_arg(double tau_m, double t) {
  constexpr double slack = 1e-12;
  if (!(t >= -slack * tau_m && t <= tau_m * (1.0 + slack)))
    throw DomainError("time argument outside the measurement window");
}

}  // namespace

double eval_intensity(const ModeProfile& mode, double tau_m, double t) {
  check_window_arg(tau_m, t);
  return mode.shape(t / tau_m) / tau_m;
}

double cumulative_intensity(const ModeProfile& mode, double tau_m, double t0, double t1) {
  check_window_arg(tau_m, t0);
  check_window_arg(tau_m, t1);
  if (t1 < t0) throw DomainError("cumulative_intensity: t1 < t0");
  if (mode.is_monochromatic()) return (t1 - t0) / tau_m;
  return mode.shape_cumulative(t1 / tau_m) - mode.shape_cumulative(t0 / tau_m);
}

void DetectorConfig::validate() const {
  if (!(tau_m > 0.0) || !std::isfinite(tau_m)) throw DomainError("tau_m must be > 0");
  if (!(eta >= 0.0 && eta <= 1.0)) throw DomainError("eta must lie in [0,1]");
  if (!(nu >= 0.0) || !std::isfinite(nu)) throw DomainError("nu must be >= 0");
}

int DetectorConfig::max_clicks() const {
  if (!efficiency.has_dead_time()) return -1;
  const double ratio = tau_m / efficiency.tau_d();
  return static_cast<int>(std::floor(ratio * (1.0 + 1e-12))) + 1;
}

DetectorConfig DetectorConfig::unit_efficiency() const {
  DetectorConfig c = *this;
  c.eta = 1.0;
  c.nu = 0.0;
  return c;
}

double effective_mean(const DetectorConfig& config, double x) { return config.eta * x + config.nu; }

double exposure(const DetectorConfig& config, double t_click, double a, double b) {
  if (b <= a) return 0.0;
  const auto& xi = config.efficiency;
  const double tau_m = config.tau_m;
  if (config.mode.is_monochromatic()) {
    if (std::isinf(t_click)) return (b - a) / tau_m;
    return (xi.integral(b - t_click) - xi.integral(a - t_click)) / tau_m;
  }
  // Piecewise Gauss over cells bounded by every kink of either factor.
  std::vector<double> br{a, b};
  for (double s : config.mode.table_s()) br.push_back(s * tau_m);
  if (!std::isinf(t_click)) {
    if (xi.kind() == ProfileKind::tabulated) {
      for (double t : xi.table_t()) br.push_back(t_click + t);
    } else {
      br.push_back(t_click + xi.tau_d());
    }
  }
  std::sort(br.begin(), br.end());
  const auto& rule = gauss_legendre(8);
  double total = 0.0;
  for (std::size_t k = 0; k + 1 < br.size(); ++k) {
    const double lo = std::max(br[k], a), hi = std::min(br[k + 1], b);
    if (!(hi > lo)) continue;
    const double half = 0.5 * (hi - lo), mid = 0.5 * (hi + lo);
    for (std::size_t q = 0; q < rule.x.size(); ++q) {
      const double t = mid + half * rule.x[q];
      const double eff = std::isinf(t_click) ? 1.0 : xi(t - t_click);
      total += half * rule.w[q] * config.mode.shape(t / tau_m) / tau_m * eff;
    }
  }
  return total;
}

namespace {

std::pair<std::vector<double>, std::vector<double>> read_two_columns(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DomainError("cannot open " + path);
  std::vector<double> a, b;
  std::string line;
  bool header_seen = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      header_seen = true;
      continue;
    }
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ss(line);
    double x, y;
    if (!(ss >> x >> y)) throw DomainError("malformed row in " + path + ": " + line);
    a.push_back(x);
    b.push_back(y);
  }
  return {std::move(a), std::move(b)};
}

}  // namespace

EfficiencyProfile load_profile_csv(const std::string& path, double time_scale) {
  auto [t, xi] = read_two_columns(path);
  for (double& v : t) v *= time_scale;
  return EfficiencyProfile::tabulated(std::move(t), std::move(xi));
}

ModeProfile load_mode_csv(const std::string& path, double window) {
  auto [t, g] = read_two_columns(path);
  for (double& v : t) v /= window;
  return ModeProfile::tabulated(std::move(t), std::move(g));
}

void save_profile_csv(const EfficiencyProfile& profile, const std::string& path) {
  if (profile.kind() != ProfileKind::tabulated) throw ContractError("only tabulated profiles are written as CSV");
  std::ofstream out(path);
  if (!out) throw DomainError("cannot write " + path);
  out.precision(17);
  out << "t,xi\n";
  for (std::size_t k = 0; k < profile.table_t().size(); ++k)
    out << profile.table_t()[k] << ',' << profile.table_xi()[k] << '\n';
}

}  // namespace snspd
