#pragma once

#include <string>
#include <vector>

namespace snspd {

enum class ProfileKind { exponential_recovery, dead_time_only, ideal, tabulated };

const char* to_string(ProfileKind kind);

// Detection efficiency xi(t) as a function of the time since the last click.
class EfficiencyProfile {
 public:
  EfficiencyProfile();  // ideal

  static EfficiencyProfile ideal();
  static EfficiencyProfile dead_time(double tau_d);
  // tau_r == 0 collapses to dead_time(tau_d).
  static EfficiencyProfile exponential(double tau_d, double tau_r);
  // Samples must be sorted by t; xi values are clamped to [0,1] with a 1e-6 slack.
  static EfficiencyProfile tabulated(std::vector<double> t, std::vector<double> xi);

  ProfileKind kind() const { return kind_; }
  double tau_d() const { return tau_d_; }
  double tau_r() const { return tau_r_; }
  const std::vector<double>& table_t() const { return t_; }
  const std::vector<double>& table_xi() const { return xi_; }

  double operator()(double t) const;
  // Phi(u) = integral of xi over [0, u]; zero for u <= 0.
  double integral(double u) const;

  // True when xi vanishes identically on [0, tau_d) and tau_d > 0.
  bool has_dead_time() const;
  // Same profile with every time multiplied by factor.
  EfficiencyProfile scaled(double factor) const;

 private:
  ProfileKind kind_ = ProfileKind::ideal;
  double tau_d_ = 0.0;
  double tau_r_ = 0.0;
  std::vector<double> t_, xi_, cum_;
};

inline double eval_xi(const EfficiencyProfile& p, double t) { return p(t); }

enum class ModeKind { monochromatic, tabulated };

// Temporal intensity I(t) of the detected mode. The tabulated form stores the
// shape on the unit interval s = t / tau_m so one profile serves any window.
class ModeProfile {
 public:
  ModeProfile() = default;  // monochromatic

  static ModeProfile monochromatic() { return {}; }
  // s in [0, 1] (fraction of the window), intensity samples >= 0.
  // Renormalized so that the piecewise-linear interpolant integrates to one.
  static ModeProfile tabulated(std::vector<double> s, std::vector<double> intensity);

  ModeKind kind() const { return kind_; }
  bool is_monochromatic() const { return kind_ == ModeKind::monochromatic; }
  const std::vector<double>& table_s() const { return s_; }
  const std::vector<double>& table_g() const { return g_; }

  // Shape on the unit interval; integral over [0,1] equals one.
  double shape(double s) const;
  double shape_cumulative(double s) const;
  // Inverse of shape_cumulative, used for sampling arrival times.
  double shape_quantile(double u) const;

 private:
  ModeKind kind_ = ModeKind::monochromatic;
  std::vector<double> s_, g_, cum_;
};

double eval_intensity(const ModeProfile& mode, double tau_m, double t);
double cumulative_intensity(const ModeProfile& mode, double tau_m, double t0, double t1);

struct DetectorConfig {
  double tau_m = 1.0;
  double eta = 1.0;
  double nu = 0.0;
  EfficiencyProfile efficiency;
  ModeProfile mode;

  void validate() const;
  // N + 1 with N = floor(tau_m / tau_d), or -1 when the click count is unbounded.
  int max_clicks() const;
  double intensity(double t) const { return eval_intensity(mode, tau_m, t); }
  // Detector at eta = 1, nu = 0 with the same timing.
  DetectorConfig unit_efficiency() const;
};

double effective_mean(const DetectorConfig& config, double x);

// Integral over [a, b] of I(t) * xi(t - t_click). A click at -infinity is
// written as t_click = -inf and gives the plain cumulative intensity.
double exposure(const DetectorConfig& config, double t_click, double a, double b);

// Two-column CSV with a header line. time_scale multiplies the first column.
EfficiencyProfile load_profile_csv(const std::string& path, double time_scale = 1.0);
// Two-column "t,I" CSV; times are divided by window to land on [0, 1].
ModeProfile load_mode_csv(const std::string& path, double window);
void save_profile_csv(const EfficiencyProfile& profile, const std::string& path);

}  // namespace snspd
