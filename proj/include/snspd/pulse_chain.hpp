#pragma once

#include <complex>
#include <functional>
#include <span>
#include <vector>

#include "snspd/detector_model.hpp"

namespace snspd {

using cplx = std::complex<double>;

// State of the detector at the start of the window.
struct CarryIn {
  enum class Kind { fresh, fixed, averaged };
  Kind kind = Kind::fresh;
  double tau = 0.0;  // fixed: time since the previous click

  static CarryIn fresh() { return {}; }
  static CarryIn fixed(double tau) { return {Kind::fixed, tau}; }
  // Previous click uniformly distributed in [0, delta] before the window.
  static CarryIn averaged() { return {Kind::averaged, 0.0}; }
};

struct ChainValues {
  std::vector<cplx> pi;       // Pi_n(x), n = 0..levels
  std::vector<cplx> regular;  // part of pi with the last click at least tau_d before the window end
  cplx tail{};                // probability that the last click falls in the final delta of the window
};

// Evaluates the chained integrals
//   f_1(t)     = x I(t) xi(tau + t) exp(-x E_tau(t))
//   f_{k+1}(t) = x I(t) int_0^{t - tau_d} f_k(s) xi(t - s) exp(-x E(s, t)) ds
//   Pi_n(x)    = int f_n(t) exp(-x E(t, tau_m)) dt
// on a uniform grid, for complex x. E(s, t) is the exposure accumulated
// between a click at s and time t.
class PulseChain {
 public:
  // delta > 0 enables the averaged carry-in and the tail integral.
  PulseChain(const DetectorConfig& config, int levels, double delta, int nodes);

  ChainValues evaluate(cplx x, const CarryIn& carry, int levels = -1) const;

  // Density of the last click at time t (summed over click counts).
  std::vector<double> last_click_density(double x, const CarryIn& carry, std::span<const double> t) const;

  int levels() const { return levels_; }
  int intervals() const { return K_; }
  double step() const { return h_; }

 private:
  struct EdgePoint {
    double u, w;
    int lo;        // f is interpolated between nodes i - lo and i - lo + 1
    double theta;  // weight of node i - lo + 1
  };
  using Sparse = std::vector<std::pair<int, double>>;

  void build_grid(int nodes);
  void build_tables();
  void build_edge();
  void build_average();
  Sparse segment(double a, double b) const;

  std::vector<cplx> first_level(cplx x, const CarryIn& carry, cplx& pi0) const;
  // One application of the level operator at every grid node.
  void apply(cplx x, const std::vector<double>& fr, const std::vector<double>& fi, int nz,
             const std::vector<double>& kr, const std::vector<double>& ki, const std::vector<cplx>& edge_kernel,
             std::vector<double>& gr, std::vector<double>& gi) const;
  void kernels(cplx x, std::vector<double>& kr, std::vector<double>& ki, std::vector<cplx>& edge_kernel) const;
  std::vector<std::vector<cplx>> all_levels(cplx x, const CarryIn& carry, cplx& pi0) const;

  DetectorConfig cfg_;
  int levels_;
  double delta_;
  int K_ = 0;
  double h_ = 0.0;
  int s_ = 0;        // composite part of the level operator covers nodes j <= i - s_
  bool toeplitz_ = true;
  bool dead_ = false;
  double tau_d_ = 0.0;

  std::vector<double> t_, I_, C_;
  std::vector<double> xi_u_, phi_u_;  // Toeplitz tables, phi_u in units of tau_m
  std::vector<double> A_, E_;         // general mode, row-major (K+1)^2, lower triangle
  std::vector<std::vector<double>> W_;
  std::vector<EdgePoint> edge_;

  Sparse w_total_, w_regular_, w_irregular_, w_tail_;

  // Averaged carry-in.
  int Q_ = 0;
  double h_tau_ = 0.0;
  bool tau_on_grid_ = false;
  std::vector<double> avg_coef_;  // (K+1) x (Q+1)
  std::vector<double> avg_E_;     // general mode exposures, (K+1) x (Q+1)
  std::vector<double> avg_w0_;    // weights for the no-click term
  std::vector<double> avg_xi0_;   // Xi_0(tau_q)
};

struct ContourBand {
  double radius;
  int points;
  int m_lo, m_hi;
};

// Circles covering Fock indices 0..m_max with bounded cancellation.
std::vector<ContourBand> plan_contour_bands(int m_max);

// fn(x, max_level) returns a vector of generating functions g_k(x). The result
// holds m! [x^m] (e^x g_k(x)) for m = 0..m_max, i.e. the Fock-diagonal elements
// of the operators whose coherent-state symbols are g_k.
using SymbolFunction = std::function<std::vector<cplx>(cplx x, int max_level)>;
std::vector<std::vector<double>> fock_coefficients(const SymbolFunction& fn, std::size_t outputs, int m_max);

}  // namespace snspd
