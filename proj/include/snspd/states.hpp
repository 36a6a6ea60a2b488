#pragma once

#include <complex>
#include <string>
#include <vector>

#include "snspd/detector_model.hpp"
#include "snspd/simplex_quad.hpp"

namespace snspd {

enum class StateKind { coherent, fock, squeezed_vacuum, custom };

const char* to_string(StateKind kind);

struct StateSpec {
  StateKind kind = StateKind::fock;
  std::complex<double> alpha{};  // coherent amplitude
  int k = 0;                     // Fock number
  double r = 0.0;                // squeezing parameter
  std::vector<double> probs;     // custom photon-number distribution

  static StateSpec vacuum() { return fock(0); }
  static StateSpec coherent(std::complex<double> alpha);
  static StateSpec fock(int k);
  static StateSpec squeezed_vacuum(double r);
  static StateSpec custom(std::vector<double> probs);

  double mean_photons() const;
  void validate() const;
};

// Parses "coherent:2", "coherent:1.5,0.3", "fock:4", "squeezed:1.5",
// "vacuum" or "custom:p0,p1,...".
StateSpec parse_state(const std::string& text);
std::string describe(const StateSpec& s);

struct PhotonNumberDist {
  std::vector<double> probs;  // m = 0..m_max
  double tail = 0.0;          // mass beyond m_max

  int m_max() const { return static_cast<int>(probs.size()) - 1; }
  double mean() const;
};

// Largest supported photon-number cutoff.
constexpr int kMaxPhotonCutoff = 256;

// Photon-number distribution after a loss channel of transmission eta and an
// independent Poisson background of mean nu.
PhotonNumberDist photon_number_dist(const StateSpec& state, double eta, double nu, int m_max);
// Smallest cutoff leaving less than 1e-8 of the mass behind (even for squeezed vacuum).
int default_cutoff(const StateSpec& state, double eta, double nu);
PhotonNumberDist photon_number_dist(const StateSpec& state, double eta, double nu);

// Legendre polynomial P_n(z) for complex z by the three-term recurrence.
std::complex<double> legendre(int n, std::complex<double> z);

// Unnormalized density of clicks at the given times for squeezed vacuum with
// parameter r, loss eta and dark counts nu taken from config.
double squeezed_pulse_density(const DetectorConfig& config, std::span<const double> times, double r);
double squeezed_pulse_density(const DetectorConfig& config, const OrderedTimes& times, double r);

// Probability of n clicks for squeezed vacuum obtained by integrating the
// density over the ordered simplex.
QuadResult squeezed_click_probability(const DetectorConfig& config, int n, double r, const QuadratureSpec& spec);

}  // namespace snspd
