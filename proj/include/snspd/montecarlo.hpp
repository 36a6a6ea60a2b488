#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "snspd/detector_model.hpp"
#include "snspd/states.hpp"

namespace snspd {

enum class CarryMode {
  fresh,        // every window starts with a recovered detector
  fixed_tau,    // previous click tau before each window
  uniform_tau,  // previous click uniform in [0, delta] before each window
  contiguous,   // back-to-back windows, state carried over
};

const char* to_string(CarryMode m);

struct SimSpec {
  std::uint64_t trials = 100000;
  std::uint64_t seed = 0;
  CarryMode carry = CarryMode::fresh;
  double tau = 0.0;    // fixed_tau
  double delta = 0.0;  // uniform_tau
  int windows_per_trial = 1;  // contiguous: windows kept per trial
  int warm_up = 4;            // contiguous: windows dropped at the start of each trial
  bool record_gaps = false;
  bool record_offsets = false;

  void validate() const;
};

struct SimResult {
  std::vector<std::uint64_t> counts;  // windows with n clicks
  std::uint64_t windows = 0;
  std::vector<double> gaps;     // times between consecutive clicks
  std::vector<double> offsets;  // time since the last click at each window end; inf if none yet

  std::vector<double> probs() const;
  std::vector<double> std_errors() const;
  double mean_clicks() const;
};

// Draws photon numbers and arrival times for one window.
class PhotonSource {
 public:
  PhotonSource(const StateSpec& state, const DetectorConfig& config);
  // Arrival times (sorted) of signal and dark events in one window.
  void arrivals(std::mt19937_64& rng, std::vector<double>& out) const;

 private:
  StateSpec state_;
  DetectorConfig config_;
  std::vector<double> cdf_;  // photon numbers before loss (fock/squeezed/custom)
};

struct WindowSample {
  std::vector<double> clicks;
  double last_offset;  // time since the last click at the window end (inf if none)
};

// carry_tau = inf means a recovered detector.
WindowSample sample_window(const PhotonSource& source, const DetectorConfig& config, double carry_tau,
                           std::mt19937_64& rng);

SimResult empirical_distribution(const StateSpec& state, const DetectorConfig& config, const SimSpec& sim);

// Independent inter-pulse gaps of a detector under a steady Poisson photon
// flux of rate lambda (per unit time). Each gap starts at a click.
std::vector<double> simulate_gaps(const EfficiencyProfile& profile, double lambda, std::uint64_t count,
                                  std::uint64_t seed);

}  // namespace snspd
