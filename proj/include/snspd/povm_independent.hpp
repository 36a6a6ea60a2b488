#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "snspd/detector_model.hpp"
#include "snspd/simplex_quad.hpp"
#include "snspd/states.hpp"

namespace snspd {

struct PulseWeights {
  double script_i = 1.0;  // density prefactor chaining I and xi over consecutive clicks
  double big_xi = 1.0;    // exposure accumulated over the window
};

PulseWeights pulse_weights(const DetectorConfig& config, std::span<const double> times);
inline PulseWeights pulse_weights(const DetectorConfig& config, const OrderedTimes& times) {
  return pulse_weights(config, times.view());
}

// Table of n-click probabilities given m photons, n = 0..n_max, m = 0..m_max.
class ConditionalMatrix {
 public:
  ConditionalMatrix() = default;
  ConditionalMatrix(int n_max, int m_max, std::string scenario);

  int n_max() const { return n_max_; }
  int m_max() const { return m_max_; }
  const std::string& scenario() const { return scenario_; }

  double operator()(int n, int m) const;
  double& at(int n, int m);
  double column_sum(int m) const;

 private:
  int n_max_ = 0, m_max_ = 0;
  std::string scenario_;
  std::vector<double> e_;
};

struct RunMetadata {
  std::string scenario;
  std::string config_digest;
  QuadratureSpec quadrature;
  std::uint64_t seed = 0;
  std::vector<std::string> warnings;
};

struct ClickDistribution {
  std::vector<double> probs;
  RunMetadata meta;

  int n_max() const { return static_cast<int>(probs.size()) - 1; }
  double total() const;
  double operator[](int n) const { return n < static_cast<int>(probs.size()) ? probs[n] : 0.0; }
};

// Largest click count with non-zero probability given m_max photons.
int default_n_max(const DetectorConfig& config, int m_max);

// Coherent-state symbol of the n-click element; alpha_sq is taken before the
// efficiency and dark-count replacement.
double povm_symbol(const DetectorConfig& config, int n, double alpha_sq, const QuadratureSpec& spec = {});
// All symbols n = 0..n_max from one pass.
std::vector<double> povm_symbols(const DetectorConfig& config, double alpha_sq, int n_max,
                                 const QuadratureSpec& spec = {});

// Computed at unit efficiency without dark counts; those belong to the state.
ConditionalMatrix cond_prob_matrix(const DetectorConfig& config, int n_max, int m_max, const QuadratureSpec& spec = {});
// Regular part of every entry (last click at least tau_d before the window end).
ConditionalMatrix regular_matrix(const DetectorConfig& config, int n_max, int m_max, const QuadratureSpec& spec = {});

// Single entry by direct integration over the ordered simplex.
QuadResult cond_prob_direct(const DetectorConfig& config, int n, int m, const QuadratureSpec& spec = {});

struct SplitParts {
  double regular = 0.0;
  double irregular = 0.0;
  double error = 0.0;
};

// Regular/irregular decomposition of one entry by direct integration. The
// monochromatic mode uses inter-click gap coordinates on the shrunken simplex.
SplitParts regular_irregular_split(const DetectorConfig& config, int n, int m, const QuadratureSpec& spec = {});

// Closed form for a pure dead time (no quadrature).
double deadtime_closed_form(const DetectorConfig& config, int n, int m);

// Closed form of P_{n|n} for exponential recovery; exact values for n < 2.
double diag_same_number(const DetectorConfig& config, int n);

ClickDistribution click_distribution_independent(const PhotonNumberDist& state, const DetectorConfig& config,
                                                 const QuadratureSpec& spec = {});
ClickDistribution click_distribution_independent(const StateSpec& state, const DetectorConfig& config,
                                                 const QuadratureSpec& spec = {});
// Coherent-state distribution from the symbols, without the Fock expansion.
ClickDistribution click_distribution_coherent(double alpha_sq, const DetectorConfig& config,
                                              const QuadratureSpec& spec = {});

}  // namespace snspd
