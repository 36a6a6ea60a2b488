#pragma once

#include <vector>

#include "snspd/povm_independent.hpp"

namespace snspd {

// Back-to-back windows. delta is the stretch before a window boundary where
// the last pulse is taken as uniformly distributed.
struct CwConfig {
  double delta = 0.0;         // 0 selects default_delta(config)
  int window_count = 1;       // l; the distribution of the l-th window is returned
  int memory_depth = 8;       // terms kept in the Q series
  bool geometric_limit = false;

  void validate(const DetectorConfig& config) const;
};

// Smallest tau with xi(tau) >= 0.99, capped at 0.3 tau_m.
double default_delta(const DetectorConfig& config);
// Copy with delta filled in.
CwConfig resolved(const CwConfig& cw, const DetectorConfig& config);

// Exposure of a window that starts tau after the previous click.
double xi0_tau(const DetectorConfig& config, double tau);
PulseWeights pulse_weights_tau(const DetectorConfig& config, std::span<const double> times, double tau);
inline PulseWeights pulse_weights_tau(const DetectorConfig& config, const OrderedTimes& times, double tau) {
  return pulse_weights_tau(config, times.view(), tau);
}
double povm_symbol_tau(const DetectorConfig& config, int n, double alpha_sq, double tau,
                       const QuadratureSpec& spec = {});

// D_{n|m}: P_{n|m} with the previous click uniform in [0, delta] before the window.
ConditionalMatrix d_matrix(const DetectorConfig& config, const CwConfig& cw, int n_max, int m_max,
                           const QuadratureSpec& spec = {});

struct MemoryKernels {
  std::vector<double> a, b, c;  // m = 0..m_max, c = a - b
  ConditionalMatrix p;          // P_{n|m}
  ConditionalMatrix d;          // D_{n|m}
  int m_max() const { return static_cast<int>(a.size()) - 1; }
};

MemoryKernels memory_kernels(const DetectorConfig& config, const CwConfig& cw, int m_max,
                             const QuadratureSpec& spec = {});

// Probability that no pulse fell in the final delta of the previous window.
// history lists the previous windows' states, most recent first; a single
// entry stands for identical windows.
double memory_probability_q(const MemoryKernels& kernels, const std::vector<PhotonNumberDist>& history,
                            const CwConfig& cw);

ClickDistribution click_distribution_cw(const PhotonNumberDist& state, const DetectorConfig& config,
                                        const CwConfig& cw, const QuadratureSpec& spec = {});
// Previous windows given explicitly, most recent first.
ClickDistribution click_distribution_cw(const PhotonNumberDist& state, const std::vector<PhotonNumberDist>& history,
                                        const DetectorConfig& config, const CwConfig& cw,
                                        const QuadratureSpec& spec = {});

// Density of the last pulse of the first window at tau before its end, for a
// coherent input with |alpha|^2 = alpha_sq.
double last_pulse_density_first_window(const DetectorConfig& config, double alpha_sq, double tau,
                                       const QuadratureSpec& spec = {});
std::vector<double> last_pulse_density_first_window(const DetectorConfig& config, double alpha_sq,
                                                    std::span<const double> tau, const QuadratureSpec& spec = {});

}  // namespace snspd
