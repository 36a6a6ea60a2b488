#include "snspd/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "snspd/errors.hpp"
#include "snspd/parallel.hpp"

namespace snspd {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::uint64_t kBlock = 4096;

double uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

std::mt19937_64 block_stream(std::uint64_t seed, std::uint64_t block) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(block), static_cast<std::uint32_t>(block >> 32)};
  return std::mt19937_64(seq);
}

std::uint64_t poisson(std::mt19937_64& rng, double mean) {
  if (mean <= 0.0) return 0;
  std::poisson_distribution<std::uint64_t> d(mean);
  return d(rng);
}

}  // namespace

const char* to_string(CarryMode m) {
  switch (m) {
    case CarryMode::fresh: return "fresh";
    case CarryMode::fixed_tau: return "fixed_tau";
    case CarryMode::uniform_tau: return "uniform_tau";
    case CarryMode::contiguous: return "contiguous";
  }
  return "?";
}

void SimSpec::validate() const {
  if (trials < 1) throw DomainError("trials must be >= 1");
  if (carry == CarryMode::fixed_tau && !(tau >= 0.0)) throw DomainError("fixed_tau needs tau >= 0");
  if (carry == CarryMode::uniform_tau && !(delta > 0.0)) throw DomainError("uniform_tau needs delta > 0");
  if (windows_per_trial < 1) throw DomainError("windows_per_trial must be >= 1");
  if (warm_up < 0) throw DomainError("warm_up must be >= 0");
}

std::vector<double> SimResult::probs() const {
  std::vector<double> p(counts.size(), 0.0);
  if (windows == 0) return p;
  for (std::size_t n = 0; n < counts.size(); ++n) p[n] = static_cast<double>(counts[n]) / windows;
  return p;
}

std::vector<double> SimResult::std_errors() const {
  auto p = probs();
  for (double& v : p) v = windows ? std::sqrt(v * (1.0 - v) / windows) : 0.0;
  return p;
}

double SimResult::mean_clicks() const {
  double s = 0.0;
  for (std::size_t n = 0; n < counts.size(); ++n) s += static_cast<double>(n) * counts[n];
  return windows ? s / windows : 0.0;
}

PhotonSource::PhotonSource(const StateSpec& state, const DetectorConfig& config) : state_(state), config_(config) {
  state.validate();
  config.validate();
  if (state.kind == StateKind::squeezed_vacuum || state.kind == StateKind::custom) {
    const auto d = photon_number_dist(state, 1.0, 0.0);
    cdf_.resize(d.probs.size());
    double acc = 0.0;
    for (std::size_t m = 0; m < d.probs.size(); ++m) cdf_[m] = acc += d.probs[m];
  }
}

void PhotonSource::arrivals(std::mt19937_64& rng, std::vector<double>& out) const {
  out.clear();
  const double tau_m = config_.tau_m;
  std::uint64_t signal = 0;
  switch (state_.kind) {
    case StateKind::coherent:
      signal = poisson(rng, config_.eta * std::norm(state_.alpha));
      break;
    case StateKind::fock:
    case StateKind::squeezed_vacuum:
    case StateKind::custom: {
      std::uint64_t m = static_cast<std::uint64_t>(state_.k);
      if (!cdf_.empty()) {
        const double u = uniform(rng) * cdf_.back();
        m = static_cast<std::uint64_t>(std::upper_bound(cdf_.begin(), cdf_.end(), u) - cdf_.begin());
        m = std::min<std::uint64_t>(m, cdf_.size() - 1);
      }
      for (std::uint64_t i = 0; i < m; ++i)
        if (uniform(rng) < config_.eta) ++signal;
      break;
    }
  }
  for (std::uint64_t i = 0; i < signal; ++i) out.push_back(config_.mode.shape_quantile(uniform(rng)) * tau_m);
  const std::uint64_t dark = poisson(rng, config_.nu);
  for (std::uint64_t i = 0; i < dark; ++i) out.push_back(uniform(rng) * tau_m);
  std::sort(out.begin(), out.end());
}

namespace {

// Thinning pass over sorted arrivals; last is the time of the previous click.
void register_clicks(const std::vector<double>& arrivals, const EfficiencyProfile& xi, double& last,
                     std::mt19937_64& rng, std::vector<double>& clicks) {
  clicks.clear();
  for (double t : arrivals) {
    const double p = std::isinf(last) ? 1.0 : xi(t - last);
    if (p >= 1.0 || (p > 0.0 && uniform(rng) < p)) {
      clicks.push_back(t);
      last = t;
    }
  }
}

}  // namespace

WindowSample sample_window(const PhotonSource& source, const DetectorConfig& config, double carry_tau,
                           std::mt19937_64& rng) {
  if (!(carry_tau >= 0.0)) throw DomainError("carry_tau must be >= 0");
  std::vector<double> arrivals;
  source.arrivals(rng, arrivals);
  WindowSample w;
  double last = std::isinf(carry_tau) ? -kInf : -carry_tau;
  register_clicks(arrivals, config.efficiency, last, rng, w.clicks);
  w.last_offset = std::isinf(last) ? kInf : config.tau_m - last;
  return w;
}

SimResult empirical_distribution(const StateSpec& state, const DetectorConfig& config, const SimSpec& sim) {
  sim.validate();
  const PhotonSource source(state, config);
  const std::uint64_t blocks = (sim.trials + kBlock - 1) / kBlock;
  std::vector<SimResult> partial(blocks);
  const double tau_m = config.tau_m;

  parallel_for(blocks, [&](std::size_t b) {
    auto rng = block_stream(sim.seed, b);
    SimResult& r = partial[b];
    std::vector<double> arrivals, clicks;
    const std::uint64_t begin = b * kBlock, end = std::min(sim.trials, begin + kBlock);
    auto record = [&](const std::vector<double>& cl, double last, double prev_click_offset) {
      if (r.counts.size() <= cl.size()) r.counts.resize(cl.size() + 1, 0);
      ++r.counts[cl.size()];
      ++r.windows;
      if (sim.record_gaps) {
        double prev = prev_click_offset;
        for (double t : cl) {
          if (!std::isinf(prev)) r.gaps.push_back(t - prev);
          prev = t;
        }
      }
      if (sim.record_offsets) r.offsets.push_back(std::isinf(last) ? kInf : tau_m - last);
    };
    for (std::uint64_t trial = begin; trial < end; ++trial) {
      if (sim.carry == CarryMode::contiguous) {
        double last = -kInf;  // first window of a trial is unaffected
        const int total = sim.warm_up + sim.windows_per_trial;
        for (int w = 0; w < total; ++w) {
          source.arrivals(rng, arrivals);
          const double before = last;
          register_clicks(arrivals, config.efficiency, last, rng, clicks);
          if (w >= sim.warm_up) record(clicks, last, before);
          if (!std::isinf(last)) last -= tau_m;  // shift to the next window's clock
        }
      } else {
        double last = -kInf;
        if (sim.carry == CarryMode::fixed_tau) last = -sim.tau;
        if (sim.carry == CarryMode::uniform_tau) last = -sim.delta * uniform(rng);
        source.arrivals(rng, arrivals);
        const double before = sim.carry == CarryMode::fresh ? -kInf : last;
        register_clicks(arrivals, config.efficiency, last, rng, clicks);
        record(clicks, last, before);
      }
    }
  });

  SimResult out;
  for (auto& r : partial) {
    if (out.counts.size() < r.counts.size()) out.counts.resize(r.counts.size(), 0);
    for (std::size_t n = 0; n < r.counts.size(); ++n) out.counts[n] += r.counts[n];
    out.windows += r.windows;
    out.gaps.insert(out.gaps.end(), r.gaps.begin(), r.gaps.end());
    out.offsets.insert(out.offsets.end(), r.offsets.begin(), r.offsets.end());
  }
  if (out.counts.empty()) out.counts.assign(1, 0);
  return out;
}

std::vector<double> simulate_gaps(const EfficiencyProfile& profile, double lambda, std::uint64_t count,
                                  std::uint64_t seed) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw DomainError("lambda must be > 0");
  if (count == 0) return {};
  // A click renews the process, so gaps are independent draws.
  const std::uint64_t blocks = (count + kBlock - 1) / kBlock;
  std::vector<double> gaps(count);
  parallel_for(blocks, [&](std::size_t b) {
    auto rng = block_stream(seed, b);
    const std::uint64_t begin = b * kBlock, end = std::min(count, begin + kBlock);
    for (std::uint64_t i = begin; i < end; ++i) {
      double t = 0.0;
      for (;;) {
        t += -std::log1p(-uniform(rng)) / lambda;
        const double p = profile(t);
        if (p >= 1.0 || (p > 0.0 && uniform(rng) < p)) break;
      }
      gaps[i] = t;
    }
  });
  return gaps;
}

}  // namespace snspd
