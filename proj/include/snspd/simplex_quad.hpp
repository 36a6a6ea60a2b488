#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace snspd {

enum class QuadMethod { nested_gauss, qmc_sobol };

const char* to_string(QuadMethod m);

struct QuadratureSpec {
  QuadMethod method = QuadMethod::nested_gauss;
  double rel_tol = 1e-6;
  double abs_tol = 1e-9;
  int gauss_order = 32;
  std::uint64_t qmc_samples = 1u << 16;
  std::uint64_t seed = 0;
  // Grid nodes per window for the transfer-operator evaluation of chained
  // integrals (all click counts at once).
  int chain_nodes = 400;

  void validate() const;
};

// Times of registered clicks inside one window, 0 <= t1 <= ... <= tn <= tau_m.
class OrderedTimes {
 public:
  OrderedTimes() = default;
  OrderedTimes(std::vector<double> times, double tau_m);
  OrderedTimes(std::initializer_list<double> times, double tau_m)
      : OrderedTimes(std::vector<double>(times), tau_m) {}

  std::span<const double> view() const { return t_; }
  std::size_t size() const { return t_.size(); }
  double operator[](std::size_t i) const { return t_[i]; }

 private:
  std::vector<double> t_;
};

// Throws DomainError unless t is ordered inside [0, tau_m].
void check_ordered(std::span<const double> t, double tau_m);

using SimplexIntegrand = std::function<double(std::span<const double>)>;

// Support information the integrand advertises so the rule can follow it.
struct SimplexHints {
  // The integrand vanishes unless t1 >= lead and t_{i+1} - t_i >= min_gap.
  double lead = 0.0;
  double min_gap = 0.0;
  // Values of t_n where the integrand has a kink; the outer coordinate is split there.
  std::vector<double> last_breaks;
};

struct QuadResult {
  double value = 0.0;
  double error = 0.0;
  std::uint64_t evaluations = 0;
};

// Integral of f over {0 <= t1 <= ... <= tn <= tau_m}.
QuadResult integrate_ordered(int n, double tau_m, const SimplexIntegrand& f, const QuadratureSpec& spec,
                             const SimplexHints& hints = {});

// Tensor Gauss rule over the cube [0, tau_m]^n; used to cross-check symmetric integrands.
QuadResult integrate_cube(int n, double tau_m, const SimplexIntegrand& f, int order);

}  // namespace snspd
