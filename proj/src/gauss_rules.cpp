#include "snspd/gauss_rules.hpp"

#include <boost/math/special_functions/legendre.hpp>

#include <algorithm>
#include <map>
#include <mutex>
#include <stdexcept>

namespace snspd {

namespace {

GaussRule build_rule(int order) {
  GaussRule rule;
  // legendre_p_zeros returns the non-negative half of the roots.
  const auto zeros = boost::math::legendre_p_zeros<double>(order);
  for (double z : zeros) {
    const double dp = boost::math::legendre_p_prime(order, z);
    const double w = 2.0 / ((1.0 - z * z) * dp * dp);
    if (z == 0.0) {
      rule.x.push_back(0.0);
      rule.w.push_back(w);
    } else {
      rule.x.push_back(-z);
      rule.w.push_back(w);
      rule.x.push_back(z);
      rule.w.push_back(w);
    }
  }
  std::vector<std::size_t> idx(rule.x.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return rule.x[a] < rule.x[b]; });
  GaussRule sorted;
  for (auto i : idx) {
    sorted.x.push_back(rule.x[i]);
    sorted.w.push_back(rule.w[i]);
  }
  return sorted;
}

}  // namespace

const GaussRule& gauss_legendre(int order) {
  if (order < 1) throw std::invalid_argument("gauss_legendre: order must be >= 1");
  static std::mutex mu;
  static std::map<int, GaussRule> cache;
  std::lock_guard lock(mu);
  auto it = cache.find(order);
  if (it == cache.end()) it = cache.emplace(order, build_rule(order)).first;
  return it->second;
}

std::vector<double> composite_weights(int intervals, double h) {
  std::vector<double> w(static_cast<std::size_t>(intervals) + 1, 0.0);
  if (intervals <= 0) return w;
  if (intervals == 1) {
    w[0] = w[1] = 0.5 * h;
    return w;
  }
  const int simpson_end = (intervals % 2 == 0) ? intervals : intervals - 3;
  for (int j = 0; j < simpson_end; j += 2) {
    w[j] += h / 3.0;
    w[j + 1] += 4.0 * h / 3.0;
    w[j + 2] += h / 3.0;
  }
  if (simpson_end != intervals) {
    const int j = simpson_end;
    w[j] += 3.0 * h / 8.0;
    w[j + 1] += 9.0 * h / 8.0;
    w[j + 2] += 9.0 * h / 8.0;
    w[j + 3] += 3.0 * h / 8.0;
  }
  return w;
}

}  // namespace snspd
