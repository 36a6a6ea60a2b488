#include "snspd/pulse_chain.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "snspd/errors.hpp"
#include "snspd/gauss_rules.hpp"
#include "snspd/parallel.hpp"

namespace snspd {

namespace {

bool on_grid(double len, double h, int* index = nullptr) {
  const double v = len / h;
  const double r = std::round(v);
  if (std::abs(v - r) > 1e-9 * std::max(1.0, v)) return false;
  if (index) *index = static_cast<int>(r);
  return true;
}

bool fast_recovery(const EfficiencyProfile& p, double h) {
  return p.kind() == ProfileKind::exponential_recovery && p.tau_r() < 2.0 * h;
}

// Gauss points on [a, b]; when the recovery is too fast for the grid the
// interval is split so the boundary layer at a gets its own rule.
void add_points(double a, double b, const EfficiencyProfile& p, double h, std::vector<std::pair<double, double>>& out) {
  if (!(b > a)) return;
  auto put = [&](double lo, double hi, int order) {
    const auto& rule = gauss_legendre(order);
    const double half = 0.5 * (hi - lo), mid = 0.5 * (hi + lo);
    for (std::size_t q = 0; q < rule.x.size(); ++q) out.emplace_back(mid + half * rule.x[q], half * rule.w[q]);
  };
  if (fast_recovery(p, h) && a >= p.tau_d() - 1e-15 && a < p.tau_d() + 30.0 * p.tau_r()) {
    const double cut = std::min(b, p.tau_d() + 30.0 * p.tau_r());
    put(a, cut, 12);
    put(cut, b, 8);
  } else {
    put(a, b, 6);
  }
}

}  // namespace

PulseChain::PulseChain(const DetectorConfig& config, int levels, double delta, int nodes)
    : cfg_(config), levels_(levels), delta_(delta) {
  cfg_.validate();
  if (levels < 0) throw DomainError("PulseChain: levels must be >= 0");
  if (delta < 0.0 || delta >= cfg_.tau_m) throw DomainError("PulseChain: delta must lie in [0, tau_m)");
  const int cap = cfg_.max_clicks();
  if (cap >= 0) levels_ = std::min(levels_, cap);
  build_grid(nodes);
  build_tables();
  build_edge();
  if (delta_ > 0.0) build_average();
}

void PulseChain::build_grid(int nodes) {
  const auto& xi = cfg_.efficiency;
  const double tau_m = cfg_.tau_m;
  toeplitz_ = cfg_.mode.is_monochromatic();
  dead_ = xi.has_dead_time() && xi.tau_d() < tau_m;
  tau_d_ = (xi.kind() == ProfileKind::dead_time_only || xi.kind() == ProfileKind::exponential_recovery) ? xi.tau_d()
                                                                                                          : 0.0;
  int target = std::max(16, nodes);
  target += target % 2;
  K_ = target;
  if (dead_) {
    int best = -1;
    for (int K = target; K <= 2 * target; K += 2) {
      int idx = 0;
      int score = 0;
      if (on_grid(tau_d_, tau_m / K, &idx)) score += (idx % 2 == 0) ? 2 : 1;
      if (delta_ > 0.0 && on_grid(delta_, tau_m / K)) score += 1;
      if (score > best) {
        best = score;
        K_ = K;
      }
      if (score == (delta_ > 0.0 ? 3 : 2)) break;
    }
  }
  h_ = tau_m / K_;
  int s0 = 0;
  if (tau_d_ > 0.0) {
    if (!on_grid(tau_d_, h_, &s0)) s0 = static_cast<int>(std::ceil(tau_d_ / h_));
  }
  s_ = s0 + (fast_recovery(xi, h_) ? 1 : 0);
  if (xi.kind() == ProfileKind::ideal || xi.kind() == ProfileKind::tabulated) s_ = 0;
}

void PulseChain::build_tables() {
  const int K = K_;
  const double tau_m = cfg_.tau_m;
  const auto& xi = cfg_.efficiency;
  t_.resize(K + 1);
  I_.resize(K + 1);
  C_.resize(K + 1);
  for (int i = 0; i <= K; ++i) {
    t_[i] = i * h_;
    I_[i] = cfg_.intensity(std::min(t_[i], tau_m));
    C_[i] = cumulative_intensity(cfg_.mode, tau_m, 0.0, std::min(t_[i], tau_m));
  }
  t_[K] = tau_m;
  if (toeplitz_) {
    xi_u_.resize(K + 1);
    for (int u = 0; u <= K; ++u) xi_u_[u] = xi(u * h_);
    phi_u_.resize(2 * K + 1);
    for (int u = 0; u <= 2 * K; ++u) phi_u_[u] = xi.integral(u * h_) / tau_m;
  } else {
    A_.assign(static_cast<std::size_t>(K + 1) * (K + 1), 0.0);
    E_.assign(A_.size(), 0.0);
    for (int i = 0; i <= K; ++i)
      for (int j = 0; j <= i; ++j) {
        A_[i * (K + 1) + j] = xi(t_[i] - t_[j]);
        E_[i * (K + 1) + j] = exposure(cfg_, t_[j], t_[j], t_[i]);
      }
  }
  W_.resize(K + 1);
  for (int L = 0; L <= K; ++L) W_[L] = composite_weights(L, h_);

  auto merge = [](const Sparse& a, const Sparse& b) {
    std::map<int, double> m;
    for (auto [j, w] : a) m[j] += w;
    for (auto [j, w] : b) m[j] += w;
    return Sparse(m.begin(), m.end());
  };
  if (dead_) {
    w_regular_ = segment(0.0, tau_m - tau_d_);
    w_irregular_ = segment(tau_m - tau_d_, tau_m);
    w_total_ = merge(w_regular_, w_irregular_);
  } else {
    w_total_ = segment(0.0, tau_m);
    w_regular_ = w_total_;
  }
  if (delta_ > 0.0) {
    if (dead_ && tau_d_ < delta_)
      w_tail_ = merge(segment(tau_m - delta_, tau_m - tau_d_), segment(tau_m - tau_d_, tau_m));
    else
      w_tail_ = segment(tau_m - delta_, tau_m);
  }
}

void PulseChain::build_edge() {
  if (s_ == 0) return;
  const double hi = s_ * h_;
  std::vector<std::pair<double, double>> pts;
  add_points(tau_d_, hi, cfg_.efficiency, h_, pts);
  for (auto [u, w] : pts) {
    const double d = u / h_;
    const int lo = static_cast<int>(std::ceil(d - 1e-12));
    edge_.push_back({u, w, lo, lo - d});
  }
}

PulseChain::Sparse PulseChain::segment(double a, double b) const {
  std::map<int, double> m;
  const double h = h_;
  const int K = K_;
  if (b > a) {
    const double eps = 1e-9;
    int ja = static_cast<int>(std::ceil(a / h - eps));
    int jb = static_cast<int>(std::floor(b / h + eps));
    ja = std::clamp(ja, 0, K);
    jb = std::clamp(jb, 0, K);
    // Linear interpolation of the grid function at an arbitrary point.
    auto at = [&](double x, double weight) {
      const double c = std::clamp(x / h, 0.0, static_cast<double>(K));
      const int j = std::min(static_cast<int>(std::floor(c)), K - 1);
      const double th = c - j;
      m[j] += weight * (1.0 - th);
      m[j + 1] += weight * th;
    };
    if (ja > jb) {
      at(a, 0.5 * (b - a));
      at(b, 0.5 * (b - a));
    } else {
      const auto w = composite_weights(jb - ja, h);
      for (int j = ja; j <= jb; ++j) m[j] += w[j - ja];
      const double ra = ja * h - a;
      if (ra > 1e-12 * h) {
        at(a, 0.5 * ra);
        m[ja] += 0.5 * ra;
      }
      const double rb = b - jb * h;
      if (rb > 1e-12 * h) {
        m[jb] += 0.5 * rb;
        at(b, 0.5 * rb);
      }
    }
  }
  return Sparse(m.begin(), m.end());
}

void PulseChain::build_average() {
  const int K = K_;
  const auto& xi = cfg_.efficiency;
  const double tau_m = cfg_.tau_m;
  int q = 0;
  if (on_grid(delta_, h_, &q) && q >= 1) {
    Q_ = q;
    h_tau_ = h_;
    tau_on_grid_ = true;
  } else {
    Q_ = std::max(2, 2 * static_cast<int>(std::ceil(delta_ / (2.0 * h_))));
    h_tau_ = delta_ / Q_;
    tau_on_grid_ = false;
  }
  auto grid_index = [&](double v, int& idx) { return v > 0.0 && v < delta_ && on_grid(v, h_tau_, &idx); };
  // Composite weights over [lo, Q] with an optional break at node mid.
  auto row_weights = [&](int lo, int mid) {
    std::vector<double> w(Q_ + 1, 0.0);
    auto add = [&](int a, int b) {
      if (b <= a) return;
      const auto cw = composite_weights(b - a, h_tau_);
      for (int j = a; j <= b; ++j) w[j] += cw[j - a];
    };
    if (mid > lo && mid < Q_) {
      add(lo, mid);
      add(mid, Q_);
    } else {
      add(lo, Q_);
    }
    return w;
  };
  int qd = -1;
  if (tau_d_ > 0.0 && !grid_index(tau_d_, qd)) qd = -1;

  avg_coef_.assign(static_cast<std::size_t>(K + 1) * (Q_ + 1), 0.0);
  const bool need_E = !(toeplitz_ && tau_on_grid_);
  if (need_E) avg_E_.assign(avg_coef_.size(), 0.0);
  for (int i = 0; i <= K; ++i) {
    int lo = 0;
    const double b = tau_d_ - t_[i];
    if (tau_d_ > 0.0 && b >= delta_) continue;
    if (tau_d_ > 0.0 && b > 0.0) {
      int qb = 0;
      if (grid_index(b, qb)) lo = qb;
    }
    const auto w = row_weights(lo, qd);
    for (int k = 0; k <= Q_; ++k) {
      const double tau = k * h_tau_;
      avg_coef_[i * (Q_ + 1) + k] = w[k] * xi(tau + t_[i]) / delta_;
      if (need_E) {
        avg_E_[i * (Q_ + 1) + k] = toeplitz_ ? (xi.integral(tau + t_[i]) - xi.integral(tau)) / tau_m
                                             : exposure(cfg_, -tau, 0.0, t_[i]);
      }
    }
  }
  avg_w0_ = row_weights(0, qd);
  for (double& w : avg_w0_) w /= delta_;
  avg_xi0_.resize(Q_ + 1);
  for (int k = 0; k <= Q_; ++k) {
    const double tau = k * h_tau_;
    avg_xi0_[k] =
        toeplitz_ ? (xi.integral(tau + tau_m) - xi.integral(tau)) / tau_m : exposure(cfg_, -tau, 0.0, tau_m);
  }
}

std::vector<cplx> PulseChain::first_level(cplx x, const CarryIn& carry, cplx& pi0) const {
  const int K = K_;
  const auto& xi = cfg_.efficiency;
  const double tau_m = cfg_.tau_m;
  std::vector<cplx> f(K + 1);
  switch (carry.kind) {
    case CarryIn::Kind::fresh:
      for (int i = 0; i <= K; ++i) f[i] = x * I_[i] * std::exp(-x * C_[i]);
      pi0 = std::exp(-x);
      break;
    case CarryIn::Kind::fixed: {
      const double tau = carry.tau;
      if (!(tau >= 0.0)) throw DomainError("carry-in time must be >= 0");
      double e_end = 0.0;
      for (int i = 0; i <= K; ++i) {
        const double e = toeplitz_ ? (xi.integral(tau + t_[i]) - xi.integral(tau)) / tau_m
                                   : exposure(cfg_, -tau, 0.0, t_[i]);
        f[i] = x * I_[i] * xi(tau + t_[i]) * std::exp(-x * e);
        if (i == K) e_end = e;
      }
      pi0 = std::exp(-x * e_end);
      break;
    }
    case CarryIn::Kind::averaged: {
      if (!(delta_ > 0.0)) throw ContractError("averaged carry-in needs a chain built with delta > 0");
      const int Q = Q_;
      if (toeplitz_ && tau_on_grid_) {
        std::vector<cplx> z(K + Q + 1), zinv(Q + 1);
        for (int u = 0; u <= K + Q; ++u) z[u] = std::exp(-x * phi_u_[u]);
        for (int k = 0; k <= Q; ++k) zinv[k] = std::exp(x * phi_u_[k]);
        for (int i = 0; i <= K; ++i) {
          cplx acc = 0.0;
          const double* c = &avg_coef_[i * (Q + 1)];
          for (int k = 0; k <= Q; ++k)
            if (c[k] != 0.0) acc += c[k] * (z[i + k] * zinv[k]);
          f[i] = x * I_[i] * acc;
        }
      } else {
        for (int i = 0; i <= K; ++i) {
          cplx acc = 0.0;
          const double* c = &avg_coef_[i * (Q + 1)];
          const double* e = &avg_E_[i * (Q + 1)];
          for (int k = 0; k <= Q; ++k)
            if (c[k] != 0.0) acc += c[k] * std::exp(-x * e[k]);
          f[i] = x * I_[i] * acc;
        }
      }
      cplx p0 = 0.0;
      for (int k = 0; k <= Q; ++k) p0 += avg_w0_[k] * std::exp(-x * avg_xi0_[k]);
      pi0 = p0;
      break;
    }
  }
  return f;
}

void PulseChain::kernels(cplx x, std::vector<double>& kr, std::vector<double>& ki,
                         std::vector<cplx>& edge_kernel) const {
  const int K = K_;
  const auto& xi = cfg_.efficiency;
  const double tau_m = cfg_.tau_m;
  if (toeplitz_) {
    kr.resize(K + 1);
    ki.resize(K + 1);
    for (int u = 0; u <= K; ++u) {
      const cplx k = xi_u_[u] == 0.0 ? cplx(0.0) : xi_u_[u] * std::exp(-x * phi_u_[u]);
      kr[u] = k.real();
      ki[u] = k.imag();
    }
    edge_kernel.resize(edge_.size());
    for (std::size_t p = 0; p < edge_.size(); ++p)
      edge_kernel[p] = xi(edge_[p].u) * std::exp(-x * (xi.integral(edge_[p].u) / tau_m));
  } else {
    const std::size_t n = static_cast<std::size_t>(K + 1) * (K + 1);
    kr.assign(n, 0.0);
    ki.assign(n, 0.0);
    for (int i = 0; i <= K; ++i)
      for (int j = 0; j <= i; ++j) {
        const std::size_t idx = static_cast<std::size_t>(i) * (K + 1) + j;
        if (A_[idx] == 0.0) continue;
        const cplx k = A_[idx] * std::exp(-x * E_[idx]);
        kr[idx] = k.real();
        ki[idx] = k.imag();
      }
    edge_kernel.assign(edge_.size() * (K + 1), 0.0);
    for (int i = 0; i <= K; ++i)
      for (std::size_t p = 0; p < edge_.size(); ++p) {
        const auto& e = edge_[p];
        const int j = i - e.lo;
        if (j < 0) continue;
        const double E = (1.0 - e.theta) * E_[i * (K + 1) + j] + (e.theta > 0.0 ? e.theta * E_[i * (K + 1) + j + 1] : 0.0);
        edge_kernel[i * edge_.size() + p] = xi(e.u) * std::exp(-x * E);
      }
  }
}

void PulseChain::apply(cplx x, const std::vector<double>& fr, const std::vector<double>& fi, int nz,
                       const std::vector<double>& kr, const std::vector<double>& ki,
                       const std::vector<cplx>& edge_kernel, std::vector<double>& gr, std::vector<double>& gi) const {
  const int K = K_;
  const std::size_t P = edge_.size();
  for (int i = 0; i <= K; ++i) {
    double sr = 0.0, si = 0.0;
    const int L = i - s_;
    if (L >= 0 && L >= nz) {
      const double* w = W_[L].data();
      if (toeplitz_) {
        for (int j = nz; j <= L; ++j) {
          const double ar = w[j] * fr[j], ai = w[j] * fi[j];
          const double br = kr[i - j], bi = ki[i - j];
          sr += ar * br - ai * bi;
          si += ar * bi + ai * br;
        }
      } else {
        const double* rr = &kr[static_cast<std::size_t>(i) * (K + 1)];
        const double* ri = &ki[static_cast<std::size_t>(i) * (K + 1)];
        for (int j = nz; j <= L; ++j) {
          const double ar = w[j] * fr[j], ai = w[j] * fi[j];
          sr += ar * rr[j] - ai * ri[j];
          si += ar * ri[j] + ai * rr[j];
        }
      }
    }
    cplx acc(sr, si);
    for (std::size_t p = 0; p < P; ++p) {
      const auto& e = edge_[p];
      const int j = i - e.lo;
      if (j < 0) continue;
      cplx fv(fr[j], fi[j]);
      fv *= (1.0 - e.theta);
      if (e.theta > 0.0 && j + 1 <= K) fv += e.theta * cplx(fr[j + 1], fi[j + 1]);
      const cplx k = toeplitz_ ? edge_kernel[p] : edge_kernel[i * P + p];
      acc += e.w * fv * k;
    }
    const cplx g = x * I_[i] * acc;
    gr[i] = g.real();
    gi[i] = g.imag();
  }
}

ChainValues PulseChain::evaluate(cplx x, const CarryIn& carry, int levels) const {
  const int nl = levels < 0 ? levels_ : std::min(levels, levels_);
  const int K = K_;
  ChainValues out;
  out.pi.assign(nl + 1, 0.0);
  out.regular.assign(nl + 1, 0.0);
  cplx pi0;
  auto f = first_level(x, carry, pi0);
  out.pi[0] = out.regular[0] = pi0;
  if (nl == 0) return out;

  std::vector<cplx> S(K + 1);
  for (int i = 0; i <= K; ++i)
    S[i] = std::exp(-x * (toeplitz_ ? phi_u_[K - i] : E_[static_cast<std::size_t>(K) * (K + 1) + i]));

  std::vector<double> fr(K + 1), fi(K + 1), gr(K + 1), gi(K + 1), kr, ki;
  std::vector<cplx> edge_kernel;
  for (int i = 0; i <= K; ++i) {
    fr[i] = f[i].real();
    fi[i] = f[i].imag();
  }
  if (nl >= 2) kernels(x, kr, ki, edge_kernel);
  std::vector<cplx> F(delta_ > 0.0 ? K + 1 : 0, 0.0);

  auto reduce = [&](const Sparse& w) {
    cplx acc = 0.0;
    for (auto [j, wj] : w) acc += wj * cplx(fr[j], fi[j]) * S[j];
    return acc;
  };
  for (int n = 1; n <= nl; ++n) {
    out.regular[n] = reduce(w_regular_);
    out.pi[n] = dead_ ? out.regular[n] + reduce(w_irregular_) : out.regular[n];
    if (!F.empty())
      for (int i = 0; i <= K; ++i) F[i] += cplx(fr[i], fi[i]);
    if (n == nl) break;
    int nz = 0;
    while (nz <= K && fr[nz] == 0.0 && fi[nz] == 0.0) ++nz;
    if (nz > K) break;
    apply(x, fr, fi, nz, kr, ki, edge_kernel, gr, gi);
    std::swap(fr, gr);
    std::swap(fi, gi);
  }
  if (!F.empty()) {
    cplx acc = 0.0;
    for (auto [j, wj] : w_tail_) acc += wj * F[j] * S[j];
    out.tail = acc;
  }
  return out;
}

std::vector<std::vector<cplx>> PulseChain::all_levels(cplx x, const CarryIn& carry, cplx& pi0) const {
  const int K = K_;
  std::vector<std::vector<cplx>> levels;
  auto f = first_level(x, carry, pi0);
  std::vector<double> fr(K + 1), fi(K + 1), gr(K + 1), gi(K + 1), kr, ki;
  std::vector<cplx> edge_kernel;
  if (levels_ >= 2) kernels(x, kr, ki, edge_kernel);
  for (int i = 0; i <= K; ++i) {
    fr[i] = f[i].real();
    fi[i] = f[i].imag();
  }
  for (int n = 1; n <= levels_; ++n) {
    std::vector<cplx> cur(K + 1);
    for (int i = 0; i <= K; ++i) cur[i] = cplx(fr[i], fi[i]);
    levels.push_back(std::move(cur));
    if (n == levels_) break;
    int nz = 0;
    while (nz <= K && fr[nz] == 0.0 && fi[nz] == 0.0) ++nz;
    if (nz > K) break;
    apply(x, fr, fi, nz, kr, ki, edge_kernel, gr, gi);
    std::swap(fr, gr);
    std::swap(fi, gi);
  }
  return levels;
}

std::vector<double> PulseChain::last_click_density(double x, const CarryIn& carry, std::span<const double> ts) const {
  if (carry.kind == CarryIn::Kind::averaged)
    throw ContractError("last_click_density supports fresh and fixed carry-in only");
  const auto& xi = cfg_.efficiency;
  const double tau_m = cfg_.tau_m;
  const double h = h_;
  cplx pi0;
  const auto levels = all_levels(x, carry, pi0);
  std::vector<double> out;
  out.reserve(ts.size());
  for (double t : ts) {
    if (t < 0.0 || t > tau_m * (1 + 1e-12)) throw DomainError("last_click_density: time outside the window");
    t = std::min(t, tau_m);
    const double It = cfg_.intensity(t);
    // Exposure from a click at s up to t.
    auto E = [&](double s) {
      return toeplitz_ ? xi.integral(t - s) / tau_m : exposure(cfg_, s, s, t);
    };
    double first;
    if (carry.kind == CarryIn::Kind::fresh) {
      first = x * It * std::exp(-x * cumulative_intensity(cfg_.mode, tau_m, 0.0, t));
    } else {
      const double tau = carry.tau;
      const double e = toeplitz_ ? (xi.integral(tau + t) - xi.integral(tau)) / tau_m : exposure(cfg_, -tau, 0.0, t);
      first = x * It * xi(tau + t) * std::exp(-x * e);
    }
    double total = first;
    const double upper = t - tau_d_;
    if (upper > 0.0 && levels.size() >= 2) {
      // Kernel at every node inside the support plus a Gauss rule on the
      // stretch between the last usable node and the support edge.
      int jb = static_cast<int>(std::floor(upper / h + 1e-9));
      jb = std::min(jb, K_);
      if (s_ > 0 && fast_recovery(xi, h)) --jb;
      std::vector<double> kern(std::max(jb, -1) + 1);
      for (int j = 0; j <= jb; ++j) kern[j] = xi(t - t_[j]) * std::exp(-x * E(t_[j]));
      std::vector<std::pair<double, double>> pts;
      const double from = std::max(jb, 0) * h;
      if (jb < 0) {
        add_points(t - upper, t, xi, h, pts);
      } else if (upper - from > 1e-12 * h) {
        add_points(t - upper, t - from, xi, h, pts);
      }
      std::vector<double> pk(pts.size());
      for (std::size_t p = 0; p < pts.size(); ++p) {
        const double s = t - pts[p].first;
        pk[p] = xi(pts[p].first) * std::exp(-x * E(s));
      }
      const auto w = jb >= 1 ? composite_weights(jb, h) : std::vector<double>{};
      for (std::size_t k = 0; k + 1 < levels.size(); ++k) {
        const auto& f = levels[k];
        double acc = 0.0;
        for (int j = 0; j < static_cast<int>(w.size()); ++j) acc += w[j] * f[j].real() * kern[j];
        for (std::size_t p = 0; p < pts.size(); ++p) {
          const double s = t - pts[p].first;
          const double c = std::clamp(s / h, 0.0, static_cast<double>(K_));
          const int j = std::min(static_cast<int>(std::floor(c)), K_ - 1);
          const double th = c - j;
          const double fv = (1.0 - th) * f[j].real() + th * f[j + 1].real();
          acc += pts[p].second * fv * pk[p];
        }
        total += x * It * acc;
      }
    }
    const double surv = toeplitz_ ? std::exp(-x * xi.integral(tau_m - t) / tau_m) : std::exp(-x * exposure(cfg_, t, t, tau_m));
    out.push_back(total * surv);
  }
  return out;
}

std::vector<ContourBand> plan_contour_bands(int m_max) {
  const double limit = std::log(1e4);
  auto logF = [](int m, double R) {
    return std::lgamma(m + 1.0) + R - m * std::log(R) - 0.5 * std::log(2.0 * M_PI * std::max(m, 1));
  };
  std::vector<ContourBand> bands;
  int m_lo = 0;
  while (m_lo <= m_max) {
    double best_R = std::max(1.0, static_cast<double>(m_lo));
    int best_hi = m_lo;
    const double step = 0.05 * (1.0 + m_lo / 20.0);
    for (double R = std::max(0.5, 0.5 * m_lo); R <= 2.0 * m_lo + 20.0; R += step) {
      if (logF(m_lo, R) > limit) continue;
      int hi = m_lo;
      while (hi < m_max && logF(hi + 1, R) <= limit) ++hi;
      if (hi > best_hi) {
        best_hi = hi;
        best_R = R;
      }
      if (hi >= m_max) break;
    }
    best_hi = std::min(best_hi, m_max);
    // Enough points that aliased coefficients m + P stay below 1e-18.
    int P = std::max(2 * (best_hi + 1), static_cast<int>(std::ceil(best_R + 12.0 * std::sqrt(best_R) + 40.0)));
    P += P % 2;
    while (std::lgamma(m_lo + 1.0) + P * std::log(best_R) - std::lgamma(m_lo + P + 1.0) > std::log(1e-18)) P += 2;
    bands.push_back({best_R, P, m_lo, best_hi});
    m_lo = best_hi + 1;
  }
  return bands;
}

std::vector<std::vector<double>> fock_coefficients(const SymbolFunction& fn, std::size_t outputs, int m_max) {
  if (m_max < 0) throw DomainError("fock_coefficients: m_max must be >= 0");
  std::vector<std::vector<double>> out(outputs, std::vector<double>(m_max + 1, 0.0));
  for (const auto& band : plan_contour_bands(m_max)) {
    const int P = band.points;
    const int half = P / 2;
    std::vector<std::vector<cplx>> g(half + 1);
    parallel_for(static_cast<std::size_t>(half + 1), [&](std::size_t p) {
      const double theta = 2.0 * M_PI * static_cast<double>(p) / P;
      cplx x = std::polar(band.radius, theta);
      if (p == 0) x = cplx(band.radius, 0.0);
      if (static_cast<int>(p) == half) x = cplx(-band.radius, 0.0);
      auto v = fn(x, band.m_hi);
      if (v.size() < outputs) v.resize(outputs, 0.0);
      const cplx ex = std::exp(x);
      for (auto& e : v) e *= ex;
      g[p] = std::move(v);
    });
    for (int m = band.m_lo; m <= band.m_hi; ++m) {
      const double scale = std::exp(std::lgamma(m + 1.0) - m * std::log(band.radius)) / P;
      for (std::size_t k = 0; k < outputs; ++k) {
        double s = g[0][k].real() + ((m % 2) ? -1.0 : 1.0) * g[half][k].real();
        for (int p = 1; p < half; ++p) {
          const long long r = (static_cast<long long>(m) * p) % P;
          const double ang = -2.0 * M_PI * static_cast<double>(r) / P;
          s += 2.0 * (g[p][k] * cplx(std::cos(ang), std::sin(ang))).real();
        }
        out[k][m] = s * scale;
      }
    }
  }
  return out;
}

}  // namespace snspd
