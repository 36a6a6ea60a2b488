#include "snspd/io.hpp"

#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>

#include "snspd/errors.hpp"

namespace snspd {

json to_json(const EfficiencyProfile& p) {
  json j;
  j["kind"] = to_string(p.kind());
  switch (p.kind()) {
    case ProfileKind::ideal:
      break;
    case ProfileKind::dead_time_only:
      j["tau_d"] = p.tau_d();
      break;
    case ProfileKind::exponential_recovery:
      j["tau_d"] = p.tau_d();
      j["tau_r"] = p.tau_r();
      break;
    case ProfileKind::tabulated:
      j["t"] = p.table_t();
      j["xi"] = p.table_xi();
      break;
  }
  return j;
}

json to_json(const ModeProfile& m) {
  json j;
  j["kind"] = m.is_monochromatic() ? "monochromatic" : "tabulated";
  if (!m.is_monochromatic()) {
    j["s"] = m.table_s();
    j["intensity"] = m.table_g();
  }
  return j;
}

json to_json(const DetectorConfig& c) {
  json j;
  j["tau_m"] = c.tau_m;
  j["eta"] = c.eta;
  j["nu"] = c.nu;
  j["efficiency"] = to_json(c.efficiency);
  j["mode"] = to_json(c.mode);
  return j;
}

json to_json(const QuadratureSpec& q) {
  json j;
  j["method"] = to_string(q.method);
  j["rel_tol"] = q.rel_tol;
  j["abs_tol"] = q.abs_tol;
  j["gauss_order"] = q.gauss_order;
  j["qmc_samples"] = q.qmc_samples;
  j["seed"] = q.seed;
  j["chain_nodes"] = q.chain_nodes;
  return j;
}

json to_json(const StateSpec& s) {
  json j;
  j["kind"] = to_string(s.kind);
  switch (s.kind) {
    case StateKind::coherent:
      j["alpha"] = {s.alpha.real(), s.alpha.imag()};
      break;
    case StateKind::fock:
      j["k"] = s.k;
      break;
    case StateKind::squeezed_vacuum:
      j["r"] = s.r;
      break;
    case StateKind::custom:
      j["probs"] = s.probs;
      break;
  }
  return j;
}

json to_json(const ConditionalMatrix& m) {
  json j;
  j["scenario"] = m.scenario();
  j["n_max"] = m.n_max();
  j["m_max"] = m.m_max();
  json rows = json::array();
  for (int n = 0; n <= m.n_max(); ++n) {
    std::vector<double> row(m.m_max() + 1);
    for (int k = 0; k <= m.m_max(); ++k) row[k] = m(n, k);
    rows.push_back(row);
  }
  j["p"] = std::move(rows);
  return j;
}

json to_json(const ClickDistribution& d) {
  json j;
  j["scenario"] = d.meta.scenario;
  j["config_digest"] = d.meta.config_digest;
  j["quadrature"] = to_json(d.meta.quadrature);
  j["seed"] = d.meta.seed;
  j["probs"] = d.probs;
  j["total"] = d.total();
  j["warnings"] = d.meta.warnings;
  return j;
}

std::string digest(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string digest(const json& j) { return digest(j.dump()); }

std::string config_digest(const DetectorConfig& c) { return digest(to_json(c)); }

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_csv(std::ostream& out, const ConditionalMatrix& m) {
  out << "# scenario " << m.scenario() << "\n";
  out << "n";
  for (int k = 0; k <= m.m_max(); ++k) out << ",m" << k;
  out << "\n";
  for (int n = 0; n <= m.n_max(); ++n) {
    out << n;
    for (int k = 0; k <= m.m_max(); ++k) out << ',' << format_double(m(n, k));
    out << "\n";
  }
}

void write_csv(std::ostream& out, const ClickDistribution& d) {
  out << "# scenario " << d.meta.scenario << "\n";
  out << "# config " << d.meta.config_digest << "\n";
  out << "# digest " << digest(to_json(d)) << "\n";
  for (const auto& w : d.meta.warnings) out << "# warning " << w << "\n";
  out << "n,p\n";
  for (int n = 0; n <= d.n_max(); ++n) out << n << ',' << format_double(d.probs[n]) << "\n";
}

namespace {

std::uint64_t to_le(std::uint64_t v) {
  if constexpr (std::endian::native == std::endian::little) return v;
  std::uint64_t r = 0;
  for (int i = 0; i < 8; ++i) r |= ((v >> (8 * i)) & 0xffu) << (8 * (7 - i));
  return r;
}

}  // namespace

void write_f64_le(const std::string& path, std::span<const double> values) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw DomainError("cannot open " + path + " for writing");
  for (double v : values) {
    const std::uint64_t u = to_le(std::bit_cast<std::uint64_t>(v));
    f.write(reinterpret_cast<const char*>(&u), 8);
  }
  if (!f) throw DomainError("write failed: " + path);
}

std::vector<double> read_f64_le(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw DomainError("cannot open " + path);
  std::vector<double> out;
  std::uint64_t u;
  while (f.read(reinterpret_cast<char*>(&u), 8)) out.push_back(std::bit_cast<double>(to_le(u)));
  if (f.gcount() != 0) throw DomainError(path + ": size is not a multiple of 8 bytes");
  return out;
}

}  // namespace snspd
