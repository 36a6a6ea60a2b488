#include "snspd/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "snspd/characterization.hpp"
#include "snspd/errors.hpp"
#include "snspd/io.hpp"
#include "snspd/montecarlo.hpp"
#include "snspd/povm_cw.hpp"
#include "snspd/povm_independent.hpp"
#include "snspd/validate.hpp"

namespace snspd {

namespace {

// Flat JSON object of option values, keys as long flag names ("tau_d" or "tau-d").
class JsonConfig : public CLI::Config {
 public:
  std::string to_config(const CLI::App* app, bool default_also, bool, std::string) const override {
    json j;
    for (const CLI::Option* opt : app->get_options()) {
      if (opt->get_lnames().empty() || !opt->get_configurable()) continue;
      const auto& name = opt->get_lnames().front();
      if (opt->count() > 0) {
        j[name] = opt->as<std::string>();
      } else if (default_also && !opt->get_default_str().empty()) {
        j[name] = opt->get_default_str();
      }
    }
    return j.dump(2) + "\n";
  }

  std::vector<CLI::ConfigItem> from_config(std::istream& in) const override {
    json j;
    try {
      j = json::parse(in);
    } catch (const json::exception& e) {
      throw CLI::ConfigError(std::string("config file: ") + e.what());
    }
    if (!j.is_object()) throw CLI::ConfigError("config file must hold a JSON object");
    std::vector<CLI::ConfigItem> items;
    for (auto it = j.begin(); it != j.end(); ++it) {
      CLI::ConfigItem item;
      item.name = it.key();
      std::replace(item.name.begin(), item.name.end(), '_', '-');
      auto text = [](const json& v) { return v.is_string() ? v.get<std::string>() : v.dump(); };
      if (it->is_array()) {
        for (const auto& v : *it) item.inputs.push_back(text(v));
      } else {
        item.inputs.push_back(text(*it));
      }
      items.push_back(std::move(item));
    }
    return items;
  }
};

struct Options {
  std::string state = "coherent:2";
  std::string profile = "exp";
  double tau_d = 0.05, tau_r = 0.2, tau_m = 1.0, eta = 1.0, nu = 0.0;
  std::string mode_file;
  double delta = 0.0;
  int windows = 3;
  std::string memory_depth = "8";
  std::uint64_t trials = 1000000, seed = 0;
  std::string method = "chain";
  double tol = 1e-6;
  int nodes = 400;
  std::string out, format = "csv", time_unit = "tau_m", gnuplot;
  int n_max = -1, m_max = -1;
  std::string kind = "p";
  std::string carry = "fresh";
  int warm_up = 4, windows_per_trial = 1;
  std::string gaps_out;
  double renewal_rate = 0.0;
  std::uint64_t gap_count = 0;
  std::string input;
  double bin_width = 0.01, t_max = 0.0, lambda = 0.0, prev_gap_min = 0.0;
  std::string suite = "quick";
  int figure = 0;
  bool tau_m_given = false;
};

struct Output {
  json config;
  json result;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> warnings;
};

std::string cell(double v) { return format_double(v); }
std::string cell(int v) { return std::to_string(v); }

void emit(const Output& o, const Options& opt, std::ostream& stdout_) {
  std::ofstream file;
  std::ostream* os = &stdout_;
  if (!opt.out.empty()) {
    file.open(opt.out);
    if (!file) throw DomainError("cannot write " + opt.out);
    os = &file;
  }
  const std::string d = digest(o.result);
  if (opt.format == "json") {
    json j;
    j["config"] = o.config;
    j["result"] = o.result;
    j["warnings"] = o.warnings;
    j["digest"] = d;
    *os << j.dump(2) << "\n";
  } else {
    *os << "# config " << o.config.dump() << "\n";
    *os << "# digest " << d << "\n";
    for (const auto& w : o.warnings) *os << "# warning " << w << "\n";
    for (std::size_t c = 0; c < o.columns.size(); ++c) *os << (c ? "," : "") << o.columns[c];
    *os << "\n";
    for (const auto& row : o.rows) {
      for (std::size_t c = 0; c < row.size(); ++c) *os << (c ? "," : "") << row[c];
      *os << "\n";
    }
  }
  if (!*os) throw DomainError("write failed");
}

EfficiencyProfile make_profile(const Options& o) {
  const std::string& p = o.profile;
  if (p == "ideal") return EfficiencyProfile::ideal();
  if (p == "deadtime") return EfficiencyProfile::dead_time(o.tau_d);
  if (p == "exp") return EfficiencyProfile::exponential(o.tau_d, o.tau_r);
  if (p.rfind("tabulated:", 0) == 0) return load_profile_csv(p.substr(10));
  throw DomainError("unknown profile '" + p + "' (ideal|deadtime|exp|tabulated:path)");
}

DetectorConfig make_config(const Options& o) {
  if (o.time_unit != "tau_m" && o.time_unit != "s") throw DomainError("--time-unit must be tau_m or s");
  if (o.time_unit == "tau_m" && o.tau_m_given && o.tau_m != 1.0)
    throw DomainError("--tau-m other than 1 needs --time-unit s");
  DetectorConfig c;
  c.tau_m = o.tau_m;
  c.eta = o.eta;
  c.nu = o.nu;
  c.efficiency = make_profile(o);
  if (!o.mode_file.empty()) c.mode = load_mode_csv(o.mode_file, c.tau_m);
  c.validate();
  return c;
}

QuadratureSpec make_quadrature(const Options& o) {
  QuadratureSpec q;
  if (o.method == "qmc") q.method = QuadMethod::qmc_sobol;
  else if (o.method != "chain" && o.method != "gauss") throw DomainError("--method must be chain, gauss or qmc");
  q.rel_tol = o.tol;
  q.seed = o.seed;
  q.chain_nodes = o.nodes;
  q.validate();
  return q;
}

CwConfig make_cw(const Options& o, const DetectorConfig& c) {
  CwConfig cw;
  cw.delta = o.delta;
  cw.window_count = o.windows;
  if (o.memory_depth == "geometric") {
    cw.geometric_limit = true;
  } else {
    try {
      std::size_t used = 0;
      cw.memory_depth = std::stoi(o.memory_depth, &used);
      if (used != o.memory_depth.size()) throw std::invalid_argument("");
    } catch (const std::logic_error&) {
      throw DomainError("--memory-depth must be an integer or 'geometric'");
    }
  }
  return resolved(cw, c);
}

json base_config(const std::string& command, const Options& o, const DetectorConfig& c) {
  json j;
  j["command"] = command;
  j["time_unit"] = o.time_unit;
  j["detector"] = to_json(c);
  return j;
}

// P_{n|m} by direct integration, one entry at a time.
ConditionalMatrix direct_matrix(const DetectorConfig& c, int n_max, int m_max, const QuadratureSpec& q) {
  ConditionalMatrix P(n_max, m_max, "independent_direct");
  const DetectorConfig unit = c.unit_efficiency();
  for (int n = 0; n <= n_max; ++n)
    for (int m = n; m <= m_max; ++m) P.at(n, m) = std::clamp(cond_prob_direct(unit, n, m, q).value, 0.0, 1.0);
  return P;
}

void distribution_rows(Output& o, const ClickDistribution& d) {
  o.columns = {"n", "p"};
  for (int n = 0; n <= d.n_max(); ++n) o.rows.push_back({cell(n), cell(d.probs[n])});
  o.result = to_json(d);
  o.warnings = d.meta.warnings;
}

int cmd_dist(const Options& opt, std::ostream& out) {
  const auto c = make_config(opt);
  const auto q = make_quadrature(opt);
  const auto state = parse_state(opt.state);
  const auto pd = photon_number_dist(state, c.eta, c.nu);
  Output o;
  o.config = base_config("dist", opt, c);
  o.config["state"] = to_json(state);
  o.config["method"] = opt.method;
  o.config["quadrature"] = to_json(q);
  ClickDistribution d;
  if (opt.method == "chain") {
    d = click_distribution_independent(pd, c, q);
  } else {
    const int M = pd.m_max();
    const auto P = direct_matrix(c, default_n_max(c, M), M, q);
    d.meta.scenario = "independent_direct";
    d.meta.config_digest = config_digest(c);
    d.meta.quadrature = q;
    d.meta.seed = q.seed;
    d.probs.assign(P.n_max() + 1, 0.0);
    for (int n = 0; n <= P.n_max(); ++n)
      for (int m = n; m <= M; ++m) d.probs[n] += P(n, m) * pd.probs[m];
  }
  distribution_rows(o, d);
  emit(o, opt, out);
  return kExitOk;
}

int cmd_matrix(const Options& opt, std::ostream& out) {
  const auto c = make_config(opt);
  const auto q = make_quadrature(opt);
  const int m_max = opt.m_max >= 0 ? opt.m_max : 10;
  const int n_max = opt.n_max >= 0 ? std::min(opt.n_max, m_max) : default_n_max(c, m_max);
  Output o;
  o.config = base_config("matrix", opt, c);
  o.config["kind"] = opt.kind;
  o.config["n_max"] = n_max;
  o.config["m_max"] = m_max;
  o.config["method"] = opt.method;
  o.config["quadrature"] = to_json(q);
  ConditionalMatrix M;
  if (opt.kind == "p") {
    M = opt.method == "chain" ? cond_prob_matrix(c, n_max, m_max, q) : direct_matrix(c, n_max, m_max, q);
  } else if (opt.kind == "regular" || opt.kind == "irregular") {
    const auto P = cond_prob_matrix(c, n_max, m_max, q);
    M = regular_matrix(c, n_max, m_max, q);
    if (opt.kind == "irregular") {
      ConditionalMatrix I(n_max, m_max, "independent_irregular");
      for (int n = 0; n <= n_max; ++n)
        for (int m = 0; m <= m_max; ++m) I.at(n, m) = std::max(P(n, m) - M(n, m), 0.0);
      M = std::move(I);
    }
  } else if (opt.kind == "d") {
    const auto cw = make_cw(opt, c);
    o.config["delta"] = cw.delta;
    M = d_matrix(c, cw, n_max, m_max, q);
  } else if (opt.kind == "closed") {
    M = ConditionalMatrix(n_max, m_max, "deadtime_closed_form");
    for (int n = 0; n <= n_max; ++n)
      for (int m = 0; m <= m_max; ++m) M.at(n, m) = deadtime_closed_form(c, n, m);
  } else {
    throw DomainError("--kind must be p, regular, irregular, d or closed");
  }
  o.result = to_json(M);
  o.columns.push_back("n");
  for (int m = 0; m <= m_max; ++m) o.columns.push_back("m" + std::to_string(m));
  for (int n = 0; n <= n_max; ++n) {
    std::vector<std::string> row{cell(n)};
    for (int m = 0; m <= m_max; ++m) row.push_back(cell(M(n, m)));
    o.rows.push_back(std::move(row));
  }
  emit(o, opt, out);
  return kExitOk;
}

int cmd_cw(const Options& opt, std::ostream& out) {
  const auto c = make_config(opt);
  const auto q = make_quadrature(opt);
  const auto cw = make_cw(opt, c);
  const auto state = parse_state(opt.state);
  const auto pd = photon_number_dist(state, c.eta, c.nu);
  const auto k = memory_kernels(c, cw, pd.m_max(), q);
  const double qv = memory_probability_q(k, {pd}, cw);
  const auto d = click_distribution_cw(pd, c, cw, q);
  Output o;
  o.config = base_config("cw", opt, c);
  o.config["state"] = to_json(state);
  o.config["delta"] = cw.delta;
  o.config["window_count"] = cw.window_count;
  o.config["memory_depth"] = cw.geometric_limit ? json("geometric") : json(cw.memory_depth);
  o.config["quadrature"] = to_json(q);
  distribution_rows(o, d);
  o.result["memory_probability"] = qv;
  emit(o, opt, out);
  return kExitOk;
}

int cmd_simulate(const Options& opt, std::ostream& out) {
  const auto c = make_config(opt);
  Output o;
  o.config = base_config("simulate", opt, c);
  o.config["seed"] = opt.seed;
  if (opt.renewal_rate > 0.0) {
    if (opt.gap_count == 0) throw DomainError("--renewal-rate needs --gap-count");
    if (opt.gaps_out.empty()) throw DomainError("--renewal-rate needs --gaps-out");
    const auto gaps = simulate_gaps(c.efficiency, opt.renewal_rate, opt.gap_count, opt.seed);
    write_f64_le(opt.gaps_out, gaps);
    double mean = 0.0;
    for (double g : gaps) mean += g;
    mean /= static_cast<double>(gaps.size());
    o.config["renewal_rate"] = opt.renewal_rate;
    o.config["gap_count"] = opt.gap_count;
    o.result["gap_count"] = gaps.size();
    o.result["mean_gap"] = mean;
    o.result["gaps_file"] = opt.gaps_out;
    o.columns = {"gap_count", "mean_gap"};
    o.rows.push_back({std::to_string(gaps.size()), cell(mean)});
    emit(o, opt, out);
    return kExitOk;
  }
  const auto state = parse_state(opt.state);
  SimSpec s;
  s.trials = opt.trials;
  s.seed = opt.seed;
  s.warm_up = opt.warm_up;
  s.windows_per_trial = opt.windows_per_trial;
  s.record_gaps = !opt.gaps_out.empty();
  if (opt.carry == "fresh") {
    s.carry = CarryMode::fresh;
  } else if (opt.carry.rfind("fixed:", 0) == 0) {
    s.carry = CarryMode::fixed_tau;
    try {
      s.tau = std::stod(opt.carry.substr(6));
    } catch (const std::logic_error&) {
      throw DomainError("--carry fixed:<tau> needs a number");
    }
  } else if (opt.carry == "uniform") {
    s.carry = CarryMode::uniform_tau;
    s.delta = opt.delta > 0.0 ? opt.delta : default_delta(c);
  } else if (opt.carry == "contiguous") {
    s.carry = CarryMode::contiguous;
  } else {
    throw DomainError("--carry must be fresh, fixed:<tau>, uniform or contiguous");
  }
  const auto r = empirical_distribution(state, c, s);
  if (s.record_gaps) write_f64_le(opt.gaps_out, r.gaps);
  o.config["state"] = to_json(state);
  o.config["trials"] = s.trials;
  o.config["carry"] = to_string(s.carry);
  if (s.carry == CarryMode::fixed_tau) o.config["tau"] = s.tau;
  if (s.carry == CarryMode::uniform_tau) o.config["delta"] = s.delta;
  if (s.carry == CarryMode::contiguous) {
    o.config["warm_up"] = s.warm_up;
    o.config["windows_per_trial"] = s.windows_per_trial;
  }
  const auto p = r.probs(), se = r.std_errors();
  o.result["windows"] = r.windows;
  o.result["counts"] = r.counts;
  o.result["probs"] = p;
  o.result["std_errors"] = se;
  o.result["mean_clicks"] = r.mean_clicks();
  o.columns = {"n", "p", "se"};
  for (std::size_t n = 0; n < p.size(); ++n) o.rows.push_back({cell(static_cast<int>(n)), cell(p[n]), cell(se[n])});
  emit(o, opt, out);
  return kExitOk;
}

std::vector<double> read_samples(const std::string& path) {
  const auto dot = path.rfind('.');
  const std::string ext = dot == std::string::npos ? "" : path.substr(dot);
  if (ext != ".csv" && ext != ".txt") return read_f64_le(path);
  std::ifstream in(path);
  if (!in) throw DomainError("cannot open " + path);
  std::vector<double> v;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto comma = line.find(',');
    const std::string first = line.substr(0, comma);
    char* end = nullptr;
    const double x = std::strtod(first.c_str(), &end);
    if (end == first.c_str()) continue;  // header
    v.push_back(x);
  }
  return v;
}

int cmd_reconstruct(const Options& opt, std::ostream& out) {
  if (opt.input.empty()) throw DomainError("reconstruct needs --input");
  const auto samples = read_samples(opt.input);
  ReconstructionSpec rs;
  rs.bin_width = opt.bin_width;
  rs.t_max = opt.t_max > 0.0 ? opt.t_max : 2.0 * opt.tau_m;
  rs.lambda_hint = opt.lambda;
  rs.previous_gap_min = opt.prev_gap_min;
  const auto rec = reconstruct_efficiency(samples, rs);
  Output o;
  o.config["command"] = "reconstruct";
  o.config["time_unit"] = opt.time_unit;
  o.config["input"] = opt.input;
  o.config["bin_width"] = rs.bin_width;
  o.config["t_max"] = rs.t_max;
  o.config["lambda_hint"] = rs.lambda_hint;
  o.config["previous_gap_min"] = rs.previous_gap_min;
  o.result["lambda"] = rec.lambda;
  o.result["tail_corrected"] = rec.tail_corrected;
  o.result["samples_used"] = rec.samples_used;
  o.result["profile"] = to_json(rec.profile);
  o.warnings = rec.warnings;
  o.columns = {"t", "xi"};
  const auto& t = rec.profile.table_t();
  for (std::size_t i = 0; i < t.size(); ++i) o.rows.push_back({cell(t[i]), cell(rec.profile.table_xi()[i])});
  emit(o, opt, out);
  return kExitOk;
}

// Bars for the four detector models at one state and efficiency.
struct Panel {
  double eta;
  std::vector<std::vector<double>> models;  // pnr, shifted dead time, relaxation, continuous wave
};

Panel figure_panel(const StateSpec& state, double eta, const Options& opt, const QuadratureSpec& q,
                   std::vector<std::string>& warnings) {
  Panel p{eta, {}};
  DetectorConfig base;
  base.eta = eta;
  const auto pd = photon_number_dist(state, eta, 0.0);
  DetectorConfig pnr = base;
  p.models.push_back(click_distribution_independent(pd, pnr, q).probs);
  DetectorConfig shifted = base;
  shifted.efficiency = EfficiencyProfile::dead_time(opt.tau_d + opt.tau_r);
  p.models.push_back(click_distribution_independent(pd, shifted, q).probs);
  DetectorConfig relax = base;
  relax.efficiency = EfficiencyProfile::exponential(opt.tau_d, opt.tau_r);
  p.models.push_back(click_distribution_independent(pd, relax, q).probs);
  CwConfig cw;
  cw.delta = opt.delta > 0.0 ? opt.delta : 0.3;
  cw.window_count = opt.windows;
  const auto d = click_distribution_cw(pd, relax, cw, q);
  for (const auto& w : d.meta.warnings) warnings.push_back(w);
  p.models.push_back(d.probs);
  return p;
}

void write_gnuplot(const std::string& path, int figure, const Output& o) {
  std::ofstream g(path);
  if (!g) throw DomainError("cannot write " + path);
  g << "# figure " << figure << " photocounting statistics\n";
  g << "$data << EOD\n";
  for (const auto& row : o.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) g << (c ? " " : "") << row[c];
    g << "\n";
  }
  g << "EOD\n";
  g << "set style data histograms\nset style histogram clustered gap 1\nset style fill solid 0.8 border -1\n";
  g << "set xlabel 'n'\nset ylabel 'P_n'\nset key top right\n";
  const bool two = figure == 4;
  if (two) g << "set multiplot layout 2,1\n";
  const char* names[] = {"PNR", "shifted dead time", "relaxation", "continuous wave"};
  for (int panel = 0; panel < (two ? 2 : 1); ++panel) {
    const std::string eta = two ? (panel == 0 ? "1" : "0.8") : "";
    if (two) g << "set title 'eta = " << eta << "'\n";
    g << "plot ";
    for (int m = 0; m < 4; ++m) {
      g << (m ? ", " : "") << "$data using ";
      if (two) g << "($1==" << eta << "?$" << m + 3 << ":1/0)";
      else g << "($" << m + 3 << ")";
      g << ":xtic(2) title '" << names[m] << "'";
    }
    g << "\n";
  }
  if (two) g << "unset multiplot\n";
}

int cmd_figure(const Options& opt, std::ostream& out) {
  if (opt.figure < 3 || opt.figure > 5) throw DomainError("figure must be 3, 4 or 5");
  const auto q = make_quadrature(opt);
  StateSpec state;
  std::vector<double> etas;
  switch (opt.figure) {
    case 3:
      state = StateSpec::coherent(2.0);
      etas = {1.0};
      break;
    case 4:
      state = StateSpec::fock(4);
      etas = {1.0, 0.8};
      break;
    default:
      state = StateSpec::squeezed_vacuum(1.5);
      etas = {0.8};
      break;
  }
  Output o;
  o.config["command"] = "figure";
  o.config["figure"] = opt.figure;
  o.config["state"] = to_json(state);
  o.config["eta"] = etas;
  o.config["tau_d"] = opt.tau_d;
  o.config["tau_r"] = opt.tau_r;
  o.config["delta"] = opt.delta > 0.0 ? opt.delta : 0.3;
  o.config["window_count"] = opt.windows;
  o.config["quadrature"] = to_json(q);
  o.columns = {"eta", "n", "pnr", "shifted_dead_time", "relaxation", "continuous_wave"};
  json panels = json::array();
  for (double eta : etas) {
    const Panel p = figure_panel(state, eta, opt, q, o.warnings);
    // Rows up to the last n any model puts 1e-6 on.
    std::size_t top = 0;
    for (const auto& m : p.models)
      for (std::size_t n = 0; n < m.size(); ++n)
        if (m[n] >= 1e-6) top = std::max(top, n);
    json pj;
    pj["eta"] = eta;
    const char* keys[] = {"pnr", "shifted_dead_time", "relaxation", "continuous_wave"};
    for (int k = 0; k < 4; ++k) {
      std::vector<double> v(top + 1, 0.0);
      for (std::size_t n = 0; n <= top && n < p.models[k].size(); ++n) v[n] = p.models[k][n];
      pj[keys[k]] = v;
    }
    for (std::size_t n = 0; n <= top; ++n) {
      std::vector<std::string> row{cell(eta), cell(static_cast<int>(n))};
      for (int k = 0; k < 4; ++k) row.push_back(cell(n < p.models[k].size() ? p.models[k][n] : 0.0));
      o.rows.push_back(std::move(row));
    }
    panels.push_back(std::move(pj));
  }
  o.result["panels"] = std::move(panels);
  std::sort(o.warnings.begin(), o.warnings.end());
  o.warnings.erase(std::unique(o.warnings.begin(), o.warnings.end()), o.warnings.end());
  emit(o, opt, out);
  if (!opt.gnuplot.empty()) write_gnuplot(opt.gnuplot, opt.figure, o);
  return kExitOk;
}

int cmd_validate(const Options& opt, std::ostream& out) {
  if (opt.suite != "quick" && opt.suite != "full") throw DomainError("--suite must be quick or full");
  const auto checks = run_validation(opt.suite == "full" ? Suite::full : Suite::quick, opt.seed);
  Output o;
  o.config["command"] = "validate";
  o.config["suite"] = opt.suite;
  o.config["seed"] = opt.seed;
  o.columns = {"check", "status", "value", "threshold", "detail"};
  json arr = json::array();
  bool all = true;
  for (const auto& c : checks) {
    all = all && c.passed;
    o.rows.push_back({c.name, c.passed ? "PASS" : "FAIL", cell(c.value), cell(c.threshold), c.detail});
    json j;
    j["check"] = c.name;
    j["passed"] = c.passed;
    j["value"] = c.value;
    j["threshold"] = c.threshold;
    j["detail"] = c.detail;
    arr.push_back(std::move(j));
  }
  o.result["checks"] = std::move(arr);
  o.result["all_passed"] = all;
  emit(o, opt, out);
  return all ? kExitOk : kExitNumerical;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Photocounting statistics of detectors with dead time and recovery", "snspd"};
  app.require_subcommand(1);
  app.fallthrough();
  app.config_formatter(std::make_shared<JsonConfig>());
  app.set_config("--config", "", "JSON file with option values; explicit flags win");
  app.allow_config_extras(CLI::config_extras_mode::error);

  Options o;
  const std::string det = "Detector", cwg = "Continuous wave", sim = "Simulation", rec = "Reconstruction",
                    outg = "Output";
  app.add_option("--state", o.state, "coherent:A | coherent:re,im | fock:K | squeezed:R | vacuum | custom:p0,...")
      ->capture_default_str();
  app.add_option("--profile", o.profile, "ideal | deadtime | exp | tabulated:path")->group(det)->capture_default_str();
  app.add_option("--tau-d", o.tau_d, "dead time")->group(det)->capture_default_str();
  app.add_option("--tau-r", o.tau_r, "relaxation time")->group(det)->capture_default_str();
  auto* tm = app.add_option("--tau-m", o.tau_m, "window duration (with --time-unit s)")->group(det);
  app.add_option("--eta", o.eta, "efficiency")->group(det)->capture_default_str();
  app.add_option("--nu", o.nu, "dark-count mean per window")->group(det)->capture_default_str();
  app.add_option("--mode-file", o.mode_file, "two-column t,I CSV of the mode intensity")->group(det);
  app.add_option("--time-unit", o.time_unit, "tau_m | s")->group(det)->capture_default_str();
  app.add_option("--delta", o.delta, "last-pulse window before a boundary (0: default rule)")->group(cwg);
  app.add_option("--windows", o.windows, "window index l")->group(cwg)->capture_default_str();
  app.add_option("--memory-depth", o.memory_depth, "terms of the memory series, or 'geometric'")
      ->group(cwg)
      ->capture_default_str();
  app.add_option("--method", o.method, "chain | gauss | qmc")->capture_default_str();
  app.add_option("--tol", o.tol, "relative tolerance of direct integration")->capture_default_str();
  app.add_option("--nodes", o.nodes, "grid nodes per window of the chained evaluation")->capture_default_str();
  app.add_option("--n-max", o.n_max, "largest click count (matrix)");
  app.add_option("--m-max", o.m_max, "largest photon number (matrix)");
  app.add_option("--kind", o.kind, "matrix: p | regular | irregular | d | closed")->capture_default_str();
  app.add_option("--trials", o.trials, "simulated trials")->group(sim)->capture_default_str();
  app.add_option("--seed", o.seed, "random seed")->group(sim)->capture_default_str();
  app.add_option("--carry", o.carry, "fresh | fixed:TAU | uniform | contiguous")->group(sim)->capture_default_str();
  app.add_option("--warm-up", o.warm_up, "contiguous: windows dropped per trial")->group(sim)->capture_default_str();
  app.add_option("--windows-per-trial", o.windows_per_trial, "contiguous: windows kept per trial")
      ->group(sim)
      ->capture_default_str();
  app.add_option("--gaps-out", o.gaps_out, "write inter-pulse gaps as little-endian f64")->group(sim);
  app.add_option("--renewal-rate", o.renewal_rate, "simulate gaps under a steady flux of this rate")->group(sim);
  app.add_option("--gap-count", o.gap_count, "number of renewal gaps")->group(sim);
  app.add_option("--input", o.input, "gap samples (.f64 binary, or .csv/.txt)")->group(rec);
  app.add_option("--bin-width", o.bin_width, "histogram bin width")->group(rec)->capture_default_str();
  app.add_option("--t-max", o.t_max, "histogram horizon (default 2 tau_m)")->group(rec);
  app.add_option("--lambda", o.lambda, "known photon rate (default: estimate)")->group(rec);
  app.add_option("--prev-gap-min", o.prev_gap_min, "keep gaps preceded by a longer gap")->group(rec);
  app.add_option("--out", o.out, "output file (default stdout)")->group(outg);
  app.add_option("--format", o.format, "csv | json")->group(outg)->capture_default_str();
  app.add_option("--gnuplot", o.gnuplot, "figure: also write a gnuplot script")->group(outg);

  auto* dist = app.add_subcommand("dist", "click distribution for independent windows");
  auto* matrix = app.add_subcommand("matrix", "conditional click probabilities P_{n|m}");
  auto* cw = app.add_subcommand("cw", "click distribution for back-to-back windows");
  auto* simulate = app.add_subcommand("simulate", "Monte-Carlo click statistics or renewal gaps");
  auto* reconstruct = app.add_subcommand("reconstruct", "efficiency from inter-pulse gaps");
  auto* figure = app.add_subcommand("figure", "bars of the example figures (3, 4 or 5)");
  figure->add_option("number", o.figure, "3, 4 or 5")->required();
  auto* validate = app.add_subcommand("validate", "analytic and simulation cross-checks");
  validate->add_option("--suite", o.suite, "quick | full")->capture_default_str();

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  o.tau_m_given = tm->count() > 0 || o.tau_m != 1.0;
  if (o.format != "csv" && o.format != "json") {
    err << "error: --format must be csv or json\n";
    return kExitUsage;
  }

  try {
    if (dist->parsed()) return cmd_dist(o, out);
    if (matrix->parsed()) return cmd_matrix(o, out);
    if (cw->parsed()) return cmd_cw(o, out);
    if (simulate->parsed()) return cmd_simulate(o, out);
    if (reconstruct->parsed()) return cmd_reconstruct(o, out);
    if (figure->parsed()) return cmd_figure(o, out);
    if (validate->parsed()) return cmd_validate(o, out);
  } catch (const DomainError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ContractError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    err << "failure: " << e.what() << "\n";
    return kExitNumerical;
  }
  return kExitUsage;
}

}  // namespace snspd
