#include "nhvak/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <set>
#include <sstream>
#include <thread>

#include "nhvak/errors.hpp"
#include "nhvak/io.hpp"
#include "nhvak/systems.hpp"

namespace nhvak {

using Json = nlohmann::ordered_json;

double Tolerances::for_criterion(Criterion c) const {
  switch (c) {
    case Criterion::NH_IS_UNCONSTRAINED: return unconstrained;
    case Criterion::NH_IS_VAK_INTEGRAL: return integral;
    case Criterion::NH_IS_VAK_MULTIPLIER: return multiplier;
    case Criterion::VAK_IS_NH: return vak_is_nh;
  }
  return 0.0;
}

void Tolerances::set(const std::string& name, double value) {
  if (!(value > 0.0) || !std::isfinite(value))
    throw ConfigError("tolerance " + name + " must be positive and finite");
  if (name == "NH_IS_UNCONSTRAINED") unconstrained = value;
  else if (name == "NH_IS_VAK_INTEGRAL") integral = value;
  else if (name == "NH_IS_VAK_MULTIPLIER") multiplier = value;
  else if (name == "VAK_IS_NH") vak_is_nh = value;
  else if (name == "VAK_RESIDUAL") vak_residual = value;
  else throw ConfigError("unknown tolerance name '" + name + "'");
}

namespace {

void check_keys(const Json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& [k, v] : j.items())
    if (!allowed.count(k)) throw ConfigError("unknown key '" + k + "' in " + where);
}

double number(const Json& j, const std::string& what) {
  if (!j.is_number()) throw ConfigError(what + " must be a number");
  const double x = j.get<double>();
  if (!std::isfinite(x)) throw ConfigError(what + " must be finite");
  return x;
}

VectorXd vector_of(const Json& j, const std::string& what) {
  if (!j.is_array()) throw ConfigError(what + " must be an array of numbers");
  VectorXd v(static_cast<long>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<long>(i)) = number(j[i], what);
  return v;
}

MatrixXd basis_of(const Json& j, const std::string& what) {
  if (!j.is_array()) throw ConfigError(what + " must be an array of basis vectors");
  if (j.empty()) return MatrixXd();
  const VectorXd first = vector_of(j[0], what);
  MatrixXd m(first.size(), static_cast<long>(j.size()));
  for (std::size_t c = 0; c < j.size(); ++c) {
    const VectorXd col = vector_of(j[c], what);
    if (col.size() != first.size()) throw ConfigError(what + ": basis vectors differ in length");
    m.col(static_cast<long>(c)) = col;
  }
  return m;
}

Criterion criterion_of(const std::string& name) {
  const auto c = parse_criterion(name);
  if (!c) throw ConfigError("unknown criterion '" + name + "'");
  return *c;
}

std::set<std::string> param_names(const std::string& system) {
  std::set<std::string> names;
  for (const auto& [k, v] : default_params(system)) names.insert(k);
  if (system == "carriage") names.insert("XY");
  return names;
}

struct Initial {
  VectorXd q0, v0_d, lam0;
};

Initial initial_data(const SystemSpec& sys, const RunConfig& cfg) {
  const Splitting& sp = sys.splitting;
  Initial in{cfg.q0.value_or(VectorXd::Zero(sys.dim())),
             cfg.v0_d.value_or(VectorXd::Ones(sp.d_rank())),
             cfg.lam0.value_or(VectorXd::Zero(sp.dprime_rank()))};
  if (in.q0.size() != sys.dim())
    throw ConfigError("initial.q0 needs " + std::to_string(sys.dim()) + " entries");
  if (in.v0_d.size() != sp.d_rank())
    throw ConfigError("initial.v0_d needs " + std::to_string(sp.d_rank()) + " entries");
  if (in.lam0.size() != sp.dprime_rank())
    throw ConfigError("initial.lam0 needs " + std::to_string(sp.dprime_rank()) + " entries");
  return in;
}

int family_size(const SystemSpec& sys, const RunConfig& cfg) {
  const int r = sys.splitting.dprime_rank();
  const int n = cfg.family_size == 0 ? r + 6 : cfg.family_size;
  if (n < r + 1)
    throw ConfigError("family_size must be at least dim(d') + 1 = " + std::to_string(r + 1));
  return n;
}

struct Evaluation {
  ComparisonReport report;
  int family = 0;
};

Evaluation evaluate(const SystemSpec& sys, const RunConfig& cfg, Criterion c, int threads) {
  const Initial in = initial_data(sys, cfg);
  const double tol = cfg.tolerances.for_criterion(c);
  if (c == Criterion::VAK_IS_NH) {
    const VakonomicSolution vak =
        integrate_vakonomic(sys, in.q0, in.v0_d, in.lam0, cfg.horizon, cfg.step);
    return {check_vak_is_nh(sys, vak.traj, vak.lam, tol, cfg.tolerances.vak_residual), 0};
  }
  const Trajectory traj = integrate_nonholonomic(sys, in.q0, in.v0_d, cfg.horizon, cfg.step);
  switch (c) {
    case Criterion::NH_IS_UNCONSTRAINED: return {check_unconstrained(sys, traj, tol, threads), 0};
    case Criterion::NH_IS_VAK_INTEGRAL: {
      const int n = family_size(sys, cfg);
      return {check_nh_is_vak_integral(sys, traj, n, cfg.seed, tol, threads), n};
    }
    default: return {check_nh_is_vak_multiplier(sys, traj, 0, tol).first, 0};
  }
}

std::ofstream open_output(const std::string& dir, const std::string& name) {
  std::filesystem::create_directories(dir);
  const std::filesystem::path path = std::filesystem::path(dir) / name;
  std::ofstream os(path);
  if (!os) throw ConfigError("cannot write " + path.string());
  os.imbue(std::locale::classic());
  return os;
}

struct Overrides {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> criteria;
  std::vector<std::string> tols;
  bool criteria_given = false;
};

RunConfig configure(const Overrides& o) {
  RunConfig cfg = load_config(o.config);
  if (!o.out.empty()) cfg.out_dir = o.out;
  if (o.seed) cfg.seed = *o.seed;
  if (o.criteria_given) {
    cfg.criteria.clear();
    for (const std::string& s : o.criteria)
      if (!s.empty()) cfg.criteria.push_back(criterion_of(s));
  }
  for (const std::string& t : o.tols) {
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw ConfigError("--tol expects NAME=VALUE, got '" + t + "'");
    double v = 0.0;
    try {
      std::size_t used = 0;
      v = std::stod(t.substr(eq + 1), &used);
      if (used != t.size() - eq - 1) throw std::invalid_argument(t);
    } catch (const std::exception&) {
      throw ConfigError("--tol value is not a number: '" + t + "'");
    }
    cfg.tolerances.set(t.substr(0, eq), v);
  }
  return cfg;
}

int cmd_simulate(const RunConfig& cfg, std::ostream& out) {
  const SystemSpec sys = build_configured_system(cfg);
  const Initial in = initial_data(sys, cfg);
  const Trajectory traj = integrate_nonholonomic(sys, in.q0, in.v0_d, cfg.horizon, cfg.step);
  std::optional<MultiplierPath> lam;
  if (cfg.write_multiplier) lam = solve_multiplier(sys, traj, in.lam0);
  {
    std::ofstream os = open_output(cfg.out_dir, "trajectory.csv");
    write_trajectory_csv(os, traj, lam ? &*lam : nullptr);
  }
  if (lam) {
    std::ofstream os = open_output(cfg.out_dir, "multiplier.csv");
    write_multiplier_csv(os, *lam);
  }
  out << "system   " << sys.name << '\n'
      << "samples  " << traj.size() << '\n'
      << "step     " << format_double(traj.step) << '\n'
      << "t_end    " << format_double(traj.t.back()) << '\n';
  if (sys.lagrangian.time_independent) {
    const std::vector<double> e = energy(sys, traj);
    const auto [lo, hi] = std::minmax_element(e.begin(), e.end());
    out << "energy   " << format_double(e.front()) << " (drift " << format_double(*hi - *lo)
        << ")\n";
  }
  return 0;
}

void print_reports(std::ostream& out, const std::vector<ComparisonReport>& reps) {
  out << std::left << std::setw(22) << "criterion" << std::setw(9) << "verdict" << std::setw(26)
      << "residual" << "tolerance\n";
  for (const ComparisonReport& r : reps)
    out << std::setw(22) << to_string(r.criterion) << std::setw(9)
        << (r.verdict ? "true" : "false") << std::setw(26) << format_double(r.residual)
        << format_double(r.tolerance) << '\n';
}

int cmd_check(const RunConfig& cfg, std::ostream& out) {
  if (cfg.criteria.empty()) throw ConfigError("no criteria to check");
  const SystemSpec sys = build_configured_system(cfg);
  Json arr = Json::array();
  std::vector<ComparisonReport> reps;
  bool all = true;
  for (Criterion c : cfg.criteria) {
    const Evaluation ev = evaluate(sys, cfg, c, cfg.threads);
    arr.push_back(report_to_json(ev.report, sys.name, sys.params, cfg.seed, ev.family));
    reps.push_back(ev.report);
    all = all && ev.report.verdict;
  }
  {
    std::ofstream os = open_output(cfg.out_dir, "report.json");
    os << arr.dump(2) << '\n';
  }
  print_reports(out, reps);
  return all ? 0 : 1;
}

std::vector<double> parse_values(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t") + 1);
    if (item.empty()) continue;
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError("--values entry is not a number: '" + item + "'");
    }
  }
  return out;
}

int cmd_sweep(const RunConfig& cfg, const std::string& param, const std::vector<double>& values,
              std::ostream& out) {
  if (param.empty()) throw ConfigError("sweep needs --param");
  if (!param_names(cfg.system).count(param))
    throw ConfigError("system '" + cfg.system + "' has no parameter '" + param + "'");
  if (cfg.criteria.size() > 1) throw ConfigError("sweep takes a single criterion");
  const Criterion crit = cfg.criteria.empty() ? Criterion::NH_IS_VAK_INTEGRAL : cfg.criteria[0];

  std::vector<SweepRow> rows(values.size());
  std::vector<std::exception_ptr> errors(values.size());
  auto run_row = [&](std::size_t i) {
    try {
      RunConfig c = cfg;
      c.params[param] = values[i];
      const SystemSpec sys = build_configured_system(c);
      const Evaluation ev = evaluate(sys, c, crit, 1);
      double xy = std::numeric_limits<double>::quiet_NaN();
      if (sys.name == "carriage") {
        CarriageParams p;
        p.m0 = sys.params.at("m0");
        p.m1 = sys.params.at("m1");
        p.l = sys.params.at("l");
        p.J = sys.params.at("J");
        p.I = sys.params.at("I");
        p.w = sys.params.at("w");
        p.R = sys.params.at("R");
        xy = p.XY();
      }
      rows[i] = {values[i], xy, ev.report.residual, ev.report.verdict};
    } catch (...) {
      errors[i] = std::current_exception();
    }
  };
  const std::size_t width = std::max<std::size_t>(1, std::min<std::size_t>(cfg.threads, values.size()));
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < width; ++w)
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < values.size(); i += width) run_row(i);
    });
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);

  {
    std::ofstream os = open_output(cfg.out_dir, "sweep.csv");
    write_sweep_csv(os, rows);
  }
  out << std::left << std::setw(26) << param << std::setw(26) << "XY" << std::setw(26)
      << "residual" << "verdict\n";
  for (const SweepRow& r : rows)
    out << std::setw(26) << format_double(r.value) << std::setw(26) << format_double(r.xy)
        << std::setw(26) << format_double(r.residual) << (r.verdict ? "true" : "false") << '\n';
  return 0;
}

int cmd_report(const std::string& path, std::ostream& out) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot read " + path);
  Json j;
  try {
    j = Json::parse(is);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("invalid JSON in ") + path + ": " + e.what());
  }
  const Json arr = j.is_array() ? j : Json::array({j});
  out << std::left << std::setw(22) << "criterion" << std::setw(16) << "system" << std::setw(9)
      << "verdict" << std::setw(26) << "residual" << "tolerance\n";
  for (const Json& r : arr) {
    if (!r.is_object() || !r.contains("criterion") || !r.contains("verdict"))
      throw ConfigError("not a comparison report: " + path);
    auto num = [&](const char* k) {
      return r.contains(k) && r[k].is_number() ? format_double(r[k].get<double>()) : "-";
    };
    out << std::setw(22) << r["criterion"].get<std::string>() << std::setw(16)
        << (r.contains("system") ? r["system"].get<std::string>() : "-") << std::setw(9)
        << (r["verdict"].get<bool>() ? "true" : "false") << std::setw(26) << num("residual")
        << num("tolerance") << '\n';
  }
  return 0;
}

}  // namespace

RunConfig parse_config(const Json& j) {
  check_keys(j,
             {"version", "system", "params", "initial", "horizon", "step", "seed", "family_size",
              "tolerances", "criteria", "output", "threads", "splitting"},
             "config");
  RunConfig cfg;
  if (!j.contains("version") || !j["version"].is_number_integer() || j["version"].get<int>() != 1)
    throw ConfigError("config version must be 1");
  if (!j.contains("system") || !j["system"].is_string()) throw ConfigError("config needs a system");
  cfg.system = j["system"].get<std::string>();
  const auto& names = system_names();
  if (std::find(names.begin(), names.end(), cfg.system) == names.end())
    throw ConfigError("unknown system '" + cfg.system + "'");

  if (j.contains("params")) {
    check_keys(j["params"], param_names(cfg.system), "params");
    for (const auto& [k, v] : j["params"].items()) cfg.params[k] = number(v, "params." + k);
  }
  if (j.contains("initial")) {
    const Json& in = j["initial"];
    check_keys(in, {"q0", "v0_d", "lam0"}, "initial");
    if (in.contains("q0")) cfg.q0 = vector_of(in["q0"], "initial.q0");
    if (in.contains("v0_d")) cfg.v0_d = vector_of(in["v0_d"], "initial.v0_d");
    if (in.contains("lam0")) cfg.lam0 = vector_of(in["lam0"], "initial.lam0");
  }
  if (j.contains("horizon")) cfg.horizon = number(j["horizon"], "horizon");
  if (j.contains("step")) cfg.step = number(j["step"], "step");
  if (!(cfg.horizon >= 0.0)) throw ConfigError("horizon must be >= 0");
  if (!(cfg.step > 0.0)) throw ConfigError("step must be > 0");
  if (j.contains("seed")) {
    if (!j["seed"].is_number_integer() || j["seed"].get<long long>() < 0)
      throw ConfigError("seed must be a non-negative integer");
    cfg.seed = j["seed"].get<std::uint64_t>();
  }
  if (j.contains("family_size")) {
    if (!j["family_size"].is_number_integer() || j["family_size"].get<long long>() < 1)
      throw ConfigError("family_size must be a positive integer");
    cfg.family_size = j["family_size"].get<int>();
  }
  if (j.contains("tolerances")) {
    if (!j["tolerances"].is_object()) throw ConfigError("tolerances must be an object");
    for (const auto& [k, v] : j["tolerances"].items()) cfg.tolerances.set(k, number(v, k));
  }
  if (j.contains("criteria")) {
    if (!j["criteria"].is_array()) throw ConfigError("criteria must be an array of names");
    for (const Json& c : j["criteria"]) {
      if (!c.is_string()) throw ConfigError("criteria must be an array of names");
      cfg.criteria.push_back(criterion_of(c.get<std::string>()));
    }
  }
  if (j.contains("output")) {
    const Json& o = j["output"];
    check_keys(o, {"dir", "multiplier"}, "output");
    if (o.contains("dir")) {
      if (!o["dir"].is_string()) throw ConfigError("output.dir must be a string");
      cfg.out_dir = o["dir"].get<std::string>();
    }
    if (o.contains("multiplier")) {
      if (!o["multiplier"].is_boolean()) throw ConfigError("output.multiplier must be a boolean");
      cfg.write_multiplier = o["multiplier"].get<bool>();
    }
  }
  if (j.contains("threads")) {
    if (!j["threads"].is_number_integer() || j["threads"].get<long long>() < 1 ||
        j["threads"].get<long long>() > 256)
      throw ConfigError("threads must be an integer in [1, 256]");
    cfg.threads = j["threads"].get<int>();
  }
  if (j.contains("splitting")) {
    const Json& s = j["splitting"];
    check_keys(s, {"d", "dprime"}, "splitting");
    if (!s.contains("d") || !s.contains("dprime"))
      throw ConfigError("splitting needs both d and dprime");
    cfg.d_basis = basis_of(s["d"], "splitting.d");
    cfg.dprime_basis = basis_of(s["dprime"], "splitting.dprime");
  }
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot read config " + path);
  Json j;
  try {
    j = Json::parse(is);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("invalid JSON in ") + path + ": " + e.what());
  }
  return parse_config(j);
}

SystemSpec build_configured_system(const RunConfig& cfg) {
  SystemSpec sys = build_system(cfg.system, cfg.params);
  if (cfg.d_basis) {
    MatrixXd D = *cfg.d_basis;
    MatrixXd Dp = *cfg.dprime_basis;
    if (D.size() == 0) D.resize(sys.dim(), 0);
    if (Dp.size() == 0) Dp.resize(sys.dim(), 0);
    if (D.rows() != sys.dim() || Dp.rows() != sys.dim())
      throw ConfigError("splitting vectors need " + std::to_string(sys.dim()) + " entries");
    sys.splitting = Splitting(D, Dp);
  }
  return sys;
}

int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Nonholonomic and vakonomic dynamics on Lie groups", "nhvak"};
  app.require_subcommand(1);

  Overrides ov;
  std::string param, values, report_path;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", ov.config, "run configuration (JSON)")->required();
    sub->add_option("--out", ov.out, "output directory");
    sub->add_option("--seed", ov.seed, "generator seed");
    sub->add_option("--tol", ov.tols, "tolerance override NAME=VALUE");
  };
  CLI::App* sim = app.add_subcommand("simulate", "integrate a nonholonomic trajectory");
  add_common(sim);
  CLI::App* chk = app.add_subcommand("check", "evaluate comparison criteria");
  add_common(chk);
  CLI::Option* crit_opt =
      chk->add_option("--criteria", ov.criteria, "comma-separated criteria")->delimiter(',');
  CLI::App* swp = app.add_subcommand("sweep", "sweep one parameter");
  add_common(swp);
  CLI::Option* crit_opt2 =
      swp->add_option("--criteria", ov.criteria, "criterion for the sweep")->delimiter(',');
  swp->add_option("--param", param, "parameter name")->required();
  swp->add_option("--values", values, "comma-separated values")->required();
  CLI::App* rep = app.add_subcommand("report", "print a JSON report");
  rep->add_option("path", report_path, "report.json")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return 2;
  }
  ov.criteria_given = crit_opt->count() > 0 || crit_opt2->count() > 0;

  try {
    if (*rep) return cmd_report(report_path, out);
    const RunConfig cfg = configure(ov);
    if (*sim) return cmd_simulate(cfg, out);
    if (*chk) return cmd_check(cfg, out);
    return cmd_sweep(cfg, param, parse_values(values), out);
  } catch (const ConfigError& e) {
    err << "nhvak: config error: " << e.what() << '\n';
    return 2;
  } catch (const NotVakonomicError& e) {
    err << "nhvak: " << e.what() << '\n';
    return 1;
  } catch (const ContractError& e) {
    err << "nhvak: invalid input: " << e.what() << '\n';
    return 2;
  } catch (const RegularityError& e) {
    err << "nhvak: regularity error: " << e.what() << '\n';
    return 1;
  } catch (const DivergenceError& e) {
    err << "nhvak: divergence error at t = " << e.time() << ": " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "nhvak: numerical failure: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace nhvak
