#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "nhvak/comparison.hpp"
#include "nhvak/dynamics.hpp"

namespace nhvak {

/// Malformed or inconsistent run configuration (exit code 2).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Tolerances {
  double unconstrained = 1e-6;
  double integral = 1e-5;
  double multiplier = 1e-5;
  double vak_is_nh = 1e-6;
  /// Certification threshold on the vakonomic residual for VAK_IS_NH.
  double vak_residual = 1e-6;

  double for_criterion(Criterion c) const;
  /// Names: the criterion names and VAK_RESIDUAL.
  void set(const std::string& name, double value);
};

struct RunConfig {
  int version = 1;
  std::string system;
  std::map<std::string, double> params;
  std::optional<VectorXd> q0;
  std::optional<VectorXd> v0_d;
  std::optional<VectorXd> lam0;
  double horizon = 10.0;
  double step = 1e-3;
  std::uint64_t seed = kDefaultSeed;
  /// 0 selects dim(d') + 6.
  int family_size = 0;
  Tolerances tolerances;
  std::vector<Criterion> criteria;
  std::string out_dir = ".";
  bool write_multiplier = false;
  int threads = 1;
  /// Optional replacement bases for d and d', one basis vector per row.
  std::optional<MatrixXd> d_basis;
  std::optional<MatrixXd> dprime_basis;
};

/// Strict parse: unknown keys, wrong types and out-of-range values throw
/// ConfigError.
RunConfig parse_config(const nlohmann::ordered_json& j);
RunConfig load_config(const std::string& path);

/// The configured system with params and splitting overrides applied.
SystemSpec build_configured_system(const RunConfig& cfg);

/// Runs the nhvak command line; returns the process exit code.
int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace nhvak
