#pragma once

#include <cstdint>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "nhvak/comparison.hpp"
#include "nhvak/dynamics.hpp"

namespace nhvak {

/// Shortest round-trip form with at most 17 significant digits, '.' as
/// decimal separator regardless of locale.
std::string format_double(double x);

/// Header t, q0.., v0.. and, when lam is given, lam0.. in d'-dual
/// coordinates.
void write_trajectory_csv(std::ostream& os, const Trajectory& traj,
                          const MultiplierPath* lam = nullptr);

void write_multiplier_csv(std::ostream& os, const MultiplierPath& lam);

struct SweepRow {
  double value = 0.0;
  double xy = 0.0;
  double residual = 0.0;
  bool verdict = false;
};

void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows);

/// Keys in order: criterion, residual, tolerance, verdict, samples,
/// system, params, seed, then family_size when positive.
nlohmann::ordered_json report_to_json(const ComparisonReport& rep, const std::string& system,
                                      const std::map<std::string, double>& params,
                                      std::uint64_t seed, int family_size = 0);

}  // namespace nhvak
