#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "nhvak/dynamics.hpp"

namespace nhvak {

enum class Criterion { NH_IS_UNCONSTRAINED, NH_IS_VAK_INTEGRAL, NH_IS_VAK_MULTIPLIER, VAK_IS_NH };

std::string to_string(Criterion c);
std::optional<Criterion> parse_criterion(const std::string& name);

struct ComparisonReport {
  Criterion criterion = Criterion::NH_IS_UNCONSTRAINED;
  double residual = 0.0;
  double tolerance = 0.0;
  bool verdict = false;
  long samples = 0;
  /// Per-sample residuals (per generator pair for the integral criterion).
  std::vector<double> details;
};

/// A generator xi = a + b along a trajectory; a(t) in d and b(t) in d' are
/// stored as full algebra vectors at the trajectory samples.
struct GeneratorPair {
  std::vector<double> t;
  std::vector<VectorXd> a;
  std::vector<VectorXd> b;
};

inline constexpr std::uint64_t kDefaultSeed = 42;

/// Max over samples and d' basis vectors of |psi(b)| with vdot from the
/// nonholonomic equations.
ComparisonReport check_unconstrained(const SystemSpec& sys, const Trajectory& traj,
                                     double tol = 1e-6, int threads = 1);

/// Raw pairs a_j = sin^2((j+1) pi s) u_j with random unit d-directions u_j,
/// b_j from bdot = -P'[eta, a] - P'[eta, b], b(t0) = 0, then recombined
/// over the null space of the end-point map so that b(t1) = 0.
std::vector<GeneratorPair> generate_vak_pairs(const SystemSpec& sys, const Trajectory& traj,
                                              int n, std::uint64_t seed = kDefaultSeed,
                                              int threads = 1);

/// |integral of <A^T dL/dq, b> + <p, P[eta, b]> - <p, P'[eta, a]>| divided
/// by 1 + sup |a + b|.
double integral_residual(const SystemSpec& sys, const Trajectory& traj, const GeneratorPair& pair);

ComparisonReport check_nh_is_vak_integral(const SystemSpec& sys, const Trajectory& traj,
                                          const std::vector<GeneratorPair>& pairs,
                                          double tol = 1e-5, int threads = 1);

/// Generates a family of n raw pairs (0 selects dim(d') + 6) and checks it.
ComparisonReport check_nh_is_vak_integral(const SystemSpec& sys, const Trajectory& traj, int n = 0,
                                          std::uint64_t seed = kDefaultSeed, double tol = 1e-5,
                                          int threads = 1);

/// Least squares over all multiplier paths lambda_p + Phi c of
/// sum <lambda(t), P'[eta(t), a]>^2; the residual is the RMS of the
/// minimized terms. m_samples = 0 uses every sample.
std::pair<ComparisonReport, MultiplierPath> check_nh_is_vak_multiplier(const SystemSpec& sys,
                                                                       const Trajectory& traj,
                                                                       int m_samples = 0,
                                                                       double tol = 1e-5);

/// Max over samples and d basis vectors of |<lambda, P'[eta, a]>| for a
/// certified vakonomic pair. Throws NotVakonomicError when the vakonomic
/// residual (derivatives by finite differences of the samples) exceeds
/// vak_tol.
ComparisonReport check_vak_is_nh(const SystemSpec& sys, const Trajectory& traj,
                                 const MultiplierPath& lam, double tol = 1e-6,
                                 double vak_tol = 1e-6);

/// Max-abs vakonomic residual of (traj, lam) with finite-difference rates.
double vakonomic_defect(const SystemSpec& sys, const Trajectory& traj, const MultiplierPath& lam);

struct SplittingComparison {
  double max_difference = 0.0;
  bool verdicts_identical = true;
  int trials = 0;
};

/// Re-evaluates the integral criterion on the same generators xi under
/// `trials` random complements d'' = (1 + deltaP) d'.
SplittingComparison splitting_independence(const SystemSpec& sys, const Trajectory& traj,
                                           int trials, std::uint64_t seed = kDefaultSeed,
                                           int n = 0, double tol = 1e-5, int threads = 1);

/// Max d'-component of the velocity variation lifted from n bump
/// generators in d. Requires P'[d, d] = 0.
double holonomic_variation_check(const SystemSpec& sys, const Trajectory& traj, int n,
                                 std::uint64_t seed = kDefaultSeed);

/// Same measurement without the integrability precondition.
double holonomic_variation_residual(const SystemSpec& sys, const Trajectory& traj, int n,
                                    std::uint64_t seed = kDefaultSeed);

/// Composite Simpson on a uniform grid; an odd interval count closes with
/// the 3/8 rule. Needs at least 5 samples.
double simpson(const std::vector<double>& f, double h);

}  // namespace nhvak
