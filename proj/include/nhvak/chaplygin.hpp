#pragma once

#include <cstdint>
#include <functional>

#include "nhvak/dynamics.hpp"

namespace nhvak {

/// Chaplygin structure of a system on a group chart: d plays the
/// horizontal distribution, d' the vertical one. R and B take and return
/// full algebra vectors.
struct ChaplyginData {
  using Tensor = std::function<VectorXd(const VectorXd&, const VectorXd&, const VectorXd&)>;

  SystemSpec sys;
  /// (q, X, Y) -> P'[X, Y] for X, Y in d.
  Tensor R;
  /// (q, X, b) -> P'[X, b] for X in d, b in d'.
  Tensor B;
};

/// R and B from the algebra structure constants.
ChaplyginData make_chaplygin(const SystemSpec& sys);

/// R and B from the frame bracket coefficients gamma(q) (analytic when
/// the frame supplies them, finite differences otherwise).
ChaplyginData make_chaplygin_frame(const SystemSpec& sys);

VectorXd curvature(const ChaplyginData& cd, const VectorXd& q, const VectorXd& X,
                   const VectorXd& Y);
VectorXd b_tensor(const ChaplyginData& cd, const VectorXd& q, const VectorXd& X,
                  const VectorXd& b);

/// Horizontal derivative of L at (q, X), as pairings with the d' basis:
/// <A^T dL/dq, b> + <dL/dv, P[X, b]>.
VectorXd bl_derivative(const ChaplyginData& cd, const VectorXd& q, const VectorXd& X);

/// Vertical derivative of L at (q, X), as pairings with the d' basis.
VectorXd fl_derivative(const ChaplyginData& cd, const VectorXd& q, const VectorXd& X);

/// bdot = -B(X, b) - R(X, Y).
VectorXd vak_variation_ode_rhs(const ChaplyginData& cd, const VectorXd& q, const VectorXd& X,
                               const VectorXd& Y, const VectorXd& b);

/// Max-abs discrepancy over `trials` random (X, Y, b) at q between the
/// chart-side quantities (frame gamma for R and B, finite differences of L
/// along the frame for BL and FL) and their algebra realizations. Requires
/// d' to be a subalgebra.
double chaplygin_cross_check(const ChaplyginData& cd, const VectorXd& q, int trials,
                             std::uint64_t seed = 1);

}  // namespace nhvak
