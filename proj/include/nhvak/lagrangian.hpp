#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>

#include "nhvak/frame.hpp"

namespace nhvak {

/// L(q, v) with v the quasi-velocities in the frame basis. Every partial is
/// optional; missing ones fall back to central differences.
struct LagrangianSpec {
  using Scalar = std::function<double(const VectorXd&, const VectorXd&)>;
  using Gradient = std::function<VectorXd(const VectorXd&, const VectorXd&)>;
  using Hessian = std::function<MatrixXd(const VectorXd&, const VectorXd&)>;

  Scalar eval;
  Gradient d_dq;
  Gradient d_dv;
  /// d2L / dv dv.
  Hessian d2_dvdv;
  /// Entry (i, j) is d2L / dv_i dq_j.
  Hessian d2_dvdq;
  bool time_independent = true;

  bool has_analytic_partials() const { return d_dq && d_dv; }
};

/// dL/dv, a covector in the frame dual basis.
VectorXd d_dv(const LagrangianSpec& L, const VectorXd& q, const VectorXd& v);
/// dL/dq, a covector in the chart coordinate dual basis.
VectorXd d_dq(const LagrangianSpec& L, const VectorXd& q, const VectorXd& v);
MatrixXd d2_dvdv(const LagrangianSpec& L, const VectorXd& q, const VectorXd& v);
MatrixXd d2_dvdq(const LagrangianSpec& L, const VectorXd& q, const VectorXd& v);

/// Derivative of L(., v) along the frame field of b at q: dL/dq . A(q) b.
double pullback_dh(const LagrangianSpec& L, const FrameField& frame, const VectorXd& q,
                   const VectorXd& v, const VectorXd& b);

/// The covector A(q)^T dL/dq, i.e. b -> pullback_dh(L, frame, q, v, b).
VectorXd pullback_covector(const LagrangianSpec& L, const FrameField& frame, const VectorXd& q,
                           const VectorXd& v);

/// Max relative deviation, |analytic - fd| / max(1, |analytic|), between
/// the supplied partials (first and, when present, second order) and
/// central differences at (q, v).
double fd_gradient_check(const LagrangianSpec& L, const VectorXd& q, const VectorXd& v);

/// Spot-checks the analytic partials at `points` random states drawn from
/// [-1, 1]^dim; throws ContractError above 1e-6.
void validate_partials(const LagrangianSpec& L, int dim, std::uint64_t seed = 7, int points = 5);

/// Sum of Lagrangians, partials combined where both sides provide them.
LagrangianSpec operator+(const LagrangianSpec& a, const LagrangianSpec& b);
LagrangianSpec operator*(double s, const LagrangianSpec& a);

}  // namespace nhvak
