#pragma once

// Anholonomic frames on a coordinate chart: columns of A(q) are the frame
// vectors e_b expressed in coordinate vector fields, so that qdot = A(q) v
// for quasi-velocities v. The bracket coefficients gamma satisfy
// [e_b, e_c] = sum_a gamma[a](b, c) e_a.

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace nhvak {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Rank-3 array stored as one matrix per leading index: t[a](b, c).
using Rank3 = std::vector<MatrixXd>;

struct FrameField {
  int dim = 0;
  std::function<MatrixXd(const VectorXd&)> A;
  /// Analytic bracket coefficients; when empty only the finite-difference
  /// path is available.
  std::function<Rank3(const VectorXd&)> gamma;
  std::string chart_hint;
};

struct StatePoint {
  VectorXd q;
  VectorXd v;
};

/// Central-difference step used throughout the library.
inline double fd_step(double x) { return 1e-6 * (1.0 + std::abs(x)); }

/// A(q) after shape and conditioning checks (condition number <= 1e12).
MatrixXd transition_matrix(const FrameField& frame, const VectorXd& q);

/// qdot = A(q) v.
VectorXd push_velocity(const FrameField& frame, const StatePoint& s);

/// gamma(q) from A^s_a gamma^a_bc = A^d_b d_d A^s_c - A^d_c d_d A^s_b with
/// central differences of A.
Rank3 bracket_coefficients_fd(const FrameField& frame, const VectorXd& q);

/// The analytic gamma when supplied, otherwise the finite-difference one.
Rank3 bracket_coefficients(const FrameField& frame, const VectorXd& q);

/// Max-abs difference between the analytic gamma and the finite-difference
/// one at q. Requires frame.gamma.
double frame_consistency_residual(const FrameField& frame, const VectorXd& q);

/// Coordinate form of the variation generated by w along the curve through
/// s: delta_q = A(q) w, delta_v^d = wdot^d + gamma^d_ab(q) v^a w^b.
std::pair<VectorXd, VectorXd> variation_lift(const FrameField& frame, const StatePoint& s,
                                             const VectorXd& w, const VectorXd& wdot);

/// Contracts t[a](b, c) x^b y^c.
VectorXd contract(const Rank3& t, const VectorXd& x, const VectorXd& y);

FrameField identity_frame(int dim);

}  // namespace nhvak
