#pragma once

#include <Eigen/Dense>

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "nhvak/frame.hpp"
#include "nhvak/lagrangian.hpp"
#include "nhvak/lie.hpp"

namespace nhvak {

/// A left-invariant constrained system on a group chart: algebra h, the
/// constraint subspace d with a complement d', the frame of the chart and
/// the Lagrangian in quasi-velocities.
struct SystemSpec {
  LieAlgebra algebra;
  Splitting splitting;
  FrameField frame;
  LagrangianSpec lagrangian;
  std::string name;
  std::map<std::string, double> params;

  int dim() const { return algebra.dim(); }
};

/// Throws ContractError unless algebra, splitting and frame dimensions agree.
void validate(const SystemSpec& sys);

/// Samples (t_i, q_i, v_i) on a uniform grid; v_i are full quasi-velocity
/// vectors in the algebra basis.
struct Trajectory {
  std::vector<double> t;
  std::vector<VectorXd> q;
  std::vector<VectorXd> v;
  double step = 0.0;

  std::size_t size() const { return t.size(); }
};

/// lambda(t) in Ann(d), stored by its pairings with the d' basis vectors.
struct MultiplierPath {
  std::vector<double> t;
  std::vector<VectorXd> lam;

  std::size_t size() const { return t.size(); }
  /// The full covector in the algebra dual basis at sample i.
  VectorXd covector(const Splitting& split, std::size_t i) const { return split.annihilator(lam[i]); }
};

/// psi_d = A^e_d dL/dq^e + gamma^e_fd v^f dL/dv^e - d/dt(dL/dv^d), with the
/// time derivative expanded through qdot = A(q) v and the given vdot.
VectorXd el_covector(const SystemSpec& sys, const VectorXd& q, const VectorXd& v,
                     const VectorXd& vdot);

/// Reduced mass matrix D^T (d2L/dv2) D on the constraint subspace.
MatrixXd reduced_mass_matrix(const SystemSpec& sys, const VectorXd& q, const VectorXd& v);

/// Acceleration in d-coordinates for which el_covector annihilates d.
/// Throws RegularityError if the reduced mass matrix is singular
/// (condition number above 1e12).
VectorXd nh_accel(const SystemSpec& sys, const VectorXd& q, const VectorXd& v_d);

/// Fixed-step classical RK4 on qdot = A(q) D v_d, vdot_d = nh_accel. The
/// step is shrunk to T / ceil(T / h) so the grid ends exactly at T.
Trajectory integrate_nonholonomic(const SystemSpec& sys, const VectorXd& q0, const VectorXd& v0_d,
                                  double T, double h = 1e-3);

/// Right-hand side of an auxiliary ODE carried along a nonholonomic
/// trajectory: (t, q, v, vdot, y) -> ydot.
using AlongRhs = std::function<VectorXd(double, const VectorXd&, const VectorXd&, const VectorXd&,
                                        const VectorXd&)>;

/// Integrates ydot = rhs(...) along a stored nonholonomic trajectory with
/// RK4. Each step restarts the trajectory part from the stored sample, so
/// stage values of (q, v, vdot) are exact RK4 stages of the same dynamics.
std::vector<VectorXd> integrate_along(const SystemSpec& sys, const Trajectory& traj,
                                      const VectorXd& y0, const AlongRhs& rhs);

/// Multiplier ODE along a nonholonomic trajectory:
///   <psi + dlambda/dt - ad*_v lambda, b> = 0   for b in d',
/// integrated from lam0 (d'-dual coordinates). Needs at least 5 samples.
MultiplierPath solve_multiplier(const SystemSpec& sys, const Trajectory& traj, const VectorXd& lam0);

/// E-L covector of the modified Lagrangian L - <lambda, P'(v)>; lam and
/// lamdot are full covectors that must annihilate d.
VectorXd vak_residual(const SystemSpec& sys, const VectorXd& q, const VectorXd& v,
                      const VectorXd& vdot, const VectorXd& lam, const VectorXd& lamdot);

/// E = <dL/dv, v> - L at every sample.
std::vector<double> energy(const SystemSpec& sys, const Trajectory& traj);

struct VakonomicSolution {
  Trajectory traj;
  MultiplierPath lam;
};

/// Constrained curve together with its multiplier solving the vakonomic
/// equations of the modified Lagrangian (regular case), by RK4 on
/// (q, v_d, lambda).
VakonomicSolution integrate_vakonomic(const SystemSpec& sys, const VectorXd& q0,
                                      const VectorXd& v0_d, const VectorXd& lam0, double T,
                                      double h = 1e-3);

/// Fourth-order finite-difference time derivative of uniformly sampled
/// data (one-sided stencils at the ends). Needs at least 5 samples.
std::vector<VectorXd> sample_derivative(const std::vector<VectorXd>& x, double h);

/// Number of RK4 steps and effective step for horizon T and nominal h.
std::pair<long, double> step_grid(double T, double h);

}  // namespace nhvak
