#pragma once

// Independent reference computations used only by the tests.

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "nhvak/dynamics.hpp"
#include "nhvak/systems.hpp"

namespace oracle {

using Eigen::MatrixXd;
using Eigen::VectorXd;

inline constexpr double kPi = 3.14159265358979323846;

/// Generator w(t) and its time derivative.
struct Generator {
  std::function<VectorXd(double)> w;
  std::function<VectorXd(double)> wdot;
};

/// sin^2(k pi s) u on [t0, t1].
inline Generator bump(double t0, double t1, int k, const VectorXd& u) {
  const double len = t1 - t0;
  return {[=](double t) {
            const double s = std::sin(k * kPi * (t - t0) / len);
            return VectorXd(s * s * u);
          },
          [=](double t) {
            return VectorXd(k * kPi / len * std::sin(2.0 * k * kPi * (t - t0) / len) * u);
          }};
}

inline double simpson_even(const std::vector<double>& f, double h) {
  double s = f.front() + f.back();
  for (std::size_t i = 1; i + 1 < f.size(); ++i) s += (i % 2 ? 4.0 : 2.0) * f[i];
  return s * h / 3.0;
}

/// d/ds of the action of the curve q_s(t) = q(t) + s A(q(t)) w(t), whose
/// quasi-velocities are recomputed from its coordinate velocity. Requires
/// an even number of intervals.
inline double action_derivative(const nhvak::SystemSpec& sys, const nhvak::Trajectory& traj,
                                const Generator& g, double eps = 1e-4) {
  const std::size_t n = traj.size();
  auto action = [&](double s) {
    std::vector<double> f(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double t = traj.t[i];
      const VectorXd& q = traj.q[i];
      const MatrixXd A = sys.frame.A(q);
      const VectorXd qdot = A * traj.v[i];
      const double d = 1e-6 / (1.0 + qdot.norm());
      const MatrixXd dA = (sys.frame.A(q + d * qdot) - sys.frame.A(q - d * qdot)) / (2.0 * d);
      const VectorXd w = g.w(t);
      const VectorXd qs = q + s * A * w;
      const VectorXd qdots = qdot + s * (dA * w + A * g.wdot(t));
      const VectorXd vs = sys.frame.A(qs).lu().solve(qdots);
      f[i] = sys.lagrangian.eval(qs, vs);
    }
    return simpson_even(f, traj.t[1] - traj.t[0]);
  };
  return (action(eps) - action(-eps)) / (2.0 * eps);
}

/// Coordinates of the vector-field bracket [A e_b, A e_c] in the frame,
/// from forward/backward differences of A along each field.
inline VectorXd field_bracket(const nhvak::FrameField& frame, const VectorXd& q, int b, int c) {
  const MatrixXd A = frame.A(q);
  auto along = [&](const VectorXd& dir, int col) {
    const double h = 1e-5;
    return VectorXd((frame.A(q + h * dir).col(col) - frame.A(q - h * dir).col(col)) / (2.0 * h));
  };
  const VectorXd xb = A.col(b);
  const VectorXd xc = A.col(c);
  return A.lu().solve(along(xb, c) - along(xc, b));
}

/// Jacobi identity residual over all basis triples, written out by hand.
inline double jacobi(const nhvak::LieAlgebra& alg) {
  const int n = alg.dim();
  double worst = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int a = 0; a < n; ++a) {
          double s = 0.0;
          for (int m = 0; m < n; ++m)
            s += alg(m, j, k) * alg(a, i, m) + alg(m, k, i) * alg(a, j, m) +
                 alg(m, i, j) * alg(a, k, m);
          worst = std::max(worst, std::abs(s));
        }
  return worst;
}

/// Reduced carriage equations: (alphadot, phiddot).
inline std::pair<double, double> carriage_rates(const nhvak::CarriageParams& p, double alpha,
                                                double phidot) {
  return {p.X() * phidot * phidot, -p.Y() * alpha * phidot};
}

/// Unicycle multipliers with alpha, phidot constant: f - m alpha and g
/// rotate with angular rate phidot.
inline std::pair<double, double> unicycle_multiplier(double m, double alpha, double phidot,
                                                     double f0, double g0, double t) {
  const double c = std::cos(phidot * t);
  const double s = std::sin(phidot * t);
  const double u = f0 - m * alpha;
  return {m * alpha + u * c + g0 * s, g0 * c - u * s};
}

inline VectorXd random_vector(std::mt19937_64& rng, int n, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  VectorXd x(n);
  for (int i = 0; i < n; ++i) x(i) = u(rng);
  return x;
}

}  // namespace oracle
