#include "nhvak/dynamics.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "nhvak/errors.hpp"

namespace nhvak {

namespace {

std::string format_vec(const VectorXd& x) {
  std::ostringstream os;
  os << "[";
  for (Eigen::Index i = 0; i < x.size(); ++i) os << (i ? ", " : "") << x(i);
  os << "]";
  return os.str();
}

// Terms of psi that do not involve vdot.
VectorXd free_covector(const SystemSpec& sys, const VectorXd& q, const VectorXd& v) {
  const MatrixXd A = transition_matrix(sys.frame, q);
  const VectorXd p = d_dv(sys.lagrangian, q, v);
  const Rank3 g = bracket_coefficients(sys.frame, q);
  VectorXd out = A.transpose() * d_dq(sys.lagrangian, q, v);
  for (int e = 0; e < sys.dim(); ++e) out += p(e) * (g[e].transpose() * v);
  out -= d2_dvdq(sys.lagrangian, q, v) * (A * v);
  return out;
}

VectorXd solve_reduced(const SystemSpec& sys, const VectorXd& q, const VectorXd& v,
                       const VectorXd& force) {
  const MatrixXd& D = sys.splitting.d_basis();
  const MatrixXd M = D.transpose() * d2_dvdv(sys.lagrangian, q, v) * D;
  // Non-finite stages are reported as divergence by the caller.
  if (!M.allFinite() || !force.allFinite())
    return VectorXd::Constant(D.cols(), std::numeric_limits<double>::quiet_NaN());
  Eigen::JacobiSVD<MatrixXd> svd(M, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const VectorXd& s = svd.singularValues();
  const double cond = s(s.size() - 1) == 0.0 ? INFINITY : s(0) / s(s.size() - 1);
  if (!(cond <= 1e12)) {
    std::ostringstream os;
    os << "irregular Lagrangian for system '" << sys.name << "': reduced mass matrix has "
       << "condition number " << cond << " at q = " << format_vec(q) << ", v = " << format_vec(v);
    throw RegularityError(os.str());
  }
  return svd.solve(D.transpose() * force);
}

// Multiplier ODE in d'-dual coordinates.
VectorXd multiplier_rate(const SystemSpec& sys, const VectorXd& v, const VectorXd& psi,
                         const VectorXd& mu) {
  const Splitting& sp = sys.splitting;
  const int r = sp.dprime_rank();
  const VectorXd lam = sp.annihilator(mu);
  VectorXd out(r);
  for (int j = 0; j < r; ++j) {
    const VectorXd b = sp.dprime_basis().col(j);
    out(j) = lam.dot(bracket(sys.algebra, v, b)) - psi.dot(b);
  }
  return out;
}

void require_finite(const VectorXd& x, double t, const std::string& name) {
  if (!x.allFinite()) {
    std::ostringstream os;
    os << "integration of system '" << name << "' diverged at t = " << t;
    throw DivergenceError(os.str(), t);
  }
}

void check_horizon(double T, double h) {
  if (!(T >= 0.0) || !std::isfinite(T)) throw ContractError("horizon must be finite and >= 0");
  if (!(h > 0.0) || !std::isfinite(h)) throw ContractError("step must be finite and > 0");
}

void check_annihilates(const Splitting& sp, const VectorXd& lam, const char* what) {
  if (lam.size() != sp.dim()) throw ContractError(std::string(what) + ": wrong dimension");
  const double scale = 1.0 + lam.cwiseAbs().maxCoeff();
  if (sp.d_rank() > 0 && (sp.d_basis().transpose() * lam).cwiseAbs().maxCoeff() > 1e-9 * scale)
    throw ContractError(std::string(what) + " does not annihilate d");
}

}  // namespace

void validate(const SystemSpec& sys) {
  if (sys.splitting.dim() != sys.algebra.dim())
    throw ContractError("system: splitting and algebra dimensions differ");
  if (sys.frame.dim != sys.algebra.dim())
    throw ContractError("system: frame and algebra dimensions differ");
  if (!sys.frame.A) throw ContractError("system: frame has no transition matrix");
  if (!sys.lagrangian.eval) throw ContractError("system: Lagrangian has no evaluator");
}

std::pair<long, double> step_grid(double T, double h) {
  check_horizon(T, h);
  if (T == 0.0) return {0, 0.0};
  const long n = std::max(1L, static_cast<long>(std::ceil(T / h - 1e-9)));
  return {n, T / static_cast<double>(n)};
}

VectorXd el_covector(const SystemSpec& sys, const VectorXd& q, const VectorXd& v,
                     const VectorXd& vdot) {
  const int n = sys.dim();
  if (q.size() != n || v.size() != n || vdot.size() != n)
    throw ContractError("el_covector: state dimension mismatch");
  return free_covector(sys, q, v) - d2_dvdv(sys.lagrangian, q, v) * vdot;
}

MatrixXd reduced_mass_matrix(const SystemSpec& sys, const VectorXd& q, const VectorXd& v) {
  const MatrixXd& D = sys.splitting.d_basis();
  return D.transpose() * d2_dvdv(sys.lagrangian, q, v) * D;
}

VectorXd nh_accel(const SystemSpec& sys, const VectorXd& q, const VectorXd& v_d) {
  if (q.size() != sys.dim() || v_d.size() != sys.splitting.d_rank())
    throw ContractError("nh_accel: state dimension mismatch");
  const VectorXd v = sys.splitting.embed_d(v_d);
  return solve_reduced(sys, q, v, free_covector(sys, q, v));
}

Trajectory integrate_nonholonomic(const SystemSpec& sys, const VectorXd& q0, const VectorXd& v0_d,
                                  double T, double h) {
  validate(sys);
  const int n = sys.dim();
  const int k = sys.splitting.d_rank();
  if (q0.size() != n || v0_d.size() != k)
    throw ContractError("integrate_nonholonomic: initial data dimension mismatch");
  const auto [steps, dt] = step_grid(T, h);
  const MatrixXd& D = sys.splitting.d_basis();

  auto rhs = [&](const VectorXd& x) {
    const VectorXd q = x.head(n);
    const VectorXd vd = x.tail(k);
    const VectorXd v = D * vd;
    VectorXd out(n + k);
    out.head(n) = transition_matrix(sys.frame, q) * v;
    out.tail(k) = solve_reduced(sys, q, v, free_covector(sys, q, v));
    return out;
  };

  Trajectory tr;
  tr.step = dt;
  VectorXd x(n + k);
  x << q0, v0_d;
  require_finite(x, 0.0, sys.name);
  tr.t.reserve(steps + 1);
  auto push = [&](double t) {
    tr.t.push_back(t);
    tr.q.push_back(x.head(n));
    tr.v.push_back(D * x.tail(k));
  };
  push(0.0);
  for (long i = 0; i < steps; ++i) {
    const double t = static_cast<double>(i) * dt;
    const VectorXd k1 = rhs(x);
    const VectorXd k2 = rhs(x + 0.5 * dt * k1);
    const VectorXd k3 = rhs(x + 0.5 * dt * k2);
    const VectorXd k4 = rhs(x + dt * k3);
    x += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    const double t1 = i + 1 == steps ? T : t + dt;
    require_finite(x, t1, sys.name);
    push(t1);
  }
  return tr;
}

std::vector<VectorXd> integrate_along(const SystemSpec& sys, const Trajectory& traj,
                                      const VectorXd& y0, const AlongRhs& rhs) {
  validate(sys);
  if (traj.size() == 0) throw ContractError("integrate_along: empty trajectory");
  const int n = sys.dim();
  const int k = sys.splitting.d_rank();
  const long m = y0.size();
  const MatrixXd& D = sys.splitting.d_basis();

  auto f = [&](double t, const VectorXd& x) {
    const VectorXd q = x.head(n);
    const VectorXd v = D * x.segment(n, k);
    const VectorXd acc = solve_reduced(sys, q, v, free_covector(sys, q, v));
    const VectorXd vdot = D * acc;
    VectorXd out(n + k + m);
    out.head(n) = transition_matrix(sys.frame, q) * v;
    out.segment(n, k) = acc;
    out.tail(m) = rhs(t, q, v, vdot, x.tail(m));
    return out;
  };

  std::vector<VectorXd> ys;
  ys.reserve(traj.size());
  VectorXd y = y0;
  ys.push_back(y);
  for (std::size_t i = 0; i + 1 < traj.size(); ++i) {
    const double t = traj.t[i];
    const double dt = traj.t[i + 1] - t;
    VectorXd x(n + k + m);
    x << traj.q[i], sys.splitting.d_coords(traj.v[i]), y;
    const VectorXd k1 = f(t, x);
    const VectorXd k2 = f(t + 0.5 * dt, x + 0.5 * dt * k1);
    const VectorXd k3 = f(t + 0.5 * dt, x + 0.5 * dt * k2);
    const VectorXd k4 = f(t + dt, x + dt * k3);
    y = (x + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)).tail(m);
    require_finite(y, traj.t[i + 1], sys.name);
    ys.push_back(y);
  }
  return ys;
}

MultiplierPath solve_multiplier(const SystemSpec& sys, const Trajectory& traj,
                                const VectorXd& lam0) {
  if (traj.size() < 5) throw ContractError("solve_multiplier: trajectory needs at least 5 samples");
  if (lam0.size() != sys.splitting.dprime_rank())
    throw ContractError("solve_multiplier: lam0 must have one entry per d' basis vector");
  auto rhs = [&](double, const VectorXd& q, const VectorXd& v, const VectorXd& vdot,
                 const VectorXd& mu) {
    return multiplier_rate(sys, v, el_covector(sys, q, v, vdot), mu);
  };
  MultiplierPath out;
  out.t = traj.t;
  out.lam = integrate_along(sys, traj, lam0, rhs);
  return out;
}

VectorXd vak_residual(const SystemSpec& sys, const VectorXd& q, const VectorXd& v,
                      const VectorXd& vdot, const VectorXd& lam, const VectorXd& lamdot) {
  check_annihilates(sys.splitting, lam, "vak_residual: lambda");
  check_annihilates(sys.splitting, lamdot, "vak_residual: lambda rate");
  return el_covector(sys, q, v, vdot) - ad_star(sys.algebra, v, lam) + lamdot;
}

std::vector<double> energy(const SystemSpec& sys, const Trajectory& traj) {
  if (!sys.lagrangian.time_independent)
    throw ContractError("energy: Lagrangian is not time independent");
  std::vector<double> out;
  out.reserve(traj.size());
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const VectorXd& q = traj.q[i];
    const VectorXd& v = traj.v[i];
    out.push_back(d_dv(sys.lagrangian, q, v).dot(v) - sys.lagrangian.eval(q, v));
  }
  return out;
}

VakonomicSolution integrate_vakonomic(const SystemSpec& sys, const VectorXd& q0,
                                      const VectorXd& v0_d, const VectorXd& lam0, double T,
                                      double h) {
  validate(sys);
  const int n = sys.dim();
  const int k = sys.splitting.d_rank();
  const int r = sys.splitting.dprime_rank();
  if (q0.size() != n || v0_d.size() != k || lam0.size() != r)
    throw ContractError("integrate_vakonomic: initial data dimension mismatch");
  const auto [steps, dt] = step_grid(T, h);
  const MatrixXd& D = sys.splitting.d_basis();

  auto rhs = [&](const VectorXd& x) {
    const VectorXd q = x.head(n);
    const VectorXd v = D * x.segment(n, k);
    const VectorXd mu = x.tail(r);
    const VectorXd lam = sys.splitting.annihilator(mu);
    const VectorXd force = free_covector(sys, q, v);
    const VectorXd acc = solve_reduced(sys, q, v, force - ad_star(sys.algebra, v, lam));
    const VectorXd psi = force - d2_dvdv(sys.lagrangian, q, v) * (D * acc);
    VectorXd out(n + k + r);
    out.head(n) = transition_matrix(sys.frame, q) * v;
    out.segment(n, k) = acc;
    out.tail(r) = multiplier_rate(sys, v, psi, mu);
    return out;
  };

  VakonomicSolution sol;
  sol.traj.step = dt;
  VectorXd x(n + k + r);
  x << q0, v0_d, lam0;
  require_finite(x, 0.0, sys.name);
  auto push = [&](double t) {
    sol.traj.t.push_back(t);
    sol.traj.q.push_back(x.head(n));
    sol.traj.v.push_back(D * x.segment(n, k));
    sol.lam.t.push_back(t);
    sol.lam.lam.push_back(x.tail(r));
  };
  push(0.0);
  for (long i = 0; i < steps; ++i) {
    const VectorXd k1 = rhs(x);
    const VectorXd k2 = rhs(x + 0.5 * dt * k1);
    const VectorXd k3 = rhs(x + 0.5 * dt * k2);
    const VectorXd k4 = rhs(x + dt * k3);
    x += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    const double t1 = i + 1 == steps ? T : static_cast<double>(i + 1) * dt;
    require_finite(x, t1, sys.name);
    push(t1);
  }
  return sol;
}

std::vector<VectorXd> sample_derivative(const std::vector<VectorXd>& x, double h) {
  const std::size_t n = x.size();
  if (n < 5) throw ContractError("sample_derivative: at least 5 samples required");
  if (!(h > 0.0)) throw ContractError("sample_derivative: step must be positive");
  std::vector<VectorXd> d(n);
  const double s = 1.0 / (12.0 * h);
  d[0] = s * (-25.0 * x[0] + 48.0 * x[1] - 36.0 * x[2] + 16.0 * x[3] - 3.0 * x[4]);
  d[1] = s * (-3.0 * x[0] - 10.0 * x[1] + 18.0 * x[2] - 6.0 * x[3] + x[4]);
  for (std::size_t i = 2; i + 2 < n; ++i)
    d[i] = s * (-x[i + 2] + 8.0 * x[i + 1] - 8.0 * x[i - 1] + x[i - 2]);
  d[n - 2] = -s * (-3.0 * x[n - 1] - 10.0 * x[n - 2] + 18.0 * x[n - 3] - 6.0 * x[n - 4] + x[n - 5]);
  d[n - 1] =
      -s * (-25.0 * x[n - 1] + 48.0 * x[n - 2] - 36.0 * x[n - 3] + 16.0 * x[n - 4] - 3.0 * x[n - 5]);
  return d;
}

}  // namespace nhvak
