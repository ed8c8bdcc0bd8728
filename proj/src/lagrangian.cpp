#include "nhvak/lagrangian.hpp"

#include <algorithm>
#include <random>
#include <sstream>

#include "nhvak/errors.hpp"
#include "nhvak/lie.hpp"

namespace nhvak {

namespace {

template <typename F>
VectorXd central_gradient(F&& f, const VectorXd& x) {
  VectorXd g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double h = fd_step(x(i));
    VectorXd xp = x, xm = x;
    xp(i) += h;
    xm(i) -= h;
    g(i) = (f(xp) - f(xm)) / (2.0 * h);
  }
  return g;
}

// Column j holds the derivative of the vector-valued f along x_j.
template <typename F>
MatrixXd central_jacobian(F&& f, const VectorXd& x, Eigen::Index rows, double scale = 1.0) {
  MatrixXd jac(rows, x.size());
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    const double h = scale * fd_step(x(j));
    VectorXd xp = x, xm = x;
    xp(j) += h;
    xm(j) -= h;
    jac.col(j) = (f(xp) - f(xm)) / (2.0 * h);
  }
  return jac;
}

// Outer step for second differences of a finite-difference gradient.
double nested_scale(const LagrangianSpec& L) { return L.d_dv ? 1.0 : 100.0; }

double relative_deviation(const MatrixXd& analytic, const MatrixXd& fd) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < analytic.size(); ++i) {
    const double a = analytic.data()[i];
    worst = std::max(worst, std::abs(a - fd.data()[i]) / std::max(1.0, std::abs(a)));
  }
  return worst;
}

}  // namespace

VectorXd d_dv(const LagrangianSpec& L, const VectorXd& q, const VectorXd& v) {
  if (L.d_dv) return L.d_dv(q, v);
  return central_gradient([&](const VectorXd& x) { return L.eval(q, x); }, v);
}

VectorXd d_dq(const LagrangianSpec& L, const VectorXd& q, const VectorXd& v) {
  if (L.d_dq) return L.d_dq(q, v);
  return central_gradient([&](const VectorXd& x) { return L.eval(x, v); }, q);
}

MatrixXd d2_dvdv(const LagrangianSpec& L, const VectorXd& q, const VectorXd& v) {
  if (L.d2_dvdv) return L.d2_dvdv(q, v);
  MatrixXd h = central_jacobian([&](const VectorXd& x) { return d_dv(L, q, x); }, v, v.size(),
                                nested_scale(L));
  return 0.5 * (h + h.transpose());
}

MatrixXd d2_dvdq(const LagrangianSpec& L, const VectorXd& q, const VectorXd& v) {
  if (L.d2_dvdq) return L.d2_dvdq(q, v);
  return central_jacobian([&](const VectorXd& x) { return d_dv(L, x, v); }, q, v.size(),
                          nested_scale(L));
}

double pullback_dh(const LagrangianSpec& L, const FrameField& frame, const VectorXd& q,
                   const VectorXd& v, const VectorXd& b) {
  detail::require_dim(b.size(), frame.dim, "pullback_dh");
  return d_dq(L, q, v).dot(transition_matrix(frame, q) * b);
}

VectorXd pullback_covector(const LagrangianSpec& L, const FrameField& frame, const VectorXd& q,
                           const VectorXd& v) {
  return transition_matrix(frame, q).transpose() * d_dq(L, q, v);
}

double fd_gradient_check(const LagrangianSpec& L, const VectorXd& q, const VectorXd& v) {
  if (!L.has_analytic_partials())
    throw ContractError("fd_gradient_check: Lagrangian has no analytic partials");
  auto eval_q = [&](const VectorXd& x) { return L.eval(x, v); };
  auto eval_v = [&](const VectorXd& x) { return L.eval(q, x); };
  double worst = std::max(relative_deviation(L.d_dq(q, v), central_gradient(eval_q, q)),
                          relative_deviation(L.d_dv(q, v), central_gradient(eval_v, v)));
  if (L.d2_dvdv) {
    const MatrixXd fd =
        central_jacobian([&](const VectorXd& x) { return L.d_dv(q, x); }, v, v.size());
    worst = std::max(worst, relative_deviation(L.d2_dvdv(q, v), fd));
  }
  if (L.d2_dvdq) {
    const MatrixXd fd =
        central_jacobian([&](const VectorXd& x) { return L.d_dv(x, v); }, q, v.size());
    worst = std::max(worst, relative_deviation(L.d2_dvdq(q, v), fd));
  }
  return worst;
}

void validate_partials(const LagrangianSpec& L, int dim, std::uint64_t seed, int points) {
  if (!L.has_analytic_partials()) return;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int k = 0; k < points; ++k) {
    VectorXd q(dim), v(dim);
    for (int i = 0; i < dim; ++i) q(i) = u(rng);
    for (int i = 0; i < dim; ++i) v(i) = u(rng);
    const double dev = fd_gradient_check(L, q, v);
    if (!(dev <= 1e-6)) {
      std::ostringstream os;
      os << "Lagrangian: analytic partials disagree with finite differences (relative deviation "
         << dev << ")";
      throw ContractError(os.str());
    }
  }
}

LagrangianSpec operator+(const LagrangianSpec& a, const LagrangianSpec& b) {
  LagrangianSpec out;
  out.eval = [a, b](const VectorXd& q, const VectorXd& v) { return a.eval(q, v) + b.eval(q, v); };
  if (a.d_dq && b.d_dq)
    out.d_dq = [a, b](const VectorXd& q, const VectorXd& v) { return VectorXd(a.d_dq(q, v) + b.d_dq(q, v)); };
  if (a.d_dv && b.d_dv)
    out.d_dv = [a, b](const VectorXd& q, const VectorXd& v) { return VectorXd(a.d_dv(q, v) + b.d_dv(q, v)); };
  if (a.d2_dvdv && b.d2_dvdv)
    out.d2_dvdv = [a, b](const VectorXd& q, const VectorXd& v) {
      return MatrixXd(a.d2_dvdv(q, v) + b.d2_dvdv(q, v));
    };
  if (a.d2_dvdq && b.d2_dvdq)
    out.d2_dvdq = [a, b](const VectorXd& q, const VectorXd& v) {
      return MatrixXd(a.d2_dvdq(q, v) + b.d2_dvdq(q, v));
    };
  out.time_independent = a.time_independent && b.time_independent;
  return out;
}

LagrangianSpec operator*(double s, const LagrangianSpec& a) {
  LagrangianSpec out;
  out.eval = [s, a](const VectorXd& q, const VectorXd& v) { return s * a.eval(q, v); };
  if (a.d_dq) out.d_dq = [s, a](const VectorXd& q, const VectorXd& v) { return VectorXd(s * a.d_dq(q, v)); };
  if (a.d_dv) out.d_dv = [s, a](const VectorXd& q, const VectorXd& v) { return VectorXd(s * a.d_dv(q, v)); };
  if (a.d2_dvdv)
    out.d2_dvdv = [s, a](const VectorXd& q, const VectorXd& v) { return MatrixXd(s * a.d2_dvdv(q, v)); };
  if (a.d2_dvdq)
    out.d2_dvdq = [s, a](const VectorXd& q, const VectorXd& v) { return MatrixXd(s * a.d2_dvdq(q, v)); };
  out.time_independent = a.time_independent;
  return out;
}

}  // namespace nhvak
