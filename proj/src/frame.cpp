#include "nhvak/frame.hpp"

#include <cmath>
#include <sstream>

#include "nhvak/errors.hpp"
#include "nhvak/lie.hpp"

namespace nhvak {

namespace {

std::string describe(const VectorXd& q) {
  std::ostringstream os;
  os << "q = [";
  for (Eigen::Index i = 0; i < q.size(); ++i) os << (i ? ", " : "") << q(i);
  os << "]";
  return os.str();
}

// Derivative of A along each chart coordinate.
std::vector<MatrixXd> coordinate_derivatives(const FrameField& frame, const VectorXd& q) {
  std::vector<MatrixXd> dA;
  dA.reserve(q.size());
  for (Eigen::Index d = 0; d < q.size(); ++d) {
    const double h = fd_step(q(d));
    VectorXd qp = q, qm = q;
    qp(d) += h;
    qm(d) -= h;
    dA.push_back((frame.A(qp) - frame.A(qm)) / (2.0 * h));
  }
  return dA;
}

}  // namespace

MatrixXd transition_matrix(const FrameField& frame, const VectorXd& q) {
  detail::require_dim(q.size(), frame.dim, "transition_matrix");
  MatrixXd a = frame.A(q);
  if (a.rows() != frame.dim || a.cols() != frame.dim)
    throw ContractError("frame: A(q) has the wrong shape");
  const double cond = detail::condition_number<double>(a);
  if (!(cond <= 1e12))
    throw NumericalError("frame: singular transition matrix at " + describe(q));
  return a;
}

VectorXd push_velocity(const FrameField& frame, const StatePoint& s) {
  detail::require_dim(s.v.size(), frame.dim, "push_velocity");
  return transition_matrix(frame, s.q) * s.v;
}

Rank3 bracket_coefficients_fd(const FrameField& frame, const VectorXd& q) {
  const int n = frame.dim;
  const MatrixXd a = transition_matrix(frame, q);
  const auto dA = coordinate_derivatives(frame, q);
  // Directional derivative of every column of A along frame vector e_b.
  std::vector<MatrixXd> along(n, MatrixXd::Zero(n, n));
  for (int b = 0; b < n; ++b)
    for (int d = 0; d < n; ++d) along[b] += a(d, b) * dA[d];

  const Eigen::PartialPivLU<MatrixXd> lu(a);
  Rank3 gamma(n, MatrixXd::Zero(n, n));
  for (int b = 0; b < n; ++b)
    for (int c = b + 1; c < n; ++c) {
      const VectorXd rhs = along[b].col(c) - along[c].col(b);
      const VectorXd coeff = lu.solve(rhs);
      for (int k = 0; k < n; ++k) {
        gamma[k](b, c) = coeff(k);
        gamma[k](c, b) = -coeff(k);
      }
    }
  return gamma;
}

Rank3 bracket_coefficients(const FrameField& frame, const VectorXd& q) {
  if (frame.gamma) return frame.gamma(q);
  return bracket_coefficients_fd(frame, q);
}

double frame_consistency_residual(const FrameField& frame, const VectorXd& q) {
  if (!frame.gamma)
    throw ContractError("frame_consistency_residual: frame has no analytic bracket coefficients");
  const Rank3 analytic = frame.gamma(q);
  const Rank3 fd = bracket_coefficients_fd(frame, q);
  if (static_cast<int>(analytic.size()) != frame.dim)
    throw ContractError("frame: analytic gamma has the wrong shape");
  double worst = 0.0;
  for (int k = 0; k < frame.dim; ++k)
    worst = std::max(worst, (analytic[k] - fd[k]).cwiseAbs().maxCoeff());
  return worst;
}

VectorXd contract(const Rank3& t, const VectorXd& x, const VectorXd& y) {
  VectorXd out(static_cast<Eigen::Index>(t.size()));
  for (std::size_t a = 0; a < t.size(); ++a) out(a) = x.dot(t[a] * y);
  return out;
}

std::pair<VectorXd, VectorXd> variation_lift(const FrameField& frame, const StatePoint& s,
                                             const VectorXd& w, const VectorXd& wdot) {
  detail::require_dim(s.v.size(), frame.dim, "variation_lift");
  detail::require_dim(w.size(), frame.dim, "variation_lift");
  detail::require_dim(wdot.size(), frame.dim, "variation_lift");
  VectorXd delta_q = transition_matrix(frame, s.q) * w;
  VectorXd delta_v = wdot + contract(bracket_coefficients(frame, s.q), s.v, w);
  return {std::move(delta_q), std::move(delta_v)};
}

FrameField identity_frame(int dim) {
  FrameField f;
  f.dim = dim;
  f.A = [dim](const VectorXd&) { return MatrixXd::Identity(dim, dim); };
  f.gamma = [dim](const VectorXd&) { return Rank3(dim, MatrixXd::Zero(dim, dim)); };
  f.chart_hint = "global Cartesian coordinates";
  return f;
}

}  // namespace nhvak
