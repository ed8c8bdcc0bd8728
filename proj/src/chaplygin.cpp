#include "nhvak/chaplygin.hpp"

#include <random>
#include <sstream>

#include "nhvak/errors.hpp"

namespace nhvak {

namespace {

constexpr double kMemberTol = 1e-12;

void require_in_d(const Splitting& sp, const VectorXd& x, const char* what) {
  if (x.size() != sp.dim()) throw ContractError(std::string(what) + ": wrong dimension");
  if ((sp.Pprime() * x).cwiseAbs().maxCoeff() > kMemberTol * (1.0 + x.cwiseAbs().maxCoeff()))
    throw ContractError(std::string(what) + " is not in d");
}

void require_in_dprime(const Splitting& sp, const VectorXd& x, const char* what) {
  if (x.size() != sp.dim()) throw ContractError(std::string(what) + ": wrong dimension");
  if ((sp.P() * x).cwiseAbs().maxCoeff() > kMemberTol * (1.0 + x.cwiseAbs().maxCoeff()))
    throw ContractError(std::string(what) + " is not in d'");
}

// Five-point central derivative of s -> f(s) at 0.
double derivative5(const std::function<double(double)>& f, double h) {
  return (f(-2.0 * h) - 8.0 * f(-h) + 8.0 * f(h) - f(2.0 * h)) / (12.0 * h);
}

}  // namespace

ChaplyginData make_chaplygin(const SystemSpec& sys) {
  ChaplyginData cd{sys, {}, {}};
  const LieAlgebra alg = sys.algebra;
  const MatrixXd Pp = sys.splitting.Pprime();
  cd.R = [alg, Pp](const VectorXd&, const VectorXd& X, const VectorXd& Y) {
    return VectorXd(Pp * bracket(alg, X, Y));
  };
  cd.B = cd.R;
  return cd;
}

ChaplyginData make_chaplygin_frame(const SystemSpec& sys) {
  ChaplyginData cd{sys, {}, {}};
  const FrameField frame = sys.frame;
  const MatrixXd Pp = sys.splitting.Pprime();
  cd.R = [frame, Pp](const VectorXd& q, const VectorXd& X, const VectorXd& Y) {
    return VectorXd(Pp * contract(bracket_coefficients(frame, q), X, Y));
  };
  cd.B = cd.R;
  return cd;
}

VectorXd curvature(const ChaplyginData& cd, const VectorXd& q, const VectorXd& X,
                   const VectorXd& Y) {
  require_in_d(cd.sys.splitting, X, "curvature: X");
  require_in_d(cd.sys.splitting, Y, "curvature: Y");
  return cd.R(q, X, Y);
}

VectorXd b_tensor(const ChaplyginData& cd, const VectorXd& q, const VectorXd& X,
                  const VectorXd& b) {
  require_in_d(cd.sys.splitting, X, "b_tensor: X");
  require_in_dprime(cd.sys.splitting, b, "b_tensor: b");
  return cd.B(q, X, b);
}

VectorXd bl_derivative(const ChaplyginData& cd, const VectorXd& q, const VectorXd& X) {
  const Splitting& sp = cd.sys.splitting;
  require_in_d(sp, X, "bl_derivative: X");
  const VectorXd hq = pullback_covector(cd.sys.lagrangian, cd.sys.frame, q, X);
  const VectorXd p = d_dv(cd.sys.lagrangian, q, X);
  VectorXd out(sp.dprime_rank());
  for (int j = 0; j < sp.dprime_rank(); ++j) {
    const VectorXd b = sp.dprime_basis().col(j);
    out(j) = hq.dot(b) + p.dot(sp.P() * bracket(cd.sys.algebra, X, b));
  }
  return out;
}

VectorXd fl_derivative(const ChaplyginData& cd, const VectorXd& q, const VectorXd& X) {
  const Splitting& sp = cd.sys.splitting;
  require_in_d(sp, X, "fl_derivative: X");
  return sp.dprime_basis().transpose() * d_dv(cd.sys.lagrangian, q, X);
}

VectorXd vak_variation_ode_rhs(const ChaplyginData& cd, const VectorXd& q, const VectorXd& X,
                               const VectorXd& Y, const VectorXd& b) {
  return -b_tensor(cd, q, X, b) - curvature(cd, q, X, Y);
}

double chaplygin_cross_check(const ChaplyginData& cd, const VectorXd& q, int trials,
                             std::uint64_t seed) {
  const SystemSpec& sys = cd.sys;
  const Splitting& sp = sys.splitting;
  const int r = sp.dprime_rank();
  for (int i = 0; i < r; ++i)
    for (int j = i + 1; j < r; ++j) {
      const VectorXd c = bracket(sys.algebra, VectorXd(sp.dprime_basis().col(i)),
                                 VectorXd(sp.dprime_basis().col(j)));
      if ((sp.P() * c).cwiseAbs().maxCoeff() > kMemberTol) {
        std::ostringstream os;
        os << "chaplygin_cross_check: d' is not closed under the bracket: [" << i << ", " << j
           << "] leaves d'";
        throw ContractError(os.str());
      }
    }
  if (trials < 0) throw ContractError("chaplygin_cross_check: trials must be >= 0");

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  auto random_vec = [&](int n) {
    VectorXd x(n);
    for (int i = 0; i < n; ++i) x(i) = u(rng);
    return x;
  };

  const LagrangianSpec& L = sys.lagrangian;
  const MatrixXd A = transition_matrix(sys.frame, q);
  const Rank3 gamma = bracket_coefficients(sys.frame, q);
  const double h = 1e-3;
  double worst = 0.0;
  for (int t = 0; t < trials; ++t) {
    const VectorXd X = sp.embed_d(random_vec(sp.d_rank()));
    const VectorXd Y = sp.embed_d(random_vec(sp.d_rank()));
    const VectorXd b = sp.embed_dprime(random_vec(r));

    const VectorXd r_lie = curvature(cd, q, X, Y);
    const VectorXd r_chart = sp.Pprime() * contract(gamma, X, Y);
    const VectorXd b_lie = b_tensor(cd, q, X, b);
    const VectorXd b_chart = sp.Pprime() * contract(gamma, X, b);
    worst = std::max(worst, (r_lie - r_chart).cwiseAbs().maxCoeff());
    worst = std::max(worst, (b_lie - b_chart).cwiseAbs().maxCoeff());

    const VectorXd bl = bl_derivative(cd, q, X);
    const VectorXd fl = fl_derivative(cd, q, X);
    for (int j = 0; j < r; ++j) {
      const VectorXd e = sp.dprime_basis().col(j);
      const VectorXd shift = sp.P() * contract(gamma, X, e);
      const double bl_chart = derivative5(
          [&](double s) { return L.eval(q + s * (A * e), X + s * shift); }, h);
      const double fl_chart = derivative5([&](double s) { return L.eval(q, X + s * e); }, h);
      worst = std::max(worst, std::abs(bl(j) - bl_chart));
      worst = std::max(worst, std::abs(fl(j) - fl_chart));
    }
  }
  return worst;
}

}  // namespace nhvak
