#include "nhvak/systems.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include "nhvak/errors.hpp"

namespace nhvak {

namespace {

void require_positive(double x, const char* name) {
  if (!(x > 0.0) || !std::isfinite(x))
    throw ContractError(std::string("parameter ") + name + " must be positive and finite");
}

void require_finite(double x, const char* name) {
  if (!std::isfinite(x)) throw ContractError(std::string("parameter ") + name + " must be finite");
}

// Planar rigid-body brackets [e_phi, e1] = e2, [e_phi, e2] = -e1 in a basis
// (e1, e2, e_phi, ...) of dimension n.
LieAlgebra planar_algebra(std::vector<std::string> labels) {
  using E = LieAlgebra::Entry;
  return LieAlgebra::from_entries(std::move(labels), {E{1, 2, 0, 1.0}, E{0, 2, 1, -1.0}});
}

FrameField planar_frame(int n) {
  FrameField f;
  f.dim = n;
  f.A = [n](const VectorXd& q) {
    MatrixXd A = MatrixXd::Identity(n, n);
    const double c = std::cos(q(2));
    const double s = std::sin(q(2));
    A(0, 0) = c;
    A(1, 0) = s;
    A(0, 1) = -s;
    A(1, 1) = c;
    return A;
  };
  const Rank3 g = planar_algebra(std::vector<std::string>(n, "e")).constants();
  f.gamma = [g](const VectorXd&) { return g; };
  f.chart_hint = "x, y, phi, wheel angles";
  return f;
}

// L = 1/2 v^T M v + <k, v> v-linear coupling folded into M, minus U(q).
LagrangianSpec quadratic_lagrangian(const MatrixXd& M, std::function<double(const VectorXd&)> U,
                                    std::function<VectorXd(const VectorXd&)> dU) {
  LagrangianSpec L;
  const long n = M.rows();
  L.eval = [M, U](const VectorXd& q, const VectorXd& v) {
    return 0.5 * v.dot(M * v) - (U ? U(q) : 0.0);
  };
  L.d_dv = [M](const VectorXd&, const VectorXd& v) { return VectorXd(M * v); };
  L.d_dq = [n, dU](const VectorXd& q, const VectorXd&) {
    return dU ? VectorXd(-dU(q)) : VectorXd(VectorXd::Zero(n));
  };
  L.d2_dvdv = [M](const VectorXd&, const VectorXd&) { return M; };
  L.d2_dvdq = [n](const VectorXd&, const VectorXd&) { return MatrixXd(MatrixXd::Zero(n, n)); };
  return L;
}

MatrixXd columns(int n, std::initializer_list<std::initializer_list<double>> cols) {
  MatrixXd m(n, static_cast<long>(cols.size()));
  long j = 0;
  for (const auto& c : cols) {
    long i = 0;
    for (double x : c) m(i++, j) = x;
    ++j;
  }
  return m;
}

double get(const std::map<std::string, double>& p, const std::string& key) { return p.at(key); }

}  // namespace

ScalarField ScalarField::constant(double c) {
  return {[c](const VectorXd&) { return c; },
          [](const VectorXd& q) { return VectorXd(VectorXd::Zero(q.size())); }};
}

SystemSpec build_unicycle(const UnicycleParams& p) {
  require_positive(p.m, "m");
  require_positive(p.I, "I");
  require_positive(p.J, "J");
  require_positive(p.R, "R");
  if (static_cast<bool>(p.potential) != static_cast<bool>(p.potential_grad))
    throw ContractError("unicycle potential needs both value and gradient");
  const VectorXd diag = (VectorXd(4) << p.m, p.m, p.J, p.I).finished();
  SystemSpec sys{planar_algebra({"e1", "e2", "e_phi", "e_theta"}),
                 Splitting(columns(4, {{1, 0, 0, 1.0 / p.R}, {0, 0, 1, 0}}),
                           columns(4, {{1, 0, 0, 0}, {0, 1, 0, 0}})),
                 planar_frame(4),
                 quadratic_lagrangian(diag.asDiagonal(), p.potential, p.potential_grad),
                 "unicycle",
                 {{"m", p.m}, {"I", p.I}, {"J", p.J}, {"R", p.R}}};
  return sys;
}

SystemSpec build_carriage(const CarriageParams& p) {
  require_positive(p.m0, "m0");
  require_positive(p.m1, "m1");
  require_positive(p.R, "R");
  require_positive(p.w, "w");
  require_finite(p.I, "I");
  require_finite(p.J, "J");
  if (!(p.l >= 0.0) || !std::isfinite(p.l)) throw ContractError("parameter l must be >= 0");
  const double m = p.m();
  MatrixXd M = MatrixXd::Zero(5, 5);
  M.diagonal() << m, m, p.J, 2.0 * p.I, 2.0 * p.I;
  M(1, 2) = M(2, 1) = p.m0 * p.l;
  SystemSpec sys{
      planar_algebra({"e1", "e2", "e_phi", "e_theta1", "e_theta2"}),
      Splitting(columns(5, {{1, 0, 0, 1.0 / p.R, 0}, {0, 0, 1, 0, p.w / p.R}}),
                columns(5, {{1, 0, 0, 0, 0}, {0, 1, 0, 0, 0}, {0, 0, 1, 0, 0}})),
      planar_frame(5),
      quadratic_lagrangian(M, nullptr, nullptr),
      "carriage",
      {{"m0", p.m0}, {"m1", p.m1}, {"l", p.l}, {"J", p.J}, {"I", p.I}, {"w", p.w}, {"R", p.R}}};
  return sys;
}

namespace {

LieAlgebra heisenberg_algebra() {
  using E = LieAlgebra::Entry;
  return LieAlgebra::from_entries({"e1", "e2", "e3"}, {E{2, 0, 1, -2.0}});
}

FrameField heisenberg_frame() {
  FrameField f;
  f.dim = 3;
  f.A = [](const VectorXd& q) {
    MatrixXd A = MatrixXd::Identity(3, 3);
    A(2, 0) = q(1);
    A(2, 1) = -q(0);
    return A;
  };
  const Rank3 g = heisenberg_algebra().constants();
  f.gamma = [g](const VectorXd&) { return g; };
  f.chart_hint = "x, y, z";
  return f;
}

Splitting heisenberg_splitting() {
  return Splitting(columns(3, {{1, 0, 0}, {0, 1, 0}}), columns(3, {{0, 0, 1}}));
}

}  // namespace

SystemSpec build_heisenberg() {
  SystemSpec sys{heisenberg_algebra(), heisenberg_splitting(), heisenberg_frame(),
                 quadratic_lagrangian(MatrixXd::Identity(3, 3), nullptr, nullptr), "heisenberg",
                 {}};
  return sys;
}

SystemSpec build_generalized_heisenberg(const GenHeisenbergParams& p) {
  for (const ScalarField* s : {&p.f, &p.g, &p.h, &p.Phi, &p.U})
    if (!s->value || !s->grad) throw ContractError("generalized Heisenberg: incomplete coefficient");

  auto mass = [p](const VectorXd& q) {
    MatrixXd M = MatrixXd::Zero(3, 3);
    const double g = p.g.value(q);
    M(0, 0) = 2.0 * p.f.value(q);
    M(0, 1) = M(1, 0) = g;
    M(1, 1) = 2.0 * p.h.value(q);
    M(2, 2) = 2.0 * p.Phi.value(q);
    return M;
  };

  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 20; ++i) {
    const VectorXd q = (VectorXd(3) << u(rng), u(rng), u(rng)).finished();
    const Eigen::SelfAdjointEigenSolver<MatrixXd> es(mass(q));
    if (!(es.eigenvalues().minCoeff() > 0.0)) {
      std::ostringstream os;
      os << "generalized Heisenberg: kinetic form not positive definite at q = (" << q(0) << ", "
         << q(1) << ", " << q(2) << ")";
      throw ContractError(os.str());
    }
  }

  LagrangianSpec L;
  L.eval = [mass, p](const VectorXd& q, const VectorXd& v) {
    return 0.5 * v.dot(mass(q) * v) - p.U.value(q);
  };
  L.d_dv = [mass](const VectorXd& q, const VectorXd& v) { return VectorXd(mass(q) * v); };
  L.d2_dvdv = [mass](const VectorXd& q, const VectorXd&) { return mass(q); };
  L.d_dq = [p](const VectorXd& q, const VectorXd& v) {
    const double a = v(0), b = v(1), c = v(2);
    return VectorXd(a * a * p.f.grad(q) + a * b * p.g.grad(q) + b * b * p.h.grad(q) +
                    c * c * p.Phi.grad(q) - p.U.grad(q));
  };
  L.d2_dvdq = [p](const VectorXd& q, const VectorXd& v) {
    const double a = v(0), b = v(1), c = v(2);
    MatrixXd H(3, 3);
    H.row(0) = (2.0 * a * p.f.grad(q) + b * p.g.grad(q)).transpose();
    H.row(1) = (a * p.g.grad(q) + 2.0 * b * p.h.grad(q)).transpose();
    H.row(2) = (2.0 * c * p.Phi.grad(q)).transpose();
    return H;
  };

  SystemSpec sys{heisenberg_algebra(), heisenberg_splitting(), heisenberg_frame(), L,
                 "gen-heisenberg", {}};
  return sys;
}

SystemSpec build_holonomic_demo() {
  SystemSpec sys{LieAlgebra::abelian({"e1", "e2", "e3"}),
                 Splitting(columns(3, {{1, 0, 0}, {0, 1, 0}}), columns(3, {{0, 0, 1}})),
                 identity_frame(3),
                 quadratic_lagrangian(MatrixXd::Identity(3, 3), nullptr, nullptr),
                 "holonomic-demo",
                 {}};
  return sys;
}

double carriage_xy_root(const CarriageParams& p) {
  const double m = p.m();
  const double prod = (m * p.R * p.R + 2.0 * p.I) * (p.J * p.R * p.R + 2.0 * p.I * p.w * p.w);
  if (!(prod > 0.0) || !(p.m0 > 0.0) || !(p.R > 0.0))
    throw ContractError("carriage: XY = 1 has no positive root for these parameters");
  return std::sqrt(prod) / (p.m0 * p.R * p.R);
}

GenHeisenbergParams gen_heisenberg_polynomial(double f0, double f_xx, double g_xy, double h0,
                                              double Phi0, double Phi_zz, double u_x,
                                              double u_y) {
  GenHeisenbergParams p;
  p.f = {[=](const VectorXd& q) { return f0 + f_xx * q(0) * q(0); },
         [=](const VectorXd& q) { return VectorXd((VectorXd(3) << 2.0 * f_xx * q(0), 0, 0).finished()); }};
  p.g = {[=](const VectorXd& q) { return g_xy * q(0) * q(1); },
         [=](const VectorXd& q) {
           return VectorXd((VectorXd(3) << g_xy * q(1), g_xy * q(0), 0).finished());
         }};
  p.h = ScalarField::constant(h0);
  p.Phi = {[=](const VectorXd& q) { return Phi0 + Phi_zz * q(2) * q(2); },
           [=](const VectorXd& q) {
             return VectorXd((VectorXd(3) << 0, 0, 2.0 * Phi_zz * q(2)).finished());
           }};
  p.U = {[=](const VectorXd& q) { return u_x * q(0) * q(0) + u_y * q(1) * q(1); },
         [=](const VectorXd& q) {
           return VectorXd((VectorXd(3) << 2.0 * u_x * q(0), 2.0 * u_y * q(1), 0).finished());
         }};
  return p;
}

const std::vector<std::string>& system_names() {
  static const std::vector<std::string> names{"unicycle", "carriage", "heisenberg",
                                              "gen-heisenberg", "holonomic-demo"};
  return names;
}

std::map<std::string, double> default_params(const std::string& name) {
  if (name == "unicycle") {
    const UnicycleParams p;
    return {{"m", p.m}, {"I", p.I}, {"J", p.J}, {"R", p.R}, {"k_phi", 0.0}};
  }
  if (name == "carriage") {
    const CarriageParams p;
    return {{"m0", p.m0}, {"m1", p.m1}, {"l", p.l}, {"J", p.J},
            {"I", p.I},   {"w", p.w},   {"R", p.R}};
  }
  if (name == "gen-heisenberg")
    return {{"f0", 1.0},   {"f_xx", 1.0},   {"g_xy", 1.0}, {"h0", 2.0},
            {"Phi0", 1.0}, {"Phi_zz", 1.0}, {"u_x", 1.0},  {"u_y", 1.0}};
  if (name == "heisenberg" || name == "holonomic-demo") return {};
  throw ContractError("unknown system '" + name + "'");
}

SystemSpec build_system(const std::string& name, const std::map<std::string, double>& params) {
  std::map<std::string, double> p = default_params(name);
  bool has_xy = false;
  double xy = 0.0;
  for (const auto& [k, v] : params) {
    if (name == "carriage" && k == "XY") {
      has_xy = true;
      xy = v;
      continue;
    }
    if (!p.count(k)) throw ContractError("system '" + name + "' has no parameter '" + k + "'");
    p[k] = v;
  }

  if (name == "unicycle") {
    UnicycleParams u;
    u.m = get(p, "m");
    u.I = get(p, "I");
    u.J = get(p, "J");
    u.R = get(p, "R");
    const double k = get(p, "k_phi");
    if (k != 0.0) {
      u.potential = [k](const VectorXd& q) { return k * (1.0 - std::cos(q(2))); };
      u.potential_grad = [k](const VectorXd& q) {
        VectorXd g = VectorXd::Zero(4);
        g(2) = k * std::sin(q(2));
        return g;
      };
    }
    SystemSpec sys = build_unicycle(u);
    sys.params = p;
    return sys;
  }
  if (name == "carriage") {
    CarriageParams c;
    c.m0 = get(p, "m0");
    c.m1 = get(p, "m1");
    c.l = get(p, "l");
    c.J = get(p, "J");
    c.I = get(p, "I");
    c.w = get(p, "w");
    c.R = get(p, "R");
    if (has_xy) {
      if (!(xy >= 0.0) || !std::isfinite(xy)) throw ContractError("parameter XY must be >= 0");
      c.l = carriage_xy_root(c) * std::sqrt(xy);
      p["l"] = c.l;
    }
    SystemSpec sys = build_carriage(c);
    sys.params = p;
    return sys;
  }
  if (name == "gen-heisenberg") {
    SystemSpec sys = build_generalized_heisenberg(gen_heisenberg_polynomial(
        get(p, "f0"), get(p, "f_xx"), get(p, "g_xy"), get(p, "h0"), get(p, "Phi0"),
        get(p, "Phi_zz"), get(p, "u_x"), get(p, "u_y")));
    sys.params = p;
    return sys;
  }
  if (name == "heisenberg") return build_heisenberg();
  return build_holonomic_demo();
}

}  // namespace nhvak
