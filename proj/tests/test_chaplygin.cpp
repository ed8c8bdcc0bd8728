#include <gtest/gtest.h>

#include "nhvak/chaplygin.hpp"
#include "nhvak/errors.hpp"
#include "nhvak/systems.hpp"
#include "oracles.hpp"

using namespace nhvak;

namespace {

VectorXd vec(std::initializer_list<double> xs) {
  VectorXd v(static_cast<long>(xs.size()));
  long i = 0;
  for (double x : xs) v(i++) = x;
  return v;
}

}  // namespace

TEST(Chaplygin, HeisenbergCurvature) {
  const ChaplyginData cd = make_chaplygin(build_heisenberg());
  const VectorXd R = curvature(cd, VectorXd::Zero(3), vec({1, 0, 0}), vec({0, 1, 0}));
  EXPECT_EQ(R, vec({0, 0, -2}));
  EXPECT_EQ(curvature(cd, VectorXd::Zero(3), vec({1, 2, 0}), vec({1, 2, 0})).cwiseAbs().maxCoeff(), 0.0);
}

TEST(Chaplygin, CurvatureIsAntisymmetric) {
  std::mt19937_64 rng(4);
  for (const char* name : {"unicycle", "carriage", "heisenberg", "gen-heisenberg"}) {
    const ChaplyginData cd = make_chaplygin(build_system(name));
    const Splitting& sp = cd.sys.splitting;
    const VectorXd q = oracle::random_vector(rng, sp.dim());
    const VectorXd X = sp.embed_d(oracle::random_vector(rng, sp.d_rank()));
    const VectorXd Y = sp.embed_d(oracle::random_vector(rng, sp.d_rank()));
    EXPECT_EQ((curvature(cd, q, X, Y) + curvature(cd, q, Y, X)).cwiseAbs().maxCoeff(), 0.0) << name;
  }
}

TEST(Chaplygin, UnicycleCurvatureMatchesFieldBracket) {
  const UnicycleParams p;
  const SystemSpec s = build_unicycle(p);
  const ChaplyginData cd = make_chaplygin(s);
  const VectorXd q = vec({0.4, -0.3, 1.1, 0.2});
  const VectorXd X = vec({0, 0, 1, 0});
  const VectorXd Y = vec({1, 0, 0, 1.0 / p.R});
  const VectorXd R = curvature(cd, q, X, Y);
  EXPECT_NEAR(R(1), 1.0, 1e-15);
  // Field bracket of the two frame combinations by finite differences.
  VectorXd ref = VectorXd::Zero(4);
  for (int b = 0; b < 4; ++b)
    for (int c = 0; c < 4; ++c)
      if (X(b) != 0.0 && Y(c) != 0.0) ref += X(b) * Y(c) * oracle::field_bracket(s.frame, q, b, c);
  EXPECT_LE((R - s.splitting.Pprime() * ref).cwiseAbs().maxCoeff(), 1e-7);
  const ChaplyginData fd = make_chaplygin_frame(s);
  EXPECT_LE((fd.R(q, X, Y) - R).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Chaplygin, UnicycleBTensor) {
  const ChaplyginData cd = make_chaplygin(build_unicycle());
  const VectorXd q = VectorXd::Zero(4);
  const VectorXd ephi = vec({0, 0, 1, 0});
  EXPECT_EQ(b_tensor(cd, q, ephi, vec({1, 0, 0, 0})), vec({0, 1, 0, 0}));
  EXPECT_EQ(b_tensor(cd, q, ephi, vec({0, 1, 0, 0})), vec({-1, 0, 0, 0}));
  EXPECT_EQ(b_tensor(cd, q, ephi, VectorXd::Zero(4)).cwiseAbs().maxCoeff(), 0.0);
}

TEST(Chaplygin, HolonomicDemoTensorsVanish) {
  std::mt19937_64 rng(6);
  const ChaplyginData cd = make_chaplygin(build_holonomic_demo());
  for (int i = 0; i < 10; ++i) {
    const VectorXd q = oracle::random_vector(rng, 3);
    const VectorXd X = vec({oracle::random_vector(rng, 1)(0), 0.7, 0});
    const VectorXd Y = vec({-0.2, oracle::random_vector(rng, 1)(0), 0});
    EXPECT_EQ(curvature(cd, q, X, Y).cwiseAbs().maxCoeff(), 0.0);
    EXPECT_EQ(b_tensor(cd, q, X, vec({0, 0, 1.5})).cwiseAbs().maxCoeff(), 0.0);
  }
}

TEST(Chaplygin, MembershipIsChecked) {
  const ChaplyginData cd = make_chaplygin(build_heisenberg());
  EXPECT_THROW(curvature(cd, VectorXd::Zero(3), vec({0, 0, 1}), vec({1, 0, 0})), ContractError);
  EXPECT_THROW(b_tensor(cd, VectorXd::Zero(3), vec({1, 0, 0}), vec({1, 0, 0})), ContractError);
  EXPECT_THROW(fl_derivative(cd, VectorXd::Zero(3), vec({0, 1e-9, 1e-6})), ContractError);
}

TEST(Chaplygin, HorizontalDerivativeVanishesForUnicycle) {
  std::mt19937_64 rng(12);
  const ChaplyginData cd = make_chaplygin(build_unicycle());
  const Splitting& sp = cd.sys.splitting;
  for (int i = 0; i < 10; ++i) {
    const VectorXd X = sp.embed_d(oracle::random_vector(rng, 2));
    EXPECT_LE(bl_derivative(cd, oracle::random_vector(rng, 4), X).cwiseAbs().maxCoeff(), 1e-15);
    EXPECT_LE(fl_derivative(cd, oracle::random_vector(rng, 4), X)(1), 1e-15);
  }
}

TEST(Chaplygin, ConstantLagrangianHasZeroDerivatives) {
  SystemSpec s = build_carriage();
  s.lagrangian = LagrangianSpec{};
  s.lagrangian.eval = [](const VectorXd&, const VectorXd&) { return 3.0; };
  const ChaplyginData cd = make_chaplygin(s);
  const VectorXd X = s.splitting.embed_d(vec({1, -2}));
  EXPECT_LE(bl_derivative(cd, VectorXd::Zero(5), X).cwiseAbs().maxCoeff(), 1e-8);
  EXPECT_LE(fl_derivative(cd, VectorXd::Zero(5), X).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(Chaplygin, GeneralizedHeisenbergBLVanishes) {
  std::mt19937_64 rng(13);
  const ChaplyginData cd = make_chaplygin(build_system("gen-heisenberg"));
  for (int i = 0; i < 10; ++i) {
    const VectorXd X = vec({oracle::random_vector(rng, 1)(0), oracle::random_vector(rng, 1)(0), 0});
    EXPECT_EQ(bl_derivative(cd, oracle::random_vector(rng, 3), X)(0), 0.0);
  }
}

TEST(Chaplygin, VerticalDerivativeValues) {
  CarriageParams p;
  p.l = 0.3;
  const ChaplyginData cd = make_chaplygin(build_carriage(p));
  const double phidot = 1.7;
  const VectorXd X = cd.sys.splitting.embed_d(vec({0.4, phidot}));
  const VectorXd fl = fl_derivative(cd, VectorXd::Zero(5), X);
  EXPECT_NEAR(fl(1), p.m0 * p.l * phidot, 1e-14);
  EXPECT_NEAR(fl(0), p.m() * 0.4, 1e-14);

  const ChaplyginData h = make_chaplygin(build_heisenberg());
  EXPECT_EQ(fl_derivative(h, VectorXd::Ones(3), vec({0.3, -0.8, 0}))(0), 0.0);
}

TEST(Chaplygin, VariationRhs) {
  const ChaplyginData h = make_chaplygin(build_heisenberg());
  const VectorXd q = VectorXd::Zero(3);
  EXPECT_EQ(vak_variation_ode_rhs(h, q, vec({1, 0, 0}), vec({0, 1, 0}), VectorXd::Zero(3)),
            vec({0, 0, 2}));
  EXPECT_EQ(vak_variation_ode_rhs(h, q, vec({1, 0, 0}), VectorXd::Zero(3), VectorXd::Zero(3))
                .cwiseAbs()
                .maxCoeff(),
            0.0);

  // Brute-force expansion of P'(bdot + [X, Y + b]) = 0 on the unicycle.
  std::mt19937_64 rng(21);
  const ChaplyginData u = make_chaplygin(build_unicycle());
  const Splitting& sp = u.sys.splitting;
  for (int i = 0; i < 10; ++i) {
    const VectorXd X = sp.embed_d(oracle::random_vector(rng, 2));
    const VectorXd Y = sp.embed_d(oracle::random_vector(rng, 2));
    const VectorXd b = sp.embed_dprime(oracle::random_vector(rng, 2));
    const VectorXd bdot = vak_variation_ode_rhs(u, VectorXd::Zero(4), X, Y, b);
    const VectorXd xi = Y + b;
    VectorXd br = VectorXd::Zero(4);
    for (int a = 0; a < 4; ++a)
      for (int j = 0; j < 4; ++j)
        for (int k = 0; k < 4; ++k) br(a) += u.sys.algebra(a, j, k) * X(j) * xi(k);
    EXPECT_LE((sp.Pprime() * (bdot + br)).cwiseAbs().maxCoeff(), 1e-15);
  }
}

TEST(Chaplygin, CrossCheckOnBuiltins) {
  std::mt19937_64 rng(31);
  for (const char* name : {"unicycle", "carriage", "heisenberg"}) {
    const ChaplyginData cd = make_chaplygin(build_system(name));
    double worst = 0.0;
    for (int i = 0; i < 10; ++i)
      worst = std::max(worst, chaplygin_cross_check(cd, oracle::random_vector(rng, cd.sys.dim()), 5, i));
    EXPECT_LE(worst, 1e-10) << name;
  }
}

TEST(Chaplygin, CrossCheckOnAbelianIsZero) {
  const ChaplyginData cd = make_chaplygin(build_holonomic_demo());
  EXPECT_LE(chaplygin_cross_check(cd, VectorXd::Ones(3), 20), 1e-12);
}

TEST(Chaplygin, CrossCheckRejectsNonSubalgebraComplement) {
  SystemSpec s = build_unicycle();
  MatrixXd d(4, 2), dp(4, 2);
  d << 1, 0, 0, 1, 0, 0, 2, 0;
  dp << 0, 1, 0, 0, 1, 0, 0, 0;
  s.splitting = Splitting(d, dp);
  try {
    chaplygin_cross_check(make_chaplygin(s), VectorXd::Zero(4), 3);
    FAIL() << "expected ContractError";
  } catch (const ContractError& e) {
    EXPECT_NE(std::string(e.what()).find("[0, 1]"), std::string::npos);
  }
}

TEST(Chaplygin, HeisenbergVerticalDerivativeConstantAlongTrajectories) {
  const SystemSpec s = build_heisenberg();
  const ChaplyginData cd = make_chaplygin(s);
  const Trajectory tr = integrate_nonholonomic(s, vec({0.2, 0.1, -0.3}), vec({0.9, -0.4}), 10.0, 1e-3);
  const double fl0 = fl_derivative(cd, tr.q[0], tr.v[0])(0);
  double dev = 0.0;
  for (std::size_t i = 0; i < tr.size(); ++i)
    dev = std::max(dev, std::abs(fl_derivative(cd, tr.q[i], tr.v[i])(0) - fl0));
  EXPECT_LE(dev, 1e-9);
}
