#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "nhvak/dynamics.hpp"

namespace nhvak {

struct UnicycleParams {
  double m = 1.0;
  double I = 0.5;
  double J = 0.75;
  double R = 0.5;
  /// Optional potential U(q) with its coordinate gradient; both or neither.
  std::function<double(const VectorXd&)> potential;
  std::function<VectorXd(const VectorXd&)> potential_grad;
};

struct CarriageParams {
  double m0 = 2.0;
  double m1 = 0.5;
  double l = 0.5;
  double J = 0.8;
  double I = 0.1;
  double w = 0.4;
  double R = 0.5;

  double m() const { return m0 + 2.0 * m1; }
  double X() const { return m0 * l * R * R / (m() * R * R + 2.0 * I); }
  double Y() const { return m0 * l * R * R / (J * R * R + 2.0 * I * w * w); }
  double XY() const { return X() * Y(); }
};

/// Smooth scalar coefficient with its gradient in the chart coordinates
/// (x, y, z).
struct ScalarField {
  std::function<double(const VectorXd&)> value;
  std::function<VectorXd(const VectorXd&)> grad;

  static ScalarField constant(double c);
};

struct GenHeisenbergParams {
  ScalarField f = ScalarField::constant(0.5);
  ScalarField g = ScalarField::constant(0.0);
  ScalarField h = ScalarField::constant(0.5);
  ScalarField Phi = ScalarField::constant(0.5);
  ScalarField U = ScalarField::constant(0.0);
};

SystemSpec build_unicycle(const UnicycleParams& p = {});
SystemSpec build_carriage(const CarriageParams& p = {});
SystemSpec build_heisenberg();
SystemSpec build_generalized_heisenberg(const GenHeisenbergParams& p = {});
SystemSpec build_holonomic_demo();

/// l solving m0^2 l^2 R^4 = (m R^2 + 2I)(J R^2 + 2I w^2) for the other
/// parameters of p; throws ContractError if no positive root exists.
double carriage_xy_root(const CarriageParams& p);

/// Coefficients of the polynomial generalized Heisenberg family:
///   f = f0 + f_xx x^2, g = g_xy x y, h = h0, Phi = Phi0 + Phi_zz z^2,
///   U = u_x x^2 + u_y y^2.
GenHeisenbergParams gen_heisenberg_polynomial(double f0, double f_xx, double g_xy, double h0,
                                              double Phi0, double Phi_zz, double u_x, double u_y);

/// Names accepted by build_system, in registry order.
const std::vector<std::string>& system_names();

/// Default named parameters of a registered system.
std::map<std::string, double> default_params(const std::string& name);

/// Builds a registered system from named parameters; missing names take
/// their defaults, unknown names are a ContractError. The carriage also
/// accepts "XY", which overrides l by l = l_root * sqrt(XY).
SystemSpec build_system(const std::string& name, const std::map<std::string, double>& params = {});

}  // namespace nhvak
