#pragma once

#include <limits>
#include <string>
#include <vector>

namespace nsk {

/// Barotropic pressure law P(rho). The background state is rho = 1 and the
/// linearization assumes P'(1) = 0; models that break this are rejected by
/// validate() unless allow_noncritical is set.
struct PressureModel {
  enum class Kind { critical_quadratic, van_der_waals, custom };

  Kind kind = Kind::critical_quadratic;
  double c = 1.0;                    // critical_quadratic: c (rho-1)^2
  double a = 1.0, b = 0.0, theta = 0.0;  // van_der_waals: theta rho/(1-b rho) - a rho^2
  std::vector<double> coefficients;  // custom: sum_k coefficients[k] (rho-1)^k
  double rho_min = 0.1;
  double rho_max = std::numeric_limits<double>::infinity();
  bool allow_noncritical = false;

  double P(double rho) const;
  double dP(double rho) const;
  double d2P(double rho) const;
  std::string name() const;
};

PressureModel critical_quadratic(double c);
/// theta defaults to the critical value 2a(1-b)^2; rho_max to 0.99/b.
PressureModel van_der_waals(double a, double b);
PressureModel van_der_waals(double a, double b, double theta);
PressureModel custom_polynomial(std::vector<double> coefficients);

/// Throws InvalidParams on a non-critical or ill-posed model.
void validate(const PressureModel& p);

struct PhysParams {
  double nu = 1.0;
  double nu_tilde = 1.0;
  double kappa = 1.0;
  PressureModel pressure{};

  double A() const noexcept { return 0.5 * (nu + nu_tilde); }
  double K() const;
};

/// nu > 0, kappa > 0, nu + nu_tilde > 0, everything finite.
void validate(const PhysParams& p);
/// Additionally enforces nu_tilde >= nu (1 - 2/n) (non-negative bulk viscosity).
void validate(const PhysParams& p, int dim);

}  // namespace nsk
