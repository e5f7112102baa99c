#include "nsk/params.hpp"

#include <cmath>

#include "nsk/error.hpp"

namespace nsk {

namespace {
double horner(const std::vector<double>& c, double x, int deriv) {
  double acc = 0.0;
  for (std::size_t k = c.size(); k-- > static_cast<std::size_t>(deriv);) {
    double f = 1.0;
    for (int j = 0; j < deriv; ++j) f *= static_cast<double>(k - static_cast<std::size_t>(j));
    acc = acc * x + f * c[k];
  }
  return acc;
}
}  // namespace

double PressureModel::P(double rho) const {
  switch (kind) {
    case Kind::critical_quadratic: return c * (rho - 1.0) * (rho - 1.0);
    case Kind::van_der_waals: return theta * rho / (1.0 - b * rho) - a * rho * rho;
    case Kind::custom: return horner(coefficients, rho - 1.0, 0);
  }
  return 0.0;
}

double PressureModel::dP(double rho) const {
  switch (kind) {
    case Kind::critical_quadratic: return 2.0 * c * (rho - 1.0);
    case Kind::van_der_waals: {
      const double g = 1.0 - b * rho;
      return theta / (g * g) - 2.0 * a * rho;
    }
    case Kind::custom: return horner(coefficients, rho - 1.0, 1);
  }
  return 0.0;
}

double PressureModel::d2P(double rho) const {
  switch (kind) {
    case Kind::critical_quadratic: return 2.0 * c;
    case Kind::van_der_waals: {
      const double g = 1.0 - b * rho;
      return 2.0 * theta * b / (g * g * g) - 2.0 * a;
    }
    case Kind::custom: return horner(coefficients, rho - 1.0, 2);
  }
  return 0.0;
}

std::string PressureModel::name() const {
  switch (kind) {
    case Kind::critical_quadratic: return "critical_quadratic";
    case Kind::van_der_waals: return "van_der_waals";
    case Kind::custom: return "custom";
  }
  return "unknown";
}

PressureModel critical_quadratic(double c) {
  PressureModel p;
  p.kind = PressureModel::Kind::critical_quadratic;
  p.c = c;
  return p;
}

PressureModel van_der_waals(double a, double b) {
  return van_der_waals(a, b, 2.0 * a * (1.0 - b) * (1.0 - b));
}

PressureModel van_der_waals(double a, double b, double theta) {
  PressureModel p;
  p.kind = PressureModel::Kind::van_der_waals;
  p.a = a;
  p.b = b;
  p.theta = theta;
  if (b > 0.0) p.rho_max = 0.99 / b;
  return p;
}

PressureModel custom_polynomial(std::vector<double> coefficients) {
  PressureModel p;
  p.kind = PressureModel::Kind::custom;
  p.coefficients = std::move(coefficients);
  return p;
}

void validate(const PressureModel& p) {
  if (!(p.rho_min > 0.0 && p.rho_min < 1.0))
    throw Error(ErrorKind::InvalidParams, "rho_min must lie in (0, 1)");
  if (!(p.rho_max > 1.0)) throw Error(ErrorKind::InvalidParams, "rho_max must exceed 1");
  switch (p.kind) {
    case PressureModel::Kind::critical_quadratic:
      if (!std::isfinite(p.c)) throw Error(ErrorKind::InvalidParams, "pressure c not finite");
      break;
    case PressureModel::Kind::van_der_waals:
      if (!(p.b >= 0.0 && p.b < 1.0))
        throw Error(ErrorKind::InvalidParams, "van der Waals b must lie in [0, 1)");
      if (p.b > 0.0 && p.rho_max * p.b >= 1.0)
        throw Error(ErrorKind::InvalidParams, "rho_max reaches the co-volume singularity 1/b");
      if (!std::isfinite(p.a) || !std::isfinite(p.theta))
        throw Error(ErrorKind::InvalidParams, "van der Waals coefficients not finite");
      break;
    case PressureModel::Kind::custom:
      if (p.coefficients.empty())
        throw Error(ErrorKind::InvalidParams, "custom pressure needs coefficients");
      for (double v : p.coefficients)
        if (!std::isfinite(v)) throw Error(ErrorKind::InvalidParams, "custom coefficient not finite");
      break;
  }
  const double slope = p.dP(1.0);
  if (std::abs(slope) > 1e-12 && !p.allow_noncritical)
    throw Error(ErrorKind::InvalidParams,
                "P'(1) = " + std::to_string(slope) + " is not critical (set allow_noncritical)");
}

double PhysParams::K() const { return 2.0 * std::sqrt(kappa) / (nu + nu_tilde); }

void validate(const PhysParams& p) {
  if (!std::isfinite(p.nu) || !std::isfinite(p.nu_tilde) || !std::isfinite(p.kappa))
    throw Error(ErrorKind::InvalidParams, "non-finite viscosity or capillarity");
  if (!(p.nu > 0.0)) throw Error(ErrorKind::InvalidParams, "nu must be positive");
  if (!(p.kappa > 0.0)) throw Error(ErrorKind::InvalidParams, "kappa must be positive");
  if (!(p.nu + p.nu_tilde > 0.0))
    throw Error(ErrorKind::InvalidParams, "nu + nu_tilde must be positive");
  validate(p.pressure);
}

void validate(const PhysParams& p, int dim) {
  validate(p);
  if (p.nu_tilde < p.nu * (1.0 - 2.0 / dim) - 1e-15)
    throw Error(ErrorKind::InvalidParams, "nu_tilde below nu (1 - 2/n): negative bulk viscosity");
}

}  // namespace nsk
