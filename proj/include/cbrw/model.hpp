#pragma once

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <string>

#include "cbrw/errors.hpp"
#include "cbrw/kernel.hpp"
#include "cbrw/offspring.hpp"

namespace cbrw {

/// The full model: walk kernel, catalyst branching probability alpha,
/// offspring law, and the fractional-moment order delta used by the
/// survival analysis. Immutable after construction.
struct CbrwModel {
  JumpKernel kernel;
  double alpha;
  OffspringLaw offspring;
  double delta;

  CbrwModel(JumpKernel k, double a, OffspringLaw law, double d)
      : kernel(std::move(k)), alpha(a), offspring(std::move(law)), delta(d) {
    require(alpha > 0.0 && alpha < 1.0, ErrorCode::InvalidModel,
            "alpha must lie strictly between 0 and 1");
    require(delta > 0.0 && delta <= 1.0, ErrorCode::InvalidModel,
            "delta must lie in (0, 1]");
  }

  /// beta = alpha (f'(1) - 1); negative iff mean offspring below 1.
  double beta() const { return alpha * (offspring.mean() - 1.0); }

  uint64_t hash() const {
    uint64_t h = kernel.hash();
    h = hash_combine(h, offspring.hash());
    uint64_t bits;
    std::memcpy(&bits, &alpha, sizeof(bits));
    h = hash_combine(h, bits);
    std::memcpy(&bits, &delta, sizeof(bits));
    h = hash_combine(h, bits);
    return h;
  }
};

/// Phi(s) = alpha (f(1-s) - 1 + f'(1) s): nonnegative, nondecreasing, convex
/// on [0,1], with Phi(0) = Phi'(0) = 0. Drives the nonlinear survival
/// equation.
inline double phi_eval(const CbrwModel& model, double s) {
  require(s >= 0.0 && s <= 1.0, ErrorCode::InvalidModel, "Phi argument outside [0,1]");
  const auto& f = model.offspring;
  return model.alpha * (f.pgf(1.0 - s) - 1.0 + f.mean() * s);
}

enum class Regime { Subcritical, Critical, Supercritical };

inline const char* regime_name(Regime r) {
  switch (r) {
    case Regime::Subcritical: return "subcritical";
    case Regime::Critical: return "critical";
    case Regime::Supercritical: return "supercritical";
  }
  return "?";
}

struct RegimeReport {
  double threshold;       // 1 + h_d (1-alpha)/alpha
  double mean_offspring;  // f'(1)
  double escape_probability;
  Regime regime;
};

/// Compares E xi with the growth threshold 1 + h_d alpha^{-1}(1-alpha).
/// Ties within eps_crit (relative) are declared critical; eps_crit absorbs
/// the quadrature error of h_d.
inline RegimeReport classify_regime(const CbrwModel& model, double h_d,
                                    double eps_crit = 1e-10) {
  require(h_d >= 0.0 && h_d < 1.0, ErrorCode::InvalidModel, "h_d must lie in [0,1)");
  RegimeReport rep;
  rep.escape_probability = h_d;
  rep.threshold = 1.0 + h_d * (1.0 - model.alpha) / model.alpha;
  rep.mean_offspring = model.offspring.mean();
  double gap = rep.mean_offspring - rep.threshold;
  if (std::abs(gap) <= eps_crit * rep.threshold)
    rep.regime = Regime::Critical;
  else
    rep.regime = gap < 0 ? Regime::Subcritical : Regime::Supercritical;
  return rep;
}

/// E xi^{1+delta} by direct summation of k^{1+delta} f_k. For infinite
/// support the sum stops once a ratio-test tail bound drops below 1e-12 of
/// the partial sum; this routine is the oracle for the Klar route.
inline double fractional_moment_direct(const OffspringLaw& law, double delta) {
  require(delta > 0.0 && delta <= 1.0, ErrorCode::DeltaOutOfRange,
          "delta must lie in (0,1]");
  if (law.kind() == OffspringLaw::Kind::Table) {
    const auto& f = law.table_probs();
    double s = 0;
    for (size_t k = 1; k < f.size(); ++k) s += std::pow(double(k), 1.0 + delta) * f[k];
    return s;
  }
  double sum = law.pmf(0) * 0.0;
  const long kmax = 10'000'000;
  for (long k = 1; k <= kmax; ++k) {
    double term = std::pow(double(k), 1.0 + delta) * law.pmf(static_cast<int>(k));
    sum += term;
    // Upper bound on all later term ratios: pmf ratio times (1+1/k)^2.
    double growth = (1.0 + 1.0 / k) * (1.0 + 1.0 / k);
    double q = law.kind() == OffspringLaw::Kind::Geometric
                   ? law.geometric_r() * growth
                   : law.poisson_lambda() / (k + 1.0) * growth;
    if (q < 1.0 && term * q / (1.0 - q) <= 1e-12 * sum && sum > 0) return sum;
  }
  fail(ErrorCode::NonconvergentSeries, "fractional moment series did not meet tail target");
}

namespace detail {

/// e^{-x} - 1 + x, computed without cancellation for small x >= 0.
inline double expm1_plus(double x) {
  if (x < 0.02) {
    // x^2/2 (1 - x/3 + x^2/12 - x^3/60 + x^4/360): relative error < 1e-16.
    double c = 1.0 - x / 3.0 + x * x / 12.0 - x * x * x / 60.0 + x * x * x * x / 360.0;
    return 0.5 * x * x * c;
  }
  return std::expm1(-x) + x;
}

/// W(z) = int_0^z (e^{-u} - 1 + u) u^{-2-delta} du by alternating series;
/// valid for small z (terms z^n/n! scaled), error below first omitted term.
inline double head_primitive_series(double z, double delta) {
  double term = std::pow(z, 1.0 - delta) / (2.0 * (1.0 - delta));  // n = 2
  double sum = term;
  double zpow = std::pow(z, 1.0 - delta);
  double factorial = 2.0;
  double sign = 1.0;
  for (int n = 3; n < 60; ++n) {
    zpow *= z;
    factorial *= n;
    sign = -sign;
    double t = sign * zpow / (factorial * (double(n) - 1.0 - delta));
    sum += t;
    if (std::abs(t) < 1e-18 * std::abs(sum)) break;
  }
  return sum;
}

}  // namespace detail

/// E xi^{1+delta} for delta in (0,1) via the fractional-derivative identity
///
///   E xi^{1+delta} = d(1+d)/Gamma(1-d) *
///       int_0^inf [Phi(1 - e^{-v}) + alpha f'(1)(e^{-v} - 1 + v)] / (alpha v^{2+d}) dv,
///
/// whose integrand equals (f(e^{-v}) - 1 + f'(1) v) / v^{2+d}. The integral
/// is split into an atom-wise series head on [0, eps] (the direct evaluation
/// cancels catastrophically there), an adaptive Gauss-Kronrod body on
/// [eps, V] using the closed-form pgf, and an analytic tail beyond V.
inline double fractional_moment_klar(const CbrwModel& model, double delta,
                                     double rel_tol = 1e-8) {
  require(delta > 0.0 && delta < 1.0, ErrorCode::DeltaOutOfRange,
          "Klar integral requires delta in (0,1); use f''(1)+f'(1) at delta=1");
  const auto& law = model.offspring;
  const double eps = 0.01, V = 60.0;
  const double fp1 = law.mean();

  double head = 0;
  double head_err = 0;
  for (int k = 1; k <= law.max_support(); ++k) {
    double fk = law.pmf(k);
    if (fk == 0.0) continue;
    head += fk * std::pow(double(k), 1.0 + delta) *
            detail::head_primitive_series(k * eps, delta);
  }
  if (law.kind() != OffspringLaw::Kind::Table)
    head_err = 1e-14 * std::max(head, 1.0);  // mass beyond the 1e-15 quantile

  auto body_integrand = [&](double v) {
    double num = law.pgf(std::exp(-v)) - 1.0 + fp1 * v;
    return num / std::pow(v, 2.0 + delta);
  };
  double body_err = 0;
  double body = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
      body_integrand, eps, V, 12, 1e-12, &body_err);

  // Beyond V the pgf term is within alpha f'(1) e^{-v} of its limit Phi(1)/alpha.
  double phi1_over_alpha = law.pgf(0.0) - 1.0 + fp1;
  double tail = (phi1_over_alpha - fp1) * std::pow(V, -1.0 - delta) / (1.0 + delta) +
                fp1 * std::pow(V, -delta) / delta;
  double tail_err = 2.0 * fp1 * std::exp(-V) * std::pow(V, -2.0 - delta);

  double integral = head + body + tail;
  double err = head_err + body_err + tail_err;
  double prefactor = delta * (1.0 + delta) / std::tgamma(1.0 - delta);
  double value = prefactor * integral;
  require(err * prefactor <= std::max(rel_tol * std::abs(value), 1e-13),
          ErrorCode::QuadratureFailure,
          "fractional moment quadrature error " + std::to_string(err * prefactor) +
              " exceeds tolerance");
  return value;
}

/// E xi^2 from the pgf; the delta = 1 route.
inline double offspring_second_moment(const OffspringLaw& law) {
  return law.second_factorial() + law.mean();
}

/// K1 report: max of Phi(s)/s^{1+delta} over a log-spaced grid on (0,1].
inline double phi_power_ratio_max(const CbrwModel& model, double delta) {
  double k1 = 0;
  for (int i = 0; i <= 120; ++i) {
    double s = std::pow(10.0, -6.0 + 6.0 * i / 120.0);
    if (s > 1.0) s = 1.0;
    k1 = std::max(k1, phi_eval(model, s) / std::pow(s, 1.0 + delta));
  }
  return k1;
}

}  // namespace cbrw
