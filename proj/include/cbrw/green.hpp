#pragma once

#include <cmath>
#include <functional>
#include <map>
#include <vector>

#include "cbrw/errors.hpp"
#include "cbrw/kernel.hpp"
#include "cbrw/lattice.hpp"
#include "cbrw/model.hpp"
#include "cbrw/point.hpp"

namespace cbrw {

namespace detail {

// One dyadic annulus [-c,c]^d \ [-c/2,c/2]^d by composite midpoint with a
// two-level Richardson ladder (m = 16, 32, 64). The integrand is smooth on
// the closed annulus, so the even error expansion applies after rescaling.
inline double annulus_value(int d, const std::function<double(const std::vector<double>&)>& f,
                            double c, double* rich_err) {
  auto midpoint = [&](int m) {
    double h = 2.0 * c / m;
    int lo = m / 4, hi = 3 * m / 4;
    std::vector<int> idx(d, 0);
    std::vector<double> theta(d, 0.0);
    long double sum = 0.0L;
    long long cells = 1;
    for (int i = 0; i < d; ++i) cells *= m;
    for (long long cell = 0; cell < cells; ++cell) {
      bool inner = true;
      for (int i = 0; i < d; ++i)
        if (idx[i] < lo || idx[i] >= hi) {
          inner = false;
          break;
        }
      if (!inner) {
        for (int i = 0; i < d; ++i) theta[i] = -c + (idx[i] + 0.5) * h;
        sum += f(theta);
      }
      for (int i = d - 1; i >= 0; --i) {
        if (++idx[i] < m) break;
        idx[i] = 0;
      }
    }
    return static_cast<double>(sum) * std::pow(h, d);
  };
  double s16 = midpoint(16), s32 = midpoint(32), s64 = midpoint(64);
  double r1a = (4.0 * s32 - s16) / 3.0;
  double r1b = (4.0 * s64 - s32) / 3.0;
  double r2 = (16.0 * r1b - r1a) / 15.0;
  if (rich_err) *rich_err = std::abs(r2 - r1b);
  return r2;
}

/// Integral of f over [-pi,pi]^d for integrands that are smooth away from
/// the origin and at worst O(|theta|^{-2}) there: dyadic annuli toward 0,
/// each handled by midpoint + Richardson, with a geometric tail estimate.
inline double graded_box_integral(int d,
                                  const std::function<double(const std::vector<double>&)>& f,
                                  double abs_tol, double* err_out) {
  double total = 0, err = 0;
  double prev = 0;
  bool have_prev = false;
  const int min_levels = 6, max_levels = 60;
  for (int l = 0; l < max_levels; ++l) {
    double c = M_PI * std::pow(0.5, l);
    double rich = 0;
    double s = annulus_value(d, f, c, &rich);
    total += s;
    err += rich;
    if (have_prev && l >= min_levels && prev != 0.0) {
      double r = s / prev;
      if (r > 0.0 && r < 0.95) {
        double tail = s * r / (1.0 - r);
        if (std::abs(tail) <= abs_tol / 2.0) {
          total += tail;
          err += 0.5 * std::abs(tail);
          if (err_out) *err_out = err;
          return total;
        }
      }
    }
    prev = s;
    have_prev = true;
  }
  fail(ErrorCode::QuadratureFailure, "graded box integral did not reach tolerance");
}

// Torus trapezoid with N-doubling for lambda > 0. Separable kernels get
// per-axis tables of -phi_i so the inner loop is table adds; the batch of
// offsets shares one pass. Returns values in offset order; optionally the
// derivative d/dlambda at z of the first offset... (deriv handled by caller
// flag for z = 0 only, where it is needed).
struct TorusGreenResult {
  std::vector<double> values;
  double deriv_origin = 0;  // dG/dlambda at z = 0 when requested
  double err = 0;
  int points_per_axis = 0;
};

inline TorusGreenResult torus_green(const JumpKernel& kernel, double lambda,
                                    const std::vector<Point>& offsets, bool want_deriv,
                                    double rel_tol) {
  const int d = kernel.dim();
  TorusGreenResult res;
  std::vector<double> last_vals;
  double last_deriv = 0;
  const int n_cap = kernel.axis_separable() ? (d <= 2 ? (1 << 15) : (1 << 9))
                                            : (d <= 2 ? (1 << 12) : (1 << 8));
  for (int n = 64; n <= n_cap; n *= 2) {
    std::vector<long double> acc(offsets.size(), 0.0L);
    long double dacc = 0.0L;
    if (kernel.axis_separable()) {
      // per-axis tables: neg_phi_i[k] and per-offset axis phases
      std::vector<std::vector<double>> negphi(d, std::vector<double>(n));
      for (int i = 0; i < d; ++i) {
        const auto& rates = kernel.axis_rates(i);
        for (int k = 0; k < n; ++k) {
          double theta = 2.0 * M_PI * k / n;
          double v = 0;
          for (const auto& [off, r] : rates) v += r * (1.0 - std::cos(off * theta));
          negphi[i][k] = v;
        }
      }
      std::vector<std::vector<std::vector<double>>> cz(offsets.size()), sz(offsets.size());
      for (size_t o = 0; o < offsets.size(); ++o) {
        cz[o].assign(d, std::vector<double>(n));
        sz[o].assign(d, std::vector<double>(n));
        for (int i = 0; i < d; ++i)
          for (int k = 0; k < n; ++k) {
            double ang = offsets[o][i] * 2.0 * M_PI * k / n;
            cz[o][i][k] = std::cos(ang);
            sz[o][i][k] = std::sin(ang);
          }
      }
      std::vector<int> idx(d, 0);
      long long cells = 1;
      for (int i = 0; i < d; ++i) cells *= n;
      if (d == 2) {
        bool all_origin = true;
        for (const auto& z : offsets)
          if (!is_origin(z)) all_origin = false;
        for (int j = 0; j < n; ++j) {
          double u = negphi[0][j];
          if (all_origin) {
            long double row = 0.0L, drow = 0.0L;
            for (int k = 0; k < n; ++k) {
              double den = lambda + u + negphi[1][k];
              double inv = 1.0 / den;
              row += inv;
              if (want_deriv) drow += inv * inv;
            }
            acc[0] += row;
            dacc += drow;
          } else {
            for (int k = 0; k < n; ++k) {
              double inv = 1.0 / (lambda + u + negphi[1][k]);
              for (size_t o = 0; o < offsets.size(); ++o)
                acc[o] += inv * (cz[o][0][j] * cz[o][1][k] - sz[o][0][j] * sz[o][1][k]);
              if (want_deriv) dacc += inv * inv;
            }
          }
        }
        for (size_t o = 0; o < offsets.size() && all_origin; ++o) acc[o] = acc[0];
      } else {
        for (long long cell = 0; cell < cells; ++cell) {
          double neg_phi = 0;
          for (int i = 0; i < d; ++i) neg_phi += negphi[i][idx[i]];
          double inv = 1.0 / (lambda + neg_phi);
          for (size_t o = 0; o < offsets.size(); ++o) {
            double cr = 1.0, si = 0.0;
            for (int i = 0; i < d; ++i) {
              double c2 = cr * cz[o][i][idx[i]] - si * sz[o][i][idx[i]];
              si = cr * sz[o][i][idx[i]] + si * cz[o][i][idx[i]];
              cr = c2;
            }
            acc[o] += inv * cr;
          }
          if (want_deriv) dacc += inv * inv;
          for (int i = d - 1; i >= 0; --i) {
            if (++idx[i] < n) break;
            idx[i] = 0;
          }
        }
      }
      double scale = 1.0;
      for (int i = 0; i < d; ++i) scale /= n;
      std::vector<double> vals(offsets.size());
      for (size_t o = 0; o < offsets.size(); ++o)
        vals[o] = static_cast<double>(acc[o]) * scale;
      double deriv = -static_cast<double>(dacc) * scale;
      if (!last_vals.empty()) {
        double diff = 0;
        for (size_t o = 0; o < offsets.size(); ++o)
          diff = std::max(diff, std::abs(vals[o] - last_vals[o]) /
                                    std::max(1e-300, std::abs(vals[o])));
        if (want_deriv)
          diff = std::max(diff, std::abs(deriv - last_deriv) / std::max(1e-300, std::abs(deriv)));
        if (diff <= rel_tol) {
          res.values = vals;
          res.deriv_origin = deriv;
          res.err = diff;
          res.points_per_axis = n;
          return res;
        }
      }
      last_vals = vals;
      last_deriv = deriv;
    } else {
      std::vector<int> idx(d, 0);
      std::vector<double> theta(d, 0.0);
      long long cells = 1;
      for (int i = 0; i < d; ++i) cells *= n;
      if (cells > (1LL << 24)) break;
      for (long long cell = 0; cell < cells; ++cell) {
        for (int i = 0; i < d; ++i) theta[i] = 2.0 * M_PI * idx[i] / n;
        double inv = 1.0 / (lambda - kernel.phi(theta));
        for (size_t o = 0; o < offsets.size(); ++o)
          acc[o] += inv * std::cos(dot(offsets[o], theta));
        if (want_deriv) dacc += inv * inv;
        for (int i = d - 1; i >= 0; --i) {
          if (++idx[i] < n) break;
          idx[i] = 0;
        }
      }
      double scale = 1.0;
      for (int i = 0; i < d; ++i) scale /= n;
      std::vector<double> vals(offsets.size());
      for (size_t o = 0; o < offsets.size(); ++o)
        vals[o] = static_cast<double>(acc[o]) * scale;
      double deriv = -static_cast<double>(dacc) * scale;
      if (!last_vals.empty()) {
        double diff = 0;
        for (size_t o = 0; o < offsets.size(); ++o)
          diff = std::max(diff, std::abs(vals[o] - last_vals[o]) /
                                    std::max(1e-300, std::abs(vals[o])));
        if (want_deriv)
          diff = std::max(diff, std::abs(deriv - last_deriv) / std::max(1e-300, std::abs(deriv)));
        if (diff <= rel_tol) {
          res.values = vals;
          res.deriv_origin = deriv;
          res.err = diff;
          res.points_per_axis = n;
          return res;
        }
      }
      last_vals = vals;
      last_deriv = deriv;
    }
  }
  fail(ErrorCode::ToleranceUnachievable, "Green quadrature did not converge before grid cap");
}

}  // namespace detail

/// G_lambda(0, z) = (2 pi)^{-d} int cos(z.theta) / (lambda - phi(theta)) dtheta.
/// lambda = 0 is allowed only for d >= 3 (transient walk); the integrable
/// singularity there is handled by the graded annuli scheme.
inline std::vector<double> green(const JumpKernel& kernel, double lambda,
                                 const std::vector<Point>& offsets,
                                 double tol = 1e-9, double* err_out = nullptr) {
  require(lambda >= 0.0, ErrorCode::InvalidModel, "lambda must be >= 0");
  const int d = kernel.dim();
  if (lambda == 0.0) {
    require(d >= 3, ErrorCode::DivergentGreen,
            "G_0 diverges for recurrent walks (d <= 2)");
    std::vector<double> out;
    double total_err = 0;
    double norm = std::pow(2.0 * M_PI, -d);
    for (const auto& z : offsets) {
      double e = 0;
      double v = detail::graded_box_integral(
          d,
          [&](const std::vector<double>& theta) {
            return std::cos(dot(z, theta)) / (-kernel.phi(theta));
          },
          tol / norm, &e);
      out.push_back(v * norm);
      total_err += e * norm;
    }
    if (err_out) *err_out = total_err;
    return out;
  }
  auto res = detail::torus_green(kernel, lambda, offsets, false, tol);
  if (err_out) *err_out = res.err;
  return res.values;
}

struct GreenOrigin {
  double value;  // G_lambda(0,0)
  double deriv;  // G'_lambda(0,0)
};

/// G and dG/dlambda at the origin in one pass; used by the Laplace-domain
/// mean transform and its derivative.
inline GreenOrigin green_origin_with_derivative(const JumpKernel& kernel, double lambda,
                                                double rel_tol = 1e-7) {
  require(lambda > 0.0, ErrorCode::DivergentGreen, "derivative pass needs lambda > 0");
  auto res = detail::torus_green(kernel, lambda, {origin(kernel.dim())}, true, rel_tol);
  return {res.values[0], res.deriv_origin};
}

/// D(z) = lim_{lambda->0} (G_lambda(0,0) - G_lambda(0,z))
///      = (2 pi)^{-d} int (1 - cos(z.theta)) / (-phi(theta)) dtheta,
/// finite in every dimension.
inline double green_difference_limit(const JumpKernel& kernel, const Point& z,
                                     double tol = 1e-10, double* err_out = nullptr) {
  require(!is_origin(z), ErrorCode::InvalidModel, "D(0) = 0; request a nonzero offset");
  const int d = kernel.dim();
  double norm = std::pow(2.0 * M_PI, -d);
  double e = 0;
  double v = detail::graded_box_integral(
      d,
      [&](const std::vector<double>& theta) {
        double num = 1.0 - std::cos(dot(z, theta));
        return num / (-kernel.phi(theta));
      },
      tol / norm, &e);
  if (err_out) *err_out = e * norm;
  return v * norm;
}

/// h_d: probability that the walk, having left the origin, never returns.
/// Zero for d <= 2; (a G_0(0,0))^{-1} for d >= 3.
inline double escape_probability(const JumpKernel& kernel) {
  if (kernel.dim() <= 2) return 0.0;
  double g0 = green(kernel, 0.0, {origin(kernel.dim())}, 1e-9)[0];
  return 1.0 / (kernel.total_rate() * g0);
}

/// rho_d(z): 1 at the origin, (1-alpha)/a - beta D(z) elsewhere. Strict
/// positivity is the subcriticality premise and is enforced.
inline double rho(const CbrwModel& model, const Point& z) {
  if (is_origin(z)) return 1.0;
  double v = (1.0 - model.alpha) / model.kernel.total_rate() -
             model.beta() * green_difference_limit(model.kernel, z);
  require(v > 0.0, ErrorCode::NonpositiveRho,
          "rho(" + point_to_string(z) + ") <= 0: model is not subcritical");
  return v;
}

}  // namespace cbrw
