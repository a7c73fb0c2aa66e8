#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <vector>

#include "cbrw/errors.hpp"
#include "cbrw/kernel.hpp"
#include "cbrw/point.hpp"

namespace cbrw {

// ---------------------------------------------------------------------------
// Transition probabilities p(t; 0, z) of the free walk.
//
// The exact periodic trapezoid rule on the torus grid theta_k = 2 pi k / N
// equals the periodized transition function:
//
//   (1/N^d) sum_k e^{t phi(theta_k)} cos(z . theta_k)
//       = sum_{w in Z^d} p(t; 0, z + N w),
//
// so the only quadrature error is aliased probability mass, which a Chernoff
// bound on each axis marginal controls. N per axis is grown until the bound
// meets the requested tolerance.
// ---------------------------------------------------------------------------

namespace detail {

inline double chernoff_axis_tail(const JumpKernel& kernel, int axis, double t, double s) {
  if (s <= 0) return 1.0;
  int zmax = kernel.max_abs_coord(axis);
  double lo = std::log(1e-3), hi = std::log(690.0 / std::max(1, zmax));
  double best = 1.0;
  for (int i = 0; i <= 200; ++i) {
    double u = std::exp(lo + (hi - lo) * i / 200.0);
    double e = t * kernel.axis_log_mgf(axis, u) - u * s;
    if (e < -745.0) return 0.0;
    best = std::min(best, std::exp(e));
  }
  return best;
}

inline int choose_axis_points(const JumpKernel& kernel, int axis, double t,
                              int max_abs_z, double axis_tol) {
  int n = std::max(8, 2 * (max_abs_z + kernel.max_abs_coord(axis)) + 4);
  n += n & 1;
  const int cap = 1 << 20;
  while (2.0 * chernoff_axis_tail(kernel, axis, t, double(n - max_abs_z)) > axis_tol) {
    n = n < 64 ? n + 8 : n + n / 2;
    n += n & 1;
    require(n <= cap, ErrorCode::ToleranceUnachievable,
            "transition quadrature grid exceeds cap");
  }
  return n;
}

// 1-d factor of an axis-separable kernel: values of p_axis(t; z) for each
// requested integer offset, one torus sum per axis.
inline void axis_transition(const std::map<int, double>& rates, double t, int n,
                            const std::vector<int>& zs, std::vector<double>& out) {
  out.assign(zs.size(), 0.0);
  double total = 0;
  for (const auto& [k, r] : rates) {
    (void)k;
    total += r;
  }
  for (int j = 0; j < n; ++j) {
    double theta = 2.0 * M_PI * j / n;
    double phi = -total;
    for (const auto& [k, r] : rates) phi += r * std::cos(k * theta);
    double w = std::exp(t * phi);
    for (size_t i = 0; i < zs.size(); ++i) out[i] += w * std::cos(zs[i] * theta);
  }
  for (double& v : out) v /= n;
}

}  // namespace detail

/// p(t; 0, z) for a batch of offsets; the returned err bound (optional) is
/// the certified aliasing bound. Values land in the order of `offsets`.
inline std::vector<double> transition_prob(const JumpKernel& kernel, double t,
                                           const std::vector<Point>& offsets,
                                           double tol = 1e-12,
                                           double* err_bound = nullptr) {
  require(t >= 0.0, ErrorCode::InvalidModel, "transition time must be >= 0");
  const int d = kernel.dim();
  std::vector<int> zmax(d, 0);
  for (const auto& z : offsets)
    for (int i = 0; i < d; ++i) zmax[i] = std::max(zmax[i], std::abs(z[i]));

  double axis_tol = tol / std::max(1, d);
  std::vector<int> n(d);
  double bound = 0;
  for (int i = 0; i < d; ++i) {
    n[i] = detail::choose_axis_points(kernel, i, t, zmax[i], axis_tol);
    bound += 2.0 * detail::chernoff_axis_tail(kernel, i, t, double(n[i] - zmax[i]));
  }
  if (err_bound) *err_bound = bound;

  std::vector<double> out(offsets.size(), 0.0);
  if (kernel.axis_separable()) {
    std::vector<std::vector<double>> axis_vals(d);
    std::vector<std::vector<int>> axis_zs(d);
    for (int i = 0; i < d; ++i) {
      for (const auto& z : offsets)
        if (std::find(axis_zs[i].begin(), axis_zs[i].end(), z[i]) == axis_zs[i].end())
          axis_zs[i].push_back(z[i]);
      detail::axis_transition(kernel.axis_rates(i), t, n[i], axis_zs[i], axis_vals[i]);
    }
    for (size_t o = 0; o < offsets.size(); ++o) {
      double v = 1.0;
      for (int i = 0; i < d; ++i) {
        size_t idx = std::find(axis_zs[i].begin(), axis_zs[i].end(), offsets[o][i]) -
                     axis_zs[i].begin();
        v *= axis_vals[i][idx];
      }
      out[o] = v;
    }
    return out;
  }

  long long cells = 1;
  for (int i = 0; i < d; ++i) {
    cells *= n[i];
    require(cells <= (1LL << 24), ErrorCode::ToleranceUnachievable,
            "non-separable kernel grid too large at this tolerance");
  }
  std::vector<long double> acc(offsets.size(), 0.0L);
  std::vector<int> idx(d, 0);
  std::vector<double> theta(d, 0.0);
  double inv_cells = 1.0;
  for (int i = 0; i < d; ++i) inv_cells /= n[i];
  for (long long c = 0; c < cells; ++c) {
    for (int i = 0; i < d; ++i) theta[i] = 2.0 * M_PI * idx[i] / n[i];
    double w = std::exp(t * kernel.phi(theta));
    for (size_t o = 0; o < offsets.size(); ++o)
      acc[o] += w * std::cos(dot(offsets[o], theta));
    for (int i = d - 1; i >= 0; --i) {
      if (++idx[i] < n[i]) break;
      idx[i] = 0;
    }
  }
  for (size_t o = 0; o < offsets.size(); ++o)
    out[o] = static_cast<double>(acc[o]) * inv_cells;
  return out;
}

/// p'(t; 0, z) through the forward generator identity
/// p'(t; 0, z) = a(0) p(t; 0, z) + sum_w a(w) p(t; 0, z - w); exact at t = 0.
inline std::vector<double> transition_prob_deriv(const JumpKernel& kernel, double t,
                                                 const std::vector<Point>& offsets,
                                                 double tol = 1e-12,
                                                 double* err_bound = nullptr) {
  std::vector<Point> batch;
  auto push_unique = [&batch](const Point& p) {
    if (std::find(batch.begin(), batch.end(), p) == batch.end()) batch.push_back(p);
  };
  for (const auto& z : offsets) {
    push_unique(z);
    for (const auto& e : kernel.support()) push_unique(sub(z, e.offset));
  }
  double scale = 2.0 * kernel.total_rate() + 1.0;
  double perr = 0;
  auto pvals = transition_prob(kernel, t, batch, tol / scale, &perr);
  auto lookup = [&](const Point& p) {
    return pvals[std::find(batch.begin(), batch.end(), p) - batch.begin()];
  };
  std::vector<double> out;
  out.reserve(offsets.size());
  for (const auto& z : offsets) {
    double v = -kernel.total_rate() * lookup(z);
    for (const auto& e : kernel.support()) v += e.rate * lookup(sub(z, e.offset));
    out.push_back(v);
  }
  if (err_bound) *err_bound = perr * scale;
  return out;
}

// ---------------------------------------------------------------------------
// Heat-kernel constants of the local limit:
//   p(t;x,y) ~ gamma_d / t^{d/2},
//   p(t;0,0) - p(t;x,y) ~ gamma_tilde_d(y-x) / t^{d/2+1}.
// ---------------------------------------------------------------------------

struct HeatKernelConstants {
  double gamma;                        // ((2 pi)^d |det B|)^{-1/2}
  Eigen::MatrixXd hessian;             // B = phi''(0)
  Eigen::MatrixXd neg_hessian_inverse; // (-B)^{-1}

  /// gamma_tilde(z) = gamma * (z, (-B)^{-1} z) / 2 in closed Gaussian form.
  double tilde(const Point& z) const {
    Eigen::VectorXd v(z.size());
    for (size_t i = 0; i < z.size(); ++i) v(static_cast<int>(i)) = z[i];
    return gamma * v.dot(neg_hessian_inverse * v) / 2.0;
  }
};

inline HeatKernelConstants heat_kernel_constants(const JumpKernel& kernel) {
  require(kernel.det_neg_hessian() > 0, ErrorCode::SingularHessian,
          "Hessian is not negative definite");
  HeatKernelConstants c;
  c.hessian = kernel.hessian();
  c.neg_hessian_inverse = kernel.neg_hessian_inverse();
  c.gamma = 1.0 / std::sqrt(std::pow(2.0 * M_PI, kernel.dim()) * kernel.det_neg_hessian());
  return c;
}

}  // namespace cbrw
