#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <map>
#include <numeric>
#include <vector>

#include "cbrw/errors.hpp"
#include "cbrw/point.hpp"

namespace cbrw {

struct KernelEntry {
  Point offset;
  double rate;
};

namespace detail {

// Index of the integer lattice spanned by `vectors` inside Z^d: 0 when the
// span has rank < d, otherwise |det| of a triangular basis obtained by
// integer column reduction. The support generates Z^d iff the index is 1.
inline uint64_t lattice_index(std::vector<std::vector<long long>> vectors, int d) {
  std::vector<std::vector<long long>> basis(d);
  for (auto& v : vectors) {
    for (int i = 0; i < d; ++i) {
      if (v[i] == 0) continue;
      if (basis[i].empty()) {
        basis[i] = v;
        break;
      }
      // Extended Euclid on coordinate i: replace basis[i] by a combination
      // with gcd coefficient, reduce v's i-th coordinate to zero.
      long long a = basis[i][i], b = v[i];
      long long x0 = 1, y0 = 0, x1 = 0, y1 = 1;
      while (b != 0) {
        long long q = a / b;
        long long t = a - q * b;
        a = b;
        b = t;
        t = x0 - q * x1;
        x0 = x1;
        x1 = t;
        t = y0 - q * y1;
        y0 = y1;
        y1 = t;
      }
      // a = gcd, achieved as x0*basis[i][i] + y0*v[i]; (x1, y1) spans the kernel.
      std::vector<long long> nb(d), nv(d);
      for (int j = 0; j < d; ++j) {
        nb[j] = x0 * basis[i][j] + y0 * v[j];
        nv[j] = x1 * basis[i][j] + y1 * v[j];
      }
      basis[i] = std::move(nb);
      v = std::move(nv);
    }
  }
  uint64_t index = 1;
  for (int i = 0; i < d; ++i) {
    if (basis[i].empty() || basis[i][i] == 0) return 0;
    index *= static_cast<uint64_t>(std::llabs(basis[i][i]));
  }
  return index;
}

}  // namespace detail

/// Validated jump-rate function of the walk: symmetric, conservative,
/// irreducible, finite support. Holds the derived spectral data used by the
/// Fourier quadratures: total jump rate a, Hessian B = phi''(0) (negative
/// definite) and its inverse.
class JumpKernel {
 public:
  /// Validates raw rates and builds the derived data; the diagonal entry
  /// a(0) = -sum a(z) is always derived, never supplied.
  static JumpKernel validate(const std::map<Point, double>& rates, int d) {
    require(d >= 1, ErrorCode::InvalidModel, "dimension must be >= 1");
    require(!rates.empty(), ErrorCode::EmptyKernel, "kernel has no jump rates");
    JumpKernel k;
    k.dim_ = d;
    for (const auto& [z, r] : rates) {
      require(static_cast<int>(z.size()) == d, ErrorCode::InvalidModel,
              "offset dimension mismatch at " + point_to_string(z));
      require(!is_origin(z), ErrorCode::InvalidModel,
              "kernel offsets must be nonzero (a(0) is derived)");
      require(r >= 0.0, ErrorCode::InvalidModel,
              "negative rate at offset " + point_to_string(z));
      if (r == 0.0) continue;
      auto it = rates.find(negated(z));
      require(it != rates.end() && it->second == r, ErrorCode::AsymmetricKernel,
              "a(z) != a(-z) at offset " + point_to_string(z));
      k.entries_.push_back({z, r});
    }
    require(!k.entries_.empty(), ErrorCode::EmptyKernel, "kernel has no positive rates");
    std::sort(k.entries_.begin(), k.entries_.end(),
              [](const KernelEntry& a, const KernelEntry& b) { return a.offset < b.offset; });

    k.total_rate_ = 0;
    for (const auto& e : k.entries_) k.total_rate_ += e.rate;

    std::vector<std::vector<long long>> support;
    for (const auto& e : k.entries_)
      support.emplace_back(e.offset.begin(), e.offset.end());
    require(detail::lattice_index(std::move(support), d) == 1, ErrorCode::ReducibleKernel,
            "kernel support does not generate Z^d");

    // B_ij = -sum_z a(z) z_i z_j; irreducibility makes -B positive definite.
    k.hessian_ = Eigen::MatrixXd::Zero(d, d);
    for (const auto& e : k.entries_)
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
          k.hessian_(i, j) -= e.rate * e.offset[i] * e.offset[j];
    Eigen::LLT<Eigen::MatrixXd> llt(-k.hessian_);
    require(llt.info() == Eigen::Success, ErrorCode::SingularHessian,
            "B = phi''(0) is not negative definite");
    k.neg_hessian_inverse_ = llt.solve(Eigen::MatrixXd::Identity(d, d));
    k.det_neg_hessian_ = (-k.hessian_).determinant();

    for (int i = 0; i < d; ++i) {
      int m = 0;
      for (const auto& e : k.entries_) m = std::max(m, std::abs(e.offset[i]));
      k.max_abs_coord_.push_back(m);
    }

    // Axis-separable kernels (every offset along a coordinate axis) admit a
    // product factorization of p(t; 0, z); detect once here.
    k.axis_separable_ = true;
    k.axis_rates_.assign(d, {});
    for (const auto& e : k.entries_) {
      int nonzero_axis = -1;
      for (int i = 0; i < d; ++i) {
        if (e.offset[i] != 0) {
          if (nonzero_axis >= 0) {
            nonzero_axis = -2;
            break;
          }
          nonzero_axis = i;
        }
      }
      if (nonzero_axis < 0) {
        k.axis_separable_ = false;
        break;
      }
      k.axis_rates_[nonzero_axis][e.offset[nonzero_axis]] = e.rate;
    }
    if (!k.axis_separable_) k.axis_rates_.clear();
    return k;
  }

  int dim() const { return dim_; }
  /// a = -a(0), the total jump rate off any site.
  double total_rate() const { return total_rate_; }
  double generator_diagonal() const { return -total_rate_; }
  const std::vector<KernelEntry>& support() const { return entries_; }
  const Eigen::MatrixXd& hessian() const { return hessian_; }
  const Eigen::MatrixXd& neg_hessian_inverse() const { return neg_hessian_inverse_; }
  double det_neg_hessian() const { return det_neg_hessian_; }
  int max_abs_coord(int axis) const { return max_abs_coord_[axis]; }
  bool axis_separable() const { return axis_separable_; }
  const std::map<int, double>& axis_rates(int axis) const { return axis_rates_[axis]; }

  double rate_of(const Point& z) const {
    for (const auto& e : entries_)
      if (e.offset == z) return e.rate;
    return 0.0;
  }

  /// phi(theta) = sum_z a(z) cos(z . theta), including the a(0) term; <= 0.
  double phi(const std::vector<double>& theta) const {
    double s = -total_rate_;
    for (const auto& e : entries_) s += e.rate * std::cos(dot(e.offset, theta));
    return s;
  }

  /// Marginal log-MGF of axis i per unit time: sum_z a(z)(cosh(u z_i) - 1).
  double axis_log_mgf(int axis, double u) const {
    double s = 0;
    for (const auto& e : entries_)
      if (e.offset[axis] != 0) s += e.rate * (std::cosh(u * e.offset[axis]) - 1.0);
    return s;
  }

  JumpKernel scaled(double c) const {
    require(c > 0.0, ErrorCode::InvalidModel, "rate scale must be positive");
    std::map<Point, double> r;
    for (const auto& e : entries_) r[e.offset] = c * e.rate;
    return validate(r, dim_);
  }

  uint64_t hash() const {
    uint64_t h = 0x84222325cbf29ce4ULL ^ static_cast<uint64_t>(dim_);
    for (const auto& e : entries_) {
      h = hash_combine(h, point_hash(e.offset));
      uint64_t bits;
      std::memcpy(&bits, &e.rate, sizeof(bits));
      h = hash_combine(h, bits);
    }
    return h;
  }

 private:
  int dim_ = 0;
  std::vector<KernelEntry> entries_;
  double total_rate_ = 0;
  Eigen::MatrixXd hessian_;
  Eigen::MatrixXd neg_hessian_inverse_;
  double det_neg_hessian_ = 0;
  std::vector<int> max_abs_coord_;
  bool axis_separable_ = false;
  std::vector<std::map<int, double>> axis_rates_;
};

}  // namespace cbrw
