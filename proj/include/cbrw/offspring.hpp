#pragma once

#include <cmath>
#include <cstdint>
#include <cstring>
#include <string>
#include <vector>

#include "cbrw/errors.hpp"
#include "cbrw/point.hpp"

namespace cbrw {

/// Offspring distribution of the branching event at the catalyst.
///
/// Three representations are supported: a finite table [f_0,...,f_K],
/// geometric f_k = (1-r) r^k, and Poisson(lambda). Infinite-support laws
/// expose closed-form pgf/moments; enumeration and sampling truncate at the
/// quantile of level 1 - 1e-15.
class OffspringLaw {
 public:
  enum class Kind { Table, Geometric, Poisson };

  static OffspringLaw table(std::vector<double> probs) {
    require(!probs.empty(), ErrorCode::InvalidModel, "offspring table is empty");
    double sum = 0;
    for (double p : probs) {
      require(p >= 0.0, ErrorCode::InvalidModel, "offspring probabilities must be nonnegative");
      sum += p;
    }
    require(std::abs(sum - 1.0) <= 1e-12, ErrorCode::InvalidModel,
            "offspring probabilities must sum to 1 (got " + std::to_string(sum) + ")");
    while (probs.size() > 1 && probs.back() == 0.0) probs.pop_back();
    OffspringLaw law;
    law.kind_ = Kind::Table;
    law.table_ = std::move(probs);
    law.build_cdf();
    return law;
  }

  static OffspringLaw geometric(double r) {
    require(r > 0.0 && r < 1.0, ErrorCode::InvalidModel,
            "geometric parameter must lie in (0,1)");
    OffspringLaw law;
    law.kind_ = Kind::Geometric;
    law.r_ = r;
    law.build_cdf();
    return law;
  }

  static OffspringLaw poisson(double lambda) {
    require(lambda > 0.0, ErrorCode::InvalidModel, "poisson rate must be positive");
    OffspringLaw law;
    law.kind_ = Kind::Poisson;
    law.lambda_ = lambda;
    law.build_cdf();
    return law;
  }

  Kind kind() const { return kind_; }
  const std::vector<double>& table_probs() const { return table_; }
  double geometric_r() const { return r_; }
  double poisson_lambda() const { return lambda_; }

  /// f(s) = E s^xi on [0,1].
  double pgf(double s) const {
    switch (kind_) {
      case Kind::Table: {
        double v = 0;
        for (size_t k = table_.size(); k-- > 0;) v = v * s + table_[k];
        return v;
      }
      case Kind::Geometric:
        return (1.0 - r_) / (1.0 - r_ * s);
      case Kind::Poisson:
        return std::exp(lambda_ * (s - 1.0));
    }
    return 0;
  }

  /// f'(s).
  double pgf_derivative(double s) const {
    switch (kind_) {
      case Kind::Table: {
        double v = 0;
        for (size_t k = table_.size(); k-- > 1;) v = v * s + k * table_[k];
        return v;
      }
      case Kind::Geometric: {
        double d = 1.0 - r_ * s;
        return (1.0 - r_) * r_ / (d * d);
      }
      case Kind::Poisson:
        return lambda_ * std::exp(lambda_ * (s - 1.0));
    }
    return 0;
  }

  /// E xi = f'(1).
  double mean() const {
    switch (kind_) {
      case Kind::Table: {
        double m = 0;
        for (size_t k = 1; k < table_.size(); ++k) m += double(k) * table_[k];
        return m;
      }
      case Kind::Geometric:
        return r_ / (1.0 - r_);
      case Kind::Poisson:
        return lambda_;
    }
    return 0;
  }

  /// E xi(xi-1) = f''(1).
  double second_factorial() const {
    switch (kind_) {
      case Kind::Table: {
        double m = 0;
        for (size_t k = 2; k < table_.size(); ++k) m += double(k) * double(k - 1) * table_[k];
        return m;
      }
      case Kind::Geometric: {
        double q = r_ / (1.0 - r_);
        return 2.0 * q * q;
      }
      case Kind::Poisson:
        return lambda_ * lambda_;
    }
    return 0;
  }

  double pmf(int k) const {
    if (k < 0) return 0;
    switch (kind_) {
      case Kind::Table:
        return k < static_cast<int>(table_.size()) ? table_[k] : 0.0;
      case Kind::Geometric:
        return (1.0 - r_) * std::pow(r_, k);
      case Kind::Poisson:
        return std::exp(-lambda_ + k * std::log(lambda_) - std::lgamma(k + 1.0));
    }
    return 0;
  }

  /// Largest k kept by enumeration/sampling; covers all but 1e-15 of mass.
  int max_support() const { return static_cast<int>(cdf_.size()) - 1; }

  /// Inverse CDF; the coupling-friendly sampling route.
  int quantile(double u) const {
    // cdf_ is nondecreasing and ends >= 1 - 1e-15; clamp into its range.
    int lo = 0, hi = static_cast<int>(cdf_.size()) - 1;
    if (u <= cdf_[0]) return 0;
    if (u > cdf_[hi]) return hi;
    while (hi - lo > 1) {
      int mid = (lo + hi) / 2;
      if (cdf_[mid] >= u)
        hi = mid;
      else
        lo = mid;
    }
    return hi;
  }

  uint64_t hash() const {
    uint64_t h = 0x9e3779b97f4a7c15ULL ^ static_cast<uint64_t>(kind_);
    auto mix_double = [&h](double x) {
      uint64_t bits;
      static_assert(sizeof(bits) == sizeof(x));
      std::memcpy(&bits, &x, sizeof(bits));
      h = hash_combine(h, bits);
    };
    switch (kind_) {
      case Kind::Table:
        for (double p : table_) mix_double(p);
        break;
      case Kind::Geometric:
        mix_double(r_);
        break;
      case Kind::Poisson:
        mix_double(lambda_);
        break;
    }
    return h;
  }

 private:
  OffspringLaw() = default;

  void build_cdf() {
    cdf_.clear();
    const double cap = 1.0 - 1e-15;
    double acc = 0;
    int k = 0;
    int limit = kind_ == Kind::Table ? static_cast<int>(table_.size()) - 1 : 1 << 20;
    for (;; ++k) {
      acc += pmf(k);
      cdf_.push_back(acc);
      if (kind_ == Kind::Table && k >= limit) break;
      if (kind_ != Kind::Table && acc >= cap) break;
      require(k < limit, ErrorCode::NonconvergentSeries,
              "offspring CDF truncation did not converge");
    }
  }

  Kind kind_ = Kind::Table;
  std::vector<double> table_;
  double r_ = 0;
  double lambda_ = 0;
  std::vector<double> cdf_;
};

}  // namespace cbrw
