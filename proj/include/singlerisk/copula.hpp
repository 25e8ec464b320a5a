#pragma once

// Clayton Archimedean copula: generator, quasi-inverse, derivative of the
// inverse, Kendall's tau mapping and conditional inversion for sampling.
//
// Generator convention: phi(u) maps [0, inf) onto [0, 1] with phi(0) = 1, so
// the copula reads K(s, r) = phi(phi^-1(s) + phi^-1(r)).

#include <cmath>
#include <concepts>
#include <limits>
#include <string>

#include "singlerisk/error.hpp"

namespace singlerisk {

// Anything the copula-graphic estimator can be run with.
template <class G>
concept ArchimedeanGenerator = requires(const G& g, double x) {
  { g.theta() } -> std::convertible_to<double>;
  { g.generator(x) } -> std::convertible_to<double>;
  { g.generator_inverse(x) } -> std::convertible_to<double>;
  { g.generator_inverse_deriv(x) } -> std::convertible_to<double>;
};

namespace detail {

// Below this magnitude theta is treated as the independence limit.
inline constexpr double kThetaZeroBand = 1e-8;

inline double log_add_exp(double a, double b) {
  if (a < b) std::swap(a, b);
  if (b == -std::numeric_limits<double>::infinity()) return a;
  return a + std::log1p(std::exp(b - a));
}

}  // namespace detail

inline double tau_from_theta(double theta) {
  if (!(theta >= -1.0) || std::isinf(theta))
    throw DomainError("Clayton theta must lie in [-1, inf), got " + std::to_string(theta));
  return theta / (theta + 2.0);
}

inline double theta_from_tau(double tau) {
  if (!(tau >= -1.0 && tau < 1.0))
    throw DomainError("Kendall's tau must lie in [-1, 1), got " + std::to_string(tau));
  return 2.0 * tau / (1.0 - tau);
}

class ClaytonCopula {
 public:
  explicit ClaytonCopula(double theta) : theta_(theta) {
    if (!(theta >= -1.0) || !std::isfinite(theta))
      throw DomainError("Clayton theta must lie in [-1, inf), got " + std::to_string(theta));
  }

  static ClaytonCopula from_tau(double tau) { return ClaytonCopula(theta_from_tau(tau)); }

  double theta() const { return theta_; }
  double tau() const { return tau_from_theta(theta_); }
  bool independent() const { return std::abs(theta_) < detail::kThetaZeroBand; }

  // (1 + u*theta)_+^(-1/theta); exp(-u) at theta = 0.
  double generator(double u) const {
    if (!(u >= 0.0)) throw DomainError("generator argument must be >= 0, got " + std::to_string(u));
    if (independent()) return std::exp(-u);
    if (std::isinf(u)) return 0.0;
    const double base = 1.0 + u * theta_;
    if (base <= 0.0) return 0.0;
    return std::exp(-std::log1p(u * theta_) / theta_);
  }

  // (s^-theta - 1)/theta; -log(s) at theta = 0. Defined on (0, 1].
  double generator_inverse(double s) const {
    check_unit(s);
    const double ls = std::log(s);
    if (independent()) return -ls;
    return std::expm1(-theta_ * ls) / theta_;
  }

  // d/ds of the inverse: -s^-(theta+1).
  double generator_inverse_deriv(double s) const {
    check_unit(s);
    return -std::exp(-(theta_ + 1.0) * std::log(s));
  }

  // K(u, v).
  double cdf(double u, double v) const {
    if (u <= 0.0 || v <= 0.0) return 0.0;
    return generator(generator_inverse(std::min(u, 1.0)) + generator_inverse(std::min(v, 1.0)));
  }

  // dK/du, i.e. the conditional distribution of V given U = u.
  double cdf_du(double u, double v) const {
    if (v <= 0.0) return 0.0;
    if (v >= 1.0) return 1.0;
    if (independent()) return v;
    const double a = std::pow(u, -theta_);
    const double base = a + std::pow(v, -theta_) - 1.0;
    if (base <= 0.0) return 0.0;
    return std::pow(u, -theta_ - 1.0) * std::pow(base, -1.0 / theta_ - 1.0);
  }

  // Solves dK/du(u, v) = w for v. Closed form for theta > 0, bisection for
  // theta < 0.
  double conditional_v_given_u(double u, double w) const {
    if (!(u > 0.0 && u < 1.0) || !(w > 0.0 && w < 1.0))
      throw DomainError("conditional inversion needs u, w in (0,1)");
    if (independent()) return w;
    if (theta_ > 0.0) {
      // v^-theta = 1 + (w^(-theta/(1+theta)) - 1) * u^-theta, evaluated in logs
      // so that large theta does not overflow u^-theta.
      const double a = std::expm1(-theta_ / (1.0 + theta_) * std::log(w));
      const double log_term = std::log(a) - theta_ * std::log(u);
      return std::exp(-detail::log_add_exp(0.0, log_term) / theta_);
    }
    return bisect_conditional(u, w);
  }

 private:
  static void check_unit(double s) {
    if (!(s > 0.0 && s <= 1.0))
      throw DomainError("generator inverse needs s in (0,1], got " + std::to_string(s));
  }

  double bisect_conditional(double u, double w) const {
    constexpr double kTol = 1e-10;
    double lo = 0.0, hi = 1.0;
    if (!(cdf_du(u, lo) - w <= 0.0 && cdf_du(u, hi) - w >= 0.0))
      throw ConvergenceError("conditional inversion failed to bracket a root");
    for (int it = 0; it < 200 && hi - lo > kTol; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (cdf_du(u, mid) < w)
        lo = mid;
      else
        hi = mid;
    }
    if (hi - lo > kTol) throw ConvergenceError("conditional inversion did not converge");
    return 0.5 * (lo + hi);
  }

  double theta_;
};

static_assert(ArchimedeanGenerator<ClaytonCopula>);

}  // namespace singlerisk
