#pragma once

// Parametric marginal duration models.
//
// AFT form: log([alpha * t * exp(z'beta)]^sigma) = W with W having a known
// survival function S_W, so S(t|z) = S_W(sigma * (log alpha + log t + z'beta)).
// PH form: S(t|z) = exp(-Lambda0(t; alpha, sigma) * exp(z'beta)), Lambda0 the
// z = 0 cumulative hazard of the chosen family.

#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "singlerisk/error.hpp"

namespace singlerisk {

enum class Family { exponential, weibull, loglogistic, lognormal };

inline std::string_view to_string(Family f) {
  switch (f) {
    case Family::exponential: return "exponential";
    case Family::weibull: return "weibull";
    case Family::loglogistic: return "loglogistic";
    case Family::lognormal: return "lognormal";
  }
  return "?";
}

inline std::optional<Family> parse_family(std::string_view s) {
  if (s == "exponential" || s == "expo") return Family::exponential;
  if (s == "weibull" || s == "weib") return Family::weibull;
  if (s == "loglogistic" || s == "llog") return Family::loglogistic;
  if (s == "lognormal" || s == "lnorm") return Family::lognormal;
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Standard normal helpers.

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// Upper tail 1 - Phi(x) without cancellation.
inline double normal_sf(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }

inline double normal_pdf(double x) {
  constexpr double kInvSqrt2Pi = 0.398942280401432677939946059934;
  return kInvSqrt2Pi * std::exp(-0.5 * x * x);
}

// Acklam's rational approximation followed by one Halley step against erfc.
inline double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw DomainError("normal quantile needs p in (0,1)");
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
                                 1.383577518672690e+02,  -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
                                 6.680131188771972e+01,  -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
                                 -2.549732539343734e+00, 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
                                 3.754408661907416e+00};
  constexpr double kLow = 0.02425;
  double x;
  if (p < kLow) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - kLow) {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log1p(-p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  // Refine in whichever tail keeps the residual well conditioned.
  const double e = p < 0.5 ? normal_cdf(x) - p : (1.0 - p) - normal_sf(x);
  const double u = e / normal_pdf(x);
  return x - u / (1.0 + 0.5 * x * u);
}

// ---------------------------------------------------------------------------
// Error distributions S_W of the AFT families.

// S_W(w). Exponential and Weibull share the extreme-value law.
inline double sw(Family f, double w) {
  switch (f) {
    case Family::exponential:
    case Family::weibull: return std::exp(-std::exp(w));
    case Family::loglogistic: return 1.0 / (1.0 + std::exp(w));
    case Family::lognormal: return normal_sf(w);
  }
  return std::numeric_limits<double>::quiet_NaN();
}

// -log S_W(w), the cumulative hazard on the error scale.
inline double sw_cumhaz(Family f, double w) {
  switch (f) {
    case Family::exponential:
    case Family::weibull: return std::exp(w);
    case Family::loglogistic: return w > 30.0 ? w + std::log1p(std::exp(-w)) : std::log1p(std::exp(w));
    case Family::lognormal: return -std::log(normal_sf(w));
  }
  return std::numeric_limits<double>::quiet_NaN();
}

inline double sw_inverse(Family f, double s) {
  if (!(s > 0.0 && s < 1.0)) throw DomainError("S_W inverse needs s in (0,1), got " + std::to_string(s));
  switch (f) {
    case Family::exponential:
    case Family::weibull: return std::log(-std::log(s));
    case Family::loglogistic: return std::log1p(-s) - std::log(s);
    case Family::lognormal: return -normal_quantile(s);
  }
  return std::numeric_limits<double>::quiet_NaN();
}

// ---------------------------------------------------------------------------

struct AftModel {
  Family family = Family::weibull;
  double alpha = 1.0;
  std::vector<double> beta;
  double sigma = 1.0;

  void validate() const {
    if (!(alpha > 0.0) || !std::isfinite(alpha)) throw DomainError("AFT scale alpha must be positive");
    if (!(sigma > 0.0) || !std::isfinite(sigma)) throw DomainError("AFT shape sigma must be positive");
    if (family == Family::exponential && sigma != 1.0) throw DomainError("exponential model has sigma fixed at 1");
  }
};

struct PhModel {
  Family baseline = Family::weibull;
  double alpha = 1.0;
  std::vector<double> beta;
  double sigma = 1.0;

  void validate() const {
    if (!(alpha > 0.0) || !std::isfinite(alpha)) throw DomainError("PH scale alpha must be positive");
    if (!(sigma > 0.0) || !std::isfinite(sigma)) throw DomainError("PH shape sigma must be positive");
  }
};

inline double linear_predictor(std::span<const double> beta, std::span<const double> z) {
  if (beta.size() != z.size()) throw DomainError("beta and z differ in dimension");
  return std::inner_product(beta.begin(), beta.end(), z.begin(), 0.0);
}

// The AFT error-scale index sigma * log(alpha * t * exp(z'beta)).
inline double aft_index(const AftModel& m, double t, std::span<const double> z) {
  return m.sigma * (std::log(m.alpha) + std::log(t) + linear_predictor(m.beta, z));
}

inline double cumulative_hazard(const AftModel& m, double t, std::span<const double> z) {
  if (!(t >= 0.0)) throw DomainError("cumulative hazard needs t >= 0");
  if (t == 0.0) return 0.0;
  return sw_cumhaz(m.family, aft_index(m, t, z));
}

inline double survival(const AftModel& m, double t, std::span<const double> z) {
  if (!(t >= 0.0)) throw DomainError("survival needs t >= 0");
  if (t == 0.0) return 1.0;
  return sw(m.family, aft_index(m, t, z));
}

inline double inverse_survival(const AftModel& m, double u, std::span<const double> z) {
  if (!(u > 0.0 && u < 1.0)) throw DomainError("inverse survival needs u in (0,1)");
  const double w = sw_inverse(m.family, u);
  return std::exp(w / m.sigma - std::log(m.alpha) - linear_predictor(m.beta, z));
}

// Baseline (z = 0) cumulative hazard of a PH model.
inline double baseline_cumulative_hazard(const PhModel& m, double t) {
  if (!(t >= 0.0)) throw DomainError("cumulative hazard needs t >= 0");
  if (t == 0.0) return 0.0;
  return sw_cumhaz(m.baseline, m.sigma * (std::log(m.alpha) + std::log(t)));
}

inline double ph_survival(const PhModel& m, double t, std::span<const double> z) {
  if (!(t >= 0.0)) throw DomainError("survival needs t >= 0");
  if (t == 0.0) return 1.0;
  return std::exp(-baseline_cumulative_hazard(m, t) * std::exp(linear_predictor(m.beta, z)));
}

}  // namespace singlerisk
