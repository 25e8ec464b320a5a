#pragma once

// Copula-graphic estimator of the latent marginal survival of the cause of
// interest, given the overall survivor function and the cause's
// sub-distribution within a stratum:
//
//   S_theta(x) = phi[ -sum_{event times u <= x} (phi^-1)'(pi(u-)) * dF(u) ].
//
// The integrand is taken at the left limit pi(u-), so events tied with
// censorings at u see the censored units still at risk.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <sstream>
#include <vector>

#include "singlerisk/copula.hpp"
#include "singlerisk/data.hpp"
#include "singlerisk/error.hpp"
#include "singlerisk/step_function.hpp"

namespace singlerisk {

// Theta-independent ingredients of the estimator: one entry per event time.
struct CgeJumps {
  std::vector<double> times;
  std::vector<double> pi_left;
  std::vector<double> mass;

  static CgeJumps from(const StepFunction& pi_hat, const StepFunction& sub_dist) {
    CgeJumps j;
    const auto t = sub_dist.jump_times();
    const auto v = sub_dist.values();
    j.times.assign(t.begin(), t.end());
    j.pi_left.reserve(t.size());
    j.mass.reserve(t.size());
    double prev = sub_dist.initial_value();
    for (std::size_t i = 0; i < t.size(); ++i) {
      j.pi_left.push_back(pi_hat.left_limit(t[i]));
      j.mass.push_back(v[i] - prev);
      prev = v[i];
    }
    return j;
  }
};

struct CgeCurve {
  StepFunction curve;
  double theta = 0.0;

  double operator()(double t) const { return curve(t); }
};

template <ArchimedeanGenerator G>
CgeCurve copula_graphic(const CgeJumps& jumps, const G& gen) {
  std::vector<double> values;
  values.reserve(jumps.times.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < jumps.times.size(); ++i) {
    const double p = jumps.pi_left[i];
    if (!(p > 0.0)) {
      std::ostringstream msg;
      msg << "overall survival is zero just before event time " << jumps.times[i]
          << "; the copula-graphic integrand diverges";
      throw NumericError(msg.str());
    }
    sum += -gen.generator_inverse_deriv(p) * jumps.mass[i];
    values.push_back(std::isnan(sum) ? 0.0 : gen.generator(sum));
  }
  return {StepFunction(1.0, jumps.times, std::move(values)), static_cast<double>(gen.theta())};
}

template <ArchimedeanGenerator G>
CgeCurve copula_graphic(const StepFunction& pi_hat, const StepFunction& sub_dist, const G& gen) {
  return copula_graphic(CgeJumps::from(pi_hat, sub_dist), gen);
}

inline CgeCurve copula_graphic(const StepFunction& pi_hat, const StepFunction& sub_dist, double theta) {
  return copula_graphic(pi_hat, sub_dist, ClaytonCopula(theta));
}

inline double evaluate(const CgeCurve& curve, double t) {
  if (!(t >= 0.0)) throw DomainError("curve lookup needs t >= 0");
  return curve(t);
}

// Support restriction for the semiparametric criterion. Beyond x_star some
// stratum's curve has stopped decreasing (no further cause-1 events, or it
// has reached zero); below x_double_star some stratum's curve is still 1.
struct TrimBounds {
  double x_star = 0.0;
  double x_double_star = 0.0;
  std::vector<std::size_t> kept;
};

inline TrimBounds trim_support(std::span<const CgeCurve> curves, const StrataIndex& strata, const Dataset& ds) {
  if (curves.size() != strata.size()) throw DomainError("one curve per stratum is required");
  TrimBounds out;
  out.x_star = std::numeric_limits<double>::infinity();
  out.x_double_star = 0.0;
  for (std::size_t s = 0; s < curves.size(); ++s) {
    const auto t = curves[s].curve.jump_times();
    const auto v = curves[s].curve.values();
    std::ptrdiff_t first_below_one = -1, last_positive_drop = -1;
    double prev = curves[s].curve.initial_value();
    for (std::size_t i = 0; i < t.size(); ++i) {
      if (first_below_one < 0 && v[i] < 1.0) first_below_one = static_cast<std::ptrdiff_t>(i);
      if (v[i] < prev && v[i] > 0.0) last_positive_drop = static_cast<std::ptrdiff_t>(i);
      prev = v[i];
    }
    if (first_below_one < 0 || last_positive_drop < 0)
      throw IdentificationError("stratum " + std::to_string(s) +
                                " has no cause-1 events; its latent survival curve is flat");
    out.x_double_star = std::max(out.x_double_star, t[static_cast<std::size_t>(first_below_one)]);
    out.x_star = std::min(out.x_star, t[static_cast<std::size_t>(last_positive_drop)]);
  }
  for (std::size_t i = 0; i < ds.size(); ++i)
    if (ds.x(i) >= out.x_double_star && ds.x(i) <= out.x_star) out.kept.push_back(i);
  if (out.kept.empty())
    throw IdentificationError("support trimming left no observations: strata event supports do not overlap");
  return out;
}

}  // namespace singlerisk
