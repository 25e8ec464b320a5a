#pragma once

// One entry point for all estimators, plus a flat parameter-vector view used
// by the bootstrap and the Monte Carlo runner.

#include <string>
#include <variant>
#include <vector>

#include "singlerisk/estimators.hpp"

namespace singlerisk {

struct FitConfig {
  Method method = Method::three_stage_aft;
  Family family = Family::weibull;
  TauGrid grid;
  CriterionOptions options;
};

using FitResult = std::variant<FitResult3SE, FitResult2SE>;

inline FitResult run_fit(const Dataset& ds, const FitConfig& cfg) {
  switch (cfg.method) {
    case Method::three_stage_aft: return fit_3se(ds, ModelKind::aft, cfg.family, cfg.grid, cfg.options);
    case Method::three_stage_ph: return fit_3se(ds, ModelKind::ph, cfg.family, cfg.grid, cfg.options);
    case Method::two_stage: return fit_2se(ds, cfg.grid, cfg.options);
  }
  throw DomainError("unknown method");
}

// Parameter order: tau, alpha, beta_1..beta_k, sigma for 3SE; tau,
// beta_1..beta_k for 2SE.
inline std::vector<std::string> parameter_names(Method m, std::size_t k) {
  std::vector<std::string> names{"tau"};
  if (m != Method::two_stage) names.emplace_back("alpha");
  for (std::size_t j = 1; j <= k; ++j) names.push_back(k == 1 ? "beta" : "beta" + std::to_string(j));
  if (m != Method::two_stage) names.emplace_back("sigma");
  return names;
}

inline std::vector<double> parameter_vector(const FitResult& r) {
  if (const auto* a = std::get_if<FitResult3SE>(&r)) {
    std::vector<double> v{a->tau_hat, a->model.alpha};
    v.insert(v.end(), a->model.beta.begin(), a->model.beta.end());
    v.push_back(a->model.sigma);
    return v;
  }
  const auto& b = std::get<FitResult2SE>(r);
  std::vector<double> v{b.tau_hat};
  v.insert(v.end(), b.beta_hat.begin(), b.beta_hat.end());
  return v;
}

}  // namespace singlerisk
