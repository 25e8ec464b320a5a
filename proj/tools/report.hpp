#pragma once

// JSON views of fit, bootstrap and Monte Carlo results.

#include <json.hpp>

#include <string>
#include <variant>
#include <vector>

#include "singlerisk.hpp"

namespace singlerisk::report {

using Json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

inline Json trace_json(const std::vector<TracePoint>& trace) {
  Json out = Json::array();
  for (const auto& p : trace) {
    // Failed evaluations appear as null.
    out.push_back({{"tau", p.tau}, {"value", std::isnan(p.value) ? Json(nullptr) : Json(p.value)}});
  }
  return out;
}

inline Json fit_json(const FitResult3SE& r, Method m) {
  Json params = {{"family", to_string(r.model.family)},
                 {"alpha", r.model.alpha},
                 {"beta", r.model.beta},
                 {"sigma", r.model.sigma}};
  return {{"method", to_string(m)},
          {"tau_hat", r.tau_hat},
          {"theta_hat", r.theta_hat},
          {"params", params},
          {"objective", r.objective},
          {"trace", trace_json(r.trace)},
          {"diagnostics",
           {{"kept_n", r.kept_n},
            {"clamped_n", r.clamped_n},
            {"mean_difference", r.mean_difference},
            {"grid_failures", r.grid_failures}}}};
}

inline Json fit_json(const FitResult2SE& r) {
  return {{"method", to_string(Method::two_stage)},
          {"tau_hat", r.tau_hat},
          {"theta_hat", r.theta_hat},
          {"params", {{"beta", r.beta_hat}}},
          {"objective", r.objective},
          {"trace", trace_json(r.trace)},
          {"diagnostics",
           {{"kept_n", r.kept_n},
            {"x_star", r.x_star},
            {"x_double_star", r.x_double_star},
            {"grid_failures", r.grid_failures}}}};
}

inline Json fit_json(const FitResult& r, Method m) {
  if (const auto* a = std::get_if<FitResult3SE>(&r)) return fit_json(*a, m);
  return fit_json(std::get<FitResult2SE>(r));
}

inline Json bootstrap_json(const BootstrapResult& b, const std::vector<std::string>& names) {
  Json params = Json::array();
  for (std::size_t j = 0; j < names.size(); ++j)
    params.push_back({{"name", names[j]},
                      {"estimate", b.point[j]},
                      {"se", b.se[j]},
                      {"ci_lower", b.ci[j].lower},
                      {"ci_upper", b.ci[j].upper}});
  return {{"replicates", b.requested},
          {"effective", b.effective()},
          {"failures", b.failures},
          {"level", b.level},
          {"parameters", params}};
}

inline Json mc_json(const McReport& r) {
  Json params = Json::array();
  for (const auto& p : r.parameters)
    params.push_back({{"name", p.name}, {"truth", p.truth}, {"mean", p.mean}, {"bias2", p.bias2}, {"mse", p.mse}});
  return {{"replications", r.requested},
          {"effective", r.effective()},
          {"failures", r.failures},
          {"ties", r.ties},
          {"parameters", params}};
}

}  // namespace singlerisk::report
