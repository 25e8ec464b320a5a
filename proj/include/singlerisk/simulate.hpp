#pragma once

// Competing-risks data from two AFT marginals linked by a Clayton survival
// copula, and a Monte Carlo runner reporting bias^2 and MSE.

#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "singlerisk/copula.hpp"
#include "singlerisk/data.hpp"
#include "singlerisk/error.hpp"
#include "singlerisk/fit.hpp"
#include "singlerisk/marginals.hpp"
#include "singlerisk/parallel.hpp"
#include "singlerisk/rng.hpp"

namespace singlerisk {

struct DgpSpec {
  double theta = 0.0;
  AftModel model_t{Family::weibull, 1.0, {1.0}, 1.5};
  AftModel model_c{Family::weibull, 1.0, {1.0}, 1.5};
  double p_z = 0.3;  // Pr(z = 1); z is coded {0, 1}
  std::size_t n = 2000;

  void validate() const {
    (void)ClaytonCopula(theta);
    model_t.validate();
    model_c.validate();
    if (model_t.beta.size() != 1 || model_c.beta.size() != 1)
      throw DomainError("the simulation design has one binary covariate");
    if (!(p_z > 0.0 && p_z < 1.0)) throw DomainError("covariate probability must lie in (0,1)");
    if (n < 2) throw DomainError("sample size must be at least 2");
  }
};

// (U, V) from the Clayton copula by conditional inversion.
inline std::pair<double, double> sample_pair(const ClaytonCopula& cop, Rng& rng) {
  const double u = rng.uniform();
  const double w = rng.uniform();
  return {u, cop.conditional_v_given_u(u, w)};
}

inline std::pair<double, double> sample_pair(double theta, Rng& rng) { return sample_pair(ClaytonCopula(theta), rng); }

struct LatentDraw {
  double t = 0.0;
  double c = 0.0;
  double z = 0.0;
};

// One unit: z first, then (U, V) = (S(T|z), R(C|z)).
inline LatentDraw draw_latent(const DgpSpec& spec, const ClaytonCopula& cop, Rng& rng) {
  LatentDraw d;
  d.z = rng.bernoulli(spec.p_z) ? 1.0 : 0.0;
  const auto [u, v] = sample_pair(cop, rng);
  const std::span<const double> z(&d.z, 1);
  d.t = inverse_survival(spec.model_t, u, z);
  d.c = inverse_survival(spec.model_c, v, z);
  return d;
}

struct SimulatedSample {
  Dataset data;
  std::size_t ties = 0;  // units with T == C, recorded as delta = 0
};

inline SimulatedSample generate_sample(const DgpSpec& spec, Rng& rng) {
  spec.validate();
  const ClaytonCopula cop(spec.theta);
  std::vector<double> x(spec.n), z(spec.n);
  std::vector<int> delta(spec.n);
  SimulatedSample out;
  for (std::size_t i = 0; i < spec.n; ++i) {
    const auto d = draw_latent(spec, cop, rng);
    x[i] = std::min(d.t, d.c);
    delta[i] = d.t < d.c ? 1 : 0;
    out.ties += d.t == d.c ? 1 : 0;
    z[i] = d.z;
  }
  out.data = Dataset(std::move(x), std::move(delta), std::move(z), 1);
  return out;
}

inline Dataset generate_dataset(const DgpSpec& spec, std::uint64_t seed, std::uint64_t stream = 0) {
  Rng rng(seed, stream);
  return generate_sample(spec, rng).data;
}

// ---------------------------------------------------------------------------
// Designs of the simulation study.

struct Design {
  std::string name;
  DgpSpec dgp;
  FitConfig fit;
  std::vector<double> truth;  // in parameter_vector order
};

inline AftModel benchmark_model(Family f) {
  return {f, 1.0, {1.0}, f == Family::exponential ? 1.0 : 1.5};
}

inline std::vector<std::string> design_names() {
  return {"s2-weibull", "s3-exponential", "s3-loglogistic", "s4-weib-expo",
          "s4-weib-llog", "s5-expo",        "s5-llog",        "s6-semiparametric"};
}

// Truth for the semiparametric fit is the PH coefficient implied by a
// Weibull AFT marginal, sigma * beta.
inline Design make_design(std::string_view name, double tau, std::size_t n) {
  Design d;
  d.name = std::string(name);
  d.dgp.theta = theta_from_tau(tau);
  d.dgp.n = n;
  Family ft = Family::weibull, fc = Family::weibull, fit = Family::weibull;
  Method method = Method::three_stage_aft;
  if (name == "s2-weibull") {
  } else if (name == "s3-exponential") {
    ft = fc = fit = Family::exponential;
  } else if (name == "s3-loglogistic") {
    ft = fc = fit = Family::loglogistic;
  } else if (name == "s4-weib-expo") {
    fc = Family::exponential;
  } else if (name == "s4-weib-llog") {
    fc = Family::loglogistic;
  } else if (name == "s5-expo") {
    fit = Family::exponential;
  } else if (name == "s5-llog") {
    fit = Family::loglogistic;
  } else if (name == "s6-semiparametric") {
    method = Method::two_stage;
  } else {
    throw DomainError("unknown design '" + std::string(name) + "'");
  }
  d.dgp.model_t = benchmark_model(ft);
  d.dgp.model_c = benchmark_model(fc);
  d.fit.method = method;
  d.fit.family = fit;
  const auto& m = d.dgp.model_t;
  if (method == Method::two_stage)
    d.truth = {tau, m.sigma * m.beta[0]};
  else
    d.truth = {tau, m.alpha, m.beta[0], m.sigma};
  return d;
}

// ---------------------------------------------------------------------------

struct ParameterSummary {
  std::string name;
  double truth = 0.0;
  double mean = 0.0;
  double bias2 = 0.0;
  double mse = 0.0;
};

struct McReport {
  std::vector<ParameterSummary> parameters;
  std::size_t requested = 0;
  std::size_t failures = 0;
  std::size_t ties = 0;
  std::vector<std::vector<double>> estimates;  // successful replicates in order
  double wall_seconds = 0.0;

  std::size_t effective() const { return requested - failures; }
  const ParameterSummary& at(std::string_view name) const {
    for (const auto& p : parameters)
      if (p.name == name) return p;
    throw DomainError("no parameter named '" + std::string(name) + "'");
  }
};

// bias^2 and MSE of each column of `estimates` against `truth`.
inline std::vector<ParameterSummary> summarize(const std::vector<std::vector<double>>& estimates,
                                               const std::vector<double>& truth,
                                               const std::vector<std::string>& names) {
  if (estimates.empty()) throw EstimationError("no estimates to summarize");
  if (truth.size() != names.size()) throw DomainError("one name per parameter is required");
  std::vector<ParameterSummary> out(truth.size());
  const double m = static_cast<double>(estimates.size());
  for (std::size_t j = 0; j < truth.size(); ++j) {
    auto& s = out[j];
    s.name = names[j];
    s.truth = truth[j];
    for (const auto& e : estimates) {
      const double d = e[j] - truth[j];
      s.mean += e[j] / m;
      s.mse += d * d / m;
    }
    s.bias2 = (s.mean - truth[j]) * (s.mean - truth[j]);
    // Rounding can push bias^2 a hair above the MSE when all errors are equal.
    if (s.bias2 > s.mse) s.mse = s.bias2;
  }
  return out;
}

// Replicate r simulates from stream (seed, r), so the report does not depend
// on the number of threads.
template <class Estimator>
McReport monte_carlo(const DgpSpec& spec, Estimator&& estimate, const std::vector<double>& truth,
                     const std::vector<std::string>& names, std::size_t reps, std::uint64_t seed,
                     unsigned threads = 1) {
  if (reps < 1) throw DomainError("at least one replication is required");
  const auto start = std::chrono::steady_clock::now();
  std::vector<std::optional<std::vector<double>>> slots(reps);
  std::vector<std::size_t> ties(reps, 0);
  parallel_for(reps, threads, [&](std::size_t r) {
    Rng rng(seed, r);
    auto sample = generate_sample(spec, rng);
    ties[r] = sample.ties;
    try {
      auto est = estimate(sample.data);
      if (est.size() == truth.size()) slots[r] = std::move(est);
    } catch (const Error&) {
    }
  });

  McReport rep;
  rep.requested = reps;
  for (std::size_t r = 0; r < reps; ++r) {
    rep.ties += ties[r];
    if (slots[r])
      rep.estimates.push_back(std::move(*slots[r]));
    else
      ++rep.failures;
  }
  if (2 * rep.failures > reps)
    throw TooManyFailuresError(std::to_string(rep.failures) + " of " + std::to_string(reps) +
                               " replications failed");
  rep.parameters = summarize(rep.estimates, truth, names);
  rep.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rep;
}

inline McReport monte_carlo(const Design& d, std::size_t reps, std::uint64_t seed, unsigned threads = 1) {
  auto cfg = d.fit;
  cfg.options.threads = 1;
  return monte_carlo(
      d.dgp, [&](const Dataset& ds) { return parameter_vector(run_fit(ds, cfg)); }, d.truth,
      parameter_names(cfg.method, 1), reps, seed, threads);
}

}  // namespace singlerisk
