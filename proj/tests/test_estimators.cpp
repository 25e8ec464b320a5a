#include <gtest/gtest.h>

#include <cmath>
#include <string>
#include <vector>

#include "singlerisk/estimators.hpp"
#include "singlerisk/simulate.hpp"

using namespace singlerisk;

namespace {

const std::vector<Family> kFamilies{Family::exponential, Family::weibull, Family::loglogistic, Family::lognormal};

// Deterministic design: durations spread over [0.3, 1.5), binary z. The range
// keeps the exact curves of the test models inside the survival clamp.
Dataset grid_dataset(std::size_t n) {
  std::vector<double> x, z;
  std::vector<int> d;
  for (std::size_t i = 0; i < n; ++i) {
    x.push_back(0.3 + 1.2 * static_cast<double>(i) / static_cast<double>(n));
    d.push_back(i % 3 == 0 ? 0 : 1);
    z.push_back(i % 4 == 0 ? 1.0 : 0.0);
  }
  return Dataset(std::move(x), std::move(d), std::move(z), 1);
}

std::vector<double> exact_survival(const Dataset& ds, const AftModel& m) {
  std::vector<double> s;
  for (std::size_t i = 0; i < ds.size(); ++i) s.push_back(survival(m, ds.x(i), ds.z(i)));
  return s;
}

}  // namespace

TEST(FglsFit, NoiselessWeibullRecovery) {
  const auto ds = grid_dataset(200);
  const AftModel truth{Family::weibull, 1.0, {1.0}, 1.5};
  const auto fit = fgls_fit(ds, exact_survival(ds, truth), Family::weibull);
  EXPECT_EQ(fit.clamped, 0u);
  EXPECT_NEAR(fit.model.alpha, 1.0, 1e-8);
  EXPECT_NEAR(fit.model.beta[0], 1.0, 1e-8);
  EXPECT_NEAR(fit.model.sigma, 1.5, 1e-8);
}

TEST(FglsFit, NoiselessRecoveryAllFamilies) {
  const auto ds = grid_dataset(150);
  for (auto f : kFamilies) {
    const AftModel truth{f, 0.7, {-0.4}, f == Family::exponential ? 1.0 : 1.8};
    const auto fit = fgls_fit(ds, exact_survival(ds, truth), f);
    EXPECT_EQ(fit.clamped, 0u) << to_string(f);
    EXPECT_NEAR(fit.model.alpha, truth.alpha, 1e-8) << to_string(f);
    EXPECT_NEAR(fit.model.beta[0], truth.beta[0], 1e-8) << to_string(f);
    EXPECT_NEAR(fit.model.sigma, truth.sigma, 1e-8) << to_string(f);
  }
}

TEST(FglsFit, ExponentialTwoPointIntercept) {
  const Dataset ds({0.3, 1.1}, {1, 1}, {}, 0);
  const std::vector<double> s{std::exp(-2.0 * 0.3), std::exp(-2.0 * 1.1)};
  const auto fit = fgls_fit(ds, s, Family::exponential);
  EXPECT_NEAR(fit.model.alpha, 2.0, 1e-12);
  EXPECT_EQ(fit.model.sigma, 1.0);
}

TEST(FglsFit, ConstantSurvivalIsRankDeficient) {
  const auto ds = grid_dataset(40);
  const std::vector<double> s(ds.size(), 0.4);
  EXPECT_THROW(fgls_fit(ds, s, Family::weibull), RankDeficiencyError);
}

TEST(FglsFit, ScaleConsistency) {
  const auto ds = grid_dataset(120);
  std::vector<double> s;
  for (std::size_t i = 0; i < ds.size(); ++i) s.push_back(0.02 + 0.96 * std::fmod(0.618 * (i + 1), 1.0));
  const double c = 3.7;
  std::vector<double> x(ds.x().begin(), ds.x().end()), z;
  for (auto& v : x) v *= c;
  for (std::size_t i = 0; i < ds.size(); ++i) z.push_back(ds.z(i)[0]);
  const Dataset scaled(x, std::vector<int>(ds.delta().begin(), ds.delta().end()), z, 1);
  for (auto f : kFamilies) {
    const auto a = fgls_fit(ds, s, f), b = fgls_fit(scaled, s, f);
    EXPECT_NEAR(std::log(b.model.alpha), std::log(a.model.alpha) - std::log(c), 1e-10) << to_string(f);
    EXPECT_NEAR(b.model.beta[0], a.model.beta[0], 1e-10);
    EXPECT_NEAR(b.model.sigma, a.model.sigma, 1e-10);
  }
}

TEST(FglsFit, ClampsBoundaryValues) {
  const auto ds = grid_dataset(60);
  auto s = exact_survival(ds, {Family::weibull, 1.0, {1.0}, 1.5});
  s[0] = 1.0;
  s[1] = 0.0;
  const auto fit = fgls_fit(ds, s, Family::weibull);
  EXPECT_EQ(fit.clamped, 2u);
  EXPECT_TRUE(std::isfinite(fit.model.alpha));
}

TEST(FglsFit, WeightsSelectRows) {
  const auto ds = grid_dataset(80);
  const auto exact = exact_survival(ds, {Family::loglogistic, 1.0, {0.5}, 1.5});
  std::vector<double> s, w;
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    s.push_back(exact[i] * (0.9 + 0.2 * std::fmod(0.377 * (i + 1), 1.0)));
    w.push_back(i % 2 == 0 ? 1.0 : 0.0);
    if (i % 2 == 0) keep.push_back(i);
  }
  std::vector<double> s_keep;
  for (auto i : keep) s_keep.push_back(s[i]);
  const auto a = fgls_fit(ds, s, Family::loglogistic, w);
  const auto b = fgls_fit(ds.select(keep), s_keep, Family::loglogistic);
  EXPECT_NEAR(a.model.alpha, b.model.alpha, 1e-10);
  EXPECT_NEAR(a.model.beta[0], b.model.beta[0], 1e-10);
  EXPECT_NEAR(a.model.sigma, b.model.sigma, 1e-10);
  EXPECT_THROW(fgls_fit(ds, s, Family::weibull, std::vector<double>(3, 1.0)), DomainError);
}

TEST(PhRegression, NoiselessWeibullAndExponential) {
  const auto ds = grid_dataset(100);
  for (auto f : {Family::weibull, Family::exponential}) {
    const PhModel truth{f, 0.9, {0.5}, f == Family::weibull ? 1.5 : 1.0};
    std::vector<double> s;
    for (std::size_t i = 0; i < ds.size(); ++i) s.push_back(ph_survival(truth, ds.x(i), ds.z(i)));
    const auto fit = ph_regression_fit(ds, s, f);
    EXPECT_EQ(fit.clamped, 0u);
    EXPECT_NEAR(fit.model.alpha, 0.9, 1e-8);
    EXPECT_NEAR(fit.model.beta[0], 0.5, 1e-8);
    EXPECT_NEAR(fit.model.sigma, truth.sigma, 1e-8);
  }
  EXPECT_THROW(ph_regression_fit(ds, std::vector<double>(ds.size(), 0.5), Family::lognormal), DomainError);
}

TEST(CvmCriterion, PerfectFitIsZero) {
  const auto ds = grid_dataset(100);
  for (auto f : kFamilies) {
    const AftModel truth{f, 1.0, {1.0}, f == Family::exponential ? 1.0 : 1.5};
    const auto v = cvm_criterion(ds, exact_survival(ds, truth), ModelKind::aft, f);
    EXPECT_LT(v.value, 1e-20) << to_string(f);
    EXPECT_EQ(v.rows_used, ds.size());
  }
}

TEST(CvmCriterion, EventsOnlyScoresEventRows) {
  const auto ds = grid_dataset(90);
  const auto exact = exact_survival(ds, {Family::weibull, 1.0, {1.0}, 1.5});
  std::vector<double> s;
  for (std::size_t i = 0; i < ds.size(); ++i) s.push_back(exact[i] * (0.9 + 0.2 * std::fmod(0.377 * (i + 1), 1.0)));
  CriterionOptions o;
  o.events_only = true;
  const auto v = cvm_criterion(ds, s, ModelKind::aft, Family::weibull, o);
  EXPECT_EQ(v.rows_used, 60u);
}

TEST(CvmObjective, MinimisedNearTruthOnLargeSample) {
  DgpSpec spec;
  spec.theta = 8.0;
  spec.n = 20000;
  const StratifiedFirstStage fs(generate_dataset(spec, 42));
  const double at_truth = cvm_objective_aft(fs, 8.0, Family::weibull).value;
  const double at_zero = cvm_objective_aft(fs, 0.0, Family::weibull).value;
  EXPECT_LT(at_truth, 1e-4);
  EXPECT_LT(at_truth, at_zero);
  for (double tau : TauGrid{}.points()) {
    const double v = cvm_objective_aft(fs, theta_from_tau(tau), Family::weibull).value;
    EXPECT_TRUE(std::isfinite(v)) << tau;
    EXPECT_GE(v, 0.0);
  }
}

TEST(Fit3se, AllCensoredSingleStratumFailsEverywhere) {
  const Dataset ds({1, 2, 3, 4, 5}, {0, 0, 0, 0, 0}, {}, 0);
  EXPECT_THROW(fit_3se(ds, ModelKind::aft, Family::weibull), EstimationError);
}

TEST(Fit3se, DeterministicAndWithinGrid) {
  DgpSpec spec;
  spec.theta = theta_from_tau(0.3);
  spec.n = 600;
  const auto ds = generate_dataset(spec, 9);
  const TauGrid grid{-0.5, 0.6, 0.1};
  const auto a = fit_3se(ds, ModelKind::aft, Family::weibull, grid);
  const auto b = fit_3se(ds, ModelKind::aft, Family::weibull, grid);
  EXPECT_EQ(a.tau_hat, b.tau_hat);
  EXPECT_EQ(a.model.beta, b.model.beta);
  EXPECT_GE(a.tau_hat, -0.5);
  EXPECT_LE(a.tau_hat, 0.6);
  EXPECT_DOUBLE_EQ(a.theta_hat, theta_from_tau(a.tau_hat));
  EXPECT_EQ(a.trace.size(), grid.points().size());
  EXPECT_EQ(a.kept_n, ds.size());
  // The refined value is never worse than the best grid value.
  double best = INFINITY;
  for (const auto& p : a.trace) best = std::min(best, p.value);
  EXPECT_LE(a.objective, best + 1e-15);
}

TEST(Fit3se, ThreadCountDoesNotChangeResult) {
  DgpSpec spec;
  spec.theta = 2.0;
  spec.n = 400;
  const auto ds = generate_dataset(spec, 10);
  CriterionOptions one, four;
  four.threads = 4;
  const auto a = fit_3se(ds, ModelKind::aft, Family::weibull, {}, one);
  const auto b = fit_3se(ds, ModelKind::aft, Family::weibull, {}, four);
  EXPECT_EQ(a.tau_hat, b.tau_hat);
  EXPECT_EQ(a.objective, b.objective);
}

TEST(Fit3se, PhVariantRecoversHazardScaleCoefficient) {
  DgpSpec spec;
  spec.theta = theta_from_tau(0.5);
  spec.n = 20000;
  const auto r = fit_3se(generate_dataset(spec, 3), ModelKind::ph, Family::weibull);
  EXPECT_NEAR(r.model.beta[0], 1.5, 0.1);
  EXPECT_NEAR(r.model.sigma, 1.5, 0.1);
  EXPECT_NEAR(r.tau_hat, 0.5, 0.1);
}

// ---------------------------------------------------------------------------

namespace {

CgeCurve curve(std::vector<double> t, std::vector<double> v) { return {StepFunction(1.0, std::move(t), std::move(v)), 0.0}; }

CgeCurve power(const CgeCurve& c, double p) {
  std::vector<double> v;
  for (double s : c.curve.values()) v.push_back(std::pow(s, p));
  const auto t = c.curve.jump_times();
  return curve({t.begin(), t.end()}, v);
}

}  // namespace

TEST(SemiparamB, ProportionalHazardsIdentity) {
  const auto c1 = curve({0.5, 1.0, 2.0}, {0.9, 0.6, 0.3});
  const auto c2 = power(c1, std::exp(0.7 * (1.0 - 0.0)));
  for (double x : {0.5, 1.3, 2.5}) EXPECT_NEAR(semiparam_b(x, c1, c2, 0.0, 1.0), 0.7, 1e-12);
  const auto c3 = power(c1, std::exp(0.7 * 2.0));
  EXPECT_NEAR(semiparam_b(1.0, c1, c3, -1.0, 1.0), 0.7, 1e-12);
}

TEST(SemiparamB, EqualCurvesGiveZero) {
  const auto c = curve({0.5, 1.0}, {0.8, 0.4});
  EXPECT_EQ(semiparam_b(0.7, c, c, 0.0, 1.0), 0.0);
}

TEST(SemiparamB, CurveAtOneIsError) {
  const auto c1 = curve({0.5, 1.0}, {0.8, 0.4});
  const auto c2 = curve({0.9, 1.0}, {0.8, 0.4});
  EXPECT_THROW(semiparam_b(0.6, c1, c2, 0.0, 1.0), EstimationError);
  EXPECT_THROW(semiparam_b(0.6, c1, c1, 1.0, 1.0), DomainError);
}

TEST(EffectSumVariance, HandValue) {
  EXPECT_DOUBLE_EQ(effect_sum_variance(std::vector<double>{1, 2, 3}, 1), 1.0);
  // Component sums 3, 5, 7.
  EXPECT_DOUBLE_EQ(effect_sum_variance(std::vector<double>{1, 2, 2, 3, 3, 4}, 2), 4.0);
  EXPECT_THROW(effect_sum_variance(std::vector<double>{1}, 1), EstimationError);
}

TEST(StrataContrast, ExactPowerCurvesGiveConstantEffects) {
  // Two binary covariates, four strata, beta = (0.5, -0.3).
  StrataIndex idx;
  idx.strata = {{{0, 0}, {0}}, {{0, 1}, {1}}, {{1, 0}, {2, 3}}, {{1, 1}, {4}}};
  const auto base = curve({0.2, 0.5, 1.0, 2.0}, {0.95, 0.7, 0.45, 0.2});
  std::vector<CgeCurve> cs;
  for (const auto& s : idx.strata) cs.push_back(power(base, std::exp(0.5 * s.z[0] - 0.3 * s.z[1])));
  const StrataContrast contrast(idx);
  EXPECT_EQ(contrast.reference(), 2u);
  std::vector<double> effects;
  for (double x : {0.2, 0.6, 1.5, 3.0}) {
    const auto b = contrast.effect(x, cs);
    ASSERT_EQ(b.size(), 2u);
    EXPECT_NEAR(b[0], 0.5, 1e-12);
    EXPECT_NEAR(b[1], -0.3, 1e-12);
    effects.insert(effects.end(), b.begin(), b.end());
  }
  EXPECT_NEAR(effect_sum_variance(effects, 2), 0.0, 1e-24);
}

TEST(StrataContrast, RequiresSeparatingStrata) {
  StrataIndex one;
  one.strata = {{{0.0}, {0, 1}}};
  try {
    StrataContrast c(one);
    FAIL() << "expected IdentificationError";
  } catch (const IdentificationError& e) {
    EXPECT_NE(std::string(e.what()).find("covariate"), std::string::npos);
  }
  StrataIndex collinear;
  collinear.strata = {{{0, 0}, {0}}, {{1, 1}, {1}}, {{2, 2}, {2}}};
  EXPECT_THROW(StrataContrast{collinear}, IdentificationError);
}

TEST(Fit2se, ConstantCovariateIsError) {
  DgpSpec spec;
  spec.n = 200;
  auto ds = generate_dataset(spec, 1);
  std::vector<double> z(ds.size(), 1.0);
  const Dataset flat(std::vector<double>(ds.x().begin(), ds.x().end()),
                     std::vector<int>(ds.delta().begin(), ds.delta().end()), z, 1);
  EXPECT_THROW(fit_2se(flat), IdentificationError);
}

TEST(Fit2se, ReportsTrimAndEffect) {
  DgpSpec spec;
  spec.theta = theta_from_tau(0.3);
  spec.n = 3000;
  const auto ds = generate_dataset(spec, 21);
  const auto r = fit_2se(ds);
  ASSERT_EQ(r.beta_hat.size(), 1u);
  EXPECT_TRUE(std::isfinite(r.beta_hat[0]));
  EXPECT_LE(r.x_double_star, r.x_star);
  EXPECT_GT(r.kept_n, ds.size() / 2);
  EXPECT_EQ(r.trace.size(), TauGrid{}.points().size());
  const auto again = fit_2se(ds);
  EXPECT_EQ(r.tau_hat, again.tau_hat);
  EXPECT_EQ(r.beta_hat, again.beta_hat);
}

TEST(VarianceObjective, NearZeroAtTruthOnLargeSample) {
  DgpSpec spec;
  spec.theta = 8.0;
  spec.n = 100000;
  const StratifiedFirstStage fs(generate_dataset(spec, 4));
  const auto at_truth = variance_objective(fs, 8.0);
  EXPECT_LT(at_truth.value, variance_objective(fs, 0.0).value);
  EXPECT_LT(at_truth.value, variance_objective(fs, theta_from_tau(0.5)).value);
  EXPECT_NEAR(at_truth.beta_mean[0], 1.5, 0.05);
}
