#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "singlerisk/marginals.hpp"

using namespace singlerisk;

namespace {

const std::vector<Family> kFamilies{Family::exponential, Family::weibull, Family::loglogistic, Family::lognormal};

AftModel model(Family f, double alpha, double beta, double sigma) {
  return {f, alpha, {beta}, f == Family::exponential ? 1.0 : sigma};
}

// Closed-form survival functions written out per family.
double reference_survival(Family f, double alpha, double beta, double sigma, double t, double z) {
  const double a = alpha * t * std::exp(z * beta);
  switch (f) {
    case Family::exponential: return std::exp(-a);
    case Family::weibull: return std::exp(-std::pow(a, sigma));
    case Family::loglogistic: return 1.0 / (1.0 + std::pow(a, sigma));
    case Family::lognormal: return 0.5 * std::erfc(sigma * std::log(a) / std::sqrt(2.0));
  }
  return NAN;
}

}  // namespace

TEST(Family, ParseAndName) {
  EXPECT_EQ(parse_family("weibull"), Family::weibull);
  EXPECT_EQ(parse_family("llog"), Family::loglogistic);
  EXPECT_EQ(parse_family("lnorm"), Family::lognormal);
  EXPECT_EQ(parse_family("expo"), Family::exponential);
  EXPECT_FALSE(parse_family("gompertz"));
  for (auto f : kFamilies) EXPECT_EQ(parse_family(to_string(f)), f);
}

TEST(CumulativeHazard, KnownValues) {
  const double z0 = 0.0;
  EXPECT_NEAR(cumulative_hazard(model(Family::weibull, 1, 0, 1.5), 1.0, {&z0, 1}), 1.0, 1e-15);
  EXPECT_NEAR(cumulative_hazard(model(Family::exponential, 2, 0, 1), 3.0, {&z0, 1}), 6.0, 1e-14);
  for (auto f : kFamilies) EXPECT_EQ(cumulative_hazard(model(f, 1.3, 0.4, 1.2), 0.0, {&z0, 1}), 0.0);
}

TEST(CumulativeHazard, StrictlyIncreasing) {
  const double z = 1.0;
  for (auto f : kFamilies) {
    const auto m = model(f, 0.8, 0.5, 1.7);
    for (double t = 0.05; t < 10.0; t *= 1.3) {
      const double h = 1e-6 * t;
      const double d = (cumulative_hazard(m, t + h, {&z, 1}) - cumulative_hazard(m, t - h, {&z, 1})) / (2 * h);
      EXPECT_GT(d, 0.0) << to_string(f) << " t=" << t;
    }
  }
}

TEST(Survival, MatchesClosedForms) {
  for (auto f : kFamilies) {
    for (double z : {0.0, 1.0}) {
      const auto m = model(f, 1.2, 0.7, 1.5);
      for (double t : {0.01, 0.3, 1.0, 2.5, 8.0})
        EXPECT_NEAR(survival(m, t, {&z, 1}), reference_survival(f, 1.2, 0.7, m.sigma, t, z), 1e-13)
            << to_string(f) << " t=" << t << " z=" << z;
    }
  }
  const double z0 = 0.0;
  EXPECT_NEAR(survival(model(Family::weibull, 1, 0, 1), 1.0, {&z0, 1}), std::exp(-1.0), 1e-15);
  EXPECT_EQ(survival(model(Family::lognormal, 1, 0, 1), 0.0, {&z0, 1}), 1.0);
}

TEST(SwInverse, KnownValues) {
  EXPECT_NEAR(sw_inverse(Family::weibull, std::exp(-1.0)), 0.0, 1e-15);
  EXPECT_NEAR(sw_inverse(Family::loglogistic, 0.5), 0.0, 1e-15);
  EXPECT_NEAR(sw_inverse(Family::lognormal, 0.5), 0.0, 1e-15);
  EXPECT_THROW(sw_inverse(Family::weibull, 0.0), DomainError);
  EXPECT_THROW(sw_inverse(Family::lognormal, 1.0), DomainError);
}

TEST(SwInverse, InvertsSwAndDecreases) {
  for (auto f : kFamilies) {
    std::vector<double> grid{1e-6, 1e-4};
    for (int i = 1; i < 100; ++i) grid.push_back(i / 100.0);
    grid.push_back(1.0 - 1e-4);
    grid.push_back(1.0 - 1e-6);
    double prev = INFINITY;
    for (double s : grid) {
      const double w = sw_inverse(f, s);
      EXPECT_NEAR(sw(f, w), s, 1e-10 * std::max(1.0, s)) << to_string(f) << " s=" << s;
      EXPECT_LT(w, prev);
      prev = w;
    }
  }
}

TEST(NormalQuantile, AgreesWithKnownQuantiles) {
  EXPECT_NEAR(normal_quantile(0.975), 1.959963984540054, 1e-12);
  EXPECT_NEAR(normal_quantile(0.001), -3.090232306167813, 1e-11);
  EXPECT_NEAR(normal_quantile(1e-10), -6.361340902404056, 1e-9);
  EXPECT_NEAR(normal_quantile(1.0 - 1e-6), 4.753424308822899, 1e-8);
}

TEST(InverseSurvival, RoundTrip) {
  for (auto f : kFamilies) {
    for (double z : {0.0, 1.0}) {
      const auto m = model(f, 1.0, 1.0, 1.5);
      for (double u = 0.01; u < 1.0; u += 0.02) {
        const double t = inverse_survival(m, u, {&z, 1});
        EXPECT_NEAR(survival(m, t, {&z, 1}), u, 1e-10) << to_string(f) << " u=" << u;
      }
    }
  }
}

TEST(InverseSurvival, KnownValuesAndBoundary) {
  const double z0 = 0.0;
  EXPECT_NEAR(inverse_survival(model(Family::weibull, 1, 0, 1), std::exp(-1.0), {&z0, 1}), 1.0, 1e-14);
  const auto m = model(Family::weibull, 1, 0, 1.5);
  EXPECT_LT(inverse_survival(m, 1.0 - 1e-12, {&z0, 1}), 1e-7);
  EXPECT_THROW(inverse_survival(m, 1.0, {&z0, 1}), DomainError);
}

TEST(PhSurvival, BasicIdentities) {
  const double z0 = 0.0, z1 = 1.0;
  for (auto f : kFamilies) {
    const PhModel ph{f, 1.3, {0.6}, f == Family::exponential ? 1.0 : 1.4};
    const AftModel aft{f, 1.3, {0.0}, ph.sigma};
    EXPECT_EQ(ph_survival(ph, 0.0, {&z1, 1}), 1.0);
    for (double t : {0.1, 1.0, 3.0})
      EXPECT_NEAR(ph_survival(ph, t, {&z0, 1}), survival(aft, t, {&z0, 1}), 1e-14) << to_string(f);
  }
}

TEST(PhSurvival, WeibullPhIsWeibullAft) {
  const double beta_aft = 0.8, sigma = 1.5;
  const PhModel ph{Family::weibull, 1.1, {sigma * beta_aft}, sigma};
  const AftModel aft{Family::weibull, 1.1, {beta_aft}, sigma};
  for (double z : {0.0, 1.0, -0.5})
    for (double t : {0.05, 0.5, 1.0, 4.0})
      EXPECT_NEAR(ph_survival(ph, t, {&z, 1}), survival(aft, t, {&z, 1}), 1e-12);
}

TEST(AftModel, Validation) {
  EXPECT_THROW((AftModel{Family::weibull, -1.0, {}, 1.0}.validate()), DomainError);
  EXPECT_THROW((AftModel{Family::weibull, 1.0, {}, 0.0}.validate()), DomainError);
  EXPECT_THROW((AftModel{Family::exponential, 1.0, {}, 2.0}.validate()), DomainError);
  EXPECT_NO_THROW((AftModel{Family::lognormal, 1.0, {}, 2.0}.validate()));
}
