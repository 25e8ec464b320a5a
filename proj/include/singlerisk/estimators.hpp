#pragma once

// Minimum-distance estimators of the copula dependence parameter.
//
//  * Three-stage (parametric): for each candidate theta, compute the
//    stratified copula-graphic curves, regress the marginal model on them
//    (least squares on the linearised AFT or PH form) and score the
//    Cramer-von Mises distance between the fitted parametric survival and the
//    curves. theta minimises that distance.
//  * Two-stage (semiparametric PH): for each candidate theta, every kept row
//    yields a covariate effect b_i from the log-log ratio of the strata
//    curves; theta minimises the sample variance of those effects.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "singlerisk/cge.hpp"
#include "singlerisk/copula.hpp"
#include "singlerisk/data.hpp"
#include "singlerisk/error.hpp"
#include "singlerisk/first_stage.hpp"
#include "singlerisk/marginals.hpp"
#include "singlerisk/optimize.hpp"

namespace singlerisk {

enum class ModelKind { aft, ph };

enum class Method { three_stage_aft, three_stage_ph, two_stage };

inline std::string_view to_string(Method m) {
  switch (m) {
    case Method::three_stage_aft: return "3se-aft";
    case Method::three_stage_ph: return "3se-ph";
    case Method::two_stage: return "2se";
  }
  return "?";
}

inline std::optional<Method> parse_method(std::string_view s) {
  if (s == "3se-aft") return Method::three_stage_aft;
  if (s == "3se-ph") return Method::three_stage_ph;
  if (s == "2se") return Method::two_stage;
  return std::nullopt;
}

// Copula-graphic values are pushed into [eps, 1 - eps] before any transform
// that diverges at 0 or 1.
inline constexpr double kSurvivalClamp = 1e-6;

struct CriterionOptions {
  // Score the distance over delta = 1 rows only (sensitivity analysis).
  bool events_only = false;
  // Per-row regression weights, i.e. the diagonal of the inverse error
  // covariance. Empty means ordinary least squares.
  std::vector<double> weights;
  double tolerance = 1e-4;  // golden-section tolerance in tau
  unsigned threads = 1;     // grid evaluation workers
};

// ---------------------------------------------------------------------------
// Stratified first stage, computed once per dataset and reused for every theta.

class StratifiedFirstStage {
 public:
  explicit StratifiedFirstStage(Dataset ds) : ds_(std::move(ds)), strata_(stratify(ds_)) {
    row_stratum_.resize(ds_.size());
    row_jumps_.resize(ds_.size());
    jumps_.reserve(strata_.size());
    for (std::size_t s = 0; s < strata_.size(); ++s) {
      const auto& rows = strata_[s].rows;
      const auto x = gather_x(ds_, rows);
      const auto d = gather_delta(ds_, rows);
      const auto pi = overall_survival(x);
      const auto ft = sub_distribution(x, d, 1);
      jumps_.push_back(CgeJumps::from(pi, ft));
      for (std::size_t r = 0; r < rows.size(); ++r) {
        row_stratum_[rows[r]] = s;
        row_jumps_[rows[r]] = ft.count_upto(x[r]);
      }
    }
  }

  const Dataset& data() const { return ds_; }
  const StrataIndex& strata() const { return strata_; }
  const CgeJumps& jumps(std::size_t s) const { return jumps_[s]; }
  std::size_t stratum_of(std::size_t row) const { return row_stratum_[row]; }

  template <ArchimedeanGenerator G>
  std::vector<CgeCurve> curves(const G& gen) const {
    std::vector<CgeCurve> out;
    out.reserve(jumps_.size());
    for (const auto& j : jumps_) out.push_back(copula_graphic(j, gen));
    return out;
  }

  // S_CGE(x_i | z_i) for every row.
  std::vector<double> row_values(std::span<const CgeCurve> curves) const {
    std::vector<double> out(ds_.size());
    for (std::size_t i = 0; i < ds_.size(); ++i)
      out[i] = curves[row_stratum_[i]].curve.value_after(row_jumps_[i]);
    return out;
  }

 private:
  Dataset ds_;
  StrataIndex strata_;
  std::vector<CgeJumps> jumps_;
  std::vector<std::size_t> row_stratum_;
  std::vector<std::size_t> row_jumps_;
};

// ---------------------------------------------------------------------------
// Second stage: linear regression on the copula-graphic curve.

// A fitted parametric marginal, either AFT or PH.
struct MarginalFit {
  ModelKind kind = ModelKind::aft;
  Family family = Family::weibull;
  double alpha = 1.0;
  std::vector<double> beta;
  double sigma = 1.0;

  AftModel aft() const { return {family, alpha, beta, sigma}; }
  PhModel ph() const { return {family, alpha, beta, sigma}; }

  double survival(double t, std::span<const double> z) const {
    return kind == ModelKind::aft ? singlerisk::survival(aft(), t, z) : ph_survival(ph(), t, z);
  }
};

struct RegressionFit {
  MarginalFit model;
  std::size_t clamped = 0;
};

namespace detail {

inline Eigen::VectorXd solve_least_squares(Eigen::MatrixXd X, Eigen::VectorXd y, std::span<const double> weights) {
  if (!weights.empty()) {
    if (weights.size() != static_cast<std::size_t>(X.rows())) throw DomainError("one weight per row is required");
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
      const double w = weights[static_cast<std::size_t>(i)];
      if (!(w >= 0.0) || !std::isfinite(w)) throw DomainError("regression weights must be finite and >= 0");
      const double sw = std::sqrt(w);
      X.row(i) *= sw;
      y(i) *= sw;
    }
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
  qr.setThreshold(1e-10);
  if (qr.rank() < X.cols())
    throw RankDeficiencyError("regression design is rank deficient (rank " + std::to_string(qr.rank()) + " < " +
                              std::to_string(X.cols()) + "); the survival curve carries no variation");
  Eigen::VectorXd coef = qr.solve(y);
  if (!coef.allFinite()) throw NumericError("least-squares solution is not finite");
  return coef;
}

inline double clamp_survival(double s, std::size_t& clamped) {
  if (s < kSurvivalClamp) {
    ++clamped;
    return kSurvivalClamp;
  }
  if (s > 1.0 - kSurvivalClamp) {
    ++clamped;
    return 1.0 - kSurvivalClamp;
  }
  return s;
}

}  // namespace detail

// Regression of log(x_i) on (-1, -z_i', S_W^-1[s_i]) giving
// chi = (log alpha, beta', 1/sigma). The exponential family fixes sigma = 1 and
// moves the S_W^-1 term to the left-hand side.
inline RegressionFit fgls_fit(const Dataset& ds, std::span<const double> s_hat, Family family,
                              std::span<const double> weights = {}) {
  const std::size_t n = ds.size(), k = ds.k();
  if (s_hat.size() != n) throw DomainError("one survival value per row is required");
  const bool expo = family == Family::exponential;
  const std::size_t p = k + (expo ? 1 : 2);
  if (n < p) throw EstimationError("regression needs at least " + std::to_string(p) + " rows");

  RegressionFit out;
  Eigen::MatrixXd X(n, p);
  Eigen::VectorXd y(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double w = sw_inverse(family, detail::clamp_survival(s_hat[i], out.clamped));
    const auto zi = ds.z(i);
    const auto r = static_cast<Eigen::Index>(i);
    X(r, 0) = -1.0;
    for (std::size_t j = 0; j < k; ++j) X(r, static_cast<Eigen::Index>(1 + j)) = -zi[j];
    if (expo) {
      y(r) = std::log(ds.x(i)) - w;
    } else {
      X(r, static_cast<Eigen::Index>(k + 1)) = w;
      y(r) = std::log(ds.x(i));
    }
  }
  const Eigen::VectorXd chi = detail::solve_least_squares(std::move(X), std::move(y), weights);

  auto& m = out.model;
  m.kind = ModelKind::aft;
  m.family = family;
  m.alpha = std::exp(chi(0));
  m.beta.assign(chi.data() + 1, chi.data() + 1 + k);
  if (expo) {
    m.sigma = 1.0;
  } else {
    const double inv_sigma = chi(static_cast<Eigen::Index>(k + 1));
    if (!(inv_sigma > 0.0)) throw EstimationError("regression implies a non-positive AFT shape");
    m.sigma = 1.0 / inv_sigma;
  }
  if (!(m.alpha > 0.0) || !std::isfinite(m.alpha)) throw NumericError("regression implies an invalid AFT scale");
  return out;
}

// PH analogue: log(-log s_i) = sigma*log(alpha) + sigma*log(x_i) + z_i'beta for
// a Weibull baseline (sigma = 1 for exponential).
inline RegressionFit ph_regression_fit(const Dataset& ds, std::span<const double> s_hat, Family baseline,
                                       std::span<const double> weights = {}) {
  if (baseline != Family::weibull && baseline != Family::exponential)
    throw DomainError("the PH variant supports weibull and exponential baselines only");
  const std::size_t n = ds.size(), k = ds.k();
  if (s_hat.size() != n) throw DomainError("one survival value per row is required");
  const bool expo = baseline == Family::exponential;
  const std::size_t p = k + (expo ? 1 : 2);
  if (n < p) throw EstimationError("regression needs at least " + std::to_string(p) + " rows");

  RegressionFit out;
  Eigen::MatrixXd X(n, p);
  Eigen::VectorXd y(n);
  const auto zcol = static_cast<Eigen::Index>(expo ? 1 : 2);
  for (std::size_t i = 0; i < n; ++i) {
    const double s = detail::clamp_survival(s_hat[i], out.clamped);
    const auto r = static_cast<Eigen::Index>(i);
    const double lx = std::log(ds.x(i));
    y(r) = std::log(-std::log(s)) - (expo ? lx : 0.0);
    X(r, 0) = 1.0;
    if (!expo) X(r, 1) = lx;
    const auto zi = ds.z(i);
    for (std::size_t j = 0; j < k; ++j) X(r, zcol + static_cast<Eigen::Index>(j)) = zi[j];
  }
  const Eigen::VectorXd c = detail::solve_least_squares(std::move(X), std::move(y), weights);

  auto& m = out.model;
  m.kind = ModelKind::ph;
  m.family = baseline;
  m.sigma = expo ? 1.0 : c(1);
  if (!(m.sigma > 0.0)) throw EstimationError("regression implies a non-positive PH shape");
  m.alpha = std::exp(c(0) / m.sigma);
  m.beta.assign(c.data() + zcol, c.data() + zcol + static_cast<Eigen::Index>(k));
  if (!(m.alpha > 0.0) || !std::isfinite(m.alpha)) throw NumericError("regression implies an invalid PH scale");
  return out;
}

// ---------------------------------------------------------------------------
// Third stage criterion.

struct CvmValue {
  double value = 0.0;
  RegressionFit fit;
  std::size_t rows_used = 0;
  // Mean of S_model - S_CGE over the scored rows.
  double mean_difference = 0.0;
};

// Fits the marginal model to per-row curve values s_hat and scores
// (1/n) sum (S_model(x_i|z_i) - s_hat_i)^2.
inline CvmValue cvm_criterion(const Dataset& ds, std::span<const double> s_hat, ModelKind kind, Family family,
                              const CriterionOptions& opts = {}) {
  CvmValue out;
  out.fit = kind == ModelKind::aft ? fgls_fit(ds, s_hat, family, opts.weights)
                                   : ph_regression_fit(ds, s_hat, family, opts.weights);
  double sum = 0.0, diff = 0.0;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    if (opts.events_only && ds.delta(i) != 1) continue;
    const double d = out.fit.model.survival(ds.x(i), ds.z(i)) - s_hat[i];
    sum += d * d;
    diff += d;
    ++out.rows_used;
  }
  if (out.rows_used == 0) throw EstimationError("no rows to score the criterion on");
  out.value = sum / static_cast<double>(out.rows_used);
  out.mean_difference = diff / static_cast<double>(out.rows_used);
  if (!std::isfinite(out.value)) throw NumericError("criterion is not finite");
  return out;
}

template <ArchimedeanGenerator G>
CvmValue cvm_objective(const StratifiedFirstStage& fs, const G& gen, ModelKind kind, Family family,
                       const CriterionOptions& opts = {}) {
  const auto curves = fs.curves(gen);
  const auto s_hat = fs.row_values(curves);
  return cvm_criterion(fs.data(), s_hat, kind, family, opts);
}

inline CvmValue cvm_objective_aft(const StratifiedFirstStage& fs, double theta, Family family,
                                  const CriterionOptions& opts = {}) {
  return cvm_objective(fs, ClaytonCopula(theta), ModelKind::aft, family, opts);
}

struct FitResult3SE {
  double tau_hat = 0.0;
  double theta_hat = 0.0;
  MarginalFit model;
  double objective = 0.0;
  std::vector<TracePoint> trace;
  std::size_t grid_failures = 0;
  std::size_t kept_n = 0;     // rows scored by the criterion
  std::size_t clamped_n = 0;  // rows whose curve value was clamped
  double mean_difference = 0.0;
};

inline FitResult3SE fit_3se(const StratifiedFirstStage& fs, ModelKind kind, Family family, const TauGrid& grid,
                            const CriterionOptions& opts = {}) {
  auto criterion = [&](double tau) {
    return cvm_objective(fs, ClaytonCopula::from_tau(tau), kind, family, opts).value;
  };
  const auto min = minimize_over_tau(criterion, grid.points(), opts.tolerance, opts.threads);

  FitResult3SE r;
  r.tau_hat = min.argmin;
  r.theta_hat = theta_from_tau(min.argmin);
  r.trace = min.trace;
  r.grid_failures = min.failures;
  const auto final = cvm_objective(fs, ClaytonCopula(r.theta_hat), kind, family, opts);
  r.model = final.fit.model;
  r.objective = final.value;
  r.kept_n = final.rows_used;
  r.clamped_n = final.fit.clamped;
  r.mean_difference = final.mean_difference;
  return r;
}

inline FitResult3SE fit_3se(const Dataset& ds, ModelKind kind, Family family, const TauGrid& grid = {},
                            const CriterionOptions& opts = {}) {
  return fit_3se(StratifiedFirstStage(ds), kind, family, grid, opts);
}

// ---------------------------------------------------------------------------
// Semiparametric two-stage estimator.

// Covariate effect implied at duration x by two strata curves under
// proportional hazards: log(log S(x|z2) / log S(x|z1)) / (z2 - z1).
inline double semiparam_b(double x, const CgeCurve& curve_z1, const CgeCurve& curve_z2, double z1, double z2) {
  if (z1 == z2) throw DomainError("covariate values must differ");
  const double s1 = evaluate(curve_z1, x), s2 = evaluate(curve_z2, x);
  if (!(s1 > 0.0 && s1 < 1.0) || !(s2 > 0.0 && s2 < 1.0))
    throw EstimationError("covariate effect undefined at x = " + std::to_string(x) +
                          ": a curve equals 0 or 1 there");
  return std::log(std::log(s2) / std::log(s1)) / (z2 - z1);
}

// Pairing of strata for k covariates: every non-reference stratum is
// contrasted with the largest stratum, and the per-row effect vector solves
// (z_s - z_ref)'b = log(log S_s / log S_ref) over all s in least squares.
class StrataContrast {
 public:
  explicit StrataContrast(const StrataIndex& strata) {
    if (strata.size() < 2)
      throw IdentificationError(
          "the semiparametric estimator needs a covariate (k >= 1) taking at least two distinct values; "
          "the data form a single stratum");
    k_ = strata[0].z.size();
    if (k_ == 0) throw IdentificationError("the semiparametric estimator needs at least one covariate");
    reference_ = 0;
    for (std::size_t s = 1; s < strata.size(); ++s)
      if (strata[s].rows.size() > strata[reference_].rows.size()) reference_ = s;
    Eigen::MatrixXd D(static_cast<Eigen::Index>(strata.size() - 1), static_cast<Eigen::Index>(k_));
    Eigen::Index r = 0;
    for (std::size_t s = 0; s < strata.size(); ++s) {
      if (s == reference_) continue;
      others_.push_back(s);
      for (std::size_t j = 0; j < k_; ++j)
        D(r, static_cast<Eigen::Index>(j)) = strata[s].z[j] - strata[reference_].z[j];
      ++r;
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(D);
    qr.setThreshold(1e-10);
    if (qr.rank() < static_cast<Eigen::Index>(k_))
      throw IdentificationError("covariate strata do not separate all " + std::to_string(k_) + " coefficients");
    pinv_ = (D.transpose() * D).ldlt().solve(D.transpose());
  }

  std::size_t k() const { return k_; }
  std::size_t reference() const { return reference_; }

  // Effect vector at duration x from the strata curves.
  std::vector<double> effect(double x, std::span<const CgeCurve> curves) const {
    const double sref = evaluate(curves[reference_], x);
    check(sref, x);
    Eigen::VectorXd ratio(static_cast<Eigen::Index>(others_.size()));
    for (std::size_t j = 0; j < others_.size(); ++j) {
      const double s = evaluate(curves[others_[j]], x);
      check(s, x);
      ratio(static_cast<Eigen::Index>(j)) = std::log(std::log(s) / std::log(sref));
    }
    const Eigen::VectorXd b = pinv_ * ratio;
    return {b.data(), b.data() + b.size()};
  }

 private:
  static void check(double s, double x) {
    if (!(s > 0.0 && s < 1.0))
      throw EstimationError("covariate effect undefined at x = " + std::to_string(x) +
                            ": a curve equals 0 or 1 there");
  }

  std::size_t k_ = 0;
  std::size_t reference_ = 0;
  std::vector<std::size_t> others_;
  Eigen::MatrixXd pinv_;
};

// Sample variance (divisor m - 1) of the component sums of m effect vectors
// stored row-major with k components each.
inline double effect_sum_variance(std::span<const double> effects, std::size_t k) {
  if (k == 0 || effects.size() % k != 0) throw DomainError("effects must hold whole k-vectors");
  const std::size_t m = effects.size() / k;
  if (m < 2) throw EstimationError("the variance criterion needs at least 2 kept rows");
  std::vector<double> sums(m, 0.0);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < k; ++j) sums[i] += effects[i * k + j];
  double mean = 0.0;
  for (double v : sums) mean += v;
  mean /= static_cast<double>(m);
  double ss = 0.0;
  for (double v : sums) ss += (v - mean) * (v - mean);
  return ss / static_cast<double>(m - 1);
}

struct VarianceValue {
  double value = 0.0;
  std::vector<double> beta_mean;
  TrimBounds trim;
};

template <ArchimedeanGenerator G>
VarianceValue variance_objective(const StratifiedFirstStage& fs, const StrataContrast& contrast, const G& gen) {
  const auto curves = fs.curves(gen);
  VarianceValue out;
  out.trim = trim_support(curves, fs.strata(), fs.data());
  const std::size_t k = contrast.k();
  std::vector<double> effects;
  effects.reserve(out.trim.kept.size() * k);
  for (auto i : out.trim.kept) {
    const auto b = contrast.effect(fs.data().x(i), curves);
    effects.insert(effects.end(), b.begin(), b.end());
  }
  out.value = effect_sum_variance(effects, k);
  out.beta_mean.assign(k, 0.0);
  const double m = static_cast<double>(out.trim.kept.size());
  for (std::size_t i = 0; i < out.trim.kept.size(); ++i)
    for (std::size_t j = 0; j < k; ++j) out.beta_mean[j] += effects[i * k + j] / m;
  if (!std::isfinite(out.value)) throw NumericError("variance criterion is not finite");
  return out;
}

inline VarianceValue variance_objective(const StratifiedFirstStage& fs, double theta) {
  return variance_objective(fs, StrataContrast(fs.strata()), ClaytonCopula(theta));
}

struct FitResult2SE {
  double tau_hat = 0.0;
  double theta_hat = 0.0;
  std::vector<double> beta_hat;
  double objective = 0.0;
  std::vector<TracePoint> trace;
  std::size_t grid_failures = 0;
  double x_star = 0.0;
  double x_double_star = 0.0;
  std::size_t kept_n = 0;
};

inline FitResult2SE fit_2se(const StratifiedFirstStage& fs, const TauGrid& grid = {},
                            const CriterionOptions& opts = {}) {
  const StrataContrast contrast(fs.strata());
  auto criterion = [&](double tau) {
    return variance_objective(fs, contrast, ClaytonCopula::from_tau(tau)).value;
  };
  const auto min = minimize_over_tau(criterion, grid.points(), opts.tolerance, opts.threads);

  FitResult2SE r;
  r.tau_hat = min.argmin;
  r.theta_hat = theta_from_tau(min.argmin);
  r.trace = min.trace;
  r.grid_failures = min.failures;
  const auto final = variance_objective(fs, contrast, ClaytonCopula(r.theta_hat));
  r.beta_hat = final.beta_mean;
  r.objective = final.value;
  r.x_star = final.trim.x_star;
  r.x_double_star = final.trim.x_double_star;
  r.kept_n = final.trim.kept.size();
  return r;
}

inline FitResult2SE fit_2se(const Dataset& ds, const TauGrid& grid = {}, const CriterionOptions& opts = {}) {
  return fit_2se(StratifiedFirstStage(ds), grid, opts);
}

}  // namespace singlerisk
