#pragma once

// Nonparametric row bootstrap with percentile intervals.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "singlerisk/data.hpp"
#include "singlerisk/error.hpp"
#include "singlerisk/parallel.hpp"
#include "singlerisk/rng.hpp"

namespace singlerisk {

// Sample quantile with linear interpolation between order statistics
// (Hyndman-Fan type 7). `sorted` must be ascending.
inline double quantile_sorted(const std::vector<double>& sorted, double p) {
  if (sorted.empty()) throw DomainError("quantile of an empty sample");
  if (!(p >= 0.0 && p <= 1.0)) throw DomainError("quantile level must lie in [0,1]");
  const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

struct Interval {
  double lower = 0.0;
  double upper = 0.0;
};

struct BootstrapResult {
  std::vector<double> point;
  std::vector<std::vector<double>> replicates;  // successful replicates in replicate order
  std::vector<std::size_t> replicate_ids;       // r for each stored replicate
  std::vector<double> se;
  std::vector<Interval> ci;
  double level = 0.95;
  std::size_t requested = 0;
  std::size_t failures = 0;

  std::size_t effective() const { return requested - failures; }
};

// Row indices of bootstrap replicate r: n draws with replacement from the
// stream (seed, r).
inline std::vector<std::size_t> resample_rows(std::size_t n, std::uint64_t seed, std::size_t r) {
  Rng rng(seed, r);
  std::vector<std::size_t> rows(n);
  for (auto& i : rows) i = static_cast<std::size_t>(rng.below(n));
  return rows;
}

// `fit` maps a Dataset to a parameter vector; singlerisk::Error thrown on a
// resample counts that replicate as failed. Any error at the point estimate
// propagates.
template <class Fit>
BootstrapResult bootstrap(Fit&& fit, const Dataset& ds, std::size_t B, double level, std::uint64_t seed,
                          unsigned threads = 1) {
  if (B < 2) throw DomainError("bootstrap needs B >= 2");
  if (!(level > 0.0 && level < 1.0)) throw DomainError("confidence level must lie in (0,1)");

  BootstrapResult out;
  out.level = level;
  out.requested = B;
  out.point = fit(ds);
  const std::size_t p = out.point.size();

  std::vector<std::optional<std::vector<double>>> slots(B);
  parallel_for(B, threads, [&](std::size_t r) {
    try {
      auto est = fit(ds.select(resample_rows(ds.size(), seed, r)));
      if (est.size() != p) throw EstimationError("replicate returned a parameter vector of the wrong size");
      bool finite = std::all_of(est.begin(), est.end(), [](double v) { return std::isfinite(v); });
      if (finite) slots[r] = std::move(est);
    } catch (const Error&) {
    }
  });

  for (std::size_t r = 0; r < B; ++r) {
    if (!slots[r]) {
      ++out.failures;
      continue;
    }
    out.replicates.push_back(std::move(*slots[r]));
    out.replicate_ids.push_back(r);
  }
  if (2 * out.failures > B)
    throw TooManyFailuresError(std::to_string(out.failures) + " of " + std::to_string(B) +
                               " bootstrap replicates failed");
  if (out.replicates.size() < 2) throw TooManyFailuresError("fewer than 2 bootstrap replicates succeeded");

  const double m = static_cast<double>(out.replicates.size());
  out.se.assign(p, 0.0);
  out.ci.assign(p, {});
  std::vector<double> col(out.replicates.size());
  for (std::size_t j = 0; j < p; ++j) {
    double mean = 0.0;
    for (std::size_t r = 0; r < col.size(); ++r) mean += (col[r] = out.replicates[r][j]);
    mean /= m;
    double ss = 0.0;
    for (double v : col) ss += (v - mean) * (v - mean);
    out.se[j] = std::sqrt(ss / (m - 1.0));
    std::sort(col.begin(), col.end());
    out.ci[j] = {quantile_sorted(col, 0.5 * (1.0 - level)), quantile_sorted(col, 0.5 * (1.0 + level))};
  }
  return out;
}

}  // namespace singlerisk
