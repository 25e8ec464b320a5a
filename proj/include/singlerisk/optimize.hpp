#pragma once

// Scalar minimisation over Kendall's tau: a full grid scan (the criteria are
// multimodal) followed by golden-section refinement inside the bracket around
// the best grid point.

#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "singlerisk/data.hpp"
#include "singlerisk/error.hpp"
#include "singlerisk/parallel.hpp"

namespace singlerisk {

struct TauGrid {
  double lo = -0.90;
  double hi = 0.90;
  double step = 0.05;

  void validate() const {
    if (!(lo > -1.0 && hi < 1.0 && lo <= hi)) throw DomainError("tau grid must satisfy -1 < lo <= hi < 1");
    if (!(step > 0.0)) throw DomainError("tau grid step must be positive");
  }

  std::vector<double> points() const {
    validate();
    std::vector<double> out;
    const auto n = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9));
    for (std::size_t i = 0; i <= n; ++i) {
      double t = lo + static_cast<double>(i) * step;
      // Snap values like 0.30000000000000004 onto the decimal grid.
      t = std::round(t * 1e12) / 1e12;
      out.push_back(t);
    }
    return out;
  }

  // "lo:hi:step"
  static TauGrid parse(std::string_view s) {
    auto c1 = s.find(':');
    auto c2 = c1 == std::string_view::npos ? c1 : s.find(':', c1 + 1);
    if (c2 == std::string_view::npos) throw DomainError("tau grid must look like lo:hi:step");
    auto lo = detail::parse_double(s.substr(0, c1));
    auto hi = detail::parse_double(s.substr(c1 + 1, c2 - c1 - 1));
    auto st = detail::parse_double(s.substr(c2 + 1));
    if (!lo || !hi || !st) throw DomainError("tau grid must look like lo:hi:step");
    TauGrid g{*lo, *hi, *st};
    g.validate();
    return g;
  }
};

struct TracePoint {
  double tau;
  double value;  // NaN when the criterion could not be evaluated
};

struct MinimizeResult {
  double argmin = 0.0;
  double value = 0.0;
  std::vector<TracePoint> trace;  // grid points in order
  std::size_t failures = 0;       // failed grid evaluations
};

template <class F>
double golden_section(F&& f, double lo, double hi, double tol) {
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c = b - g * (b - a), d = a + g * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > tol) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - g * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + g * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

// `criterion(tau)` may throw an EstimationError/DomainError; such points are
// recorded as NaN and skipped.
template <class F>
MinimizeResult minimize_over_tau(F&& criterion, const std::vector<double>& grid, double tol = 1e-4,
                                 unsigned threads = 1) {
  if (grid.empty()) throw DomainError("tau grid is empty");
  constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
  auto safe = [&](double tau) {
    try {
      const double v = criterion(tau);
      return std::isfinite(v) ? v : kNaN;
    } catch (const Error&) {
      return kNaN;
    }
  };

  MinimizeResult r;
  r.trace.resize(grid.size());
  parallel_for(grid.size(), threads, [&](std::size_t i) { r.trace[i] = {grid[i], safe(grid[i])}; });

  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (std::isnan(r.trace[i].value)) {
      ++r.failures;
      continue;
    }
    if (!best || r.trace[i].value < r.trace[*best].value) best = i;
  }
  if (!best) throw EstimationError("criterion could not be evaluated at any grid point");

  r.argmin = grid[*best];
  r.value = r.trace[*best].value;
  if (grid.size() > 1) {
    const double lo = grid[*best == 0 ? 0 : *best - 1];
    const double hi = grid[std::min(*best + 1, grid.size() - 1)];
    auto penalised = [&](double tau) {
      const double v = safe(tau);
      return std::isnan(v) ? std::numeric_limits<double>::infinity() : v;
    };
    const double t = golden_section(penalised, lo, hi, tol);
    const double v = penalised(t);
    if (v <= r.value) {
      r.argmin = t;
      r.value = v;
    }
  }
  return r;
}

}  // namespace singlerisk
