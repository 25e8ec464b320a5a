#pragma once

// Nonparametric first stage within one covariate stratum: the empirical
// survivor function of the observed duration and the empirical
// sub-distribution (cumulative incidence) of one cause.

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <span>
#include <vector>

#include "singlerisk/data.hpp"
#include "singlerisk/error.hpp"
#include "singlerisk/step_function.hpp"

namespace singlerisk {

namespace detail {

inline std::vector<std::size_t> order_by(std::span<const double> x) {
  std::vector<std::size_t> o(x.size());
  std::iota(o.begin(), o.end(), std::size_t{0});
  std::stable_sort(o.begin(), o.end(), [&](auto a, auto b) { return x[a] < x[b]; });
  return o;
}

}  // namespace detail

// pi(t) = #{x_i > t} / n.
inline StepFunction overall_survival(std::span<const double> x) {
  if (x.empty()) throw DataError("overall survival of an empty stratum");
  std::vector<double> sorted(x.begin(), x.end());
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  std::vector<double> times, values;
  for (std::size_t i = 0; i < sorted.size();) {
    std::size_t j = i;
    while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
    times.push_back(sorted[i]);
    values.push_back(static_cast<double>(sorted.size() - j) / n);
    i = j;
  }
  return StepFunction(1.0, std::move(times), std::move(values));
}

// F(t) = #{x_i <= t, delta_i = cause} / n.
inline StepFunction sub_distribution(std::span<const double> x, std::span<const int> delta, int cause = 1) {
  if (x.empty()) throw DataError("sub-distribution of an empty stratum");
  if (x.size() != delta.size()) throw DomainError("x and delta differ in length");
  const auto o = detail::order_by(x);
  const double n = static_cast<double>(x.size());
  std::vector<double> times, values;
  std::size_t count = 0;
  for (std::size_t a = 0; a < o.size();) {
    std::size_t b = a;
    std::size_t hits = 0;
    while (b < o.size() && x[o[b]] == x[o[a]]) hits += delta[o[b++]] == cause ? 1 : 0;
    if (hits > 0) {
      count += hits;
      times.push_back(x[o[a]]);
      values.push_back(static_cast<double>(count) / n);
    }
    a = b;
  }
  return StepFunction(0.0, std::move(times), std::move(values));
}

// Row subset helpers for a stratum of a dataset.
inline std::vector<double> gather_x(const Dataset& ds, std::span<const std::size_t> rows) {
  std::vector<double> out;
  out.reserve(rows.size());
  for (auto i : rows) out.push_back(ds.x(i));
  return out;
}

inline std::vector<int> gather_delta(const Dataset& ds, std::span<const std::size_t> rows) {
  std::vector<int> out;
  out.reserve(rows.size());
  for (auto i : rows) out.push_back(ds.delta(i));
  return out;
}

}  // namespace singlerisk
