#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "singlerisk/error.hpp"

namespace singlerisk {

// One sampled unit: observed duration, risk label (0 = censored / other) and
// covariates.
struct Observation {
  double x = 0.0;
  int delta = 0;
  std::vector<double> z;
};

// Immutable column-oriented sample. Covariates are stored row-major.
class Dataset {
 public:
  Dataset() = default;

  Dataset(std::vector<double> x, std::vector<int> delta, std::vector<double> z, std::size_t k)
      : x_(std::move(x)), delta_(std::move(delta)), z_(std::move(z)), k_(k) {
    validate();
  }

  explicit Dataset(const std::vector<Observation>& rows) {
    if (!rows.empty()) k_ = rows.front().z.size();
    x_.reserve(rows.size());
    delta_.reserve(rows.size());
    z_.reserve(rows.size() * k_);
    for (const auto& r : rows) {
      if (r.z.size() != k_) throw DataError("observations disagree on covariate dimension");
      x_.push_back(r.x);
      delta_.push_back(r.delta);
      z_.insert(z_.end(), r.z.begin(), r.z.end());
    }
    validate();
  }

  std::size_t size() const { return x_.size(); }
  std::size_t k() const { return k_; }

  double x(std::size_t i) const { return x_[i]; }
  int delta(std::size_t i) const { return delta_[i]; }
  std::span<const double> z(std::size_t i) const { return {z_.data() + i * k_, k_}; }

  std::span<const double> x() const { return x_; }
  std::span<const int> delta() const { return delta_; }

  Observation row(std::size_t i) const {
    auto zi = z(i);
    return {x_[i], delta_[i], std::vector<double>(zi.begin(), zi.end())};
  }

  // Rows picked by index, duplicates allowed (bootstrap resamples).
  Dataset select(std::span<const std::size_t> rows) const {
    std::vector<double> x, z;
    std::vector<int> d;
    x.reserve(rows.size());
    d.reserve(rows.size());
    z.reserve(rows.size() * k_);
    for (auto i : rows) {
      x.push_back(x_[i]);
      d.push_back(delta_[i]);
      auto zi = this->z(i);
      z.insert(z.end(), zi.begin(), zi.end());
    }
    return Dataset(std::move(x), std::move(d), std::move(z), k_);
  }

 private:
  void validate() const {
    if (delta_.size() != x_.size() || z_.size() != x_.size() * k_)
      throw DataError("dataset columns have inconsistent lengths");
    if (x_.size() < 2) throw DataError("dataset needs at least 2 observations");
    for (std::size_t i = 0; i < x_.size(); ++i) {
      if (!(x_[i] > 0.0) || !std::isfinite(x_[i]))
        throw DataError("row " + std::to_string(i) + ": duration must be positive and finite");
      if (delta_[i] < 0) throw DataError("row " + std::to_string(i) + ": risk label must be >= 0");
    }
    for (double v : z_)
      if (!std::isfinite(v)) throw DataError("covariates must be finite");
  }

  std::vector<double> x_;
  std::vector<int> delta_;
  std::vector<double> z_;
  std::size_t k_ = 0;
};

// Column names used when reading a CSV. An empty z list means "every column
// named z1, z2, ... in order".
struct ColumnSpec {
  std::string x = "x";
  std::string delta = "delta";
  std::optional<std::vector<std::string>> z;
};

namespace detail {

inline std::vector<std::string_view> split_csv_line(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    auto pos = line.find(',', start);
    auto field = line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start);
    while (!field.empty() && (field.front() == ' ' || field.front() == '"')) field.remove_prefix(1);
    while (!field.empty() && (field.back() == ' ' || field.back() == '"' || field.back() == '\r'))
      field.remove_suffix(1);
    out.push_back(field);
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline std::optional<double> parse_double(std::string_view s) {
  if (s.empty()) return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) return std::nullopt;
  return v;
}

}  // namespace detail

inline Dataset parse_csv(std::istream& in, const ColumnSpec& spec = {}) {
  std::string line;
  if (!std::getline(in, line)) throw DataError("CSV input is empty (header row required)");
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
  const auto header = detail::split_csv_line(line);
  std::vector<std::string> names(header.begin(), header.end());

  auto find_col = [&](const std::string& name) -> std::size_t {
    auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end()) throw DataError("CSV header lacks column '" + name + "'");
    return static_cast<std::size_t>(it - names.begin());
  };
  const std::size_t xc = find_col(spec.x);
  const std::size_t dc = find_col(spec.delta);
  std::vector<std::size_t> zc;
  if (spec.z) {
    for (const auto& n : *spec.z) zc.push_back(find_col(n));
  } else {
    for (int j = 1;; ++j) {
      auto it = std::find(names.begin(), names.end(), "z" + std::to_string(j));
      if (it == names.end()) break;
      zc.push_back(static_cast<std::size_t>(it - names.begin()));
    }
  }

  std::vector<double> x, z;
  std::vector<int> d;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto f = detail::split_csv_line(line);
    const auto where = "line " + std::to_string(lineno);
    if (f.size() != names.size())
      throw DataError(where + ": expected " + std::to_string(names.size()) + " fields, got " +
                      std::to_string(f.size()));
    auto num = [&](std::size_t c) {
      auto v = detail::parse_double(f[c]);
      if (!v || !std::isfinite(*v))
        throw DataError(where + ": column '" + names[c] + "' is missing or not a number");
      return *v;
    };
    const double xv = num(xc);
    if (!(xv > 0.0)) throw DataError(where + ": duration " + std::string(f[xc]) + " is not positive");
    const double dv = num(dc);
    if (dv < 0 || dv != std::floor(dv))
      throw DataError(where + ": risk label must be a non-negative integer");
    x.push_back(xv);
    d.push_back(static_cast<int>(dv));
    for (auto c : zc) z.push_back(num(c));
  }
  if (x.empty()) throw DataError("CSV contains no data rows");
  return Dataset(std::move(x), std::move(d), std::move(z), zc.size());
}

inline Dataset load_csv(const std::string& path, const ColumnSpec& spec = {}) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  return parse_csv(in, spec);
}

// Single-risk view: the target cause becomes 1, every other label (other
// causes and censoring) becomes 0.
inline Dataset pool_risks(const Dataset& ds, int target) {
  std::vector<int> d(ds.size());
  bool found = false;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    d[i] = ds.delta(i) == target ? 1 : 0;
    found = found || d[i] == 1;
  }
  if (!found) throw DataError("risk " + std::to_string(target) + " does not occur in the data");
  std::vector<double> x(ds.x().begin(), ds.x().end()), z;
  z.reserve(ds.size() * ds.k());
  for (std::size_t i = 0; i < ds.size(); ++i) {
    auto zi = ds.z(i);
    z.insert(z.end(), zi.begin(), zi.end());
  }
  return Dataset(std::move(x), std::move(d), std::move(z), ds.k());
}

struct Stratum {
  std::vector<double> z;
  std::vector<std::size_t> rows;
};

// Partition of rows by distinct covariate vector, ordered lexicographically.
struct StrataIndex {
  std::vector<Stratum> strata;

  std::size_t size() const { return strata.size(); }
  const Stratum& operator[](std::size_t s) const { return strata[s]; }
};

inline constexpr std::size_t kMaxStrata = 64;

inline StrataIndex stratify(const Dataset& ds) {
  std::map<std::vector<double>, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    auto zi = ds.z(i);
    groups[std::vector<double>(zi.begin(), zi.end())].push_back(i);
    if (groups.size() > kMaxStrata)
      throw DataError("more than " + std::to_string(kMaxStrata) +
                      " distinct covariate vectors; continuous covariates are not supported");
  }
  StrataIndex idx;
  idx.strata.reserve(groups.size());
  for (auto& [z, rows] : groups) idx.strata.push_back({z, std::move(rows)});
  return idx;
}

}  // namespace singlerisk
