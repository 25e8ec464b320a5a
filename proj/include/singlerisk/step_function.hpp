#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "singlerisk/error.hpp"

namespace singlerisk {

// Right-continuous piecewise-constant function on [0, inf).
// value(t) = initial for t < jump_times[0], values[i] on [jump_times[i], jump_times[i+1]).
class StepFunction {
 public:
  StepFunction() = default;

  StepFunction(double initial, std::vector<double> jump_times, std::vector<double> values)
      : initial_(initial), times_(std::move(jump_times)), values_(std::move(values)) {
    if (times_.size() != values_.size())
      throw DomainError("step function needs one value per jump time");
    for (std::size_t i = 1; i < times_.size(); ++i)
      if (!(times_[i] > times_[i - 1]))
        throw DomainError("step function jump times must be strictly increasing");
  }

  double initial_value() const { return initial_; }
  std::span<const double> jump_times() const { return times_; }
  std::span<const double> values() const { return values_; }
  std::size_t jumps() const { return times_.size(); }
  double final_value() const { return values_.empty() ? initial_ : values_.back(); }

  // Number of jump times <= t.
  std::size_t count_upto(double t) const {
    return static_cast<std::size_t>(std::upper_bound(times_.begin(), times_.end(), t) - times_.begin());
  }

  double operator()(double t) const { return value_after(count_upto(t)); }

  double left_limit(double t) const {
    auto m = static_cast<std::size_t>(std::lower_bound(times_.begin(), times_.end(), t) - times_.begin());
    return value_after(m);
  }

  // Value once the first m jumps have happened.
  double value_after(std::size_t m) const { return m == 0 ? initial_ : values_[m - 1]; }

 private:
  double initial_ = 0.0;
  std::vector<double> times_;
  std::vector<double> values_;
};

}  // namespace singlerisk
