#pragma once

#include <algorithm>
#include <functional>
#include <stdexcept>
#include <utility>
#include <vector>

namespace expmart {

/// A deterministic function of time, either piecewise constant or an
/// arbitrary callable with optional declared breakpoints.
///
/// Piecewise-constant values are left-continuous: value i holds on
/// (breaks[i-1], breaks[i]], the first piece also covers t = 0 and the last
/// extends to +infinity.
template <class Value>
class TimeFunction {
 public:
  using Callable = std::function<Value(double)>;

  TimeFunction() = default;

  static TimeFunction constant(Value v) { return piecewise({}, {std::move(v)}); }

  static TimeFunction piecewise(std::vector<double> breaks, std::vector<Value> values) {
    if (values.size() != breaks.size() + 1) {
      throw std::invalid_argument("piecewise time function: need one more value than breakpoints");
    }
    if (!std::is_sorted(breaks.begin(), breaks.end()) ||
        std::adjacent_find(breaks.begin(), breaks.end()) != breaks.end()) {
      throw std::invalid_argument("piecewise time function: breakpoints must be strictly increasing");
    }
    TimeFunction f;
    f.breaks_ = std::move(breaks);
    f.values_ = std::move(values);
    return f;
  }

  static TimeFunction callable(Callable fn, std::vector<double> breaks = {}) {
    if (!fn) throw std::invalid_argument("callable time function: empty callable");
    std::sort(breaks.begin(), breaks.end());
    breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
    TimeFunction f;
    f.fn_ = std::move(fn);
    f.breaks_ = std::move(breaks);
    return f;
  }

  Value operator()(double t) const {
    if (fn_) return fn_(t);
    return values_[piece_index(t)];
  }

  bool is_piecewise_constant() const { return !fn_; }
  const std::vector<double>& breakpoints() const { return breaks_; }
  const std::vector<Value>& values() const { return values_; }

  std::size_t piece_index(double t) const {
    return static_cast<std::size_t>(
        std::lower_bound(breaks_.begin(), breaks_.end(), t) - breaks_.begin());
  }

 private:
  std::vector<double> breaks_;
  std::vector<Value> values_;
  Callable fn_;
};

}  // namespace expmart
