#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "expmart/quadrature.hpp"

namespace expmart {

enum class ConditionId { A1, A2, B1, B2, C1, C2, SL, LLB, EXPSPEC, LEVYINT, PIIAC, L1, L2 };
enum class Verdict { Pass, Fail, Indeterminate };

std::string to_string(ConditionId id);
std::string to_string(Verdict v);
ConditionId parse_condition_id(const std::string& name);

/// Outcome of a condition check. A pass always carries a finite value that
/// respects the bound when one is present.
struct ConditionReport {
  ConditionId id = ConditionId::B1;
  double horizon = 0.0;
  double value = 0.0;
  std::optional<double> bound;
  Verdict verdict = Verdict::Indeterminate;
  /// Set for infinite-horizon conditions evaluated on [0, T_max].
  bool finite_horizon_surrogate = false;
  std::string diagnostics;
  std::vector<std::pair<std::string, double>> partials;

  bool passed() const { return verdict == Verdict::Pass; }
};

/// Builds a report from an integral: pass iff converged, finite and within
/// the bound; divergence fails; non-convergence is indeterminate.
ConditionReport report_from_integral(ConditionId id, double horizon, const QuadResult& integral,
                                     std::optional<double> bound = std::nullopt);

/// One CSV row: condition,horizon,value,bound,verdict
std::string csv_row(const ConditionReport& r);
std::string format_number(double v);
/// Six significant digits, for messages.
std::string format_short(double v);

}  // namespace expmart
