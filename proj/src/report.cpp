#include "expmart/report.hpp"

#include <array>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace expmart {
namespace {

constexpr std::array<const char*, 13> kConditionNames = {
    "A1", "A2", "B1", "B2", "C1", "C2", "SL", "LLB", "EXPSPEC", "LEVYINT", "PIIAC", "L1", "L2"};

}  // namespace

std::string to_string(ConditionId id) { return kConditionNames[static_cast<std::size_t>(id)]; }

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::Pass:
      return "pass";
    case Verdict::Fail:
      return "fail";
    case Verdict::Indeterminate:
      return "indeterminate";
  }
  return "?";
}

ConditionId parse_condition_id(const std::string& name) {
  for (std::size_t i = 0; i < kConditionNames.size(); ++i) {
    if (name == kConditionNames[i]) return static_cast<ConditionId>(i);
  }
  throw std::invalid_argument("unknown condition id '" + name + "'");
}

ConditionReport report_from_integral(ConditionId id, double horizon, const QuadResult& integral,
                                     std::optional<double> bound) {
  ConditionReport r;
  r.id = id;
  r.horizon = horizon;
  r.value = integral.value;
  r.bound = bound;
  r.diagnostics = integral.diagnostic;
  switch (integral.status) {
    case QuadStatus::Converged:
      if (!std::isfinite(integral.value)) {
        r.verdict = Verdict::Fail;
      } else if (bound && integral.value > *bound) {
        r.verdict = Verdict::Fail;
        r.diagnostics += (r.diagnostics.empty() ? "" : "; ") + std::string("value exceeds bound");
      } else {
        r.verdict = Verdict::Pass;
      }
      break;
    case QuadStatus::Divergent:
      r.verdict = Verdict::Fail;
      r.value = std::numeric_limits<double>::infinity();
      break;
    case QuadStatus::NotConverged:
      r.verdict = Verdict::Indeterminate;
      break;
  }
  return r;
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string format_short(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string csv_row(const ConditionReport& r) {
  std::string row = to_string(r.id) + "," + format_number(r.horizon) + "," + format_number(r.value) + ",";
  if (r.bound) row += format_number(*r.bound);
  row += "," + to_string(r.verdict);
  return row;
}

}  // namespace expmart
