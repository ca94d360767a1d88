#include "expmart/conditions.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "expmart/errors.hpp"

namespace expmart {
namespace {

QuadResult condition_quad(const CharacteristicTriplet& tr, const StrategyPath& s, double T, double diffusion_weight,
                          bool novikov, const QuadratureOptions& opts) {
  if (!(T > 0.0) || T > tr.horizon() * (1.0 + 1e-12)) throw std::invalid_argument("condition: need 0 < T <= horizon");
  if (s.dim() != tr.dim()) throw std::invalid_argument("condition: strategy dimension does not match the driver");
  if (s.is_zero()) return {};
  TimeIntegrand g;
  g.local = [&s, &tr, diffusion_weight](double t) {
    const Vec l = s(t);
    return diffusion_weight * l.dot(tr.c(t) * l);
  };
  g.local_piecewise_constant = s.piecewise_constant() && tr.diffusion().is_piecewise_constant();
  if (novikov) {
    g.jump = [&s](double t) { return LevyIntegrand::novikov(s(t)); };
  } else {
    g.jump = [&s](double t) { return LevyIntegrand::hellinger(s(t)); };
  }
  g.jump_piecewise_constant = s.piecewise_constant();
  g.breaks = s.breakpoints();
  return integrate_in_time(tr, 0.0, T, g, opts);
}

double value_or_throw(const QuadResult& r) {
  switch (r.status) {
    case QuadStatus::Converged:
      return r.value;
    case QuadStatus::Divergent:
      return std::numeric_limits<double>::infinity();
    case QuadStatus::NotConverged:
      break;
  }
  throw QuadratureError("condition integral did not converge: " + r.diagnostic, r.value);
}

}  // namespace

QuadResult novikov_quad(const CharacteristicTriplet& tr, const StrategyPath& s, double T,
                        const QuadratureOptions& opts) {
  return condition_quad(tr, s, T, 0.5, true, opts);
}

QuadResult hellinger_quad(const CharacteristicTriplet& tr, const StrategyPath& s, double T,
                          const QuadratureOptions& opts) {
  return condition_quad(tr, s, T, 1.0, false, opts);
}

double novikov_integral(const CharacteristicTriplet& tr, const StrategyPath& s, double T,
                        const QuadratureOptions& opts) {
  return value_or_throw(novikov_quad(tr, s, T, opts));
}

double hellinger_integral(const CharacteristicTriplet& tr, const StrategyPath& s, double T,
                          const QuadratureOptions& opts) {
  return value_or_throw(hellinger_quad(tr, s, T, opts));
}

ConditionReport check_condition(const CharacteristicTriplet& tr, const StrategyPath& s, double T, ConditionId kind,
                                std::optional<double> kappa, const QuadratureOptions& opts) {
  using C = ConditionId;
  if (kind != C::A1 && kind != C::A2 && kind != C::B1 && kind != C::B2 && kind != C::C1 && kind != C::C2) {
    throw std::invalid_argument("check_condition: unsupported kind " + to_string(kind));
  }
  const bool a_kind = kind == C::A1 || kind == C::A2;
  const bool c_kind = kind == C::C1 || kind == C::C2;
  const bool infinite_horizon = kind == C::A2 || kind == C::B2 || kind == C::C2;
  if (a_kind && tr.dim() != 1) {
    throw std::invalid_argument("check_condition: " + to_string(kind) + " needs a real-valued driver, got d=" +
                                std::to_string(tr.dim()));
  }
  if (kappa && !(*kappa >= 0.0)) throw std::invalid_argument("check_condition: kappa must be nonnegative");
  const double horizon = infinite_horizon ? tr.horizon() : T;
  const StrategyPath lambda = a_kind ? StrategyPath::constant(1.0) : s;
  const QuadResult r = c_kind ? hellinger_quad(tr, lambda, horizon, opts) : novikov_quad(tr, lambda, horizon, opts);
  ConditionReport rep = report_from_integral(kind, horizon, r, c_kind ? kappa : std::nullopt);
  rep.finite_horizon_surrogate = infinite_horizon;
  rep.diagnostics = r.diagnostic;
  if (infinite_horizon) {
    rep.diagnostics += std::string(rep.diagnostics.empty() ? "" : "; ") + "finite-horizon surrogate on [0, " +
                       format_number(horizon) + "]";
  }
  return rep;
}

double dominance_gap(double u) { return novikov_integrand(u) - hellinger_integrand(u); }

std::string to_string(PiiClass c) {
  switch (c) {
    case PiiClass::Martingale:
      return "Martingale";
    case PiiClass::NotExponentiallySpecial:
      return "NotExponentiallySpecial";
    case PiiClass::Indeterminate:
      return "Indeterminate";
  }
  return "?";
}

PiiClass pii_martingale_classification(const CharacteristicTriplet& tr, const StrategyPath& s,
                                       const QuadratureOptions& opts) {
  if (s.is_zero()) return PiiClass::Martingale;
  const ConditionReport r = check_exponentially_special(tr, s, tr.horizon(), opts);
  switch (r.verdict) {
    case Verdict::Pass:
      return PiiClass::Martingale;
    case Verdict::Fail:
      return PiiClass::NotExponentiallySpecial;
    case Verdict::Indeterminate:
      break;
  }
  return PiiClass::Indeterminate;
}

}  // namespace expmart
