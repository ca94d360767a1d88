#pragma once

#include <optional>

#include "expmart/cumulant.hpp"
#include "expmart/report.hpp"
#include "expmart/triplet.hpp"

namespace expmart {

/// 1/2 int <l,c l> dA + int int ((<l,x> - 1) e^{<l,x>} + 1) F(dx) dA over [0, T].
QuadResult novikov_quad(const CharacteristicTriplet& tr, const StrategyPath& s, double T,
                        const QuadratureOptions& opts = {});
/// int <l,c l> dA + int int (1 - e^{<l,x>/2})^2 F(dx) dA over [0, T].
QuadResult hellinger_quad(const CharacteristicTriplet& tr, const StrategyPath& s, double T,
                          const QuadratureOptions& opts = {});

/// Value of novikov_quad; +inf when divergent, QuadratureError when undecided.
double novikov_integral(const CharacteristicTriplet& tr, const StrategyPath& s, double T,
                        const QuadratureOptions& opts = {});
double hellinger_integral(const CharacteristicTriplet& tr, const StrategyPath& s, double T,
                          const QuadratureOptions& opts = {});

/// kind is one of A1, A2, B1, B2, C1, C2. A-kinds need d = 1 and use lambda = 1.
/// The 2-kinds are evaluated on [0, horizon] and flagged as finite-horizon
/// surrogates. kappa bounds the C-kinds; without it they pass iff finite.
ConditionReport check_condition(const CharacteristicTriplet& tr, const StrategyPath& s, double T, ConditionId kind,
                                std::optional<double> kappa = std::nullopt, const QuadratureOptions& opts = {});

/// ((u - 1) e^u + 1) - (1 - e^{u/2})^2, nonnegative for all u.
double dominance_gap(double u);

enum class PiiClass { Martingale, NotExponentiallySpecial, Indeterminate };
std::string to_string(PiiClass c);

/// Exponential specialness of lambda . X on [0, horizon], which for
/// deterministic characteristics decides the true martingale property.
PiiClass pii_martingale_classification(const CharacteristicTriplet& tr, const StrategyPath& s,
                                       const QuadratureOptions& opts = {});

}  // namespace expmart
