#pragma once

#include <functional>
#include <vector>

#include "expmart/levy_measure.hpp"
#include "expmart/report.hpp"
#include "expmart/triplet.hpp"

namespace expmart {

/// Integrand of a time integral over a triplet's characteristics:
///   int_{t0}^{t1} [local(t) + int_region jump(t)(x) F_t(dx)] a(t) dt.
struct TimeIntegrand {
  std::function<double(double)> local;
  /// local is constant between breakpoints of the triplet and `breaks`.
  bool local_piecewise_constant = false;
  std::function<LevyIntegrand(double)> jump;
  /// jump(t) is constant between breakpoints of the triplet and `breaks`.
  bool jump_piecewise_constant = false;
  std::vector<double> breaks;
  Region region = Region::all();
};

/// Exact per piece where the data are piecewise constant, composite Gauss
/// quadrature in t otherwise.
QuadResult integrate_in_time(const CharacteristicTriplet& tr, double t0, double t1, const TimeIntegrand& g,
                             const QuadratureOptions& opts = {});

/// Value of int (|x|^2 min 1) F(dx); pass iff finite.
ConditionReport check_levy_integrability(const LevyMeasureSpec& F, const QuadratureOptions& opts = {});
/// Same check per time piece; the report carries the maximum and per-piece partials.
ConditionReport check_levy_integrability(const PiecewiseLevyMeasure& F, const QuadratureOptions& opts = {});

/// int_0^T (|b_s| + ||c_s|| + int (|x|^2 min 1) F_s(dx)) dA_s; pass iff finite.
ConditionReport check_piiac_integrability(const CharacteristicTriplet& tr, double T,
                                          const QuadratureOptions& opts = {});

/// Integral of g over the region. Divergent integrals return +inf; quadrature
/// that fails to converge throws QuadratureError with the partial estimate.
double integrate_levy(const LevyMeasure& F, const LevyIntegrand& g, Region region = Region::all(),
                      const QuadratureOptions& opts = {});

/// Re-expresses the drift for another truncation: b(h') = b(h) + int (h' - h) dF.
CharacteristicTriplet retruncate(const CharacteristicTriplet& tr, Truncation h_new);

}  // namespace expmart
