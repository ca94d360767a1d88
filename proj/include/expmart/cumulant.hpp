#pragma once

#include <vector>

#include "expmart/characteristics.hpp"
#include "expmart/linalg.hpp"
#include "expmart/report.hpp"
#include "expmart/time_function.hpp"
#include "expmart/triplet.hpp"

namespace expmart {

/// Deterministic bounded integrand lambda(t).
class StrategyPath {
 public:
  static StrategyPath constant(Vec lambda);
  static StrategyPath constant(double lambda) { return constant(Vec::Constant(1, lambda)); }
  static StrategyPath piecewise(std::vector<double> breaks, std::vector<Vec> values);
  /// bound must dominate sup_t |lambda(t)|; it is spot-checked on a grid of [0, horizon].
  static StrategyPath callable(int dim, TimeFunction<Vec>::Callable fn, double bound, double horizon,
                               std::vector<double> breaks = {});

  int dim() const { return dim_; }
  Vec operator()(double t) const { return fn_(t); }
  bool piecewise_constant() const { return fn_.is_piecewise_constant(); }
  const std::vector<double>& breakpoints() const { return fn_.breakpoints(); }
  const TimeFunction<Vec>& function() const { return fn_; }
  double sup_norm() const { return bound_; }
  /// Piecewise constant with every value zero.
  bool is_zero() const;

 private:
  StrategyPath(int dim, TimeFunction<Vec> fn, double bound) : dim_(dim), fn_(std::move(fn)), bound_(bound) {}
  int dim_;
  TimeFunction<Vec> fn_;
  double bound_;
};

struct CumulantParts {
  double drift = 0.0;
  double diffusion = 0.0;
  double jump = 0.0;
  double total() const { return drift + diffusion + jump; }
};

/// <l, b_t> + 1/2 <l, c_t l> + int (e^{<l,x>} - 1 - <l, h(x)>) F_t(dx).
/// Throws NotExponentiallySpecialError when the jump integral is infinite.
CumulantParts laplace_cumulant(const CharacteristicTriplet& tr, const Vec& lambda, double t,
                               const QuadratureOptions& opts = {});

/// K_t = int_0^t kappa_s(lambda_s) a(s) ds at the nodes of a grid starting at 0.
struct CumulantPath {
  std::vector<double> grid;
  std::vector<double> values;
  std::vector<CumulantParts> parts;

  /// Value at a grid node; throws if t is not a node.
  double at(double t) const;
  double terminal() const { return values.back(); }
};

CumulantPath cumulant_process(const CharacteristicTriplet& tr, const StrategyPath& s, const std::vector<double>& grid,
                              const QuadratureOptions& opts = {});

/// int_{t0}^{t1} kappa_s(u) a(s) ds for a fixed vector u.
CumulantParts cumulant_integral(const CharacteristicTriplet& tr, const Vec& u, double t0, double t1,
                                const QuadratureOptions& opts = {});

/// int_0^T int e^{<l_s,x>} 1{<l_s,x> > 1} F_s(dx) dA_s; pass iff finite.
ConditionReport check_exponentially_special(const CharacteristicTriplet& tr, const StrategyPath& s, double T,
                                            const QuadratureOptions& opts = {});

}  // namespace expmart
