#pragma once

#include <functional>
#include <string>

namespace expmart {

struct QuadratureOptions {
  double rel_tol = 1e-9;
  double abs_tol = 1e-300;
  int max_subdivisions = 400;
  /// Number of successive non-decaying shell contributions that declares an
  /// integral divergent.
  int divergence_levels = 8;
  double divergence_ratio = 1.0 - 1e-3;
  /// Cap on dyadic shells towards a singular endpoint or infinity.
  int max_levels = 1000;
};

enum class QuadStatus { Converged, Divergent, NotConverged };

struct QuadResult {
  double value = 0.0;
  double error = 0.0;
  QuadStatus status = QuadStatus::Converged;
  long evaluations = 0;
  std::string diagnostic;

  bool ok() const { return status == QuadStatus::Converged; }
};

using ScalarFn = std::function<double(double)>;

/// Adaptive Gauss-Kronrod (7/15) on a finite interval.
QuadResult gauss_kronrod(const ScalarFn& f, double a, double b, const QuadratureOptions& opts = {});

/// Integral of f over (0, pivot] by dyadic shells (pivot/2^{j+1}, pivot/2^j].
/// With floor > 0 the shells stop at floor; with floor == 0 the shell
/// sequence is monitored for divergence and geometric tails are
/// extrapolated.
QuadResult integrate_towards_zero(const ScalarFn& f, double pivot, double floor,
                                  const QuadratureOptions& opts = {});

/// Integral of f over [pivot, ceiling) by doubling shells. ceiling may be
/// +infinity, in which case divergence is monitored.
QuadResult integrate_towards_infinity(const ScalarFn& f, double pivot, double ceiling,
                                      const QuadratureOptions& opts = {});

/// Integral of f over the positive radial range (lo, hi], 0 <= lo < hi <= inf,
/// split at 1 so near-zero and tail behaviour are handled separately.
QuadResult integrate_radial(const ScalarFn& f, double lo, double hi, const QuadratureOptions& opts = {});

/// Time integral on [a, b]: composite 5-point Gauss-Legendre with panel
/// doubling, falling back to endpoint shells that detect divergence.
QuadResult integrate_time(const ScalarFn& f, double a, double b, double tol = 1e-10,
                          const QuadratureOptions& opts = {});

/// Sum of two partial results with status propagation.
QuadResult combine(const QuadResult& x, const QuadResult& y);

}  // namespace expmart
