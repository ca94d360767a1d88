#pragma once

#include <vector>

#include "expmart/levy_measure.hpp"
#include "expmart/linalg.hpp"
#include "expmart/time_function.hpp"
#include "expmart/truncation.hpp"

namespace expmart {

struct TripletSpec {
  int dim = 1;
  TimeFunction<Vec> drift;
  TimeFunction<Mat> diffusion;
  PiecewiseLevyMeasure levy;
  TimeFunction<double> activity = TimeFunction<double>::constant(1.0);
  Truncation truncation;
  double horizon = 1.0;
};

/// Deterministic differential characteristics (b(h), c, F; A) with dA = a(t) dt.
class CharacteristicTriplet {
 public:
  /// Validates dimensions, symmetry and positive semidefiniteness of c on a
  /// grid, nonnegativity of a and admissibility of the truncation.
  static CharacteristicTriplet create(TripletSpec spec);

  /// Time-homogeneous triplet (a Levy process on [0, horizon]).
  static CharacteristicTriplet homogeneous(Vec b, Mat c, LevyMeasure F, Truncation h, double horizon);
  /// One-dimensional shorthand.
  static CharacteristicTriplet scalar(double b, double c, LevyMeasure F, Truncation h = Truncation::standard(),
                                      double horizon = 1.0);

  int dim() const { return spec_.dim; }
  double horizon() const { return spec_.horizon; }
  const Truncation& truncation() const { return spec_.truncation; }

  Vec b(double t) const { return spec_.drift(t); }
  Mat c(double t) const { return spec_.diffusion(t); }
  const LevyMeasure& F(double t) const { return spec_.levy.at(t); }
  double a(double t) const { return spec_.activity(t); }

  const TimeFunction<Vec>& drift() const { return spec_.drift; }
  const TimeFunction<Mat>& diffusion() const { return spec_.diffusion; }
  const PiecewiseLevyMeasure& levy() const { return spec_.levy; }
  const TimeFunction<double>& activity() const { return spec_.activity; }
  const TripletSpec& spec() const { return spec_; }

  /// Sorted union of all declared breakpoints strictly inside (0, horizon).
  std::vector<double> breakpoints() const;
  /// True when b, c and a are piecewise constant (F always is).
  bool piecewise_constant() const;

 private:
  explicit CharacteristicTriplet(TripletSpec spec) : spec_(std::move(spec)) {}
  TripletSpec spec_;
};

/// Sorted, de-duplicated union of breakpoint lists restricted to (lo, hi).
std::vector<double> merge_breaks(const std::vector<std::vector<double>>& lists, double lo, double hi);

}  // namespace expmart
