#pragma once

#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "expmart/linalg.hpp"
#include "expmart/quadrature.hpp"
#include "expmart/truncation.hpp"

namespace expmart {

/// Radial region lo < |x| <= hi of the jump space.
struct Region {
  double lo = 0.0;
  double hi = std::numeric_limits<double>::infinity();

  static Region small(double r = 1.0) { return {0.0, r}; }
  static Region large(double r = 1.0) { return {r, std::numeric_limits<double>::infinity()}; }
  static Region all() { return {}; }
  bool contains(double norm) const { return norm > lo && norm <= hi; }
};

// ---------------------------------------------------------------------------
// Representations. These are plain descriptions; LevyMeasure::create checks
// them and is the only way to obtain a measure usable by the rest of the
// library.
// ---------------------------------------------------------------------------

struct NormalLaw {
  double mean = 0.0;
  double sd = 1.0;
};

/// p_up * eta_up e^{-eta_up x} on x > 0, (1 - p_up) * eta_down e^{eta_down x} on x < 0.
struct DoubleExponentialLaw {
  double p_up = 0.5;
  double eta_up = 1.0;
  double eta_down = 1.0;
};

struct UniformLaw {
  double lo = 0.0;
  double hi = 1.0;
};

using JumpLaw = std::variant<NormalLaw, DoubleExponentialLaw, UniformLaw>;

/// Finite-activity measure rate * law(dx).
struct CompoundPoisson {
  double rate = 0.0;
  JumpLaw law = NormalLaw{};
};

/// c_neg e^{-g|x|} |x|^{-1-alpha} on x < 0 and c_pos e^{-m x} x^{-1-alpha} on x > 0.
struct TemperedStable {
  double c_neg = 0.0;
  double c_pos = 0.0;
  double g = 1.0;
  double m = 1.0;
  double alpha = 0.5;
};

/// One-dimensional density supplied as a callable on (lo, hi).
struct DensityMeasure {
  std::function<double(double)> density;
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
  std::string label = "density";
};

enum class TailKind { Zero, Exponential };

/// Piecewise-linear density on a grid with declared behaviour beyond the ends.
struct TabulatedDensity {
  std::vector<double> x;
  std::vector<double> f;
  TailKind lower_tail = TailKind::Zero;
  TailKind upper_tail = TailKind::Zero;
  double lower_rate = 1.0;
  double upper_rate = 1.0;

  double operator()(double y) const;
};

struct PointMass {
  Vec location;
  double rate = 0.0;
};

struct PointMasses {
  int dim = 1;
  std::vector<PointMass> atoms;
};

struct ZeroMeasure {
  int dim = 1;
};

class LevyMeasure;
struct LevyMeasureSpec;

/// Independent coordinates: component j is a one-dimensional measure placed
/// on the j-th axis.
struct AxisProduct {
  std::vector<LevyMeasureSpec> components;
};

/// base(dx) * weight(x). Used for measures obtained by a change of measure.
struct WeightedMeasure {
  std::shared_ptr<const LevyMeasure> base;
  std::function<double(std::span<const double>)> weight;
};

struct LevyMeasureSpec {
  std::variant<ZeroMeasure, PointMasses, CompoundPoisson, TemperedStable, DensityMeasure,
               TabulatedDensity, AxisProduct, WeightedMeasure>
      rep = ZeroMeasure{};

  int dim() const;
  std::string describe() const;

  static LevyMeasureSpec none(int dim = 1) { return {ZeroMeasure{dim}}; }
  static LevyMeasureSpec point_mass(double x, double rate);
  static LevyMeasureSpec merton(double rate, double mean, double sd);
  static LevyMeasureSpec kou(double rate, double p_up, double eta_up, double eta_down);
  static LevyMeasureSpec uniform_jumps(double rate, double lo, double hi);
};

// ---------------------------------------------------------------------------
// Integrands
// ---------------------------------------------------------------------------

enum class IntegrandKind {
  Generic,
  Exp,                ///< e^{<l,x>}
  CompensatedExp,     ///< e^{<l,x>} - 1 - <l,h(x)>
  Hellinger,          ///< (1 - e^{<l,x>/2})^2
  Novikov,            ///< (<l,x> - 1) e^{<l,x>} + 1
  TruncatedSquare,    ///< |x|^2 min 1
  ExpTail,            ///< e^{<l,x>} 1{<l,x> > 1}
  AbsExpTail,         ///< e^{n|x|} 1{|x| > 1}
  ExpOutsideUnit,     ///< e^{<u,x>} 1{|x| > 1}
  WeightedHellinger,  ///< (1 - e^{<l,x>/2})^2 e^{<w,x>}
  Coordinate,         ///< x_j
  CoordinateSquare,   ///< x_j^2
  Norm,               ///< |x|
  One,
};

/// coef * y^power * e^{rate y} restricted to lo < y < hi.
struct ExpPolyTerm {
  double coef;
  int power;
  double rate;
  double lo;
  double hi;
};

/// A function g on R^d integrated against a Levy measure. Named kinds carry
/// enough structure for registered closed forms; generic ones only evaluate.
class LevyIntegrand {
 public:
  using Fn = std::function<double(std::span<const double>)>;

  static LevyIntegrand exp(Vec lambda);
  static LevyIntegrand compensated_exp(Vec lambda, Truncation h);
  static LevyIntegrand hellinger(Vec lambda);
  static LevyIntegrand novikov(Vec lambda);
  static LevyIntegrand truncated_square(int dim);
  static LevyIntegrand exp_tail(Vec lambda);
  static LevyIntegrand abs_exp_tail(int dim, double n);
  static LevyIntegrand exp_outside_unit(Vec u);
  static LevyIntegrand weighted_hellinger(Vec lambda, Vec weight);
  static LevyIntegrand coordinate(int dim, int j);
  static LevyIntegrand coordinate_square(int dim, int j);
  static LevyIntegrand norm(int dim);
  static LevyIntegrand one(int dim);
  static LevyIntegrand generic(int dim, Fn fn);

  double operator()(std::span<const double> x) const;
  /// g(y e_axis)
  double on_axis(int axis, double y) const;
  /// Closed-form decomposition of y -> g(y e_axis); empty optional for generic integrands.
  std::optional<std::vector<ExpPolyTerm>> axis_terms(int axis) const;

  IntegrandKind kind() const { return kind_; }
  int dim() const { return dim_; }

 private:
  LevyIntegrand(IntegrandKind kind, int dim) : kind_(kind), dim_(dim) {}
  double scalar(double u, double v, double norm, double coord) const;

  IntegrandKind kind_;
  int dim_;
  Vec lambda_;
  Vec weight_;
  Truncation h_;
  double n_ = 0.0;
  int j_ = 0;
  Fn fn_;
};

// Numerically stable building blocks shared with the condition checkers.
double exp_compensated(double u);     ///< e^u - 1 - u
double novikov_integrand(double u);   ///< (u - 1) e^u + 1
double hellinger_integrand(double u); ///< (1 - e^{u/2})^2

// ---------------------------------------------------------------------------

/// Validated, immutable Levy measure. Copies share the representation.
class LevyMeasure {
 public:
  /// Checks structure and the integrability of |x|^2 min 1; throws
  /// std::invalid_argument when either fails.
  static LevyMeasure create(LevyMeasureSpec spec, const QuadratureOptions& opts = {});
  static LevyMeasure zero(int dim = 1);

  int dim() const { return spec_->dim(); }
  const LevyMeasureSpec& spec() const { return *spec_; }
  bool is_zero() const;
  bool finite_activity() const { return finite_activity_; }

  /// Integral of g over the region; registered closed forms are used when
  /// available, point masses are summed exactly, everything else goes
  /// through adaptive quadrature.
  QuadResult integrate(const LevyIntegrand& g, Region region = {}, const QuadratureOptions& opts = {}) const;
  /// Same integral with closed forms disabled.
  QuadResult integrate_numeric(const LevyIntegrand& g, Region region = {},
                               const QuadratureOptions& opts = {}) const;

 private:
  explicit LevyMeasure(std::shared_ptr<const LevyMeasureSpec> spec) : spec_(std::move(spec)) {}

  std::shared_ptr<const LevyMeasureSpec> spec_;
  bool finite_activity_ = true;
};

/// Integration on an unvalidated description (used by the integrability gate).
QuadResult integrate_spec(const LevyMeasureSpec& spec, const LevyIntegrand& g, Region region,
                          const QuadratureOptions& opts, bool closed_forms);

/// Structural checks only; throws std::invalid_argument.
void validate_structure(const LevyMeasureSpec& spec);

/// Density of a one-dimensional absolutely continuous measure and its support.
struct DensityView {
  std::function<double(double)> f;
  double lo;
  double hi;
};
/// Empty for point masses, zero measures and multi-dimensional representations.
std::optional<DensityView> density_view(const LevyMeasureSpec& spec);

/// Piecewise-constant-in-time Levy measure, left-continuous like TimeFunction.
class PiecewiseLevyMeasure {
 public:
  PiecewiseLevyMeasure() : pieces_{LevyMeasure::zero(1)} {}
  PiecewiseLevyMeasure(LevyMeasure constant) : pieces_{std::move(constant)} {}  // NOLINT
  PiecewiseLevyMeasure(std::vector<double> breaks, std::vector<LevyMeasure> pieces);

  const LevyMeasure& at(double t) const;
  std::size_t piece_index(double t) const;
  const std::vector<double>& breakpoints() const { return breaks_; }
  const std::vector<LevyMeasure>& pieces() const { return pieces_; }
  int dim() const { return pieces_.front().dim(); }
  bool is_zero() const;

 private:
  std::vector<double> breaks_;
  std::vector<LevyMeasure> pieces_;
};

}  // namespace expmart
