#include "expmart/levy_measure.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "expmart/report.hpp"

namespace expmart {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

double normal_pdf(double z) { return std::isinf(z) ? 0.0 : kInvSqrt2Pi * std::exp(-0.5 * z * z); }

// P(a < Z < b) for standard normal Z, accurate in either tail.
double normal_interval(double a, double b) {
  if (!(b > a)) return 0.0;
  if (a >= 0.0) return 0.5 * (std::erfc(a * kInvSqrt2) - std::erfc(b * kInvSqrt2));
  if (b <= 0.0) return 0.5 * (std::erfc(-b * kInvSqrt2) - std::erfc(-a * kInvSqrt2));
  return 1.0 - 0.5 * std::erfc(-a * kInvSqrt2) - 0.5 * std::erfc(b * kInvSqrt2);
}

// E[Y^k 1{lo < Y < hi}] for Y ~ N(m, s^2), k in {0, 1, 2}.
double truncated_normal_moment(int k, double m, double s, double lo, double hi) {
  const double a = (lo - m) / s;
  const double b = (hi - m) / s;
  const double p = normal_interval(a, b);
  const double pa = normal_pdf(a);
  const double pb = normal_pdf(b);
  const double apa = std::isinf(a) ? 0.0 : a * pa;
  const double bpb = std::isinf(b) ? 0.0 : b * pb;
  switch (k) {
    case 0:
      return p;
    case 1:
      return m * p + s * (pa - pb);
    case 2:
      return m * m * p + 2.0 * m * s * (pa - pb) + s * s * (p + apa - bpb);
    default:
      throw std::invalid_argument("truncated_normal_moment: power must be 0, 1 or 2");
  }
}

double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

// Integral of x^k e^{r x} over (a, b); +inf when it diverges.
double exp_poly_integral(int k, double r, double a, double b) {
  if (!(b > a)) return 0.0;
  if (r == 0.0) {
    if (std::isinf(a) || std::isinf(b)) return kInf;
    return (std::pow(b, k + 1) - std::pow(a, k + 1)) / (k + 1);
  }
  if (std::isinf(b) && r > 0.0) return kInf;
  if (std::isinf(a) && r < 0.0) return kInf;
  if (!std::isinf(a) && !std::isinf(b) && std::abs(r) * std::max(std::abs(a), std::abs(b)) < 0.05) {
    double sum = 0.0;
    double rm = 1.0;
    for (int m = 0; m < 30; ++m) {
      const int p = k + m + 1;
      sum += rm / factorial(m) * (std::pow(b, p) - std::pow(a, p)) / p;
      rm *= r;
    }
    return sum;
  }
  auto antiderivative = [&](double x) {
    if (std::isinf(x)) return 0.0;
    double poly = 0.0;
    double falling = 1.0;  // k!/(k-i)!
    double sign = 1.0;
    double rpow = r;
    for (int i = 0; i <= k; ++i) {
      poly += sign * falling * std::pow(x, k - i) / rpow;
      falling *= (k - i);
      sign = -sign;
      rpow *= r;
    }
    return std::exp(r * x) * poly;
  };
  return antiderivative(b) - antiderivative(a);
}

// Integral of y^k e^{theta y} over (lo, hi) against a compound-Poisson measure.
double compound_poisson_moment(const CompoundPoisson& cp, int k, double theta, double lo, double hi) {
  if (cp.rate == 0.0 || !(hi > lo)) return 0.0;
  return std::visit(
      Overloaded{
          [&](const NormalLaw& n) {
            const double tilt = std::exp(theta * n.mean + 0.5 * theta * theta * n.sd * n.sd);
            return cp.rate * tilt *
                   truncated_normal_moment(k, n.mean + theta * n.sd * n.sd, n.sd, lo, hi);
          },
          [&](const DoubleExponentialLaw& d) {
            double total = 0.0;
            if (hi > 0.0 && d.p_up > 0.0) {
              total += d.p_up * d.eta_up * exp_poly_integral(k, theta - d.eta_up, std::max(lo, 0.0), hi);
            }
            if (lo < 0.0 && d.p_up < 1.0) {
              total += (1.0 - d.p_up) * d.eta_down *
                       exp_poly_integral(k, theta + d.eta_down, lo, std::min(hi, 0.0));
            }
            return cp.rate * total;
          },
          [&](const UniformLaw& u) {
            const double a = std::max(lo, u.lo);
            const double b = std::min(hi, u.hi);
            return cp.rate / (u.hi - u.lo) * exp_poly_integral(k, theta, a, b);
          },
      },
      cp.law);
}

double compound_poisson_density(const CompoundPoisson& cp, double y) {
  return std::visit(Overloaded{
                        [&](const NormalLaw& n) {
                          const double z = (y - n.mean) / n.sd;
                          return cp.rate * normal_pdf(z) / n.sd;
                        },
                        [&](const DoubleExponentialLaw& d) {
                          if (y > 0.0) return cp.rate * d.p_up * d.eta_up * std::exp(-d.eta_up * y);
                          if (y < 0.0)
                            return cp.rate * (1.0 - d.p_up) * d.eta_down * std::exp(d.eta_down * y);
                          return 0.0;
                        },
                        [&](const UniformLaw& u) {
                          return (y >= u.lo && y <= u.hi) ? cp.rate / (u.hi - u.lo) : 0.0;
                        },
                    },
                    cp.law);
}

}  // namespace

std::optional<DensityView> density_view(const LevyMeasureSpec& spec) {
  return std::visit(
      Overloaded{
          [](const CompoundPoisson& cp) -> std::optional<DensityView> {
            double lo = -kInf, hi = kInf;
            if (auto* u = std::get_if<UniformLaw>(&cp.law)) {
              lo = u->lo;
              hi = u->hi;
            }
            return DensityView{[cp](double y) { return compound_poisson_density(cp, y); }, lo, hi};
          },
          [](const TemperedStable& ts) -> std::optional<DensityView> {
            return DensityView{[ts](double y) {
                               if (y > 0.0) {
                                 return ts.c_pos == 0.0 ? 0.0
                                                        : ts.c_pos * std::exp(-ts.m * y) * std::pow(y, -1.0 - ts.alpha);
                               }
                               if (y < 0.0) {
                                 const double a = -y;
                                 return ts.c_neg == 0.0 ? 0.0
                                                        : ts.c_neg * std::exp(-ts.g * a) * std::pow(a, -1.0 - ts.alpha);
                               }
                               return 0.0;
                             },
                             ts.c_neg == 0.0 ? 0.0 : -kInf, ts.c_pos == 0.0 ? 0.0 : kInf};
          },
          [](const DensityMeasure& d) -> std::optional<DensityView> { return DensityView{d.density, d.lo, d.hi}; },
          [](const TabulatedDensity& t) -> std::optional<DensityView> {
            const double lo = t.lower_tail == TailKind::Exponential ? -kInf : t.x.front();
            const double hi = t.upper_tail == TailKind::Exponential ? kInf : t.x.back();
            return DensityView{[t](double y) { return t(y); }, lo, hi};
          },
          [](const auto&) -> std::optional<DensityView> { return std::nullopt; },
      },
      spec.rep);
}

namespace {

QuadResult integrate_density(const DensityView& d, const std::function<double(double)>& g, Region region,
                             const QuadratureOptions& opts) {
  auto product = [&](double y) {
    const double fy = d.f(y);
    if (fy == 0.0) return 0.0;
    return fy * g(y);
  };
  QuadResult out;
  if (d.hi > 0.0) {
    const double lo = std::max({region.lo, d.lo, 0.0});
    const double hi = std::min(region.hi, d.hi);
    out = combine(out, integrate_radial(product, lo, hi, opts));
  }
  if (d.lo < 0.0) {
    const double lo = std::max({region.lo, -d.hi, 0.0});
    const double hi = std::min(region.hi, -d.lo);
    out = combine(out, integrate_radial([&](double r) { return product(-r); }, lo, hi, opts));
  }
  return out;
}

QuadResult closed_form(const CompoundPoisson& cp, const std::vector<ExpPolyTerm>& terms, Region region) {
  QuadResult out;
  const std::pair<double, double> pieces[2] = {{region.lo, region.hi}, {-region.hi, -region.lo}};
  double total = 0.0;
  for (const auto& t : terms) {
    if (t.coef == 0.0) continue;
    for (const auto& [plo, phi] : pieces) {
      const double lo = std::max(t.lo, plo);
      const double hi = std::min(t.hi, phi);
      if (!(hi > lo)) continue;
      const double m = compound_poisson_moment(cp, t.power, t.rate, lo, hi);
      if (!std::isfinite(m)) {
        out.status = QuadStatus::Divergent;
        out.value = kInf;
        out.diagnostic = "closed form: exponential moment of order " + std::to_string(t.rate) + " is infinite";
        return out;
      }
      total += t.coef * m;
    }
  }
  out.value = total;
  return out;
}

QuadResult point_sum(const PointMasses& pm, const std::function<double(const PointMass&)>& g, Region region) {
  QuadResult out;
  double total = 0.0;
  for (const auto& a : pm.atoms) {
    if (!region.contains(a.location.norm())) continue;
    total += a.rate * g(a);
  }
  out.value = total;
  if (!std::isfinite(total)) {
    out.status = QuadStatus::Divergent;
    out.value = kInf;
    out.diagnostic = "point-mass sum overflowed";
  }
  return out;
}

QuadResult integrate_axis(const LevyMeasureSpec& comp, int axis, const LevyIntegrand& g, Region region,
                          const QuadratureOptions& opts, bool closed_forms) {
  if (std::holds_alternative<ZeroMeasure>(comp.rep)) return {};
  if (auto* pm = std::get_if<PointMasses>(&comp.rep)) {
    return point_sum(*pm, [&](const PointMass& a) { return g.on_axis(axis, a.location[0]); }, region);
  }
  if (closed_forms) {
    if (auto* cp = std::get_if<CompoundPoisson>(&comp.rep)) {
      if (auto terms = g.axis_terms(axis)) return closed_form(*cp, *terms, region);
    }
  }
  auto density = density_view(comp);
  if (!density) throw std::invalid_argument("axis component must be one-dimensional: " + comp.describe());
  return integrate_density(*density, [&](double y) { return g.on_axis(axis, y); }, region, opts);
}

std::string law_string(const JumpLaw& law) {
  std::ostringstream os;
  std::visit(Overloaded{
                 [&](const NormalLaw& n) { os << "normal(mean=" << n.mean << ", sd=" << n.sd << ")"; },
                 [&](const DoubleExponentialLaw& d) {
                   os << "double-exponential(p=" << d.p_up << ", eta_up=" << d.eta_up
                      << ", eta_down=" << d.eta_down << ")";
                 },
                 [&](const UniformLaw& u) { os << "uniform(" << u.lo << ", " << u.hi << ")"; },
             },
             law);
  return os.str();
}

}  // namespace

// ---------------------------------------------------------------------------

double exp_compensated(double u) {
  if (std::abs(u) < 1e-3) {
    // u^2/2 + u^3/6 + u^4/24 + u^5/120
    return u * u * (0.5 + u * (1.0 / 6.0 + u * (1.0 / 24.0 + u / 120.0)));
  }
  return std::expm1(u) - u;
}

double novikov_integrand(double u) {
  if (std::abs(u) < 1e-2) {
    // sum_{n>=2} (n-1) u^n / n!
    double term = u * u / 2.0;
    double sum = term;
    for (int n = 3; n <= 9; ++n) {
      term *= u / n;
      sum += (n - 1) * term;
    }
    return sum;
  }
  return (u - 1.0) * std::exp(u) + 1.0;
}

double hellinger_integrand(double u) {
  const double e = std::expm1(0.5 * u);
  return e * e;
}

double TabulatedDensity::operator()(double y) const {
  if (y < x.front()) {
    return lower_tail == TailKind::Exponential ? f.front() * std::exp(-lower_rate * (x.front() - y)) : 0.0;
  }
  if (y > x.back()) {
    return upper_tail == TailKind::Exponential ? f.back() * std::exp(-upper_rate * (y - x.back())) : 0.0;
  }
  auto it = std::upper_bound(x.begin(), x.end(), y);
  if (it == x.end()) return f.back();
  const std::size_t i = static_cast<std::size_t>(it - x.begin());
  const double w = (y - x[i - 1]) / (x[i] - x[i - 1]);
  return (1.0 - w) * f[i - 1] + w * f[i];
}

int LevyMeasureSpec::dim() const {
  return std::visit(Overloaded{
                        [](const ZeroMeasure& z) { return z.dim; },
                        [](const PointMasses& p) { return p.dim; },
                        [](const AxisProduct& a) { return static_cast<int>(a.components.size()); },
                        [](const WeightedMeasure& w) { return w.base ? w.base->dim() : 0; },
                        [](const auto&) { return 1; },
                    },
                    rep);
}

std::string LevyMeasureSpec::describe() const {
  std::ostringstream os;
  std::visit(Overloaded{
                 [&](const ZeroMeasure& z) { os << "zero(d=" << z.dim << ")"; },
                 [&](const PointMasses& p) { os << "point-masses(d=" << p.dim << ", n=" << p.atoms.size() << ")"; },
                 [&](const CompoundPoisson& cp) {
                   os << "compound-poisson(rate=" << cp.rate << ", " << law_string(cp.law) << ")";
                 },
                 [&](const TemperedStable& t) {
                   os << "tempered-stable(c_neg=" << t.c_neg << ", c_pos=" << t.c_pos << ", g=" << t.g
                      << ", m=" << t.m << ", alpha=" << t.alpha << ")";
                 },
                 [&](const DensityMeasure& d) { os << d.label << " on (" << d.lo << ", " << d.hi << ")"; },
                 [&](const TabulatedDensity& t) { os << "tabulated(n=" << t.x.size() << ")"; },
                 [&](const AxisProduct& a) {
                   os << "axis-product[";
                   for (std::size_t j = 0; j < a.components.size(); ++j) {
                     os << (j ? ", " : "") << a.components[j].describe();
                   }
                   os << "]";
                 },
                 [&](const WeightedMeasure& w) { os << "weighted(" << (w.base ? w.base->spec().describe() : "?") << ")"; },
             },
             rep);
  return os.str();
}

LevyMeasureSpec LevyMeasureSpec::point_mass(double x, double rate) {
  PointMasses pm{1, {PointMass{Vec::Constant(1, x), rate}}};
  return {pm};
}

LevyMeasureSpec LevyMeasureSpec::merton(double rate, double mean, double sd) {
  return {CompoundPoisson{rate, NormalLaw{mean, sd}}};
}

LevyMeasureSpec LevyMeasureSpec::kou(double rate, double p_up, double eta_up, double eta_down) {
  return {CompoundPoisson{rate, DoubleExponentialLaw{p_up, eta_up, eta_down}}};
}

LevyMeasureSpec LevyMeasureSpec::uniform_jumps(double rate, double lo, double hi) {
  return {CompoundPoisson{rate, UniformLaw{lo, hi}}};
}

// ---------------------------------------------------------------------------

LevyIntegrand LevyIntegrand::exp(Vec lambda) {
  LevyIntegrand g(IntegrandKind::Exp, static_cast<int>(lambda.size()));
  g.lambda_ = std::move(lambda);
  return g;
}

LevyIntegrand LevyIntegrand::compensated_exp(Vec lambda, Truncation h) {
  LevyIntegrand g(IntegrandKind::CompensatedExp, static_cast<int>(lambda.size()));
  g.lambda_ = std::move(lambda);
  g.h_ = h;
  return g;
}

LevyIntegrand LevyIntegrand::hellinger(Vec lambda) {
  LevyIntegrand g(IntegrandKind::Hellinger, static_cast<int>(lambda.size()));
  g.lambda_ = std::move(lambda);
  return g;
}

LevyIntegrand LevyIntegrand::novikov(Vec lambda) {
  LevyIntegrand g(IntegrandKind::Novikov, static_cast<int>(lambda.size()));
  g.lambda_ = std::move(lambda);
  return g;
}

LevyIntegrand LevyIntegrand::truncated_square(int dim) { return {IntegrandKind::TruncatedSquare, dim}; }

LevyIntegrand LevyIntegrand::exp_tail(Vec lambda) {
  LevyIntegrand g(IntegrandKind::ExpTail, static_cast<int>(lambda.size()));
  g.lambda_ = std::move(lambda);
  return g;
}

LevyIntegrand LevyIntegrand::abs_exp_tail(int dim, double n) {
  LevyIntegrand g(IntegrandKind::AbsExpTail, dim);
  g.n_ = n;
  return g;
}

LevyIntegrand LevyIntegrand::exp_outside_unit(Vec u) {
  LevyIntegrand g(IntegrandKind::ExpOutsideUnit, static_cast<int>(u.size()));
  g.lambda_ = std::move(u);
  return g;
}

LevyIntegrand LevyIntegrand::weighted_hellinger(Vec lambda, Vec weight) {
  if (lambda.size() != weight.size()) throw std::invalid_argument("weighted_hellinger: dimension mismatch");
  LevyIntegrand g(IntegrandKind::WeightedHellinger, static_cast<int>(lambda.size()));
  g.lambda_ = std::move(lambda);
  g.weight_ = std::move(weight);
  return g;
}

LevyIntegrand LevyIntegrand::coordinate(int dim, int j) {
  LevyIntegrand g(IntegrandKind::Coordinate, dim);
  g.j_ = j;
  return g;
}

LevyIntegrand LevyIntegrand::coordinate_square(int dim, int j) {
  LevyIntegrand g(IntegrandKind::CoordinateSquare, dim);
  g.j_ = j;
  return g;
}

LevyIntegrand LevyIntegrand::norm(int dim) { return {IntegrandKind::Norm, dim}; }
LevyIntegrand LevyIntegrand::one(int dim) { return {IntegrandKind::One, dim}; }

LevyIntegrand LevyIntegrand::generic(int dim, Fn fn) {
  LevyIntegrand g(IntegrandKind::Generic, dim);
  g.fn_ = std::move(fn);
  return g;
}

double LevyIntegrand::scalar(double u, double v, double norm, double coord) const {
  switch (kind_) {
    case IntegrandKind::Exp:
      return std::exp(u);
    case IntegrandKind::CompensatedExp:
      return h_.weight(norm) == 1.0 ? exp_compensated(u) : std::expm1(u);
    case IntegrandKind::Hellinger:
      return hellinger_integrand(u);
    case IntegrandKind::Novikov:
      return novikov_integrand(u);
    case IntegrandKind::TruncatedSquare:
      return norm <= 1.0 ? norm * norm : 1.0;
    case IntegrandKind::ExpTail:
      return u > 1.0 ? std::exp(u) : 0.0;
    case IntegrandKind::AbsExpTail:
      return norm > 1.0 ? std::exp(n_ * norm) : 0.0;
    case IntegrandKind::ExpOutsideUnit:
      return norm > 1.0 ? std::exp(u) : 0.0;
    case IntegrandKind::WeightedHellinger:
      return hellinger_integrand(u) * std::exp(v);
    case IntegrandKind::Coordinate:
      return coord;
    case IntegrandKind::CoordinateSquare:
      return coord * coord;
    case IntegrandKind::Norm:
      return norm;
    case IntegrandKind::One:
      return 1.0;
    case IntegrandKind::Generic:
      break;
  }
  throw std::logic_error("LevyIntegrand::scalar called on generic integrand");
}

double LevyIntegrand::operator()(std::span<const double> x) const {
  if (kind_ == IntegrandKind::Generic) return fn_(x);
  double u = 0.0, v = 0.0, sq = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    if (lambda_.size() > k) u += lambda_[k] * x[i];
    if (weight_.size() > k) v += weight_[k] * x[i];
    sq += x[i] * x[i];
  }
  const double coord = (j_ >= 0 && static_cast<std::size_t>(j_) < x.size()) ? x[static_cast<std::size_t>(j_)] : 0.0;
  return scalar(u, v, std::sqrt(sq), coord);
}

double LevyIntegrand::on_axis(int axis, double y) const {
  if (kind_ == IntegrandKind::Generic) {
    std::vector<double> x(static_cast<std::size_t>(dim_), 0.0);
    x[static_cast<std::size_t>(axis)] = y;
    return fn_(x);
  }
  const double u = lambda_.size() > axis ? lambda_[axis] * y : 0.0;
  const double v = weight_.size() > axis ? weight_[axis] * y : 0.0;
  return scalar(u, v, std::abs(y), axis == j_ ? y : 0.0);
}

std::optional<std::vector<ExpPolyTerm>> LevyIntegrand::axis_terms(int axis) const {
  const double theta = lambda_.size() > axis ? lambda_[axis] : 0.0;
  const double omega = weight_.size() > axis ? weight_[axis] : 0.0;
  std::vector<ExpPolyTerm> t;
  switch (kind_) {
    case IntegrandKind::Generic:
      return std::nullopt;
    case IntegrandKind::Exp:
      t.push_back({1.0, 0, theta, -kInf, kInf});
      break;
    case IntegrandKind::CompensatedExp:
      t.push_back({1.0, 0, theta, -kInf, kInf});
      t.push_back({-1.0, 0, 0.0, -kInf, kInf});
      if (h_.kind == TruncationKind::StandardCutoff) t.push_back({-theta, 1, 0.0, -1.0, 1.0});
      if (h_.kind == TruncationKind::Identity) t.push_back({-theta, 1, 0.0, -kInf, kInf});
      break;
    case IntegrandKind::Hellinger:
      t.push_back({1.0, 0, 0.0, -kInf, kInf});
      t.push_back({-2.0, 0, 0.5 * theta, -kInf, kInf});
      t.push_back({1.0, 0, theta, -kInf, kInf});
      break;
    case IntegrandKind::Novikov:
      t.push_back({theta, 1, theta, -kInf, kInf});
      t.push_back({-1.0, 0, theta, -kInf, kInf});
      t.push_back({1.0, 0, 0.0, -kInf, kInf});
      break;
    case IntegrandKind::TruncatedSquare:
      t.push_back({1.0, 2, 0.0, -1.0, 1.0});
      t.push_back({1.0, 0, 0.0, -kInf, -1.0});
      t.push_back({1.0, 0, 0.0, 1.0, kInf});
      break;
    case IntegrandKind::ExpTail:
      if (theta > 0.0) t.push_back({1.0, 0, theta, 1.0 / theta, kInf});
      if (theta < 0.0) t.push_back({1.0, 0, theta, -kInf, 1.0 / theta});
      break;
    case IntegrandKind::AbsExpTail:
      t.push_back({1.0, 0, n_, 1.0, kInf});
      t.push_back({1.0, 0, -n_, -kInf, -1.0});
      break;
    case IntegrandKind::ExpOutsideUnit:
      t.push_back({1.0, 0, theta, 1.0, kInf});
      t.push_back({1.0, 0, theta, -kInf, -1.0});
      break;
    case IntegrandKind::WeightedHellinger:
      t.push_back({1.0, 0, omega, -kInf, kInf});
      t.push_back({-2.0, 0, 0.5 * theta + omega, -kInf, kInf});
      t.push_back({1.0, 0, theta + omega, -kInf, kInf});
      break;
    case IntegrandKind::Coordinate:
      if (axis == j_) t.push_back({1.0, 1, 0.0, -kInf, kInf});
      break;
    case IntegrandKind::CoordinateSquare:
      if (axis == j_) t.push_back({1.0, 2, 0.0, -kInf, kInf});
      break;
    case IntegrandKind::Norm:
      t.push_back({1.0, 1, 0.0, 0.0, kInf});
      t.push_back({-1.0, 1, 0.0, -kInf, 0.0});
      break;
    case IntegrandKind::One:
      t.push_back({1.0, 0, 0.0, -kInf, kInf});
      break;
  }
  return t;
}

// ---------------------------------------------------------------------------

void validate_structure(const LevyMeasureSpec& spec) {
  auto fail = [&](const std::string& why) { throw std::invalid_argument("Levy measure " + spec.describe() + ": " + why); };
  auto check_one_dim = [&](const LevyMeasureSpec& s) {
    if (std::holds_alternative<AxisProduct>(s.rep) || std::holds_alternative<WeightedMeasure>(s.rep) || s.dim() != 1) {
      fail("axis components must be one-dimensional measures");
    }
  };
  std::visit(
      Overloaded{
          [&](const ZeroMeasure& z) {
            if (z.dim < 1) fail("dimension must be positive");
          },
          [&](const PointMasses& p) {
            if (p.dim < 1) fail("dimension must be positive");
            for (const auto& a : p.atoms) {
              if (a.location.size() != p.dim) fail("atom has wrong dimension");
              if (!a.location.allFinite()) fail("atom location must be finite");
              if (a.location.norm() == 0.0) fail("point mass at the origin is not allowed");
              if (!(a.rate > 0.0) || !std::isfinite(a.rate)) fail("atom rates must be positive and finite");
            }
          },
          [&](const CompoundPoisson& cp) {
            if (!(cp.rate >= 0.0) || !std::isfinite(cp.rate)) fail("rate must be nonnegative and finite");
            std::visit(Overloaded{
                           [&](const NormalLaw& n) {
                             if (!(n.sd > 0.0) || !std::isfinite(n.mean)) fail("normal law needs sd > 0");
                           },
                           [&](const DoubleExponentialLaw& d) {
                             if (!(d.p_up >= 0.0 && d.p_up <= 1.0)) fail("p_up must lie in [0, 1]");
                             if (!(d.eta_up > 0.0 && d.eta_down > 0.0)) fail("decay rates must be positive");
                           },
                           [&](const UniformLaw& u) {
                             if (!(u.hi > u.lo)) fail("uniform law needs lo < hi");
                           },
                       },
                       cp.law);
          },
          [&](const TemperedStable& t) {
            if (!(t.c_neg >= 0.0 && t.c_pos >= 0.0)) fail("scale constants must be nonnegative");
            if (!(t.g >= 0.0 && t.m >= 0.0)) fail("tempering rates must be nonnegative");
            if (!(t.alpha < 2.0)) fail("alpha must be below 2");
          },
          [&](const DensityMeasure& d) {
            if (!d.density) fail("density callable is empty");
            if (!(d.hi > d.lo)) fail("support must satisfy lo < hi");
            std::vector<double> probes;
            for (int k = -8; k <= 8; ++k) {
              probes.push_back(std::pow(10.0, k));
              probes.push_back(-std::pow(10.0, k));
            }
            for (int i = 1; i < 400; ++i) probes.push_back(-20.0 + 40.0 * i / 400.0);
            if (std::isfinite(d.lo) && std::isfinite(d.hi)) {
              for (int i = 1; i < 400; ++i) probes.push_back(d.lo + (d.hi - d.lo) * i / 400.0);
            }
            for (double y : probes) {
              if (y <= d.lo || y >= d.hi || y == 0.0) continue;
              if (d.density(y) < 0.0) fail("density takes a negative value at " + std::to_string(y));
            }
          },
          [&](const TabulatedDensity& t) {
            if (t.x.size() < 2 || t.x.size() != t.f.size()) fail("need at least two grid nodes and matching values");
            for (std::size_t i = 1; i < t.x.size(); ++i) {
              if (!(t.x[i] > t.x[i - 1])) fail("grid must be strictly increasing");
            }
            for (double v : t.f) {
              if (!(v >= 0.0) || !std::isfinite(v)) fail("density values must be nonnegative and finite");
            }
            if (t.lower_tail == TailKind::Exponential && !(t.lower_rate > 0.0)) fail("lower tail rate must be positive");
            if (t.upper_tail == TailKind::Exponential && !(t.upper_rate > 0.0)) fail("upper tail rate must be positive");
          },
          [&](const AxisProduct& a) {
            if (a.components.empty()) fail("axis product needs at least one component");
            for (const auto& c : a.components) {
              check_one_dim(c);
              validate_structure(c);
            }
          },
          [&](const WeightedMeasure& w) {
            if (!w.base) fail("weighted measure needs a base measure");
            if (!w.weight) fail("weighted measure needs a weight function");
          },
      },
      spec.rep);
}

QuadResult integrate_spec(const LevyMeasureSpec& spec, const LevyIntegrand& g, Region region,
                          const QuadratureOptions& opts, bool closed_forms) {
  if (g.dim() != spec.dim()) {
    throw std::invalid_argument("integrand dimension " + std::to_string(g.dim()) +
                                " does not match measure dimension " + std::to_string(spec.dim()));
  }
  return std::visit(
      Overloaded{
          [&](const ZeroMeasure&) { return QuadResult{}; },
          [&](const PointMasses& pm) {
            return point_sum(pm,
                             [&](const PointMass& a) {
                               return g(std::span<const double>(a.location.data(),
                                                                static_cast<std::size_t>(a.location.size())));
                             },
                             region);
          },
          [&](const AxisProduct& ap) {
            QuadResult out;
            for (std::size_t j = 0; j < ap.components.size(); ++j) {
              out = combine(out, integrate_axis(ap.components[j], static_cast<int>(j), g, region, opts, closed_forms));
            }
            return out;
          },
          [&](const WeightedMeasure& w) {
            const auto weight = w.weight;
            auto product = LevyIntegrand::generic(g.dim(), [&g, weight](std::span<const double> x) {
              const double wx = weight(x);
              return wx == 0.0 ? 0.0 : wx * g(x);
            });
            return w.base->integrate_numeric(product, region, opts);
          },
          [&](const auto&) { return integrate_axis(spec, 0, g, region, opts, closed_forms); },
      },
      spec.rep);
}

LevyMeasure LevyMeasure::create(LevyMeasureSpec spec, const QuadratureOptions& opts) {
  validate_structure(spec);
  const QuadResult gate = integrate_spec(spec, LevyIntegrand::truncated_square(spec.dim()), Region::all(), opts, true);
  if (gate.status != QuadStatus::Converged || !std::isfinite(gate.value)) {
    throw std::invalid_argument("Levy measure " + spec.describe() +
                                " fails the (|x|^2 min 1) integrability gate: " +
                                (gate.diagnostic.empty() ? std::string("non-finite value") : gate.diagnostic));
  }
  auto finite = [&](const LevyMeasureSpec& s) {
    if (std::holds_alternative<ZeroMeasure>(s.rep) || std::holds_alternative<PointMasses>(s.rep) ||
        std::holds_alternative<CompoundPoisson>(s.rep)) {
      return true;
    }
    const QuadResult mass = integrate_spec(s, LevyIntegrand::one(s.dim()), Region::all(), opts, false);
    return mass.status == QuadStatus::Converged && std::isfinite(mass.value);
  };
  bool finite_activity = true;
  if (auto* ap = std::get_if<AxisProduct>(&spec.rep)) {
    for (const auto& c : ap->components) finite_activity = finite_activity && finite(c);
  } else if (auto* w = std::get_if<WeightedMeasure>(&spec.rep)) {
    finite_activity = w->base->finite_activity();
  } else {
    finite_activity = finite(spec);
  }
  LevyMeasure m(std::make_shared<const LevyMeasureSpec>(std::move(spec)));
  m.finite_activity_ = finite_activity;
  return m;
}

LevyMeasure LevyMeasure::zero(int dim) { return create(LevyMeasureSpec::none(dim)); }

bool LevyMeasure::is_zero() const {
  auto zero = [](const LevyMeasureSpec& s) {
    if (std::holds_alternative<ZeroMeasure>(s.rep)) return true;
    if (auto* cp = std::get_if<CompoundPoisson>(&s.rep)) return cp->rate == 0.0;
    if (auto* pm = std::get_if<PointMasses>(&s.rep)) return pm->atoms.empty();
    return false;
  };
  if (auto* ap = std::get_if<AxisProduct>(&spec_->rep)) {
    return std::all_of(ap->components.begin(), ap->components.end(), zero);
  }
  return zero(*spec_);
}

QuadResult LevyMeasure::integrate(const LevyIntegrand& g, Region region, const QuadratureOptions& opts) const {
  return integrate_spec(*spec_, g, region, opts, true);
}

QuadResult LevyMeasure::integrate_numeric(const LevyIntegrand& g, Region region, const QuadratureOptions& opts) const {
  return integrate_spec(*spec_, g, region, opts, false);
}

// ---------------------------------------------------------------------------

PiecewiseLevyMeasure::PiecewiseLevyMeasure(std::vector<double> breaks, std::vector<LevyMeasure> pieces)
    : breaks_(std::move(breaks)), pieces_(std::move(pieces)) {
  if (pieces_.size() != breaks_.size() + 1) {
    throw std::invalid_argument("piecewise Levy measure: need one more piece than breakpoints");
  }
  for (std::size_t i = 1; i < breaks_.size(); ++i) {
    if (!(breaks_[i] > breaks_[i - 1])) throw std::invalid_argument("piecewise Levy measure: breakpoints must increase");
  }
  for (const auto& p : pieces_) {
    if (p.dim() != pieces_.front().dim()) throw std::invalid_argument("piecewise Levy measure: dimension mismatch");
  }
}

std::size_t PiecewiseLevyMeasure::piece_index(double t) const {
  return static_cast<std::size_t>(std::lower_bound(breaks_.begin(), breaks_.end(), t) - breaks_.begin());
}

const LevyMeasure& PiecewiseLevyMeasure::at(double t) const { return pieces_[piece_index(t)]; }

bool PiecewiseLevyMeasure::is_zero() const {
  return std::all_of(pieces_.begin(), pieces_.end(), [](const LevyMeasure& m) { return m.is_zero(); });
}

}  // namespace expmart
