#include "expmart/cumulant.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "expmart/errors.hpp"

namespace expmart {

StrategyPath StrategyPath::constant(Vec lambda) {
  const int d = static_cast<int>(lambda.size());
  const double bound = lambda.norm();
  return StrategyPath(d, TimeFunction<Vec>::constant(std::move(lambda)), bound);
}

StrategyPath StrategyPath::piecewise(std::vector<double> breaks, std::vector<Vec> values) {
  if (values.empty()) throw std::invalid_argument("strategy: no values");
  const int d = static_cast<int>(values.front().size());
  double bound = 0.0;
  for (const auto& v : values) {
    if (v.size() != d) throw std::invalid_argument("strategy: values differ in dimension");
    if (!v.allFinite()) throw std::invalid_argument("strategy: values must be finite");
    bound = std::max(bound, v.norm());
  }
  return StrategyPath(d, TimeFunction<Vec>::piecewise(std::move(breaks), std::move(values)), bound);
}

StrategyPath StrategyPath::callable(int dim, TimeFunction<Vec>::Callable fn, double bound, double horizon,
                                    std::vector<double> breaks) {
  auto f = TimeFunction<Vec>::callable(std::move(fn), std::move(breaks));
  for (int i = 0; i <= 400; ++i) {
    const double t = horizon * i / 400.0;
    const Vec v = f(t);
    if (v.size() != dim) throw std::invalid_argument("strategy: callable returns wrong dimension");
    if (!(v.norm() <= bound * (1.0 + 1e-12))) {
      throw std::invalid_argument("strategy: |lambda(" + format_short(t) + ")| exceeds the declared bound");
    }
  }
  return StrategyPath(dim, std::move(f), bound);
}

bool StrategyPath::is_zero() const {
  if (!piecewise_constant()) return false;
  return std::all_of(fn_.values().begin(), fn_.values().end(), [](const Vec& v) { return v.isZero(0.0); });
}

CumulantParts laplace_cumulant(const CharacteristicTriplet& tr, const Vec& lambda, double t,
                               const QuadratureOptions& opts) {
  if (lambda.size() != tr.dim()) throw std::invalid_argument("laplace_cumulant: lambda has wrong dimension");
  CumulantParts k;
  if (lambda.isZero(0.0)) return k;
  k.drift = lambda.dot(tr.b(t));
  k.diffusion = 0.5 * lambda.dot(tr.c(t) * lambda);
  const LevyMeasure& F = tr.F(t);
  if (F.is_zero()) return k;
  const QuadResult J = F.integrate(LevyIntegrand::compensated_exp(lambda, tr.truncation()), Region::all(), opts);
  switch (J.status) {
    case QuadStatus::Converged:
      break;
    case QuadStatus::Divergent:
      throw NotExponentiallySpecialError("not exponentially special at t=" + format_short(t) + ": " +
                                         F.spec().describe() + " has an infinite exponential moment");
    case QuadStatus::NotConverged:
      throw QuadratureError("cumulant jump integral did not converge at t=" + format_short(t) + ": " + J.diagnostic,
                            J.value);
  }
  k.jump = J.value;
  return k;
}

double CumulantPath::at(double t) const {
  auto it = std::lower_bound(grid.begin(), grid.end(), t);
  if (it != grid.end() && std::abs(*it - t) <= 1e-12 * std::max(1.0, std::abs(t))) {
    return values[static_cast<std::size_t>(it - grid.begin())];
  }
  if (it != grid.begin() && std::abs(*(it - 1) - t) <= 1e-12 * std::max(1.0, std::abs(t))) {
    return values[static_cast<std::size_t>(it - grid.begin() - 1)];
  }
  throw std::invalid_argument("cumulant path: t=" + format_short(t) + " is not a grid node");
}

namespace {

void check_grid(const std::vector<double>& grid, double horizon) {
  if (grid.empty() || grid.front() != 0.0) throw std::invalid_argument("cumulant_process: grid must start at 0");
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (!(grid[i] > grid[i - 1])) throw std::invalid_argument("cumulant_process: grid must be strictly increasing");
  }
  if (grid.back() > horizon * (1.0 + 1e-12)) throw std::invalid_argument("cumulant_process: grid exceeds horizon");
}

double unwrap(const QuadResult& r, const std::string& what) {
  switch (r.status) {
    case QuadStatus::Converged:
      return r.value;
    case QuadStatus::Divergent:
      throw NotExponentiallySpecialError(what + " diverges: " + r.diagnostic);
    case QuadStatus::NotConverged:
      break;
  }
  throw QuadratureError(what + " did not converge: " + r.diagnostic, r.value);
}

}  // namespace

CumulantPath cumulant_process(const CharacteristicTriplet& tr, const StrategyPath& s, const std::vector<double>& grid,
                              const QuadratureOptions& opts) {
  check_grid(grid, tr.horizon());
  if (s.dim() != tr.dim()) throw std::invalid_argument("cumulant_process: strategy dimension does not match");
  CumulantPath out;
  out.grid = grid;
  out.values.assign(grid.size(), 0.0);
  out.parts.assign(grid.size(), CumulantParts{});
  if (s.is_zero()) return out;

  const ConditionReport special = check_exponentially_special(tr, s, grid.back(), opts);
  if (special.verdict == Verdict::Fail) {
    throw NotExponentiallySpecialError("not exponentially special on [0, " + std::to_string(grid.back()) +
                                       "]: " + special.diagnostics);
  }

  CumulantParts acc;
  if (tr.piecewise_constant() && s.piecewise_constant() && tr.activity().is_piecewise_constant()) {
    // kappa is constant between the merged breakpoints: evaluate it once per piece.
    const std::vector<double> breaks = merge_breaks({tr.breakpoints(), s.breakpoints()}, 0.0, grid.back());
    std::vector<double> edges{0.0};
    edges.insert(edges.end(), breaks.begin(), breaks.end());
    edges.push_back(grid.back());
    std::vector<CumulantParts> kappa;
    for (std::size_t p = 0; p + 1 < edges.size(); ++p) {
      const double mid = 0.5 * (edges[p] + edges[p + 1]);
      CumulantParts k = laplace_cumulant(tr, s(mid), mid, opts);
      const double a = tr.a(mid);
      k.drift *= a;
      k.diffusion *= a;
      k.jump *= a;
      kappa.push_back(k);
    }
    std::size_t p = 0;
    for (std::size_t j = 1; j < grid.size(); ++j) {
      const double lo = grid[j - 1];
      const double hi = grid[j];
      while (p + 2 < edges.size() && edges[p + 1] <= lo) ++p;
      for (std::size_t q = p; q + 1 < edges.size() && edges[q] < hi; ++q) {
        const double len = std::min(hi, edges[q + 1]) - std::max(lo, edges[q]);
        if (len <= 0.0) continue;
        acc.drift += kappa[q].drift * len;
        acc.diffusion += kappa[q].diffusion * len;
        acc.jump += kappa[q].jump * len;
      }
      out.parts[j] = acc;
      out.values[j] = acc.total();
    }
    return out;
  }

  TimeIntegrand drift, diffusion, jump;
  drift.local = [&](double t) { return s(t).dot(tr.b(t)); };
  diffusion.local = [&](double t) {
    const Vec l = s(t);
    return 0.5 * l.dot(tr.c(t) * l);
  };
  drift.local_piecewise_constant = s.piecewise_constant() && tr.drift().is_piecewise_constant();
  diffusion.local_piecewise_constant = s.piecewise_constant() && tr.diffusion().is_piecewise_constant();
  const Truncation h = tr.truncation();
  jump.jump = [&s, h](double t) { return LevyIntegrand::compensated_exp(s(t), h); };
  jump.jump_piecewise_constant = s.piecewise_constant();
  drift.breaks = diffusion.breaks = jump.breaks = s.breakpoints();
  for (std::size_t j = 1; j < grid.size(); ++j) {
    acc.drift += unwrap(integrate_in_time(tr, grid[j - 1], grid[j], drift, opts), "drift part of the cumulant");
    acc.diffusion +=
        unwrap(integrate_in_time(tr, grid[j - 1], grid[j], diffusion, opts), "diffusion part of the cumulant");
    acc.jump += unwrap(integrate_in_time(tr, grid[j - 1], grid[j], jump, opts), "jump part of the cumulant");
    out.parts[j] = acc;
    out.values[j] = acc.total();
  }
  return out;
}

CumulantParts cumulant_integral(const CharacteristicTriplet& tr, const Vec& u, double t0, double t1,
                                const QuadratureOptions& opts) {
  if (u.size() != tr.dim()) throw std::invalid_argument("cumulant_integral: u has wrong dimension");
  CumulantParts k;
  if (u.isZero(0.0) || t1 <= t0) return k;
  if (tr.piecewise_constant()) {
    std::vector<double> edges{t0};
    for (double b : merge_breaks({tr.breakpoints()}, t0, t1)) edges.push_back(b);
    edges.push_back(t1);
    for (std::size_t p = 0; p + 1 < edges.size(); ++p) {
      const double mid = 0.5 * (edges[p] + edges[p + 1]);
      const double w = tr.a(mid) * (edges[p + 1] - edges[p]);
      if (w == 0.0) continue;
      const CumulantParts c = laplace_cumulant(tr, u, mid, opts);
      k.drift += c.drift * w;
      k.diffusion += c.diffusion * w;
      k.jump += c.jump * w;
    }
    return k;
  }
  TimeIntegrand drift, diffusion, jump;
  drift.local = [&](double t) { return u.dot(tr.b(t)); };
  diffusion.local = [&](double t) { return 0.5 * u.dot(tr.c(t) * u); };
  const Truncation h = tr.truncation();
  jump.jump = [&u, h](double) { return LevyIntegrand::compensated_exp(u, h); };
  jump.jump_piecewise_constant = true;
  k.drift = unwrap(integrate_in_time(tr, t0, t1, drift, opts), "drift part of the cumulant");
  k.diffusion = unwrap(integrate_in_time(tr, t0, t1, diffusion, opts), "diffusion part of the cumulant");
  k.jump = unwrap(integrate_in_time(tr, t0, t1, jump, opts), "jump part of the cumulant");
  return k;
}

ConditionReport check_exponentially_special(const CharacteristicTriplet& tr, const StrategyPath& s, double T,
                                            const QuadratureOptions& opts) {
  if (!(T > 0.0) || T > tr.horizon() * (1.0 + 1e-12)) {
    throw std::invalid_argument("check_exponentially_special: need 0 < T <= horizon");
  }
  TimeIntegrand g;
  g.jump = [&s](double t) { return LevyIntegrand::exp_tail(s(t)); };
  g.jump_piecewise_constant = s.piecewise_constant();
  g.breaks = s.breakpoints();
  const QuadResult r = integrate_in_time(tr, 0.0, T, g, opts);
  ConditionReport rep = report_from_integral(ConditionId::EXPSPEC, T, r);
  rep.diagnostics = r.diagnostic;
  return rep;
}

}  // namespace expmart
