#include "expmart/characteristics.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "expmart/errors.hpp"

namespace expmart {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

QuadResult activity_mass(const CharacteristicTriplet& tr, double s0, double s1, double mid) {
  if (tr.activity().is_piecewise_constant()) {
    QuadResult r;
    r.value = tr.a(mid) * (s1 - s0);
    return r;
  }
  return integrate_time([&](double t) { return tr.a(t); }, s0, s1);
}

QuadResult divergent(const std::string& why) {
  QuadResult r;
  r.value = kInf;
  r.status = QuadStatus::Divergent;
  r.diagnostic = why;
  return r;
}

QuadResult jump_segment(const CharacteristicTriplet& tr, double s0, double s1, const TimeIntegrand& g,
                        const QuadratureOptions& opts) {
  const double mid = 0.5 * (s0 + s1);
  if (g.jump_piecewise_constant) {
    const QuadResult mass = activity_mass(tr, s0, s1, mid);
    if (mass.value == 0.0 && mass.ok()) return {};
    const QuadResult J = tr.F(mid).integrate(g.jump(mid), g.region, opts);
    if (J.status == QuadStatus::Divergent) {
      return divergent("jump integral diverges on (" + format_short(s0) + ", " + format_short(s1) + "]");
    }
    QuadResult r = combine(J, mass);
    r.value = J.value * mass.value;
    r.error = std::abs(J.error * mass.value) + std::abs(J.value * mass.error);
    return r;
  }
  QuadStatus worst = QuadStatus::Converged;
  std::string diag;
  auto f = [&](double t) {
    const double a = tr.a(t);
    if (a == 0.0) return 0.0;
    const QuadResult J = tr.F(t).integrate(g.jump(t), g.region, opts);
    if (J.status != QuadStatus::Converged) {
      if (worst != QuadStatus::Divergent) worst = J.status;
      diag = J.diagnostic + " at t=" + format_short(t);
      return 0.0;
    }
    return J.value * a;
  };
  QuadResult r = integrate_time(f, s0, s1, 1e-10, opts);
  if (worst == QuadStatus::Divergent) return divergent("jump integral diverges: " + diag);
  if (worst == QuadStatus::NotConverged && r.status == QuadStatus::Converged) {
    r.status = QuadStatus::NotConverged;
    r.diagnostic = diag;
  }
  return r;
}

QuadResult local_segment(const CharacteristicTriplet& tr, double s0, double s1, const TimeIntegrand& g) {
  const double mid = 0.5 * (s0 + s1);
  if (g.local_piecewise_constant && tr.activity().is_piecewise_constant()) {
    QuadResult r;
    const double a = tr.a(mid);
    r.value = a == 0.0 ? 0.0 : g.local(mid) * a * (s1 - s0);
    if (!std::isfinite(r.value)) return divergent("local term is not finite on the segment");
    return r;
  }
  return integrate_time(
      [&](double t) {
        const double a = tr.a(t);
        return a == 0.0 ? 0.0 : g.local(t) * a;
      },
      s0, s1);
}

}  // namespace

QuadResult integrate_in_time(const CharacteristicTriplet& tr, double t0, double t1, const TimeIntegrand& g,
                             const QuadratureOptions& opts) {
  if (t1 < t0) throw std::invalid_argument("integrate_in_time: t1 < t0");
  QuadResult total;
  if (t1 == t0) return total;
  std::vector<double> nodes{t0};
  for (double b : merge_breaks({tr.breakpoints(), g.breaks}, t0, t1)) nodes.push_back(b);
  nodes.push_back(t1);
  for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
    const double s0 = nodes[i];
    const double s1 = nodes[i + 1];
    if (g.local) total = combine(total, local_segment(tr, s0, s1, g));
    if (g.jump && !tr.levy().at(0.5 * (s0 + s1)).is_zero()) total = combine(total, jump_segment(tr, s0, s1, g, opts));
    if (total.status == QuadStatus::Divergent) {
      total.value = kInf;
      return total;
    }
  }
  return total;
}

ConditionReport check_levy_integrability(const LevyMeasureSpec& F, const QuadratureOptions& opts) {
  validate_structure(F);
  const QuadResult r = integrate_spec(F, LevyIntegrand::truncated_square(F.dim()), Region::all(), opts, true);
  ConditionReport rep = report_from_integral(ConditionId::LEVYINT, 0.0, r);
  rep.diagnostics = F.describe() + (r.diagnostic.empty() ? "" : ": " + r.diagnostic);
  return rep;
}

ConditionReport check_levy_integrability(const PiecewiseLevyMeasure& F, const QuadratureOptions& opts) {
  ConditionReport out;
  out.id = ConditionId::LEVYINT;
  out.verdict = Verdict::Pass;
  for (std::size_t i = 0; i < F.pieces().size(); ++i) {
    const ConditionReport r = check_levy_integrability(F.pieces()[i].spec(), opts);
    out.partials.emplace_back("piece " + std::to_string(i), r.value);
    out.value = std::max(out.value, r.value);
    if (r.verdict == Verdict::Fail) out.verdict = Verdict::Fail;
    if (r.verdict == Verdict::Indeterminate && out.verdict == Verdict::Pass) out.verdict = Verdict::Indeterminate;
    if (!r.passed()) out.diagnostics += "piece " + std::to_string(i) + ": " + r.diagnostics + "; ";
  }
  return out;
}

ConditionReport check_piiac_integrability(const CharacteristicTriplet& tr, double T, const QuadratureOptions& opts) {
  if (!(T > 0.0) || T > tr.horizon()) throw std::invalid_argument("check_piiac_integrability: need 0 < T <= horizon");
  TimeIntegrand g;
  g.local = [&](double t) { return tr.b(t).norm() + tr.c(t).norm(); };
  g.local_piecewise_constant = tr.drift().is_piecewise_constant() && tr.diffusion().is_piecewise_constant();
  const int d = tr.dim();
  g.jump = [d](double) { return LevyIntegrand::truncated_square(d); };
  g.jump_piecewise_constant = true;
  const QuadResult r = integrate_in_time(tr, 0.0, T, g, opts);
  ConditionReport rep = report_from_integral(ConditionId::PIIAC, T, r);
  rep.diagnostics = r.diagnostic;
  return rep;
}

double integrate_levy(const LevyMeasure& F, const LevyIntegrand& g, Region region, const QuadratureOptions& opts) {
  const QuadResult r = F.integrate(g, region, opts);
  switch (r.status) {
    case QuadStatus::Converged:
      return r.value;
    case QuadStatus::Divergent:
      return kInf;
    case QuadStatus::NotConverged:
      break;
  }
  throw QuadratureError("Levy integral did not converge: " + r.diagnostic, r.value);
}

CharacteristicTriplet retruncate(const CharacteristicTriplet& tr, Truncation h_new) {
  h_new.dim = tr.dim();
  const Truncation h_old = tr.truncation();
  if (h_new == h_old) return tr;

  // (h_new - h_old)(x) = sign * x on the region where the weights differ.
  auto weight_gap = [](TruncationKind from, TruncationKind to) -> std::pair<Region, double> {
    using K = TruncationKind;
    if (from == K::StandardCutoff && to == K::Identity) return {Region::large(), 1.0};
    if (from == K::StandardCutoff && to == K::Zero) return {Region::small(), -1.0};
    if (from == K::Identity && to == K::StandardCutoff) return {Region::large(), -1.0};
    if (from == K::Identity && to == K::Zero) return {Region::all(), -1.0};
    if (from == K::Zero && to == K::StandardCutoff) return {Region::small(), 1.0};
    return {Region::all(), 1.0};  // zero -> identity
  };
  const auto [region, sign] = weight_gap(h_old.kind, h_new.kind);

  const int d = tr.dim();
  std::vector<Vec> shifts;
  for (const auto& F : tr.levy().pieces()) {
    Vec s = Vec::Zero(d);
    if (!F.is_zero()) {
      if (h_new.kind != TruncationKind::StandardCutoff) {
        const Region need = h_new.kind == TruncationKind::Identity ? Region::large() : Region::small();
        const double tail = integrate_levy(F, LevyIntegrand::norm(d), need);
        if (!std::isfinite(tail)) {
          throw std::invalid_argument("retruncate: truncation '" + to_string(h_new.kind) +
                                      "' is inadmissible, integral of |x| is " + format_number(tail));
        }
      }
      for (int j = 0; j < d; ++j) s[j] = sign * integrate_levy(F, LevyIntegrand::coordinate(d, j), region);
    }
    shifts.push_back(std::move(s));
  }

  TripletSpec spec = tr.spec();
  spec.truncation = h_new;
  const PiecewiseLevyMeasure& levy = tr.levy();
  if (tr.drift().is_piecewise_constant()) {
    const std::vector<double> breaks =
        merge_breaks({tr.drift().breakpoints(), levy.breakpoints()}, -kInf, kInf);
    std::vector<Vec> values;
    for (std::size_t i = 0; i <= breaks.size(); ++i) {
      // any point inside the i-th piece of the merged partition
      double t;
      if (breaks.empty()) {
        t = 0.0;
      } else if (i == 0) {
        t = breaks.front() - 1.0;
      } else if (i == breaks.size()) {
        t = breaks.back() + 1.0;
      } else {
        t = 0.5 * (breaks[i - 1] + breaks[i]);
      }
      values.push_back(tr.b(t) + shifts[levy.piece_index(t)]);
    }
    spec.drift = TimeFunction<Vec>::piecewise(breaks, std::move(values));
  } else {
    const TimeFunction<Vec> old = tr.drift();
    spec.drift = TimeFunction<Vec>::callable(
        [old, shifts, levy](double t) -> Vec { return old(t) + shifts[levy.piece_index(t)]; },
        merge_breaks({old.breakpoints(), levy.breakpoints()}, -kInf, kInf));
  }
  return CharacteristicTriplet::create(std::move(spec));
}

}  // namespace expmart
