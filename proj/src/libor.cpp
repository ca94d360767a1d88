#include "expmart/libor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "expmart/characteristics.hpp"
#include "expmart/conditions.hpp"
#include "expmart/errors.hpp"
#include "expmart/parallel.hpp"
#include "expmart/rng.hpp"

namespace expmart {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double mid_of(const std::vector<double>& breaks, std::size_t i) {
  if (breaks.empty()) return 0.0;
  if (i == 0) return 0.5 * breaks.front();
  if (i == breaks.size()) return breaks.back() + 1.0;
  return 0.5 * (breaks[i - 1] + breaks[i]);
}

void merge_verdict(ConditionReport& out, const ConditionReport& r) {
  if (r.verdict == Verdict::Fail) out.verdict = Verdict::Fail;
  if (r.verdict == Verdict::Indeterminate && out.verdict == Verdict::Pass) out.verdict = Verdict::Indeterminate;
}

}  // namespace

TenorStructure::TenorStructure(std::vector<double> maturities) : T_(std::move(maturities)) {
  if (T_.size() < 2 || T_.front() != 0.0) throw std::invalid_argument("tenor: need 0 = T_0 < T_1 < ... < T_n");
  for (std::size_t i = 1; i < T_.size(); ++i) {
    if (!(T_[i] > T_[i - 1]) || !std::isfinite(T_[i])) throw std::invalid_argument("tenor: maturities must increase");
  }
}

VolatilitySpec::VolatilitySpec(int dim, std::vector<std::vector<VolPiece>> pieces, double bound)
    : dim_(dim), pieces_(std::move(pieces)), bound_(bound) {
  if (dim_ < 1) throw std::invalid_argument("vol spec: dimension must be positive");
  if (!(bound_ > 0.0)) throw std::invalid_argument("vol spec: bound M must be positive");
  for (std::size_t k = 0; k < pieces_.size(); ++k) {
    auto& list = pieces_[k];
    std::sort(list.begin(), list.end(), [](const VolPiece& a, const VolPiece& b) { return a.t0 < b.t0; });
    for (std::size_t i = 0; i < list.size(); ++i) {
      const auto& p = list[i];
      if (!(p.t0 >= 0.0) || !(p.t1 > p.t0) || !std::isfinite(p.t1)) {
        throw std::invalid_argument("vol spec: piece of rate " + std::to_string(k + 1) + " needs 0 <= t0 < t1 < inf");
      }
      if (p.value.size() != dim_ || !p.value.allFinite()) {
        throw std::invalid_argument("vol spec: piece of rate " + std::to_string(k + 1) + " has a bad value");
      }
      if (i > 0 && p.t0 < list[i - 1].t1) {
        throw std::invalid_argument("vol spec: pieces of rate " + std::to_string(k + 1) + " overlap");
      }
    }
  }
}

Vec VolatilitySpec::at(int k, double t) const {
  for (const auto& p : pieces(k)) {
    if ((t > p.t0 && t <= p.t1) || (t == 0.0 && p.t0 == 0.0)) return p.value;
  }
  return Vec::Zero(dim_);
}

StrategyPath VolatilitySpec::strategy(int k, double scale) const {
  std::vector<double> breaks;
  for (const auto& p : pieces(k)) {
    if (p.t0 > 0.0) breaks.push_back(p.t0);
    breaks.push_back(p.t1);
  }
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
  std::vector<Vec> values;
  for (std::size_t i = 0; i <= breaks.size(); ++i) {
    values.push_back(i == breaks.size() ? Vec::Zero(dim_) : Vec(scale * at(k, mid_of(breaks, i))));
  }
  if (breaks.empty()) return StrategyPath::constant(Vec::Zero(dim_));
  return StrategyPath::piecewise(std::move(breaks), std::move(values));
}

std::vector<double> VolatilitySpec::breakpoints() const {
  std::vector<std::vector<double>> lists;
  for (int k = 1; k <= rates(); ++k) {
    std::vector<double> l;
    for (const auto& p : pieces(k)) {
      l.push_back(p.t0);
      l.push_back(p.t1);
    }
    lists.push_back(std::move(l));
  }
  return merge_breaks(lists, 0.0, kInf);
}

double VolatilitySpec::coordinate_sum_max() const {
  const auto breaks = breakpoints();
  double best = 0.0;
  for (std::size_t i = 0; i <= breaks.size(); ++i) {
    Vec sum = Vec::Zero(dim_);
    for (int k = 1; k <= rates(); ++k) sum += at(k, mid_of(breaks, i));
    best = std::max(best, sum.maxCoeff());
  }
  Vec at0 = Vec::Zero(dim_);
  for (int k = 1; k <= rates(); ++k) at0 += at(k, 0.0);
  return std::max(best, at0.maxCoeff());
}

double VolatilitySpec::norm_sum_max() const {
  const auto breaks = breakpoints();
  double best = 0.0;
  for (std::size_t i = 0; i <= breaks.size(); ++i) {
    double sum = 0.0;
    for (int k = 1; k <= rates(); ++k) sum += at(k, mid_of(breaks, i)).norm();
    best = std::max(best, sum);
  }
  return best;
}

LiborModel LiborModel::create(LiborModelSpec spec) {
  const int n = spec.tenor.n();
  if (spec.vols.rates() != n - 1) {
    throw std::invalid_argument("libor model: need volatilities for k = 1.." + std::to_string(n - 1));
  }
  if (spec.vols.dim() != spec.driver.dim()) throw std::invalid_argument("libor model: vol dimension != driver dimension");
  if (static_cast<int>(spec.initial.size()) != n) {
    throw std::invalid_argument("libor model: need initial rates L(0,T_0..T_{n-1}), got " +
                                std::to_string(spec.initial.size()));
  }
  for (double L : spec.initial) {
    if (!(L > 0.0) || !std::isfinite(L)) throw std::invalid_argument("libor model: initial rates must be positive");
  }
  if (spec.driver.horizon() < spec.tenor.terminal() * (1.0 - 1e-12)) {
    throw std::invalid_argument("libor model: driver horizon is shorter than T*");
  }
  if (spec.modulator) {
    const auto& md = *spec.modulator;
    if (md.levels.empty() || md.levels.size() != md.probs.size()) {
      throw std::invalid_argument("libor model: modulator levels and probabilities must match");
    }
    double total = 0.0;
    for (std::size_t i = 0; i < md.levels.size(); ++i) {
      if (!(md.levels[i] > 0.0) || !(md.probs[i] >= 0.0)) {
        throw std::invalid_argument("libor model: modulator levels must be positive, probabilities nonnegative");
      }
      total += md.probs[i];
    }
    if (std::abs(total - 1.0) > 1e-12) throw std::invalid_argument("libor model: modulator probabilities must sum to 1");
  }
  return LiborModel(std::move(spec));
}

double LiborModel::max_level() const {
  if (!spec_.modulator) return 1.0;
  return *std::max_element(spec_.modulator->levels.begin(), spec_.modulator->levels.end());
}

ConditionReport validate_vol_spec(const VolatilitySpec& v, const TenorStructure& tenor,
                                  const CharacteristicTriplet& driver, double eps, double M,
                                  const QuadratureOptions& opts) {
  ConditionReport rep;
  rep.id = ConditionId::L2;
  rep.horizon = tenor.terminal();
  rep.bound = M;
  auto fail = [&](ConditionId id, const std::string& why) {
    rep.id = id;
    rep.verdict = Verdict::Fail;
    rep.diagnostics = why;
    return rep;
  };
  if (v.rates() != tenor.n() - 1) return fail(ConditionId::L2, "(L2): expected n-1 volatility functions");
  for (int k = 1; k <= v.rates(); ++k) {
    for (const auto& p : v.pieces(k)) {
      if (p.value.minCoeff() < 0.0) {
        return fail(ConditionId::L2, "(L2) nonnegativity: lambda(., T_" + std::to_string(k) + ") has a negative entry");
      }
      if (p.t1 > tenor.T(k) && !p.value.isZero(0.0)) {
        return fail(ConditionId::L2, "(L2) support: lambda(t, T_" + std::to_string(k) + ") != 0 for some t > T_" +
                                         std::to_string(k));
      }
    }
  }
  const double sum = v.coordinate_sum_max();
  rep.value = sum;
  if (sum > M) {
    return fail(ConditionId::L2, "(L2) bound: coordinate sum " + format_number(sum) + " exceeds M = " + format_number(M));
  }
  // (L1) at the corners of [-(1+eps)M, (1+eps)M]^d
  const int d = driver.dim();
  const double r = (1.0 + eps) * M;
  double worst = 0.0;
  for (long corner = 0; corner < (1L << d); ++corner) {
    Vec u(d);
    for (int j = 0; j < d; ++j) u[j] = (corner >> j) & 1 ? r : -r;
    TimeIntegrand g;
    g.jump = [u](double) { return LevyIntegrand::exp_outside_unit(u); };
    g.jump_piecewise_constant = true;
    const QuadResult q = integrate_in_time(driver, 0.0, tenor.terminal(), g, opts);
    rep.partials.emplace_back("corner " + std::to_string(corner), q.value);
    if (q.status == QuadStatus::Divergent) {
      rep.value = kInf;
      return fail(ConditionId::L1, "(L1): exponential moment diverges at a corner with |u_j| = " + format_number(r));
    }
    if (q.status == QuadStatus::NotConverged) {
      rep.id = ConditionId::L1;
      rep.verdict = Verdict::Indeterminate;
      rep.diagnostics = "(L1): quadrature did not converge: " + q.diagnostic;
      return rep;
    }
    worst = std::max(worst, q.value);
  }
  rep.id = ConditionId::L1;
  rep.value = worst;
  rep.bound.reset();
  rep.verdict = Verdict::Pass;
  rep.diagnostics = "(L1) and (L2) hold; (L3) holds since the volatilities are deterministic";
  return rep;
}

double beta_factor(const LiborModel& m, double t, const Vec& x, int l, const std::vector<double>& rates) {
  const double L = rates.at(static_cast<std::size_t>(l));
  if (!(L > 0.0)) throw std::invalid_argument("beta_factor: rate L(t-, T_" + std::to_string(l) + ") is not positive");
  const double dl = m.tenor().delta(l) * L;
  const double ell = dl / (1.0 + dl);
  const double u = m.vols().at(l, t).dot(x);
  return ell * std::expm1(u) + 1.0;
}

double forward_weight(const LiborModel& m, int k, double t, const Vec& x, const std::vector<double>& rates) {
  double w = 1.0;
  for (int l = k + 1; l <= m.n() - 1; ++l) w *= beta_factor(m, t, x, l, rates);
  return w;
}

CharacteristicTriplet forward_characteristics(const LiborModel& m, int k, double t, const std::vector<double>& rates) {
  const int n = m.n();
  if (k < 1 || k > n - 1) throw std::invalid_argument("forward_characteristics: k out of range");
  const auto& tr = m.driver();
  bool all_zero = true;
  for (int l = k + 1; l <= n - 1; ++l) {
    if (!(rates.at(static_cast<std::size_t>(l)) > 0.0)) {
      throw std::invalid_argument("forward_characteristics: nonpositive rate for T_" + std::to_string(l));
    }
    all_zero = all_zero && m.vols().at(l, t).isZero(0.0);
  }
  if (k == n - 1 || all_zero) return tr;

  const int d = tr.dim();
  Vec shift = Vec::Zero(d);
  std::vector<std::pair<double, Vec>> factors;  // (ell, lambda)
  for (int l = k + 1; l <= n - 1; ++l) {
    const double dl = m.tenor().delta(l) * rates[static_cast<std::size_t>(l)];
    const double ell = dl / (1.0 + dl);
    const Vec lam = m.vols().at(l, t);
    shift += ell * lam;
    factors.emplace_back(ell, lam);
  }
  Vec drift = tr.b(t) + tr.c(t) * shift;
  const LevyMeasure& base = tr.F(t);
  auto weight = [factors](std::span<const double> x) {
    double w = 1.0;
    for (const auto& [ell, lam] : factors) {
      double u = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) u += lam[static_cast<Eigen::Index>(i)] * x[i];
      w *= ell * std::expm1(u) + 1.0;
    }
    return w;
  };
  LevyMeasure F = LevyMeasure::zero(d);
  if (!base.is_zero()) {
    const Truncation h = tr.truncation();
    for (int j = 0; j < d; ++j) {
      auto g = LevyIntegrand::generic(d, [&, j](std::span<const double> x) {
        const double w = weight(x);
        const Vec hx = h.apply(x);
        return hx[j] == 0.0 ? 0.0 : hx[j] * (w - 1.0);
      });
      drift[j] += integrate_levy(base, g);
    }
    F = LevyMeasure::create({WeightedMeasure{std::make_shared<const LevyMeasure>(base), weight}});
  }
  return CharacteristicTriplet::homogeneous(drift, tr.c(t), F, tr.truncation(), tr.horizon());
}

ConditionReport check_SL(const LiborModel& m, const QuadratureOptions& opts) {
  const double Tstar = m.tenor().terminal();
  const auto& tr = m.driver();
  const int n = m.n();
  std::vector<double> levels{1.0};
  if (m.spec().modulator) levels = m.spec().modulator->levels;
  ConditionReport out;
  out.id = ConditionId::SL;
  out.horizon = Tstar;
  out.verdict = Verdict::Pass;
  for (int i = 1; i <= n - 1; ++i) {
    double worst = 0.0;
    for (double level : levels) {
      bool weighted = false;
      for (int k = i + 1; k <= n - 1; ++k) weighted = weighted || !m.vols().pieces(k).empty();
      const StrategyPath s = m.vols().strategy(i, level);
      QuadResult r;
      if (!weighted) {
        r = hellinger_quad(tr, s, Tstar, opts);
      } else {
        const auto& vols = m.vols();
        TimeIntegrand g;
        g.local = [&](double t) {
          const Vec l = s(t);
          return l.dot(tr.c(t) * l);
        };
        g.local_piecewise_constant = tr.diffusion().is_piecewise_constant();
        g.jump = [&, i, level](double t) {
          Vec w = Vec::Zero(tr.dim());
          for (int k = i + 1; k <= n - 1; ++k) w += level * vols.at(k, t);
          return LevyIntegrand::weighted_hellinger(s(t), w);
        };
        g.jump_piecewise_constant = true;
        g.breaks = vols.breakpoints();
        r = integrate_in_time(tr, 0.0, Tstar, g, opts);
      }
      ConditionReport ri = report_from_integral(ConditionId::SL, Tstar, r);
      merge_verdict(out, ri);
      if (ri.verdict == Verdict::Fail && out.diagnostics.find("i=" + std::to_string(i)) == std::string::npos) {
        out.diagnostics += "(SL) diverges for i=" + std::to_string(i) + "; ";
      }
      if (ri.verdict == Verdict::Indeterminate) out.diagnostics += "i=" + std::to_string(i) + ": " + r.diagnostic + "; ";
      worst = std::max(worst, ri.value);
    }
    out.partials.emplace_back("i=" + std::to_string(i), worst);
    out.value = std::max(out.value, worst);
  }
  if (out.verdict == Verdict::Fail) out.value = kInf;
  return out;
}

ConditionReport check_levy_libor_bound(const LiborModel& m, double N, const QuadratureOptions& opts) {
  const double need = m.vols().norm_sum_max() * m.max_level();
  if (N < need * (1.0 - 1e-12)) {
    throw std::invalid_argument("check_levy_libor_bound: N = " + format_number(N) +
                                " is below the volatility sum bound " + format_number(need));
  }
  TimeIntegrand g;
  const int d = m.driver().dim();
  g.jump = [d, N](double) { return LevyIntegrand::abs_exp_tail(d, N); };
  g.jump_piecewise_constant = true;
  const QuadResult r = integrate_in_time(m.driver(), 0.0, m.tenor().terminal(), g, opts);
  ConditionReport rep = report_from_integral(ConditionId::LLB, m.tenor().terminal(), r);
  rep.diagnostics = r.diagnostic;
  return rep;
}

TimeGrid libor_grid(const LiborModel& m, std::size_t steps) {
  TimeGrid g = TimeGrid::uniform(m.tenor().terminal(), steps);
  std::vector<double> extra = m.tenor().maturities();
  for (double b : m.vols().breakpoints()) extra.push_back(b);
  for (double t : extra) {
    if (t > 0.0 && t < g.end() && !g.index_of(t)) {
      g.nodes.insert(std::upper_bound(g.nodes.begin(), g.nodes.end(), t), t);
    }
  }
  return g;
}

std::size_t LiborPaths::obs_index(double t) const {
  const TimeGrid g{times};
  const auto i = g.index_of(t);
  if (!i) throw std::invalid_argument("libor paths: t=" + format_number(t) + " is not an observation time");
  return *i;
}

LiborPaths backward_construct(const LiborModel& m, const PathEnsemble& ens, std::vector<double> obs) {
  const int n = m.n();
  const auto& tr = m.driver();
  if (ens.dim() != tr.dim()) throw std::invalid_argument("backward_construct: ensemble dimension != driver dimension");
  const ConditionReport sl = check_SL(m);
  if (!sl.passed()) {
    throw ConditionNotMetError("backward_construct: (SL) does not hold, so the construction is not certified: " +
                               sl.diagnostics);
  }
  const TimeGrid& grid = ens.grid();
  const double last_date = m.tenor().T(n - 1);
  if (grid.end() < last_date * (1.0 - 1e-12)) throw std::invalid_argument("backward_construct: grid ends before T_{n-1}");
  if (obs.empty()) {
    for (int k = 0; k <= n - 1; ++k) obs.push_back(m.tenor().T(k));
  }
  std::sort(obs.begin(), obs.end());
  std::vector<std::size_t> obs_idx;
  for (double t : obs) {
    const auto i = grid.index_of(t);
    if (!i) throw std::invalid_argument("backward_construct: observation time " + format_number(t) + " is not a grid node");
    obs_idx.push_back(*i);
  }
  for (double b : m.vols().breakpoints()) {
    if (b < grid.end() && !grid.index_of(b)) {
      throw std::invalid_argument("backward_construct: volatility breakpoint " + format_number(b) +
                                  " is not a grid node");
    }
  }
  const std::size_t steps = std::max(*grid.index_of(last_date), obs_idx.back());

  std::vector<double> levels{1.0};
  std::vector<double> level_cum{1.0};
  if (m.spec().modulator) {
    levels = m.spec().modulator->levels;
    level_cum.clear();
    double c = 0.0;
    for (double p : m.spec().modulator->probs) level_cum.push_back(c += p);
  }

  // Per step: active rates and integrated terminal cumulants over subset sums.
  struct StepTable {
    std::vector<int> active;
    std::vector<Vec> lambda;                 // per active rate
    std::vector<std::vector<double>> psi;    // per level, per mask
  };
  std::vector<StepTable> table(steps);
  for (std::size_t j = 0; j < steps; ++j) {
    const double t0 = grid.nodes[j];
    const double t1 = grid.nodes[j + 1];
    const double mid = 0.5 * (t0 + t1);
    StepTable& st = table[j];
    for (int l = 1; l <= n - 1; ++l) {
      const Vec lam = m.vols().at(l, mid);
      if (!lam.isZero(0.0)) {
        st.active.push_back(l);
        st.lambda.push_back(lam);
      }
    }
    if (st.active.size() > 20) throw std::invalid_argument("backward_construct: more than 20 live rates on a step");
    const std::size_t masks = std::size_t{1} << st.active.size();
    for (double level : levels) {
      std::vector<double> psi(masks, 0.0);
      for (std::size_t mask = 1; mask < masks; ++mask) {
        Vec theta = Vec::Zero(tr.dim());
        for (std::size_t a = 0; a < st.active.size(); ++a) {
          if (mask >> a & 1) theta += st.lambda[a];
        }
        psi[mask] = cumulant_integral(tr, level * theta, t0, t1).total();
      }
      st.psi.push_back(std::move(psi));
    }
  }

  LiborPaths out;
  out.times = obs;
  out.n_paths = ens.n_paths();
  out.n = n;
  out.steps = steps;
  for (int k = 0; k < n; ++k) {
    out.initial.push_back(m.initial(k));
    out.delta.push_back(m.tenor().delta(k));
  }
  const std::size_t nobs = obs.size();
  const std::size_t nu = static_cast<std::size_t>(n);
  out.rates.assign(out.n_paths * nobs * nu, 0.0);
  const std::size_t d = static_cast<std::size_t>(tr.dim());

  parallel_for(out.n_paths, ens.threads(), [&](std::size_t b, std::size_t e) {
    std::vector<double> buf;
    std::vector<double> logL(nu), L(nu), ell(nu), dlog(nu);
    for (std::size_t p = b; p < e; ++p) {
      ens.increments(p, buf);
      std::size_t q = 0;
      if (m.spec().modulator) {
        PathRng rng(ens.seed(), p, 2);
        const double u = rng.uniform();
        while (q + 1 < level_cum.size() && u > level_cum[q]) ++q;
      }
      const double level = levels[q];
      for (std::size_t k = 0; k < nu; ++k) {
        L[k] = m.initial(static_cast<int>(k));
        logL[k] = std::log(L[k]);
      }
      std::size_t next_obs = 0;
      for (std::size_t j = 0; j <= steps; ++j) {
        while (next_obs < nobs && obs_idx[next_obs] == j) {
          for (std::size_t k = 0; k < nu; ++k) out.rates[(p * nobs + next_obs) * nu + k] = L[k];
          ++next_obs;
        }
        if (j == steps) break;
        const StepTable& st = table[j];
        const std::size_t na = st.active.size();
        if (na == 0) continue;
        for (std::size_t a = 0; a < na; ++a) {
          const auto l = static_cast<std::size_t>(st.active[a]);
          const double dl = out.delta[l] * L[l];
          ell[a] = dl / (1.0 + dl);
        }
        const auto& psi = st.psi[q];
        for (std::size_t a = 0; a < na; ++a) {
          // sum over subsets S of the later live rates
          const std::size_t later = na - a - 1;
          double kappa = 0.0;
          for (std::size_t sub = 0; sub < (std::size_t{1} << later); ++sub) {
            double c = 1.0;
            for (std::size_t r = 0; r < later; ++r) c *= (sub >> r & 1) ? ell[a + 1 + r] : 1.0 - ell[a + 1 + r];
            const std::size_t mask = sub << (a + 1);
            kappa += c * (psi[mask | (std::size_t{1} << a)] - psi[mask]);
          }
          double lx = 0.0;
          for (std::size_t i = 0; i < d; ++i) lx += st.lambda[a][static_cast<Eigen::Index>(i)] * buf[j * d + i];
          dlog[a] = level * lx - kappa;
        }
        for (std::size_t a = 0; a < na; ++a) {
          const auto l = static_cast<std::size_t>(st.active[a]);
          logL[l] += dlog[a];
          L[l] = std::exp(logL[l]);
          if (!(L[l] > 0.0) || !std::isfinite(L[l])) {
            throw std::runtime_error("backward_construct: rate L(., T_" + std::to_string(l) +
                                     ") left (0, inf) on path " + std::to_string(p));
          }
        }
      }
    }
  });
  return out;
}

std::vector<double> density_process(int k, double t, const LiborPaths& paths) {
  if (k < 1 || k > paths.n - 1) throw std::invalid_argument("density_process: k out of range");
  const std::size_t o = paths.obs_index(t);
  std::vector<double> w(paths.n_paths, 1.0);
  for (std::size_t p = 0; p < paths.n_paths; ++p) {
    double prod = 1.0;
    for (int i = k + 1; i <= paths.n - 1; ++i) {
      const auto iu = static_cast<std::size_t>(i);
      prod *= (1.0 + paths.delta[iu] * paths.L(p, o, i)) / (1.0 + paths.delta[iu] * paths.initial[iu]);
    }
    w[p] = prod;
  }
  return w;
}

TestReport mc_forward_martingale_test(const LiborModel& m, const LiborPaths& paths, int k) {
  if (k < 1 || k > m.n() - 1) throw std::invalid_argument("forward martingale test: k out of range");
  const double Tk = m.tenor().T(k);
  const std::size_t o = paths.obs_index(Tk);
  const std::vector<double> w = density_process(k, Tk, paths);
  std::vector<double> x(paths.n_paths);
  for (std::size_t p = 0; p < x.size(); ++p) x[p] = paths.L(p, o, k) * w[p];
  return mean_test("L(T_" + std::to_string(k) + ";T_" + std::to_string(k) + ")", x, m.initial(k));
}

Price price_caplet(const LiborModel& m, const LiborPaths& paths, int k, double strike) {
  if (!(strike >= 0.0)) throw std::invalid_argument("price_caplet: strike must be nonnegative");
  const TestReport t = mc_forward_martingale_test(m, paths, k);
  if (t.verdict != Verdict::Pass) {
    throw ConditionNotMetError("price_caplet: forward martingale test failed for k=" + std::to_string(k) +
                               " (z = " + format_number(t.z) + ")");
  }
  const double Tk = m.tenor().T(k);
  const std::size_t o = paths.obs_index(Tk);
  const std::vector<double> w = density_process(k, Tk, paths);
  const double delta = m.tenor().delta(k);
  std::vector<double> x(paths.n_paths);
  for (std::size_t p = 0; p < x.size(); ++p) x[p] = delta * std::max(paths.L(p, o, k) - strike, 0.0) * w[p];
  const SampleMean s = sample_mean(x);
  return {s.mean, s.std_error, x.size()};
}

}  // namespace expmart
