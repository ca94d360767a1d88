#include "expmart/simulate.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>
#include <variant>

#include "expmart/characteristics.hpp"
#include "expmart/errors.hpp"
#include "expmart/parallel.hpp"
#include "expmart/rng.hpp"

namespace expmart {

TimeGrid TimeGrid::uniform(double T, std::size_t steps) {
  if (!(T > 0.0) || steps == 0) throw std::invalid_argument("time grid: need T > 0 and at least one step");
  TimeGrid g;
  g.nodes.resize(steps + 1);
  for (std::size_t j = 0; j <= steps; ++j) g.nodes[j] = T * static_cast<double>(j) / static_cast<double>(steps);
  g.nodes.back() = T;
  return g;
}

TimeGrid TimeGrid::from_nodes(std::vector<double> nodes) {
  if (nodes.size() < 2 || nodes.front() != 0.0) throw std::invalid_argument("time grid: must start at 0 with a step");
  for (std::size_t j = 1; j < nodes.size(); ++j) {
    if (!(nodes[j] > nodes[j - 1])) throw std::invalid_argument("time grid: nodes must increase");
  }
  TimeGrid g;
  g.nodes = std::move(nodes);
  return g;
}

std::optional<std::size_t> TimeGrid::index_of(double t) const {
  const double tol = 1e-12 * std::max(1.0, std::abs(t));
  auto it = std::lower_bound(nodes.begin(), nodes.end(), t - tol);
  if (it != nodes.end() && std::abs(*it - t) <= tol) return static_cast<std::size_t>(it - nodes.begin());
  return std::nullopt;
}

std::string to_string(SchemeKind k) {
  switch (k) {
    case SchemeKind::Gaussian:
      return "gaussian";
    case SchemeKind::CompoundPoisson:
      return "compound-poisson";
    case SchemeKind::SmallJumpApproximation:
      return "small-jump-approximation";
  }
  return "?";
}

// ---------------------------------------------------------------------------

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// One source of jumps placed on an axis (axis < 0: full vector atoms).
struct JumpSource {
  enum class Kind { Atoms, Law, Table };
  Kind kind = Kind::Law;
  int axis = 0;
  double rate = 0.0;
  std::vector<Vec> atoms;
  std::vector<double> atom_cum;
  JumpLaw law;
  std::vector<double> cell_lo, cell_width, cell_cum;  // signed cells
  std::vector<signed char> cell_sign;

  double sample_scalar(PathRng& rng) const {
    if (kind == Kind::Law) {
      return std::visit(
          [&](const auto& l) -> double {
            using L = std::decay_t<decltype(l)>;
            if constexpr (std::is_same_v<L, NormalLaw>) {
              return l.mean + l.sd * rng.normal();
            } else if constexpr (std::is_same_v<L, DoubleExponentialLaw>) {
              const double u = rng.uniform();
              return u < l.p_up ? rng.exponential(l.eta_up) : -rng.exponential(l.eta_down);
            } else {
              return l.lo + (l.hi - l.lo) * rng.uniform();
            }
          },
          law);
    }
    const double u = rng.uniform() * cell_cum.back();
    auto it = std::upper_bound(cell_cum.begin(), cell_cum.end(), u);
    const std::size_t c = std::min(static_cast<std::size_t>(it - cell_cum.begin()), cell_cum.size() - 1);
    return cell_sign[c] * (cell_lo[c] + cell_width[c] * rng.uniform());
  }
};

struct PieceLaw {
  double rate = 0.0;
  std::vector<JumpSource> sources;
  std::vector<double> source_cum;
  Vec compensation;  // drift per unit activity
  Mat small_cov;     // covariance per unit activity
  bool approximated = false;
  bool gaussian_small = false;
  double small_var = 0.0;
};

Region h_region(TruncationKind k) {
  switch (k) {
    case TruncationKind::StandardCutoff:
      return Region::small();
    case TruncationKind::Identity:
      return Region::all();
    case TruncationKind::Zero:
      break;
  }
  return {0.0, 0.0};
}

double integral_or_throw(const QuadResult& r, const std::string& what) {
  if (!r.ok() || !std::isfinite(r.value)) {
    throw std::runtime_error("simulation setup: " + what + " is not finite (" + r.diagnostic + ")");
  }
  return r.value;
}

// Region intersection on the radial axis.
Region intersect(Region a, Region b) { return {std::max(a.lo, b.lo), std::min(a.hi, b.hi)}; }

QuadResult integrate_1d(const LevyMeasureSpec& spec, const LevyIntegrand& g, Region region) {
  if (!(region.hi > region.lo)) return {};
  return integrate_spec(spec, g, region, {}, true);
}

JumpSource table_source(const DensityView& d, double eps, int axis) {
  JumpSource src;
  src.kind = JumpSource::Kind::Table;
  src.axis = axis;
  double total = 0.0;
  for (int side = 0; side < 2; ++side) {
    const double sign = side == 0 ? 1.0 : -1.0;
    const double reach = side == 0 ? d.hi : -d.lo;
    if (!(reach > eps)) continue;
    auto f = [&](double r) {
      const double v = d.f(sign * r);
      return std::isfinite(v) ? v : 0.0;
    };
    double r = eps;
    double side_mass = 0.0;
    while (r < reach && r < 1e6) {
      const double next = std::min({r * 1.01, reach, 1e6});
      const double m = gauss_kronrod(f, r, next).value;
      if (m > 0.0) {
        total += m;
        side_mass += m;
        src.cell_lo.push_back(r);
        src.cell_width.push_back(next - r);
        src.cell_cum.push_back(total);
        src.cell_sign.push_back(static_cast<signed char>(sign));
      }
      if (r > 1.0 && m < 1e-16 * side_mass) break;
      r = next;
    }
  }
  src.rate = total;
  return src;
}

Mat symmetric_root(const Mat& c) {
  if (c.rows() == 1) return Mat::Constant(1, 1, std::sqrt(std::max(c(0, 0), 0.0)));
  Eigen::SelfAdjointEigenSolver<Mat> eig(c);
  const Vec ev = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return eig.eigenvectors() * ev.asDiagonal() * eig.eigenvectors().transpose();
}

}  // namespace

struct PathGenerator::Impl {
  struct Segment {
    double t0, t1, activity;
    std::size_t piece;
  };
  struct Step {
    Vec mean;
    Mat root;
    bool noise = false;
    std::vector<Segment> segments;
  };
  std::vector<PieceLaw> pieces;
  std::vector<Step> steps;
};

PathGenerator::PathGenerator(const CharacteristicTriplet& tr, TimeGrid grid, const SimulationOptions& opts)
    : dim_(tr.dim()), grid_(std::move(grid)), impl_(std::make_unique<Impl>()) {
  if (grid_.nodes.size() < 2 || grid_.nodes.front() != 0.0) throw std::invalid_argument("simulate: bad grid");
  if (grid_.end() > tr.horizon() * (1.0 + 1e-12)) throw std::invalid_argument("simulate: grid exceeds horizon");
  if (!(opts.epsilon > 0.0 && opts.epsilon < 1.0)) throw std::invalid_argument("simulate: epsilon must lie in (0, 1)");
  const int d = dim_;
  const Truncation h = tr.truncation();
  const Region hreg = h_region(h.kind);
  const double eps = opts.epsilon;

  bool any_jumps = false;
  bool any_approx = false;
  for (const auto& F : tr.levy().pieces()) {
    PieceLaw law;
    law.compensation = Vec::Zero(d);
    law.small_cov = Mat::Zero(d, d);
    const LevyMeasureSpec& spec = F.spec();
    if (std::holds_alternative<WeightedMeasure>(spec.rep)) {
      throw std::invalid_argument("simulate: weighted measures cannot be simulated directly");
    }
    if (auto* pm = std::get_if<PointMasses>(&spec.rep)) {
      JumpSource src;
      src.kind = JumpSource::Kind::Atoms;
      src.axis = -1;
      for (const auto& a : pm->atoms) {
        src.rate += a.rate;
        src.atoms.push_back(a.location);
        src.atom_cum.push_back(src.rate);
        law.compensation -= a.rate * h.apply(std::span<const double>(a.location.data(), a.location.size()));
      }
      if (src.rate > 0.0) law.sources.push_back(std::move(src));
    } else {
      std::vector<std::pair<int, const LevyMeasureSpec*>> comps;
      if (auto* ap = std::get_if<AxisProduct>(&spec.rep)) {
        for (std::size_t j = 0; j < ap->components.size(); ++j) comps.emplace_back(static_cast<int>(j), &ap->components[j]);
      } else {
        comps.emplace_back(0, &spec);
      }
      for (const auto& [axis, comp] : comps) {
        if (std::holds_alternative<ZeroMeasure>(comp->rep)) continue;
        if (auto* pm = std::get_if<PointMasses>(&comp->rep)) {
          JumpSource src;
          src.kind = JumpSource::Kind::Atoms;
          src.axis = axis;
          for (const auto& a : pm->atoms) {
            src.rate += a.rate;
            src.atoms.push_back(a.location);
            src.atom_cum.push_back(src.rate);
            law.compensation[axis] -= a.rate * h.weight(std::abs(a.location[0])) * a.location[0];
          }
          if (src.rate > 0.0) law.sources.push_back(std::move(src));
          continue;
        }
        if (auto* cp = std::get_if<CompoundPoisson>(&comp->rep)) {
          if (cp->rate == 0.0) continue;
          JumpSource src;
          src.kind = JumpSource::Kind::Law;
          src.axis = axis;
          src.rate = cp->rate;
          src.law = cp->law;
          law.sources.push_back(std::move(src));
          law.compensation[axis] -= integral_or_throw(integrate_1d(*comp, LevyIntegrand::coordinate(1, 0), hreg),
                                                      "compensator of the truncated jumps");
          continue;
        }
        auto view = density_view(*comp);
        if (!view) throw std::invalid_argument("simulate: unsupported jump component " + comp->describe());
        law.approximated = true;
        JumpSource src = table_source(*view, eps, axis);
        // drift: int_{|x|<=eps} (x - h) F - int_{|x|>eps} h F
        double comp_drift =
            -integral_or_throw(integrate_1d(*comp, LevyIntegrand::coordinate(1, 0), intersect(hreg, Region::large(eps))),
                               "truncated mean of the jumps above epsilon");
        if (h.kind == TruncationKind::Zero) {
          comp_drift += integral_or_throw(integrate_1d(*comp, LevyIntegrand::coordinate(1, 0), Region::small(eps)),
                                          "mean of the jumps below epsilon");
        }
        law.compensation[axis] += comp_drift;
        const double var = integral_or_throw(
            integrate_1d(*comp, LevyIntegrand::coordinate_square(1, 0), Region::small(eps)), "small-jump variance");
        law.small_var = std::max(law.small_var, var);
        if (var > opts.variance_floor) {
          law.small_cov(axis, axis) += var;
          law.gaussian_small = true;
        }
        if (src.rate > 0.0) law.sources.push_back(std::move(src));
      }
    }
    for (const auto& s : law.sources) {
      law.rate += s.rate;
      law.source_cum.push_back(law.rate);
    }
    any_jumps = any_jumps || law.rate > 0.0 || law.approximated;
    any_approx = any_approx || law.approximated;
    if (law.gaussian_small) scheme_.gaussian_small_jumps = true;
    scheme_.small_jump_variance = std::max(scheme_.small_jump_variance, law.small_var);
    impl_->pieces.push_back(std::move(law));
  }
  scheme_.kind = any_approx ? SchemeKind::SmallJumpApproximation
                            : (any_jumps ? SchemeKind::CompoundPoisson : SchemeKind::Gaussian);
  scheme_.epsilon = any_approx ? eps : 0.0;

  const bool pc = tr.piecewise_constant();
  const auto& fbreaks = tr.levy().breakpoints();
  for (std::size_t j = 0; j + 1 < grid_.nodes.size(); ++j) {
    const double t0 = grid_.nodes[j];
    const double t1 = grid_.nodes[j + 1];
    Impl::Step step;
    step.mean = Vec::Zero(d);
    Mat cov = Mat::Zero(d, d);
    std::vector<double> cuts{t0};
    for (double b : merge_breaks({fbreaks, tr.breakpoints()}, t0, t1)) cuts.push_back(b);
    cuts.push_back(t1);
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
      const double s0 = cuts[k];
      const double s1 = cuts[k + 1];
      const double mid = 0.5 * (s0 + s1);
      double act;
      if (pc) {
        act = tr.a(mid) * (s1 - s0);
        step.mean += tr.b(mid) * act;
        cov += tr.c(mid) * act;
      } else {
        act = integral_or_throw(integrate_time([&](double t) { return tr.a(t); }, s0, s1), "activity");
        for (int i = 0; i < d; ++i) {
          step.mean[i] += integral_or_throw(integrate_time([&](double t) { return tr.b(t)[i] * tr.a(t); }, s0, s1),
                                            "drift integral");
          for (int l = i; l < d; ++l) {
            const double v = integral_or_throw(
                integrate_time([&](double t) { return tr.c(t)(i, l) * tr.a(t); }, s0, s1), "diffusion integral");
            cov(i, l) += v;
            if (l != i) cov(l, i) += v;
          }
        }
      }
      const std::size_t p = tr.levy().piece_index(mid);
      const PieceLaw& law = impl_->pieces[p];
      step.mean += law.compensation * act;
      cov += law.small_cov * act;
      if (law.rate * act > opts.max_jump_rate * (s1 - s0)) {
        throw std::runtime_error("simulate: jump rate above epsilon is " + format_number(law.rate * act / (s1 - s0)) +
                                 " per unit time, above the ceiling " + format_number(opts.max_jump_rate) +
                                 "; use a larger epsilon or a smaller step");
      }
      if (law.rate > 0.0 && act > 0.0) step.segments.push_back({s0, s1, act, p});
    }
    step.noise = cov.cwiseAbs().maxCoeff() > 0.0;
    step.root = step.noise ? symmetric_root(cov) : Mat::Zero(d, d);
    if (!step.mean.allFinite() || !step.root.allFinite()) {
      throw std::runtime_error("simulate: non-finite increment law on step " + std::to_string(j));
    }
    impl_->steps.push_back(std::move(step));
  }
}

PathGenerator::~PathGenerator() = default;

void PathGenerator::generate(std::uint64_t seed, std::size_t path, double* inc, std::vector<JumpRecord>* jumps) const {
  PathRng rng(seed, path);
  const int d = dim_;
  Vec z(d);
  for (std::size_t j = 0; j < impl_->steps.size(); ++j) {
    const auto& st = impl_->steps[j];
    double* x = inc + j * static_cast<std::size_t>(d);
    if (d == 1) {
      x[0] = st.mean[0];
      if (st.noise) x[0] += st.root(0, 0) * rng.normal();
    } else {
      for (int i = 0; i < d; ++i) x[i] = st.mean[i];
      if (st.noise) {
        for (int i = 0; i < d; ++i) z[i] = rng.normal();
        const Vec w = st.root * z;
        for (int i = 0; i < d; ++i) x[i] += w[i];
      }
    }
    for (const auto& seg : st.segments) {
      const PieceLaw& law = impl_->pieces[seg.piece];
      const long n = rng.poisson(law.rate * seg.activity);
      for (long m = 0; m < n; ++m) {
        std::size_t si = 0;
        if (law.sources.size() > 1) {
          const double u = rng.uniform() * law.rate;
          si = std::min(static_cast<std::size_t>(std::upper_bound(law.source_cum.begin(), law.source_cum.end(), u) -
                                                 law.source_cum.begin()),
                        law.sources.size() - 1);
        }
        const JumpSource& src = law.sources[si];
        const double time = seg.t0 + (seg.t1 - seg.t0) * rng.uniform();
        Vec size = Vec::Zero(d);
        if (src.kind == JumpSource::Kind::Atoms) {
          std::size_t a = 0;
          if (src.atoms.size() > 1) {
            const double u = rng.uniform() * src.rate;
            a = std::min(static_cast<std::size_t>(std::upper_bound(src.atom_cum.begin(), src.atom_cum.end(), u) -
                                                  src.atom_cum.begin()),
                         src.atoms.size() - 1);
          }
          if (src.axis < 0) {
            size = src.atoms[a];
          } else {
            size[src.axis] = src.atoms[a][0];
          }
        } else {
          size[src.axis] = src.sample_scalar(rng);
        }
        for (int i = 0; i < d; ++i) x[i] += size[i];
        if (jumps && size.norm() > scheme_.epsilon) jumps->push_back({j, time, std::move(size)});
      }
    }
  }
}

// ---------------------------------------------------------------------------

PathEnsemble::PathEnsemble(std::shared_ptr<const PathGenerator> gen, std::uint64_t seed, std::size_t n_paths,
                           std::size_t factor, int threads)
    : gen_(std::move(gen)), seed_(seed), n_paths_(n_paths), threads_(std::max(threads, 1)) {
  const auto& fine = gen_->grid();
  if (factor == 0 || fine.steps() % factor != 0) {
    throw std::invalid_argument("ensemble: coarsening factor must divide the number of steps");
  }
  for (std::size_t j = 0; j < fine.nodes.size(); j += factor) grid_.nodes.push_back(fine.nodes[j]);
  if (factor > 1) {
    for (std::size_t j = 0; j < fine.steps(); ++j) step_of_.push_back(j / factor);
  }
}

void PathEnsemble::increments(std::size_t path, std::vector<double>& out, std::vector<JumpRecord>* jumps) const {
  if (path >= n_paths_) throw std::out_of_range("ensemble: path index out of range");
  const std::size_t d = static_cast<std::size_t>(dim());
  const std::size_t fine_steps = gen_->grid().steps();
  if (step_of_.empty()) {
    out.resize(fine_steps * d);
    gen_->generate(seed_, path, out.data(), jumps);
    return;
  }
  thread_local std::vector<double> fine;
  fine.resize(fine_steps * d);
  gen_->generate(seed_, path, fine.data(), jumps);
  out.assign(grid_.steps() * d, 0.0);
  for (std::size_t j = 0; j < fine_steps; ++j) {
    for (std::size_t i = 0; i < d; ++i) out[step_of_[j] * d + i] += fine[j * d + i];
  }
  if (jumps) {
    for (auto& r : *jumps) r.step = step_of_[r.step];
  }
}

std::vector<Vec> PathEnsemble::terminal_values() const {
  std::vector<Vec> out(n_paths_, Vec::Zero(dim()));
  const std::size_t d = static_cast<std::size_t>(dim());
  parallel_for(n_paths_, threads_, [&](std::size_t b, std::size_t e) {
    std::vector<double> buf;
    for (std::size_t p = b; p < e; ++p) {
      increments(p, buf);
      for (std::size_t j = 0; j < steps(); ++j) {
        for (std::size_t i = 0; i < d; ++i) out[p][static_cast<Eigen::Index>(i)] += buf[j * d + i];
      }
    }
  });
  return out;
}

PathEnsemble PathEnsemble::coarsen(std::size_t factor) const {
  if (factor == 0 || steps() % factor != 0) {
    throw std::invalid_argument("ensemble: coarsening factor must divide the number of steps");
  }
  TimeGrid g;
  for (std::size_t j = 0; j < grid_.nodes.size(); j += factor) g.nodes.push_back(grid_.nodes[j]);
  return restrict_to(g);
}

PathEnsemble PathEnsemble::restrict_to(const TimeGrid& coarse) const {
  const TimeGrid& fine = gen_->grid();
  if (coarse.nodes.size() < 2 || coarse.nodes.front() != fine.nodes.front() ||
      !fine.index_of(coarse.end()) || *fine.index_of(coarse.end()) != fine.steps()) {
    throw std::invalid_argument("ensemble: coarse grid must span the fine grid");
  }
  PathEnsemble out = *this;
  out.grid_ = coarse;
  out.step_of_.assign(fine.steps(), 0);
  std::size_t c = 0;
  for (std::size_t i = 1; i < coarse.nodes.size(); ++i) {
    const auto j = fine.index_of(coarse.nodes[i]);
    if (!j || *j <= c) throw std::invalid_argument("ensemble: coarse node " + format_number(coarse.nodes[i]) +
                                                   " is not an increasing node of the fine grid");
    for (std::size_t k = c; k < *j; ++k) out.step_of_[k] = i - 1;
    c = *j;
  }
  out.grid_.nodes.front() = fine.nodes.front();
  for (std::size_t i = 1; i < coarse.nodes.size(); ++i) out.grid_.nodes[i] = fine.nodes[*fine.index_of(coarse.nodes[i])];
  return out;
}

PathEnsemble PathEnsemble::with_threads(int threads) const {
  PathEnsemble out = *this;
  out.threads_ = std::max(threads, 1);
  return out;
}

PathEnsemble simulate_piiac(const CharacteristicTriplet& tr, const TimeGrid& grid, std::size_t n_paths,
                            std::uint64_t seed, const SimulationOptions& opts) {
  if (n_paths == 0) throw std::invalid_argument("simulate: need at least one path");
  const ConditionReport piiac = check_piiac_integrability(tr, grid.end());
  if (!piiac.passed()) {
    throw ConditionNotMetError("simulate: PIIAC integrability does not hold on [0, " + format_number(grid.end()) +
                               "]: " + piiac.diagnostics);
  }
  auto gen = std::make_shared<const PathGenerator>(tr, grid, opts);
  return PathEnsemble(std::move(gen), seed, n_paths, 1, opts.threads);
}

// ---------------------------------------------------------------------------

std::vector<double> MartingalePaths::column(std::size_t k) const {
  std::vector<double> out(n_paths);
  for (std::size_t p = 0; p < n_paths; ++p) out[p] = at(p, k);
  return out;
}

MartingalePaths exponential_martingale_paths(const PathEnsemble& ens, const StrategyPath& s, const CumulantPath& K) {
  if (s.dim() != ens.dim()) throw std::invalid_argument("martingale paths: strategy dimension does not match");
  const TimeGrid& grid = ens.grid();
  std::vector<std::size_t> obs;
  for (double t : K.grid) {
    auto idx = grid.index_of(t);
    if (!idx) {
      throw std::invalid_argument("martingale paths: cumulant node t=" + format_number(t) +
                                  " is not on the ensemble grid");
    }
    obs.push_back(*idx);
  }
  if (s.piecewise_constant()) {
    for (double b : s.breakpoints()) {
      if (b > 0.0 && b < grid.end() && !grid.index_of(b)) {
        throw std::invalid_argument("martingale paths: strategy breakpoint " + format_number(b) +
                                    " is not on the ensemble grid");
      }
    }
  }
  const std::size_t d = static_cast<std::size_t>(ens.dim());
  const std::size_t steps = grid.steps();
  std::vector<double> lambda(steps * d);
  for (std::size_t j = 0; j < steps; ++j) {
    const Vec l = s(0.5 * (grid.nodes[j] + grid.nodes[j + 1]));
    for (std::size_t i = 0; i < d; ++i) lambda[j * d + i] = l[static_cast<Eigen::Index>(i)];
  }
  MartingalePaths M;
  M.times = K.grid;
  M.n_paths = ens.n_paths();
  const std::size_t nobs = obs.size();
  M.values.assign(M.n_paths * nobs, 0.0);
  parallel_for(M.n_paths, ens.threads(), [&](std::size_t b, std::size_t e) {
    std::vector<double> buf;
    for (std::size_t p = b; p < e; ++p) {
      ens.increments(p, buf);
      double acc = 0.0;
      std::size_t k = 0;
      for (std::size_t j = 0; j <= steps && k < nobs; ++j) {
        while (k < nobs && obs[k] == j) {
          M.values[p * nobs + k] = std::exp(acc - K.values[k]);
          ++k;
        }
        if (j < steps) {
          for (std::size_t i = 0; i < d; ++i) acc += lambda[j * d + i] * buf[j * d + i];
        }
      }
    }
  });
  return M;
}

SampleMean sample_mean(const std::vector<double>& x) {
  SampleMean r;
  if (x.empty()) return r;
  const double n = static_cast<double>(x.size());
  // shifted by the first sample so that constant samples are exact
  const double x0 = x.front();
  double sum = 0.0;
  for (double v : x) sum += v - x0;
  const double shift = sum / n;
  r.mean = x0 + shift;
  if (x.size() > 1) {
    double ss = 0.0;
    for (double v : x) ss += (v - x0 - shift) * (v - x0 - shift);
    r.std_error = std::sqrt(ss / (n - 1.0) / n);
  }
  return r;
}

TestReport mean_test(std::string quantity, const std::vector<double>& samples, double target) {
  if (samples.size() < 100) {
    throw std::invalid_argument("martingale test needs at least 100 paths, got " + std::to_string(samples.size()));
  }
  TestReport r;
  r.quantity = std::move(quantity);
  r.n_paths = samples.size();
  const SampleMean m = sample_mean(samples);
  r.estimate = m.mean;
  r.std_error = m.std_error;
  const double dev = m.mean - target;
  if (r.std_error > 0.0) {
    r.z = dev / r.std_error;
  } else {
    r.z = dev == 0.0 ? 0.0 : (dev > 0.0 ? kInf : -kInf);
  }
  r.verdict = std::isfinite(r.estimate) && std::abs(r.z) <= 3.0 ? Verdict::Pass : Verdict::Fail;
  return r;
}

TestReport mc_martingale_test(const MartingalePaths& M, double t) {
  const TimeGrid g{M.times};
  const auto k = g.index_of(t);
  if (!k) throw std::invalid_argument("martingale test: t=" + format_number(t) + " is not an observation time");
  return mean_test("M(" + format_number(t) + ")", M.column(*k), 1.0);
}

std::string csv_row(const TestReport& r) {
  return r.quantity + "," + format_number(r.estimate) + "," + format_number(r.std_error) + "," + format_number(r.z) +
         "," + to_string(r.verdict);
}

void write_ensemble_csv(std::ostream& os, const PathEnsemble& ens, std::size_t max_paths) {
  const std::size_t d = static_cast<std::size_t>(ens.dim());
  os << "path,step,time";
  for (std::size_t i = 0; i < d; ++i) os << ",dx_" << i;
  os << ",jumps\n";
  std::vector<double> buf;
  std::vector<JumpRecord> jumps;
  const std::size_t n = std::min(max_paths, ens.n_paths());
  for (std::size_t p = 0; p < n; ++p) {
    jumps.clear();
    ens.increments(p, buf, &jumps);
    std::vector<int> count(ens.steps(), 0);
    for (const auto& r : jumps) ++count[r.step];
    for (std::size_t j = 0; j < ens.steps(); ++j) {
      os << p << ',' << j << ',' << format_number(ens.grid().nodes[j + 1]);
      for (std::size_t i = 0; i < d; ++i) os << ',' << format_number(buf[j * d + i]);
      os << ',' << count[j] << '\n';
    }
  }
}

}  // namespace expmart
