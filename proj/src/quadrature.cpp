#include "expmart/quadrature.hpp"
#include "expmart/report.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <vector>

namespace expmart {
namespace {

constexpr std::array<double, 8> kKronrodNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr std::array<double, 8> kKronrodWeights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
// Gauss weights for Kronrod nodes 1, 3, 5, 7.
constexpr std::array<double, 4> kGaussWeights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

constexpr std::array<double, 5> kLegendreNodes = {
    -0.906179845938663992797626878299393, -0.538469310105683091036314420700208, 0.0,
    0.538469310105683091036314420700208, 0.906179845938663992797626878299393};
constexpr std::array<double, 5> kLegendreWeights = {
    0.236926885056189087514264040719918, 0.478628670499366468041291514835638,
    0.568888888888888888888888888888889, 0.478628670499366468041291514835638,
    0.236926885056189087514264040719918};

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr double kInf = std::numeric_limits<double>::infinity();

struct Panel {
  double a, b, value, error;
};

Panel gk15(const ScalarFn& f, double a, double b) {
  const double centre = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double fc = f(centre);
  double kronrod = kKronrodWeights[7] * fc;
  double gauss = kGaussWeights[3] * fc;
  for (int i = 0; i < 7; ++i) {
    const double dx = half * kKronrodNodes[i];
    const double sum = f(centre - dx) + f(centre + dx);
    kronrod += kKronrodWeights[i] * sum;
    if (i % 2 == 1) gauss += kGaussWeights[i / 2] * sum;
  }
  kronrod *= half;
  gauss *= half;
  double err = std::abs(kronrod - gauss);
  err = std::max(err, 50.0 * kEps * std::abs(kronrod));
  return {a, b, kronrod, err};
}

double signed_infinity(double partial) { return partial < 0.0 ? -kInf : kInf; }

// Monitors a sequence of shell contributions for convergence, divergence or
// a stable geometric tail.
class ShellMonitor {
 public:
  explicit ShellMonitor(const QuadratureOptions& opts) : opts_(opts) {}

  enum class Step { Continue, Done, Diverged };

  Step add(double c) {
    total_ += c;
    const double ac = std::abs(c);
    ++count_;
    if (ac == 0.0) {
      ++zero_run_;
    } else {
      zero_run_ = 0;
    }
    if (prev_abs_ > 0.0 && ac > 0.0) {
      const double q = ac / prev_abs_;
      ratios_[0] = ratios_[1];
      ratios_[1] = ratios_[2];
      ratios_[2] = q;
      ++n_ratios_;
      grow_run_ = (q >= opts_.divergence_ratio) ? grow_run_ + 1 : 0;
      if (grow_run_ >= opts_.divergence_levels) return Step::Diverged;
    } else if (ac > 0.0) {
      grow_run_ = 0;
    }
    prev_abs_ = ac;

    const double scale = std::abs(total_);
    const bool tiny = scale > 0.0 && (ac <= 0.1 * opts_.rel_tol * scale || ac <= opts_.abs_tol);
    negligible_run_ = tiny ? negligible_run_ + 1 : 0;
    if (negligible_run_ >= 2 && (n_ratios_ == 0 || ratios_[2] < 1.0)) return Step::Done;
    if (total_ == 0.0 && zero_run_ >= 40) return Step::Done;

    if (n_ratios_ >= 6) {
      const double q = ratios_[2];
      if (q < opts_.divergence_ratio && std::abs(q - ratios_[1]) <= 1e-7 * q &&
          std::abs(ratios_[1] - ratios_[0]) <= 1e-6 * q) {
        const double remainder = c * q / (1.0 - q);
        total_ += remainder;
        extrapolated_ = std::abs(remainder) * 1e-6 / (1.0 - q);
        return Step::Done;
      }
    }
    return Step::Continue;
  }

  double total() const { return total_; }
  double extrapolation_error() const { return extrapolated_; }

 private:
  const QuadratureOptions& opts_;
  double total_ = 0.0;
  double prev_abs_ = 0.0;
  std::array<double, 3> ratios_{};
  int n_ratios_ = 0;
  int grow_run_ = 0;
  int negligible_run_ = 0;
  int zero_run_ = 0;
  int count_ = 0;
  double extrapolated_ = 0.0;
};

template <class NextShell>
QuadResult run_shells(const ScalarFn& f, NextShell next_shell, bool monitored,
                      const QuadratureOptions& opts, const char* label) {
  QuadResult out;
  ShellMonitor monitor(opts);
  double plain_total = 0.0;
  for (int j = 0; j < opts.max_levels; ++j) {
    double lo = 0.0;
    double hi = 0.0;
    if (!next_shell(j, lo, hi)) {
      out.value = monitored ? monitor.total() : plain_total;
      return out;
    }
    QuadratureOptions shell_opts = opts;
    shell_opts.abs_tol = std::max(opts.abs_tol, 0.01 * opts.rel_tol *
                                                    std::abs(monitored ? monitor.total() : plain_total));
    QuadResult r = gauss_kronrod(f, lo, hi, shell_opts);
    out.evaluations += r.evaluations;
    out.error += r.error;
    if (r.status != QuadStatus::Converged) {
      const double partial = (monitored ? monitor.total() : plain_total) + r.value;
      if (std::isinf(r.value)) {
        out.status = QuadStatus::Divergent;
        out.value = signed_infinity(r.value);
        out.diagnostic = std::string(label) + ": shell integral overflowed";
      } else {
        out.status = QuadStatus::NotConverged;
        out.value = partial;
        out.diagnostic = std::string(label) + ": shell quadrature did not converge (" + r.diagnostic + ")";
      }
      return out;
    }
    if (!monitored) {
      plain_total += r.value;
      continue;
    }
    switch (monitor.add(r.value)) {
      case ShellMonitor::Step::Continue:
        break;
      case ShellMonitor::Step::Done:
        out.value = monitor.total();
        out.error += monitor.extrapolation_error();
        return out;
      case ShellMonitor::Step::Diverged:
        out.status = QuadStatus::Divergent;
        out.value = signed_infinity(monitor.total());
        out.diagnostic = std::string(label) + ": shell contributions stopped decaying after " +
                         std::to_string(j + 1) + " levels (partial " + std::to_string(monitor.total()) + ")";
        return out;
    }
  }
  out.status = QuadStatus::NotConverged;
  out.value = monitored ? monitor.total() : plain_total;
  out.diagnostic = std::string(label) + ": shell cap reached without convergence";
  return out;
}

}  // namespace

QuadResult gauss_kronrod(const ScalarFn& f, double a, double b, const QuadratureOptions& opts) {
  QuadResult out;
  if (!(b > a)) return out;
  std::vector<Panel> panels;
  panels.push_back(gk15(f, a, b));
  out.evaluations = 15;
  auto totals = [&] {
    double v = 0.0, e = 0.0;
    for (const auto& p : panels) {
      v += p.value;
      e += p.error;
    }
    return std::pair{v, e};
  };
  for (;;) {
    auto [value, error] = totals();
    out.value = value;
    out.error = error;
    if (!std::isfinite(value)) {
      out.status = QuadStatus::NotConverged;
      out.diagnostic = "non-finite integrand value";
      return out;
    }
    if (error <= std::max(opts.abs_tol, opts.rel_tol * std::abs(value))) return out;
    if (static_cast<int>(panels.size()) >= opts.max_subdivisions) {
      out.status = QuadStatus::NotConverged;
      out.diagnostic = "maximum subdivisions reached on [" + format_short(a) + ", " +
                       format_short(b) + "]";
      return out;
    }
    auto worst = std::max_element(panels.begin(), panels.end(),
                                  [](const Panel& x, const Panel& y) { return x.error < y.error; });
    const double mid = 0.5 * (worst->a + worst->b);
    if (!(mid > worst->a && mid < worst->b)) {
      out.status = QuadStatus::NotConverged;
      out.diagnostic = "interval collapsed below machine resolution";
      return out;
    }
    Panel left = gk15(f, worst->a, mid);
    Panel right = gk15(f, mid, worst->b);
    out.evaluations += 30;
    *worst = left;
    panels.push_back(right);
  }
}

QuadResult integrate_towards_zero(const ScalarFn& f, double pivot, double floor,
                                  const QuadratureOptions& opts) {
  if (!(pivot > floor)) return {};
  const bool monitored = floor <= 0.0;
  auto shell = [&](int j, double& lo, double& hi) {
    hi = std::ldexp(pivot, -j);
    if (hi <= floor || hi == 0.0) return false;
    lo = std::max(0.5 * hi, floor);
    return true;
  };
  return run_shells(f, shell, monitored, opts, "near-zero");
}

QuadResult integrate_towards_infinity(const ScalarFn& f, double pivot, double ceiling,
                                      const QuadratureOptions& opts) {
  if (!(ceiling > pivot)) return {};
  const bool monitored = std::isinf(ceiling);
  auto shell = [&](int j, double& lo, double& hi) {
    lo = std::ldexp(pivot, j);
    if (lo >= ceiling || std::isinf(lo)) return false;
    hi = std::min(2.0 * lo, ceiling);
    return !std::isinf(hi);
  };
  return run_shells(f, shell, monitored, opts, "tail");
}

QuadResult integrate_radial(const ScalarFn& f, double lo, double hi, const QuadratureOptions& opts) {
  if (!(hi > lo)) return {};
  const double pivot = std::min(std::max(1.0, lo), hi);
  QuadResult out;
  if (pivot > lo) out = integrate_towards_zero(f, pivot, lo, opts);
  if (hi > pivot) out = combine(out, integrate_towards_infinity(f, pivot, hi, opts));
  return out;
}

QuadResult integrate_time(const ScalarFn& f, double a, double b, double tol,
                          const QuadratureOptions& opts) {
  QuadResult out;
  if (!(b > a)) return out;
  auto composite = [&](int panels) {
    const double h = (b - a) / panels;
    double sum = 0.0;
    for (int p = 0; p < panels; ++p) {
      const double c = a + (p + 0.5) * h;
      for (int i = 0; i < 5; ++i) sum += kLegendreWeights[i] * f(c + 0.5 * h * kLegendreNodes[i]);
    }
    out.evaluations += 5L * panels;
    return 0.5 * h * sum;
  };
  double prev = composite(1);
  for (int panels = 2; panels <= 4096 && std::isfinite(prev); panels *= 2) {
    const double cur = composite(panels);
    if (!std::isfinite(cur)) break;
    if (std::abs(cur - prev) <= tol * std::max(std::abs(cur), 1e-300) || cur == prev) {
      out.value = cur;
      out.error = std::abs(cur - prev);
      return out;
    }
    prev = cur;
  }
  // Possible endpoint singularity: examine shells approaching each end.
  const double half = 0.5 * (b - a);
  QuadratureOptions shell_opts = opts;
  shell_opts.rel_tol = std::max(opts.rel_tol, tol);
  QuadResult left = integrate_towards_zero([&](double t) { return f(a + t); }, half, 0.0, shell_opts);
  QuadResult right = integrate_towards_zero([&](double t) { return f(b - t); }, half, 0.0, shell_opts);
  QuadResult res = combine(left, right);
  res.evaluations += out.evaluations;
  return res;
}

QuadResult combine(const QuadResult& x, const QuadResult& y) {
  QuadResult out;
  out.value = x.value + y.value;
  out.error = x.error + y.error;
  out.evaluations = x.evaluations + y.evaluations;
  if (x.status == QuadStatus::Divergent || y.status == QuadStatus::Divergent) {
    out.status = QuadStatus::Divergent;
    if (std::isnan(out.value)) out.value = kInf;
  } else if (x.status == QuadStatus::NotConverged || y.status == QuadStatus::NotConverged) {
    out.status = QuadStatus::NotConverged;
  }
  out.diagnostic = x.diagnostic;
  if (!y.diagnostic.empty()) {
    if (!out.diagnostic.empty()) out.diagnostic += "; ";
    out.diagnostic += y.diagnostic;
  }
  return out;
}

}  // namespace expmart
