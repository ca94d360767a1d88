#include "expmart/triplet.hpp"
#include "expmart/report.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace expmart {
namespace {

void check_truncation_admissible(const LevyMeasure& F, const Truncation& h) {
  if (F.is_zero() || h.kind == TruncationKind::StandardCutoff) return;
  const Region region = h.kind == TruncationKind::Identity ? Region::large() : Region::small();
  const QuadResult r = F.integrate(LevyIntegrand::norm(F.dim()), region);
  if (!r.ok() || !std::isfinite(r.value)) {
    throw std::invalid_argument(std::string("truncation '") + to_string(h.kind) + "' is not admissible for " +
                                F.spec().describe() + ": integral of |x| over " +
                                (h.kind == TruncationKind::Identity ? "{|x|>1}" : "{|x|<=1}") + " = " +
                                (std::isfinite(r.value) ? std::to_string(r.value) : "inf"));
  }
}

// Interior probe times for spot checks; endpoints are left to the PIIAC
// check, which is where singular coefficients belong.
std::vector<double> probe_times(double horizon, const std::vector<double>& breaks) {
  std::vector<double> t;
  const int n = 200;
  for (int i = 0; i < n; ++i) t.push_back(horizon * (i + 0.5) / n);
  for (double b : breaks) {
    t.push_back(b);
    t.push_back(std::nextafter(b, horizon + 1.0));
  }
  return t;
}

}  // namespace

std::vector<double> merge_breaks(const std::vector<std::vector<double>>& lists, double lo, double hi) {
  std::vector<double> out;
  for (const auto& l : lists) {
    for (double b : l) {
      if (b > lo && b < hi) out.push_back(b);
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

CharacteristicTriplet CharacteristicTriplet::create(TripletSpec spec) {
  const int d = spec.dim;
  if (d < 1) throw std::invalid_argument("triplet: dimension must be positive");
  if (!(spec.horizon > 0.0) || !std::isfinite(spec.horizon)) throw std::invalid_argument("triplet: horizon must be positive");
  if (spec.truncation.dim != d) throw std::invalid_argument("triplet: truncation dimension does not match");
  if (spec.levy.dim() != d) throw std::invalid_argument("triplet: Levy measure dimension does not match");

  CharacteristicTriplet tr(std::move(spec));
  const auto& s = tr.spec_;
  for (double t : probe_times(s.horizon, tr.breakpoints())) {
    const Vec b = s.drift(t);
    if (b.size() != d) throw std::invalid_argument("triplet: drift has wrong dimension at t=" + format_short(t));
    const Mat c = s.diffusion(t);
    if (c.rows() != d || c.cols() != d) {
      throw std::invalid_argument("triplet: diffusion has wrong shape at t=" + format_short(t));
    }
    if (c.allFinite()) {
      const double scale = std::max(1.0, c.cwiseAbs().maxCoeff());
      if ((c - c.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
        throw std::invalid_argument("triplet: diffusion matrix is not symmetric at t=" + format_short(t));
      }
      Eigen::SelfAdjointEigenSolver<Mat> eig(c, Eigen::EigenvaluesOnly);
      if (eig.eigenvalues().minCoeff() < -1e-12 * scale) {
        throw std::invalid_argument("triplet: diffusion matrix is not positive semidefinite at t=" + format_short(t));
      }
    }
    const double a = s.activity(t);
    if (a < 0.0 || std::isnan(a)) throw std::invalid_argument("triplet: activity density is negative at t=" + format_short(t));
  }
  for (const auto& F : s.levy.pieces()) check_truncation_admissible(F, s.truncation);
  return tr;
}

CharacteristicTriplet CharacteristicTriplet::homogeneous(Vec b, Mat c, LevyMeasure F, Truncation h, double horizon) {
  TripletSpec s;
  s.dim = static_cast<int>(b.size());
  s.drift = TimeFunction<Vec>::constant(std::move(b));
  s.diffusion = TimeFunction<Mat>::constant(std::move(c));
  s.levy = PiecewiseLevyMeasure(std::move(F));
  s.truncation = h;
  s.truncation.dim = s.dim;
  s.horizon = horizon;
  return create(std::move(s));
}

CharacteristicTriplet CharacteristicTriplet::scalar(double b, double c, LevyMeasure F, Truncation h, double horizon) {
  return homogeneous(Vec::Constant(1, b), Mat::Constant(1, 1, c), std::move(F), h, horizon);
}

std::vector<double> CharacteristicTriplet::breakpoints() const {
  return merge_breaks({spec_.drift.breakpoints(), spec_.diffusion.breakpoints(), spec_.activity.breakpoints(),
                       spec_.levy.breakpoints()},
                      0.0, spec_.horizon);
}

bool CharacteristicTriplet::piecewise_constant() const {
  return spec_.drift.is_piecewise_constant() && spec_.diffusion.is_piecewise_constant() &&
         spec_.activity.is_piecewise_constant();
}

}  // namespace expmart
