#pragma once

#include <optional>
#include <vector>

#include "expmart/assetmodel.hpp"
#include "expmart/cumulant.hpp"
#include "expmart/report.hpp"
#include "expmart/simulate.hpp"
#include "expmart/triplet.hpp"

namespace expmart {

/// Maturities 0 = T_0 < T_1 < ... < T_n = T*.
class TenorStructure {
 public:
  explicit TenorStructure(std::vector<double> maturities);

  int n() const { return static_cast<int>(T_.size()) - 1; }
  double T(int k) const { return T_[static_cast<std::size_t>(k)]; }
  double delta(int k) const { return T(k + 1) - T(k); }
  double terminal() const { return T_.back(); }
  const std::vector<double>& maturities() const { return T_; }

 private:
  std::vector<double> T_;
};

/// lambda(t, T_k) = value on (t0, t1]; t0 = 0 also covers t = 0.
struct VolPiece {
  double t0;
  double t1;
  Vec value;
};

/// Piecewise-constant volatilities for k = 1..n-1.
class VolatilitySpec {
 public:
  VolatilitySpec(int dim, std::vector<std::vector<VolPiece>> pieces, double bound);

  int dim() const { return dim_; }
  /// Number of rates n - 1.
  int rates() const { return static_cast<int>(pieces_.size()); }
  double bound() const { return bound_; }
  const std::vector<VolPiece>& pieces(int k) const { return pieces_[static_cast<std::size_t>(k - 1)]; }
  Vec at(int k, double t) const;
  /// lambda(., T_k) as a strategy, optionally scaled.
  StrategyPath strategy(int k, double scale = 1.0) const;
  std::vector<double> breakpoints() const;
  /// max over t and coordinates of sum_k lambda^j(t, T_k).
  double coordinate_sum_max() const;
  /// max over t of sum_k |lambda(t, T_k)|.
  double norm_sum_max() const;

 private:
  int dim_;
  std::vector<std::vector<VolPiece>> pieces_;
  double bound_;
};

/// Per-scenario scale of every volatility: levels[i] with probability probs[i].
struct VolModulator {
  std::vector<double> levels;
  std::vector<double> probs;
};

struct LiborModelSpec {
  TenorStructure tenor{{0.0, 1.0}};
  VolatilitySpec vols{1, {}, 1.0};
  /// L(0, T_0), ..., L(0, T_{n-1}).
  std::vector<double> initial;
  /// Terminal-measure driver.
  CharacteristicTriplet driver;
  std::optional<VolModulator> modulator;
};

class LiborModel {
 public:
  static LiborModel create(LiborModelSpec spec);

  const LiborModelSpec& spec() const { return spec_; }
  const TenorStructure& tenor() const { return spec_.tenor; }
  const VolatilitySpec& vols() const { return spec_.vols; }
  const CharacteristicTriplet& driver() const { return spec_.driver; }
  int n() const { return spec_.tenor.n(); }
  double initial(int k) const { return spec_.initial[static_cast<std::size_t>(k)]; }
  double max_level() const;

 private:
  explicit LiborModel(LiborModelSpec spec) : spec_(std::move(spec)) {}
  LiborModelSpec spec_;
};

/// (L2) structurally and (L1) at the corners u in {+-(1+eps)M}^d.
ConditionReport validate_vol_spec(const VolatilitySpec& v, const TenorStructure& tenor,
                                  const CharacteristicTriplet& driver, double eps, double M,
                                  const QuadratureOptions& opts = {});

/// l (e^{<lambda(t,T_l), x>} - 1) + 1 with l = delta L / (1 + delta L);
/// rates holds L(t-, T_k) indexed by k.
double beta_factor(const LiborModel& m, double t, const Vec& x, int l, const std::vector<double>& rates);

/// prod_{l=k+1}^{n-1} beta(t, x, T_l).
double forward_weight(const LiborModel& m, int k, double t, const Vec& x, const std::vector<double>& rates);

/// Instantaneous characteristics of X under P_{T_{k+1}} at time t.
CharacteristicTriplet forward_characteristics(const LiborModel& m, int k, double t, const std::vector<double>& rates);

/// max over i of the (SL) integral; partials per i.
ConditionReport check_SL(const LiborModel& m, const QuadratureOptions& opts = {});

/// int_0^{T*} int_{|x|>1} e^{N|x|} F(dx) dA; N must dominate sum_k |lambda(., T_k)|.
ConditionReport check_levy_libor_bound(const LiborModel& m, double N, const QuadratureOptions& opts = {});

struct LiborPaths {
  /// Observation times (grid nodes).
  std::vector<double> times;
  std::size_t n_paths = 0;
  int n = 0;
  /// rates[(path * times.size() + obs) * n + k] = L(times[obs], T_k), k = 0..n-1.
  std::vector<double> rates;
  std::vector<double> initial;
  std::vector<double> delta;
  std::size_t steps = 0;

  double L(std::size_t path, std::size_t obs, int k) const {
    return rates[(path * times.size() + obs) * static_cast<std::size_t>(n) + static_cast<std::size_t>(k)];
  }
  std::size_t obs_index(double t) const;
};

/// Uniform grid on [0, T*] with the tenor dates and volatility breakpoints
/// added as nodes. Grids for m and 2m steps are nested.
TimeGrid libor_grid(const LiborModel& m, std::size_t steps);

/// Log-Euler backward construction with coefficients frozen at each step's
/// left endpoint. Observes the rates at the tenor dates unless obs is given.
LiborPaths backward_construct(const LiborModel& m, const PathEnsemble& ens, std::vector<double> obs = {});

/// prod_{i=k+1}^{n-1} (1 + delta_i L(t,T_i)) / (1 + delta_i L(0,T_i)) per path.
std::vector<double> density_process(int k, double t, const LiborPaths& paths);

/// E[L(T_k,T_k) density(k, T_k)] against L(0, T_k).
TestReport mc_forward_martingale_test(const LiborModel& m, const LiborPaths& paths, int k);

/// E[delta_k (L(T_k,T_k) - K)^+ density(k, T_k)], in units of the T_{k+1} bond.
Price price_caplet(const LiborModel& m, const LiborPaths& paths, int k, double strike);

}  // namespace expmart
