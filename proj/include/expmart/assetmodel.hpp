#pragma once

#include <optional>
#include <vector>

#include "expmart/cumulant.hpp"
#include "expmart/report.hpp"
#include "expmart/simulate.hpp"
#include "expmart/triplet.hpp"

namespace expmart {

/// Finite-state Markov regime scaling the volatility of each scenario.
/// Q is the rate matrix; levels are the scale factors.
struct RegimeModulation {
  std::vector<double> levels;
  Mat rates;
  std::size_t initial = 0;
};

struct AssetModelSpec {
  /// Joint driver X = (X^S, X^r) with d = d_asset + d_rate.
  CharacteristicTriplet driver;
  int d_asset = 1;
  StrategyPath sigma_s = StrategyPath::constant(0.0);
  /// Dimension d_rate; a zero-dimensional strategy means B = 1.
  StrategyPath sigma_r = StrategyPath::constant(Vec(0));
  double S0 = 100.0;
  double maturity = 1.0;
  std::optional<RegimeModulation> regime;
};

/// S = S0 exp(sigma^S . X^S - V), B = exp(sigma^r . X^r), with V the
/// exponential compensator of sigma . X for sigma = (sigma^S, -sigma^r).
class AssetModel {
 public:
  static AssetModel create(AssetModelSpec spec);

  const AssetModelSpec& spec() const { return spec_; }
  const CharacteristicTriplet& driver() const { return spec_.driver; }
  /// The stacked strategy (sigma^S, -sigma^r).
  const StrategyPath& sigma() const { return sigma_; }
  /// V on the given grid (unmodulated model). Throws
  /// NotExponentiallySpecialError when sigma . X is not exponentially special.
  CumulantPath compensator(const std::vector<double>& grid) const;

 private:
  AssetModel(AssetModelSpec spec, StrategyPath sigma) : spec_(std::move(spec)), sigma_(std::move(sigma)) {}
  AssetModelSpec spec_;
  StrategyPath sigma_;
};

/// (B1) and (C1) for the stacked strategy; passes if either passes. With a
/// regime, the largest level is used.
ConditionReport check_risk_neutral(const AssetModel& m, const QuadratureOptions& opts = {});

struct Price {
  double price = 0.0;
  double std_error = 0.0;
  std::size_t n_paths = 0;
};

/// Mean of B_T^{-1} (S_T - K)^+.
Price price_call_direct(const AssetModel& m, double K, const PathEnsemble& ens);
/// S0 * mean of S0^{-1} S~_T (1 - K / S_T)^+. Refuses to run unless the
/// risk-neutrality check passes.
Price price_call_numeraire(const AssetModel& m, double K, const PathEnsemble& ens);

/// Per-path (S_T, B_T) on an ensemble of the joint driver.
struct AssetTerminal {
  std::vector<double> S;
  std::vector<double> B;
};
AssetTerminal simulate_terminal(const AssetModel& m, const PathEnsemble& ens);

}  // namespace expmart
