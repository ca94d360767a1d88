#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "expmart/conditions.hpp"
#include "expmart/errors.hpp"
#include "expmart/libor.hpp"

using namespace expmart;

namespace {

constexpr double kBeta = 1.03369180055802049;                 // (0.02 / 1.02)(e - 1) + 1
constexpr double kWeightedHellinger = 2.28791957342713163;     // 2 (1 - sqrt e)^2 e
constexpr double kMertonTailN2 = 4.57678972054098600e-06;      // 2 e^{0.08} Phi^c(4.6)
constexpr double kCapletBlack = 0.00140929944492541569;        // delta L (2 Phi(sqrt(v)/2) - 1), v = 0.02

Vec v1(double x) { return Vec::Constant(1, x); }

CharacteristicTriplet brownian(double T) {
  return CharacteristicTriplet::scalar(0.0, 1.0, LevyMeasure::zero(), Truncation::standard(), T);
}
CharacteristicTriplet merton(double T) {
  return CharacteristicTriplet::scalar(0.0, 1.0, LevyMeasure::create(LevyMeasureSpec::merton(1.0, 0.0, 0.2)),
                                       Truncation::standard(), T);
}

/// vol[k-1] is the constant scalar volatility of rate k on [0, T_k].
LiborModel model(std::vector<double> T, std::vector<double> vol, CharacteristicTriplet driver, double L0 = 0.05,
                 std::vector<std::vector<VolPiece>> pieces = {}) {
  TenorStructure tenor(T);
  if (pieces.empty()) {
    for (std::size_t k = 1; k < T.size() - 1; ++k) {
      pieces.push_back({});
      if (vol[k - 1] != 0.0) pieces.back().push_back({0.0, T[k], v1(vol[k - 1])});
    }
  }
  LiborModelSpec spec{tenor, VolatilitySpec(1, pieces, 1.0), std::vector<double>(T.size() - 1, L0), std::move(driver),
                      std::nullopt};
  return LiborModel::create(std::move(spec));
}

double mean_of(const std::vector<double>& x) { return sample_mean(x).mean; }

}  // namespace

TEST(VolSpec, ZeroVolatilitiesPass) {
  const auto m = model({0, 0.5, 1.0, 1.5}, {0.0, 0.0}, merton(1.5));
  EXPECT_EQ(validate_vol_spec(m.vols(), m.tenor(), m.driver(), 0.01, 1.0).verdict, Verdict::Pass);
}

TEST(VolSpec, NegativeComponentFails) {
  const auto m = model({0, 0.5, 1.0}, {}, merton(1.0), 0.05, {{{0.0, 0.5, v1(-0.1)}}});
  const auto r = validate_vol_spec(m.vols(), m.tenor(), m.driver(), 0.01, 1.0);
  EXPECT_EQ(r.verdict, Verdict::Fail);
  EXPECT_EQ(r.id, ConditionId::L2);
}

TEST(VolSpec, SupportAfterMaturityFails) {
  const auto m = model({0, 0.5, 1.0}, {}, merton(1.0), 0.05, {{{0.0, 0.75, v1(0.2)}}});
  const auto r = validate_vol_spec(m.vols(), m.tenor(), m.driver(), 0.01, 1.0);
  EXPECT_EQ(r.verdict, Verdict::Fail);
  EXPECT_EQ(r.id, ConditionId::L2);
  EXPECT_NE(r.diagnostics.find("support"), std::string::npos);
}

TEST(VolSpec, ExponentialMomentFails) {
  const auto tr = CharacteristicTriplet::scalar(
      0.0, 0.0, LevyMeasure::create({DensityMeasure{[](double x) { return std::exp(-x / 2.0); }, 0.0,
                                                    std::numeric_limits<double>::infinity()}}));
  const auto m = model({0, 0.5, 1.0}, {0.3}, tr);
  const auto r = validate_vol_spec(m.vols(), m.tenor(), m.driver(), 0.01, 1.0);
  EXPECT_EQ(r.verdict, Verdict::Fail);
  EXPECT_EQ(r.id, ConditionId::L1);
}

TEST(Beta, Values) {
  const auto m = model({0, 0.5, 1.0}, {1.0}, merton(1.0));
  const std::vector<double> rates{0.05, 0.04};
  EXPECT_EQ(beta_factor(m, 0.3, v1(0.0), 1, rates), 1.0);
  EXPECT_EQ(beta_factor(m, 0.7, v1(1.0), 1, rates), 1.0);
  EXPECT_NEAR(beta_factor(m, 0.3, v1(1.0), 1, rates), kBeta, 1e-15);
  EXPECT_THROW(beta_factor(m, 0.3, v1(1.0), 1, {0.05, 0.0}), std::invalid_argument);
}

TEST(Beta, BetweenOneAndExponential) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (int i = 0; i < 2000; ++i) {
    const double lam = U(rng), x = 6.0 * U(rng) - 3.0, L = 0.001 + 0.2 * U(rng);
    const auto m = model({0, 0.5, 1.0}, {lam}, merton(1.0));
    const double b = beta_factor(m, 0.25, v1(x), 1, {0.05, L});
    const double e = std::exp(lam * x);
    EXPECT_GT(b, 0.0);
    EXPECT_LE(b, std::max(1.0, e) * (1.0 + 1e-15));
    EXPECT_GE(b, std::min(1.0, e) * (1.0 - 1e-15));
  }
}

TEST(ForwardCharacteristics, LastRateIsTerminal) {
  const auto m = model({0, 0.5, 1.0, 1.5}, {0.3, 0.3}, merton(1.5));
  const auto f = forward_characteristics(m, 2, 0.2, {0.05, 0.05, 0.05});
  EXPECT_EQ(f.b(0.2), m.driver().b(0.2));
  EXPECT_EQ(f.c(0.2), m.driver().c(0.2));
  EXPECT_EQ(f.F(0.2).integrate(LevyIntegrand::exp(v1(0.7))).value,
            m.driver().F(0.2).integrate(LevyIntegrand::exp(v1(0.7))).value);
}

TEST(ForwardCharacteristics, ZeroVolatilityIsTerminal) {
  const auto m = model({0, 0.5, 1.0, 1.5}, {0.0, 0.0}, merton(1.5));
  const auto f = forward_characteristics(m, 1, 0.2, {0.05, 0.05, 0.05});
  EXPECT_EQ(f.b(0.2), m.driver().b(0.2));
  EXPECT_EQ(f.F(0.2).integrate(LevyIntegrand::one(1)).value, m.driver().F(0.2).integrate(LevyIntegrand::one(1)).value);
}

TEST(ForwardCharacteristics, PointMassRate) {
  const double eta = 1.5;
  const auto tr = CharacteristicTriplet::scalar(0.0, 0.0, LevyMeasure::create(LevyMeasureSpec::point_mass(1.0, eta)),
                                                Truncation::standard(), 1.5);
  const auto m = model({0, 0.5, 1.0, 1.5}, {0.0, 1.0}, tr);
  const auto f = forward_characteristics(m, 1, 0.3, {0.05, 0.05, 0.04});
  EXPECT_NEAR(f.F(0.3).integrate(LevyIntegrand::one(1)).value, kBeta * eta, 1e-12);
  // drift picks up h(1) (beta - 1) eta
  EXPECT_NEAR(f.b(0.3)[0], (kBeta - 1.0) * eta, 1e-12);
}

TEST(ForwardCharacteristics, BackwardInductionConsistency) {
  const auto m = model({0, 0.5, 1.0, 1.5, 2.0}, {0.2, 0.3, 0.4}, merton(2.0));
  const std::vector<double> rates{0.05, 0.03, 0.06, 0.045};
  for (double x = -3.0; x <= 3.0; x += 0.125) {
    for (double t : {0.1, 0.7, 1.2}) {
      for (int k = 1; k <= 2; ++k) {
        const double wk = forward_weight(m, k, t, v1(x), rates);
        const double wk1 = forward_weight(m, k + 1, t, v1(x), rates) * beta_factor(m, t, v1(x), k + 1, rates);
        EXPECT_GE(wk, 0.0);
        EXPECT_NEAR(wk, wk1, 1e-15 * wk);
      }
    }
  }
}

TEST(SL, ZeroVolatility) {
  const auto r = check_SL(model({0, 0.5, 1.0, 1.5}, {0.0, 0.0}, merton(1.5)));
  EXPECT_EQ(r.verdict, Verdict::Pass);
  EXPECT_EQ(r.value, 0.0);
}

TEST(SL, LastTermIsHellinger) {
  const auto m = model({0, 0.5, 1.0, 1.5}, {0.3, 0.3}, merton(1.5));
  const auto r = check_SL(m);
  ASSERT_EQ(r.partials.size(), 2u);
  EXPECT_EQ(r.partials[1].second, hellinger_integral(m.driver(), m.vols().strategy(2), 1.5));
}

TEST(SL, PointMassWeightedTerm) {
  const auto tr = CharacteristicTriplet::scalar(0.0, 0.0, LevyMeasure::create(LevyMeasureSpec::point_mass(1.0, 2.0)),
                                                Truncation::standard(), 3.0);
  std::vector<std::vector<VolPiece>> pieces = {{{0.0, 1.0, v1(1.0)}}, {{0.0, 1.0, v1(1.0)}}};
  const auto m = model({0, 1, 2, 3}, {}, tr, 0.05, pieces);
  const auto r = check_SL(m);
  EXPECT_EQ(r.verdict, Verdict::Pass);
  EXPECT_NEAR(r.partials[0].second, kWeightedHellinger, 1e-13);
}

TEST(LevyLiborBound, CompactSupport) {
  const auto tr = CharacteristicTriplet::scalar(0.0, 1.0, LevyMeasure::create(LevyMeasureSpec::uniform_jumps(2.0, -1.0, 1.0)),
                                                Truncation::standard(), 1.0);
  const auto r = check_levy_libor_bound(model({0, 0.5, 1.0}, {0.3}, tr), 1.0);
  EXPECT_EQ(r.verdict, Verdict::Pass);
  EXPECT_EQ(r.value, 0.0);
}

TEST(LevyLiborBound, MertonGaussianTail) {
  const auto m = model({0, 0.5, 1.0}, {0.3}, merton(1.0));
  const auto r = check_levy_libor_bound(m, 2.0);
  EXPECT_EQ(r.verdict, Verdict::Pass);
  EXPECT_LE(std::abs(r.value - kMertonTailN2) / kMertonTailN2, 1e-8);
  EXPECT_THROW(check_levy_libor_bound(m, 0.1), std::invalid_argument);
}

TEST(LevyLiborBound, DivergentTail) {
  const auto tr = CharacteristicTriplet::scalar(
      0.0, 0.0, LevyMeasure::create({DensityMeasure{[](double x) { return std::exp(-x / 2.0); }, 0.0,
                                                    std::numeric_limits<double>::infinity()}}));
  const auto r = check_levy_libor_bound(model({0, 0.5, 1.0}, {0.3}, tr), 1.0);
  EXPECT_EQ(r.verdict, Verdict::Fail);
}

TEST(BackwardConstruct, ZeroVolatilityFreezesRates) {
  const auto m = model({0, 0.5, 1.0, 1.5}, {0.0, 0.0}, merton(1.5));
  const auto ens = simulate_piiac(m.driver(), libor_grid(m, 12), 200, 1);
  const auto paths = backward_construct(m, ens);
  for (double v : paths.rates) EXPECT_EQ(v, 0.05);
  for (int k = 1; k <= 2; ++k) {
    for (double w : density_process(k, 1.0, paths)) EXPECT_EQ(w, 1.0);
    const auto t = mc_forward_martingale_test(m, paths, k);
    EXPECT_EQ(t.estimate, 0.05);
    EXPECT_EQ(t.z, 0.0);
  }
  for (double K : {0.0, 0.03, 0.07}) {
    EXPECT_EQ(price_caplet(m, paths, 1, K).price, 0.5 * std::max(0.05 - K, 0.0));
  }
}

TEST(BackwardConstruct, SingleRateIsExponentialMartingale) {
  const auto m = model({0, 0.5, 1.0}, {0.4}, merton(1.0));
  const auto grid = libor_grid(m, 16);
  const auto ens = simulate_piiac(m.driver(), grid, 300, 2);
  const auto paths = backward_construct(m, ens, {0.25, 0.5});
  const auto s = m.vols().strategy(1);
  const auto M = exponential_martingale_paths(ens, s, cumulant_process(m.driver(), s, {0.0, 0.25, 0.5}));
  for (std::size_t p = 0; p < 300; ++p) {
    EXPECT_NEAR(paths.L(p, 0, 1), 0.05 * M.at(p, 1), 1e-12 * paths.L(p, 0, 1));
    EXPECT_NEAR(paths.L(p, 1, 1), 0.05 * M.at(p, 2), 1e-12 * paths.L(p, 1, 1));
  }
}

TEST(BackwardConstruct, LastRateFlatTerminalMean) {
  const auto m = model({0, 0.5, 1.0, 1.5}, {0.3, 0.3}, merton(1.5));
  const auto ens = simulate_piiac(m.driver(), libor_grid(m, 96), 40000, 3);
  const auto paths = backward_construct(m, ens, {0.25, 0.5, 0.75, 1.0});
  for (std::size_t o = 0; o < 4; ++o) {
    std::vector<double> x(paths.n_paths);
    for (std::size_t p = 0; p < x.size(); ++p) x[p] = paths.L(p, o, 2);
    const auto r = mean_test("L", x, 0.05);
    EXPECT_LE(std::abs(r.z), 3.0) << "obs " << o;
  }
}

TEST(BackwardConstruct, RefusesWithoutSL) {
  const auto tr = CharacteristicTriplet::scalar(
      0.0, 0.0, LevyMeasure::create({DensityMeasure{[](double x) { return std::exp(-x / 2.0); }, 0.0,
                                                    std::numeric_limits<double>::infinity()}}),
      Truncation::standard(), 1.0);
  const auto m = model({0, 0.5, 1.0}, {1.0}, tr);
  EXPECT_EQ(check_SL(m).verdict, Verdict::Fail);
  const auto ens = simulate_piiac(tr, libor_grid(m, 8), 100, 1);
  EXPECT_THROW(backward_construct(m, ens), ConditionNotMetError);
}

TEST(DensityProcess, AveragesOne) {
  const auto m = model({0, 0.5, 1.0, 1.5}, {0.3, 0.3}, merton(1.5));
  const auto ens = simulate_piiac(m.driver(), libor_grid(m, 96), 40000, 4);
  const auto paths = backward_construct(m, ens, {0.0, 0.25, 0.5, 1.0});
  for (double w : density_process(1, 0.0, paths)) EXPECT_EQ(w, 1.0);
  for (double w : density_process(2, 0.5, paths)) EXPECT_EQ(w, 1.0);
  for (double t : {0.25, 0.5, 1.0}) {
    const auto r = mean_test("D", density_process(1, t, paths), 1.0);
    EXPECT_LE(std::abs(r.z), 3.0) << t;
  }
}

TEST(ForwardMartingale, BrownianSingleRate) {
  const auto m = model({0, 0.5, 1.0}, {0.25}, brownian(1.0));
  const auto paths = backward_construct(m, simulate_piiac(m.driver(), libor_grid(m, 8), 50000, 5));
  EXPECT_EQ(mc_forward_martingale_test(m, paths, 1).verdict, Verdict::Pass);
}

TEST(ForwardMartingale, MertonThreeRates) {
  const auto m = model({0, 0.5, 1.0, 1.5}, {0.3, 0.3}, merton(1.5));
  const auto paths = backward_construct(m, simulate_piiac(m.driver(), libor_grid(m, 64), 100000, 6));
  for (int k = 1; k <= 2; ++k) {
    const auto r = mc_forward_martingale_test(m, paths, k);
    EXPECT_LE(std::abs(r.z), 3.0) << k;
  }
}

TEST(Caplet, ZeroStrike) {
  const auto m = model({0, 0.5, 1.0, 1.5}, {0.3, 0.3}, merton(1.5));
  const auto paths = backward_construct(m, simulate_piiac(m.driver(), libor_grid(m, 48), 50000, 7));
  const auto p = price_caplet(m, paths, 1, 0.0);
  EXPECT_LE(std::abs(p.price - 0.5 * 0.05), 3.0 * p.std_error);
}

TEST(Caplet, BlackFormula) {
  const auto m = model({0, 0.5, 1.0, 1.5}, {0.2, 0.2}, brownian(1.5));
  const auto paths = backward_construct(m, simulate_piiac(m.driver(), libor_grid(m, 48), 100000, 8));
  const auto p = price_caplet(m, paths, 1, 0.05);
  EXPECT_LE(std::abs(p.price - kCapletBlack), 3.0 * p.std_error);
}

TEST(Modulator, WorstLevelBoundsSL) {
  auto spec = model({0, 0.5, 1.0, 1.5}, {0.3, 0.3}, merton(1.5)).spec();
  const double base = check_SL(LiborModel::create(spec)).value;
  spec.modulator = VolModulator{{0.5, 1.5}, {0.5, 0.5}};
  const auto mm = LiborModel::create(spec);
  EXPECT_GT(check_SL(mm).value, base);
  const auto paths = backward_construct(mm, simulate_piiac(mm.driver(), libor_grid(mm, 48), 50000, 9));
  for (int k = 1; k <= 2; ++k) EXPECT_LE(std::abs(mc_forward_martingale_test(mm, paths, k).z), 3.0) << k;
}
