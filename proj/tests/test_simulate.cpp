#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "expmart/errors.hpp"
#include "expmart/rng.hpp"
#include "expmart/simulate.hpp"

using namespace expmart;

namespace {

Vec v1(double x) { return Vec::Constant(1, x); }

CharacteristicTriplet brownian(double T = 1.0) {
  return CharacteristicTriplet::scalar(0.0, 1.0, LevyMeasure::zero(), Truncation::standard(), T);
}
CharacteristicTriplet merton() {
  return CharacteristicTriplet::scalar(0.0, 1.0, LevyMeasure::create(LevyMeasureSpec::merton(1.0, 0.0, 0.2)));
}

std::vector<double> terminal(const PathEnsemble& ens) {
  std::vector<double> out;
  for (const auto& v : ens.terminal_values()) out.push_back(v[0]);
  return out;
}

struct Moments {
  double mean, var, se_mean, se_var;
};

Moments moments(const std::vector<double>& x) {
  const double n = static_cast<double>(x.size());
  double m = 0.0;
  for (double v : x) m += v;
  m /= n;
  double m2 = 0.0, m4 = 0.0;
  for (double v : x) {
    const double d = (v - m) * (v - m);
    m2 += d;
    m4 += d * d;
  }
  m2 /= n;
  m4 /= n;
  return {m, m2, std::sqrt(m2 / n), std::sqrt((m4 - m2 * m2) / n)};
}

}  // namespace

TEST(Philox, KnownAnswers) {
  const auto a = philox4x32({0, 0, 0, 0}, {0, 0});
  EXPECT_EQ(a, (std::array<std::uint32_t, 4>{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8}));
  const auto b = philox4x32({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff});
  EXPECT_EQ(b, (std::array<std::uint32_t, 4>{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd}));
}

TEST(PathRng, StreamsAreIndependentOfOrder) {
  PathRng a(5, 17), b(5, 17), c(5, 18), d(5, 17, 1);
  const double x = a.uniform();
  EXPECT_EQ(x, b.uniform());
  EXPECT_NE(x, c.uniform());
  EXPECT_NE(x, d.uniform());
}

TEST(Simulate, BrownianStepVariance) {
  const std::size_t n = 40000;
  const auto grid = TimeGrid::uniform(1.0, 8);
  const auto ens = simulate_piiac(brownian(), grid, n, 3);
  EXPECT_EQ(ens.scheme().kind, SchemeKind::Gaussian);
  std::vector<std::vector<double>> steps(8);
  std::vector<double> buf;
  for (std::size_t p = 0; p < n; ++p) {
    ens.increments(p, buf);
    for (std::size_t j = 0; j < 8; ++j) steps[j].push_back(buf[j]);
  }
  for (const auto& s : steps) EXPECT_LE(std::abs(moments(s).var / 0.125 - 1.0), 4.0 / std::sqrt(double(n)));
}

TEST(Simulate, PoissonJumpCount) {
  const std::size_t n = 20000;
  const auto tr = CharacteristicTriplet::scalar(0.0, 0.0, LevyMeasure::create(LevyMeasureSpec::point_mass(1.0, 2.0)));
  const auto ens = simulate_piiac(tr, TimeGrid::uniform(1.0, 10), n, 4);
  std::vector<double> buf;
  std::vector<JumpRecord> jumps;
  double total = 0.0;
  for (std::size_t p = 0; p < n; ++p) {
    jumps.clear();
    ens.increments(p, buf, &jumps);
    total += static_cast<double>(jumps.size());
    for (const auto& j : jumps) EXPECT_EQ(j.size[0], 1.0);
  }
  EXPECT_LE(std::abs(total - 2.0 * n), 3.0 * std::sqrt(2.0 * n));
}

TEST(Simulate, DeterministicLine) {
  const auto tr = CharacteristicTriplet::scalar(0.7, 0.0, LevyMeasure::zero());
  const auto ens = simulate_piiac(tr, TimeGrid::uniform(1.0, 4), 100, 9);
  std::vector<double> buf;
  for (std::size_t p = 0; p < 100; ++p) {
    ens.increments(p, buf);
    for (double x : buf) EXPECT_NEAR(x, 0.175, 1e-15);
  }
}

TEST(Simulate, MomentMatching) {
  // finite activity (exact) and infinite activity (small-jump scheme)
  const std::vector<CharacteristicTriplet> drivers = {
      CharacteristicTriplet::scalar(0.3, 0.4, LevyMeasure::create(LevyMeasureSpec::merton(2.0, 0.5, 0.4))),
      CharacteristicTriplet::scalar(-0.1, 0.0, LevyMeasure::create({TemperedStable{1.0, 1.5, 3.0, 4.0, 0.6}})),
  };
  for (const auto& tr : drivers) {
    const auto& F = tr.F(0.0);
    const double mean = tr.b(0.0)[0] + integrate_levy(F, LevyIntegrand::coordinate(1, 0)) -
                        integrate_levy(F, LevyIntegrand::coordinate(1, 0), Region::small());
    const double var = tr.c(0.0)(0, 0) + integrate_levy(F, LevyIntegrand::coordinate_square(1, 0));
    const auto ens = simulate_piiac(tr, TimeGrid::uniform(1.0, 16), 100000, 21);
    const auto m = moments(terminal(ens));
    EXPECT_LE(std::abs(m.mean - mean), 4.0 * m.se_mean) << F.spec().describe();
    EXPECT_LE(std::abs(m.var - var), 4.0 * m.se_var) << F.spec().describe();
  }
}

TEST(Simulate, SeedDeterminismAcrossThreads) {
  const auto tr = CharacteristicTriplet::scalar(0.0, 0.5, LevyMeasure::create({TemperedStable{1.0, 1.0, 3.0, 3.0, 0.5}}));
  const auto grid = TimeGrid::uniform(1.0, 32);
  SimulationOptions one, many;
  many.threads = 4;
  const auto a = simulate_piiac(tr, grid, 3000, 77, one);
  const auto b = simulate_piiac(tr, grid, 3000, 77, many);
  EXPECT_EQ(terminal(a), terminal(b));
  std::ostringstream sa, sb;
  write_ensemble_csv(sa, a, 50);
  write_ensemble_csv(sb, b, 50);
  EXPECT_EQ(sa.str(), sb.str());
  EXPECT_NE(terminal(a), terminal(simulate_piiac(tr, grid, 3000, 78, one)));
}

TEST(Simulate, CoarseningSumsFineIncrements) {
  const auto ens = simulate_piiac(merton(), TimeGrid::uniform(1.0, 8), 200, 5);
  const auto coarse = ens.coarsen(4);
  ASSERT_EQ(coarse.steps(), 2u);
  std::vector<double> f, c;
  for (std::size_t p = 0; p < 200; ++p) {
    ens.increments(p, f);
    coarse.increments(p, c);
    EXPECT_EQ(c[0], f[0] + f[1] + f[2] + f[3]);
  }
  const auto irregular = ens.restrict_to(TimeGrid::from_nodes({0.0, 0.375, 1.0}));
  irregular.increments(7, c);
  ens.increments(7, f);
  EXPECT_EQ(c[0], f[0] + f[1] + f[2]);
  EXPECT_THROW(ens.restrict_to(TimeGrid::from_nodes({0.0, 0.3, 1.0})), std::invalid_argument);
}

TEST(Simulate, JumpRateCeiling) {
  SimulationOptions opts;
  opts.max_jump_rate = 10.0;
  const auto tr = CharacteristicTriplet::scalar(0.0, 0.0, LevyMeasure::create(LevyMeasureSpec::point_mass(1.0, 50.0)));
  EXPECT_THROW(simulate_piiac(tr, TimeGrid::uniform(1.0, 4), 100, 1, opts), std::runtime_error);
}

TEST(MartingalePaths, ZeroStrategyIsOne) {
  const auto ens = simulate_piiac(merton(), TimeGrid::uniform(1.0, 4), 200, 5);
  const auto s = StrategyPath::constant(0.0);
  const auto M = exponential_martingale_paths(ens, s, cumulant_process(merton(), s, ens.grid().nodes));
  for (double v : M.values) EXPECT_EQ(v, 1.0);
  const auto r = mc_martingale_test(M, 1.0);
  EXPECT_EQ(r.estimate, 1.0);
  EXPECT_EQ(r.std_error, 0.0);
  EXPECT_EQ(r.z, 0.0);
  EXPECT_EQ(r.verdict, Verdict::Pass);
}

TEST(MartingalePaths, BrownianClosedForm) {
  const auto ens = simulate_piiac(brownian(), TimeGrid::uniform(1.0, 16), 500, 8);
  const auto s = StrategyPath::constant(1.0);
  const auto M = exponential_martingale_paths(ens, s, cumulant_process(brownian(), s, ens.grid().nodes));
  const auto W = terminal(ens);
  for (std::size_t p = 0; p < 500; ++p) EXPECT_NEAR(M.at(p, 16), std::exp(W[p] - 0.5), 1e-12 * std::exp(W[p]));
}

TEST(MartingalePaths, MertonMeanOne) {
  const auto grid = TimeGrid::uniform(1.0, 64);
  const auto ens = simulate_piiac(merton(), grid, 100000, 2024);
  const auto s = StrategyPath::constant(1.0);
  const auto M = exponential_martingale_paths(ens, s, cumulant_process(merton(), s, grid.nodes));
  const auto r = mc_martingale_test(M, 1.0);
  EXPECT_LE(std::abs(r.z), 3.0) << r.estimate << " +- " << r.std_error;
}

TEST(MartingalePaths, PositiveAndSupermartingale) {
  const auto tr = CharacteristicTriplet::scalar(
      0.0, 0.2, LevyMeasure::create({DensityMeasure{[](double x) { return std::exp(-x / 2.0); }, 0.0,
                                                    std::numeric_limits<double>::infinity()}}));
  const auto grid = TimeGrid::uniform(1.0, 16);
  const auto ens = simulate_piiac(tr, grid, 20000, 31);
  const auto s = StrategyPath::constant(0.3);
  const auto M = exponential_martingale_paths(ens, s, cumulant_process(tr, s, grid.nodes));
  for (double v : M.values) ASSERT_GT(v, 0.0);
  const auto r = mc_martingale_test(M, 1.0);
  EXPECT_LE(r.estimate, 1.0 + 3.0 * r.std_error);
}

TEST(MeanTest, RefusesSmallSamples) {
  EXPECT_THROW(mean_test("x", std::vector<double>(99, 1.0), 1.0), std::invalid_argument);
  const auto r = mean_test("x", std::vector<double>(100, 1.0), 1.0);
  EXPECT_EQ(r.verdict, Verdict::Pass);
}

TEST(Simulate, PiiacGate) {
  TripletSpec spec;
  spec.drift = TimeFunction<Vec>::constant(v1(0.0));
  spec.diffusion = TimeFunction<Mat>::callable([](double t) { return Mat::Constant(1, 1, 1.0 / (1.0 - t)); });
  const auto tr = CharacteristicTriplet::create(spec);
  EXPECT_THROW(simulate_piiac(tr, TimeGrid::uniform(1.0, 4), 100, 1), ConditionNotMetError);
}
