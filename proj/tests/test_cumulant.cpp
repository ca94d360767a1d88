#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "expmart/characteristics.hpp"
#include "expmart/cumulant.hpp"
#include "expmart/errors.hpp"

using namespace expmart;

namespace {

constexpr double kPointMassCumulant = 1.43656365691809047;  // 2 (e - 1 - 1)
constexpr double kMertonIdentity = 0.0202013400267558106;   // e^{0.02} - 1

Vec v1(double x) { return Vec::Constant(1, x); }

double kappa(const CharacteristicTriplet& tr, double l, double t = 0.5) {
  return laplace_cumulant(tr, v1(l), t).total();
}

LevyMeasure exp_tail() {
  return LevyMeasure::create({DensityMeasure{[](double x) { return std::exp(-x / 2.0); }, 0.0,
                                             std::numeric_limits<double>::infinity()}});
}

std::vector<CharacteristicTriplet> panel() {
  return {
      CharacteristicTriplet::scalar(0.1, 1.0, LevyMeasure::zero()),
      CharacteristicTriplet::scalar(-0.2, 0.3, LevyMeasure::create(LevyMeasureSpec::merton(1.0, 0.1, 0.3))),
      CharacteristicTriplet::scalar(0.0, 0.0, LevyMeasure::create(LevyMeasureSpec::point_mass(1.0, 2.0))),
      CharacteristicTriplet::scalar(0.05, 0.2, LevyMeasure::create(LevyMeasureSpec::kou(1.0, 0.4, 6.0, 5.0)),
                                    Truncation::identity()),
      CharacteristicTriplet::scalar(0.0, 0.1, LevyMeasure::create({TemperedStable{0.5, 0.5, 6.0, 6.0, 0.5}})),
  };
}

}  // namespace

TEST(LaplaceCumulant, PureDiffusion) {
  EXPECT_DOUBLE_EQ(kappa(CharacteristicTriplet::scalar(0.0, 1.0, LevyMeasure::zero()), 1.0), 0.5);
}

TEST(LaplaceCumulant, ZeroAtOrigin) {
  for (const auto& tr : panel()) EXPECT_EQ(kappa(tr, 0.0), 0.0);
}

TEST(LaplaceCumulant, PointMassStandardTruncation) {
  const auto tr = CharacteristicTriplet::scalar(0.0, 0.0, LevyMeasure::create(LevyMeasureSpec::point_mass(1.0, 2.0)));
  EXPECT_NEAR(kappa(tr, 1.0), kPointMassCumulant, 1e-14);
}

TEST(LaplaceCumulant, MertonIdentityTruncation) {
  const auto tr = CharacteristicTriplet::scalar(0.0, 0.0, LevyMeasure::create(LevyMeasureSpec::merton(1.0, 0.0, 0.2)),
                                                Truncation::identity());
  EXPECT_LE(std::abs(kappa(tr, 1.0) - kMertonIdentity) / kMertonIdentity, 1e-12);
}

TEST(LaplaceCumulant, DivergentTailThrows) {
  const auto tr = CharacteristicTriplet::scalar(0.0, 0.0, exp_tail());
  EXPECT_THROW(kappa(tr, 1.0), NotExponentiallySpecialError);
  EXPECT_NO_THROW(kappa(tr, 0.4));
}

TEST(LaplaceCumulant, MidpointConvexity) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> U(-2.5, 2.5);
  for (const auto& tr : panel()) {
    for (int i = 0; i < 50; ++i) {
      const double a = U(rng), b = U(rng);
      const double lhs = kappa(tr, 0.5 * (a + b));
      const double rhs = 0.5 * kappa(tr, a) + 0.5 * kappa(tr, b);
      EXPECT_LE(lhs, rhs + 1e-12 * std::max(1.0, std::abs(rhs))) << a << " " << b;
    }
  }
}

TEST(LaplaceCumulant, AdditiveInLevyMeasure) {
  const auto both = LevyMeasure::create(LevyMeasureSpec::kou(2.0, 0.3, 4.0, 5.0));
  const auto up = LevyMeasure::create(LevyMeasureSpec::kou(0.6, 1.0, 4.0, 5.0));
  const auto down = LevyMeasure::create(LevyMeasureSpec::kou(1.4, 0.0, 4.0, 5.0));
  PointMasses a{1, {{v1(0.5), 1.0}, {v1(-1.5), 0.25}}};
  PointMasses b{1, {{v1(2.0), 0.5}}};
  PointMasses ab = a;
  ab.atoms.push_back(b.atoms[0]);
  for (double l : {-2.0, -0.5, 0.7, 1.0, 2.5}) {
    const auto j = [&](const LevyMeasure& F) { return laplace_cumulant(CharacteristicTriplet::scalar(0, 0, F), v1(l), 0.0).jump; };
    const double sum1 = j(up) + j(down);
    EXPECT_LE(std::abs(j(both) - sum1), 1e-12 * std::abs(sum1)) << l;
    const double sum2 = j(LevyMeasure::create({a})) + j(LevyMeasure::create({b}));
    EXPECT_LE(std::abs(j(LevyMeasure::create({ab})) - sum2), 1e-12 * std::abs(sum2)) << l;
  }
}

TEST(CumulantProcess, LinearInTime) {
  const auto tr = CharacteristicTriplet::scalar(0.0, 1.0, LevyMeasure::zero(), Truncation::standard(), 2.0);
  const auto K = cumulant_process(tr, StrategyPath::constant(1.0), {0.0, 1.0, 2.0});
  EXPECT_DOUBLE_EQ(K.terminal(), 1.0);
  EXPECT_DOUBLE_EQ(K.at(1.0), 0.5);
}

TEST(CumulantProcess, ZeroStrategy) {
  for (const auto& tr : panel()) {
    const auto K = cumulant_process(tr, StrategyPath::constant(0.0), {0.0, 0.5, 1.0});
    for (double v : K.values) EXPECT_EQ(v, 0.0);
  }
}

TEST(CumulantProcess, PiecewiseStrategy) {
  const auto tr = CharacteristicTriplet::scalar(0.0, 1.0, LevyMeasure::zero(), Truncation::standard(), 2.0);
  const auto s = StrategyPath::piecewise({1.0}, {v1(1.0), v1(2.0)});
  EXPECT_DOUBLE_EQ(cumulant_process(tr, s, {0.0, 2.0}).terminal(), 2.5);
}

TEST(CumulantProcess, CallableStrategyMatchesPiecewise) {
  const auto tr = CharacteristicTriplet::scalar(0.1, 0.5, LevyMeasure::create(LevyMeasureSpec::merton(1.0, 0.0, 0.2)),
                                                Truncation::standard(), 2.0);
  const auto pw = StrategyPath::piecewise({1.0}, {v1(0.5), v1(-1.0)});
  const auto fn = StrategyPath::callable(1, [](double t) { return v1(t <= 1.0 ? 0.5 : -1.0); }, 1.0, 2.0, {1.0});
  const double a = cumulant_process(tr, pw, {0.0, 2.0}).terminal();
  const double b = cumulant_process(tr, fn, {0.0, 2.0}).terminal();
  EXPECT_NEAR(a, b, 1e-9 * std::abs(a));
}

TEST(CumulantProcess, InvariantUnderRetruncation) {
  const std::vector<LevyMeasure> measures = {LevyMeasure::create(LevyMeasureSpec::merton(1.0, 0.1, 0.4)),
                                             LevyMeasure::create(LevyMeasureSpec::point_mass(1.5, 0.7)),
                                             LevyMeasure::create(LevyMeasureSpec::kou(1.0, 0.5, 4.0, 3.0))};
  for (const auto& F : measures) {
    const auto tr = CharacteristicTriplet::scalar(0.2, 0.3, F);
    for (double l : {-1.0, 0.5, 1.5}) {
      const double base = cumulant_process(tr, StrategyPath::constant(l), {0.0, 1.0}).terminal();
      for (auto h : {Truncation::identity(), Truncation::zero()}) {
        const double other = cumulant_process(retruncate(tr, h), StrategyPath::constant(l), {0.0, 1.0}).terminal();
        EXPECT_LE(std::abs(other - base), 1e-12 * std::abs(base)) << F.spec().describe() << " " << l;
      }
    }
  }
}

TEST(CumulantProcess, RejectsNonSpecialStrategy) {
  const auto tr = CharacteristicTriplet::scalar(0.0, 0.0, exp_tail());
  EXPECT_THROW(cumulant_process(tr, StrategyPath::constant(1.0), {0.0, 1.0}), NotExponentiallySpecialError);
}

TEST(ExponentialSpecial, CompactSupportUnitStrategy) {
  const auto tr = CharacteristicTriplet::scalar(0.0, 0.0, LevyMeasure::create(LevyMeasureSpec::uniform_jumps(3.0, -1.0, 1.0)));
  const auto r = check_exponentially_special(tr, StrategyPath::constant(1.0), 1.0);
  EXPECT_EQ(r.verdict, Verdict::Pass);
  EXPECT_EQ(r.value, 0.0);
}

TEST(ExponentialSpecial, ZeroStrategy) {
  const auto tr = CharacteristicTriplet::scalar(0.0, 0.0, exp_tail());
  const auto r = check_exponentially_special(tr, StrategyPath::constant(0.0), 1.0);
  EXPECT_EQ(r.verdict, Verdict::Pass);
  EXPECT_EQ(r.value, 0.0);
}

TEST(ExponentialSpecial, DivergentTail) {
  const auto tr = CharacteristicTriplet::scalar(0.0, 0.0, exp_tail());
  const auto r = check_exponentially_special(tr, StrategyPath::constant(1.0), 1.0);
  EXPECT_EQ(r.verdict, Verdict::Fail);
  EXPECT_TRUE(std::isinf(r.value));
}
