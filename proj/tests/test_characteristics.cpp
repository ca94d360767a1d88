#include <gtest/gtest.h>

#include <cmath>

#include "expmart/characteristics.hpp"
#include "expmart/errors.hpp"

using namespace expmart;

namespace {

// Frozen values of closed forms.
constexpr double kPointMassExp = 3.43656365691809047;   // 2 (e - 1)
constexpr double kMertonExp = 1.02020134002675581;      // e^{0.02}

LevyMeasure point_mass(double x, double rate) { return LevyMeasure::create(LevyMeasureSpec::point_mass(x, rate)); }
LevyMeasure merton() { return LevyMeasure::create(LevyMeasureSpec::merton(1.0, 0.0, 0.2)); }

Vec v1(double x) { return Vec::Constant(1, x); }

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace

TEST(LevyIntegrability, PointMassValue) {
  const auto r = check_levy_integrability(LevyMeasureSpec::point_mass(1.0, 2.0));
  EXPECT_EQ(r.verdict, Verdict::Pass);
  EXPECT_DOUBLE_EQ(r.value, 2.0);
}

TEST(LevyIntegrability, ZeroMeasure) {
  const auto r = check_levy_integrability(LevyMeasureSpec::none());
  EXPECT_EQ(r.verdict, Verdict::Pass);
  EXPECT_EQ(r.value, 0.0);
}

TEST(LevyIntegrability, CubicSingularityDiverges) {
  LevyMeasureSpec spec{DensityMeasure{[](double x) { return std::pow(x, -3.0); }, 0.0, 1.0, "x^-3"}};
  const auto r = check_levy_integrability(spec);
  EXPECT_EQ(r.verdict, Verdict::Fail);
  EXPECT_TRUE(std::isinf(r.value));
  EXPECT_THROW(LevyMeasure::create(spec), std::invalid_argument);
}

TEST(LevyIntegrability, EveryConstructibleMeasurePasses) {
  const std::vector<LevyMeasureSpec> specs = {
      LevyMeasureSpec::none(),
      LevyMeasureSpec::point_mass(-0.3, 4.0),
      LevyMeasureSpec::merton(2.0, -0.1, 0.3),
      LevyMeasureSpec::kou(1.5, 0.4, 3.0, 2.5),
      LevyMeasureSpec::uniform_jumps(1.0, -2.0, 1.0),
      {TemperedStable{1.0, 0.5, 2.0, 3.0, 0.7}},
      {DensityMeasure{[](double x) { return std::exp(-x / 2.0); }, 0.0, std::numeric_limits<double>::infinity()}},
  };
  for (const auto& s : specs) {
    const LevyMeasure F = LevyMeasure::create(s);
    EXPECT_EQ(check_levy_integrability(F.spec()).verdict, Verdict::Pass) << s.describe();
  }
}

TEST(Piiac, BrownianUnitValue) {
  const auto tr = CharacteristicTriplet::scalar(0.0, 1.0, LevyMeasure::zero());
  const auto r = check_piiac_integrability(tr, 1.0);
  EXPECT_EQ(r.verdict, Verdict::Pass);
  EXPECT_NEAR(r.value, 1.0, 1e-12);
}

TEST(Piiac, LinearDriftPlusPointMass) {
  TripletSpec spec;
  spec.drift = TimeFunction<Vec>::callable([](double t) { return v1(t); });
  spec.diffusion = TimeFunction<Mat>::constant(Mat::Zero(1, 1));
  spec.levy = point_mass(1.0, 2.0);
  const auto tr = CharacteristicTriplet::create(spec);
  const auto r = check_piiac_integrability(tr, 1.0);
  EXPECT_EQ(r.verdict, Verdict::Pass);
  EXPECT_NEAR(r.value, 2.5, 1e-9);
}

TEST(Piiac, ExplodingDiffusionFails) {
  TripletSpec spec;
  spec.drift = TimeFunction<Vec>::constant(v1(0.0));
  spec.diffusion = TimeFunction<Mat>::callable([](double t) { return Mat::Constant(1, 1, 1.0 / (1.0 - t)); });
  spec.levy = LevyMeasure::zero();
  const auto tr = CharacteristicTriplet::create(spec);
  const auto r = check_piiac_integrability(tr, 1.0);
  EXPECT_EQ(r.verdict, Verdict::Fail);
}

TEST(IntegrateLevy, PointMassExp) {
  const double v = integrate_levy(point_mass(1.0, 2.0), LevyIntegrand::generic(1, [](std::span<const double> x) {
                                    return std::expm1(x[0]);
                                  }));
  EXPECT_LE(rel(v, kPointMassExp), 1e-15);
}

TEST(IntegrateLevy, ZeroIntegrand) {
  const double v = integrate_levy(merton(), LevyIntegrand::generic(1, [](std::span<const double>) { return 0.0; }));
  EXPECT_EQ(v, 0.0);
}

TEST(IntegrateLevy, MertonExpMoment) {
  EXPECT_LE(rel(integrate_levy(merton(), LevyIntegrand::exp(v1(1.0))), kMertonExp), 1e-9);
  EXPECT_LE(rel(merton().integrate_numeric(LevyIntegrand::exp(v1(1.0))).value, kMertonExp), 1e-9);
}

TEST(IntegrateLevy, PointMassSumIsExact) {
  PointMasses pm{1, {{v1(0.25), 1.5}, {v1(-0.7), 0.3}, {v1(1.9), 2.25}}};
  const LevyMeasure F = LevyMeasure::create({pm});
  double sum = 0.0;
  for (const auto& a : pm.atoms) sum += std::exp(a.location[0]) * a.rate;
  EXPECT_EQ(F.integrate(LevyIntegrand::exp(v1(1.0))).value, sum);
}

TEST(IntegrateLevy, ClosedFormsMatchQuadrature) {
  const std::vector<LevyMeasureSpec> families = {
      LevyMeasureSpec::merton(1.0, 0.1, 0.25),
      LevyMeasureSpec::kou(2.0, 0.3, 4.0, 5.0),
      LevyMeasureSpec::uniform_jumps(1.5, -1.5, 2.0),
  };
  for (const auto& spec : families) {
    const LevyMeasure F = LevyMeasure::create(spec);
    for (double l : {-2.0, -1.0, 0.5, 1.0, 2.0}) {
      const std::vector<LevyIntegrand> panel = {
          LevyIntegrand::exp(v1(l)), LevyIntegrand::compensated_exp(v1(l), Truncation::standard()),
          LevyIntegrand::hellinger(v1(l)), LevyIntegrand::truncated_square(1)};
      for (const auto& g : panel) {
        const double closed = F.integrate(g).value;
        const double numeric = F.integrate_numeric(g).value;
        EXPECT_LE(std::abs(closed - numeric), 1e-8 * std::max(std::abs(closed), 1e-12))
            << spec.describe() << " lambda=" << l;
      }
    }
  }
}

TEST(Retruncate, SameTruncationIsIdentity) {
  const auto tr = CharacteristicTriplet::scalar(0.3, 1.0, merton());
  const auto r = retruncate(tr, Truncation::standard());
  EXPECT_EQ(r.b(0.5)[0], 0.3);
}

TEST(Retruncate, NoJumpsLeavesDrift) {
  const auto tr = CharacteristicTriplet::scalar(0.3, 1.0, LevyMeasure::zero());
  EXPECT_EQ(retruncate(tr, Truncation::identity()).b(0.5)[0], 0.3);
  EXPECT_EQ(retruncate(tr, Truncation::zero()).b(0.5)[0], 0.3);
}

TEST(Retruncate, PointMassToZeroTruncation) {
  const double eta = 1.7;
  const auto tr = CharacteristicTriplet::scalar(0.4, 0.0, point_mass(1.0, eta));
  EXPECT_NEAR(retruncate(tr, Truncation::zero()).b(0.2)[0], 0.4 - eta, 1e-15);
}

TEST(Retruncate, RoundTrip) {
  const std::vector<LevyMeasure> measures = {merton(), point_mass(1.5, 0.7),
                                             LevyMeasure::create(LevyMeasureSpec::kou(1.0, 0.6, 3.0, 2.0))};
  for (const auto& F : measures) {
    const auto tr = CharacteristicTriplet::scalar(0.25, 0.5, F);
    for (auto h : {Truncation::identity(), Truncation::zero()}) {
      const auto back = retruncate(retruncate(tr, h), Truncation::standard());
      EXPECT_LE(rel(back.b(0.5)[0], 0.25), 1e-12);
    }
  }
}

TEST(Triplet, RejectsAsymmetricDiffusion) {
  Mat c(2, 2);
  c << 1.0, 0.5, 0.0, 1.0;
  EXPECT_THROW(CharacteristicTriplet::homogeneous(Vec::Zero(2), c, LevyMeasure::zero(2), Truncation::standard(2), 1.0),
               std::invalid_argument);
}

TEST(Triplet, RejectsNegativeRate) {
  EXPECT_THROW(LevyMeasure::create(LevyMeasureSpec::point_mass(1.0, -1.0)), std::invalid_argument);
}

TEST(Triplet, IdentityTruncationNeedsFirstMoment) {
  // 1/x^2 on (1, inf): finite mass, infinite mean
  LevyMeasureSpec spec{DensityMeasure{[](double x) { return 1.0 / (x * x); }, 1.0,
                                      std::numeric_limits<double>::infinity()}};
  const LevyMeasure F = LevyMeasure::create(spec);
  EXPECT_THROW(CharacteristicTriplet::scalar(0.0, 0.0, F, Truncation::identity()), std::invalid_argument);
  EXPECT_NO_THROW(CharacteristicTriplet::scalar(0.0, 0.0, F, Truncation::standard()));
}

TEST(IntegrateInTime, PiecewiseLevyMeasure) {
  TripletSpec spec;
  spec.drift = TimeFunction<Vec>::constant(v1(0.0));
  spec.diffusion = TimeFunction<Mat>::constant(Mat::Zero(1, 1));
  spec.levy = PiecewiseLevyMeasure({0.25}, {point_mass(1.0, 2.0), point_mass(1.0, 6.0)});
  const auto tr = CharacteristicTriplet::create(spec);
  TimeIntegrand g;
  g.jump = [](double) { return LevyIntegrand::one(1); };
  g.jump_piecewise_constant = true;
  const auto r = integrate_in_time(tr, 0.0, 1.0, g);
  EXPECT_TRUE(r.ok());
  EXPECT_NEAR(r.value, 2.0 * 0.25 + 6.0 * 0.75, 1e-14);
}
