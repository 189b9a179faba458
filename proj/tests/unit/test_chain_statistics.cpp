// SPDX-FileCopyrightText: 2026 The chainfield developers
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "chainfield/chain_statistics.hpp"
#include "chainfield/errors.hpp"
#include "chainfield/verify.hpp"

using namespace chainfield;

namespace {

const WesslauParams kAdhesive = WesslauParams::derive(1.001, 1.194);
const WesslauParams kBroad = WesslauParams::derive(1.1, 1.5);

double rel(double a, double b) {
  if (a == 0.0 && b == 0.0) return 0.0;  // both underflowed
  return std::abs(a - b) / std::abs(b);
}

// Frozen from tests/oracles/wesslau_mpmath.py (50 digits, product form and
// mpmath quadrature, no closed form involved).
struct Frozen {
  const WesslauParams* p;
  double x, w, g, cdf;
};
const Frozen kFrozen[] = {
    {&kAdhesive, 2.0, 2.0383230241122023e-6, 2.431326364425544e-6, 1.3413012699522894e-8},
    {&kAdhesive, 2.15, 5.5225070967528692, 5.7280749455092089, 0.12709792731303782},
    {&kAdhesive, 2.19, 10.560867337504434, 10.585780270972972, 0.47658716301422072},
    {&kAdhesive, 2.25, 3.4489704649030575, 3.2911654226527478, 0.93282936967376522},
    {&kBroad, 1.2, 9.8414497417577007e-9, 6.7100793693802505e-8, 6.6604782334583668e-10},
    {&kBroad, 1.3, 1.1940308262300123e-5, 5.4274128465000561e-5, 1.0164941683665244e-6},
    {&kBroad, 2.0, 0.660163400464105, 0.90022281881468863, 0.19758611386939636},
    {&kBroad, 2.25, 0.93996766848976576, 1.0254192747161081, 0.44927996968144483},
    {&kBroad, 3.0, 0.35818785446231797, 0.24421899167885316, 0.91848138593337813},
};

}  // namespace

TEST(Derive, AdhesiveConstants) {
  EXPECT_NEAR(kAdhesive.beta, 0.044710, 5e-7);
  EXPECT_NEAR(kAdhesive.lambda_N, 1.192807, 5e-7);
  EXPECT_NEAR(kAdhesive.lambda_0, 1.193403, 5e-7);
  EXPECT_EQ(kAdhesive.lambda_M / kAdhesive.lambda_N, kAdhesive.Q);
}

TEST(Derive, HalfLogGivesUnitBeta) {
  const auto p = WesslauParams::derive(std::exp(0.5), 2.0);
  EXPECT_NEAR(p.beta, 1.0, 1e-15);
}

TEST(Derive, RejectsDegenerateInputs) {
  EXPECT_THROW(WesslauParams::derive(1.0, 1.2), DomainError);
  EXPECT_THROW(WesslauParams::derive(0.5, 1.2), DomainError);
  EXPECT_THROW(WesslauParams::derive(1.1, 1.0), DomainError);
  EXPECT_THROW(WesslauParams::derive(std::nan(""), 1.2), DomainError);
}

TEST(Pdf, UnitLogArgument) {
  for (const auto* p : {&kAdhesive, &kBroad}) {
    EXPECT_NEAR(pdf_w(1.0 + p->lambda_0, *p), 1.0 / (p->beta * std::sqrt(std::numbers::pi) * p->lambda_0),
                1e-12 * pdf_w(1.0 + p->lambda_0, *p));
    EXPECT_NEAR(pdf_g(1.0 + 1.0 / p->a2, *p), p->a0 * p->a2 * p->a2, 1e-12 * p->a0 * p->a2 * p->a2);
  }
}

TEST(Pdf, MatchesHighPrecisionValues) {
  for (const auto& f : kFrozen) {
    EXPECT_LT(rel(pdf_w(f.x, *f.p), f.w), 1e-11) << f.x;
    EXPECT_LT(rel(pdf_g(f.x, *f.p), f.g), 1e-11) << f.x;
  }
}

TEST(Pdf, DomainErrors) {
  EXPECT_THROW(pdf_w(1.0, kAdhesive), DomainError);
  EXPECT_THROW(pdf_g(0.9, kAdhesive), DomainError);
  EXPECT_THROW(survival_d1(1.0, kAdhesive), DomainError);
  EXPECT_THROW(survival_d2(1.0, kAdhesive), DomainError);
  EXPECT_THROW(cdf(0.99, kAdhesive), DomainError);
}

TEST(Pdf, ProductFormIdentity) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(1.01, 4.0);
  for (const auto* p : {&kAdhesive, &kBroad}) {
    // for the adhesive both sides are ~1e-691 and underflow to zero
    EXPECT_LT(rel(pdf_g(1.2, *p), p->lambda_N / 0.2 * pdf_w(1.2, *p)), 1e-12);
    for (int i = 0; i < 200; ++i) {
      const double x = u(rng);
      const double g = pdf_g(x, *p);
      if (g < 1e-290) continue;
      EXPECT_LT(rel(g, p->lambda_N / (x - 1.0) * pdf_w(x, *p)), 1e-12) << x;
    }
  }
}

TEST(Pdf, VanishesAtBothEnds) {
  EXPECT_LT(pdf_g(1.0 + 1e-6, kBroad), 1e-30);
  EXPECT_LT(pdf_g(1e6, kBroad), 1e-30);
}

TEST(Pdf, WDensityIsNormalised) {
  // the (λ−1) log-normal has unit mass; 2C is the mass of g
  for (const auto* p : {&kAdhesive, &kBroad}) EXPECT_NEAR(p->total_mass(), 1.0, 1e-12);
}

TEST(Cdf, ZeroAtUnitStretch) { EXPECT_EQ(cdf(1.0, kAdhesive), 0.0); }

TEST(Cdf, MatchesHighPrecisionValues) {
  for (const auto& f : kFrozen) EXPECT_LT(rel(cdf(f.x, *f.p), f.cdf), 1e-10) << f.x;
}

TEST(Cdf, MatchesQuadratureAtTableStretch) {
  for (double x : {1.3, 2.1, 2.2, 2.3}) {
    const double q = cdf_by_quadrature(x, kBroad);
    EXPECT_LT(rel(cdf(x, kBroad), q), 1e-8) << x;
  }
}

TEST(Cdf, SaturatesAtTotalMass) {
  for (const auto* p : {&kAdhesive, &kBroad}) {
    const double twoC = p->a0 * p->a2 * std::exp(1.0 / (4.0 * p->a1)) * std::sqrt(std::numbers::pi) / std::sqrt(p->a1);
    EXPECT_NEAR(cdf(1e6, *p), twoC, 1e-12);
  }
}

TEST(Cdf, NonDecreasing) {
  for (const auto* p : {&kAdhesive, &kBroad}) {
    double last = 0.0;
    for (double x = 1.0; x < 4.0; x += 0.001) {
      const double c = cdf(x, *p);
      EXPECT_GE(c, last) << x;
      last = c;
    }
  }
}

// Values of erf at 20 points, 17 digits (mpmath). The closed form rests on
// std::erfc, so this pins the library function it depends on.
TEST(Cdf, ErfTable) {
  const double xs[20] = {-3.0, -2.5, -2.0, -1.5, -1.2, -1.0, -0.7, -0.5, -0.2, -0.05,
                         0.05, 0.2,  0.5,  0.7,  1.0,  1.2,  1.5,  2.0,  2.5,  3.0};
  const double pos[10] = {0.056371977797016627, 0.22270258921047847, 0.52049987781304654, 0.67780119383741844,
                          0.84270079294971487,  0.91031397822963537, 0.96610514647531073, 0.99532226501895273,
                          0.99959304798255504,  0.99997790950300141};
  for (int i = 0; i < 20; ++i) {
    const double ref = i < 10 ? -pos[9 - i] : pos[i - 10];
    EXPECT_LT(std::abs(1.0 - std::erfc(xs[i]) - ref), 2e-16 + 1e-15 * std::abs(ref)) << xs[i];
  }
}

TEST(Survival, Limits) {
  EXPECT_EQ(survival(1.0, kAdhesive), 1.0);
  const Jet j = survival_guarded(1.0, kAdhesive);
  EXPECT_EQ(j.value, 1.0);
  EXPECT_EQ(j.d1, 0.0);
  EXPECT_EQ(j.d2, 0.0);
  const Jet below = survival_guarded(0.95, kAdhesive);
  EXPECT_EQ(below.value, 1.0);
  EXPECT_EQ(below.d1, 0.0);
}

TEST(Survival, QuadratureAtQuarter) {
  EXPECT_NEAR(survival(1.25, kBroad), 1.0 - cdf_by_quadrature(1.25, kBroad), 1e-14);
  EXPECT_NEAR(survival(2.2, kAdhesive), 1.0 - cdf_by_quadrature(2.2, kAdhesive), 1e-10);
}

TEST(Survival, MonotoneAndBounded) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> q(1.0005, 2.0), m(1.05, 2.5);
  for (int i = 0; i < 100; ++i) {
    const auto p = WesslauParams::derive(q(rng), m(rng));
    EXPECT_GE(survival(1.1, p), survival(1.2, p));
    EXPECT_GE(survival(1.2, p), survival(1.5, p));
    for (double x : {1.0, 1.5, 3.0, 50.0}) {
      EXPECT_LE(survival(x, p), 1.0);
      EXPECT_GE(survival(x, p), 1.0 - p.total_mass() - 1e-15);
    }
  }
}

TEST(Survival, SlopeNegative) {
  for (double x = 1.01; x < 10.0; x += 0.01) {
    const double d = survival_d1(x, kBroad);
    EXPECT_LE(d, 0.0);
  }
  EXPECT_LT(survival_d1(2.19, kAdhesive), 0.0);
}

TEST(Survival, DerivativesMatchCentralDifferences) {
  const double h = 1e-6;
  for (const auto* p : {&kAdhesive, &kBroad}) {
    for (double x : {1.3, 1.8, 2.15, 2.19, 2.25}) {
      const double d1 = survival_d1(x, *p);
      if (std::abs(d1) < 1e-8) continue;  // below the difference quotient's noise
      const double fd1 = (survival(x + h, *p) - survival(x - h, *p)) / (2 * h);
      EXPECT_LT(rel(d1, fd1), 1e-6) << x;
      const double fd2 = (survival_d1(x + h, *p) - survival_d1(x - h, *p)) / (2 * h);
      EXPECT_LT(std::abs(survival_d2(x, *p) - fd2), 1e-6 * std::abs(fd2) + 1e-8) << x;
    }
  }
}

TEST(Survival, DisabledIsIdentity) {
  const ChainSurvival none;
  EXPECT_FALSE(none.enabled());
  const Jet j = none.at(3.0);
  EXPECT_EQ(j.value, 1.0);
  EXPECT_EQ(j.d1, 0.0);
}
