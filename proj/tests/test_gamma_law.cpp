#include <algorithm>
#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "steingamma/gamma_law.hpp"

using namespace steingamma;

namespace {
const double kE = std::exp(1.0);
const std::vector<double> kNus{0.5, 1.0, 2.0, 5.5};

std::vector<double> grid(double lo, double hi, int n) {
  std::vector<double> g(n);
  for (int i = 0; i < n; ++i) g[i] = lo + (hi - lo) * i / (n - 1.0);
  return g;
}
}  // namespace

TEST(GammaLaw, RejectsNonpositiveNu) {
  EXPECT_THROW(GammaNu(0.0), std::invalid_argument);
  EXPECT_THROW(GammaNu(-1.0), std::invalid_argument);
  EXPECT_THROW(GammaNu(std::nan("")), std::invalid_argument);
}

// nu = 2 is a shifted exponential, so everything has a closed form.
TEST(GammaLaw, ShiftedExponentialClosedForms) {
  const GammaNu law(2.0);
  EXPECT_NEAR(density_p(law, 0.0), std::exp(-1.0) / 2.0, 1e-15);
  EXPECT_NEAR(density_q(law, -4.0), kE / 2.0, 1e-14);
  EXPECT_NEAR(tail_Ftilde(law, -4.0), kE - 1.0, 1e-13);
  EXPECT_NEAR(tail_Ftilde(law, -3.0), std::sqrt(kE) - 1.0, 1e-14);
  EXPECT_NEAR(cdf_F(law, 0.0), 1.0 - std::exp(-1.0), 1e-15);
  EXPECT_NEAR(survival(law, 10.0), std::exp(-6.0), 1e-16);
}

// Reference values computed independently at 40 digits.
TEST(GammaLaw, ReferenceDensitiesAndTails) {
  EXPECT_NEAR(density_p(GammaNu(1.0), -0.99), 3.969525474770118, 1e-12);
  EXPECT_NEAR(density_q(GammaNu(1.0), -1.25), 0.904121655799671, 1e-13);
  EXPECT_NEAR(density_p(GammaNu(0.5), 0.3), 0.18379180503845378, 1e-14);
  EXPECT_NEAR(cdf_F(GammaNu(1.0), 3.0), 0.9544997361036416, 1e-14);
  EXPECT_NEAR(tail_Ftilde(GammaNu(5.5), -9.0), 4.025266334468577, 1e-11);
  EXPECT_NEAR(tail_Ftilde(GammaNu(1.0), -3.0), 1.650425758797543, 1e-12);
}

TEST(GammaLaw, DensitiesVanishOffTheirSupports) {
  const GammaNu law(1.0);
  EXPECT_EQ(density_p(law, -1.0), 0.0);
  EXPECT_EQ(density_p(law, -3.0), 0.0);
  EXPECT_EQ(density_q(law, -1.0), 0.0);
  EXPECT_EQ(density_q(law, 2.0), 0.0);
  EXPECT_THROW(tail_Ftilde(law, 0.0), std::domain_error);
}

TEST(GammaLaw, QuadratureMoments) {
  for (double nu : kNus) {
    const GammaNu law(nu);
    EXPECT_NEAR(moment(law, 0), 1.0, 1e-8) << nu;
    EXPECT_NEAR(moment(law, 1), 0.0, 1e-8) << nu;
    EXPECT_NEAR(moment(law, 2), 2.0 * nu, 1e-8 * nu) << nu;
    EXPECT_NEAR(moment(law, 3), 8.0 * nu, 1e-8 * nu) << nu;
    EXPECT_NEAR(moment(law, 4), 12.0 * nu * nu + 48.0 * nu, 1e-8 * nu * nu) << nu;
  }
}

TEST(GammaLaw, IntegratedSurvivalEqualsNu) {
  QuadratureSpec spec;
  for (double nu : kNus) {
    const GammaNu law(nu);
    // int_{-nu}^inf (1 - F) = E[Z] + nu = nu.
    EXPECT_NEAR(integrate_against_p(law, [nu](double w) { return w + nu; }, spec), nu, 1e-8) << nu;
    // Second route: the stable ratio form, started 1e-12 above -nu.
    const double x = -nu + 1e-12;
    EXPECT_NEAR(integral_survival_above_over_p(law, x) * density_p(law, x), nu, 1e-8) << nu;
  }
  // The same integral taken directly over the survival function.
  const GammaNu law(1.0);
  const double direct = integrate([&](double w) { return survival(law, w); }, -1.0, upper_cutoff(law, spec), spec);
  EXPECT_NEAR(direct, 1.0, 1e-8);
}

TEST(GammaLaw, IntegrationByPartsIdentityOnGrids) {
  for (double nu : kNus) {
    const GammaNu law(nu);
    for (double s : grid(1e-3, 30.0, 50)) {
      EXPECT_LT(identity_residual(law, -nu + s), 1e-8) << nu << " " << s;
      EXPECT_LT(identity_residual(law, -nu - s), 1e-8) << nu << " " << -s;
    }
  }
}

TEST(GammaLaw, TailToDensityRatioTendsToTwo) {
  const GammaNu law(1.0);
  EXPECT_NEAR(tail_to_q_ratio(law, -1e4), 2.0, 1e-3);
  for (double x : {-1.5, -3.0, -10.0, -100.0})
    EXPECT_NEAR(tail_to_q_ratio(law, x), tail_Ftilde(law, x) / density_q(law, x), 1e-12 * tail_to_q_ratio(law, x));
}

TEST(GammaLaw, SamplerMatchesMoments) {
  for (double nu : {1.0, 5.5}) {
    const GammaNu law(nu);
    const auto z = sample_Z(law, 1000000, 11, 0);
    double m1 = 0, m2 = 0;
    for (double v : z) {
      m1 += v;
      m2 += v * v;
    }
    m1 /= z.size();
    m2 /= z.size();
    const double se = std::sqrt(2.0 * nu / z.size());
    EXPECT_NEAR(m1, 0.0, 4.0 * se);
    // Var(Z^2) = E Z^4 - (2 nu)^2 = 12 nu^2 + 48 nu.
    EXPECT_NEAR(m2, 2.0 * nu, 4.0 * std::sqrt((12.0 * nu * nu + 48.0 * nu) / z.size()));
  }
}

TEST(GammaLaw, SamplerIsDeterministicPerStream) {
  const GammaNu law(1.0);
  EXPECT_EQ(sample_Z(law, 100, 5, 1), sample_Z(law, 100, 5, 1));
  EXPECT_NE(sample_Z(law, 100, 5, 1), sample_Z(law, 100, 5, 2));
}

// F(1) is the law of N^2 - 1; a Kolmogorov-Smirnov distance against cdf_F.
TEST(GammaLaw, KolmogorovSmirnovAgainstSquaredGaussian) {
  const GammaNu law(1.0);
  auto z = sample_Z(law, 200000, 99, 0);
  std::sort(z.begin(), z.end());
  double d = 0.0;
  const double n = static_cast<double>(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) {
    const double f = cdf_F(law, z[i]);
    d = std::max({d, std::abs(f - i / n), std::abs((i + 1) / n - f)});
  }
  // 1.63 / sqrt(n) is the 1% critical value.
  EXPECT_LT(d, 1.63 / std::sqrt(n));
}

TEST(GammaLawProperty, CdfAndSurvivalAreComplementaryAndMonotone) {
  for (double nu : kNus) {
    const GammaNu law(nu);
    double prev_cdf = 0.0, prev_tail = 0.0;
    for (double x : grid(-nu + 1e-6, 40.0, 200)) {
      const double c = cdf_F(law, x), s = survival(law, x);
      EXPECT_NEAR(c + s, 1.0, 1e-14);
      EXPECT_GE(c, prev_cdf);
      prev_cdf = c;
    }
    for (double x : grid(-nu - 1e-6, -nu - 40.0, 200)) {
      const double t = tail_Ftilde(law, x);
      EXPECT_GT(t, prev_tail);
      prev_tail = t;
    }
  }
}

TEST(GammaLawProperty, OffsetFormsAgreeWithPlainForms) {
  for (double nu : kNus) {
    const GammaNu law(nu);
    for (double s : {1e-3, 0.5, 3.0, 20.0}) {
      EXPECT_NEAR(log_density_p_offset(law, s), log_density_p(law, -nu + s), 1e-12 * (1 + std::abs(std::log(s))));
      EXPECT_NEAR(log_density_q_offset(law, s), log_density_q(law, -nu - s), 1e-12 * (1 + std::abs(std::log(s))));
      EXPECT_NEAR(cdf_offset(law, s), cdf_F(law, -nu + s), 1e-14);
      EXPECT_NEAR(survival_offset(law, s), survival(law, -nu + s), 1e-14);
    }
    // Offsets far below the spacing of doubles at -nu still give a finite density.
    EXPECT_TRUE(std::isfinite(log_density_p_offset(law, 1e-40)));
  }
}

TEST(GammaLawProperty, QuantileInvertsSurvival) {
  for (double nu : kNus) {
    const GammaNu law(nu);
    for (double mass : {0.5, 1e-3, 1e-12}) {
      const double w = upper_quantile(law, mass);
      EXPECT_NEAR(std::log(survival(law, w)), std::log(mass), 1e-8);
    }
  }
}
