#include <gtest/gtest.h>

#include "oracles.hpp"

using namespace conav;

namespace {

std::vector<double> nodes(std::size_t n) {
  std::vector<double> s(n);
  for (std::size_t j = 0; j < n; ++j) s[j] = kTwoPi * double(j) / double(n);
  return s;
}

}  // namespace

TEST(Spectral, ConjugateMapsCosToSin) {
  const auto s = nodes(64);
  std::vector<double> c(64), c3(64);
  for (std::size_t j = 0; j < 64; ++j) {
    c[j] = std::cos(s[j]);
    c3[j] = std::cos(3 * s[j]) + 2.0 * std::sin(5 * s[j]);
  }
  const auto r = spectral::conjugate(c);
  const auto r3 = spectral::conjugate(c3);
  for (std::size_t j = 0; j < 64; ++j) {
    EXPECT_NEAR(r[j], std::sin(s[j]), 1e-14);
    EXPECT_NEAR(r3[j], std::sin(3 * s[j]) - 2.0 * std::cos(5 * s[j]), 1e-13);
  }
}

TEST(Spectral, ConjugateAnnihilatesConstantsAndNyquist) {
  std::vector<double> one(32, 1.0), nyq(32);
  for (std::size_t j = 0; j < 32; ++j) nyq[j] = j % 2 == 0 ? 1.0 : -1.0;
  for (double v : spectral::conjugate(one)) EXPECT_NEAR(v, 0.0, 1e-15);
  for (double v : spectral::conjugate(nyq)) EXPECT_NEAR(v, 0.0, 1e-15);
}

TEST(Spectral, DerivativeOfTrigPolynomial) {
  const auto s = nodes(64);
  std::vector<Complex> f(64), df(64), ddf(64);
  const Complex i(0, 1);
  for (std::size_t j = 0; j < 64; ++j) {
    f[j] = std::exp(i * s[j]) + 0.1 * std::exp(-3.0 * i * s[j]);
    df[j] = i * std::exp(i * s[j]) - 0.3 * i * std::exp(-3.0 * i * s[j]);
    ddf[j] = -std::exp(i * s[j]) - 0.9 * std::exp(-3.0 * i * s[j]);
  }
  const auto d1 = spectral::derivative(f, 1);
  const auto d2 = spectral::derivative(f, 2);
  for (std::size_t j = 0; j < 64; ++j) {
    EXPECT_LT(std::abs(d1[j] - df[j]), 1e-13);
    EXPECT_LT(std::abs(d2[j] - ddf[j]), 1e-12);  // roundoff grows like N^2 eps
  }
}

TEST(Spectral, ResampleUpAndDownIsIdempotent) {
  const auto c = sample_curve(CurveSpec::ellipse({0.1, -0.2}, 1.3, 0.7, 0.4), 64);
  const auto up = spectral::resample(c.gamma(), 128);
  const auto back = spectral::resample(up, 64);
  for (std::size_t j = 0; j < 64; ++j) {
    EXPECT_LT(std::abs(back[j] - c[j]), 1e-12);
    EXPECT_LT(std::abs(up[2 * j] - c[j]), 1e-12);
  }
}

TEST(Spectral, WavenumberOrdering) {
  EXPECT_EQ(spectral::wavenumber(0, 8), 0);
  EXPECT_EQ(spectral::wavenumber(3, 8), 3);
  EXPECT_EQ(spectral::wavenumber(4, 8), 4);
  EXPECT_EQ(spectral::wavenumber(5, 8), -3);
  EXPECT_TRUE(spectral::is_power_of_two(256));
  EXPECT_FALSE(spectral::is_power_of_two(96));
}
