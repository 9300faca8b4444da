#include <gtest/gtest.h>

#include <cmath>

#include "stochsweep/paths.hpp"

namespace ss = stochsweep;

namespace {

TEST(MakeGrid, QuarterSteps) {
  const auto g = ss::make_grid(0.0, 1.0, 4);
  EXPECT_EQ(g.dt, 0.25);
  EXPECT_EQ(g.n_nodes(), 5u);
  EXPECT_EQ(g.time(4), 1.0);
}

TEST(MakeGrid, Fig1Horizon) {
  const auto g = ss::make_grid(0.0, 87.0, 8700);
  EXPECT_DOUBLE_EQ(g.dt, 0.01);
  EXPECT_EQ(g.dt, 87.0 / 8700.0);
}

TEST(MakeGrid, RejectsEmptySpanAndZeroSteps) {
  EXPECT_THROW(ss::make_grid(1.0, 1.0, 10), ss::ValidationError);
  EXPECT_THROW(ss::make_grid(2.0, 1.0, 10), ss::ValidationError);
  EXPECT_THROW(ss::make_grid(0.0, 1.0, 0), ss::ValidationError);
}

TEST(SampleBrownian, SameSeedAndReplicateAreIdentical) {
  const auto g = ss::make_grid(0.0, 10.0, 1000);
  const auto a = ss::sample_brownian(g, 42, 3);
  const auto b = ss::sample_brownian(g, 42, 3);
  ASSERT_EQ(a.size(), 1000u);
  EXPECT_EQ(a.increments, b.increments);
  EXPECT_EQ(a.seed, 42u);
  EXPECT_EQ(a.replicate_id, 3u);
}

TEST(SampleBrownian, DistinctReplicatesAndSeedsDiffer) {
  const auto g = ss::make_grid(0.0, 1.0, 100);
  const auto a = ss::sample_brownian(g, 42, 0);
  EXPECT_NE(a.increments, ss::sample_brownian(g, 42, 1).increments);
  EXPECT_NE(a.increments, ss::sample_brownian(g, 43, 0).increments);
}

TEST(SampleBrownian, MomentsMatchDt) {
  const std::size_t n = 100000;
  const auto g = ss::make_grid(0.0, 0.01 * n, n);
  const auto path = ss::sample_brownian(g, 2024, 0);
  for (int c = 0; c < 2; ++c) {
    double sum = 0.0, sq = 0.0;
    for (const auto& inc : path.increments) {
      sum += inc[c];
      sq += inc[c] * inc[c];
    }
    const double mean = sum / n;
    const double var = sq / n - mean * mean;
    EXPECT_LE(std::abs(mean), 4.0 * std::sqrt(0.01) / std::sqrt(double(n))) << "component " << c;
    EXPECT_LE(std::abs(var - 0.01), 0.05 * 0.01) << "component " << c;
  }
}

TEST(SampleBrownian, ComponentsUncorrelated) {
  const std::size_t n = 100000;
  const auto g = ss::make_grid(0.0, 0.01 * n, n);
  const auto path = ss::sample_brownian(g, 99, 5);
  double s1 = 0, s2 = 0, s11 = 0, s22 = 0, s12 = 0;
  for (const auto& inc : path.increments) {
    s1 += inc[0];
    s2 += inc[1];
    s11 += inc[0] * inc[0];
    s22 += inc[1] * inc[1];
    s12 += inc[0] * inc[1];
  }
  const double dn = double(n);
  const double cov = s12 / dn - (s1 / dn) * (s2 / dn);
  const double v1 = s11 / dn - (s1 / dn) * (s1 / dn);
  const double v2 = s22 / dn - (s2 / dn) * (s2 / dn);
  EXPECT_LT(std::abs(cov / std::sqrt(v1 * v2)), 0.02);
}

TEST(SampleBrownian, PropertyScaledIncrementsLookNormal) {
  const std::size_t n = 500000;  // two components -> 10^6 draws
  const auto g = ss::make_grid(0.0, 1.0, n);
  const auto path = ss::sample_brownian(g, 7, 0);
  const double scale = 1.0 / std::sqrt(g.dt);
  double m1 = 0, m2 = 0, m3 = 0, m4 = 0;
  for (const auto& inc : path.increments) {
    for (double v : inc) {
      const double z = v * scale;
      m1 += z;
      m2 += z * z;
      m3 += z * z * z;
      m4 += z * z * z * z;
    }
  }
  const double N = 2.0 * double(n);
  const double mean = m1 / N;
  const double var = m2 / N - mean * mean;
  const double skew = (m3 / N - 3 * mean * m2 / N + 2 * mean * mean * mean) / std::pow(var, 1.5);
  const double kurt = (m4 / N - 4 * mean * m3 / N + 6 * mean * mean * m2 / N -
                       3 * std::pow(mean, 4)) / (var * var) - 3.0;
  EXPECT_LT(std::abs(skew), 0.05);
  EXPECT_LT(std::abs(kurt), 0.1);
}

TEST(CounterRng, UniformStaysInUnitInterval) {
  const ss::CounterRng rng(1, 2);
  for (std::uint64_t k = 0; k < 100000; ++k) {
    const double u = rng.uniform(k);
    ASSERT_GT(u, 0.0);
    ASSERT_LE(u, 1.0);
  }
}

TEST(ZeroBrownian, AllZero) {
  const auto g = ss::make_grid(0.0, 1.0, 10);
  const auto z = ss::zero_brownian(g);
  ASSERT_EQ(z.size(), 10u);
  for (const auto& inc : z.increments) {
    EXPECT_EQ(inc[0], 0.0);
    EXPECT_EQ(inc[1], 0.0);
  }
}

}  // namespace
