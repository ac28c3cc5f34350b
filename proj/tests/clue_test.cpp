// Copyright 2026 The SoundCompass Toolkit Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <vector>

#include "soundcompass/clue.hpp"
#include "sh_oracle.hpp"

namespace soundcompass::clue {
namespace {

using testing::gauss_legendre;
using testing::rodrigues_legendre;
using testing::rodrigues_sh;

constexpr double kPi = std::numbers::pi;

TEST(AssocLegendre, BaseCases) {
  for (double x : {-1.0, -0.3, 0.0, 0.8, 1.0}) EXPECT_EQ(assoc_legendre(0, 0, x), 1.0);
  EXPECT_DOUBLE_EQ(assoc_legendre(1, 0, 0.5), 0.5);
  // Condon-Shortley phase: P_1^1(x) = -sqrt(1 - x^2).
  EXPECT_DOUBLE_EQ(assoc_legendre(1, 1, 0.6), -0.8);
}

TEST(AssocLegendre, MatchesRodriguesOracle) {
  const double ref = rodrigues_legendre(5, 3, 0.3);
  EXPECT_NEAR(assoc_legendre(5, 3, 0.3), ref, 1e-10 * std::abs(ref));
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int n = 0; n <= 8; ++n)
    for (int m = 0; m <= n; ++m)
      for (int k = 0; k < 5; ++k) {
        const double x = u(rng);
        const double r = rodrigues_legendre(n, m, x);
        EXPECT_NEAR(assoc_legendre(n, m, x), r, 1e-10 * std::max(1.0, std::abs(r))) << n << "," << m << " at " << x;
      }
}

TEST(AssocLegendre, RejectsInvalidArguments) {
  EXPECT_THROW(assoc_legendre(2, 3, 0.1), InvalidInput);
  EXPECT_THROW(assoc_legendre(2, -1, 0.1), InvalidInput);
  EXPECT_THROW(assoc_legendre(2, 1, 1.5), InvalidInput);
}

TEST(SphericalHarmonics, KnownValues) {
  EXPECT_NEAR(std::abs(sh_complex(0, 0, 1.2, 3.4) - 1.0 / std::sqrt(4.0 * kPi)), 0.0, 1e-15);
  EXPECT_NEAR(sh_complex(0, 0, 0.0, 0.0).real(), 0.2820948, 1e-7);
  EXPECT_NEAR(sh_complex(1, 0, 0.0, 2.0).real(), 0.4886025, 1e-7);
  const auto y = sh_complex(2, 1, kPi / 3, kPi / 4);
  EXPECT_NEAR(std::abs(y - rodrigues_sh(2, 1, kPi / 3, kPi / 4)), 0.0, 1e-10);
}

TEST(SphericalHarmonics, MatchesOracleIncludingNegativeOrders) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> th(0.0, kPi), ph(0.0, 2 * kPi);
  for (int n = 0; n <= 5; ++n)
    for (int m = -n; m <= n; ++m) {
      const double t = th(rng), p = ph(rng);
      EXPECT_NEAR(std::abs(sh_complex(n, m, t, p) - rodrigues_sh(n, m, t, p)), 0.0, 1e-10);
    }
  EXPECT_THROW(sh_complex(2, 3, 0.1, 0.1), InvalidInput);
}

TEST(SphericalHarmonics, ConjugationSymmetry) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> th(0.0, kPi), ph(0.0, 2 * kPi);
  for (int k = 0; k < 20; ++k) {
    const double t = th(rng), p = ph(rng);
    for (int n = 0; n <= 5; ++n)
      for (int m = 1; m <= n; ++m) {
        const auto lhs = sh_complex(n, -m, t, p);
        const auto rhs = (m % 2 ? -1.0 : 1.0) * std::conj(sh_complex(n, m, t, p));
        EXPECT_NEAR(std::abs(lhs - rhs), 0.0, 1e-15);
      }
  }
}

TEST(SphericalHarmonics, AdditionTheorem) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> z(-1.0, 1.0), ph(0.0, 2 * kPi);
  for (int k = 0; k < 100; ++k) {
    const double t = std::acos(z(rng)), p = ph(rng);
    for (int n = 0; n <= 5; ++n) {
      double s = 0.0;
      for (int m = -n; m <= n; ++m) s += std::norm(sh_complex(n, m, t, p));
      EXPECT_NEAR(s, (2 * n + 1) / (4 * kPi), 1e-10);
    }
  }
}

TEST(SphericalHarmonics, OrthonormalityByQuadrature) {
  // Gauss-Legendre in cos(theta) and the trapezoid rule in phi integrate
  // products up to degree 10 exactly.
  const auto [nodes, weights] = gauss_legendre(12);
  const int n_phi = 24;
  std::vector<std::pair<int, int>> nm;
  for (int n = 0; n <= 5; ++n)
    for (int m = -n; m <= n; ++m) nm.push_back({n, m});
  for (const auto& [n1, m1] : nm)
    for (const auto& [n2, m2] : nm) {
      std::complex<double> acc{};
      for (std::size_t i = 0; i < nodes.size(); ++i)
        for (int j = 0; j < n_phi; ++j) {
          const double t = std::acos(nodes[i]), p = 2 * kPi * j / n_phi;
          acc += weights[i] * (2 * kPi / n_phi) * sh_complex(n1, m1, t, p) * std::conj(sh_complex(n2, m2, t, p));
        }
      const double expected = (n1 == n2 && m1 == m2) ? 1.0 : 0.0;
      EXPECT_NEAR(std::abs(acc - expected), 0.0, 1e-6) << n1 << "," << m1 << " x " << n2 << "," << m2;
    }
}

TEST(EncodeSh, DimensionsAndLayout) {
  const DoAClue d(0.7, 1.9);
  EXPECT_EQ(encode_sh(d, 5).dim(), 72u);
  EXPECT_EQ(sh_embedding_dim(5), 72u);
  const auto e0 = encode_sh(d, 0);
  ASSERT_EQ(e0.dim(), 2u);
  EXPECT_NEAR(e0.vector[0], 1.0 / std::sqrt(4 * kPi), 1e-15);
  EXPECT_EQ(e0.vector[1], 0.0);
  // n-major, m ascending: index 1 holds Y_1^{-1}, index 3 holds Y_1^1.
  const auto e1 = encode_sh(d, 1);
  EXPECT_DOUBLE_EQ(e1.vector[1], sh_complex(1, -1, 0.7, 1.9).real());
  EXPECT_DOUBLE_EQ(e1.vector[4 + 3], sh_complex(1, 1, 0.7, 1.9).imag());
}

TEST(EncodeSh, AzimuthPeriodicity) {
  for (double az : {0.0, 0.4, 3.0, 6.0}) {
    const auto a = encode_sh(DoAClue(1.1, az), 5).vector;
    const auto b = encode_sh(DoAClue(1.1, az + 2 * kPi), 5).vector;
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i], b[i], 1e-12);
  }
}

TEST(EncodeSh, DotProductDependsOnlyOnAngularDistance) {
  // <e(d), e(d')> = sum_n (2n + 1) / (4 pi) P_n(cos gamma).
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> z(-1.0, 1.0), ph(0.0, 2 * kPi);
  for (int k = 0; k < 50; ++k) {
    const DoAClue a(std::acos(z(rng)), ph(rng)), b(std::acos(z(rng)), ph(rng));
    const auto ea = encode_sh(a, 5).vector, eb = encode_sh(b, 5).vector;
    double dot = 0.0;
    for (std::size_t i = 0; i < ea.size(); ++i) dot += ea[i] * eb[i];
    const double c = std::cos(angular_distance(a, b));
    double expected = 0.0;
    for (int n = 0; n <= 5; ++n) expected += (2 * n + 1) / (4 * kPi) * rodrigues_legendre(n, 0, c);
    EXPECT_NEAR(dot, expected, 1e-8);
  }
}

TEST(EncodeSh, LipschitzContinuity) {
  // Difference quotients at several scales stay under an analytic bound.
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> th(0.05, kPi - 0.05), ph(0.0, 2 * kPi), dir(-1.0, 1.0);
  double worst = 0.0;
  for (int k = 0; k < 500; ++k) {
    const DoAClue a(th(rng), ph(rng));
    for (double step : {1e-2, 1e-4, 1e-6}) {
      const DoAClue b(std::clamp(a.polar() + step * dir(rng), 0.0, kPi), a.azimuth() + step * dir(rng));
      const auto ea = encode_sh(a, 5).vector, eb = encode_sh(b, 5).vector;
      double dist = 0.0;
      for (std::size_t i = 0; i < ea.size(); ++i) dist += (ea[i] - eb[i]) * (ea[i] - eb[i]);
      const double gamma = angular_distance(a, b);
      if (gamma > 1e-9) worst = std::max(worst, std::sqrt(dist) / gamma);
    }
  }
  // Full surface-gradient norm sqrt(sum_n (2n+1) n(n+1) / (4 pi)) bounds any
  // directional rate of change.
  double bound = 0.0;
  for (int n = 0; n <= 5; ++n) bound += (2 * n + 1) / (4 * kPi) * n * (n + 1);
  EXPECT_LE(worst, std::sqrt(bound) * 1.01);
}

TEST(EncodeCycPos, Examples) {
  const auto e = encode_cyc_pos(DoAClue(0.0, 0.0), 8);
  const std::vector<double> expected{0, 1, 0, 1, 0, 1, 0, 1};
  EXPECT_EQ(e.vector, expected);
  const auto big = encode_cyc_pos(DoAClue(0.9, 2.0), 72);
  ASSERT_EQ(big.dim(), 72u);
  EXPECT_DOUBLE_EQ(big.vector[0], std::sin(2.0));
  EXPECT_DOUBLE_EQ(big.vector[36], std::sin(0.9));
  EXPECT_DOUBLE_EQ(big.vector[36 + 3], std::cos(2 * 0.9));
  EXPECT_THROW(encode_cyc_pos(DoAClue(0.1, 0.1), 6), InvalidInput);
  const auto a = encode_cyc_pos(DoAClue::from_degrees(10, 0), 16).vector;
  const auto b = encode_cyc_pos(DoAClue::from_degrees(10, 360), 16).vector;
  EXPECT_EQ(a, b);
}

TEST(DoA, ConversionsAndValidation) {
  const auto up = DoAClue::from_degrees(90, 0);
  EXPECT_NEAR(up.polar(), 0.0, 1e-15);
  const auto horizon = DoAClue::from_degrees(0, -90);
  EXPECT_NEAR(horizon.polar(), kPi / 2, 1e-15);
  EXPECT_NEAR(horizon.azimuth(), 1.5 * kPi, 1e-15);
  EXPECT_NEAR(angular_distance(up, horizon), kPi / 2, 1e-15);
  EXPECT_THROW(DoAClue(-0.1, 0.0), InvalidInput);
  EXPECT_THROW(DoAClue(0.1, std::nan("")), InvalidInput);
}

TEST(TimeVaryingClue, Interpolation) {
  const auto emb = encode_sh(DoAClue(0.5, 0.5), 2);
  const std::vector<double> ones(7, 1.0);
  const auto all = build_time_varying_clue(emb, ones, 11);
  for (std::size_t t = 0; t < 11; ++t)
    for (std::size_t d = 0; d < emb.dim(); ++d) EXPECT_EQ(all.row(t)[d], emb.vector[d]);

  const std::vector<double> ramp{0.0, 1.0};
  const auto r = build_time_varying_clue(emb, ramp, 3);
  ASSERT_EQ(r.frames, 3u);
  EXPECT_EQ(r.activation_source_len, 2u);
  for (std::size_t d = 0; d < emb.dim(); ++d) {
    EXPECT_EQ(r.row(0)[d], 0.0);
    EXPECT_DOUBLE_EQ(r.row(1)[d], 0.5 * emb.vector[d]);
    EXPECT_DOUBLE_EQ(r.row(2)[d], emb.vector[d]);
  }

  const auto z = build_time_varying_clue(emb, std::vector<double>(5, 0.0), 9);
  for (double v : z.matrix) EXPECT_EQ(v, 0.0);
  EXPECT_THROW(build_time_varying_clue(emb, std::vector<double>{0.2, 1.2}, 4), InvalidInput);
}

TEST(TimeVaryingClue, RowsAreNonNegativeScalings) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> act(37);
  for (double& a : act) a = u(rng);
  const auto emb = encode_sh(DoAClue(2.0, 4.0), 5);
  const auto c = build_time_varying_clue(emb, act, 251);
  for (std::size_t t = 0; t < c.frames; ++t) {
    ASSERT_GE(c.scale[t], 0.0);
    ASSERT_LE(c.scale[t], 1.0);
    for (std::size_t d = 0; d < c.dim; ++d) ASSERT_EQ(c.row(t)[d], c.scale[t] * emb.vector[d]);
  }
}

}  // namespace
}  // namespace soundcompass::clue
