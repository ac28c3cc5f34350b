// Copyright 2026 The SoundCompass Toolkit Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "soundcompass/metrics.hpp"
#include "test_util.hpp"

namespace soundcompass::metrics {
namespace {

constexpr double kFs = 16000.0;

MultichannelWaveform delayed_pair(const std::vector<double>& x, double delay) {
  return MultichannelWaveform::from_channels({x, dsp::delay_signal(x, delay)}, 16000);
}

// Time-domain cross-correlation sum_n x_i[n] x_j[n + lag] with the same
// parabolic refinement, searched over +/- max_lag samples.
double brute_force_itd(const MultichannelWaveform& w, std::size_t i, std::size_t j, long max_lag) {
  const auto a = w.channel(i), b = w.channel(j);
  const long n = static_cast<long>(w.samples());
  auto xc = [&](long lag) {
    double s = 0.0;
    for (long k = 0; k < n; ++k)
      if (k + lag >= 0 && k + lag < n) s += a[static_cast<std::size_t>(k)] * b[static_cast<std::size_t>(k + lag)];
    return s;
  };
  long best = -max_lag;
  for (long lag = -max_lag; lag <= max_lag; ++lag)
    if (xc(lag) > xc(best)) best = lag;
  const double ym = xc(best - 1), y0 = xc(best), yp = xc(best + 1);
  const double denom = ym - 2.0 * y0 + yp;
  const double delta = denom < 0.0 ? 0.5 * (ym - yp) / denom : 0.0;
  return (static_cast<double>(best) + delta) / kFs;
}

TEST(Snr, Examples) {
  std::mt19937_64 rng(1);
  const auto ref = testing::gaussian_noise(1000, rng);
  EXPECT_EQ(snr(ref, ref), kDbCap);
  EXPECT_EQ(si_snr(ref, ref), kDbCap);

  // Noise orthogonal to ref with equal energy.
  auto n = testing::gaussian_noise(1000, rng);
  const double proj = dsp::dot(n, ref) / dsp::energy(ref);
  for (std::size_t i = 0; i < n.size(); ++i) n[i] -= proj * ref[i];
  const double scale = std::sqrt(dsp::energy(ref) / dsp::energy(n));
  std::vector<double> est(1000);
  for (std::size_t i = 0; i < est.size(); ++i) est[i] = ref[i] + scale * n[i];
  EXPECT_NEAR(snr(est, ref), 0.0, 1e-10);
  EXPECT_NEAR(si_snr(est, ref), 0.0, 1e-10);
}

// Float32-quantised samples times a scale with few significant bits give an
// exactly proportional signal, which fma confirms.
bool exactly_scaled(const std::vector<double>& x, double k, const std::vector<double>& kx) {
  for (std::size_t i = 0; i < x.size(); ++i)
    if (std::fma(k, x[i], -kx[i]) != 0.0) return false;
  return true;
}

TEST(Snr, ScaleInvarianceOfSiSnr) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 50; ++trial) {
    const auto ref = testing::gaussian_noise(500, rng);
    auto est = testing::gaussian_noise(500, rng);
    for (double& v : est) v = static_cast<float>(v);
    const double base = si_snr(est, ref);
    for (double k : {2.0, -1.0, 2.5, -2.5, -7.0, 0.375, 1250.0}) {
      std::vector<double> scaled(est);
      for (double& v : scaled) v *= k;
      ASSERT_TRUE(exactly_scaled(est, k, scaled)) << "k = " << k;
      EXPECT_EQ(si_snr(scaled, ref), base) << "k = " << k;
    }
    // 0.3 is not representable, so the scaled samples are rounded and only
    // agree to machine precision.
    std::vector<double> scaled(est);
    for (double& v : scaled) v *= 0.3;
    EXPECT_NEAR(si_snr(scaled, ref), base, 1e-12);
  }
}

TEST(Snr, RejectsZeroReferenceAndLengthMismatch) {
  const std::vector<double> zero(10, 0.0), one(10, 1.0), short_one(9, 1.0);
  EXPECT_THROW(snr(one, zero), InvalidInput);
  EXPECT_THROW(si_snr(one, zero), InvalidInput);
  EXPECT_THROW(snr(short_one, one), InvalidInput);
}

TEST(Improvement, MixtureAgainstItselfIsZero) {
  std::mt19937_64 rng(3);
  const auto ref = testing::random_waveform(4, 800, rng);
  const auto mix = testing::random_waveform(4, 800, rng);
  EXPECT_EQ(snr_i(mix, ref, mix), 0.0);
  EXPECT_EQ(si_snr_i(mix, ref, mix), 0.0);
}

TEST(Improvement, CapIsAppliedBeforeSubtraction) {
  // Mixture at -3 dB SNR; a perfect estimate reports 100 - (-3) = 103 dB.
  std::mt19937_64 rng(4);
  const auto ref_ch = testing::gaussian_noise(2000, rng);
  const double target_ratio = std::pow(10.0, 0.3);
  auto err = testing::gaussian_noise(2000, rng);
  const double k = std::sqrt(target_ratio * dsp::energy(ref_ch) / dsp::energy(err));
  std::vector<double> mix_ch(2000);
  for (std::size_t i = 0; i < 2000; ++i) mix_ch[i] = ref_ch[i] + k * err[i];
  const auto ref = MultichannelWaveform::from_channels({ref_ch}, 16000);
  const auto mix = MultichannelWaveform::from_channels({mix_ch}, 16000);
  EXPECT_NEAR(snr(mix_ch, ref_ch), -3.0, 1e-9);
  EXPECT_NEAR(snr_i(ref, ref, mix), 103.0, 1e-9);
}

TEST(Ild, Examples) {
  std::mt19937_64 rng(5);
  const auto x = testing::gaussian_noise(1000, rng);
  std::vector<double> half(x);
  for (double& v : half) v *= 0.5;
  const auto w = MultichannelWaveform::from_channels({x, half, x, std::vector<double>(1000, 0.0)}, 16000);
  EXPECT_NEAR(*ild(w, 0, 1), 10.0 * std::log10(4.0), 1e-12);
  EXPECT_NEAR(*ild(w, 0, 1), 6.0206, 1e-4);
  EXPECT_EQ(*ild(w, 0, 2), 0.0);
  EXPECT_FALSE(ild(w, 0, 3).has_value());
  EXPECT_THROW(ild(w, 1, 1), InvalidInput);
}

TEST(Ipd, IdenticalChannelsGiveZero) {
  std::mt19937_64 rng(6);
  const auto x = testing::gaussian_noise(2000, rng);
  const auto w = MultichannelWaveform::from_channels({x, x}, 16000);
  const auto phase = ipd(spectral::stft(w, {0.5, 0.25, 512}), 0, 1);
  for (double v : phase.data()) EXPECT_EQ(v, 0.0);
}

TEST(GccPhat, FiveSampleDelay) {
  std::mt19937_64 rng(7);
  const auto w = delayed_pair(testing::gaussian_noise(4000, rng), 5.0);
  const auto itd = gcc_phat_itd(w, 0, 1, 1e-3);
  ASSERT_TRUE(itd.has_value());
  EXPECT_NEAR(*itd * 1e6, 312.5, 0.25 / kFs * 1e6);
}

TEST(GccPhat, MatchesBruteForceCorrelationOnDelayedNoise) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> d(-4.0, 4.0);
  for (int trial = 0; trial < 100; ++trial) {
    const double delay = trial % 4 == 0 ? std::round(d(rng)) : d(rng);
    const auto w = delayed_pair(testing::gaussian_noise(2048, rng), delay);
    const auto fast = gcc_phat_itd(w, 0, 1, 6.0 / kFs);
    ASSERT_TRUE(fast.has_value());
    const double slow = brute_force_itd(w, 0, 1, 6);
    EXPECT_NEAR(*fast, slow, 0.25 / kFs) << "delay " << delay;
    EXPECT_NEAR(*fast, delay / kFs, 0.25 / kFs) << "delay " << delay;
  }
}

TEST(GccPhat, AntisymmetricUnderPairSwap) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> d(-3.0, 3.0);
  for (int trial = 0; trial < 20; ++trial) {
    const auto w = delayed_pair(testing::gaussian_noise(1024, rng), d(rng));
    EXPECT_NEAR(*gcc_phat_itd(w, 0, 1, 5e-4), -*gcc_phat_itd(w, 1, 0, 5e-4), 1e-12);
  }
}

TEST(GccPhat, SilentChannelIsUndefined) {
  const auto w = MultichannelWaveform::from_channels({std::vector<double>(100, 0.1), std::vector<double>(100, 0.0)},
                                                     16000);
  EXPECT_FALSE(gcc_phat_itd(w, 0, 1, 1e-3).has_value());
}

TEST(SpatialErrors, SelfComparisonIsZero) {
  std::mt19937_64 rng(10);
  for (int trial = 0; trial < 5; ++trial) {
    const auto x = testing::random_waveform(4, 4000, rng);
    const auto e = spatial_errors(x, x);
    EXPECT_EQ(e.d_ild_db, 0.0);
    EXPECT_EQ(e.d_ipd_rad, 0.0);
    EXPECT_EQ(e.d_itd_us, 0.0);
    EXPECT_EQ(e.pairs.size(), 6u);
    EXPECT_EQ(e.undefined_pairs, 0u);
  }
}

TEST(SpatialErrors, OneChannelScaledByTwo) {
  std::mt19937_64 rng(11);
  const auto ref = testing::random_waveform(4, 4000, rng);
  auto est = ref;
  for (double& v : est.channel(2)) v *= 2.0;
  const auto e = spatial_errors(est, ref);
  EXPECT_NEAR(e.d_ipd_rad, 0.0, 1e-12);
  EXPECT_NEAR(e.d_itd_us, 0.0, 1e-9);
  for (const auto& p : e.pairs) {
    const bool touches = p.i == 2 || p.j == 2;
    EXPECT_NEAR(*p.d_ild_db, touches ? 20.0 * std::log10(2.0) : 0.0, 1e-9);
  }
  // Three of six pairs contain the scaled channel.
  EXPECT_NEAR(e.d_ild_db, 0.5 * 20.0 * std::log10(2.0), 1e-9);
}

TEST(SpatialErrors, SilentChannelMarksPairsUndefined) {
  std::mt19937_64 rng(12);
  auto x = testing::random_waveform(3, 2000, rng);
  for (double& v : x.channel(1)) v = 0.0;
  const auto e = spatial_errors(x, x);
  EXPECT_EQ(e.undefined_pairs, 2u);
  EXPECT_TRUE(std::isfinite(e.d_ild_db));
}

TEST(Evaluate, ReportAndCsv) {
  std::mt19937_64 rng(13);
  const auto ref = testing::random_waveform(4, 3000, rng);
  auto mix = ref;
  const auto noise = testing::random_waveform(4, 3000, rng);
  for (std::size_t i = 0; i < mix.data().size(); ++i) mix.data()[i] += noise.data()[i];
  const auto r = evaluate(ref, ref, mix);
  EXPECT_GT(r.snri_db, 90.0);
  EXPECT_EQ(r.d_itd_us, 0.0);
  std::ostringstream os;
  write_report_csv(os, {{"s0", "0", r}, {"s1", "1", evaluate(mix, ref, mix)}});
  const std::string text = os.str();
  EXPECT_EQ(text.rfind("scene_id,source_id,snri_db,si_snri_db,d_ild_db,d_ipd_rad,d_itd_us\n", 0), 0u);
  EXPECT_NE(text.find("\nmean,all,"), std::string::npos);
  EXPECT_NE(text.find("\ns1,1,0.000000,0.000000,"), std::string::npos);
}

TEST(Loss, BceAtTargetIsNearZero) {
  const std::vector<double> t{0, 1, 1, 0, 1};
  EXPECT_LE(bce_loss(t, t), 1e-6);
  const std::vector<double> off{0.1, 0.9, 0.8, 0.2, 0.7};
  EXPECT_GT(bce_loss(off, t), bce_loss(t, t));
  const std::vector<double> bad{0.5, 1.2, 0, 0, 0};
  EXPECT_THROW(bce_loss(bad, t), InvalidInput);
  const std::vector<double> soft{0.5, 1, 1, 0, 1};
  EXPECT_THROW(bce_loss(t, soft), InvalidInput);
}

TEST(Loss, BceMinimisedAtTarget) {
  std::mt19937_64 rng(14);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const std::vector<double> t{1, 0, 1, 1, 0, 0, 1, 0};
  const double at_target = bce_loss(t, t);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> p(t.size());
    for (double& v : p) v = u(rng);
    EXPECT_GE(bce_loss(p, t), at_target);
  }
}

TEST(Loss, PerfectEstimatesHitTheCappedFloor) {
  std::mt19937_64 rng(15);
  const auto d = testing::random_waveform(2, 500, rng);
  const auto r = testing::random_waveform(2, 500, rng);
  const std::vector<double> sed{1, 0, 1};
  const auto l = combined_loss(d, r, d, r, sed, sed);
  EXPECT_NEAR(l.total, -300.0, 1e-5);
  EXPECT_LE(l.bce, 1e-6);
}

TEST(Loss, WeightsCombineLinearly) {
  std::mt19937_64 rng(16);
  const auto d = testing::random_waveform(2, 500, rng);
  const auto r = testing::random_waveform(2, 500, rng);
  const auto de = testing::random_waveform(2, 500, rng);
  const auto re = testing::random_waveform(2, 500, rng);
  const auto full = combined_loss(de, re, d, r);
  const auto snr_only = combined_loss(de, re, d, r, {}, {}, {0.9, 0.0});
  double snr_sum = 0.0, si_sum = 0.0;
  for (int k = 0; k < 3; ++k) {
    snr_sum += full.snr_db[k];
    si_sum += full.si_snr_db[k];
  }
  EXPECT_NEAR(full.total, -0.9 * snr_sum - 0.1 * si_sum, 1e-9);
  EXPECT_NEAR(full.total - snr_only.total, -0.1 * si_sum, 1e-9);
}

}  // namespace
}  // namespace soundcompass::metrics
