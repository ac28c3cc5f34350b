// Copyright 2026 The SoundCompass Toolkit Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "soundcompass/error.hpp"

namespace soundcompass {

// M channels x S samples, stored channel-major. All channels share the
// same length by construction.
class MultichannelWaveform {
 public:
  MultichannelWaveform() = default;
  MultichannelWaveform(std::size_t channels, std::size_t samples, int sample_rate)
      : channels_(channels), samples_(samples), sample_rate_(sample_rate),
        data_(channels * samples, 0.0) {
    detail::require(sample_rate > 0, "sample_rate must be positive");
  }

  static MultichannelWaveform from_channels(const std::vector<std::vector<double>>& chans,
                                            int sample_rate) {
    detail::require(!chans.empty(), "waveform needs at least one channel");
    MultichannelWaveform w(chans.size(), chans.front().size(), sample_rate);
    for (std::size_t m = 0; m < chans.size(); ++m) {
      detail::require(chans[m].size() == w.samples_, "channels differ in length");
      std::copy(chans[m].begin(), chans[m].end(), w.channel(m).begin());
    }
    return w;
  }

  std::size_t channels() const { return channels_; }
  std::size_t samples() const { return samples_; }
  int sample_rate() const { return sample_rate_; }

  std::span<double> channel(std::size_t m) {
    return {data_.data() + m * samples_, samples_};
  }
  std::span<const double> channel(std::size_t m) const {
    return {data_.data() + m * samples_, samples_};
  }

  double& at(std::size_t m, std::size_t n) { return data_[m * samples_ + n]; }
  double at(std::size_t m, std::size_t n) const { return data_[m * samples_ + n]; }

  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  bool all_finite() const {
    for (double v : data_)
      if (!std::isfinite(v)) return false;
    return true;
  }

  double peak() const {
    double p = 0.0;
    for (double v : data_) p = std::max(p, std::abs(v));
    return p;
  }

  bool operator==(const MultichannelWaveform&) const = default;

 private:
  std::size_t channels_ = 0;
  std::size_t samples_ = 0;
  int sample_rate_ = 16000;
  std::vector<double> data_;
};

}  // namespace soundcompass
