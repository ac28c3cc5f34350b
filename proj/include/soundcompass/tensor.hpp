// Copyright 2026 The SoundCompass Toolkit Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace soundcompass {

// Dense row-major [channels x frames x bins] real tensor.
class Tensor3 {
 public:
  Tensor3() = default;
  Tensor3(std::size_t channels, std::size_t frames, std::size_t bins, double fill = 0.0)
      : c_(channels), t_(frames), f_(bins), data_(channels * frames * bins, fill) {}

  std::size_t channels() const { return c_; }
  std::size_t frames() const { return t_; }
  std::size_t bins() const { return f_; }
  std::size_t size() const { return data_.size(); }

  double& operator()(std::size_t c, std::size_t t, std::size_t f) {
    return data_[(c * t_ + t) * f_ + f];
  }
  double operator()(std::size_t c, std::size_t t, std::size_t f) const {
    return data_[(c * t_ + t) * f_ + f];
  }

  // Contiguous bin row for one (channel, frame).
  std::span<double> row(std::size_t c, std::size_t t) { return {data_.data() + (c * t_ + t) * f_, f_}; }
  std::span<const double> row(std::size_t c, std::size_t t) const {
    return {data_.data() + (c * t_ + t) * f_, f_};
  }

  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  bool same_shape(const Tensor3& o) const { return c_ == o.c_ && t_ == o.t_ && f_ == o.f_; }
  bool operator==(const Tensor3&) const = default;

 private:
  std::size_t c_ = 0, t_ = 0, f_ = 0;
  std::vector<double> data_;
};

}  // namespace soundcompass
