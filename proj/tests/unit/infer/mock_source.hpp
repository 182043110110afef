#pragma once

#include <functional>
#include <random>

#include "t2mx/infer/sampler.hpp"

namespace t2mx::testing {

// Logits supplied by a callback of (step, branch); step is the 1-based position.
class MockSource final : public infer::LogitSource {
 public:
  using Fn = std::function<std::vector<double>(int step, int branch)>;
  MockSource(std::array<int, 3> codes, Fn fn, int max_tokens = 128)
      : codes_(codes), fn_(std::move(fn)), max_(max_tokens) {}
  std::array<int, 3> codes() const override { return codes_; }
  int max_tokens() const override { return max_; }
  std::array<std::vector<double>, 3> next(const std::vector<int>& prefix) override {
    const int step = static_cast<int>(prefix.size()) + 1;
    return {fn_(step, 0), fn_(step, 1), fn_(step, 2)};
  }

 private:
  std::array<int, 3> codes_;
  Fn fn_;
  int max_;
};

// Logits that favour `token` by a wide margin.
inline std::vector<double> peaked(int classes, int token, double margin = 5.0) {
  std::vector<double> v(static_cast<std::size_t>(classes), 0.0);
  v[static_cast<std::size_t>(token)] = margin;
  return v;
}

}  // namespace t2mx::testing
