#pragma once

#include <atomic>
#include <filesystem>
#include <random>
#include <string>

#include <gtest/gtest.h>
#include <unistd.h>

#include "t2mx/core/clip.hpp"
#include "t2mx/core/error.hpp"
#include "t2mx/core/pose.hpp"
#include "t2mx/core/rotation.hpp"

namespace t2mx::testing {

// Scratch directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("t2mx_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline Eigen::Matrix3d random_rotation(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  const double w = n(rng), x = n(rng), y = n(rng), z = n(rng);
  return core::rotation_from_gaussian_quaternion(w, x, y, z);
}

// Random channels with well-formed 6D blocks and binary contacts.
inline core::FrameMatrix random_channels(core::Modality m, int frames, std::mt19937_64& rng) {
  using namespace core;
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  FrameMatrix x(frames, channel_width(m));
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = static_cast<float>(u(rng));
  auto put6 = [&](int t, int col) {
    const Vector6d v = rot6d_from_matrix(random_rotation(rng));
    for (int k = 0; k < 6; ++k) x(t, col + k) = static_cast<float>(v[k]);
  };
  for (int t = 0; t < frames; ++t) {
    if (m == Modality::kBody) {
      for (int j = 0; j < kBodyJoints; ++j) put6(t, layout::body_rot(j));
      for (int k = 0; k < 4; ++k) x(t, layout::kContacts + k) = u(rng) > 0.0 ? 1.0f : 0.0f;
      x(t, layout::kRoot + 3) = 0.9f;
    } else if (m == Modality::kHand) {
      for (int j = 0; j < kHandJoints; ++j) put6(t, layout::hand_rot(j));
    } else {
      put6(t, layout::kJaw);
    }
  }
  return x;
}

inline core::MotionClip random_clip(const std::string& id, int frames, std::mt19937_64& rng,
                                    bool hand = true, bool face = true) {
  using namespace core;
  return MotionClip(id, 30.0, random_channels(Modality::kBody, frames, rng),
                    hand ? std::optional<FrameMatrix>(random_channels(Modality::kHand, frames, rng))
                         : std::nullopt,
                    face ? std::optional<FrameMatrix>(random_channels(Modality::kFace, frames, rng))
                         : std::nullopt,
                    {"a person walks", "someone walks"});
}

template <typename F>
ErrorCode error_code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected t2mx::Error";
  return ErrorCode::kIo;
}

}  // namespace t2mx::testing
