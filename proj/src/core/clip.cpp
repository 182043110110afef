#include "t2mx/core/clip.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "t2mx/core/error.hpp"
#include "t2mx/core/random.hpp"
#include "t2mx/core/pose.hpp"

namespace t2mx::core {

int channel_width(Modality m) {
  switch (m) {
    case Modality::kBody: return layout::kBodyWidth;
    case Modality::kHand: return layout::kHandWidth;
    case Modality::kFace: return layout::kFaceWidth;
  }
  return 0;
}

std::string_view modality_name(Modality m) {
  switch (m) {
    case Modality::kBody: return "body";
    case Modality::kHand: return "hand";
    case Modality::kFace: return "face";
  }
  return "?";
}

Modality modality_from_name(std::string_view name) {
  for (Modality m : kModalities) {
    if (modality_name(m) == name) return m;
  }
  raise(ErrorCode::kConfig, "unknown modality '" + std::string(name) + "'");
}

std::string_view split_name(Split s) {
  switch (s) {
    case Split::kTrain: return "train";
    case Split::kVal: return "val";
    case Split::kTest: return "test";
  }
  return "?";
}

Split split_from_name(std::string_view name) {
  if (name == "train") return Split::kTrain;
  if (name == "val") return Split::kVal;
  if (name == "test") return Split::kTest;
  raise(ErrorCode::kMalformed, "unknown split '" + std::string(name) + "'");
}

MotionClip::MotionClip(std::string id, double fps, FrameMatrix body, std::optional<FrameMatrix> hand,
                       std::optional<FrameMatrix> face, std::vector<std::string> text)
    : id_(std::move(id)),
      fps_(fps),
      body_(std::move(body)),
      hand_(std::move(hand)),
      face_(std::move(face)),
      text_(std::move(text)) {
  require(fps_ > 0.0, ErrorCode::kShape, "clip " + id_ + ": fps must be positive");
  require(body_.cols() == layout::kBodyWidth, ErrorCode::kShape,
          "clip " + id_ + ": body width " + std::to_string(body_.cols()));
  const auto t = body_.rows();
  require(t >= 1, ErrorCode::kShape, "clip " + id_ + ": no frames");
  if (hand_) {
    require(hand_->cols() == layout::kHandWidth, ErrorCode::kShape, "clip " + id_ + ": hand width");
    require(hand_->rows() == t, ErrorCode::kShape, "clip " + id_ + ": hand frame count");
  }
  if (face_) {
    require(face_->cols() == layout::kFaceWidth, ErrorCode::kShape, "clip " + id_ + ": face width");
    require(face_->rows() == t, ErrorCode::kShape, "clip " + id_ + ": face frame count");
  }
}

bool MotionClip::has(Modality m) const {
  switch (m) {
    case Modality::kBody: return true;
    case Modality::kHand: return hand_.has_value();
    case Modality::kFace: return face_.has_value();
  }
  return false;
}

const FrameMatrix& MotionClip::channels(Modality m) const {
  switch (m) {
    case Modality::kBody: return body_;
    case Modality::kHand:
      require(hand_.has_value(), ErrorCode::kContract, "clip " + id_ + " has no hand channels");
      return *hand_;
    case Modality::kFace:
      require(face_.has_value(), ErrorCode::kContract, "clip " + id_ + " has no face channels");
      return *face_;
  }
  raise(ErrorCode::kContract, "bad modality");
}

MotionClip MotionClip::with_id(std::string id) const {
  return MotionClip(std::move(id), fps_, body_, hand_, face_, text_);
}

MotionClip MotionClip::with_text(std::vector<std::string> text) const {
  return MotionClip(id_, fps_, body_, hand_, face_, std::move(text));
}

MotionClip MotionClip::with_fps(double fps) const {
  return MotionClip(id_, fps, body_, hand_, face_, text_);
}

MotionClip MotionClip::with_channels(Modality m, std::optional<FrameMatrix> channels) const {
  switch (m) {
    case Modality::kBody:
      require(channels.has_value(), ErrorCode::kContract, "body channels cannot be removed");
      return MotionClip(id_, fps_, std::move(*channels), hand_, face_, text_);
    case Modality::kHand: return MotionClip(id_, fps_, body_, std::move(channels), face_, text_);
    case Modality::kFace: return MotionClip(id_, fps_, body_, hand_, std::move(channels), text_);
  }
  raise(ErrorCode::kContract, "bad modality");
}

FrameMatrix NormalizationStats::normalize(Modality m, const FrameMatrix& x) const {
  const ChannelStats& s = get(m);
  require(!s.empty(), ErrorCode::kContract,
          "no normalization statistics for " + std::string(modality_name(m)));
  require(x.cols() == s.mean.size(), ErrorCode::kShape, "normalize width mismatch");
  FrameMatrix out(x.rows(), x.cols());
  for (Eigen::Index c = 0; c < x.cols(); ++c) {
    out.col(c) = (x.col(c).array() - s.mean[c]) / s.std[c];
  }
  return out;
}

FrameMatrix NormalizationStats::denormalize(Modality m, const FrameMatrix& x) const {
  const ChannelStats& s = get(m);
  require(!s.empty(), ErrorCode::kContract,
          "no normalization statistics for " + std::string(modality_name(m)));
  require(x.cols() == s.mean.size(), ErrorCode::kShape, "denormalize width mismatch");
  FrameMatrix out(x.rows(), x.cols());
  for (Eigen::Index c = 0; c < x.cols(); ++c) {
    out.col(c) = x.col(c).array() * s.std[c] + s.mean[c];
  }
  return out;
}

MotionDataset MotionDataset::subset(Split s) const {
  MotionDataset out;
  out.stats = stats;
  for (std::size_t i = 0; i < clips.size(); ++i) {
    if (splits[i] == s) {
      out.clips.push_back(clips[i]);
      out.splits.push_back(s);
    }
  }
  return out;
}

MotionDataset MotionDataset::with_modality(Modality m) const {
  MotionDataset out;
  out.stats = stats;
  for (std::size_t i = 0; i < clips.size(); ++i) {
    if (clips[i].has(m)) {
      out.clips.push_back(clips[i]);
      out.splits.push_back(splits[i]);
    }
  }
  return out;
}

std::size_t MotionDataset::count(Split s) const {
  return static_cast<std::size_t>(std::count(splits.begin(), splits.end(), s));
}

std::vector<Split> make_split(std::size_t clip_count, std::uint64_t seed) {
  std::vector<std::size_t> order(clip_count);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  rng.shuffle(order.begin(), order.end());
  const auto n_val = static_cast<std::size_t>(std::llround(0.1 * static_cast<double>(clip_count)));
  const auto n_test = n_val;
  const std::size_t n_train = clip_count - n_val - n_test;
  std::vector<Split> splits(clip_count, Split::kTrain);
  for (std::size_t k = 0; k < clip_count; ++k) {
    if (k >= n_train + n_val) {
      splits[order[k]] = Split::kTest;
    } else if (k >= n_train) {
      splits[order[k]] = Split::kVal;
    }
  }
  return splits;
}

NormalizationStats compute_normalization(const MotionDataset& dataset) {
  NormalizationStats stats;
  for (Modality m : kModalities) {
    const int width = channel_width(m);
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(width);
    Eigen::VectorXd sq = Eigen::VectorXd::Zero(width);
    double rows = 0.0;
    for (std::size_t i = 0; i < dataset.size(); ++i) {
      if (dataset.splits[i] != Split::kTrain || !dataset.clips[i].has(m)) continue;
      const FrameMatrix& x = dataset.clips[i].channels(m);
      const Eigen::MatrixXd xd = x.cast<double>();
      sum += xd.colwise().sum().transpose();
      sq += xd.array().square().matrix().colwise().sum().transpose();
      rows += static_cast<double>(x.rows());
    }
    if (rows == 0.0) continue;
    ChannelStats& s = stats.per_modality[index_of(m)];
    const Eigen::VectorXd mean = sum / rows;
    Eigen::VectorXd var = sq / rows - mean.array().square().matrix();
    var = var.cwiseMax(0.0);
    s.mean = mean.cast<float>();
    s.std = var.cwiseSqrt().cast<float>().cwiseMax(NormalizationStats::kStdFloor);
  }
  return stats;
}

FrameMatrix temporal_velocity(const FrameMatrix& m) {
  require(m.rows() >= 2, ErrorCode::kTooShort, "velocity needs at least 2 frames");
  return m.bottomRows(m.rows() - 1) - m.topRows(m.rows() - 1);
}

}  // namespace t2mx::core
