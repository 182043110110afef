#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace t2mx::core {

enum class Modality : int { kBody = 0, kHand = 1, kFace = 2 };
inline constexpr std::array<Modality, 3> kModalities = {Modality::kBody, Modality::kHand,
                                                        Modality::kFace};
inline constexpr int kModalityCount = 3;

constexpr int index_of(Modality m) { return static_cast<int>(m); }
int channel_width(Modality m);
std::string_view modality_name(Modality m);
/// Throws kConfig for unknown names.
Modality modality_from_name(std::string_view name);

/// Time-major (T x d) frame storage.
using FrameMatrix = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using ModalityMask = std::array<bool, kModalityCount>;

/// A timed whole-body sequence with partial annotation. Immutable once built;
/// the constructor enforces the channel-width law and equal frame counts.
class MotionClip {
 public:
  MotionClip(std::string id, double fps, FrameMatrix body, std::optional<FrameMatrix> hand,
             std::optional<FrameMatrix> face, std::vector<std::string> text);

  const std::string& id() const { return id_; }
  double fps() const { return fps_; }
  int frames() const { return static_cast<int>(body_.rows()); }
  const std::vector<std::string>& text() const { return text_; }

  bool has(Modality m) const;
  ModalityMask modality_mask() const { return {true, hand_.has_value(), face_.has_value()}; }
  /// Throws kContract when the modality is absent.
  const FrameMatrix& channels(Modality m) const;
  const FrameMatrix& body() const { return body_; }
  const std::optional<FrameMatrix>& hand() const { return hand_; }
  const std::optional<FrameMatrix>& face() const { return face_; }

  MotionClip with_id(std::string id) const;
  MotionClip with_text(std::vector<std::string> text) const;
  MotionClip with_fps(double fps) const;
  /// Replaces (or, for hand/face, adds/removes) one modality.
  MotionClip with_channels(Modality m, std::optional<FrameMatrix> channels) const;

 private:
  std::string id_;
  double fps_;
  FrameMatrix body_;
  std::optional<FrameMatrix> hand_;
  std::optional<FrameMatrix> face_;
  std::vector<std::string> text_;
};

enum class Split : int { kTrain = 0, kVal = 1, kTest = 2 };
std::string_view split_name(Split s);
Split split_from_name(std::string_view name);

/// Per-channel statistics for one modality.
struct ChannelStats {
  Eigen::VectorXf mean;
  Eigen::VectorXf std;
  bool empty() const { return mean.size() == 0; }
};

struct NormalizationStats {
  std::array<ChannelStats, kModalityCount> per_modality;
  /// Floor applied to tiny standard deviations so constant channels stay finite.
  static constexpr float kStdFloor = 1e-2f;

  const ChannelStats& get(Modality m) const { return per_modality[index_of(m)]; }
  FrameMatrix normalize(Modality m, const FrameMatrix& x) const;
  FrameMatrix denormalize(Modality m, const FrameMatrix& x) const;
};

struct MotionDataset {
  std::vector<MotionClip> clips;
  std::vector<Split> splits;  // one tag per clip
  NormalizationStats stats;

  std::size_t size() const { return clips.size(); }
  MotionDataset subset(Split s) const;
  /// Clips carrying the given modality (body filters nothing).
  MotionDataset with_modality(Modality m) const;
  std::size_t count(Split s) const;
};

/// Random 80/10/10 split by clip count, deterministic in seed.
std::vector<Split> make_split(std::size_t clip_count, std::uint64_t seed);

/// Mean/std per channel over the training-split clips.
NormalizationStats compute_normalization(const MotionDataset& dataset);

/// First-order forward difference M[t+1] - M[t]; throws kTooShort for T < 2.
FrameMatrix temporal_velocity(const FrameMatrix& m);

}  // namespace t2mx::core
