#include "t2mx/infer/generate.hpp"

#include <algorithm>
#include <cctype>

#include "t2mx/core/error.hpp"
#include "t2mx/core/pose.hpp"
#include "t2mx/core/random.hpp"

namespace t2mx::infer {

namespace {

core::FrameMatrix rest_channels(core::Modality m, int frames) {
  const core::WholeBodyPose rest = core::WholeBodyPose::identity();
  core::FrameMatrix out(frames, core::channel_width(m));
  for (int t = 0; t < frames; ++t) {
    std::span<float> row(out.row(t).data(), static_cast<std::size_t>(out.cols()));
    if (m == core::Modality::kHand) rest.hand_to(row);
    else rest.face_to(row);
  }
  return out;
}

core::FrameMatrix fit_length(const core::FrameMatrix& m, int frames) {
  if (m.rows() == frames) return m;
  core::FrameMatrix out(frames, m.cols());
  const auto keep = std::min<Eigen::Index>(m.rows(), frames);
  out.topRows(keep) = m.topRows(keep);
  for (Eigen::Index t = keep; t < frames; ++t) out.row(t) = m.row(keep - 1);
  return out;
}

GeneratedMotion assemble(const gpt::ExpertSet& experts, std::array<std::vector<int>, 3> codes, SampledTokens sampled,
                         const std::string& text, double fps) {
  require(!codes[0].empty(), ErrorCode::kTooShort, "the body ended before emitting any motion token");
  const int frames = static_cast<int>(codes[0].size()) * experts[0]->downsample();
  std::array<core::FrameMatrix, 3> channels;
  for (std::size_t p = 0; p < 3; ++p) {
    const core::Modality m = core::kModalities[p];
    if (codes[p].empty()) {
      channels[p] = rest_channels(m, frames);
      continue;
    }
    channels[p] = fit_length(experts[p]->decode(codes[p]), frames);
  }
  require(channels[0].rows() == frames, ErrorCode::kContract, "decoded body length differs from tokens x l");
  for (int t = 0; t < frames; ++t) {
    for (int k = 0; k < 4; ++k) {
      float& c = channels[0](t, core::layout::kContacts + k);
      c = c >= 0.5f ? 1.0f : 0.0f;
    }
  }
  core::MotionClip clip("generated", fps, std::move(channels[0]), std::move(channels[1]), std::move(channels[2]),
                        {text});
  return GeneratedMotion{std::move(clip), std::move(sampled), std::move(codes)};
}

}  // namespace

GeneratedMotion generate(LogitSource& source, const gpt::ExpertSet& experts, const std::string& text,
                         const SamplerOptions& options, double fps) {
  require(std::any_of(text.begin(), text.end(), [](unsigned char c) { return !std::isspace(c); }),
          ErrorCode::kEmptyText, "generation needs a non-empty text");
  const std::array<int, 3> codes = source.codes();
  for (std::size_t p = 0; p < 3; ++p) {
    require(codes[p] == experts[p]->codes(), ErrorCode::kConfig,
            "generator vocabulary does not match the " + std::string(core::modality_name(core::kModalities[p])) +
                " expert codebook");
  }
  SampledTokens sampled = sample_tokens(source, options);
  std::array<std::vector<int>, 3> ids;
  for (std::size_t p = 0; p < 3; ++p) {
    for (int t : sampled.tokens[p]) {
      if (t == codes[p]) break;
      ids[p].push_back(t);
    }
  }
  return assemble(experts, std::move(ids), std::move(sampled), text, fps);
}

GeneratedMotion generate(const gpt::GptCheckpoint& checkpoint, const GenerationRequest& request) {
  require(std::any_of(request.text.begin(), request.text.end(), [](unsigned char c) { return !std::isspace(c); }),
          ErrorCode::kEmptyText, "generation needs a non-empty text");
  GptLogitSource source(checkpoint.model, checkpoint.text->embed(request.text));
  return generate(source, checkpoint.experts, request.text, request.options);
}

GeneratedMotion decode_random_tokens(const gpt::ExpertSet& experts, int length, std::uint64_t seed, double fps) {
  require(length >= 1, ErrorCode::kTooShort, "random decode needs at least one token");
  core::Rng rng(seed);
  std::array<std::vector<int>, 3> ids;
  for (std::size_t p = 0; p < 3; ++p) {
    for (int t = 0; t < length; ++t) ids[p].push_back(static_cast<int>(rng.below(static_cast<std::uint64_t>(experts[p]->codes()))));
  }
  return assemble(experts, std::move(ids), SampledTokens{}, "random tokens", fps);
}

}  // namespace t2mx::infer
