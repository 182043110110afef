#pragma once

#include <array>
#include <string>
#include <vector>

#include "t2mx/core/clip.hpp"
#include "t2mx/gpt/train.hpp"
#include "t2mx/infer/sampler.hpp"

namespace t2mx::infer {

struct GenerationRequest {
  std::string text;
  SamplerOptions options;
};

struct GeneratedMotion {
  core::MotionClip clip;  // body, hand and face channels of equal length
  SampledTokens sampled;
  std::array<std::vector<int>, 3> codes;  // decoded ids per modality, End removed
};

/// Samples tokens and decodes each modality with its expert. Throws
/// kEmptyText for blank text, kTooShort when the body ends before any code,
/// kConfig when the source vocabulary disagrees with the experts. A hand/face
/// stream that ended early (sampler disabled) is edge-padded to the body
/// length, or filled with the rest pose when it holds no code.
GeneratedMotion generate(LogitSource& source, const gpt::ExpertSet& experts, const std::string& text,
                         const SamplerOptions& options, double fps = 30.0);

GeneratedMotion generate(const gpt::GptCheckpoint& checkpoint, const GenerationRequest& request);

/// Random code ids of the given length for every modality (a quality baseline).
GeneratedMotion decode_random_tokens(const gpt::ExpertSet& experts, int length, std::uint64_t seed,
                                     double fps = 30.0);

}  // namespace t2mx::infer
