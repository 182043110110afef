#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "t2mx/core/clip.hpp"
#include "t2mx/eval/extractors.hpp"
#include "t2mx/eval/metrics.hpp"
#include "t2mx/gpt/train.hpp"
#include "t2mx/infer/sampler.hpp"

namespace t2mx::eval {

struct EvalProtocol {
  int pool = 32;
  int repetitions = 20;
  int diversity_pairs = 300;
  int mm_pairs = 10;
  int mm_texts = 32;        // texts that receive several generations
  int mm_generations = 10;  // generations per such text
  infer::SamplingConfig sampling{infer::SamplingMode::kTopK, 5, 1.0};
  int max_tokens = 128;
  std::uint64_t seed = 0;

  void validate() const;
};

nlohmann::json protocol_to_json(const EvalProtocol& p);
EvalProtocol protocol_from_json(const nlohmann::json& j);

/// Motions generated for one description; the first is the primary sample.
struct GenerationGroup {
  std::string text;
  std::vector<core::MotionClip> motions;
};

/// One repetition's generated set.
using EvalRound = std::vector<GenerationGroup>;

struct T2mReport {
  std::array<MetricValue, 3> r_precision;
  MetricValue fid, mm_dist, diversity;
  std::optional<MetricValue> multimodality;  // absent without repeated generations
  double fid_clipped = 0.0;                  // largest clipped eigenvalue mass over rounds
  int rounds = 0;
  nlohmann::json config;
  std::string extractor_hash;
};

/// Body text-to-motion metrics of every round against the real clips; each
/// metric is summarized over rounds. Round r draws its pools and pairs from
/// derive_seed(seed, r).
T2mReport t2m_eval(const EvalExtractors& extractors, const std::vector<core::MotionClip>& real,
                   const std::vector<EvalRound>& rounds, const EvalProtocol& protocol);

struct PairReport {
  core::Modality a = core::Modality::kBody;
  core::Modality b = core::Modality::kHand;
  std::array<MetricValue, 3> a_to_b;  // query a, retrieve among b
  std::array<MetricValue, 3> b_to_a;
  MetricValue fid_a, fid_b, mm_dist;
};

struct MatchingReport {
  std::array<PairReport, 3> pairs;  // body-hand, body-face, hand-face
  double fid_clipped = 0.0;
  int rounds = 0;
  nlohmann::json config;
  std::string extractor_hash;
};

/// Cross-modal matching of the primary samples of every round; `real` is the
/// FID reference per modality. Throws kContract when a sample or a real clip
/// lacks a modality.
MatchingReport matching_eval(const EvalExtractors& extractors, const std::vector<core::MotionClip>& real,
                             const std::vector<EvalRound>& rounds, const EvalProtocol& protocol);

nlohmann::json t2m_to_json(const T2mReport& r);
nlohmann::json matching_to_json(const MatchingReport& r);

/// Rows of labelled reports in the text-to-motion table layout.
std::string t2m_csv(const std::vector<std::pair<std::string, T2mReport>>& rows);
/// One block per modality pair, a row per labelled report inside each block.
std::string matching_csv(const std::vector<std::pair<std::string, MatchingReport>>& rows);

/// A round made of the clips themselves, one per description (the real row).
EvalRound real_round(const std::vector<core::MotionClip>& clips);

/// Generates one sample per clip description (its first text) and, for the
/// first mm_texts clips, mm_generations samples. Seeds derive from
/// (protocol.seed, round, clip, generation).
EvalRound generate_round(const gpt::GptCheckpoint& checkpoint, const std::vector<core::MotionClip>& clips,
                         const EvalProtocol& protocol, int round);

/// Random-token decodes matched to the clip lengths (a quality floor).
EvalRound random_round(const gpt::ExpertSet& experts, const std::vector<core::MotionClip>& clips,
                       const EvalProtocol& protocol, int round);

}  // namespace t2mx::eval
