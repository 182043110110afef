#pragma once

// Operations behind the command-line subcommands. Every run writes its
// resolved configuration next to its outputs as experiment.json.

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "t2mx/eval/extractors.hpp"
#include "t2mx/eval/suite.hpp"
#include "t2mx/gpt/train.hpp"
#include "t2mx/infer/generate.hpp"
#include "t2mx/prep/synthetic.hpp"
#include "t2mx/vq/net.hpp"
#include "t2mx/vq/train.hpp"

namespace t2mx::cli {

namespace fs = std::filesystem;

struct PrepConfig {
  double target_fps = 30.0;
  double smooth_cutoff = 6.0;
  bool smooth = true;
  std::uint64_t split_seed = 0;
};

struct VqStage {
  vq::VqConfig model;
  vq::VqTrainConfig train;
};

struct ExperimentConfig {
  prep::SyntheticSpec synthetic;
  PrepConfig prep;
  std::array<VqStage, 3> vq;  // body, hand, face
  gpt::GptSettings gpt;       // its consistency block is serialized at the top level
  eval::ExtractorConfig extractors;
  eval::EvalProtocol eval;

  ExperimentConfig();
  /// Checks every block and that the generator vocabulary matches the experts.
  void validate() const;
};

/// Blocks: synthetic, prep, vq.{body,hand,face}.{model,train},
/// gpt.{model,train,text_encoder}, consistency, extractors, eval.
nlohmann::json experiment_to_json(const ExperimentConfig& c);
/// Missing keys keep their defaults; unknown keys raise kConfig.
ExperimentConfig experiment_from_json(const nlohmann::json& j);

/// Sets `path` (dot-separated object keys) to `value`, creating objects on the
/// way. The value is parsed as JSON when possible and kept as a string otherwise.
void apply_override(nlohmann::json& j, const std::string& path, const std::string& value);

/// Replaces every stage seed with one derived from `seed`.
void apply_global_seed(ExperimentConfig& c, std::uint64_t seed);

struct PrepOptions {
  fs::path input;   // a synthetic spec (.json), an MX1 clip directory or a dataset directory
  fs::path output;
  bool report = false;
  int threads = 1;
};

struct PrepResult {
  bool skipped = false;  // outputs already matched the inputs
  std::size_t clips = 0;
  std::vector<std::string> failures;  // "<file>: <reason>" per rejected input
};

/// Builds a dataset directory. Without an input the configured synthetic spec
/// is used. Outputs are guarded by prep.json (input fingerprint and output
/// hash), so a repeated run is a no-op. Throws kMalformed after listing the
/// failures when some input file is malformed.
PrepResult run_prep(const ExperimentConfig& config, const PrepOptions& options);

/// Trains one expert on the dataset.
vq::VqTrainResult run_train_vq(const ExperimentConfig& config, core::Modality modality, const fs::path& data,
                               const fs::path& out, bool resume, int stop_after = -1);

/// Trains the generator. Throws kMissingDependency naming an absent expert.
gpt::GptTrainResult run_train_gpt(const ExperimentConfig& config, const fs::path& data,
                                  const std::array<fs::path, 3>& experts, const fs::path& out, bool resume,
                                  int stop_after = -1);

struct GenerateOptions {
  fs::path checkpoint;
  std::string text;
  fs::path out;
  bool export_positions = false;
  infer::SamplerOptions sampler;
};

/// Writes the generated MX1 clip, audit.json, request.json and optionally positions.json.
infer::GeneratedMotion run_generate(const GenerateOptions& options);

enum class Suite { kT2m, kMatching };
Suite suite_from_name(const std::string& name);

struct EvalOptions {
  Suite suite = Suite::kT2m;
  std::vector<std::pair<std::string, fs::path>> checkpoints;  // label, directory
  fs::path data;
  fs::path out;
  fs::path extractors;  // trained here when absent; defaults to <out>/extractors
};

/// Writes report.json and table.csv. Throws kMissingSplit when the dataset
/// lacks train or test clips.
nlohmann::json run_eval(const ExperimentConfig& config, const EvalOptions& options);

}  // namespace t2mx::cli
