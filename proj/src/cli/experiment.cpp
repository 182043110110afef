#include "t2mx/cli/experiment.hpp"

#include <atomic>
#include <iostream>
#include <sstream>
#include <thread>

#include "t2mx/core/config.hpp"
#include "t2mx/core/dataset_io.hpp"
#include "t2mx/core/error.hpp"
#include "t2mx/core/io.hpp"
#include "t2mx/core/mx1.hpp"
#include "t2mx/core/random.hpp"
#include "t2mx/infer/visual.hpp"
#include "t2mx/prep/filter.hpp"
#include "t2mx/prep/resample.hpp"

namespace t2mx::cli {

namespace {

constexpr int kPrepVersion = 1;

nlohmann::json prep_to_json(const PrepConfig& p) {
  return {{"target_fps", p.target_fps}, {"smooth_cutoff", p.smooth_cutoff}, {"smooth", p.smooth},
          {"split_seed", p.split_seed}};
}

PrepConfig prep_from_json(const nlohmann::json& j) {
  core::ConfigReader r(j, "prep");
  PrepConfig p;
  r.read("target_fps", p.target_fps);
  r.read("smooth_cutoff", p.smooth_cutoff);
  r.read("smooth", p.smooth);
  r.read("split_seed", p.split_seed);
  r.finish();
  require(p.target_fps > 0.0, ErrorCode::kConfig, "prep.target_fps must be positive");
  return p;
}

VqStage stage_from_json(const nlohmann::json& j, core::Modality m) {
  const std::string name(core::modality_name(m));
  core::ConfigReader r(j, "vq." + name);
  VqStage s{vq::VqConfig::for_modality(m), {}};
  if (const nlohmann::json* model = r.child("model")) {
    nlohmann::json with_modality = *model;
    if (!with_modality.contains("modality")) with_modality["modality"] = name;
    s.model = vq::config_from_json(with_modality);
    require(s.model.modality == m, ErrorCode::kConfig, "vq." + name + ".model.modality must be " + name);
  }
  if (const nlohmann::json* train = r.child("train")) s.train = vq::train_config_from_json(*train);
  r.finish();
  return s;
}

// Runs fn(i) for i in [0, n) on up to `threads` workers.
template <typename Fn>
void parallel_for(std::size_t n, int threads, Fn fn) {
  const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(std::max(1, threads)), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = next++; i < n; i = next++) fn(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

bool is_dataset_dir(const fs::path& p) { return fs::is_directory(p / "clips") && fs::exists(p / "corpus.jsonl"); }

std::string input_hash(const fs::path& input) {
  if (input.empty()) return "";
  if (fs::is_directory(input)) return core::sha256_tree(input);
  return core::sha256_file(input);
}

void write_experiment(const fs::path& dir, const ExperimentConfig& config, const nlohmann::json& inputs) {
  fs::create_directories(dir);
  core::write_json_atomic(dir / "experiment.json", {{"config", experiment_to_json(config)}, {"inputs", inputs}});
}

void require_split(const core::MotionDataset& d, core::Split s, const fs::path& dir) {
  require(d.count(s) > 0, ErrorCode::kMissingSplit,
          "dataset " + dir.string() + " has no " + std::string(core::split_name(s)) + " clips");
}

}  // namespace

ExperimentConfig::ExperimentConfig() {
  for (core::Modality m : core::kModalities) {
    vq[static_cast<std::size_t>(core::index_of(m))].model = vq::VqConfig::for_modality(m);
  }
}

void ExperimentConfig::validate() const {
  synthetic.validate();
  for (std::size_t p = 0; p < 3; ++p) {
    vq[p].model.validate();
    vq[p].train.validate(vq[p].model.downsample());
    require(gpt.model.codes[p] == vq[p].model.codes, ErrorCode::kConfig,
            "gpt.model.codes[" + std::to_string(p) + "] must equal the expert code count");
    require(vq[p].model.downsample() == vq[0].model.downsample(), ErrorCode::kConfig,
            "all experts must share one temporal downsampling factor");
  }
  require(gpt.model.body_code_width == vq[0].model.code_width, ErrorCode::kConfig,
          "gpt.model.body_code_width must equal the body expert code width");
  gpt.model.validate();
  gpt.train.validate();
  gpt.consistency.validate();
  extractors.validate();
  eval.validate();
}

nlohmann::json experiment_to_json(const ExperimentConfig& c) {
  nlohmann::json vq_block;
  for (core::Modality m : core::kModalities) {
    const VqStage& s = c.vq[static_cast<std::size_t>(core::index_of(m))];
    vq_block[std::string(core::modality_name(m))] = {{"model", vq::config_to_json(s.model)},
                                                     {"train", vq::train_config_to_json(s.train)}};
  }
  return {{"synthetic", prep::spec_to_json(c.synthetic)},
          {"prep", prep_to_json(c.prep)},
          {"vq", vq_block},
          {"gpt",
           {{"model", gpt::gpt_config_to_json(c.gpt.model)},
            {"train", gpt::gpt_train_to_json(c.gpt.train)},
            {"text_encoder", c.gpt.text_encoder}}},
          {"consistency", consistency::consistency_to_json(c.gpt.consistency)},
          {"extractors", eval::extractor_config_to_json(c.extractors)},
          {"eval", eval::protocol_to_json(c.eval)}};
}

ExperimentConfig experiment_from_json(const nlohmann::json& j) {
  core::ConfigReader r(j, "experiment");
  ExperimentConfig c;
  if (const nlohmann::json* s = r.child("synthetic")) c.synthetic = prep::spec_from_json(*s);
  if (const nlohmann::json* p = r.child("prep")) c.prep = prep_from_json(*p);
  if (const nlohmann::json* v = r.child("vq")) {
    core::ConfigReader vr(*v, "vq");
    for (core::Modality m : core::kModalities) {
      if (const nlohmann::json* s = vr.child(std::string(core::modality_name(m)))) {
        c.vq[static_cast<std::size_t>(core::index_of(m))] = stage_from_json(*s, m);
      }
    }
    vr.finish();
  }
  if (const nlohmann::json* g = r.child("gpt")) {
    core::ConfigReader gr(*g, "gpt");
    if (const nlohmann::json* m = gr.child("model")) c.gpt.model = gpt::gpt_config_from_json(*m);
    if (const nlohmann::json* t = gr.child("train")) c.gpt.train = gpt::gpt_train_from_json(*t);
    gr.read("text_encoder", c.gpt.text_encoder);
    gr.finish();
  }
  if (const nlohmann::json* k = r.child("consistency")) c.gpt.consistency = consistency::consistency_from_json(*k);
  if (const nlohmann::json* e = r.child("extractors")) c.extractors = eval::extractor_config_from_json(*e);
  if (const nlohmann::json* e = r.child("eval")) c.eval = eval::protocol_from_json(*e);
  r.finish();
  c.validate();
  return c;
}

void apply_override(nlohmann::json& j, const std::string& path, const std::string& value) {
  require(!path.empty(), ErrorCode::kConfig, "override needs a key");
  nlohmann::json* node = &j;
  std::size_t start = 0;
  while (true) {
    const std::size_t dot = path.find('.', start);
    const std::string key = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    require(!key.empty(), ErrorCode::kConfig, "override key '" + path + "' has an empty component");
    require(node->is_object() || node->is_null(), ErrorCode::kConfig,
            "override key '" + path + "' descends into a non-object");
    if (dot == std::string::npos) {
      nlohmann::json parsed = nlohmann::json::parse(value, nullptr, false);
      (*node)[key] = parsed.is_discarded() ? nlohmann::json(value) : parsed;
      return;
    }
    node = &(*node)[key];
    start = dot + 1;
  }
}

void apply_global_seed(ExperimentConfig& c, std::uint64_t seed) {
  c.synthetic.seed = seed;
  c.prep.split_seed = core::derive_seed(seed, 1);
  for (std::size_t p = 0; p < 3; ++p) c.vq[p].train.seed = core::derive_seed(seed, 10 + p);
  c.gpt.train.seed = core::derive_seed(seed, 20);
  c.extractors.seed = core::derive_seed(seed, 30);
  c.eval.seed = core::derive_seed(seed, 40);
}

PrepResult run_prep(const ExperimentConfig& config, const PrepOptions& options) {
  const PrepConfig& pc = config.prep;
  const bool synthetic = options.input.empty() || (fs::is_regular_file(options.input));
  nlohmann::json fingerprint_src = {{"version", kPrepVersion}, {"prep", prep_to_json(pc)}, {"report", options.report}};
  prep::SyntheticSpec spec = config.synthetic;
  if (synthetic && !options.input.empty()) spec = prep::spec_from_json(core::read_json_file(options.input));
  if (synthetic) {
    fingerprint_src["synthetic"] = prep::spec_to_json(spec);
  } else {
    require(fs::is_directory(options.input), ErrorCode::kMissingDependency,
            "prep input " + options.input.string() + " does not exist");
    fingerprint_src["input_hash"] = input_hash(options.input);
  }
  const std::string fingerprint = core::sha256_hex(fingerprint_src.dump());

  PrepResult result;
  const fs::path guard = options.output / "prep.json";
  if (fs::exists(guard)) {
    const nlohmann::json g = core::read_json_file(guard);
    if (g.value("fingerprint", "") == fingerprint &&
        g.value("output_hash", "") == core::sha256_tree(options.output, {"prep.json"})) {
      result.skipped = true;
      result.clips = g.value("clips", std::size_t{0});
      return result;
    }
  }

  core::MotionDataset dataset;
  bool already_processed = false;
  if (synthetic) {
    dataset = prep::make_synthetic_dataset(spec).dataset;
  } else if (is_dataset_dir(options.input)) {
    dataset = core::read_dataset(options.input);
    if (fs::exists(options.input / "prep.json")) {
      const nlohmann::json g = core::read_json_file(options.input / "prep.json");
      already_processed = g.contains("config") && g["config"].value("prep", nlohmann::json()) == prep_to_json(pc);
    }
  } else {
    for (const auto& header : core::mx1::list_headers(options.input)) {
      try {
        dataset.clips.push_back(core::mx1::read_clip(header));
      } catch (const Error& e) {
        result.failures.push_back(header.filename().string() + ": " + e.what());
      }
    }
    if (!result.failures.empty()) {
      std::ostringstream os;
      os << result.failures.size() << " malformed input file(s)";
      for (const auto& f : result.failures) os << "\n  " << f;
      raise(ErrorCode::kMalformed, os.str());
    }
    require(!dataset.clips.empty(), ErrorCode::kNoData, "no MX1 clips in " + options.input.string());
    dataset.splits = core::make_split(dataset.size(), pc.split_seed);
  }

  std::vector<std::optional<prep::JitterReport>> reports(dataset.size());
  if (!already_processed) {
    std::vector<std::optional<core::MotionClip>> processed(dataset.size());
    parallel_for(dataset.size(), options.threads, [&](std::size_t i) {
      core::MotionClip clip = dataset.clips[i];
      if (clip.fps() > pc.target_fps) clip = prep::resample(clip, pc.target_fps);
      if (pc.smooth) {
        prep::JitterReport report;
        clip = prep::smooth_clip(clip, pc.smooth_cutoff, {}, &report);
        reports[i] = report;
      }
      processed[i] = std::move(clip);
    });
    for (std::size_t i = 0; i < dataset.size(); ++i) dataset.clips[i] = std::move(*processed[i]);
    dataset.stats = core::compute_normalization(dataset);
  }

  for (const char* stale : {"clips", "splits"}) fs::remove_all(options.output / stale);
  fs::remove(options.output / "report.json");
  core::write_dataset(options.output, dataset);
  if (options.report) {
    nlohmann::json list = nlohmann::json::array();
    for (const auto& r : reports) {
      if (r) list.push_back(prep::report_to_json(*r));
    }
    core::write_json_atomic(options.output / "report.json", list);
  }
  result.clips = dataset.size();
  nlohmann::json recorded_config = {{"prep", prep_to_json(pc)}};
  if (synthetic) recorded_config["synthetic"] = prep::spec_to_json(spec);
  core::write_json_atomic(guard, {{"fingerprint", fingerprint},
                                  {"config", recorded_config},
                                  {"input", options.input.string()},
                                  {"input_hash", fingerprint_src.value("input_hash", "")},
                                  {"clips", result.clips},
                                  {"output_hash", core::sha256_tree(options.output, {"prep.json"})}});
  return result;
}

vq::VqTrainResult run_train_vq(const ExperimentConfig& config, core::Modality modality, const fs::path& data,
                               const fs::path& out, bool resume, int stop_after) {
  const core::MotionDataset dataset = core::read_dataset(data);
  require_split(dataset, core::Split::kTrain, data);
  const VqStage& stage = config.vq[static_cast<std::size_t>(core::index_of(modality))];
  vq::VqTrainResult r = vq::train_vqvae(dataset, stage.model, stage.train, out, {resume, stop_after});
  write_experiment(out, config, {{"data", core::sha256_tree(data)}});
  return r;
}

gpt::GptTrainResult run_train_gpt(const ExperimentConfig& config, const fs::path& data,
                                  const std::array<fs::path, 3>& experts, const fs::path& out, bool resume,
                                  int stop_after) {
  for (std::size_t p = 0; p < 3; ++p) {
    require(fs::exists(experts[p] / "config.json") && fs::exists(experts[p] / "weights.json"),
            ErrorCode::kMissingDependency,
            "missing " + std::string(core::modality_name(core::kModalities[p])) + " expert checkpoint " +
                experts[p].string());
  }
  const core::MotionDataset dataset = core::read_dataset(data);
  require_split(dataset, core::Split::kTrain, data);
  gpt::GptTrainResult r = gpt::train_gpt(dataset, experts, config.gpt, out, {resume, stop_after});
  nlohmann::json inputs = {{"data", core::sha256_tree(data)}};
  for (std::size_t p = 0; p < 3; ++p) {
    inputs[std::string(core::modality_name(core::kModalities[p])) + "_expert"] = core::sha256_tree(experts[p]);
  }
  write_experiment(out, config, inputs);
  return r;
}

infer::GeneratedMotion run_generate(const GenerateOptions& options) {
  require(!options.text.empty() && options.text.find_first_not_of(" \t\r\n") != std::string::npos,
          ErrorCode::kEmptyText, "generation text is empty");
  const gpt::GptCheckpoint ck = gpt::GptCheckpoint::load(options.checkpoint);
  infer::GeneratedMotion g = infer::generate(ck, {options.text, options.sampler});
  fs::create_directories(options.out);
  core::mx1::write_clip(options.out, g.clip);
  core::write_json_atomic(options.out / "audit.json", infer::audit_to_json(g.sampled));
  if (options.export_positions) {
    core::write_json_atomic(options.out / "positions.json",
                            infer::positions_to_json(infer::compose_visual_pose(g.clip.body()), g.clip.fps()));
  }
  const infer::SamplerOptions& s = options.sampler;
  core::write_json_atomic(options.out / "request.json",
                          {{"text", options.text},
                           {"mode", std::string(infer::sampling_mode_name(s.sampling.mode))},
                           {"top_k", s.sampling.top_k},
                           {"temperature", s.sampling.temperature},
                           {"seed", s.seed},
                           {"max_tokens", s.max_tokens},
                           {"consistency_sampler", s.consistency_sampler},
                           {"checkpoint_hash", core::sha256_tree(options.checkpoint)}});
  return g;
}

Suite suite_from_name(const std::string& name) {
  if (name == "t2m") return Suite::kT2m;
  if (name == "matching") return Suite::kMatching;
  raise(ErrorCode::kConfig, "unknown eval suite '" + name + "' (expected t2m or matching)");
}

nlohmann::json run_eval(const ExperimentConfig& config, const EvalOptions& options) {
  const core::MotionDataset dataset = core::read_dataset(options.data);
  require_split(dataset, core::Split::kTest, options.data);
  const std::vector<core::MotionClip> test = dataset.subset(core::Split::kTest).clips;

  const fs::path ex_dir = options.extractors.empty() ? options.out / "extractors" : options.extractors;
  if (!fs::exists(ex_dir / "config.json")) {
    require_split(dataset, core::Split::kTrain, options.data);
    eval::train_eval_extractors(dataset, config.extractors, ex_dir);
  }
  const eval::EvalExtractors extractors = eval::EvalExtractors::load(ex_dir);

  std::vector<gpt::GptCheckpoint> checkpoints;
  for (const auto& [label, dir] : options.checkpoints) checkpoints.push_back(gpt::GptCheckpoint::load(dir));

  eval::EvalProtocol protocol = config.eval;
  const int reps = protocol.repetitions;
  nlohmann::json rows = nlohmann::json::array();
  std::string csv;
  if (options.suite == Suite::kT2m) {
    std::vector<std::pair<std::string, eval::T2mReport>> table;
    const std::vector<eval::EvalRound> real(static_cast<std::size_t>(reps), eval::real_round(test));
    table.emplace_back("Real", eval::t2m_eval(extractors, test, real, protocol));
    if (!checkpoints.empty()) {
      std::vector<eval::EvalRound> random;
      for (int r = 0; r < reps; ++r) random.push_back(eval::random_round(checkpoints.front().experts, test, protocol, r));
      table.emplace_back("Random tokens", eval::t2m_eval(extractors, test, random, protocol));
    }
    for (std::size_t c = 0; c < checkpoints.size(); ++c) {
      std::vector<eval::EvalRound> gen;
      for (int r = 0; r < reps; ++r) gen.push_back(eval::generate_round(checkpoints[c], test, protocol, r));
      table.emplace_back(options.checkpoints[c].first, eval::t2m_eval(extractors, test, gen, protocol));
    }
    for (const auto& [label, report] : table) rows.push_back({{"label", label}, {"report", eval::t2m_to_json(report)}});
    csv = eval::t2m_csv(table);
  } else {
    std::vector<core::MotionClip> full;
    for (const auto& c : test) {
      if (c.has(core::Modality::kHand) && c.has(core::Modality::kFace)) full.push_back(c);
    }
    require(full.size() >= 2, ErrorCode::kMissingSplit, "test split has fewer than two fully annotated clips");
    protocol.mm_texts = 0;
    std::vector<std::pair<std::string, eval::MatchingReport>> table;
    const std::vector<eval::EvalRound> real(static_cast<std::size_t>(reps), eval::real_round(full));
    table.emplace_back("Real", eval::matching_eval(extractors, full, real, protocol));
    for (std::size_t c = 0; c < checkpoints.size(); ++c) {
      std::vector<eval::EvalRound> gen;
      for (int r = 0; r < reps; ++r) gen.push_back(eval::generate_round(checkpoints[c], test, protocol, r));
      table.emplace_back(options.checkpoints[c].first, eval::matching_eval(extractors, full, gen, protocol));
    }
    for (const auto& [label, report] : table) {
      rows.push_back({{"label", label}, {"report", eval::matching_to_json(report)}});
    }
    csv = eval::matching_csv(table);
  }

  nlohmann::json inputs = {{"data", core::sha256_tree(options.data)}, {"extractors", extractors.hash()}};
  const std::size_t first_checkpoint_row = rows.size() - options.checkpoints.size();
  for (std::size_t c = 0; c < options.checkpoints.size(); ++c) {
    const std::string hash = core::sha256_tree(options.checkpoints[c].second);
    rows[first_checkpoint_row + c]["checkpoint_hash"] = hash;
    inputs["checkpoint:" + options.checkpoints[c].first] = hash;
  }
  const nlohmann::json report = {{"suite", options.suite == Suite::kT2m ? "t2m" : "matching"}, {"rows", rows}};
  fs::create_directories(options.out);
  core::write_json_atomic(options.out / "report.json", report);
  core::write_file_atomic(options.out / "table.csv", csv);
  write_experiment(options.out, config, inputs);
  return report;
}

}  // namespace t2mx::cli
