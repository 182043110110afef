#include "t2mx/cli/app.hpp"

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "t2mx/cli/experiment.hpp"
#include "t2mx/core/io.hpp"

namespace t2mx::cli {

namespace {

struct GlobalOptions {
  std::string config;
  std::vector<std::string> overrides;
  std::uint64_t seed = 0;
  CLI::Option* seed_option = nullptr;
  int threads = 1;
};

std::optional<std::uint64_t> global_seed(const GlobalOptions& g) {
  if (g.seed_option->count() > 0) return g.seed;
  if (const char* env = std::getenv("T2MX_SEED")) {
    try {
      return std::stoull(env);
    } catch (const std::exception&) {
      raise(ErrorCode::kConfig, std::string("T2MX_SEED is not an unsigned integer: ") + env);
    }
  }
  return std::nullopt;
}

ExperimentConfig resolve(const GlobalOptions& g, const std::vector<std::pair<std::string, std::string>>& extra) {
  nlohmann::json j = g.config.empty() ? experiment_to_json(ExperimentConfig{}) : core::read_json_file(g.config);
  for (const auto& o : g.overrides) {
    const auto eq = o.find('=');
    require(eq != std::string::npos, ErrorCode::kConfig, "override '" + o + "' must look like key=value");
    apply_override(j, o.substr(0, eq), o.substr(eq + 1));
  }
  for (const auto& [k, v] : extra) apply_override(j, k, v);
  ExperimentConfig c = experiment_from_json(j);
  if (const auto seed = global_seed(g)) apply_global_seed(c, *seed);
  return c;
}

std::string number(double v) { return nlohmann::json(v).dump(); }

}  // namespace

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kMalformed: return 2;
    case ErrorCode::kMissingDependency: return 3;
    case ErrorCode::kEmptyText: return 4;
    case ErrorCode::kMissingSplit: return 5;
    case ErrorCode::kConfig: return 6;
    default: return 1;
  }
}

int run(int argc, char** argv) {
  CLI::App app{"Text-to-whole-body motion: data preparation, training, generation and evaluation", "t2mx"};
  app.require_subcommand(1);
  app.fallthrough();
  GlobalOptions g;
  app.add_option("--config", g.config, "experiment JSON (defaults to the built-in desk profile)");
  app.add_option("--set", g.overrides, "dotted-path override, e.g. gpt.train.steps=100")->take_all();
  g.seed_option = app.add_option("--seed", g.seed, "global seed (falls back to $T2MX_SEED)");
  app.add_option("--threads", g.threads, "worker threads for preprocessing")->check(CLI::PositiveNumber);

  // prep
  CLI::App* prep = app.add_subcommand("prep", "build a dataset directory");
  std::string prep_in, prep_out;
  double target_fps = 0.0, cutoff = 0.0;
  bool report = false;
  prep->add_option("--in", prep_in, "synthetic spec JSON, MX1 clip directory or dataset directory");
  prep->add_option("--out", prep_out, "output dataset directory")->required();
  CLI::Option* fps_opt = prep->add_option("--target-fps", target_fps, "resampling rate");
  CLI::Option* cutoff_opt = prep->add_option("--smooth-cutoff", cutoff, "low-pass cutoff in Hz");
  prep->add_flag("--report", report, "write per-clip jitter reports");

  // train
  CLI::App* train = app.add_subcommand("train", "train an expert or the generator");
  std::string stage, modality = "body", data, out, experts, consistency;
  std::array<std::string, 3> expert_dirs;
  bool resume = false;
  int stop_after = -1;
  train->add_option("--stage", stage, "vq or gpt")->required()->check(CLI::IsMember({"vq", "gpt"}));
  train->add_option("--modality", modality, "body, hand or face (vq stage)")
      ->check(CLI::IsMember({"body", "hand", "face"}));
  train->add_option("--data", data, "dataset directory")->required();
  train->add_option("--out", out, "checkpoint directory")->required();
  train->add_option("--experts", experts, "directory holding body/, hand/ and face/ expert checkpoints");
  train->add_option("--body-expert", expert_dirs[0], "body expert checkpoint");
  train->add_option("--hand-expert", expert_dirs[1], "hand expert checkpoint");
  train->add_option("--face-expert", expert_dirs[2], "face expert checkpoint");
  train->add_option("--consistency", consistency, "on or off")->check(CLI::IsMember({"on", "off"}));
  train->add_flag("--resume", resume, "continue from the checkpoint in --out");
  train->add_option("--stop-after", stop_after, "stop after this many total steps (simulated interrupt)");

  // generate
  CLI::App* gen = app.add_subcommand("generate", "generate a motion from text");
  GenerateOptions go;
  std::string text, mode = "top-k", checkpoint, gen_out;
  int max_tokens = 128, top_k = 5;
  double temperature = 1.0;
  bool no_sampler = false;
  gen->add_option("--text", text, "description")->required();
  gen->add_option("--checkpoint", checkpoint, "generator checkpoint")->required();
  gen->add_option("--out", gen_out, "output directory")->required();
  gen->add_option("--max-tokens", max_tokens, "body token limit")->check(CLI::PositiveNumber);
  gen->add_option("--mode", mode, "greedy, top-k or temperature");
  gen->add_option("--top-k", top_k, "candidates kept in top-k mode")->check(CLI::PositiveNumber);
  gen->add_option("--temperature", temperature, "softmax temperature");
  gen->add_flag("--export-positions", go.export_positions, "also write joint positions as JSON");
  gen->add_flag("--no-consistency-sampler", no_sampler, "let hand and face streams end early");

  // eval
  CLI::App* ev = app.add_subcommand("eval", "evaluate generators");
  std::string suite = "t2m", eval_data, eval_out, extractors;
  std::vector<std::string> checkpoints;
  ev->add_option("--suite", suite, "t2m or matching")->check(CLI::IsMember({"t2m", "matching"}));
  ev->add_option("--checkpoint", checkpoints, "generator checkpoint, optionally LABEL=DIR (repeatable)");
  ev->add_option("--data", eval_data, "dataset directory")->required();
  ev->add_option("--out", eval_out, "report directory")->required();
  ev->add_option("--extractors", extractors, "evaluation extractors (trained there when absent)");

  app.add_subcommand("config", "print the resolved experiment configuration");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : exit_code_for(ErrorCode::kConfig);
  }

  try {
    if (app.got_subcommand("config")) {
      std::cout << experiment_to_json(resolve(g, {})).dump(2) << '\n';
    } else if (prep->parsed()) {
      std::vector<std::pair<std::string, std::string>> extra;
      if (fps_opt->count() > 0) extra.emplace_back("prep.target_fps", number(target_fps));
      if (cutoff_opt->count() > 0) extra.emplace_back("prep.smooth_cutoff", number(cutoff));
      const ExperimentConfig c = resolve(g, extra);
      const PrepResult r = run_prep(c, {prep_in, prep_out, report, g.threads});
      if (r.skipped) std::cerr << "t2mx: " << prep_out << " is up to date\n";
      std::cout << prep_out << '\n';
    } else if (train->parsed()) {
      std::vector<std::pair<std::string, std::string>> extra;
      if (!consistency.empty()) extra.emplace_back("consistency.enabled", consistency == "on" ? "true" : "false");
      const ExperimentConfig c = resolve(g, extra);
      if (stage == "vq") {
        run_train_vq(c, core::modality_from_name(modality), data, out, resume, stop_after);
      } else {
        std::array<fs::path, 3> dirs;
        for (std::size_t p = 0; p < 3; ++p) {
          const std::string name(core::modality_name(core::kModalities[p]));
          dirs[p] = !expert_dirs[p].empty() ? fs::path(expert_dirs[p])
                    : !experts.empty()       ? fs::path(experts) / name
                                             : fs::path();
          require(!dirs[p].empty(), ErrorCode::kMissingDependency,
                  "no " + name + " expert given (use --experts or --" + name + "-expert)");
        }
        run_train_gpt(c, data, dirs, out, resume, stop_after);
      }
      std::cout << out << '\n';
    } else if (gen->parsed()) {
      go.text = text;
      go.checkpoint = checkpoint;
      go.out = gen_out;
      go.sampler.sampling.mode = infer::sampling_mode_from_name(mode);
      go.sampler.sampling.top_k = top_k;
      go.sampler.sampling.temperature = temperature;
      go.sampler.max_tokens = max_tokens;
      go.sampler.consistency_sampler = !no_sampler;
      go.sampler.seed = global_seed(g).value_or(0);
      run_generate(go);
      std::cout << gen_out << '\n';
    } else if (ev->parsed()) {
      const ExperimentConfig c = resolve(g, {});
      EvalOptions eo;
      eo.suite = suite_from_name(suite);
      eo.data = eval_data;
      eo.out = eval_out;
      eo.extractors = extractors;
      for (const auto& spec : checkpoints) {
        const auto eq = spec.find('=');
        const fs::path dir = eq == std::string::npos ? fs::path(spec) : fs::path(spec.substr(eq + 1));
        const std::string label = eq == std::string::npos ? dir.filename().string() : spec.substr(0, eq);
        eo.checkpoints.emplace_back(label, dir);
      }
      run_eval(c, eo);
      std::cout << eval_out << '\n';
    }
  } catch (const Error& e) {
    std::cerr << "t2mx: " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "t2mx: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace t2mx::cli
