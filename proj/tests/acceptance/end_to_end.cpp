#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include "acceptance.hpp"
#include "t2mx/cli/experiment.hpp"
#include "t2mx/core/error.hpp"
#include "t2mx/core/io.hpp"

namespace t2mx::acceptance {

namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

std::string format(const char* fmt, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, fmt, args...);
  return buf;
}

void progress(const std::string& what) { std::cerr << "acceptance: " << what << std::endl; }

const nlohmann::json& row(const nlohmann::json& report, const std::string& label) {
  for (const auto& r : report.at("rows")) {
    if (r.at("label") == label) return r.at("report");
  }
  raise(ErrorCode::kMalformed, "report has no row '" + label + "'");
}

double matching_top1(const nlohmann::json& report, std::size_t pair) {
  const nlohmann::json& p = report.at("pairs").at(pair);
  const std::string key = p.at("a").get<std::string>() + "->" + p.at("b").get<std::string>();
  return p.at(key).at(0).at("mean").get<double>();
}

}  // namespace

Outcome desk_end_to_end(const EndToEndOptions& options) {
  const auto start = Clock::now();
  cli::ExperimentConfig config =
      cli::experiment_from_json(core::read_json_file(options.profile_dir / "desk.json"));
  const fs::path data = options.work / "data";
  progress("preparing " + std::to_string(config.synthetic.clips) + " synthetic clips");
  cli::run_prep(config, {"", data, false, options.threads});

  std::array<fs::path, 3> experts;
  for (std::size_t p = 0; p < 3; ++p) {
    const std::string name(core::modality_name(core::kModalities[p]));
    experts[p] = options.work / "experts" / name;
    progress("training the " + name + " expert");
    cli::run_train_vq(config, core::kModalities[p], data, experts[p], true);
  }
  cli::ExperimentConfig off = config;
  config.gpt.consistency.enabled = true;
  off.gpt.consistency.enabled = false;
  progress("training the generator with the consistency loss");
  cli::run_train_gpt(config, data, experts, options.work / "gpt_on", true);
  progress("training the generator without the consistency loss");
  cli::run_train_gpt(off, data, experts, options.work / "gpt_off", true);

  cli::EvalOptions eo;
  eo.data = data;
  eo.extractors = options.work / "extractors";
  eo.suite = cli::Suite::kT2m;
  eo.checkpoints = {{"ours", options.work / "gpt_on"}};
  eo.out = options.work / "eval_t2m";
  progress("text-to-motion evaluation");
  const nlohmann::json t2m = cli::run_eval(config, eo);
  eo.suite = cli::Suite::kMatching;
  eo.checkpoints = {{"on", options.work / "gpt_on"}, {"off", options.work / "gpt_off"}};
  eo.out = options.work / "eval_matching";
  progress("modality matching evaluation");
  const nlohmann::json matching = cli::run_eval(config, eo);

  const double top1 = row(t2m, "ours").at("r_precision").at("top1").at("mean").get<double>();
  const double fid_gen = row(t2m, "ours").at("fid").at("mean").get<double>();
  const double fid_random = row(t2m, "Random tokens").at("fid").at("mean").get<double>();
  const double hand_on = matching_top1(row(matching, "on"), 0);
  const double hand_off = matching_top1(row(matching, "off"), 0);
  const double face_on = matching_top1(row(matching, "on"), 1);
  const double face_off = matching_top1(row(matching, "off"), 1);
  const bool a = top1 > 3.0 / 32.0;
  const bool b = fid_gen < fid_random;
  const bool c = hand_on > hand_off && face_on > face_off;
  const double minutes = std::chrono::duration<double>(Clock::now() - start).count() / 60.0;
  return {a && b && c,
          format("(a) %s top-1 %.3f vs 0.094; (b) %s FID %.3f vs random %.3f; (c) %s body->hand %.3f vs %.3f, "
                 "body->face %.3f vs %.3f; %.1f min",
                 a ? "ok" : "FAIL", top1, b ? "ok" : "FAIL", fid_gen, fid_random, c ? "ok" : "FAIL", hand_on,
                 hand_off, face_on, face_off, minutes)};
}

Outcome cli_determinism(const EndToEndOptions& options, const fs::path& cli) {
  const std::string base = cli.string() + " --config " + (options.profile_dir / "smoke.json").string() + " --seed 7 ";
  struct Step {
    std::string out, args;  // output directory relative to the run directory
  };
  const std::vector<Step> steps = {
      {"data", "prep --report --out {}/data"},
      {"experts/body", "train --stage vq --modality body --data {}/data --out {}/experts/body"},
      {"experts/hand", "train --stage vq --modality hand --data {}/data --out {}/experts/hand"},
      {"experts/face", "train --stage vq --modality face --data {}/data --out {}/experts/face"},
      {"gpt", "train --stage gpt --data {}/data --experts {}/experts --out {}/gpt"},
      {"generated", "generate --checkpoint {}/gpt --text \"a person waves the right hand\" --export-positions"
                    " --out {}/generated"},
      {"eval", "eval --suite t2m --data {}/data --checkpoint ours={}/gpt --out {}/eval"},
      {"matching", "eval --suite matching --data {}/data --checkpoint ours={}/gpt --out {}/matching"},
  };
  std::vector<std::vector<std::string>> hashes(2);
  for (int run = 0; run < 2; ++run) {
    const fs::path dir = options.work / "cli" / ("run" + std::to_string(run));
    fs::remove_all(dir);
    fs::create_directories(dir);
    for (const auto& s : steps) {
      std::string args = s.args;
      for (std::size_t at; (at = args.find("{}")) != std::string::npos;) args.replace(at, 2, dir.string());
      const std::string cmd = base + args + " >" + (dir / "stdout.txt").string() + " 2>&1";
      if (std::system(cmd.c_str()) != 0) {
        return {false, "command failed: " + cmd + "\n" + core::read_text_file(dir / "stdout.txt")};
      }
      hashes[static_cast<std::size_t>(run)].push_back(core::sha256_tree(dir / s.out));
    }
  }
  std::string differing;
  for (std::size_t i = 0; i < steps.size(); ++i) {
    if (hashes[0][i] != hashes[1][i]) differing += " " + steps[i].out;
  }
  return {differing.empty(), differing.empty() ? format("%zu commands, identical output hashes", steps.size())
                                               : "outputs differ:" + differing};
}

}  // namespace t2mx::acceptance
