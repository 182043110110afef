#include <exception>
#include <functional>
#include <iostream>
#include <set>
#include <vector>

#include <CLI11.hpp>
#include <torch/torch.h>

#include "acceptance.hpp"
#include "t2mx/core/error.hpp"

namespace {

struct Criterion {
  int id;
  const char* name;
  std::function<t2mx::acceptance::Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  namespace fs = std::filesystem;
  using namespace t2mx::acceptance;
  CLI::App app{"Acceptance criteria; prints one PASS or FAIL line per criterion", "t2mx_acceptance"};
  EndToEndOptions e2e;
  std::string work = T2MX_ACCEPTANCE_WORK, profiles = T2MX_PROFILE_DIR, cli = T2MX_CLI_PATH;
  std::vector<int> only;
  bool fresh = false;
  app.add_option("--work", work, "working directory of the end-to-end criteria");
  app.add_option("--profiles", profiles, "directory holding desk.json and smoke.json");
  app.add_option("--cli", cli, "t2mx binary");
  app.add_option("--only", only, "criteria to run (default: all)");
  app.add_option("--threads", e2e.threads, "preprocessing threads");
  app.add_flag("--fresh", fresh, "discard checkpoints cached in the working directory");
  CLI11_PARSE(app, argc, argv);
  e2e.work = work;
  e2e.profile_dir = profiles;
  if (fresh) fs::remove_all(e2e.work);
  fs::create_directories(e2e.work);
  torch::set_num_threads(1);

  const std::vector<Criterion> criteria = {
      {1, "quantizer oracle", quantizer_oracle},
      {2, "gradient suite", gradient_suite},
      {3, "causality suite", causality_suite},
      {4, "masking invariance", masking_invariance},
      {5, "sampler contract", sampler_contract},
      {6, "FID oracle", fid_oracle},
      {7, "rotation, mirror and leg IK round trips", geometry_round_trips},
      {8, "jitter pipeline", jitter_pipeline},
      {9, "desk-scale end to end", [&] { return desk_end_to_end(e2e); }},
      {10, "determinism", [&] { return cli_determinism(e2e, cli); }},
  };
  const std::set<int> selected(only.begin(), only.end());
  int failures = 0;
  for (const auto& c : criteria) {
    if (!selected.empty() && selected.count(c.id) == 0) continue;
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    failures += !o.pass;
    std::cout << (o.pass ? "PASS " : "FAIL ") << c.id << ' ' << c.name << ": " << o.detail << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
