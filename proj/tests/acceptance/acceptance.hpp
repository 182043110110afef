#pragma once

#include <filesystem>
#include <string>

namespace t2mx::acceptance {

struct Outcome {
  bool pass = false;
  std::string detail;
};

Outcome quantizer_oracle();
Outcome gradient_suite();
Outcome causality_suite();
Outcome masking_invariance();
Outcome sampler_contract();
Outcome fid_oracle();
Outcome geometry_round_trips();
Outcome jitter_pipeline();

struct EndToEndOptions {
  std::filesystem::path work;
  std::filesystem::path profile_dir;
  int threads = 1;
};

Outcome desk_end_to_end(const EndToEndOptions& options);
Outcome cli_determinism(const EndToEndOptions& options, const std::filesystem::path& cli);

}  // namespace t2mx::acceptance
