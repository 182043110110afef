#include "t2mx/infer/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "t2mx/core/error.hpp"
#include "t2mx/core/random.hpp"

namespace t2mx::infer {

namespace {

const char* kBranchNames[3] = {"body", "hand", "face"};

int draw(const std::vector<double>& probs, core::Rng& rng) {
  const double u = rng.uniform();
  double acc = 0.0;
  int last = 0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (probs[i] <= 0.0) continue;
    acc += probs[i];
    last = static_cast<int>(i);
    if (u < acc) return last;
  }
  return last;
}

}  // namespace

std::string_view sampling_mode_name(SamplingMode m) {
  switch (m) {
    case SamplingMode::kGreedy: return "greedy";
    case SamplingMode::kTopK: return "top-k";
    case SamplingMode::kTemperature: return "temperature";
  }
  return "greedy";
}

SamplingMode sampling_mode_from_name(std::string_view name) {
  if (name == "greedy") return SamplingMode::kGreedy;
  if (name == "top-k") return SamplingMode::kTopK;
  if (name == "temperature") return SamplingMode::kTemperature;
  raise(ErrorCode::kConfig, "unknown sampling mode '" + std::string(name) + "'");
}

void SamplingConfig::validate() const {
  require(top_k >= 1, ErrorCode::kConfig, "sampling top_k must be >= 1");
  require(temperature > 0.0, ErrorCode::kConfig, "sampling temperature must be positive");
}

GptLogitSource::GptLogitSource(gpt::MultiIndexGpt model, torch::Tensor text_features)
    : model_(std::move(model)), text_(text_features.reshape({1, -1}).to(torch::kFloat32)) {}

std::array<std::vector<double>, 3> GptLogitSource::next(const std::vector<int>& body_prefix) {
  torch::NoGradGuard guard;
  std::vector<std::int64_t> ids(body_prefix.begin(), body_prefix.end());
  const torch::Tensor prefix =
      torch::tensor(ids, torch::kInt64).reshape({1, static_cast<std::int64_t>(ids.size())});
  const gpt::GptOutput out = model_->forward(text_, prefix);
  std::array<std::vector<double>, 3> logits;
  for (std::size_t p = 0; p < 3; ++p) {
    const torch::Tensor row = out.logits[p][0][static_cast<std::int64_t>(ids.size())].to(torch::kFloat64).contiguous();
    logits[p].assign(row.data_ptr<double>(), row.data_ptr<double>() + row.numel());
  }
  return logits;
}

std::vector<int> rank_tokens(const std::vector<double>& logits) {
  std::vector<int> order(logits.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return logits[static_cast<std::size_t>(a)] > logits[static_cast<std::size_t>(b)]; });
  return order;
}

std::vector<double> step_distribution(const std::vector<double>& logits, const SamplingConfig& config) {
  require(!logits.empty(), ErrorCode::kShape, "empty logit vector");
  const double temp = config.mode == SamplingMode::kGreedy ? 1.0 : config.temperature;
  std::vector<char> keep(logits.size(), 1);
  if (config.mode == SamplingMode::kTopK && static_cast<std::size_t>(config.top_k) < logits.size()) {
    std::fill(keep.begin(), keep.end(), 0);
    const std::vector<int> order = rank_tokens(logits);
    for (int i = 0; i < config.top_k; ++i) keep[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])] = 1;
  }
  double top = -INFINITY;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    if (keep[i]) top = std::max(top, logits[i] / temp);
  }
  std::vector<double> p(logits.size(), 0.0);
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    if (!keep[i]) continue;
    p[i] = std::exp(logits[i] / temp - top);
    sum += p[i];
  }
  for (double& v : p) v /= sum;
  return p;
}

SampledTokens sample_tokens(LogitSource& source, const SamplerOptions& options) {
  options.sampling.validate();
  require(options.max_tokens >= 1, ErrorCode::kConfig, "max tokens must be >= 1");
  const std::array<int, 3> codes = source.codes();
  const int limit = std::min(options.max_tokens, source.max_tokens());
  core::Rng rng(options.seed);
  SampledTokens out;
  std::array<bool, 3> open = {true, true, true};
  for (int step = 1; step <= limit; ++step) {
    const std::array<std::vector<double>, 3> logits = source.next(out.tokens[0]);
    SamplerStep record;
    record.step = step;
    std::array<int, 3> chosen{};
    std::array<std::vector<double>, 3> dist;
    for (std::size_t p = 0; p < 3; ++p) {
      require(static_cast<int>(logits[p].size()) == codes[p] + 1, ErrorCode::kConfig,
              std::string(kBranchNames[p]) + " logits do not match the vocabulary size");
      dist[p] = step_distribution(logits[p], options.sampling);
      chosen[p] = options.sampling.mode == SamplingMode::kGreedy ? rank_tokens(logits[p]).front() : draw(dist[p], rng);
    }
    const bool body_end = chosen[0] == codes[0];
    for (std::size_t p = 0; p < 3; ++p) {
      if (!open[p]) {
        record.tokens[p] = -1;
        continue;
      }
      int token = chosen[p];
      const int end = codes[p];
      if (body_end) {
        token = end;
      } else if (p > 0 && token == end && options.consistency_sampler) {
        const std::vector<int> order = rank_tokens(logits[p]);
        const int rank = order[1] == end ? 0 : 1;
        ReplacementEvent ev;
        ev.step = step;
        ev.branch = static_cast<int>(p);
        ev.end_probability = dist[p][static_cast<std::size_t>(end)];
        ev.chosen_token = order[static_cast<std::size_t>(rank)];
        ev.chosen_probability = dist[p][static_cast<std::size_t>(ev.chosen_token)];
        ev.chosen_rank = rank + 1;
        out.replacements.push_back(ev);
        token = ev.chosen_token;
      }
      out.tokens[p].push_back(token);
      record.tokens[p] = token;
      record.probability[p] = dist[p][static_cast<std::size_t>(token)];
      if (token == end) open[p] = false;
    }
    out.trace.push_back(record);
    if (body_end) {
      out.body_ended = true;
      break;
    }
  }
  return out;
}

nlohmann::json audit_to_json(const SampledTokens& sampled) {
  nlohmann::json steps = nlohmann::json::array();
  for (const auto& s : sampled.trace) {
    steps.push_back({{"step", s.step}, {"tokens", s.tokens}, {"probability", s.probability}});
  }
  nlohmann::json replacements = nlohmann::json::array();
  for (const auto& r : sampled.replacements) {
    replacements.push_back({{"step", r.step},
                            {"branch", kBranchNames[r.branch]},
                            {"end_probability", r.end_probability},
                            {"chosen_token", r.chosen_token},
                            {"chosen_probability", r.chosen_probability},
                            {"chosen_rank", r.chosen_rank}});
  }
  return {{"tokens", {{"body", sampled.tokens[0]}, {"hand", sampled.tokens[1]}, {"face", sampled.tokens[2]}}},
          {"body_ended", sampled.body_ended},
          {"steps", steps},
          {"replacements", replacements}};
}

}  // namespace t2mx::infer
