#include "t2mx/gpt/train.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include "t2mx/core/config.hpp"
#include "t2mx/core/error.hpp"
#include "t2mx/core/io.hpp"
#include "t2mx/core/tensor_io.hpp"
#include "t2mx/gpt/batching.hpp"

namespace t2mx::gpt {

namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kInitStream = 1;
constexpr std::uint64_t kTextStream = 2;
constexpr std::uint64_t kEpochStream = 3;
const char* kNames[3] = {"body", "hand", "face"};

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string trace_csv(const std::vector<GptStepLoss>& trace) {
  std::ostringstream os;
  os << "step,total,gpt,body,hand,face,consistency\n";
  for (const auto& s : trace) {
    os << s.step << ',' << fmt(s.total) << ',' << fmt(s.gpt) << ',' << fmt(s.body) << ',' << fmt(s.hand) << ','
       << fmt(s.face) << ',' << fmt(s.consistency) << '\n';
  }
  return os.str();
}

std::vector<GptStepLoss> parse_trace(const fs::path& path) {
  std::istringstream is(core::read_text_file(path));
  std::string line;
  std::getline(is, line);
  std::vector<GptStepLoss> out;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    GptStepLoss s;
    const int n = std::sscanf(line.c_str(), "%d,%lf,%lf,%lf,%lf,%lf,%lf", &s.step, &s.total, &s.gpt, &s.body,
                              &s.hand, &s.face, &s.consistency);
    require(n == 7, ErrorCode::kMalformed, path.string() + ": bad row '" + line + "'");
    out.push_back(s);
  }
  return out;
}

nlohmann::json settings_json(const GptSettings& s) {
  return {{"model", gpt_config_to_json(s.model)},
          {"train", gpt_train_to_json(s.train)},
          {"consistency", consistency::consistency_to_json(s.consistency)},
          {"text_encoder", s.text_encoder}};
}

GptSettings settings_from_json(const nlohmann::json& j) {
  core::ConfigReader r(j, "gpt_checkpoint");
  GptSettings s;
  if (const auto* m = r.child("model")) s.model = gpt_config_from_json(*m);
  if (const auto* t = r.child("train")) s.train = gpt_train_from_json(*t);
  if (const auto* c = r.child("consistency")) s.consistency = consistency::consistency_from_json(*c);
  if (const auto* e = r.child("text_encoder")) s.text_encoder = *e;
  r.finish();
  return s;
}

std::array<int, 3> class_counts(const GptConfig& c) {
  return {c.codes[0] + 1, c.codes[1] + 1, c.codes[2] + 1};
}

}  // namespace

void GptTrainConfig::validate() const {
  require(steps >= 1 && batch >= 1, ErrorCode::kConfig, "gpt train steps and batch must be positive");
  require(lr > 0.0 && weight_decay >= 0.0, ErrorCode::kConfig, "gpt train lr must be positive");
  require(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0, ErrorCode::kConfig,
          "gpt train betas must be in [0, 1)");
  require(eta1 >= 0.0 && eta2 >= 0.0, ErrorCode::kConfig, "gpt train eta weights must be non-negative");
  require(checkpoint_every >= 0, ErrorCode::kConfig, "gpt train checkpoint_every must be >= 0");
}

nlohmann::json gpt_train_to_json(const GptTrainConfig& c) {
  return {{"steps", c.steps},
          {"batch", c.batch},
          {"lr", c.lr},
          {"weight_decay", c.weight_decay},
          {"beta1", c.beta1},
          {"beta2", c.beta2},
          {"lr_milestones", c.lr_milestones},
          {"lr_gamma", c.lr_gamma},
          {"eta1", c.eta1},
          {"eta2", c.eta2},
          {"checkpoint_every", c.checkpoint_every},
          {"seed", c.seed}};
}

GptTrainConfig gpt_train_from_json(const nlohmann::json& j) {
  core::ConfigReader r(j, "gpt_train");
  GptTrainConfig c;
  r.read("steps", c.steps);
  r.read("batch", c.batch);
  r.read("lr", c.lr);
  r.read("weight_decay", c.weight_decay);
  r.read("beta1", c.beta1);
  r.read("beta2", c.beta2);
  r.read("lr_milestones", c.lr_milestones);
  r.read("lr_gamma", c.lr_gamma);
  r.read("eta1", c.eta1);
  r.read("eta2", c.eta2);
  r.read("checkpoint_every", c.checkpoint_every);
  r.read("seed", c.seed);
  r.finish();
  return c;
}

ExpertSet load_experts(const std::array<fs::path, 3>& dirs) {
  ExpertSet out;
  for (std::size_t p = 0; p < 3; ++p) {
    out[p] = std::make_shared<const vq::VqExpert>(vq::VqExpert::load(dirs[p]));
    require(out[p]->modality() == core::kModalities[p], ErrorCode::kConfig,
            dirs[p].string() + " is not a " + kNames[p] + " expert");
  }
  return out;
}

std::vector<TokenizedClip> tokenize_clips(const std::vector<core::MotionClip>& clips, const ExpertSet& experts,
                                          int max_tokens) {
  for (std::size_t p = 1; p < 3; ++p) {
    require(experts[p]->downsample() == experts[0]->downsample(), ErrorCode::kConfig,
            "experts must share one temporal downsampling factor");
  }
  torch::NoGradGuard guard;
  std::vector<TokenizedClip> out;
  out.reserve(clips.size());
  for (const auto& c : clips) {
    TokenizedClip t;
    t.id = c.id();
    t.texts = c.text();
    t.mask = c.modality_mask();
    for (std::size_t p = 0; p < 3; ++p) {
      if (!t.mask[p]) continue;
      std::vector<int> ids = experts[p]->encode(c.channels(core::kModalities[p])).tokens;
      if (static_cast<int>(ids.size()) > max_tokens) ids.resize(static_cast<std::size_t>(max_tokens));
      t.tokens[p] = std::move(ids);
    }
    out.push_back(std::move(t));
  }
  return out;
}

TrainingBatch assemble_batch(const std::vector<TokenizedClip>& clips, const std::vector<std::size_t>& pick,
                             const TextEncoder& encoder, const GptConfig& config, core::Rng* text_rng) {
  require(!pick.empty(), ErrorCode::kNoData, "empty batch");
  const auto b = static_cast<std::int64_t>(pick.size());
  std::size_t longest = 0;
  for (std::size_t i : pick) longest = std::max(longest, clips[i].tokens[0].size());
  const auto l = static_cast<std::int64_t>(longest) + 1;

  TrainingBatch out;
  std::vector<std::string> texts;
  out.body_prefix = torch::full({b, l - 1}, config.end_id(0), torch::kInt64);
  out.targets.lengths = torch::zeros({b}, torch::kInt64);
  for (std::size_t p = 0; p < 3; ++p) {
    out.targets.tokens[p] = torch::full({b, l}, config.end_id(static_cast<int>(p)), torch::kInt64);
    out.targets.annotated[p] = torch::zeros({b}, torch::kBool);
  }
  for (std::int64_t i = 0; i < b; ++i) {
    const TokenizedClip& c = clips[pick[static_cast<std::size_t>(i)]];
    require(!c.texts.empty(), ErrorCode::kNoData, "clip " + c.id + " has no description");
    texts.push_back(text_rng ? c.texts[text_rng->below(c.texts.size())] : c.texts.front());
    const auto t = static_cast<std::int64_t>(c.tokens[0].size());
    out.targets.lengths[i] = t + 1;
    auto* prefix = out.body_prefix[i].data_ptr<std::int64_t>();
    for (std::int64_t k = 0; k < t; ++k) prefix[k] = c.tokens[0][static_cast<std::size_t>(k)];
    for (std::size_t p = 0; p < 3; ++p) {
      if (!c.mask[p]) continue;
      out.targets.annotated[p][i] = true;
      auto* dst = out.targets.tokens[p][i].data_ptr<std::int64_t>();
      const auto& src = c.tokens[p];
      for (std::int64_t k = 0; k < std::min<std::int64_t>(t, static_cast<std::int64_t>(src.size())); ++k) {
        dst[k] = src[static_cast<std::size_t>(k)];
      }
    }
  }
  out.text = encoder.embed_batch(texts);
  out.valid = position_mask(out.targets.lengths, l);
  return out;
}

void check_compatibility(const GptSettings& settings, const ExpertSet& experts, const TextEncoder& encoder) {
  for (std::size_t p = 0; p < 3; ++p) {
    require(settings.model.codes[p] == experts[p]->codes(), ErrorCode::kConfig,
            std::string("gpt.codes for ") + kNames[p] + " is " + std::to_string(settings.model.codes[p]) +
                " but the expert has " + std::to_string(experts[p]->codes()));
  }
  require(settings.model.body_code_width == experts[0]->config().code_width, ErrorCode::kConfig,
          "gpt.body_code_width does not match the body expert codebook width " +
              std::to_string(experts[0]->config().code_width));
  require(settings.model.text_features == encoder.features(), ErrorCode::kConfig,
          "gpt.text_features does not match the text encoder width " + std::to_string(encoder.features()));
}

GptTrainResult train_gpt(const core::MotionDataset& dataset, const std::array<fs::path, 3>& expert_dirs,
                         const GptSettings& settings, const fs::path& out_dir, const GptRunOptions& options) {
  settings.model.validate();
  settings.train.validate();
  settings.consistency.validate();
  const GptTrainConfig& train = settings.train;
  torch::set_num_threads(1);

  const ExpertSet experts = load_experts(expert_dirs);
  const std::shared_ptr<const TextEncoder> encoder = make_text_encoder(settings.text_encoder);
  check_compatibility(settings, experts, *encoder);

  const core::MotionDataset data = dataset.subset(core::Split::kTrain);
  require(data.size() > 0, ErrorCode::kNoData, "no training clips");
  const std::vector<TokenizedClip> clips = tokenize_clips(data.clips, experts, settings.model.max_tokens);
  std::vector<core::ModalityMask> masks;
  for (const auto& c : clips) masks.push_back(c.mask);
  auto plan_for = [&](int epoch) {
    return make_batches(masks, train.batch,
                        core::derive_seed(core::derive_seed(train.seed, kEpochStream), static_cast<std::uint64_t>(epoch)));
  };
  const auto steps_per_epoch = static_cast<int>(plan_for(0).size());

  torch::manual_seed(core::derive_seed(train.seed, kInitStream));
  MultiIndexGpt model(settings.model, experts[0]->codebook());
  model->train();
  const bool consist = settings.consistency.enabled;
  consistency::JointSpaceExtractors extractors(class_counts(settings.model), settings.consistency.d_joint);
  std::vector<torch::Tensor> params = model->parameters();
  if (consist) {
    for (const auto& p : extractors->parameters()) params.push_back(p);
  }
  torch::optim::AdamW optimizer(params, torch::optim::AdamWOptions(train.lr)
                                            .betas({train.beta1, train.beta2})
                                            .weight_decay(train.weight_decay));
  // Optimizer state is keyed by name, so both modules are saved under one root.
  torch::nn::Module bundle;
  bundle.register_module("gpt", model.ptr());
  if (consist) bundle.register_module("extractors", extractors.ptr());

  const nlohmann::json config_json = settings_json(settings);
  nlohmann::json experts_json = nlohmann::json::object();
  fs::create_directories(out_dir);
  for (std::size_t p = 0; p < 3; ++p) {
    experts_json[kNames[p]] = {{"path", fs::relative(fs::absolute(expert_dirs[p]), fs::absolute(out_dir)).generic_string()},
                               {"sha256", core::sha256_tree(expert_dirs[p])}};
  }

  GptTrainResult result;
  int start = 0;
  if (options.resume && fs::exists(out_dir / "state.json")) {
    require(core::read_json_file(out_dir / "config.json") == config_json, ErrorCode::kConfig,
            "cannot resume " + out_dir.string() + ": configuration differs from the checkpoint");
    require(core::read_json_file(out_dir / "experts.json") == experts_json, ErrorCode::kConfig,
            "cannot resume " + out_dir.string() + ": expert checkpoints changed");
    core::load_module(out_dir / "weights", *model);
    if (consist) core::load_module(out_dir / "extractors", *extractors);
    core::load_adamw(out_dir / "optimizer", optimizer, bundle);
    start = core::read_json_file(out_dir / "state.json").at("step").get<int>();
    result.trace = parse_trace(out_dir / "loss_trace.csv");
    require(static_cast<int>(result.trace.size()) == start, ErrorCode::kMalformed,
            (out_dir / "loss_trace.csv").string() + " does not match state.json");
  }

  auto save = [&](int step_count) {
    core::write_json_atomic(out_dir / "config.json", config_json);
    core::write_json_atomic(out_dir / "experts.json", experts_json);
    core::save_module(out_dir / "weights", *model);
    if (consist) core::save_module(out_dir / "extractors", *extractors);
    core::save_adamw(out_dir / "optimizer", optimizer, bundle);
    core::write_json_atomic(out_dir / "state.json",
                            {{"step", step_count},
                             {"rng", {{"seed", train.seed}, {"scheme", "per-step derived streams"}}},
                             {"finished", step_count >= train.steps}});
    core::write_file_atomic(out_dir / "loss_trace.csv", trace_csv(result.trace));
  };

  BatchPlan plan;
  int plan_epoch = -1;
  for (int step = start; step < train.steps; ++step) {
    if (options.stop_after >= 0 && step >= options.stop_after) {
      save(step);
      result.steps_done = step;
      return result;
    }
    const int epoch = step / steps_per_epoch;
    if (epoch != plan_epoch) {
      plan = plan_for(epoch);
      plan_epoch = epoch;
    }
    core::Rng text_rng(core::derive_seed(core::derive_seed(train.seed, kTextStream), static_cast<std::uint64_t>(step)));
    const TrainingBatch batch = assemble_batch(clips, plan[static_cast<std::size_t>(step % steps_per_epoch)],
                                               *encoder, settings.model, &text_rng);

    double lr = train.lr;
    for (int m : train.lr_milestones) {
      if (step >= m) lr *= train.lr_gamma;
    }
    for (auto& g : optimizer.param_groups()) static_cast<torch::optim::AdamWOptions&>(g.options()).lr(lr);

    const GptOutput out = model->forward(batch.text, batch.body_prefix);
    const GptLossTerms terms = gpt_loss(out.logits, batch.targets, train.eta1, train.eta2);
    torch::Tensor consist_total;
    if (consist) {
      std::array<torch::Tensor, 3> pred;
      std::array<torch::Tensor, 3> truth;
      for (std::size_t p = 0; p < 3; ++p) {
        const torch::Tensor& tk = batch.targets.tokens[p];
        const auto classes = out.logits[p].size(-1);
        pred[p] = extractors->at(static_cast<int>(p))->forward(tk, torch::softmax(out.logits[p], -1));
        truth[p] = extractors->at(static_cast<int>(p))->forward(tk, torch::one_hot(tk, classes).to(torch::kFloat32));
      }
      const auto forward_terms =
          consistency::consistency_loss(pred, truth, batch.valid, batch.targets.annotated, settings.consistency);
      const auto backward_terms =
          consistency::consistency_loss(truth, pred, batch.valid, batch.targets.annotated, settings.consistency);
      consist_total = 0.5 * (forward_terms.total + backward_terms.total);
    }
    const torch::Tensor total = consistency::final_loss(terms.total, consist_total);
    optimizer.zero_grad();
    total.backward();
    optimizer.step();

    result.trace.push_back({step + 1, total.item<double>(), terms.total.item<double>(), terms.ce[0].item<double>(),
                            terms.ce[1].item<double>(), terms.ce[2].item<double>(),
                            consist ? consist_total.item<double>() : 0.0});
    if (train.checkpoint_every > 0 && (step + 1) % train.checkpoint_every == 0 && step + 1 < train.steps) {
      save(step + 1);
    }
  }
  save(train.steps);
  result.steps_done = train.steps;
  result.finished = true;
  return result;
}

GptCheckpoint GptCheckpoint::load(const fs::path& dir) {
  require(fs::exists(dir / "config.json") && fs::exists(dir / "experts.json"), ErrorCode::kMissingDependency,
          "no generator checkpoint at " + dir.string());
  GptCheckpoint ck;
  ck.dir = dir;
  ck.settings = settings_from_json(core::read_json_file(dir / "config.json"));
  const nlohmann::json refs = core::read_json_file(dir / "experts.json");
  std::array<fs::path, 3> dirs;
  for (std::size_t p = 0; p < 3; ++p) {
    require(refs.contains(kNames[p]), ErrorCode::kMalformed, (dir / "experts.json").string() + " lacks " + kNames[p]);
    dirs[p] = dir / refs.at(kNames[p]).at("path").get<std::string>();
    require(fs::exists(dirs[p] / "config.json"), ErrorCode::kMissingDependency,
            std::string(kNames[p]) + " expert checkpoint missing at " + dirs[p].string());
    require(core::sha256_tree(dirs[p]) == refs.at(kNames[p]).at("sha256").get<std::string>(), ErrorCode::kConfig,
            std::string(kNames[p]) + " expert at " + dirs[p].string() + " changed since the generator was trained");
  }
  ck.experts = load_experts(dirs);
  ck.text = make_text_encoder(ck.settings.text_encoder);
  check_compatibility(ck.settings, ck.experts, *ck.text);
  ck.model = MultiIndexGpt(ck.settings.model, ck.experts[0]->codebook());
  core::load_module(dir / "weights", *ck.model);
  ck.model->eval();
  return ck;
}

}  // namespace t2mx::gpt
