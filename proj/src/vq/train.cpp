#include "t2mx/vq/train.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <set>
#include <sstream>

#include "t2mx/core/config.hpp"
#include "t2mx/core/dataset_io.hpp"
#include "t2mx/core/error.hpp"
#include "t2mx/core/io.hpp"
#include "t2mx/core/random.hpp"
#include "t2mx/core/tensor_io.hpp"
#include "t2mx/vq/expert.hpp"
#include "t2mx/vq/loss.hpp"
#include "t2mx/vq/quantizer.hpp"

namespace t2mx::vq {

namespace fs = std::filesystem;

void VqTrainConfig::validate(int downsample) const {
  require(steps >= 1 && batch >= 1, ErrorCode::kConfig, "vq train steps and batch must be positive");
  require(window >= downsample && window % downsample == 0, ErrorCode::kConfig,
          "vq train window must be a positive multiple of " + std::to_string(downsample));
  require(lr > 0.0 && weight_decay >= 0.0, ErrorCode::kConfig, "vq train lr must be positive");
  require(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0, ErrorCode::kConfig,
          "vq train betas must be in [0, 1)");
  require(checkpoint_every >= 0, ErrorCode::kConfig, "vq train checkpoint_every must be >= 0");
}

nlohmann::json train_config_to_json(const VqTrainConfig& c) {
  return {{"steps", c.steps},         {"batch", c.batch},
          {"window", c.window},       {"lr", c.lr},
          {"weight_decay", c.weight_decay}, {"beta1", c.beta1},
          {"beta2", c.beta2},         {"lr_milestones", c.lr_milestones},
          {"lr_gamma", c.lr_gamma},   {"checkpoint_every", c.checkpoint_every},
          {"seed", c.seed}};
}

VqTrainConfig train_config_from_json(const nlohmann::json& j) {
  core::ConfigReader r(j, "vq_train");
  VqTrainConfig c;
  r.read("steps", c.steps);
  r.read("batch", c.batch);
  r.read("window", c.window);
  r.read("lr", c.lr);
  r.read("weight_decay", c.weight_decay);
  r.read("beta1", c.beta1);
  r.read("beta2", c.beta2);
  r.read("lr_milestones", c.lr_milestones);
  r.read("lr_gamma", c.lr_gamma);
  r.read("checkpoint_every", c.checkpoint_every);
  r.read("seed", c.seed);
  r.finish();
  return c;
}

namespace {

constexpr std::uint64_t kInitStream = 1;
constexpr std::uint64_t kCropStream = 2;
constexpr std::uint64_t kEpochStream = 3;

struct Batch {
  torch::Tensor x;      // B x W x d
  torch::Tensor frame;  // B x W
  torch::Tensor latent; // B x W/l
};

Batch make_batch(const std::vector<torch::Tensor>& clips, const std::vector<std::size_t>& pick,
                 int window, int l, core::Rng& rng) {
  const auto b = static_cast<std::int64_t>(pick.size());
  const std::int64_t d = clips[pick[0]].size(1);
  Batch out{torch::zeros({b, window, d}), torch::zeros({b, window}), torch::zeros({b, window / l})};
  using torch::indexing::Slice;
  for (std::int64_t i = 0; i < b; ++i) {
    const torch::Tensor& c = clips[pick[i]];
    const std::int64_t t = c.size(0);
    if (t >= window) {
      const auto start = static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(t - window + 1)));
      out.x[i] = c.index({Slice(start, start + window)});
      out.frame[i].fill_(1.0);
      out.latent[i].fill_(1.0);
    } else {
      out.x[i].index_put_({Slice(0, t)}, c);
      out.x[i].index_put_({Slice(t, window)}, c[t - 1].expand({window - t, d}));
      out.frame[i].index_put_({Slice(0, t)}, 1.0);
      out.latent[i].index_put_({Slice(0, (t + l - 1) / l)}, 1.0);
    }
  }
  return out;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string trace_csv(const std::vector<VqStepLoss>& trace) {
  std::ostringstream os;
  os << "step,total,reconstruction,velocity,alignment,commitment,used_codes\n";
  for (const auto& s : trace) {
    os << s.step << ',' << fmt(s.total) << ',' << fmt(s.reconstruction) << ',' << fmt(s.velocity) << ','
       << fmt(s.alignment) << ',' << fmt(s.commitment) << ',' << s.used_codes << '\n';
  }
  return os.str();
}

std::vector<VqStepLoss> parse_trace(const fs::path& path) {
  std::istringstream is(core::read_text_file(path));
  std::string line;
  std::getline(is, line);
  std::vector<VqStepLoss> out;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    VqStepLoss s;
    const int n = std::sscanf(line.c_str(), "%d,%lf,%lf,%lf,%lf,%lf,%d", &s.step, &s.total, &s.reconstruction,
                              &s.velocity, &s.alignment, &s.commitment, &s.used_codes);
    require(n == 7, ErrorCode::kMalformed, path.string() + ": bad row '" + line + "'");
    out.push_back(s);
  }
  return out;
}

std::string curve_csv(const std::vector<VqEpochStats>& epochs) {
  std::ostringstream os;
  os << "epoch,total,reconstruction,usage\n";
  for (const auto& e : epochs) {
    os << e.epoch << ',' << fmt(e.total) << ',' << fmt(e.reconstruction) << ',' << fmt(e.usage) << '\n';
  }
  return os.str();
}

nlohmann::json epochs_to_json(const std::vector<VqEpochStats>& epochs) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& e : epochs) {
    j.push_back({{"epoch", e.epoch}, {"total", e.total}, {"reconstruction", e.reconstruction}, {"usage", e.usage}});
  }
  return j;
}

std::vector<VqEpochStats> epochs_from_json(const nlohmann::json& j) {
  std::vector<VqEpochStats> out;
  for (const auto& e : j) {
    out.push_back({e.at("epoch").get<int>(), e.at("total").get<double>(), e.at("reconstruction").get<double>(),
                   e.at("usage").get<double>()});
  }
  return out;
}

// Random valid latent row per requested code, drawn from the batch.
void overwrite_codes(VqNet& net, const torch::Tensor& valid_rows, const std::vector<std::int64_t>& codes,
                     core::Rng& rng) {
  const auto n = static_cast<std::uint64_t>(valid_rows.size(0));
  for (std::int64_t k : codes) {
    const torch::Tensor row = valid_rows[static_cast<std::int64_t>(rng.below(n))];
    net->codebook[k].copy_(row);
    net->ema_sum[k].copy_(row);
    net->ema_count[k].fill_(1.0);
  }
}

}  // namespace

VqTrainResult train_vqvae(const core::MotionDataset& dataset, const VqConfig& model, const VqTrainConfig& train,
                          const fs::path& out_dir, const VqRunOptions& options) {
  model.validate();
  const int l = model.downsample();
  train.validate(l);
  const core::Modality modality = model.modality;
  torch::set_num_threads(1);

  const core::MotionDataset data = dataset.subset(core::Split::kTrain).with_modality(modality);
  require(data.size() > 0, ErrorCode::kNoData,
          "no training clips carry " + std::string(core::modality_name(modality)) + " channels");
  const core::NormalizationStats stats =
      dataset.stats.get(modality).empty() ? core::compute_normalization(dataset) : dataset.stats;
  std::vector<torch::Tensor> clips;
  for (const auto& c : data.clips) clips.push_back(to_tensor(stats.normalize(modality, c.channels(modality))));
  const std::size_t n = clips.size();
  const auto batch = std::min<std::size_t>(static_cast<std::size_t>(train.batch), n);
  const auto steps_per_epoch = static_cast<int>((n + batch - 1) / batch);

  torch::manual_seed(core::derive_seed(train.seed, kInitStream));
  VqNet net(model);
  net->train();
  const bool codebook_by_loss = model.codebook_mode == CodebookMode::kLoss && !model.freeze_codebook;
  net->codebook.set_requires_grad(codebook_by_loss);
  std::vector<torch::Tensor> params;
  for (const auto& p : net->encoder->parameters()) params.push_back(p);
  for (const auto& p : net->decoder->parameters()) params.push_back(p);
  if (codebook_by_loss) params.push_back(net->codebook);
  torch::optim::AdamW optimizer(params, torch::optim::AdamWOptions(train.lr)
                                            .betas({train.beta1, train.beta2})
                                            .weight_decay(train.weight_decay));

  const nlohmann::json config_json = {{"model", config_to_json(model)}, {"train", train_config_to_json(train)}};
  VqTrainResult result;
  int start = 0;
  std::vector<char> epoch_used(static_cast<std::size_t>(model.codes), 0);

  fs::create_directories(out_dir);
  if (options.resume && fs::exists(out_dir / "state.json")) {
    const nlohmann::json stored = core::read_json_file(out_dir / "config.json");
    require(stored == config_json, ErrorCode::kConfig,
            "cannot resume " + out_dir.string() + ": configuration differs from the checkpoint");
    core::load_module(out_dir / "weights", *net);
    core::load_adamw(out_dir / "optimizer", optimizer, *net);
    const nlohmann::json state = core::read_json_file(out_dir / "state.json");
    start = state.at("step").get<int>();
    epoch_used = state.at("epoch_used").get<std::vector<char>>();
    result.epochs = epochs_from_json(state.at("epochs"));
    result.trace = parse_trace(out_dir / "loss_trace.csv");
    require(static_cast<int>(result.trace.size()) == start, ErrorCode::kMalformed,
            (out_dir / "loss_trace.csv").string() + " does not match state.json");
  }

  auto save = [&](int step_count) {
    core::write_json_atomic(out_dir / "config.json", config_json);
    core::save_module(out_dir / "weights", *net);
    core::save_adamw(out_dir / "optimizer", optimizer, *net);
    const torch::Tensor cb = net->codebook.detach().contiguous();
    core::write_file_atomic(out_dir / "codebook.f32",
                            std::string_view(static_cast<const char*>(cb.data_ptr()),
                                             static_cast<std::size_t>(cb.numel()) * sizeof(float)));
    core::NormalizationStats only;
    only.per_modality[core::index_of(modality)] = stats.get(modality);
    core::write_json_atomic(out_dir / "normalization.json", core::stats_to_json(only));
    core::write_json_atomic(out_dir / "state.json",
                            {{"step", step_count},
                             {"epoch_used", epoch_used},
                             {"epochs", epochs_to_json(result.epochs)},
                             {"rng", {{"seed", train.seed}, {"scheme", "per-step derived streams"}}},
                             {"finished", step_count >= train.steps}});
    core::write_file_atomic(out_dir / "loss_trace.csv", trace_csv(result.trace));
    core::write_file_atomic(out_dir / "loss_curve.csv", curve_csv(result.epochs));
  };

  std::vector<std::size_t> order;
  int order_epoch = -1;
  for (int step = start; step < train.steps; ++step) {
    if (options.stop_after >= 0 && step >= options.stop_after) {
      save(step);
      result.steps_done = step;
      return result;
    }
    const int epoch = step / steps_per_epoch;
    const int pos = step % steps_per_epoch;
    if (epoch != order_epoch) {
      order.resize(n);
      std::iota(order.begin(), order.end(), std::size_t{0});
      core::Rng(core::derive_seed(core::derive_seed(train.seed, kEpochStream), static_cast<std::uint64_t>(epoch)))
          .shuffle(order.begin(), order.end());
      order_epoch = epoch;
    }
    const std::size_t lo = static_cast<std::size_t>(pos) * batch;
    const std::vector<std::size_t> pick(order.begin() + static_cast<std::ptrdiff_t>(lo),
                                        order.begin() + static_cast<std::ptrdiff_t>(std::min(n, lo + batch)));
    core::Rng rng(core::derive_seed(core::derive_seed(train.seed, kCropStream), static_cast<std::uint64_t>(step)));
    const Batch b = make_batch(clips, pick, train.window, l, rng);

    double lr = train.lr;
    for (int m : train.lr_milestones) {
      if (step >= m) lr *= train.lr_gamma;
    }
    for (auto& g : optimizer.param_groups()) static_cast<torch::optim::AdamWOptions&>(g.options()).lr(lr);

    const torch::Tensor z = net->encoder->forward(b.x);
    const torch::Tensor valid = b.latent.to(torch::kBool);
    if (!model.freeze_codebook && net->initialized.item<std::int64_t>() == 0) {
      torch::NoGradGuard guard;
      const torch::Tensor rows = z.detach().index({valid});
      std::vector<std::int64_t> all(static_cast<std::size_t>(model.codes));
      std::iota(all.begin(), all.end(), std::int64_t{0});
      overwrite_codes(net, rows, all, rng);
      net->initialized.fill_(1);
    }
    const Quantized q = quantize(z, net->codebook);
    const torch::Tensor x_hat = net->decoder->forward(straight_through(z, q.zq));
    const VqLossTerms terms = vq_loss(b.x, x_hat, z, q.zq, model.alpha, model.beta, b.frame, b.latent);
    optimizer.zero_grad();
    terms.total.backward();
    optimizer.step();

    torch::NoGradGuard guard;
    const torch::Tensor tokens = q.tokens.index({valid});
    const torch::Tensor counts = torch::bincount(tokens, {}, model.codes);
    if (model.codebook_mode == CodebookMode::kEma && !model.freeze_codebook) {
      const double d = model.ema_decay;
      const torch::Tensor rows = z.detach().index({valid});
      const torch::Tensor sums = torch::zeros_like(net->ema_sum).index_add_(0, tokens, rows);
      net->ema_count.mul_(d).add_(counts.to(torch::kFloat32), 1.0 - d);
      net->ema_sum.mul_(d).add_(sums, 1.0 - d);
      const torch::Tensor total = net->ema_count.sum();
      const torch::Tensor smoothed = (net->ema_count + 1e-5) / (total + model.codes * 1e-5) * total;
      net->codebook.copy_(net->ema_sum / smoothed.unsqueeze(1));
    }
    net->usage.add_(counts);
    const auto* cp = counts.data_ptr<std::int64_t>();
    int used = 0;
    for (int k = 0; k < model.codes; ++k) {
      used += cp[k] > 0;
      if (cp[k] > 0) epoch_used[static_cast<std::size_t>(k)] = 1;
    }
    if (model.reset_dead_codes && !model.freeze_codebook && (step + 1) % model.reset_every == 0) {
      std::vector<std::int64_t> dead;
      const auto* up = net->usage.data_ptr<std::int64_t>();
      for (int k = 0; k < model.codes; ++k) {
        if (up[k] == 0) dead.push_back(k);
      }
      if (!dead.empty()) overwrite_codes(net, z.detach().index({valid}), dead, rng);
      net->usage.zero_();
    }

    result.trace.push_back({step + 1, terms.total.item<double>(), terms.reconstruction.item<double>(),
                            terms.velocity.item<double>(), terms.alignment.item<double>(),
                            terms.commitment.item<double>(), used});
    if (pos == steps_per_epoch - 1 || step + 1 == train.steps) {
      const int first = epoch * steps_per_epoch;
      double tot = 0.0;
      double rec = 0.0;
      for (int s = first; s <= step; ++s) {
        tot += result.trace[static_cast<std::size_t>(s)].total;
        rec += result.trace[static_cast<std::size_t>(s)].reconstruction;
      }
      const double count = step - first + 1;
      const auto used_epoch = std::count(epoch_used.begin(), epoch_used.end(), 1);
      result.epochs.push_back({epoch + 1, tot / count, rec / count, static_cast<double>(used_epoch) / model.codes});
      std::fill(epoch_used.begin(), epoch_used.end(), 0);
    }
    if (train.checkpoint_every > 0 && (step + 1) % train.checkpoint_every == 0 && step + 1 < train.steps) {
      save(step + 1);
    }
  }
  save(train.steps);
  result.steps_done = train.steps;
  result.finished = true;
  return result;
}

double codebook_usage(const fs::path& checkpoint_dir, const core::MotionDataset& dataset) {
  const VqExpert expert = VqExpert::load(checkpoint_dir);
  const core::MotionDataset data = dataset.subset(core::Split::kTrain).with_modality(expert.modality());
  require(data.size() > 0, ErrorCode::kNoData, "no clips to measure codebook usage on");
  std::set<int> used;
  for (const auto& c : data.clips) {
    for (int t : expert.encode(c.channels(expert.modality())).tokens) used.insert(t);
  }
  return static_cast<double>(used.size()) / expert.codes();
}

}  // namespace t2mx::vq
