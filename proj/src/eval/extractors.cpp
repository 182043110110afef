#include "t2mx/eval/extractors.hpp"

#include <algorithm>
#include <numeric>
#include <optional>

#include "t2mx/core/config.hpp"
#include "t2mx/core/dataset_io.hpp"
#include "t2mx/core/error.hpp"
#include "t2mx/core/io.hpp"
#include "t2mx/core/random.hpp"
#include "t2mx/core/tensor_io.hpp"

namespace t2mx::eval {

namespace fs = std::filesystem;
namespace F = torch::nn::functional;

namespace {

constexpr std::uint64_t kInitStream = 1;
constexpr std::uint64_t kTextStream = 2;
constexpr std::uint64_t kEpochStream = 3;
constexpr int kFeatureBatch = 64;

torch::Tensor unit(const torch::Tensor& x) { return F::normalize(x, F::NormalizeFuncOptions().dim(1).eps(1e-8)); }

// Zero-padded B x T x d batch of normalized channels and the valid lengths.
torch::Tensor pad_batch(const std::vector<const core::FrameMatrix*>& frames, std::vector<int>& lengths) {
  int longest = 2;
  lengths.clear();
  for (const auto* f : frames) {
    lengths.push_back(static_cast<int>(f->rows()));
    longest = std::max(longest, static_cast<int>(f->rows()));
  }
  const auto width = frames.front()->cols();
  torch::Tensor x = torch::zeros({static_cast<std::int64_t>(frames.size()), longest, width});
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const core::FrameMatrix& f = *frames[i];
    x[static_cast<std::int64_t>(i)].narrow(0, 0, f.rows()).copy_(core::to_tensor(f.data(), f.rows(), f.cols()));
  }
  return x;
}

// Symmetric InfoNCE over aligned rows.
torch::Tensor info_nce(const torch::Tensor& a, const torch::Tensor& b, double temperature) {
  const torch::Tensor logits = torch::matmul(a, b.t()) / temperature;
  const torch::Tensor target = torch::arange(a.size(0), torch::kLong);
  return 0.5 * (F::cross_entropy(logits, target) + F::cross_entropy(logits.t(), target));
}

}  // namespace

void ExtractorConfig::validate() const {
  require(feature_width >= 1 && hidden >= 1 && text_bins >= 1, ErrorCode::kConfig,
          "extractor widths must be positive");
  require(steps >= 0 && batch >= 2, ErrorCode::kConfig, "extractor steps must be >= 0 and batch >= 2");
  require(lr > 0.0 && temperature > 0.0, ErrorCode::kConfig, "extractor lr and temperature must be positive");
}

nlohmann::json extractor_config_to_json(const ExtractorConfig& c) {
  return {{"feature_width", c.feature_width}, {"hidden", c.hidden}, {"text_bins", c.text_bins},
          {"steps", c.steps},                 {"batch", c.batch},   {"lr", c.lr},
          {"temperature", c.temperature},     {"seed", c.seed}};
}

ExtractorConfig extractor_config_from_json(const nlohmann::json& j) {
  core::ConfigReader r(j, "extractors");
  ExtractorConfig c;
  r.read("feature_width", c.feature_width);
  r.read("hidden", c.hidden);
  r.read("text_bins", c.text_bins);
  r.read("steps", c.steps);
  r.read("batch", c.batch);
  r.read("lr", c.lr);
  r.read("temperature", c.temperature);
  r.read("seed", c.seed);
  r.finish();
  c.validate();
  return c;
}

TextFeatureNetImpl::TextFeatureNetImpl(int bins, int hidden, int width) {
  fc1_ = register_module("fc1", torch::nn::Linear(bins, hidden));
  fc2_ = register_module("fc2", torch::nn::Linear(hidden, width));
}

torch::Tensor TextFeatureNetImpl::forward(const torch::Tensor& bags) {
  return unit(fc2_(F::leaky_relu(fc1_(bags), F::LeakyReLUFuncOptions().negative_slope(0.2))));
}

MotionFeatureNetImpl::MotionFeatureNetImpl(int channels, int hidden, int width) {
  c1_ = register_module("c1", torch::nn::Conv1d(torch::nn::Conv1dOptions(channels, hidden, 3).padding(1)));
  c2_ = register_module("c2", torch::nn::Conv1d(torch::nn::Conv1dOptions(hidden, hidden, 4).stride(2).padding(1)));
  c3_ = register_module("c3", torch::nn::Conv1d(torch::nn::Conv1dOptions(hidden, hidden, 3).padding(1)));
  out_ = register_module("out", torch::nn::Linear(hidden, width));
}

torch::Tensor MotionFeatureNetImpl::forward(const torch::Tensor& x, const std::vector<int>& frames) {
  require(x.dim() == 3 && x.size(0) == static_cast<std::int64_t>(frames.size()) && x.size(1) >= 2, ErrorCode::kShape,
          "motion features need B x T x d input with T >= 2");
  const auto act = F::LeakyReLUFuncOptions().negative_slope(0.2);
  torch::Tensor h = F::leaky_relu(c1_(x.permute({0, 2, 1})), act);
  h = F::leaky_relu(c2_(h), act);
  h = F::leaky_relu(c3_(h), act);  // B x H x T/2
  const std::int64_t steps = h.size(2);
  torch::Tensor mask = torch::zeros({x.size(0), 1, steps});
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const std::int64_t n = std::clamp<std::int64_t>(frames[i] / 2, 1, steps);
    mask[static_cast<std::int64_t>(i)].narrow(1, 0, n).fill_(1.0);
  }
  const torch::Tensor pooled = (h * mask).sum(2) / mask.sum(2);
  return unit(out_(pooled));
}

EvalNetsImpl::EvalNetsImpl(const ExtractorConfig& c) {
  text = register_module("text", TextFeatureNet(c.text_bins, c.hidden, c.feature_width));
  for (core::Modality m : core::kModalities) {
    motion[static_cast<std::size_t>(core::index_of(m))] = register_module(
        std::string(core::modality_name(m)), MotionFeatureNet(core::channel_width(m), c.hidden, c.feature_width));
  }
}

EvalExtractors EvalExtractors::load(const fs::path& dir) {
  require(fs::exists(dir / "config.json"), ErrorCode::kMissingDependency,
          "evaluation extractors not found in " + dir.string());
  EvalExtractors e;
  e.config_ = extractor_config_from_json(core::read_json_file(dir / "config.json"));
  e.nets_ = EvalNets(e.config_);
  core::load_module(dir / "weights", *e.nets_);
  e.nets_->eval();
  e.encoder_ = gpt::HashedBagOfWords(e.config_.text_bins);
  e.stats_ = core::stats_from_json(core::read_json_file(dir / "normalization.json"));
  e.hash_ = core::sha256_tree(dir);
  return e;
}

Features EvalExtractors::text_features(const std::vector<std::string>& texts) const {
  torch::NoGradGuard guard;
  Features out(static_cast<Eigen::Index>(texts.size()), width());
  for (std::size_t start = 0; start < texts.size(); start += kFeatureBatch) {
    const std::size_t n = std::min<std::size_t>(kFeatureBatch, texts.size() - start);
    const std::vector<std::string> chunk(texts.begin() + static_cast<std::ptrdiff_t>(start),
                                         texts.begin() + static_cast<std::ptrdiff_t>(start + n));
    const torch::Tensor f = nets_->text(encoder_.embed_batch(chunk)).to(torch::kDouble).contiguous();
    out.middleRows(static_cast<Eigen::Index>(start), static_cast<Eigen::Index>(n)) =
        Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
            f.data_ptr<double>(), static_cast<Eigen::Index>(n), width());
  }
  return out;
}

Features EvalExtractors::motion_features(core::Modality m, const std::vector<core::MotionClip>& clips) const {
  torch::NoGradGuard guard;
  Features out(static_cast<Eigen::Index>(clips.size()), width());
  MotionFeatureNet net = nets_->motion[static_cast<std::size_t>(core::index_of(m))];
  for (std::size_t start = 0; start < clips.size(); start += kFeatureBatch) {
    const std::size_t n = std::min<std::size_t>(kFeatureBatch, clips.size() - start);
    std::vector<core::FrameMatrix> normalized;
    normalized.reserve(n);
    for (std::size_t i = 0; i < n; ++i) normalized.push_back(stats_.normalize(m, clips[start + i].channels(m)));
    std::vector<const core::FrameMatrix*> ptrs;
    for (const auto& f : normalized) ptrs.push_back(&f);
    std::vector<int> lengths;
    const torch::Tensor x = pad_batch(ptrs, lengths);
    const torch::Tensor f = net->forward(x, lengths).to(torch::kDouble).contiguous();
    out.middleRows(static_cast<Eigen::Index>(start), static_cast<Eigen::Index>(n)) =
        Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
            f.data_ptr<double>(), static_cast<Eigen::Index>(n), width());
  }
  return out;
}

ExtractorTrainResult train_eval_extractors(const core::MotionDataset& dataset, const ExtractorConfig& config,
                                           const fs::path& out_dir) {
  config.validate();
  const core::MotionDataset train = dataset.subset(core::Split::kTrain);
  require(train.size() >= 2, ErrorCode::kDegenerateBatch,
          "extractor training needs at least two training clips to form negatives");
  torch::set_num_threads(1);

  std::array<std::vector<std::optional<core::FrameMatrix>>, 3> normalized;
  for (core::Modality m : core::kModalities) {
    auto& slot = normalized[static_cast<std::size_t>(core::index_of(m))];
    for (const auto& clip : train.clips) {
      slot.push_back(clip.has(m) ? std::optional(dataset.stats.normalize(m, clip.channels(m))) : std::nullopt);
    }
  }

  torch::manual_seed(core::derive_seed(config.seed, kInitStream));
  EvalNets nets(config);
  torch::optim::AdamW optimizer(nets->parameters(), torch::optim::AdamWOptions(config.lr).weight_decay(0.0));
  const gpt::HashedBagOfWords encoder(config.text_bins);
  core::Rng text_rng(core::derive_seed(config.seed, kTextStream));
  core::Rng epoch_rng(core::derive_seed(config.seed, kEpochStream));

  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::size_t cursor = order.size();
  const std::size_t batch = std::min<std::size_t>(static_cast<std::size_t>(config.batch), train.size());

  ExtractorTrainResult result;
  for (int step = 0; step < config.steps; ++step) {
    std::vector<std::size_t> pick;
    while (pick.size() < batch) {
      if (cursor == order.size()) {
        epoch_rng.shuffle(order.begin(), order.end());
        cursor = 0;
      }
      pick.push_back(order[cursor++]);
    }
    std::vector<std::string> texts;
    for (std::size_t i : pick) {
      const auto& t = train.clips[i].text();
      require(!t.empty(), ErrorCode::kNoData, "clip " + train.clips[i].id() + " has no description");
      texts.push_back(t[text_rng.below(t.size())]);
    }
    const torch::Tensor text = nets->text(encoder.embed_batch(texts));

    // Features of the picked clips carrying each modality, with their batch rows.
    std::array<torch::Tensor, 3> feats;
    std::array<std::vector<std::int64_t>, 3> rows;
    for (std::size_t p = 0; p < 3; ++p) {
      std::vector<const core::FrameMatrix*> ptrs;
      for (std::size_t r = 0; r < pick.size(); ++r) {
        const auto& f = normalized[p][pick[r]];
        if (!f) continue;
        ptrs.push_back(&*f);
        rows[p].push_back(static_cast<std::int64_t>(r));
      }
      if (ptrs.size() < 2) continue;
      std::vector<int> lengths;
      feats[p] = nets->motion[p]->forward(pad_batch(ptrs, lengths), lengths);
    }

    torch::Tensor loss = torch::zeros({});
    for (std::size_t p = 0; p < 3; ++p) {
      if (!feats[p].defined()) continue;
      loss = loss + info_nce(text.index_select(0, torch::tensor(rows[p], torch::kLong)), feats[p], config.temperature);
    }
    const std::array<std::pair<std::size_t, std::size_t>, 3> pairs = {{{0, 1}, {0, 2}, {1, 2}}};
    for (const auto& [a, b] : pairs) {
      if (!feats[a].defined() || !feats[b].defined()) continue;
      std::vector<std::int64_t> ia, ib;
      for (std::size_t i = 0; i < rows[a].size(); ++i) {
        const auto it = std::find(rows[b].begin(), rows[b].end(), rows[a][i]);
        if (it == rows[b].end()) continue;
        ia.push_back(static_cast<std::int64_t>(i));
        ib.push_back(it - rows[b].begin());
      }
      if (ia.size() < 2) continue;
      loss = loss + info_nce(feats[a].index_select(0, torch::tensor(ia, torch::kLong)),
                             feats[b].index_select(0, torch::tensor(ib, torch::kLong)), config.temperature);
    }
    optimizer.zero_grad();
    loss.backward();
    optimizer.step();
    result.trace.push_back(loss.item<double>());
    ++result.steps_done;
  }

  fs::create_directories(out_dir);
  core::write_json_atomic(out_dir / "config.json", extractor_config_to_json(config));
  core::save_module(out_dir / "weights", *nets);
  core::write_json_atomic(out_dir / "normalization.json", core::stats_to_json(dataset.stats));
  return result;
}

}  // namespace t2mx::eval
