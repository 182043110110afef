#include "t2mx/vq/expert.hpp"

#include "t2mx/core/dataset_io.hpp"
#include "t2mx/core/error.hpp"
#include "t2mx/core/io.hpp"
#include "t2mx/core/tensor_io.hpp"
#include "t2mx/vq/quantizer.hpp"

namespace t2mx::vq {

TokenSequence::TokenSequence(core::Modality modality, int codes, std::vector<int> ids)
    : modality_(modality), codes_(codes), ids_(std::move(ids)) {
  for (std::size_t i = 0; i < ids_.size(); ++i) {
    const int id = ids_[i];
    const bool end_here = id == codes_ && i + 1 == ids_.size();
    require((id >= 0 && id < codes_) || end_here, ErrorCode::kInvalidToken,
            "token " + std::to_string(id) + " at position " + std::to_string(i) + " is invalid for K=" +
                std::to_string(codes_));
  }
}

std::vector<int> TokenSequence::code_ids() const {
  std::vector<int> out = ids_;
  if (ended()) out.pop_back();
  return out;
}

core::FrameMatrix to_frames(const torch::Tensor& t) {
  const torch::Tensor c = t.detach().to(torch::kFloat32).contiguous();
  require(c.dim() == 2, ErrorCode::kShape, "to_frames expects a 2-D tensor");
  core::FrameMatrix m(c.size(0), c.size(1));
  std::memcpy(m.data(), c.data_ptr<float>(), sizeof(float) * static_cast<std::size_t>(c.numel()));
  return m;
}

torch::Tensor to_tensor(const core::FrameMatrix& m) {
  return core::to_tensor(m.data(), m.rows(), m.cols());
}

core::FrameMatrix pad_to_multiple(const core::FrameMatrix& m, int multiple) {
  require(m.rows() >= 1, ErrorCode::kTooShort, "cannot pad an empty motion");
  const Eigen::Index rows = (m.rows() + multiple - 1) / multiple * multiple;
  core::FrameMatrix out(rows, m.cols());
  out.topRows(m.rows()) = m;
  for (Eigen::Index t = m.rows(); t < rows; ++t) out.row(t) = m.row(m.rows() - 1);
  return out;
}

VqExpert::VqExpert(VqNet net, core::ChannelStats stats) : net_(std::move(net)), stats_(std::move(stats)) {
  require(stats_.mean.size() == config().input_width() && stats_.std.size() == config().input_width(),
          ErrorCode::kConfig, "expert statistics width does not match the modality");
  net_->eval();
}

VqExpert VqExpert::load(const std::filesystem::path& dir) {
  require(std::filesystem::exists(dir / "config.json"), ErrorCode::kMissingDependency,
          "expert checkpoint not found: " + dir.string());
  const nlohmann::json cfg = core::read_json_file(dir / "config.json");
  require(cfg.contains("model"), ErrorCode::kMalformed, (dir / "config.json").string() + " lacks 'model'");
  VqNet net(config_from_json(cfg.at("model")));
  core::load_module(dir / "weights", *net);
  const core::NormalizationStats all = core::stats_from_json(core::read_json_file(dir / "normalization.json"));
  return VqExpert(net, all.get(net->config().modality));
}

torch::Tensor VqExpert::codebook() const { return net_->codebook.detach().clone(); }

EncodedMotion VqExpert::encode(const core::FrameMatrix& physical) const {
  require(physical.cols() == config().input_width(), ErrorCode::kShape,
          "expert " + std::string(core::modality_name(modality())) + " expects width " +
              std::to_string(config().input_width()));
  require(physical.rows() >= 1, ErrorCode::kTooShort, "cannot encode an empty motion");
  const int l = downsample();
  require(config().pad_to_multiple || physical.rows() % l == 0, ErrorCode::kShape,
          "frame count " + std::to_string(physical.rows()) + " is not a multiple of " + std::to_string(l));
  core::NormalizationStats ns;
  ns.per_modality[core::index_of(modality())] = stats_;
  const core::FrameMatrix padded = pad_to_multiple(ns.normalize(modality(), physical), l);
  torch::NoGradGuard guard;
  const torch::Tensor z = net_->encoder->forward(to_tensor(padded).unsqueeze(0)).squeeze(0);
  const torch::Tensor tokens = nearest_codes(z, net_->codebook);
  EncodedMotion out;
  out.z = z;
  out.true_length = static_cast<int>(physical.rows());
  out.padded_length = static_cast<int>(padded.rows());
  const auto* p = tokens.data_ptr<std::int64_t>();
  out.tokens.assign(p, p + tokens.numel());
  return out;
}

torch::Tensor VqExpert::decode_rows(const torch::Tensor& zq) const {
  torch::NoGradGuard guard;
  return net_->decoder->forward(zq);
}

core::FrameMatrix VqExpert::decode(const std::vector<int>& tokens) const {
  require(!tokens.empty(), ErrorCode::kTooShort, "cannot decode an empty token sequence");
  for (int t : tokens) {
    require(t >= 0 && t < codes(), ErrorCode::kInvalidToken,
            "token " + std::to_string(t) + " outside [0, " + std::to_string(codes()) + ")");
  }
  std::vector<std::int64_t> ids(tokens.begin(), tokens.end());
  const torch::Tensor idx = torch::tensor(ids, torch::kInt64);
  torch::NoGradGuard guard;
  const torch::Tensor rows = net_->codebook.index_select(0, idx).unsqueeze(0);
  const core::FrameMatrix normalized = to_frames(decode_rows(rows).squeeze(0));
  core::NormalizationStats ns;
  ns.per_modality[core::index_of(modality())] = stats_;
  return ns.denormalize(modality(), normalized);
}

core::FrameMatrix tokens_to_motion(const std::vector<int>& tokens, const VqExpert& expert) {
  return expert.decode(tokens);
}

}  // namespace t2mx::vq
