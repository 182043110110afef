#include "t2mx/vq/net.hpp"

#include "t2mx/core/config.hpp"
#include "t2mx/core/error.hpp"

namespace t2mx::vq {

namespace {

torch::nn::Conv1d conv(int in, int out, int kernel, int stride = 1, int padding = 0, int dilation = 1) {
  return torch::nn::Conv1d(
      torch::nn::Conv1dOptions(in, out, kernel).stride(stride).padding(padding).dilation(dilation));
}

int dilation_of(int block) {
  int d = 1;
  for (int i = 0; i < block; ++i) d *= 3;
  return d;
}

std::string mode_name(CodebookMode m) { return m == CodebookMode::kEma ? "ema" : "loss"; }

CodebookMode mode_from(const std::string& s) {
  if (s == "loss") return CodebookMode::kLoss;
  if (s == "ema") return CodebookMode::kEma;
  raise(ErrorCode::kConfig, "codebook_mode must be 'loss' or 'ema', got '" + s + "'");
}

}  // namespace

VqConfig VqConfig::for_modality(core::Modality m) {
  VqConfig c;
  c.modality = m;
  c.alpha = m == core::Modality::kBody ? 0.5 : 0.0;
  return c;
}

void VqConfig::validate() const {
  require(codes >= 2, ErrorCode::kConfig, "vq.codes must be >= 2");
  require(code_width >= 1 && hidden >= 1, ErrorCode::kConfig, "vq widths must be positive");
  require(stages >= 0 && stages <= 6, ErrorCode::kConfig, "vq.stages must be in [0, 6]");
  require(res_blocks >= 0, ErrorCode::kConfig, "vq.res_blocks must be >= 0");
  require(alpha >= 0.0 && beta >= 0.0, ErrorCode::kConfig, "vq loss weights must be non-negative");
  require(ema_decay > 0.0 && ema_decay < 1.0, ErrorCode::kConfig, "vq.ema_decay must be in (0, 1)");
  require(reset_every >= 1, ErrorCode::kConfig, "vq.reset_every must be >= 1");
}

nlohmann::json config_to_json(const VqConfig& c) {
  return {{"modality", std::string(core::modality_name(c.modality))},
          {"codes", c.codes},
          {"code_width", c.code_width},
          {"hidden", c.hidden},
          {"stages", c.stages},
          {"res_blocks", c.res_blocks},
          {"alpha", c.alpha},
          {"beta", c.beta},
          {"codebook_mode", mode_name(c.codebook_mode)},
          {"ema_decay", c.ema_decay},
          {"reset_dead_codes", c.reset_dead_codes},
          {"reset_every", c.reset_every},
          {"freeze_codebook", c.freeze_codebook},
          {"pad_to_multiple", c.pad_to_multiple}};
}

VqConfig config_from_json(const nlohmann::json& j) {
  core::ConfigReader r(j, "vq");
  std::string modality = "body";
  r.read("modality", modality);
  VqConfig c = VqConfig::for_modality(core::modality_from_name(modality));
  std::string mode = mode_name(c.codebook_mode);
  r.read("codes", c.codes);
  r.read("code_width", c.code_width);
  r.read("hidden", c.hidden);
  r.read("stages", c.stages);
  r.read("res_blocks", c.res_blocks);
  r.read("alpha", c.alpha);
  r.read("beta", c.beta);
  r.read("codebook_mode", mode);
  r.read("ema_decay", c.ema_decay);
  r.read("reset_dead_codes", c.reset_dead_codes);
  r.read("reset_every", c.reset_every);
  r.read("freeze_codebook", c.freeze_codebook);
  r.read("pad_to_multiple", c.pad_to_multiple);
  r.finish();
  c.codebook_mode = mode_from(mode);
  c.validate();
  return c;
}

ResBlockImpl::ResBlockImpl(int width, int dilation) {
  conv1_ = register_module("conv1", conv(width, width, 3, 1, dilation, dilation));
  conv2_ = register_module("conv2", conv(width, width, 1));
}

torch::Tensor ResBlockImpl::forward(const torch::Tensor& x) {
  return x + conv2_(torch::relu(conv1_(torch::relu(x))));
}

EncoderImpl::EncoderImpl(const VqConfig& c) {
  torch::nn::Sequential s;
  s->push_back(conv(c.input_width(), c.hidden, 3, 1, 1));
  s->push_back(torch::nn::ReLU());
  for (int i = 0; i < c.stages; ++i) {
    s->push_back(conv(c.hidden, c.hidden, 4, 2, 1));
    for (int b = 0; b < c.res_blocks; ++b) s->push_back(ResBlock(c.hidden, dilation_of(b)));
  }
  s->push_back(conv(c.hidden, c.code_width, 3, 1, 1));
  net_ = register_module("net", s);
}

torch::Tensor EncoderImpl::forward(const torch::Tensor& x) {
  return net_->forward(x.transpose(1, 2)).transpose(1, 2);
}

DecoderImpl::DecoderImpl(const VqConfig& c) {
  torch::nn::Sequential s;
  s->push_back(conv(c.code_width, c.hidden, 3, 1, 1));
  s->push_back(torch::nn::ReLU());
  for (int i = 0; i < c.stages; ++i) {
    for (int b = 0; b < c.res_blocks; ++b) s->push_back(ResBlock(c.hidden, dilation_of(b)));
    s->push_back(torch::nn::Upsample(
        torch::nn::UpsampleOptions().scale_factor(std::vector<double>{2.0}).mode(torch::kNearest)));
    s->push_back(conv(c.hidden, c.hidden, 3, 1, 1));
  }
  s->push_back(conv(c.hidden, c.hidden, 3, 1, 1));
  s->push_back(torch::nn::ReLU());
  s->push_back(conv(c.hidden, c.input_width(), 3, 1, 1));
  net_ = register_module("net", s);
}

torch::Tensor DecoderImpl::forward(const torch::Tensor& zq) {
  return net_->forward(zq.transpose(1, 2)).transpose(1, 2);
}

VqNetImpl::VqNetImpl(const VqConfig& c) : config_(c) {
  c.validate();
  encoder = register_module("encoder", Encoder(c));
  decoder = register_module("decoder", Decoder(c));
  codebook = register_parameter("codebook", torch::randn({c.codes, c.code_width}));
  ema_count = register_buffer("ema_count", torch::zeros({c.codes}));
  ema_sum = register_buffer("ema_sum", torch::zeros({c.codes, c.code_width}));
  usage = register_buffer("usage", torch::zeros({c.codes}, torch::kInt64));
  initialized = register_buffer("initialized", torch::zeros({}, torch::kInt64));
}

}  // namespace t2mx::vq
