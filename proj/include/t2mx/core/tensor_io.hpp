#pragma once
// Deterministic tensor storage: `<stem>.json` indexes name, dtype, shape and
// byte offset; `<stem>.bin` holds the raw little-endian data back to back.

#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <torch/torch.h>

namespace t2mx::core {

using NamedTensors = std::vector<std::pair<std::string, torch::Tensor>>;

/// float32, float64 and int64 tensors are supported.
void save_tensors(const std::filesystem::path& stem, const NamedTensors& tensors);
std::map<std::string, torch::Tensor> load_tensors(const std::filesystem::path& stem);

/// Parameters and buffers of the module tree, by their dotted names.
NamedTensors module_state(const torch::nn::Module& module);
void save_module(const std::filesystem::path& stem, const torch::nn::Module& module);
/// Copies stored values into the module; missing or mis-shaped entries raise kMalformed.
void load_module(const std::filesystem::path& stem, torch::nn::Module& module);

/// AdamW moment estimates keyed by parameter name.
void save_adamw(const std::filesystem::path& stem, torch::optim::AdamW& optimizer,
                const torch::nn::Module& module);
void load_adamw(const std::filesystem::path& stem, torch::optim::AdamW& optimizer,
                const torch::nn::Module& module);

/// Row-major copies between torch and Eigen-style float frames.
torch::Tensor to_tensor(const float* data, std::int64_t rows, std::int64_t cols);

}  // namespace t2mx::core
