#include "t2mx/core/tensor_io.hpp"

#include <cstring>

#include "t2mx/core/error.hpp"
#include "t2mx/core/io.hpp"

namespace t2mx::core {

namespace {

std::string dtype_name(torch::ScalarType t) {
  switch (t) {
    case torch::kFloat32: return "float32";
    case torch::kFloat64: return "float64";
    case torch::kInt64: return "int64";
    default: raise(ErrorCode::kUnsupported, "tensor dtype not storable");
  }
}

torch::ScalarType dtype_from(const std::string& name) {
  if (name == "float32") return torch::kFloat32;
  if (name == "float64") return torch::kFloat64;
  if (name == "int64") return torch::kInt64;
  raise(ErrorCode::kMalformed, "unknown tensor dtype '" + name + "'");
}

fs::path bin_path(const fs::path& stem) { return fs::path(stem.string() + ".bin"); }
fs::path index_path(const fs::path& stem) { return fs::path(stem.string() + ".json"); }

}  // namespace

void save_tensors(const fs::path& stem, const NamedTensors& tensors) {
  std::string bytes;
  nlohmann::json index = nlohmann::json::array();
  for (const auto& [name, tensor] : tensors) {
    const torch::Tensor t = tensor.detach().contiguous().cpu();
    const std::size_t n = static_cast<std::size_t>(t.numel()) * t.element_size();
    index.push_back({{"name", name},
                     {"dtype", dtype_name(t.scalar_type())},
                     {"shape", t.sizes().vec()},
                     {"offset", bytes.size()}});
    bytes.append(static_cast<const char*>(t.data_ptr()), n);
  }
  write_file_atomic(bin_path(stem), bytes);
  write_json_atomic(index_path(stem), index);
}

std::map<std::string, torch::Tensor> load_tensors(const fs::path& stem) {
  const nlohmann::json index = read_json_file(index_path(stem));
  const std::vector<char> bytes = read_binary_file(bin_path(stem));
  std::map<std::string, torch::Tensor> out;
  try {
    for (const auto& e : index) {
      const auto shape = e.at("shape").get<std::vector<std::int64_t>>();
      const auto offset = e.at("offset").get<std::size_t>();
      torch::Tensor t = torch::empty(shape, torch::TensorOptions().dtype(dtype_from(e.at("dtype"))));
      const std::size_t n = static_cast<std::size_t>(t.numel()) * t.element_size();
      require(offset + n <= bytes.size(), ErrorCode::kMalformed,
              bin_path(stem).string() + " is shorter than its index");
      std::memcpy(t.data_ptr(), bytes.data() + offset, n);
      out.emplace(e.at("name").get<std::string>(), t);
    }
  } catch (const nlohmann::json::exception& ex) {
    raise(ErrorCode::kMalformed, index_path(stem).string() + ": " + ex.what());
  }
  return out;
}

NamedTensors module_state(const torch::nn::Module& module) {
  NamedTensors out;
  for (const auto& p : module.named_parameters()) out.emplace_back(p.key(), p.value());
  for (const auto& b : module.named_buffers()) out.emplace_back(b.key(), b.value());
  return out;
}

void save_module(const fs::path& stem, const torch::nn::Module& module) {
  save_tensors(stem, module_state(module));
}

void load_module(const fs::path& stem, torch::nn::Module& module) {
  const auto stored = load_tensors(stem);
  torch::NoGradGuard guard;
  for (auto& [name, target] : module_state(module)) {
    const auto it = stored.find(name);
    require(it != stored.end(), ErrorCode::kMalformed, stem.string() + " lacks tensor " + name);
    require(it->second.sizes() == target.sizes(), ErrorCode::kMalformed,
            stem.string() + ": tensor " + name + " has the wrong shape");
    target.copy_(it->second);
  }
}

void save_adamw(const fs::path& stem, torch::optim::AdamW& optimizer, const torch::nn::Module& module) {
  NamedTensors out;
  for (const auto& p : module.named_parameters()) {
    auto it = optimizer.state().find(p.value().unsafeGetTensorImpl());
    if (it == optimizer.state().end()) continue;
    auto& st = static_cast<torch::optim::AdamWParamState&>(*it->second);
    out.emplace_back(p.key() + "#step", torch::tensor({st.step()}, torch::kInt64));
    out.emplace_back(p.key() + "#m", st.exp_avg());
    out.emplace_back(p.key() + "#v", st.exp_avg_sq());
  }
  save_tensors(stem, out);
}

void load_adamw(const fs::path& stem, torch::optim::AdamW& optimizer, const torch::nn::Module& module) {
  const auto stored = load_tensors(stem);
  for (const auto& p : module.named_parameters()) {
    const auto step = stored.find(p.key() + "#step");
    if (step == stored.end()) continue;
    auto st = std::make_unique<torch::optim::AdamWParamState>();
    st->step(step->second.item<std::int64_t>());
    st->exp_avg(stored.at(p.key() + "#m").clone());
    st->exp_avg_sq(stored.at(p.key() + "#v").clone());
    optimizer.state()[p.value().unsafeGetTensorImpl()] = std::move(st);
  }
}

torch::Tensor to_tensor(const float* data, std::int64_t rows, std::int64_t cols) {
  return torch::from_blob(const_cast<float*>(data), {rows, cols}, torch::kFloat32).clone();
}

}  // namespace t2mx::core
