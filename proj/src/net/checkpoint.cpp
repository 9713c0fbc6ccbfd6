// SPDX-License-Identifier: Apache-2.0
#include "mathlm/checkpoint.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>

#include "mathlm/errors.hpp"

namespace mathlm {

namespace {

constexpr char kMagic[8] = {'M', 'A', 'T', 'H', 'L', 'M', 'C', 'K'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void put(std::ostream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& in, const std::string& path) {
  T v{};
  if (!in.read(reinterpret_cast<char*>(&v), sizeof(T))) throw FormatError(path + ": truncated checkpoint");
  return v;
}

std::string get_string(std::istream& in, std::uint64_t n, const std::string& path) {
  if (n > (1ull << 32)) throw FormatError(path + ": implausible string length");
  std::string s(n, '\0');
  if (n && !in.read(s.data(), static_cast<std::streamsize>(n))) throw FormatError(path + ": truncated checkpoint");
  return s;
}

}  // namespace

const Matrix* CheckpointData::find(const std::string& name) const {
  for (const auto& [n, m] : tensors)
    if (n == name) return &m;
  return nullptr;
}

void write_checkpoint(const std::string& path, const CheckpointData& data) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCategory::User, "cannot write " + path);
    out.write(kMagic, sizeof kMagic);
    put(out, kVersion);
    const std::string meta = data.meta.dump();
    put(out, static_cast<std::uint64_t>(meta.size()));
    out.write(meta.data(), static_cast<std::streamsize>(meta.size()));
    put(out, static_cast<std::uint64_t>(data.tensors.size()));
    for (const auto& [name, m] : data.tensors) {
      put(out, static_cast<std::uint64_t>(name.size()));
      out.write(name.data(), static_cast<std::streamsize>(name.size()));
      put(out, static_cast<std::int64_t>(m.rows()));
      put(out, static_cast<std::int64_t>(m.cols()));
      out.write(reinterpret_cast<const char*>(m.data()), static_cast<std::streamsize>(sizeof(double) * m.size()));
    }
    if (!out) throw Error(ErrorCategory::User, "failed writing " + path);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) throw Error(ErrorCategory::User, "cannot replace " + path);
}

CheckpointData read_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCategory::User, "cannot open checkpoint " + path);
  char magic[sizeof kMagic];
  if (!in.read(magic, sizeof magic) || std::memcmp(magic, kMagic, sizeof kMagic) != 0)
    throw FormatError(path + ": not a checkpoint");
  auto version = get<std::uint32_t>(in, path);
  if (version != kVersion) throw FormatError(path + ": unsupported checkpoint version " + std::to_string(version));
  CheckpointData data;
  try {
    data.meta = nlohmann::json::parse(get_string(in, get<std::uint64_t>(in, path), path));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path + ": bad header: " + e.what());
  }
  auto count = get<std::uint64_t>(in, path);
  for (std::uint64_t i = 0; i < count; ++i) {
    std::string name = get_string(in, get<std::uint64_t>(in, path), path);
    auto rows = get<std::int64_t>(in, path);
    auto cols = get<std::int64_t>(in, path);
    if (rows < 0 || cols < 0 || rows * cols > (1ll << 31)) throw FormatError(path + ": bad tensor shape for " + name);
    Matrix m(rows, cols);
    if (m.size() && !in.read(reinterpret_cast<char*>(m.data()), static_cast<std::streamsize>(sizeof(double) * m.size())))
      throw FormatError(path + ": truncated tensor " + name);
    data.tensors.emplace_back(std::move(name), std::move(m));
  }
  return data;
}

void store_model(CheckpointData& data, const Transformer& model) {
  data.meta["model"] = to_json(model.config());
  data.meta["vocab"] = nlohmann::json::parse(model.vocab().to_json());
  model.for_each_param(ConstParamVisitor(
      [&](const std::string& name, const Param& p) { data.tensors.emplace_back("param/" + name, p.value); }));
}

void load_params(Transformer& model, const CheckpointData& data, const std::string& prefix) {
  model.for_each_param(ParamVisitor([&](const std::string& name, Param& p) {
    const Matrix* m = data.find(prefix + name);
    if (!m) throw FormatError("checkpoint lacks tensor " + prefix + name);
    if (m->rows() != p.value.rows() || m->cols() != p.value.cols())
      throw FormatError("checkpoint tensor " + prefix + name + " has the wrong shape");
    p.value = *m;
  }));
}

std::unique_ptr<Transformer> restore_model(const CheckpointData& data) {
  if (!data.meta.contains("model") || !data.meta.contains("vocab")) throw FormatError("checkpoint lacks model header");
  auto vocab = std::make_shared<const Vocabulary>(Vocabulary::from_json(data.meta.at("vocab").dump()));
  auto model = std::make_unique<Transformer>(model_config_from_json(data.meta.at("model")), vocab);
  load_params(*model, data);
  return model;
}

void save_model(const std::string& path, const Transformer& model, const nlohmann::json& extra) {
  CheckpointData data;
  data.meta = extra.is_object() ? extra : nlohmann::json::object();
  store_model(data, model);
  write_checkpoint(path, data);
}

std::unique_ptr<Transformer> load_model(const std::string& path) { return restore_model(read_checkpoint(path)); }

}  // namespace mathlm
