// SPDX-License-Identifier: Apache-2.0
#include <cstdint>
#include <cstring>
#include <fstream>

#include "mathlm/errors.hpp"
#include "mathlm/trainer.hpp"

namespace mathlm {

namespace {

constexpr char kMagic[8] = {'M', 'A', 'T', 'H', 'L', 'M', 'D', 'S'};
constexpr std::uint8_t kNoPosition = 0xff;

template <typename T>
void put(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& in, const std::string& path) {
  T v{};
  if (!in.read(reinterpret_cast<char*>(&v), sizeof(T))) throw FormatError(path + ": truncated dataset");
  return v;
}

}  // namespace

void save_examples(const std::string& path, std::span<const TrainingExample> examples) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCategory::User, "cannot write " + path);
  out.write(kMagic, sizeof kMagic);
  put<std::uint64_t>(out, examples.size());
  for (const TrainingExample& ex : examples) {
    put<std::int32_t>(out, ex.loss_from);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(ex.seq.size()));
    for (std::size_t i = 0; i < ex.seq.size(); ++i) {
      put<std::int32_t>(out, ex.seq.ids[i]);
      put<std::uint8_t>(out, static_cast<std::uint8_t>(ex.seq.types[i]));
      const auto& pos = ex.seq.positions[i];
      if (!pos) {
        put<std::uint8_t>(out, kNoPosition);
        continue;
      }
      put<std::uint8_t>(out, static_cast<std::uint8_t>(pos->depth()));
      for (std::uint8_t e : pos->path()) put<std::uint8_t>(out, e);
    }
  }
  if (!out) throw Error(ErrorCategory::User, "failed writing " + path);
}

std::vector<TrainingExample> load_examples(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCategory::User, "cannot open " + path);
  char magic[sizeof kMagic];
  if (!in.read(magic, sizeof magic) || std::memcmp(magic, kMagic, sizeof magic) != 0)
    throw FormatError(path + ": not a tokenized dataset");
  auto n = get<std::uint64_t>(in, path);
  std::vector<TrainingExample> out;
  for (std::uint64_t k = 0; k < n; ++k) {
    TrainingExample ex;
    ex.loss_from = get<std::int32_t>(in, path);
    auto len = get<std::uint32_t>(in, path);
    for (std::uint32_t i = 0; i < len; ++i) {
      auto id = get<std::int32_t>(in, path);
      auto type = get<std::uint8_t>(in, path);
      if (type >= kNumTypeTags) throw FormatError(path + ": bad type tag");
      auto depth = get<std::uint8_t>(in, path);
      std::optional<TreePosition> pos;
      if (depth != kNoPosition) {
        if (depth > kMaxTreeDepth) throw FormatError(path + ": position deeper than the cap");
        std::vector<std::uint8_t> p(depth);
        for (auto& e : p) e = get<std::uint8_t>(in, path);
        pos = TreePosition(std::move(p));
      }
      ex.seq.push(id, static_cast<TypeTag>(type), std::move(pos));
    }
    out.push_back(std::move(ex));
  }
  return out;
}

}  // namespace mathlm
