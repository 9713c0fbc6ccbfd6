// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <json.hpp>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "mathlm/transformer.hpp"

namespace mathlm {

// Binary container: magic, version, a JSON header, then named dense tensors.
struct CheckpointData {
  nlohmann::json meta;
  std::vector<std::pair<std::string, Matrix>> tensors;

  const Matrix* find(const std::string& name) const;
};

void write_checkpoint(const std::string& path, const CheckpointData& data);
// Throws FormatError for truncated or foreign files.
CheckpointData read_checkpoint(const std::string& path);

// Model config, vocabulary and weights ("param/<name>" tensors) in `data`.
void store_model(CheckpointData& data, const Transformer& model);
// Rebuilds the model stored by store_model.
std::unique_ptr<Transformer> restore_model(const CheckpointData& data);
// Copies "<prefix><name>" tensors into the model's parameters.
void load_params(Transformer& model, const CheckpointData& data, const std::string& prefix = "param/");

void save_model(const std::string& path, const Transformer& model, const nlohmann::json& extra = nlohmann::json::object());
std::unique_ptr<Transformer> load_model(const std::string& path);

}  // namespace mathlm
