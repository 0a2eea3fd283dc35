// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "nre/train/trainer.hpp"

namespace nre::train {

// Container layout (all integers little-endian):
//   8 bytes   magic "NRECKPT1"
//   4 bytes   version
//   8 bytes   metadata length N
//   N bytes   UTF-8 JSON metadata (tensor names, shapes, byte offsets, ...)
//   payload   concatenated 32-bit float tensors at the recorded offsets

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct CheckpointFile {
  nlohmann::json metadata;
  std::vector<std::pair<std::string, Tensor<float>>> tensors;

  const Tensor<float>& tensor(const std::string& name) const;
};

/// Writes to a sibling temp file and renames it into place.
void write_checkpoint_file(const std::filesystem::path& path, const CheckpointFile& file);
CheckpointFile read_checkpoint_file(const std::filesystem::path& path);

void save_checkpoint(const NREModel& model, const std::filesystem::path& path);
NREModel load_checkpoint(const std::filesystem::path& path);

void save_autoencoder(const Autoencoder<float>& ae, const PretrainConfig& cfg, const std::filesystem::path& path);
Autoencoder<float> load_autoencoder(const std::filesystem::path& path, PretrainConfig* cfg = nullptr);

/// "autoencoder" or "nre".
std::string checkpoint_kind(const std::filesystem::path& path);

}  // namespace nre::train
