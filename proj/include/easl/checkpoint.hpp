#pragma once

// Binary checkpoint:
//   "EASLCKPT" | u32 version | u64 meta_len | meta JSON | u64 n | n x f64
// Integers and floats are little-endian. The JSON preamble records configs,
// config hash, phase/epoch, loss history and each parameter's name, group,
// shape and offset into the value block.

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "easl/model.hpp"
#include "easl/training.hpp"

namespace easl {

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct ParamRecord {
  std::string name;
  ParamGroup group = ParamGroup::Egsid;
  ad::Shape shape;
  std::vector<double> values;

  bool operator==(const ParamRecord&) const = default;
};

struct Checkpoint {
  ModelConfig model_config;
  training::TrainConfig train_config;
  std::vector<ParamRecord> params;
  int phase = 0;
  std::size_t epoch = 0;
  std::vector<training::EpochRecord> history;
  std::uint64_t config_hash = 0;
};

Checkpoint capture_checkpoint(const EaslModel& model, const training::TrainConfig& train_cfg,
                              const training::TrainOutcome& outcome);

std::string serialize_checkpoint(const Checkpoint& ckpt);
Checkpoint deserialize_checkpoint(std::string_view bytes);

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

// Rebuilds the model; throws ContractError when the stored hash does not
// match the stored (or the `expected`) model config.
EaslModel restore_model(const Checkpoint& ckpt);
EaslModel restore_model(const Checkpoint& ckpt, const ModelConfig& expected);

bool operator==(const Checkpoint& a, const Checkpoint& b);

}  // namespace easl
