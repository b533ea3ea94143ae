#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "easl/autodiff.hpp"
#include "easl/dese.hpp"
#include "easl/egsid.hpp"
#include "easl/types.hpp"

namespace easl {

enum class ParamGroup { DeseSemantic, DeseEmotion, Egsid };

std::string_view to_string(ParamGroup group);
ParamGroup parse_param_group(std::string_view name);

struct ParamEntry {
  std::string name;
  ParamGroup group;
  ad::Tensor value;
  bool frozen = false;
};

// Named trainable parameters, each owned by exactly one group.
class ParamRegistry {
 public:
  void add(std::string name, ParamGroup group, ad::Tensor value);

  std::span<ParamEntry> entries() { return entries_; }
  std::span<const ParamEntry> entries() const { return entries_; }
  const ParamEntry& find(std::string_view name) const;

  // Scalar parameter counts.
  std::size_t count(ParamGroup group) const;
  std::size_t trainable_count() const;

  void set_frozen(ParamGroup group, bool frozen);
  void freeze_all(bool frozen);
  void zero_grad();

  // Copy of every parameter value, in registration order.
  std::vector<std::vector<double>> snapshot() const;
  std::vector<std::vector<double>> snapshot(ParamGroup group) const;

 private:
  std::vector<ParamEntry> entries_;
};

struct ModelConfig {
  dese::DeseConfig dese;
  egsid::EgsidConfig egsid;
  // Ablations that change the forward graph.
  bool use_dese_emotion = true;
  bool use_egsid_emotion = true;

  // Keeps egsid.memory_dim consistent with the encoder widths.
  ModelConfig& sync_dims();
  void validate() const;
};

// FNV-1a over the canonical JSON form of the config.
std::uint64_t config_hash(const ModelConfig& cfg);

struct ForwardResult {
  dese::EncodedSequence encoded;
  egsid::DecodedOutput decoded;
};

class EaslModel {
 public:
  EaslModel(ModelConfig cfg, std::uint64_t seed);

  EaslModel(const EaslModel&) = delete;
  EaslModel& operator=(const EaslModel&) = delete;
  EaslModel(EaslModel&&) = default;
  EaslModel& operator=(EaslModel&&) = default;

  dese::EncodedSequence encode(std::span<const TokenId> tokens) const;
  ForwardResult forward(std::span<const TokenId> tokens, std::size_t frames,
                        egsid::AttentionTrace* trace = nullptr) const;

  const ModelConfig& config() const { return cfg_; }
  ParamRegistry& registry() { return registry_; }
  const ParamRegistry& registry() const { return registry_; }
  const dese::DeseParams& dese_params() const { return dese_; }
  const egsid::EgsidParams& egsid_params() const { return egsid_; }

  // Overwrites parameter values by name; shapes must match.
  void load_values(std::span<const std::string> names, std::span<const std::vector<double>> values);

 private:
  ModelConfig cfg_;
  dese::DeseParams dese_;
  egsid::EgsidParams egsid_;
  ParamRegistry registry_;
};

}  // namespace easl
