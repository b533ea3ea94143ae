#include "easl/model.hpp"

#include <algorithm>
#include <stdexcept>

#include "easl/config_json.hpp"
#include "easl/errors.hpp"
#include "easl/hash.hpp"

namespace easl {

std::string_view to_string(ParamGroup group) {
  switch (group) {
    case ParamGroup::DeseSemantic:
      return "dese_semantic";
    case ParamGroup::DeseEmotion:
      return "dese_emotion";
    case ParamGroup::Egsid:
      return "egsid";
  }
  return "unknown";
}

ParamGroup parse_param_group(std::string_view name) {
  if (name == "dese_semantic") return ParamGroup::DeseSemantic;
  if (name == "dese_emotion") return ParamGroup::DeseEmotion;
  if (name == "egsid") return ParamGroup::Egsid;
  throw InputError("unknown parameter group '" + std::string(name) + "'");
}

// ---------------------------------------------------------------- registry

void ParamRegistry::add(std::string name, ParamGroup group, ad::Tensor value) {
  for (const auto& e : entries_) {
    if (e.name == name) throw ContractError("duplicate parameter name " + name);
    if (e.value.same_node(value)) throw ContractError("parameter " + name + " already registered as " + e.name);
  }
  entries_.push_back({std::move(name), group, std::move(value), false});
}

const ParamEntry& ParamRegistry::find(std::string_view name) const {
  for (const auto& e : entries_)
    if (e.name == name) return e;
  throw InputError("no parameter named " + std::string(name));
}

std::size_t ParamRegistry::count(ParamGroup group) const {
  std::size_t n = 0;
  for (const auto& e : entries_)
    if (e.group == group) n += e.value.numel();
  return n;
}

std::size_t ParamRegistry::trainable_count() const {
  std::size_t n = 0;
  for (const auto& e : entries_)
    if (!e.frozen) n += e.value.numel();
  return n;
}

void ParamRegistry::set_frozen(ParamGroup group, bool frozen) {
  for (auto& e : entries_)
    if (e.group == group) e.frozen = frozen;
}

void ParamRegistry::freeze_all(bool frozen) {
  for (auto& e : entries_) e.frozen = frozen;
}

void ParamRegistry::zero_grad() {
  for (auto& e : entries_) e.value.zero_grad();
}

std::vector<std::vector<double>> ParamRegistry::snapshot() const {
  std::vector<std::vector<double>> out;
  out.reserve(entries_.size());
  for (const auto& e : entries_) out.emplace_back(e.value.data().begin(), e.value.data().end());
  return out;
}

std::vector<std::vector<double>> ParamRegistry::snapshot(ParamGroup group) const {
  std::vector<std::vector<double>> out;
  for (const auto& e : entries_)
    if (e.group == group) out.emplace_back(e.value.data().begin(), e.value.data().end());
  return out;
}

// ---------------------------------------------------------------- config

ModelConfig& ModelConfig::sync_dims() {
  egsid.memory_dim = dese.semantic_dim + dese.emotion_dim;
  return *this;
}

void ModelConfig::validate() const {
  dese.validate();
  egsid.validate();
  if (egsid.memory_dim != dese.semantic_dim + dese.emotion_dim) {
    throw ContractError("ModelConfig: decoder memory width " + std::to_string(egsid.memory_dim) +
                        " != semantic_dim + emotion_dim");
  }
}

std::uint64_t config_hash(const ModelConfig& cfg) { return fnv1a64(nlohmann::json(cfg).dump()); }

// ---------------------------------------------------------------- model

EaslModel::EaslModel(ModelConfig cfg, std::uint64_t seed) : cfg_(std::move(cfg)) {
  cfg_.validate();
  Rng rng(seed);
  dese_ = dese::DeseParams::init(cfg_.dese, rng);
  egsid_ = egsid::EgsidParams::init(cfg_.egsid, rng);

  using G = ParamGroup;
  registry_.add("dese.embedding", G::DeseSemantic, dese_.embedding);
  registry_.add("dese.gate_weight", G::DeseSemantic, dese_.gate_weight);
  registry_.add("dese.gate_bias", G::DeseSemantic, dese_.gate_bias);
  registry_.add("dese.query_weight", G::DeseSemantic, dese_.query_weight);
  registry_.add("dese.key_weight", G::DeseSemantic, dese_.key_weight);
  registry_.add("dese.value_weight", G::DeseSemantic, dese_.value_weight);
  registry_.add("dese.emotion_gate_weight", G::DeseEmotion, dese_.emotion_gate_weight);
  registry_.add("dese.emotion_gate_bias", G::DeseEmotion, dese_.emotion_gate_bias);
  registry_.add("egsid.query_embed", G::Egsid, egsid_.query_embed);
  registry_.add("egsid.query_weight", G::Egsid, egsid_.query_weight);
  registry_.add("egsid.key_weight", G::Egsid, egsid_.key_weight);
  registry_.add("egsid.value_weight", G::Egsid, egsid_.value_weight);
  registry_.add("egsid.pose_weight", G::Egsid, egsid_.pose_weight);
  registry_.add("egsid.pose_bias", G::Egsid, egsid_.pose_bias);
  registry_.add("egsid.emotion_weight", G::Egsid, egsid_.emotion_weight);
  registry_.add("egsid.emotion_bias", G::Egsid, egsid_.emotion_bias);
}

dese::EncodedSequence EaslModel::encode(std::span<const TokenId> tokens) const {
  dese::EncodeOptions opts;
  opts.disable_emotion_branch = !cfg_.use_dese_emotion;
  return dese::encode(tokens, dese_, opts);
}

ForwardResult EaslModel::forward(std::span<const TokenId> tokens, std::size_t frames,
                                 egsid::AttentionTrace* trace) const {
  ForwardResult r;
  r.encoded = encode(tokens);
  r.decoded = cfg_.use_egsid_emotion
                  ? egsid::decode(egsid::fuse_memory(r.encoded.H, r.encoded.E), frames, egsid_, trace)
                  : egsid::decode_semantic_only(r.encoded.H, frames, egsid_, trace);
  return r;
}

void EaslModel::load_values(std::span<const std::string> names, std::span<const std::vector<double>> values) {
  if (names.size() != values.size()) throw ContractError("load_values: names/values length mismatch");
  if (names.size() != registry_.entries().size()) {
    throw InputError("load_values: expected " + std::to_string(registry_.entries().size()) + " parameters, got " +
                     std::to_string(names.size()));
  }
  for (std::size_t i = 0; i < names.size(); ++i) {
    auto entries = registry_.entries();
    auto it = std::find_if(entries.begin(), entries.end(), [&](const ParamEntry& e) { return e.name == names[i]; });
    if (it == entries.end()) throw InputError("load_values: unknown parameter " + names[i]);
    auto dst = it->value.mutable_data();
    if (dst.size() != values[i].size()) {
      throw DimensionError("load_values: parameter " + names[i] + " expects " + std::to_string(dst.size()) +
                           " values, got " + std::to_string(values[i].size()));
    }
    std::copy(values[i].begin(), values[i].end(), dst.begin());
  }
}

}  // namespace easl
