#pragma once

// nlohmann::json conversions for the configuration structs. Readers start
// from the struct defaults, so partial documents are accepted.

#include <nlohmann/json.hpp>

#include "easl/data.hpp"
#include "easl/dese.hpp"
#include "easl/egsid.hpp"
#include "easl/model.hpp"
#include "easl/training.hpp"

namespace easl {

namespace detail {
template <class T>
void read_opt(const nlohmann::json& j, const char* key, T& field) {
  if (auto it = j.find(key); it != j.end()) it->get_to(field);
}
}  // namespace detail

namespace dese {
inline void to_json(nlohmann::json& j, const DeseConfig& c) {
  j = {{"vocab_size", c.vocab_size},
       {"embed_dim", c.embed_dim},
       {"semantic_dim", c.semantic_dim},
       {"emotion_dim", c.emotion_dim}};
}
inline void from_json(const nlohmann::json& j, DeseConfig& c) {
  detail::read_opt(j, "vocab_size", c.vocab_size);
  detail::read_opt(j, "embed_dim", c.embed_dim);
  detail::read_opt(j, "semantic_dim", c.semantic_dim);
  detail::read_opt(j, "emotion_dim", c.emotion_dim);
}
}  // namespace dese

namespace egsid {
inline void to_json(nlohmann::json& j, const EgsidConfig& c) {
  j = {{"model_dim", c.model_dim},   {"num_heads", c.num_heads},
       {"pose_dim", c.pose_dim},     {"emotion_classes", c.emotion_classes},
       {"max_frames", c.max_frames}, {"memory_dim", c.memory_dim}};
}
inline void from_json(const nlohmann::json& j, EgsidConfig& c) {
  detail::read_opt(j, "model_dim", c.model_dim);
  detail::read_opt(j, "num_heads", c.num_heads);
  detail::read_opt(j, "pose_dim", c.pose_dim);
  detail::read_opt(j, "emotion_classes", c.emotion_classes);
  detail::read_opt(j, "max_frames", c.max_frames);
  detail::read_opt(j, "memory_dim", c.memory_dim);
}
}  // namespace egsid

inline void to_json(nlohmann::json& j, const ModelConfig& c) {
  j = {{"dese", c.dese},
       {"egsid", c.egsid},
       {"use_dese_emotion", c.use_dese_emotion},
       {"use_egsid_emotion", c.use_egsid_emotion}};
}
inline void from_json(const nlohmann::json& j, ModelConfig& c) {
  detail::read_opt(j, "dese", c.dese);
  detail::read_opt(j, "egsid", c.egsid);
  detail::read_opt(j, "use_dese_emotion", c.use_dese_emotion);
  detail::read_opt(j, "use_egsid_emotion", c.use_egsid_emotion);
}

namespace training {
inline void to_json(nlohmann::json& j, const TrainConfig& c) {
  j = {{"phase_epochs", c.phase_epochs}, {"learning_rate", c.learning_rate},
       {"batch_size", c.batch_size},     {"lambda_pose", c.lambda_pose},
       {"lambda_emo", c.lambda_emo},     {"seed", c.seed},
       {"three_phase", c.three_phase},   {"pose_loss_in_emotion_phase", c.pose_loss_in_emotion_phase}};
}
inline void from_json(const nlohmann::json& j, TrainConfig& c) {
  detail::read_opt(j, "phase_epochs", c.phase_epochs);
  detail::read_opt(j, "learning_rate", c.learning_rate);
  detail::read_opt(j, "batch_size", c.batch_size);
  detail::read_opt(j, "lambda_pose", c.lambda_pose);
  detail::read_opt(j, "lambda_emo", c.lambda_emo);
  detail::read_opt(j, "seed", c.seed);
  detail::read_opt(j, "three_phase", c.three_phase);
  detail::read_opt(j, "pose_loss_in_emotion_phase", c.pose_loss_in_emotion_phase);
}
}  // namespace training

namespace data {
inline void to_json(nlohmann::json& j, const GeneratorConfig& c) {
  j = {{"vocab_size", c.vocab_size},
       {"pose_dim", c.pose_dim},
       {"min_motif", c.min_motif},
       {"max_motif", c.max_motif},
       {"min_tokens", c.min_tokens},
       {"max_tokens", c.max_tokens},
       {"noise", c.noise},
       {"semantic_ref_dim", c.semantic_ref_dim},
       {"emotion_ref_dim", c.emotion_ref_dim}};
}
inline void from_json(const nlohmann::json& j, GeneratorConfig& c) {
  detail::read_opt(j, "vocab_size", c.vocab_size);
  detail::read_opt(j, "pose_dim", c.pose_dim);
  detail::read_opt(j, "min_motif", c.min_motif);
  detail::read_opt(j, "max_motif", c.max_motif);
  detail::read_opt(j, "min_tokens", c.min_tokens);
  detail::read_opt(j, "max_tokens", c.max_tokens);
  detail::read_opt(j, "noise", c.noise);
  detail::read_opt(j, "semantic_ref_dim", c.semantic_ref_dim);
  detail::read_opt(j, "emotion_ref_dim", c.emotion_ref_dim);
}
}  // namespace data

}  // namespace easl
