#pragma once

// Emotion-guided semantic interaction decoder.
//
// M learned query slots (frame embedding + sinusoidal position) cross-attend
// over the fused memory [H | E] with multi-head scaled dot-product attention.
// The concatenated head outputs feed two linear readouts: poses (identity)
// and per-frame emotion confidences (sigmoid).

#include <cstddef>
#include <vector>

#include "easl/autodiff.hpp"
#include "easl/random.hpp"
#include "easl/types.hpp"

namespace easl::egsid {

struct EgsidConfig {
  std::size_t model_dim = 16;
  std::size_t num_heads = 2;
  std::size_t pose_dim = 12;  // D
  std::size_t emotion_classes = kEmotionClasses;
  std::size_t max_frames = 64;
  std::size_t memory_dim = 16;  // d_h + d_e

  void validate() const;
};

struct EgsidParams {
  ad::Tensor query_embed;     // P_embed [max_frames x model_dim], trainable
  ad::Tensor positional;      // P_pos   [max_frames x model_dim], fixed sinusoidal
  ad::Tensor query_weight;    // U_q [model_dim x model_dim]
  ad::Tensor key_weight;      // U_k [memory_dim x model_dim]
  ad::Tensor value_weight;    // U_v [memory_dim x model_dim]
  ad::Tensor pose_weight;     // [model_dim x D]
  ad::Tensor pose_bias;       // [1 x D]
  ad::Tensor emotion_weight;  // [model_dim x 7]
  ad::Tensor emotion_bias;    // [1 x 7]
  std::size_t num_heads = 1;

  static EgsidParams init(const EgsidConfig& cfg, Rng& rng);

  EgsidConfig config() const;
};

// Standard transformer sinusoid table, sin on even and cos on odd columns.
ad::Tensor sinusoidal_positions(std::size_t frames, std::size_t dim);

struct DecodedOutput {
  ad::Tensor poses;     // [M x D]
  ad::Tensor emotions;  // [M x 7], each entry in (0, 1)
};

// Per-head attention weights, each [M x T].
using AttentionTrace = std::vector<ad::Tensor>;

ad::Tensor fuse_memory(const ad::Tensor& H, const ad::Tensor& E);

DecodedOutput decode(const ad::Tensor& memory, std::size_t num_frames, const EgsidParams& params,
                     AttentionTrace* trace = nullptr);

// Ablation: memory E-block replaced by zeros.
DecodedOutput decode_semantic_only(const ad::Tensor& H, std::size_t num_frames, const EgsidParams& params,
                                   AttentionTrace* trace = nullptr);

}  // namespace easl::egsid
