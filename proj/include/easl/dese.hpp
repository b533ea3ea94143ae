#pragma once

// Disentangled emotion-semantic encoder.
//
// Per token t, with z_t the token embedding:
//   c_t = sigmoid([z_t; h_{t-1}] U_f + b_f) * c_{t-1}         filtered context
//   h_t = attend(c_t W_q, {pad(z_t), pad(h_{t-1})} W_k, ... W_v)  two-slot attention
//   e_t = sigmoid(h_t W_u + b_u) * e_{t-1}                      emotion gate
// Vectors are carried as [1 x d] rows; weights are stored [in x out].

#include <cstddef>
#include <span>

#include "easl/autodiff.hpp"
#include "easl/random.hpp"
#include "easl/types.hpp"

namespace easl::dese {

struct DeseConfig {
  std::size_t vocab_size = 20;
  std::size_t embed_dim = 8;     // d_z
  std::size_t semantic_dim = 8;  // d_h
  std::size_t emotion_dim = 8;   // d_e

  void validate() const;
};

struct DeseParams {
  ad::Tensor embedding;            // [vocab x d_z]
  ad::Tensor gate_weight;          // U_f [(d_z + d_h) x d_h]
  ad::Tensor gate_bias;            // b_f [1 x d_h]
  ad::Tensor query_weight;         // W_q [d_h x d_h]
  ad::Tensor key_weight;           // W_k [(d_z + d_h) x d_h]
  ad::Tensor value_weight;         // W_v [(d_z + d_h) x d_h]
  ad::Tensor emotion_gate_weight;  // W_u [d_h x d_e]
  ad::Tensor emotion_gate_bias;    // b_u [1 x d_e]

  // uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)); the embedding table uses fan_in = 1.
  static DeseParams init(const DeseConfig& cfg, Rng& rng);

  DeseConfig config() const;
};

struct DeseState {
  ad::Tensor h_prev;  // [1 x d_h]
  ad::Tensor c_prev;  // [1 x d_h]
  ad::Tensor e_prev;  // [1 x d_e]

  // h_0 = 0, c_0 = 1, e_0 = 1.
  static DeseState initial(const DeseConfig& cfg);
};

struct EncodedSequence {
  ad::Tensor H;  // [T x d_h]
  ad::Tensor E;  // [T x d_e]
  ad::Tensor C;  // [T x d_h] filtered contexts, kept for gate diagnostics
};

struct EncodeOptions {
  // Hold E at e_0 for every step (emotion branch removed).
  bool disable_emotion_branch = false;
};

// [1 x d_z] embedding row for `token`; throws InputError when out of vocabulary.
ad::Tensor embed(TokenId token, const DeseParams& params);

ad::Tensor filtered_context_step(const ad::Tensor& z_t, const DeseState& state, const DeseParams& params);

// Attention weights over the (token, history) slots are written to
// `slot_weights` when given.
ad::Tensor gated_attention_step(const ad::Tensor& z_t, const ad::Tensor& c_t, const DeseState& state,
                                const DeseParams& params, ad::Tensor* slot_weights = nullptr);

ad::Tensor emotion_gate_step(const ad::Tensor& h_t, const DeseState& state, const DeseParams& params);

EncodedSequence encode(std::span<const TokenId> tokens, const DeseParams& params, const EncodeOptions& options = {});

}  // namespace easl::dese
