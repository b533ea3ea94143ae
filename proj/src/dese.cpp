#include "easl/dese.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "easl/errors.hpp"
#include "easl/init.hpp"

namespace easl::dese {

using ad::Shape;
using ad::Tensor;

namespace {

void expect_row(const Tensor& t, std::size_t width, const char* what) {
  if (!t.defined() || t.rank() != 2 || t.dim(0) != 1 || t.dim(1) != width) {
    throw DimensionError(std::string(what) + ": expected [1x" + std::to_string(width) + "], got " +
                         (t.defined() ? ad::shape_string(t.shape()) : std::string("undefined")));
  }
}

}  // namespace

void DeseConfig::validate() const {
  if (vocab_size < 1 || embed_dim < 1 || semantic_dim < 1 || emotion_dim < 1) {
    throw ContractError("DeseConfig: all dimensions must be >= 1");
  }
}

DeseParams DeseParams::init(const DeseConfig& cfg, Rng& rng) {
  cfg.validate();
  const std::size_t dz = cfg.embed_dim;
  const std::size_t dh = cfg.semantic_dim;
  const std::size_t de = cfg.emotion_dim;
  DeseParams p;
  p.embedding = uniform_parameter({cfg.vocab_size, dz}, 1, rng);
  p.gate_weight = uniform_parameter({dz + dh, dh}, dz + dh, rng);
  p.gate_bias = uniform_parameter({1, dh}, dz + dh, rng);
  p.query_weight = uniform_parameter({dh, dh}, dh, rng);
  p.key_weight = uniform_parameter({dz + dh, dh}, dz + dh, rng);
  p.value_weight = uniform_parameter({dz + dh, dh}, dz + dh, rng);
  p.emotion_gate_weight = uniform_parameter({dh, de}, dh, rng);
  p.emotion_gate_bias = uniform_parameter({1, de}, dh, rng);
  return p;
}

DeseConfig DeseParams::config() const {
  DeseConfig cfg;
  cfg.vocab_size = embedding.dim(0);
  cfg.embed_dim = embedding.dim(1);
  cfg.semantic_dim = query_weight.dim(0);
  cfg.emotion_dim = emotion_gate_weight.dim(1);
  return cfg;
}

DeseState DeseState::initial(const DeseConfig& cfg) {
  cfg.validate();
  return {Tensor::zeros({1, cfg.semantic_dim}), Tensor::ones({1, cfg.semantic_dim}),
          Tensor::ones({1, cfg.emotion_dim})};
}

Tensor embed(TokenId token, const DeseParams& params) {
  const std::size_t vocab = params.embedding.dim(0);
  if (token >= vocab) {
    throw InputError("token id " + std::to_string(token) + " outside vocabulary of size " + std::to_string(vocab));
  }
  return ad::slice(params.embedding, 0, token, token + 1);
}

Tensor filtered_context_step(const Tensor& z_t, const DeseState& state, const DeseParams& params) {
  const DeseConfig cfg = params.config();
  expect_row(z_t, cfg.embed_dim, "filtered_context_step z_t");
  expect_row(state.h_prev, cfg.semantic_dim, "filtered_context_step h_prev");
  expect_row(state.c_prev, cfg.semantic_dim, "filtered_context_step c_prev");
  const Tensor input = ad::concat({z_t, state.h_prev}, 1);
  const Tensor gate = ad::sigmoid(ad::add_row_bias(ad::matmul(input, params.gate_weight), params.gate_bias));
  return ad::mul(gate, state.c_prev);
}

Tensor gated_attention_step(const Tensor& z_t, const Tensor& c_t, const DeseState& state, const DeseParams& params,
                            Tensor* slot_weights) {
  const DeseConfig cfg = params.config();
  const std::size_t dz = cfg.embed_dim;
  const std::size_t dh = cfg.semantic_dim;
  expect_row(z_t, dz, "gated_attention_step z_t");
  expect_row(c_t, dh, "gated_attention_step c_t");
  expect_row(state.h_prev, dh, "gated_attention_step h_prev");

  // Slot 0 carries the token, slot 1 the history, each zero-padded into the
  // shared (d_z + d_h) input space of W_k / W_v.
  const Tensor slots =
      ad::concat({ad::concat({z_t, Tensor::zeros({1, dh})}, 1), ad::concat({Tensor::zeros({1, dz}), state.h_prev}, 1)},
                 0);                                             // [2 x (d_z + d_h)]
  const Tensor query = ad::matmul(c_t, params.query_weight);     // [1 x d_h]
  const Tensor keys = ad::matmul(slots, params.key_weight);      // [2 x d_h]
  const Tensor values = ad::matmul(slots, params.value_weight);  // [2 x d_h]
  const Tensor logits = ad::scale(ad::matmul(query, ad::transpose(keys)), 1.0 / std::sqrt(static_cast<double>(dh)));
  const Tensor weights = ad::softmax(logits, 1);  // [1 x 2]
  if (slot_weights) *slot_weights = weights;
  return ad::matmul(weights, values);
}

Tensor emotion_gate_step(const Tensor& h_t, const DeseState& state, const DeseParams& params) {
  const DeseConfig cfg = params.config();
  expect_row(h_t, cfg.semantic_dim, "emotion_gate_step h_t");
  expect_row(state.e_prev, cfg.emotion_dim, "emotion_gate_step e_prev");
  const Tensor gate =
      ad::sigmoid(ad::add_row_bias(ad::matmul(h_t, params.emotion_gate_weight), params.emotion_gate_bias));
  return ad::mul(gate, state.e_prev);
}

EncodedSequence encode(std::span<const TokenId> tokens, const DeseParams& params, const EncodeOptions& options) {
  if (tokens.empty()) throw ContractError("encode: empty token sequence");
  const DeseConfig cfg = params.config();
  for (TokenId tok : tokens) {
    if (tok >= cfg.vocab_size) {
      throw InputError("encode: token id " + std::to_string(tok) + " outside vocabulary of size " +
                       std::to_string(cfg.vocab_size));
    }
  }

  DeseState state = DeseState::initial(cfg);
  const Tensor e0 = state.e_prev;
  std::vector<Tensor> hs, es, cs;
  hs.reserve(tokens.size());
  es.reserve(tokens.size());
  cs.reserve(tokens.size());
  for (TokenId tok : tokens) {
    const Tensor z = embed(tok, params);
    const Tensor c = filtered_context_step(z, state, params);
    const Tensor h = gated_attention_step(z, c, state, params);
    const Tensor e = options.disable_emotion_branch ? e0 : emotion_gate_step(h, state, params);
    hs.push_back(h);
    es.push_back(e);
    cs.push_back(c);
    state = DeseState{h, c, e};
  }
  return {ad::concat(hs, 0), ad::concat(es, 0), ad::concat(cs, 0)};
}

}  // namespace easl::dese
