#include "easl/egsid.hpp"

#include <cmath>
#include <string>

#include "easl/errors.hpp"
#include "easl/init.hpp"

namespace easl::egsid {

using ad::Tensor;

void EgsidConfig::validate() const {
  if (model_dim < 1 || num_heads < 1 || pose_dim < 1 || max_frames < 1 || memory_dim < 1) {
    throw ContractError("EgsidConfig: all dimensions must be >= 1");
  }
  if (model_dim % num_heads != 0) {
    throw ContractError("EgsidConfig: model_dim " + std::to_string(model_dim) + " not divisible by num_heads " +
                        std::to_string(num_heads));
  }
  if (emotion_classes != kEmotionClasses) {
    throw ContractError("EgsidConfig: emotion_classes must be 7");
  }
}

Tensor sinusoidal_positions(std::size_t frames, std::size_t dim) {
  std::vector<double> data(frames * dim);
  for (std::size_t pos = 0; pos < frames; ++pos) {
    for (std::size_t i = 0; i < dim; ++i) {
      const double rate = std::pow(10000.0, -static_cast<double>(i - i % 2) / static_cast<double>(dim));
      const double angle = static_cast<double>(pos) * rate;
      data[pos * dim + i] = (i % 2 == 0) ? std::sin(angle) : std::cos(angle);
    }
  }
  return Tensor::from_data({frames, dim}, std::move(data), false);
}

EgsidParams EgsidParams::init(const EgsidConfig& cfg, Rng& rng) {
  cfg.validate();
  const std::size_t dm = cfg.model_dim;
  EgsidParams p;
  p.query_embed = uniform_parameter({cfg.max_frames, dm}, 1, rng);
  p.positional = sinusoidal_positions(cfg.max_frames, dm);
  p.query_weight = uniform_parameter({dm, dm}, dm, rng);
  p.key_weight = uniform_parameter({cfg.memory_dim, dm}, cfg.memory_dim, rng);
  p.value_weight = uniform_parameter({cfg.memory_dim, dm}, cfg.memory_dim, rng);
  p.pose_weight = uniform_parameter({dm, cfg.pose_dim}, dm, rng);
  p.pose_bias = uniform_parameter({1, cfg.pose_dim}, dm, rng);
  p.emotion_weight = uniform_parameter({dm, cfg.emotion_classes}, dm, rng);
  p.emotion_bias = uniform_parameter({1, cfg.emotion_classes}, dm, rng);
  p.num_heads = cfg.num_heads;
  return p;
}

EgsidConfig EgsidParams::config() const {
  EgsidConfig cfg;
  cfg.model_dim = query_weight.dim(0);
  cfg.num_heads = num_heads;
  cfg.pose_dim = pose_weight.dim(1);
  cfg.emotion_classes = emotion_weight.dim(1);
  cfg.max_frames = query_embed.dim(0);
  cfg.memory_dim = key_weight.dim(0);
  return cfg;
}

Tensor fuse_memory(const Tensor& H, const Tensor& E) {
  if (H.rank() != 2 || E.rank() != 2 || H.dim(0) != E.dim(0)) {
    throw DimensionError("fuse_memory: row mismatch between H " + ad::shape_string(H.shape()) + " and E " +
                         ad::shape_string(E.shape()));
  }
  return ad::concat({H, E}, 1);
}

DecodedOutput decode(const Tensor& memory, std::size_t num_frames, const EgsidParams& params, AttentionTrace* trace) {
  const EgsidConfig cfg = params.config();
  if (num_frames < 1 || num_frames > cfg.max_frames) {
    throw ContractError("decode: num_frames " + std::to_string(num_frames) + " outside [1, " +
                        std::to_string(cfg.max_frames) + "]");
  }
  if (memory.rank() != 2 || memory.dim(0) == 0) throw ContractError("decode: empty memory");
  if (memory.dim(1) != cfg.memory_dim) {
    throw DimensionError("decode: memory width " + std::to_string(memory.dim(1)) +
                         " != " + std::to_string(cfg.memory_dim));
  }

  const Tensor slots = ad::add(ad::slice(params.query_embed, 0, 0, num_frames),
                               ad::slice(params.positional, 0, 0, num_frames));  // [M x dm]
  const Tensor q = ad::matmul(slots, params.query_weight);                       // [M x dm]
  const Tensor k = ad::matmul(memory, params.key_weight);                        // [T x dm]
  const Tensor v = ad::matmul(memory, params.value_weight);                      // [T x dm]

  const std::size_t head_dim = cfg.model_dim / cfg.num_heads;
  const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(head_dim));
  std::vector<Tensor> heads;
  heads.reserve(cfg.num_heads);
  if (trace) trace->clear();
  for (std::size_t h = 0; h < cfg.num_heads; ++h) {
    const std::size_t lo = h * head_dim;
    const std::size_t hi = lo + head_dim;
    const Tensor qh = ad::slice(q, 1, lo, hi);
    const Tensor kh = ad::slice(k, 1, lo, hi);
    const Tensor vh = ad::slice(v, 1, lo, hi);
    const Tensor weights = ad::softmax(ad::scale(ad::matmul(qh, ad::transpose(kh)), inv_sqrt), 1);  // [M x T]
    if (trace) trace->push_back(weights);
    heads.push_back(ad::matmul(weights, vh));
  }
  const Tensor attended = cfg.num_heads == 1 ? heads.front() : ad::concat(heads, 1);  // [M x dm]

  DecodedOutput out;
  out.poses = ad::add_row_bias(ad::matmul(attended, params.pose_weight), params.pose_bias);
  out.emotions = ad::sigmoid(ad::add_row_bias(ad::matmul(attended, params.emotion_weight), params.emotion_bias));
  return out;
}

DecodedOutput decode_semantic_only(const Tensor& H, std::size_t num_frames, const EgsidParams& params,
                                   AttentionTrace* trace) {
  const EgsidConfig cfg = params.config();
  if (H.rank() != 2 || H.dim(1) >= cfg.memory_dim) {
    throw DimensionError("decode_semantic_only: H " + ad::shape_string(H.shape()) + " does not fit memory width " +
                         std::to_string(cfg.memory_dim));
  }
  const Tensor zeros = Tensor::zeros({H.dim(0), cfg.memory_dim - H.dim(1)});
  return decode(fuse_memory(H, zeros), num_frames, params, trace);
}

}  // namespace easl::egsid
