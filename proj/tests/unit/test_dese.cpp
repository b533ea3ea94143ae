#include <doctest.h>

#include <cmath>

#include "easl/dese.hpp"
#include "easl/errors.hpp"
#include "oracle.hpp"

using namespace easl;
using ad::Tensor;

namespace {

dese::DeseParams make_params(std::uint64_t seed, dese::DeseConfig cfg = {}) {
  Rng rng(seed);
  return dese::DeseParams::init(cfg, rng);
}

TokenSeq random_tokens(Rng& rng, std::size_t len, std::size_t vocab) {
  TokenSeq t(len);
  for (auto& x : t) x = static_cast<TokenId>(rng.uniform_int(0, vocab - 1));
  return t;
}

}  // namespace

TEST_CASE("encode matches the scalar-loop recurrence") {
  const auto p = make_params(7);
  Rng rng(70);
  for (int trial = 0; trial < 10; ++trial) {
    const TokenSeq tokens = random_tokens(rng, 1 + trial % 6, 20);
    const auto got = dese::encode(tokens, p);
    const auto want = oracle::encode(tokens, p);
    CHECK(got.H.dim(0) == tokens.size());
    CHECK(oracle::max_abs_diff(want.H, got.H) < 1e-12);
    CHECK(oracle::max_abs_diff(want.E, got.E) < 1e-12);
    CHECK(oracle::max_abs_diff(want.C, got.C) < 1e-12);
  }
}

TEST_CASE("non-square widths follow the same recurrence") {
  const auto p = make_params(8, {.vocab_size = 5, .embed_dim = 3, .semantic_dim = 6, .emotion_dim = 2});
  const TokenSeq tokens{4, 0, 2, 2};
  const auto got = dese::encode(tokens, p);
  const auto want = oracle::encode(tokens, p);
  CHECK(got.H.shape() == ad::Shape{4, 6});
  CHECK(got.E.shape() == ad::Shape{4, 2});
  CHECK(oracle::max_abs_diff(want.H, got.H) < 1e-12);
  CHECK(oracle::max_abs_diff(want.E, got.E) < 1e-12);
}

TEST_CASE("initial state is h=0, c=1, e=1") {
  const auto s = dese::DeseState::initial({});
  for (double v : s.h_prev.data()) CHECK(v == 0.0);
  for (double v : s.c_prev.data()) CHECK(v == 1.0);
  for (double v : s.e_prev.data()) CHECK(v == 1.0);
}

TEST_CASE("gates only shrink the carried state") {
  const auto p = make_params(9);
  Rng rng(90);
  for (int trial = 0; trial < 20; ++trial) {
    const auto enc = dese::encode(random_tokens(rng, 6, 20), p);
    for (std::size_t t = 0; t < 6; ++t) {
      for (std::size_t i = 0; i < 8; ++i) {
        const double e_prev = t == 0 ? 1.0 : enc.E.at(t - 1, i);
        const double c_prev = t == 0 ? 1.0 : enc.C.at(t - 1, i);
        CHECK(std::abs(enc.E.at(t, i)) <= std::abs(e_prev));
        CHECK(std::abs(enc.C.at(t, i)) <= std::abs(c_prev));
      }
    }
  }
}

TEST_CASE("two-slot attention weights form a distribution") {
  const auto p = make_params(10);
  const auto cfg = p.config();
  auto state = dese::DeseState::initial(cfg);
  const Tensor z = dese::embed(3, p);
  const Tensor c = dese::filtered_context_step(z, state, p);
  Tensor w;
  const Tensor h = dese::gated_attention_step(z, c, state, p, &w);
  CHECK(w.shape() == ad::Shape{1, 2});
  CHECK(w.at(0, 0) + w.at(0, 1) == doctest::Approx(1.0));
  CHECK(h.shape() == ad::Shape{1, 8});
}

TEST_CASE("disabled emotion branch holds E at e0") {
  const auto p = make_params(11);
  const TokenSeq tokens{1, 2, 3};
  const auto enc = dese::encode(tokens, p, {.disable_emotion_branch = true});
  for (double v : enc.E.data()) CHECK(v == 1.0);
  const auto full = dese::encode(tokens, p);
  CHECK(oracle::max_abs_diff(oracle::rows_of(full.H), enc.H) == 0.0);
}

TEST_CASE("encoder gradients match finite differences") {
  auto p = make_params(12, {.vocab_size = 4, .embed_dim = 3, .semantic_dim = 4, .emotion_dim = 3});
  const TokenSeq tokens{0, 3, 1};
  auto loss = [&] {
    const auto enc = dese::encode(tokens, p);
    return ad::add(ad::sum(ad::mul(enc.H, enc.H)), ad::mean(enc.E));
  };
  CHECK(oracle::gradient_error({p.embedding, p.gate_weight, p.gate_bias, p.query_weight, p.key_weight, p.value_weight,
                                p.emotion_gate_weight, p.emotion_gate_bias},
                               loss) < 1e-5);  // a few gradients sit near 1e-6, where roundoff dominates
}

TEST_CASE("initialization ranges") {
  const auto p = make_params(13);
  for (double v : p.embedding.data()) CHECK(std::abs(v) <= 1.0);
  const double bound = 1.0 / std::sqrt(16.0);
  for (double v : p.gate_weight.data()) CHECK(std::abs(v) <= bound);
  for (double v : p.emotion_gate_weight.data()) CHECK(std::abs(v) <= 1.0 / std::sqrt(8.0));
  CHECK(p.embedding.requires_grad());
  const auto cfg = p.config();
  CHECK(cfg.vocab_size == 20);
  CHECK(cfg.embed_dim == 8);
  CHECK(cfg.emotion_dim == 8);
}

TEST_CASE("bad input") {
  const auto p = make_params(14);
  CHECK_THROWS_AS(dese::encode(TokenSeq{}, p), ContractError);
  CHECK_THROWS_AS(dese::encode(TokenSeq{1, 20}, p), InputError);
  CHECK_THROWS_AS(dese::embed(99, p), InputError);
  dese::DeseConfig bad;
  bad.semantic_dim = 0;
  CHECK_THROWS_AS(bad.validate(), ContractError);
  auto state = dese::DeseState::initial({});
  CHECK_THROWS_AS(dese::filtered_context_step(Tensor::zeros({1, 5}), state, p), DimensionError);
}
