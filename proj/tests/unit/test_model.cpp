#include <doctest.h>

#include "easl/errors.hpp"
#include "easl/model.hpp"
#include "oracle.hpp"

using namespace easl;

TEST_CASE("registry groups cover every parameter once") {
  EaslModel model(ModelConfig{}, 1);
  const auto& reg = model.registry();
  CHECK(reg.entries().size() == 16);
  const auto& dc = model.config().dese;
  const std::size_t dz = dc.embed_dim, dh = dc.semantic_dim, de = dc.emotion_dim;
  CHECK(reg.count(ParamGroup::DeseSemantic) == dc.vocab_size * dz + 3 * (dz + dh) * dh + dh + dh * dh);
  CHECK(reg.count(ParamGroup::DeseEmotion) == dh * de + de);
  CHECK(reg.trainable_count() ==
        reg.count(ParamGroup::DeseSemantic) + reg.count(ParamGroup::DeseEmotion) + reg.count(ParamGroup::Egsid));
  CHECK(reg.find("dese.emotion_gate_bias").group == ParamGroup::DeseEmotion);
  CHECK_THROWS(reg.find("nope"));
}

TEST_CASE("freezing reduces the trainable count") {
  EaslModel model(ModelConfig{}, 1);
  auto& reg = model.registry();
  const auto all = reg.trainable_count();
  reg.set_frozen(ParamGroup::DeseSemantic, true);
  CHECK(reg.trainable_count() == all - reg.count(ParamGroup::DeseSemantic));
  reg.freeze_all(true);
  CHECK(reg.trainable_count() == 0);
  reg.freeze_all(false);
  CHECK(reg.trainable_count() == all);
}

TEST_CASE("group names round trip") {
  for (auto g : {ParamGroup::DeseSemantic, ParamGroup::DeseEmotion, ParamGroup::Egsid}) {
    CHECK(parse_param_group(to_string(g)) == g);
  }
  CHECK_THROWS(parse_param_group("decoder"));
}

TEST_CASE("same seed, same parameters; config hash tracks the config") {
  EaslModel a(ModelConfig{}, 5), b(ModelConfig{}, 5), c(ModelConfig{}, 6);
  CHECK(a.registry().snapshot() == b.registry().snapshot());
  CHECK(a.registry().snapshot() != c.registry().snapshot());
  ModelConfig cfg;
  const auto h = config_hash(cfg);
  CHECK(h == config_hash(ModelConfig{}));
  cfg.use_dese_emotion = false;
  CHECK(config_hash(cfg) != h);
}

TEST_CASE("forward composes encoder and decoder") {
  EaslModel model(ModelConfig{}, 3);
  const TokenSeq tokens{2, 5, 7};
  egsid::AttentionTrace trace;
  const auto r = model.forward(tokens, 10, &trace);
  const auto enc = oracle::encode(tokens, model.dese_params());
  oracle::Rows memory;
  for (std::size_t t = 0; t < 3; ++t) {
    auto row = enc.H[t];
    row.insert(row.end(), enc.E[t].begin(), enc.E[t].end());
    memory.push_back(row);
  }
  const auto dec = oracle::decode(memory, 10, model.egsid_params());
  CHECK(oracle::max_abs_diff(dec.poses, r.decoded.poses) < 1e-12);
  CHECK(oracle::max_abs_diff(dec.emotions, r.decoded.emotions) < 1e-12);
  CHECK(trace.size() == 2);
}

TEST_CASE("ablated forward graphs") {
  ModelConfig no_dese;
  no_dese.use_dese_emotion = false;
  EaslModel a(no_dese, 3);
  const TokenSeq tokens{1, 4};
  const auto ra = a.forward(tokens, 5);
  for (double v : ra.encoded.E.data()) CHECK(v == 1.0);

  ModelConfig no_egsid;
  no_egsid.use_egsid_emotion = false;
  EaslModel b(no_egsid, 3);
  const auto r = b.forward(tokens, 5);
  const auto ref = egsid::decode_semantic_only(r.encoded.H, 5, b.egsid_params());
  CHECK(oracle::max_abs_diff(oracle::rows_of(ref.poses), r.decoded.poses) == 0.0);
}

TEST_CASE("load_values overwrites by name") {
  EaslModel a(ModelConfig{}, 1), b(ModelConfig{}, 2);
  std::vector<std::string> names;
  for (const auto& e : a.registry().entries()) names.push_back(e.name);
  b.load_values(names, a.registry().snapshot());
  CHECK(a.registry().snapshot() == b.registry().snapshot());
  auto values = a.registry().snapshot();
  values[0].pop_back();
  CHECK_THROWS_AS(b.load_values(names, values), DimensionError);
}

TEST_CASE("model config validation") {
  ModelConfig cfg;
  cfg.dese.semantic_dim = 4;
  CHECK_THROWS_AS(cfg.validate(), ContractError);
  cfg.sync_dims();
  CHECK(cfg.egsid.memory_dim == 12);
  CHECK_NOTHROW(cfg.validate());
}
