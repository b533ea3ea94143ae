#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "easl/checkpoint.hpp"
#include "easl/errors.hpp"

using namespace easl;

namespace {

Checkpoint trained_checkpoint(EaslModel& model) {
  data::GeneratorConfig g;
  g.semantic_ref_dim = g.emotion_ref_dim = 8;
  const auto ds = data::generate_dataset(6, g, 1);
  training::TrainConfig t;
  t.phase_epochs = {1, 1, 1};
  t.learning_rate = 0.1;
  const auto out = training::train(model, ds, t);
  return capture_checkpoint(model, t, out);
}

}  // namespace

TEST_CASE("serialize round trip is bit exact") {
  EaslModel model(ModelConfig{}, 3);
  const Checkpoint c = trained_checkpoint(model);
  const std::string bytes = serialize_checkpoint(c);
  CHECK(bytes.substr(0, 8) == "EASLCKPT");
  const Checkpoint back = deserialize_checkpoint(bytes);
  CHECK(back == c);
  CHECK(serialize_checkpoint(back) == bytes);
  CHECK(back.history.size() == 4);
  CHECK(back.phase == 3);
  CHECK(back.epoch == 3);
}

TEST_CASE("special float values survive") {
  EaslModel model(ModelConfig{}, 3);
  Checkpoint c = trained_checkpoint(model);
  c.params[0].values[0] = -0.0;
  c.params[0].values[1] = 5e-324;
  c.params[0].values[2] = 1.0 / 3.0;
  const Checkpoint back = deserialize_checkpoint(serialize_checkpoint(c));
  CHECK(std::signbit(back.params[0].values[0]));
  CHECK(back.params[0].values[1] == 5e-324);
  CHECK(back.params[0].values[2] == 1.0 / 3.0);
}

TEST_CASE("file round trip and restore") {
  EaslModel model(ModelConfig{}, 4);
  const Checkpoint c = trained_checkpoint(model);
  const auto path = std::filesystem::temp_directory_path() / "easl_test_ckpt.bin";
  save_checkpoint(c, path);
  const Checkpoint back = load_checkpoint(path);
  std::filesystem::remove(path);
  CHECK(back == c);
  const EaslModel restored = restore_model(back);
  CHECK(restored.registry().snapshot() == model.registry().snapshot());
  const TokenSeq tokens{1, 2, 3};
  const auto a = model.forward(tokens, 6).decoded.poses;
  const auto b = restored.forward(tokens, 6).decoded.poses;
  CHECK(std::vector<double>(a.data().begin(), a.data().end()) == std::vector<double>(b.data().begin(), b.data().end()));
}

TEST_CASE("config hash mismatch is refused") {
  EaslModel model(ModelConfig{}, 4);
  const Checkpoint c = trained_checkpoint(model);
  ModelConfig other;
  other.use_egsid_emotion = false;
  CHECK_THROWS_AS(restore_model(c, other), ContractError);
  Checkpoint tampered = c;
  tampered.config_hash ^= 1;
  CHECK_THROWS_AS(restore_model(tampered), ContractError);
}

TEST_CASE("malformed checkpoints") {
  EaslModel model(ModelConfig{}, 4);
  const std::string bytes = serialize_checkpoint(trained_checkpoint(model));

  std::string bad = bytes;
  bad[0] = 'X';
  CHECK_THROWS_AS(deserialize_checkpoint(bad), ParseError);

  bad = bytes;
  bad[8] = 9;
  CHECK_THROWS_AS(deserialize_checkpoint(bad), VersionError);

  try {
    deserialize_checkpoint(bytes.substr(0, bytes.size() - 3));
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.offset() > 20);
  }
  CHECK_THROWS_AS(deserialize_checkpoint(bytes.substr(0, 10)), ParseError);
  CHECK_THROWS_AS(deserialize_checkpoint(bytes + "x"), ParseError);

  bad = bytes;
  bad[20] = '!';  // inside the JSON preamble
  CHECK_THROWS_AS(deserialize_checkpoint(bad), ParseError);
}
