#pragma once

// Resolved settings for one CLI invocation. The JSON form mirrors the struct;
// missing keys keep their defaults.

#include <cstdint>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "easl/data.hpp"
#include "easl/model.hpp"
#include "easl/training.hpp"

namespace easl::cli {

struct AblationFlags {
  bool no_three_phase = false;
  bool no_e_dese = false;
  bool no_e_egsid = false;

  bool operator==(const AblationFlags&) const = default;
};

struct RunPaths {
  std::string data;
  std::string out;
  std::string checkpoint;
  std::string history;
  std::string corpus;

  bool operator==(const RunPaths&) const = default;
};

struct RunConfig {
  std::string command;
  ModelConfig model;
  training::TrainConfig train;
  data::GeneratorConfig generator;
  RunPaths paths;
  std::uint64_t seed = 0;
  std::size_t size = 200;
  AblationFlags ablation;
  std::vector<std::uint64_t> seeds{0, 1, 2};
  std::size_t jobs = 1;
};

void to_json(nlohmann::json& j, const AblationFlags& a);
void from_json(const nlohmann::json& j, AblationFlags& a);
void to_json(nlohmann::json& j, const RunPaths& p);
void from_json(const nlohmann::json& j, RunPaths& p);
void to_json(nlohmann::json& j, const RunConfig& c);
void from_json(const nlohmann::json& j, RunConfig& c);

std::string dump_run_config(const RunConfig& c);
// Throws ParseError on malformed JSON.
RunConfig parse_run_config(const std::string& text);
RunConfig load_run_config(const std::string& path);

bool operator==(const RunConfig& a, const RunConfig& b);

// EASL_SEED when set; InputError when it is not a non-negative integer.
std::optional<std::uint64_t> env_seed();

// Ablation switches applied to copies of the model and training configs.
void apply_ablation(const AblationFlags& flags, ModelConfig& model, training::TrainConfig& train);

}  // namespace easl::cli
