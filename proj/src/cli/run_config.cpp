#include "easl/cli/run_config.hpp"

#include <cstdlib>
#include <string>

#include "easl/config_json.hpp"
#include "easl/errors.hpp"

namespace easl::cli {

using detail::read_opt;
using nlohmann::json;

void to_json(json& j, const AblationFlags& a) {
  j = {{"no_three_phase", a.no_three_phase}, {"no_e_dese", a.no_e_dese}, {"no_e_egsid", a.no_e_egsid}};
}

void from_json(const json& j, AblationFlags& a) {
  read_opt(j, "no_three_phase", a.no_three_phase);
  read_opt(j, "no_e_dese", a.no_e_dese);
  read_opt(j, "no_e_egsid", a.no_e_egsid);
}

void to_json(json& j, const RunPaths& p) {
  j = {{"data", p.data}, {"out", p.out}, {"checkpoint", p.checkpoint}, {"history", p.history}, {"corpus", p.corpus}};
}

void from_json(const json& j, RunPaths& p) {
  read_opt(j, "data", p.data);
  read_opt(j, "out", p.out);
  read_opt(j, "checkpoint", p.checkpoint);
  read_opt(j, "history", p.history);
  read_opt(j, "corpus", p.corpus);
}

void to_json(json& j, const RunConfig& c) {
  j = {{"command", c.command}, {"seed", c.seed}, {"size", c.size},   {"paths", c.paths}, {"ablation", c.ablation},
       {"seeds", c.seeds},     {"jobs", c.jobs}, {"model", c.model}, {"train", c.train}, {"generator", c.generator}};
}

void from_json(const json& j, RunConfig& c) {
  if (!j.is_object()) throw json::type_error::create(302, "run config must be a JSON object", &j);
  read_opt(j, "command", c.command);
  read_opt(j, "seed", c.seed);
  read_opt(j, "size", c.size);
  read_opt(j, "paths", c.paths);
  read_opt(j, "ablation", c.ablation);
  read_opt(j, "seeds", c.seeds);
  read_opt(j, "jobs", c.jobs);
  read_opt(j, "model", c.model);
  read_opt(j, "train", c.train);
  read_opt(j, "generator", c.generator);
}

std::string dump_run_config(const RunConfig& c) { return json(c).dump(2) + "\n"; }

RunConfig parse_run_config(const std::string& text) {
  RunConfig c;
  try {
    json::parse(text).get_to(c);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("run config: ") + e.what(), e.byte > 0 ? e.byte - 1 : 0);
  } catch (const json::exception& e) {
    throw ParseError(std::string("run config: ") + e.what(), 0);
  }
  return c;
}

RunConfig load_run_config(const std::string& path) { return parse_run_config(data::read_file(path)); }

bool operator==(const RunConfig& a, const RunConfig& b) { return json(a) == json(b); }

std::optional<std::uint64_t> env_seed() {
  const char* v = std::getenv("EASL_SEED");
  if (v == nullptr || *v == '\0') return std::nullopt;
  char* end = nullptr;
  const unsigned long long s = std::strtoull(v, &end, 10);
  if (*end != '\0' || *v == '-') throw InputError(std::string("EASL_SEED is not a non-negative integer: ") + v);
  return static_cast<std::uint64_t>(s);
}

void apply_ablation(const AblationFlags& flags, ModelConfig& model, training::TrainConfig& train) {
  if (flags.no_three_phase) train.three_phase = false;
  if (flags.no_e_dese) model.use_dese_emotion = false;
  if (flags.no_e_egsid) model.use_egsid_emotion = false;
}

}  // namespace easl::cli
