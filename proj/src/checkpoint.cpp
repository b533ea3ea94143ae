#include "easl/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <nlohmann/json.hpp>
#include <sstream>

#include "easl/config_json.hpp"
#include "easl/errors.hpp"

namespace easl {

using nlohmann::json;

namespace {

constexpr char kMagic[8] = {'E', 'A', 'S', 'L', 'C', 'K', 'P', 'T'};

template <class U>
void put_le(std::string& out, U value) {
  for (std::size_t i = 0; i < sizeof(U); ++i) out.push_back(static_cast<char>((value >> (8 * i)) & 0xff));
}

class Reader {
 public:
  explicit Reader(std::string_view bytes) : bytes_(bytes) {}

  template <class U>
  U get_le(const char* what) {
    need(sizeof(U), what);
    U v = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i)
      v |= static_cast<U>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    pos_ += sizeof(U);
    return v;
  }

  std::string_view take(std::size_t n, const char* what) {
    need(n, what);
    auto s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  std::size_t pos() const { return pos_; }
  bool done() const { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n, const char* what) const {
    if (bytes_.size() - pos_ < n) {
      throw ParseError(std::string("checkpoint truncated while reading ") + what + " at byte " + std::to_string(pos_),
                       pos_);
    }
  }

  std::string_view bytes_;
  std::size_t pos_ = 0;
};

json record_json(const training::EpochRecord& r) {
  return {{"phase", r.phase},           {"epoch", r.epoch},     {"loss_pose", r.loss_pose}, {"loss_emo", r.loss_emo},
          {"loss_total", r.loss_total}, {"rho_sem", r.rho_sem}, {"rho_emo", r.rho_emo},     {"rho_cross", r.rho_cross}};
}

training::EpochRecord record_from_json(const json& j) {
  training::EpochRecord r;
  j.at("phase").get_to(r.phase);
  j.at("epoch").get_to(r.epoch);
  j.at("loss_pose").get_to(r.loss_pose);
  j.at("loss_emo").get_to(r.loss_emo);
  j.at("loss_total").get_to(r.loss_total);
  j.at("rho_sem").get_to(r.rho_sem);
  j.at("rho_emo").get_to(r.rho_emo);
  j.at("rho_cross").get_to(r.rho_cross);
  return r;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace

Checkpoint capture_checkpoint(const EaslModel& model, const training::TrainConfig& train_cfg,
                              const training::TrainOutcome& outcome) {
  Checkpoint c;
  c.model_config = model.config();
  c.train_config = train_cfg;
  for (const auto& e : model.registry().entries()) {
    c.params.push_back({e.name, e.group, e.value.shape(), {e.value.data().begin(), e.value.data().end()}});
  }
  c.phase = static_cast<int>(outcome.final_phase);
  c.epoch = outcome.final_epoch;
  c.history = outcome.history;
  c.config_hash = config_hash(c.model_config);
  return c;
}

std::string serialize_checkpoint(const Checkpoint& ckpt) {
  json meta;
  meta["model_config"] = ckpt.model_config;
  meta["train_config"] = ckpt.train_config;
  meta["config_hash"] = hex64(ckpt.config_hash);
  meta["phase"] = ckpt.phase;
  meta["epoch"] = ckpt.epoch;
  json history = json::array();
  for (const auto& r : ckpt.history) history.push_back(record_json(r));
  meta["history"] = std::move(history);
  json params = json::array();
  std::uint64_t offset = 0;
  for (const auto& p : ckpt.params) {
    params.push_back({{"name", p.name}, {"group", to_string(p.group)}, {"shape", p.shape}, {"offset", offset}});
    offset += p.values.size();
  }
  meta["params"] = std::move(params);
  const std::string meta_text = meta.dump();

  std::string out(kMagic, sizeof kMagic);
  put_le<std::uint32_t>(out, kCheckpointVersion);
  put_le<std::uint64_t>(out, meta_text.size());
  out += meta_text;
  put_le<std::uint64_t>(out, offset);
  for (const auto& p : ckpt.params)
    for (double v : p.values) put_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(v));
  return out;
}

Checkpoint deserialize_checkpoint(std::string_view bytes) {
  Reader in(bytes);
  if (in.take(sizeof kMagic, "magic") != std::string_view(kMagic, sizeof kMagic)) {
    throw ParseError("checkpoint: bad magic header", 0);
  }
  const auto version = in.get_le<std::uint32_t>("version");
  if (version != kCheckpointVersion) {
    throw VersionError("checkpoint version " + std::to_string(version) + " unsupported (expected " +
                       std::to_string(kCheckpointVersion) + ")");
  }
  const auto meta_len = in.get_le<std::uint64_t>("metadata length");
  const std::size_t meta_pos = in.pos();
  const std::string_view meta_text = in.take(meta_len, "metadata");

  Checkpoint c;
  std::vector<std::pair<std::uint64_t, std::size_t>> layout;  // offset, count
  try {
    const json meta = json::parse(meta_text);
    meta.at("model_config").get_to(c.model_config);
    meta.at("train_config").get_to(c.train_config);
    c.config_hash = std::stoull(meta.at("config_hash").get<std::string>(), nullptr, 16);
    meta.at("phase").get_to(c.phase);
    meta.at("epoch").get_to(c.epoch);
    for (const auto& r : meta.at("history")) c.history.push_back(record_from_json(r));
    for (const auto& p : meta.at("params")) {
      ParamRecord rec;
      p.at("name").get_to(rec.name);
      rec.group = parse_param_group(p.at("group").get<std::string>());
      p.at("shape").get_to(rec.shape);
      layout.emplace_back(p.at("offset").get<std::uint64_t>(), ad::shape_numel(rec.shape));
      c.params.push_back(std::move(rec));
    }
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("checkpoint metadata: ") + e.what(), meta_pos + (e.byte > 0 ? e.byte - 1 : 0));
  } catch (const json::exception& e) {
    throw ParseError(std::string("checkpoint metadata: ") + e.what(), meta_pos);
  } catch (const std::logic_error& e) {
    throw ParseError(std::string("checkpoint metadata: ") + e.what(), meta_pos);
  }

  const auto count = in.get_le<std::uint64_t>("value count");
  std::uint64_t expected = 0;
  for (const auto& [offset, n] : layout) {
    if (offset != expected) throw ParseError("checkpoint: parameter offsets are not contiguous", meta_pos);
    expected += n;
  }
  if (count != expected) {
    throw ParseError("checkpoint: value count " + std::to_string(count) + " does not match shapes (" +
                         std::to_string(expected) + ")",
                     in.pos());
  }
  for (std::size_t i = 0; i < c.params.size(); ++i) {
    auto& values = c.params[i].values;
    values.resize(layout[i].second);
    for (auto& v : values) v = std::bit_cast<double>(in.get_le<std::uint64_t>("parameter values"));
  }
  if (!in.done()) throw ParseError("checkpoint: trailing bytes after value block", in.pos());
  return c;
}

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  data::write_file_atomic(path, serialize_checkpoint(ckpt));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) { return deserialize_checkpoint(data::read_file(path)); }

EaslModel restore_model(const Checkpoint& ckpt) { return restore_model(ckpt, ckpt.model_config); }

EaslModel restore_model(const Checkpoint& ckpt, const ModelConfig& expected) {
  const std::uint64_t want = config_hash(expected);
  if (ckpt.config_hash != want || config_hash(ckpt.model_config) != want) {
    throw ContractError("checkpoint config hash " + hex64(ckpt.config_hash) + " does not match model config hash " +
                        hex64(want));
  }
  EaslModel model(ckpt.model_config, 0);
  std::vector<std::string> names;
  std::vector<std::vector<double>> values;
  for (const auto& p : ckpt.params) {
    const auto& entry = model.registry().find(p.name);
    if (entry.value.shape() != p.shape || entry.group != p.group) {
      throw ContractError("checkpoint parameter " + p.name + " has shape " + ad::shape_string(p.shape) +
                          ", model expects " + ad::shape_string(entry.value.shape()));
    }
    names.push_back(p.name);
    values.push_back(p.values);
  }
  model.load_values(names, values);
  return model;
}

bool operator==(const Checkpoint& a, const Checkpoint& b) {
  return config_hash(a.model_config) == config_hash(b.model_config) &&
         nlohmann::json(a.train_config) == nlohmann::json(b.train_config) && a.params == b.params &&
         a.phase == b.phase && a.epoch == b.epoch && a.history == b.history && a.config_hash == b.config_hash;
}

}  // namespace easl
