#include "easl/data.hpp"

#include <cmath>
#include <fstream>
#include <nlohmann/json.hpp>
#include <numbers>
#include <sstream>
#include <system_error>

#include "easl/errors.hpp"
#include "easl/hash.hpp"

namespace easl::data {

using nlohmann::json;

void GeneratorConfig::validate() const {
  if (vocab_size < 1 || pose_dim < 1) throw ContractError("GeneratorConfig: vocab_size and pose_dim must be >= 1");
  if (min_motif < 1 || min_motif > max_motif) throw ContractError("GeneratorConfig: invalid motif length range");
  if (min_tokens < 1 || min_tokens > max_tokens) throw ContractError("GeneratorConfig: invalid token count range");
  if (!(noise >= 0.0)) throw ContractError("GeneratorConfig: noise must be >= 0");
  if (semantic_ref_dim < 1 || emotion_ref_dim < 1) throw ContractError("GeneratorConfig: reference dims must be >= 1");
}

// ---------------------------------------------------------------- teacher

SyntheticTeacher::SyntheticTeacher(const GeneratorConfig& cfg, Rng& rng) : cfg_(cfg) {
  cfg_.validate();
  const std::size_t D = cfg_.pose_dim;
  rest_pose_.resize(D);
  for (auto& v : rest_pose_) v = rng.uniform(-1.0, 1.0);

  motifs_.resize(cfg_.vocab_size);
  profiles_.resize(cfg_.vocab_size);
  semantic_codes_.resize(cfg_.vocab_size);
  for (std::size_t k = 0; k < cfg_.vocab_size; ++k) {
    const auto frames = static_cast<std::size_t>(rng.uniform_int(cfg_.min_motif, cfg_.max_motif));
    // Each sign holds a characteristic location (offset from rest) and moves
    // through one period of a per-coordinate oscillation.
    std::vector<double> offset(D), amp(D), phase(D);
    for (std::size_t d = 0; d < D; ++d) {
      offset[d] = rng.uniform(-0.5, 0.5);
      amp[d] = rng.uniform(0.1, 0.3);
      phase[d] = rng.uniform(0.0, 2.0 * std::numbers::pi);
    }
    auto& motif = motifs_[k];
    motif.resize(frames * D);
    for (std::size_t f = 0; f < frames; ++f)
      for (std::size_t d = 0; d < D; ++d) {
        const double t = 2.0 * std::numbers::pi * static_cast<double>(f) / static_cast<double>(frames);
        motif[f * D + d] = rest_pose_[d] + offset[d] + amp[d] * std::sin(t + phase[d]);
      }

    const auto dominant = rng.uniform_int(0, kEmotionClasses - 1);
    auto& profile = profiles_[k];
    profile.resize(kEmotionClasses);
    for (std::size_t c = 0; c < kEmotionClasses; ++c)
      profile[c] = (c == dominant) ? rng.uniform(0.6, 0.95) : rng.uniform(0.0, 0.2);

    auto& code = semantic_codes_[k];
    code.resize(cfg_.semantic_ref_dim);
    for (auto& v : code) v = rng.normal();
  }

  emotion_codes_.resize(kEmotionClasses);
  for (auto& code : emotion_codes_) {
    code.resize(cfg_.emotion_ref_dim);
    for (auto& v : code) v = rng.uniform();
  }
}

Sample SyntheticTeacher::make_sample(const TokenSeq& tokens, Rng& noise_rng) const {
  if (tokens.empty()) throw ContractError("make_sample: empty token sequence");
  const std::size_t D = cfg_.pose_dim;
  std::size_t frames = 0;
  for (TokenId t : tokens) {
    if (t >= cfg_.vocab_size) throw InputError("make_sample: token " + std::to_string(t) + " out of vocabulary");
    frames += motif_length(t);
  }

  std::vector<double> poses;
  std::vector<double> emotions;
  poses.reserve(frames * D);
  emotions.reserve(frames * kEmotionClasses);
  for (std::size_t j = 0; j < tokens.size(); ++j) {
    const auto& motif = motifs_[tokens[j]];
    const auto& cur = profiles_[tokens[j]];
    const std::size_t len = motif.size() / D;
    for (std::size_t f = 0; f < len; ++f) {
      for (std::size_t d = 0; d < D; ++d) poses.push_back(motif[f * D + d] + noise_rng.normal(0.0, cfg_.noise));
      // Cross-fade from the previous token's profile over two frames.
      const bool fading = j > 0 && f < 2;
      const double w = fading ? static_cast<double>(f + 1) / 3.0 : 1.0;
      const auto& prev = fading ? profiles_[tokens[j - 1]] : cur;
      for (std::size_t c = 0; c < kEmotionClasses; ++c) emotions.push_back((1.0 - w) * prev[c] + w * cur[c]);
    }
  }

  Sample s;
  s.tokens = tokens;
  s.poses = ad::Tensor::from_data({frames, D}, std::move(poses));
  s.emotions = ad::Tensor::from_data({frames, kEmotionClasses}, emotions);

  s.ref_sem.assign(cfg_.semantic_ref_dim, 0.0);
  for (TokenId t : tokens)
    for (std::size_t i = 0; i < cfg_.semantic_ref_dim; ++i)
      s.ref_sem[i] += semantic_codes_[t][i] / static_cast<double>(tokens.size());

  // Confidence-weighted sum of the class codes, using the frame-mean profile.
  s.ref_emo.assign(cfg_.emotion_ref_dim, 0.0);
  for (std::size_t f = 0; f < frames; ++f)
    for (std::size_t c = 0; c < kEmotionClasses; ++c) {
      const double w = emotions[f * kEmotionClasses + c] / static_cast<double>(frames);
      for (std::size_t i = 0; i < cfg_.emotion_ref_dim; ++i) s.ref_emo[i] += w * emotion_codes_[c][i];
    }
  return s;
}

Dataset generate_dataset(std::size_t size, const GeneratorConfig& cfg, std::uint64_t seed) {
  if (size < 1) throw ContractError("generate_dataset: size must be >= 1");
  Rng rng(seed);
  const SyntheticTeacher teacher(cfg, rng);
  Dataset ds;
  ds.header.pose_dim = cfg.pose_dim;
  ds.header.vocab_size = cfg.vocab_size;
  ds.samples.reserve(size);
  for (std::size_t i = 0; i < size; ++i) {
    const auto len = static_cast<std::size_t>(rng.uniform_int(cfg.min_tokens, cfg.max_tokens));
    TokenSeq tokens(len);
    for (auto& t : tokens) t = static_cast<TokenId>(rng.uniform_int(0, cfg.vocab_size - 1));
    ds.samples.push_back(teacher.make_sample(tokens, rng));
  }
  return ds;
}

// ---------------------------------------------------------------- JSON lines

namespace {

json matrix_json(const ad::Tensor& t) {
  json rows = json::array();
  const std::size_t m = t.dim(0);
  const std::size_t n = t.dim(1);
  for (std::size_t r = 0; r < m; ++r) {
    json row = json::array();
    for (std::size_t c = 0; c < n; ++c) row.push_back(t.at(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

[[noreturn]] void fail(const std::string& what, std::size_t offset) {
  throw ParseError("dataset: " + what + " at byte " + std::to_string(offset), offset);
}

ad::Tensor matrix_from_json(const json& j, std::size_t cols, const char* field, std::size_t offset) {
  if (!j.is_array() || j.empty()) fail(std::string("field '") + field + "' must be a non-empty array", offset);
  std::vector<double> data;
  data.reserve(j.size() * cols);
  for (const auto& row : j) {
    if (!row.is_array() || row.size() != cols) {
      fail(std::string("field '") + field + "' rows must have " + std::to_string(cols) + " numbers", offset);
    }
    for (const auto& v : row) {
      if (!v.is_number()) fail(std::string("field '") + field + "' holds a non-number", offset);
      data.push_back(v.get<double>());
    }
  }
  return ad::Tensor::from_data({j.size(), cols}, std::move(data));
}

std::vector<double> vector_from_json(const json& j, const char* field, std::size_t offset) {
  if (!j.is_array()) fail(std::string("field '") + field + "' must be an array", offset);
  std::vector<double> out;
  out.reserve(j.size());
  for (const auto& v : j) {
    if (!v.is_number()) fail(std::string("field '") + field + "' holds a non-number", offset);
    out.push_back(v.get<double>());
  }
  return out;
}

const json& require(const json& obj, const char* key, std::size_t offset) {
  auto it = obj.find(key);
  if (it == obj.end()) fail(std::string("missing field '") + key + "'", offset);
  return *it;
}

}  // namespace

std::string to_jsonl(const Dataset& dataset) {
  std::string out;
  json header = {{"version", dataset.header.version},
                 {"D", dataset.header.pose_dim},
                 {"K", dataset.header.emotion_classes},
                 {"vocab_size", dataset.header.vocab_size},
                 {"count", dataset.samples.size()}};
  out += header.dump();
  out += '\n';
  for (const auto& s : dataset.samples) {
    json line = {{"tokens", s.tokens},
                 {"poses", matrix_json(s.poses)},
                 {"emotions", matrix_json(s.emotions)},
                 {"ref_sem", s.ref_sem},
                 {"ref_emo", s.ref_emo}};
    out += line.dump();
    out += '\n';
  }
  return out;
}

Dataset from_jsonl(const std::string& text) {
  Dataset ds;
  if (text.empty()) return ds;

  std::size_t pos = 0;
  bool have_header = false;
  std::size_t expected = 0;
  while (pos < text.size()) {
    const std::size_t eol = text.find('\n', pos);
    const std::size_t end = eol == std::string::npos ? text.size() : eol;
    const std::string_view line(text.data() + pos, end - pos);
    const std::size_t line_offset = pos;
    pos = eol == std::string::npos ? text.size() : eol + 1;
    if (line.empty()) continue;

    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      fail(std::string("malformed JSON (") + e.what() + ")", line_offset + (e.byte > 0 ? e.byte - 1 : 0));
    }
    if (!j.is_object()) fail("line is not a JSON object", line_offset);

    try {
      if (!have_header) {
        const json& version = require(j, "version", line_offset);
        if (!version.is_number_integer()) fail("header 'version' must be an integer", line_offset);
        if (version.get<int>() != kDatasetVersion) {
          throw VersionError("dataset version " + std::to_string(version.get<int>()) + " unsupported (expected " +
                             std::to_string(kDatasetVersion) + ")");
        }
        ds.header.pose_dim = require(j, "D", line_offset).get<std::size_t>();
        ds.header.emotion_classes = require(j, "K", line_offset).get<std::size_t>();
        ds.header.vocab_size = require(j, "vocab_size", line_offset).get<std::size_t>();
        expected = require(j, "count", line_offset).get<std::size_t>();
        if (ds.header.emotion_classes != kEmotionClasses) fail("header K must be 7", line_offset);
        have_header = true;
        continue;
      }

      Sample s;
      const json& tokens = require(j, "tokens", line_offset);
      if (!tokens.is_array() || tokens.empty()) fail("field 'tokens' must be a non-empty array", line_offset);
      for (const auto& t : tokens) {
        if (!t.is_number_unsigned()) fail("field 'tokens' holds a non-integer", line_offset);
        const auto id = t.get<std::uint64_t>();
        if (id >= ds.header.vocab_size) fail("token id outside vocabulary", line_offset);
        s.tokens.push_back(static_cast<TokenId>(id));
      }
      s.poses = matrix_from_json(require(j, "poses", line_offset), ds.header.pose_dim, "poses", line_offset);
      s.emotions = matrix_from_json(require(j, "emotions", line_offset), kEmotionClasses, "emotions", line_offset);
      if (s.poses.dim(0) != s.emotions.dim(0)) fail("poses and emotions frame counts differ", line_offset);
      s.ref_sem = vector_from_json(require(j, "ref_sem", line_offset), "ref_sem", line_offset);
      s.ref_emo = vector_from_json(require(j, "ref_emo", line_offset), "ref_emo", line_offset);
      ds.samples.push_back(std::move(s));
    } catch (const json::exception& e) {
      fail(std::string("bad field type (") + e.what() + ")", line_offset);
    }
  }
  if (!have_header) fail("missing header line", 0);
  if (ds.samples.size() != expected) {
    fail("expected " + std::to_string(expected) + " samples, found " + std::to_string(ds.samples.size()), text.size());
  }
  return ds;
}

void write_file_atomic(const std::filesystem::path& path, const std::string& bytes) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw std::runtime_error("cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void save_dataset(const Dataset& dataset, const std::filesystem::path& path) {
  write_file_atomic(path, to_jsonl(dataset));
}

Dataset load_dataset(const std::filesystem::path& path) { return from_jsonl(read_file(path)); }

std::uint64_t dataset_hash(const Dataset& dataset) { return fnv1a64(to_jsonl(dataset)); }

bool operator==(const Sample& a, const Sample& b) {
  auto same = [](const ad::Tensor& x, const ad::Tensor& y) {
    return x.shape() == y.shape() && std::equal(x.data().begin(), x.data().end(), y.data().begin());
  };
  return a.tokens == b.tokens && same(a.poses, b.poses) && same(a.emotions, b.emotions) && a.ref_sem == b.ref_sem &&
         a.ref_emo == b.ref_emo;
}

bool operator==(const Dataset& a, const Dataset& b) {
  return a.header.version == b.header.version && a.header.pose_dim == b.header.pose_dim &&
         a.header.emotion_classes == b.header.emotion_classes && a.header.vocab_size == b.header.vocab_size &&
         a.samples == b.samples;
}

}  // namespace easl::data
