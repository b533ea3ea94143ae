#pragma once

// Synthetic teacher corpus and its JSON-lines file format.
//
// The teacher assigns every vocabulary token a short pose motif, an emotion
// confidence profile, a semantic code and an emotion code. A sample is a
// random token string; its pose track concatenates the token motifs (plus
// Gaussian noise) and its emotion track follows the active token's profile,
// cross-fading over the first two frames after each motif boundary.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "easl/autodiff.hpp"
#include "easl/random.hpp"
#include "easl/types.hpp"

namespace easl::data {

inline constexpr int kDatasetVersion = 1;

struct GeneratorConfig {
  std::size_t vocab_size = 20;
  std::size_t pose_dim = 12;  // D, six 2-D keypoints
  std::size_t min_motif = 4;
  std::size_t max_motif = 8;
  std::size_t min_tokens = 2;
  std::size_t max_tokens = 6;
  double noise = 0.02;
  std::size_t semantic_ref_dim = 8;  // must equal the encoder's d_h
  std::size_t emotion_ref_dim = 8;   // must equal the encoder's d_e

  void validate() const;
};

struct Sample {
  TokenSeq tokens;
  ad::Tensor poses;     // [M x D]
  ad::Tensor emotions;  // [M x 7]
  std::vector<double> ref_sem;
  std::vector<double> ref_emo;

  std::size_t frames() const { return poses.dim(0); }
};

struct DatasetHeader {
  int version = kDatasetVersion;
  std::size_t pose_dim = 0;
  std::size_t emotion_classes = kEmotionClasses;
  std::size_t vocab_size = 0;
};

struct Dataset {
  DatasetHeader header;
  std::vector<Sample> samples;

  bool empty() const { return samples.empty(); }
  std::size_t size() const { return samples.size(); }
};

class SyntheticTeacher {
 public:
  SyntheticTeacher(const GeneratorConfig& cfg, Rng& rng);

  const GeneratorConfig& config() const { return cfg_; }
  // [F_k x D] noiseless motif of token k.
  const std::vector<double>& motif(TokenId token) const { return motifs_.at(token); }
  std::size_t motif_length(TokenId token) const { return motifs_.at(token).size() / cfg_.pose_dim; }
  const std::vector<double>& emotion_profile(TokenId token) const { return profiles_.at(token); }

  Sample make_sample(const TokenSeq& tokens, Rng& noise_rng) const;

 private:
  GeneratorConfig cfg_;
  std::vector<double> rest_pose_;
  std::vector<std::vector<double>> motifs_;
  std::vector<std::vector<double>> profiles_;
  std::vector<std::vector<double>> semantic_codes_;
  std::vector<std::vector<double>> emotion_codes_;  // one per emotion class
};

Dataset generate_dataset(std::size_t size, const GeneratorConfig& cfg, std::uint64_t seed);

std::string to_jsonl(const Dataset& dataset);
Dataset from_jsonl(const std::string& text);

// Written via a temporary file and rename.
void save_dataset(const Dataset& dataset, const std::filesystem::path& path);
Dataset load_dataset(const std::filesystem::path& path);

std::uint64_t dataset_hash(const Dataset& dataset);

bool operator==(const Sample& a, const Sample& b);
bool operator==(const Dataset& a, const Dataset& b);

// Shared helper for checkpoint / report writers.
void write_file_atomic(const std::filesystem::path& path, const std::string& bytes);
std::string read_file(const std::filesystem::path& path);

}  // namespace easl::data
