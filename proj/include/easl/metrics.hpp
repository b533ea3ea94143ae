#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "easl/autodiff.hpp"
#include "easl/data.hpp"
#include "easl/types.hpp"

namespace easl::metrics {

inline constexpr std::size_t kMaxNgram = 4;

struct NGramStats {
  std::array<std::size_t, kMaxNgram> matches{};  // clipped
  std::array<std::size_t, kMaxNgram> totals{};
  std::size_t candidate_length = 0;
  std::size_t reference_length = 0;

  NGramStats& operator+=(const NGramStats& other);
};

// Clipped n-gram counts against the references; reference_length is the
// reference length closest to the candidate (shorter wins ties).
NGramStats ngram_stats(std::span<const TokenId> candidate, std::span<const TokenSeq> references);

struct BleuScore {
  double value = 0.0;
  bool empty_candidate = false;
};

// Uniform-weight geometric mean of the 1..n precisions times
// exp(min(0, 1 - ref_len / cand_len)).
double bleu_from_stats(const NGramStats& stats, std::size_t n);
BleuScore bleu_n(std::span<const TokenId> candidate, std::span<const TokenSeq> references, std::size_t n);

std::size_t lcs_length(std::span<const TokenId> a, std::span<const TokenId> b);
double rouge_l(std::span<const TokenId> candidate, std::span<const TokenId> reference);

struct EmotionMae {
  std::array<double, kEmotionClasses> per_category{};
  double mean = 0.0;
};

EmotionMae mae_per_category(const ad::Tensor& pred, const ad::Tensor& target);

// Mean absolute error over all entries; shapes must match.
double mean_abs_error(const ad::Tensor& pred, const ad::Tensor& target);

// [frames x D] linear resampling of a pose track onto `frames` evenly spaced
// positions spanning the original first and last frame.
ad::Tensor resample_frames(const ad::Tensor& poses, std::size_t frames);

// Nearest corpus sample under frame-averaged MAE after resampling it to the
// candidate's frame count. Ties go to the lower index.
std::size_t nearest_sample(const ad::Tensor& pred_poses, std::span<const data::Sample> corpus);
TokenSeq back_translate(const ad::Tensor& pred_poses, std::span<const data::Sample> corpus);

struct RhoScore {
  double raw = 0.0;         // mean cosine in [-1, 1]
  double normalized = 0.5;  // (raw + 1) / 2
  std::size_t zero_rows = 0;
};

// Rows of Z [T x d] against one reference vector of length d.
RhoScore rho(const ad::Tensor& Z, std::span<const double> reference);

// Row-paired similarity of two streams; rows are compared on their common
// leading coordinates when widths differ.
RhoScore rho_paired(const ad::Tensor& A, const ad::Tensor& B);

}  // namespace easl::metrics
