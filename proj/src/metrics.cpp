#include "easl/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>

#include "easl/errors.hpp"

namespace easl::metrics {

NGramStats& NGramStats::operator+=(const NGramStats& other) {
  for (std::size_t k = 0; k < kMaxNgram; ++k) {
    matches[k] += other.matches[k];
    totals[k] += other.totals[k];
  }
  candidate_length += other.candidate_length;
  reference_length += other.reference_length;
  return *this;
}

namespace {

using Gram = std::vector<TokenId>;

std::map<Gram, std::size_t> count_grams(std::span<const TokenId> seq, std::size_t n) {
  std::map<Gram, std::size_t> counts;
  if (seq.size() < n) return counts;
  for (std::size_t i = 0; i + n <= seq.size(); ++i) ++counts[Gram(seq.begin() + i, seq.begin() + i + n)];
  return counts;
}

}  // namespace

NGramStats ngram_stats(std::span<const TokenId> candidate, std::span<const TokenSeq> references) {
  if (references.empty()) throw ContractError("ngram_stats: at least one reference required");
  NGramStats stats;
  stats.candidate_length = candidate.size();
  stats.reference_length = references.front().size();
  for (const auto& ref : references) {
    const auto diff = [&](std::size_t len) {
      return len > candidate.size() ? len - candidate.size() : candidate.size() - len;
    };
    if (diff(ref.size()) < diff(stats.reference_length) ||
        (diff(ref.size()) == diff(stats.reference_length) && ref.size() < stats.reference_length)) {
      stats.reference_length = ref.size();
    }
  }

  for (std::size_t n = 1; n <= kMaxNgram; ++n) {
    const auto cand = count_grams(candidate, n);
    std::map<Gram, std::size_t> max_ref;
    for (const auto& ref : references)
      for (const auto& [gram, c] : count_grams(ref, n)) max_ref[gram] = std::max(max_ref[gram], c);
    std::size_t matched = 0;
    std::size_t total = 0;
    for (const auto& [gram, c] : cand) {
      total += c;
      auto it = max_ref.find(gram);
      if (it != max_ref.end()) matched += std::min(c, it->second);
    }
    stats.matches[n - 1] = matched;
    stats.totals[n - 1] = total;
  }
  return stats;
}

double bleu_from_stats(const NGramStats& stats, std::size_t n) {
  if (n < 1 || n > kMaxNgram) throw ContractError("bleu: n must be in 1..4, got " + std::to_string(n));
  if (stats.candidate_length == 0) return 0.0;
  double log_sum = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    if (stats.totals[k] == 0 || stats.matches[k] == 0) return 0.0;
    log_sum += std::log(static_cast<double>(stats.matches[k]) / static_cast<double>(stats.totals[k]));
  }
  const double ratio = static_cast<double>(stats.reference_length) / static_cast<double>(stats.candidate_length);
  const double bp = std::exp(std::min(0.0, 1.0 - ratio));
  return bp * std::exp(log_sum / static_cast<double>(n));
}

BleuScore bleu_n(std::span<const TokenId> candidate, std::span<const TokenSeq> references, std::size_t n) {
  if (n < 1 || n > kMaxNgram) throw ContractError("bleu: n must be in 1..4, got " + std::to_string(n));
  if (candidate.empty()) return {0.0, true};
  return {bleu_from_stats(ngram_stats(candidate, references), n), false};
}

std::size_t lcs_length(std::span<const TokenId> a, std::span<const TokenId> b) {
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j)
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

double rouge_l(std::span<const TokenId> candidate, std::span<const TokenId> reference) {
  if (reference.empty()) throw ContractError("rouge_l: empty reference");
  if (candidate.empty()) return 0.0;
  const auto lcs = static_cast<double>(lcs_length(candidate, reference));
  if (lcs == 0.0) return 0.0;
  const double p = lcs / static_cast<double>(candidate.size());
  const double r = lcs / static_cast<double>(reference.size());
  return 2.0 * p * r / (p + r);
}

EmotionMae mae_per_category(const ad::Tensor& pred, const ad::Tensor& target) {
  if (pred.shape() != target.shape() || pred.rank() != 2 || pred.dim(1) != kEmotionClasses) {
    throw DimensionError("mae_per_category: expected matching [M x 7] shapes, got " + ad::shape_string(pred.shape()) +
                         " and " + ad::shape_string(target.shape()));
  }
  EmotionMae out;
  const std::size_t m = pred.dim(0);
  if (m == 0) return out;
  for (std::size_t r = 0; r < m; ++r)
    for (std::size_t c = 0; c < kEmotionClasses; ++c) out.per_category[c] += std::abs(pred.at(r, c) - target.at(r, c));
  double total = 0.0;
  for (auto& v : out.per_category) {
    v /= static_cast<double>(m);
    total += v;
  }
  out.mean = total / static_cast<double>(kEmotionClasses);
  return out;
}

double mean_abs_error(const ad::Tensor& pred, const ad::Tensor& target) {
  if (pred.shape() != target.shape()) {
    throw DimensionError("mean_abs_error: shape mismatch " + ad::shape_string(pred.shape()) + " vs " +
                         ad::shape_string(target.shape()));
  }
  if (pred.numel() == 0) return 0.0;
  double s = 0.0;
  const auto a = pred.data();
  const auto b = target.data();
  for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
  return s / static_cast<double>(a.size());
}

ad::Tensor resample_frames(const ad::Tensor& poses, std::size_t frames) {
  if (poses.rank() != 2 || poses.dim(0) == 0) throw ContractError("resample_frames: empty pose track");
  if (frames == 0) throw ContractError("resample_frames: zero target frames");
  const std::size_t src = poses.dim(0);
  const std::size_t D = poses.dim(1);
  if (src == frames) return poses;
  std::vector<double> out(frames * D);
  for (std::size_t i = 0; i < frames; ++i) {
    const double pos =
        frames == 1 ? 0.0 : static_cast<double>(i) * static_cast<double>(src - 1) / static_cast<double>(frames - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, src - 1);
    const double w = pos - static_cast<double>(lo);
    for (std::size_t d = 0; d < D; ++d) out[i * D + d] = (1.0 - w) * poses.at(lo, d) + w * poses.at(hi, d);
  }
  return ad::Tensor::from_data({frames, D}, std::move(out));
}

std::size_t nearest_sample(const ad::Tensor& pred_poses, std::span<const data::Sample> corpus) {
  if (corpus.empty()) throw ContractError("back_translate: empty corpus");
  if (pred_poses.rank() != 2 || pred_poses.dim(0) == 0) throw ContractError("back_translate: empty prediction");
  const std::size_t frames = pred_poses.dim(0);
  std::size_t best = 0;
  double best_dist = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    if (corpus[i].poses.dim(1) != pred_poses.dim(1)) {
      throw DimensionError("back_translate: pose width " + std::to_string(pred_poses.dim(1)) + " vs corpus width " +
                           std::to_string(corpus[i].poses.dim(1)));
    }
    const double d = mean_abs_error(pred_poses, resample_frames(corpus[i].poses, frames));
    if (d < best_dist) {
      best_dist = d;
      best = i;
    }
  }
  return best;
}

TokenSeq back_translate(const ad::Tensor& pred_poses, std::span<const data::Sample> corpus) {
  return corpus[nearest_sample(pred_poses, corpus)].tokens;
}

namespace {

double dot(std::span<const double> a, std::span<const double> b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

RhoScore finish(double sum, std::size_t rows, std::size_t zero_rows) {
  RhoScore r;
  r.raw = rows ? sum / static_cast<double>(rows) : 0.0;
  r.normalized = (r.raw + 1.0) / 2.0;
  r.zero_rows = zero_rows;
  return r;
}

}  // namespace

RhoScore rho(const ad::Tensor& Z, std::span<const double> reference) {
  if (Z.rank() != 2 || Z.dim(1) != reference.size()) {
    throw DimensionError("rho: rows of " + ad::shape_string(Z.shape()) + " vs reference of length " +
                         std::to_string(reference.size()));
  }
  const double ref_norm = std::sqrt(dot(reference, reference, reference.size()));
  if (ref_norm == 0.0) throw ContractError("rho: zero reference vector");
  const std::size_t T = Z.dim(0);
  const std::size_t d = Z.dim(1);
  double sum = 0.0;
  std::size_t zero_rows = 0;
  for (std::size_t t = 0; t < T; ++t) {
    const auto row = Z.data().subspan(t * d, d);
    const double n = std::sqrt(dot(row, row, d));
    if (n == 0.0) {
      ++zero_rows;
      continue;
    }
    sum += dot(row, reference, d) / (n * ref_norm);
  }
  return finish(sum, T, zero_rows);
}

RhoScore rho_paired(const ad::Tensor& A, const ad::Tensor& B) {
  if (A.rank() != 2 || B.rank() != 2 || A.dim(0) != B.dim(0)) {
    throw DimensionError("rho_paired: row mismatch " + ad::shape_string(A.shape()) + " vs " +
                         ad::shape_string(B.shape()));
  }
  const std::size_t T = A.dim(0);
  const std::size_t d = std::min(A.dim(1), B.dim(1));
  double sum = 0.0;
  std::size_t zero_rows = 0;
  for (std::size_t t = 0; t < T; ++t) {
    const auto a = A.data().subspan(t * A.dim(1), d);
    const auto b = B.data().subspan(t * B.dim(1), d);
    const double na = std::sqrt(dot(a, a, d));
    const double nb = std::sqrt(dot(b, b, d));
    if (na == 0.0 || nb == 0.0) {
      ++zero_rows;
      continue;
    }
    sum += dot(a, b, d) / (na * nb);
  }
  return finish(sum, T, zero_rows);
}

}  // namespace easl::metrics
