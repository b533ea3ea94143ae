#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "easl/checkpoint.hpp"
#include "easl/cli/run_config.hpp"
#include "easl/data.hpp"
#include "easl/metrics.hpp"
#include "easl/model.hpp"
#include "easl/training.hpp"

namespace easl::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

// `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

struct EvalReport {
  std::array<double, metrics::kMaxNgram> bleu{};
  double rouge_l = 0.0;
  double mae_pose = 0.0;
  metrics::EmotionMae mae_emo;
  std::size_t samples = 0;
  std::size_t empty_candidates = 0;
};

// Back-translates each decoded pose track against `corpus` and scores it with
// corpus BLEU and mean ROUGE-L; MAEs are per-sample means averaged over the set.
EvalReport evaluate_report(const EaslModel& model, const data::Dataset& eval, const data::Dataset& corpus);
// Same scoring with the teacher's own targets as predictions.
EvalReport oracle_report(const data::Dataset& eval, const data::Dataset& corpus);

std::string report_csv_header();
std::string report_csv_row(const EvalReport& r);
std::string report_table(const EvalReport& r);

// Adapts vocabulary, pose width and frame capacity to the dataset.
ModelConfig model_for_dataset(ModelConfig cfg, const data::Dataset& dataset);

struct TrainedRun {
  EaslModel model;
  training::TrainOutcome outcome;
  Checkpoint checkpoint;
};

// Model init and shuffling both use `seed`.
TrainedRun train_run(const data::Dataset& dataset, ModelConfig model_cfg, training::TrainConfig train_cfg,
                     const AblationFlags& ablation, std::uint64_t seed, const training::TrainHooks& hooks = {});

struct AblationConfig {
  std::string name;
  AblationFlags flags;
};

// full, no_three_phase, no_e_dese, no_e_egsid, no_e_dese_egsid
const std::vector<AblationConfig>& ablation_grid();

struct AblationResult {
  std::string config;
  std::uint64_t seed = 0;
  EvalReport report;
};

std::string ablation_summary_csv(const std::vector<AblationResult>& results);

}  // namespace easl::cli
