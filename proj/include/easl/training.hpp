#pragma once

// Three-phase training with group freezing.
//
//   phase 1  semantic foundation  trains DESE-semantic + EGSID, pose loss only
//   phase 2  emotion tone         trains DESE-emotion + EGSID
//   phase 3  joint refinement     trains EGSID only
//
// EGSID stays trainable throughout; freezing acts on the encoder groups.

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <string_view>
#include <vector>

#include "easl/autodiff.hpp"
#include "easl/data.hpp"
#include "easl/model.hpp"

namespace easl::training {

enum class Phase : int { Joint = 0, Semantic = 1, Emotion = 2, Refine = 3 };

std::string_view to_string(Phase phase);

struct LossWeights {
  double pose = 1.0;
  double emo = 1.0;
};

struct TrainConfig {
  std::array<std::size_t, 3> phase_epochs{30, 30, 30};
  double learning_rate = 0.05;
  std::size_t batch_size = 1;
  double lambda_pose = 1.0;
  double lambda_emo = 1.0;
  std::uint64_t seed = 0;
  // false: one joint phase over the summed epoch budget, everything trainable.
  bool three_phase = true;
  // Keep the pose term active while the emotion branch trains.
  bool pose_loss_in_emotion_phase = true;

  void validate() const;
  std::size_t total_epochs() const { return phase_epochs[0] + phase_epochs[1] + phase_epochs[2]; }
};

// Mean over frames of the per-frame mean absolute pose error.
ad::Tensor loss_pose(const ad::Tensor& pred, const ad::Tensor& target);
// Same reduction over the 7 confidence classes; targets must lie in [0, 1].
ad::Tensor loss_emo(const ad::Tensor& pred, const ad::Tensor& target);

double loss_total(double lp, double le, const LossWeights& w);
ad::Tensor loss_total(const ad::Tensor& lp, const ad::Tensor& le, const LossWeights& w);

// Freezes every group outside the phase's trainable set.
void set_phase(ParamRegistry& registry, Phase phase);
LossWeights phase_loss_weights(const TrainConfig& cfg, Phase phase);

// p -= lr * grad for unfrozen parameters, then zero every gradient.
void sgd_step(ParamRegistry& registry, double lr);

struct EpochRecord {
  int phase = 0;
  std::size_t epoch = 0;
  double loss_pose = 0.0;
  double loss_emo = 0.0;
  double loss_total = 0.0;
  double rho_sem = 0.0;
  double rho_emo = 0.0;
  double rho_cross = 0.0;

  bool operator==(const EpochRecord&) const = default;
};

struct EvalSummary {
  double loss_pose = 0.0;
  double loss_emo = 0.0;
  double rho_sem = 0.0;
  double rho_emo = 0.0;
  double rho_cross = 0.0;
};

// Dataset means of both losses and the three normalized similarity scores.
EvalSummary evaluate(const EaslModel& model, const data::Dataset& dataset);

struct TrainHooks {
  std::function<void(Phase, const EaslModel&)> on_phase_start;
  std::function<void(Phase, const EaslModel&)> on_phase_end;
  std::function<void(const EpochRecord&)> on_epoch;
};

struct TrainOutcome {
  std::vector<EpochRecord> history;  // epoch 0 is the untrained evaluation
  Phase final_phase = Phase::Semantic;
  std::size_t final_epoch = 0;
};

// Throws TrainingError naming epoch, batch and loss term on a non-finite loss.
TrainOutcome train(EaslModel& model, const data::Dataset& dataset, const TrainConfig& cfg,
                   const TrainHooks& hooks = {});

// CSV with columns phase,epoch,loss_pose,loss_emo,loss_total,rho_sem,rho_emo,rho_cross.
std::string history_csv(const std::vector<EpochRecord>& history);
// Throws ParseError carrying the 1-based line number.
std::vector<EpochRecord> parse_history_csv(const std::string& text);

}  // namespace easl::training
