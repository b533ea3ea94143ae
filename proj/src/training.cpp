#include "easl/training.hpp"

#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>
#include <string>

#include "easl/errors.hpp"
#include "easl/metrics.hpp"
#include "easl/random.hpp"

namespace easl::training {

using ad::Tensor;

std::string_view to_string(Phase phase) {
  switch (phase) {
    case Phase::Joint:
      return "joint";
    case Phase::Semantic:
      return "semantic";
    case Phase::Emotion:
      return "emotion";
    case Phase::Refine:
      return "refine";
  }
  return "unknown";
}

void TrainConfig::validate() const {
  if (!(lambda_pose >= 0.0) || !(lambda_emo >= 0.0) || !(lambda_pose + lambda_emo > 0.0)) {
    throw ContractError("TrainConfig: loss weights must be >= 0 with a positive sum");
  }
  if (!(learning_rate >= 0.0)) throw ContractError("TrainConfig: learning_rate must be >= 0");
  if (batch_size < 1) throw ContractError("TrainConfig: batch_size must be >= 1");
}

// ---------------------------------------------------------------- losses

Tensor loss_pose(const Tensor& pred, const Tensor& target) {
  if (pred.shape() != target.shape() || pred.rank() != 2) {
    throw DimensionError("loss_pose: shape mismatch " + ad::shape_string(pred.shape()) + " vs " +
                         ad::shape_string(target.shape()));
  }
  // Every frame has the same D, so the mean of per-frame means is the global mean.
  return ad::mean_abs(ad::sub(pred, target));
}

Tensor loss_emo(const Tensor& pred, const Tensor& target) {
  if (pred.shape() != target.shape() || pred.rank() != 2 || pred.dim(1) != kEmotionClasses) {
    throw DimensionError("loss_emo: expected matching [M x 7] shapes, got " + ad::shape_string(pred.shape()) + " and " +
                         ad::shape_string(target.shape()));
  }
  for (double v : target.data()) {
    if (!(v >= 0.0 && v <= 1.0))
      throw InputError("loss_emo: target confidence " + std::to_string(v) + " outside [0,1]");
  }
  return ad::mean_abs(ad::sub(pred, target));
}

double loss_total(double lp, double le, const LossWeights& w) { return w.pose * lp + w.emo * le; }

Tensor loss_total(const Tensor& lp, const Tensor& le, const LossWeights& w) {
  return ad::add(ad::scale(lp, w.pose), ad::scale(le, w.emo));
}

// ---------------------------------------------------------------- phases

void set_phase(ParamRegistry& registry, Phase phase) {
  registry.freeze_all(false);
  switch (phase) {
    case Phase::Joint:
      break;
    case Phase::Semantic:
      registry.set_frozen(ParamGroup::DeseEmotion, true);
      break;
    case Phase::Emotion:
      registry.set_frozen(ParamGroup::DeseSemantic, true);
      break;
    case Phase::Refine:
      registry.set_frozen(ParamGroup::DeseSemantic, true);
      registry.set_frozen(ParamGroup::DeseEmotion, true);
      break;
  }
}

LossWeights phase_loss_weights(const TrainConfig& cfg, Phase phase) {
  switch (phase) {
    case Phase::Semantic:
      return {cfg.lambda_pose, 0.0};
    case Phase::Emotion:
      return {cfg.pose_loss_in_emotion_phase ? cfg.lambda_pose : 0.0, cfg.lambda_emo};
    case Phase::Joint:
    case Phase::Refine:
      break;
  }
  return {cfg.lambda_pose, cfg.lambda_emo};
}

void sgd_step(ParamRegistry& registry, double lr) {
  for (auto& e : registry.entries()) {
    if (!e.frozen && lr != 0.0) {
      auto values = e.value.mutable_data();
      const auto grads = e.value.grad();
      for (std::size_t i = 0; i < values.size(); ++i) values[i] -= lr * grads[i];
    }
    e.value.zero_grad();
  }
}

// ---------------------------------------------------------------- evaluation

EvalSummary evaluate(const EaslModel& model, const data::Dataset& dataset) {
  EvalSummary s;
  if (dataset.empty()) return s;
  for (const auto& sample : dataset.samples) {
    const ForwardResult r = model.forward(sample.tokens, sample.frames());
    s.loss_pose += metrics::mean_abs_error(r.decoded.poses, sample.poses);
    s.loss_emo += metrics::mean_abs_error(r.decoded.emotions, sample.emotions);
    s.rho_sem += metrics::rho(r.encoded.H, sample.ref_sem).normalized;
    s.rho_emo += metrics::rho(r.encoded.E, sample.ref_emo).normalized;
    s.rho_cross += metrics::rho_paired(r.encoded.H, r.encoded.E).normalized;
  }
  const auto n = static_cast<double>(dataset.size());
  s.loss_pose /= n;
  s.loss_emo /= n;
  s.rho_sem /= n;
  s.rho_emo /= n;
  s.rho_cross /= n;
  return s;
}

// ---------------------------------------------------------------- training loop

namespace {

EpochRecord make_record(Phase phase, std::size_t epoch, const EvalSummary& e, const LossWeights& w) {
  return {static_cast<int>(phase),
          epoch,
          e.loss_pose,
          e.loss_emo,
          loss_total(e.loss_pose, e.loss_emo, w),
          e.rho_sem,
          e.rho_emo,
          e.rho_cross};
}

void run_epoch(EaslModel& model, const data::Dataset& dataset, const TrainConfig& cfg, const LossWeights& weights,
               std::size_t epoch, Rng& rng) {
  std::vector<std::size_t> order(dataset.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  rng.shuffle(order.begin(), order.end());

  ParamRegistry& registry = model.registry();
  std::size_t batch_index = 0;
  for (std::size_t start = 0; start < order.size(); start += cfg.batch_size, ++batch_index) {
    const std::size_t end = std::min(order.size(), start + cfg.batch_size);
    const double inv = 1.0 / static_cast<double>(end - start);
    for (std::size_t i = start; i < end; ++i) {
      const auto& sample = dataset.samples[order[i]];
      const ForwardResult r = model.forward(sample.tokens, sample.frames());
      const Tensor lp = loss_pose(r.decoded.poses, sample.poses);
      const Tensor le = loss_emo(r.decoded.emotions, sample.emotions);
      for (const auto& [term, value] : {std::pair{"loss_pose", lp.item()}, std::pair{"loss_emo", le.item()}}) {
        if (!std::isfinite(value)) {
          throw TrainingError("non-finite " + std::string(term) + " (" + std::to_string(value) + ") at epoch " +
                              std::to_string(epoch) + ", batch " + std::to_string(batch_index) + ", sample " +
                              std::to_string(order[i]));
        }
      }
      ad::backward(ad::scale(loss_total(lp, le, weights), inv));
    }
    sgd_step(registry, cfg.learning_rate);
  }
}

}  // namespace

TrainOutcome train(EaslModel& model, const data::Dataset& dataset, const TrainConfig& cfg, const TrainHooks& hooks) {
  cfg.validate();
  if (dataset.empty()) throw ContractError("train: empty dataset");

  Rng rng(cfg.seed);
  TrainOutcome out;
  std::vector<std::pair<Phase, std::size_t>> schedule;
  if (cfg.three_phase) {
    schedule = {{Phase::Semantic, cfg.phase_epochs[0]},
                {Phase::Emotion, cfg.phase_epochs[1]},
                {Phase::Refine, cfg.phase_epochs[2]}};
  } else {
    schedule = {{Phase::Joint, cfg.total_epochs()}};
  }

  model.registry().zero_grad();
  const Phase first = schedule.front().first;
  out.history.push_back(make_record(first, 0, evaluate(model, dataset), phase_loss_weights(cfg, first)));
  if (hooks.on_epoch) hooks.on_epoch(out.history.back());

  std::size_t epoch = 0;
  for (const auto& [phase, epochs] : schedule) {
    set_phase(model.registry(), phase);
    const LossWeights weights = phase_loss_weights(cfg, phase);
    if (hooks.on_phase_start) hooks.on_phase_start(phase, model);
    for (std::size_t e = 0; e < epochs; ++e) {
      ++epoch;
      run_epoch(model, dataset, cfg, weights, epoch, rng);
      out.history.push_back(make_record(phase, epoch, evaluate(model, dataset), weights));
      if (hooks.on_epoch) hooks.on_epoch(out.history.back());
    }
    if (hooks.on_phase_end) hooks.on_phase_end(phase, model);
    out.final_phase = phase;
  }
  out.final_epoch = epoch;
  model.registry().freeze_all(false);
  return out;
}

// ---------------------------------------------------------------- CSV

std::string history_csv(const std::vector<EpochRecord>& history) {
  std::string out = "phase,epoch,loss_pose,loss_emo,loss_total,rho_sem,rho_emo,rho_cross\n";
  char buf[256];
  for (const auto& r : history) {
    std::snprintf(buf, sizeof buf, "%d,%zu,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", r.phase, r.epoch, r.loss_pose,
                  r.loss_emo, r.loss_total, r.rho_sem, r.rho_emo, r.rho_cross);
    out += buf;
  }
  return out;
}

std::vector<EpochRecord> parse_history_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  std::vector<EpochRecord> out;
  auto fail = [&](const std::string& why) -> void {
    throw ParseError("history CSV line " + std::to_string(line_no) + ": " + why, line_no);
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line_no == 1) {
      if (line != "phase,epoch,loss_pose,loss_emo,loss_total,rho_sem,rho_emo,rho_cross") fail("unexpected header");
      continue;
    }
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != 8) fail("expected 8 columns, got " + std::to_string(cells.size()));
    EpochRecord r;
    std::size_t col = 0;
    try {
      std::size_t used = 0;
      auto whole = [&](const std::string& s) {
        if (used != s.size()) throw std::invalid_argument(s);
      };
      r.phase = std::stoi(cells[col], &used);
      whole(cells[col]);
      ++col;
      r.epoch = static_cast<std::size_t>(std::stoull(cells[col], &used));
      whole(cells[col]);
      double* fields[] = {&r.loss_pose, &r.loss_emo, &r.loss_total, &r.rho_sem, &r.rho_emo, &r.rho_cross};
      for (double* f : fields) {
        ++col;
        *f = std::stod(cells[col], &used);
        whole(cells[col]);
      }
    } catch (const std::logic_error&) {
      fail("bad number '" + cells[col] + "' in column " + std::to_string(col + 1));
    }
    out.push_back(r);
  }
  if (line_no == 0) throw ParseError("history CSV line 1: empty file", 1);
  return out;
}

}  // namespace easl::training
