// Acceptance checks, one PASS/FAIL line per criterion. Exit status is the
// number of failing criteria (0 when all pass).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "easl/checkpoint.hpp"
#include "easl/cli/commands.hpp"
#include "easl/cli/svg_plot.hpp"
#include "easl/data.hpp"
#include "easl/metrics.hpp"
#include "easl/training.hpp"

using namespace easl;
using ad::Tensor;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

using Clock = std::chrono::steady_clock;
double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

// Shared seed-0 desk-scale run: 200 samples, 30/30/30 epochs, default settings.
struct DeskRun {
  data::Dataset dataset;
  std::vector<std::vector<double>> sem_end1, sem_end2, emo_end2;
  cli::TrainedRun* run = nullptr;
  double seconds = 0;
};

DeskRun& desk() {
  static DeskRun d;
  static std::optional<cli::TrainedRun> holder;
  if (d.run) return d;
  const auto t0 = Clock::now();
  d.dataset = data::generate_dataset(200, {}, 0);
  training::TrainHooks hooks;
  hooks.on_phase_end = [&](training::Phase p, const EaslModel& m) {
    if (p == training::Phase::Semantic) d.sem_end1 = m.registry().snapshot(ParamGroup::DeseSemantic);
    if (p == training::Phase::Emotion) {
      d.sem_end2 = m.registry().snapshot(ParamGroup::DeseSemantic);
      d.emo_end2 = m.registry().snapshot(ParamGroup::DeseEmotion);
    }
  };
  holder.emplace(cli::train_run(d.dataset, ModelConfig{}, training::TrainConfig{}, {}, 0, hooks));
  d.run = &*holder;
  d.seconds = seconds_since(t0);
  return d;
}

// ---------------------------------------------------------------- 1

Outcome gradient_oracle() {
  const auto t0 = Clock::now();
  ModelConfig cfg;
  cfg.dese = {.vocab_size = 6, .embed_dim = 4, .semantic_dim = 4, .emotion_dim = 4};
  cfg.egsid.model_dim = 8;
  cfg.egsid.num_heads = 2;
  cfg.egsid.pose_dim = 6;
  cfg.egsid.max_frames = 4;
  cfg.sync_dims();
  EaslModel model(cfg, 17);
  Rng rng(170);
  const TokenSeq tokens{1, 4, 2};
  std::vector<double> pose(2 * 6), emo(2 * 7);
  for (auto& v : pose) v = rng.uniform(-1, 1);
  for (auto& v : emo) v = rng.uniform(0, 1);
  const Tensor pose_t = Tensor::from_data({2, 6}, pose), emo_t = Tensor::from_data({2, 7}, emo);
  const training::LossWeights w{1.0, 1.0};
  auto loss = [&] {
    const auto r = model.forward(tokens, 2);
    return training::loss_total(training::loss_pose(r.decoded.poses, pose_t),
                                training::loss_emo(r.decoded.emotions, emo_t), w);
  };

  model.registry().zero_grad();
  ad::backward(loss());
  const double h = 1e-5, kFloor = 1e-6;
  double worst = 0, worst_small = 0;
  std::string worst_name;
  std::size_t checked = 0;
  for (auto& e : model.registry().entries()) {
    const std::vector<double> analytic(e.value.grad().begin(), e.value.grad().end());
    auto x = e.value.mutable_data();
    for (std::size_t i = 0; i < x.size(); ++i, ++checked) {
      const double keep = x[i];
      x[i] = keep + h;
      const double up = loss().item();
      x[i] = keep - h;
      const double down = loss().item();
      x[i] = keep;
      const double numeric = (up - down) / (2 * h);
      // central differences at h=1e-5 carry ~1e-11 of roundoff, so gradients
      // under the floor are effectively compared in absolute terms
      const double diff = std::abs(analytic[i] - numeric);
      const double rel = diff / std::max({std::abs(analytic[i]), std::abs(numeric), kFloor});
      if (std::max(std::abs(analytic[i]), std::abs(numeric)) < kFloor) worst_small = std::max(worst_small, diff);
      if (rel > worst) {
        worst = rel;
        worst_name = e.name;
      }
    }
  }
  const double secs = seconds_since(t0);
  return {worst < 1e-4 && secs < 60, std::to_string(checked) + " parameters, max relative error " + fmt("%.3g", worst) +
                                         " (" + worst_name + "), max abs error on gradients under 1e-6 " +
                                         fmt("%.2g", worst_small) + ", " + fmt("%.2fs", secs)};
}

// ---------------------------------------------------------------- 2

Outcome freeze_exactness() {
  auto& d = desk();
  const bool p2 = d.sem_end2 == d.sem_end1;
  const auto& reg = d.run->model.registry();
  const bool p3 =
      reg.snapshot(ParamGroup::DeseSemantic) == d.sem_end2 && reg.snapshot(ParamGroup::DeseEmotion) == d.emo_end2;
  return {p2 && p3, std::string("DESE-semantic unchanged through phase 2: ") + (p2 ? "yes" : "no") +
                        ", all DESE unchanged through phase 3: " + (p3 ? "yes" : "no")};
}

// ---------------------------------------------------------------- 3

Outcome gate_decay() {
  std::size_t violations = 0, checks = 0;
  for (std::uint64_t i = 0; i < 100; ++i) {
    Rng rng(3000 + i);
    EaslModel model(ModelConfig{}, 4000 + i);
    TokenSeq tokens(rng.uniform_int(1, 10));
    for (auto& t : tokens) t = static_cast<TokenId>(rng.uniform_int(0, 19));
    const auto enc = model.encode(tokens);
    for (std::size_t t = 0; t < tokens.size(); ++t) {
      for (std::size_t k = 0; k < enc.E.dim(1); ++k, ++checks)
        violations += std::abs(enc.E.at(t, k)) > std::abs(t == 0 ? 1.0 : enc.E.at(t - 1, k));
      for (std::size_t k = 0; k < enc.C.dim(1); ++k, ++checks)
        violations += std::abs(enc.C.at(t, k)) > std::abs(t == 0 ? 1.0 : enc.C.at(t - 1, k));
    }
  }
  return {violations == 0,
          std::to_string(checks) + " elementwise comparisons, " + std::to_string(violations) + " violations"};
}

// ---------------------------------------------------------------- 4

Outcome emotion_range() {
  auto& d = desk();
  const EaslModel untrained(d.run->model.config(), 0);
  double lo = 1.0, hi = 0.0;
  std::size_t outside = 0;
  for (const EaslModel* m : std::vector<const EaslModel*>{&untrained, &d.run->model}) {
    for (const auto& s : d.dataset.samples) {
      const auto r = m->forward(s.tokens, s.frames());
      for (double v : r.decoded.emotions.data()) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
        outside += !(v > 0.0 && v < 1.0);
      }
    }
  }
  return {outside == 0, "untrained + trained outputs span [" + fmt("%.4g", lo) + ", " + fmt("%.4g", hi) + "], " +
                            std::to_string(outside) + " outside (0,1)"};
}

// ---------------------------------------------------------------- 5

Outcome metric_oracles() {
  auto seq = [](std::initializer_list<TokenId> l) { return TokenSeq(l); };
  const TokenSeq abcd = seq({1, 2, 3, 4}), abcdef = seq({1, 2, 3, 4, 5, 6});
  std::vector<std::string> failed;
  auto expect = [&](const char* what, double got, double want) {
    if (!(std::abs(got - want) < 1e-9)) failed.push_back(std::string(what) + "=" + fmt("%.12g", got));
  };
  auto bleu = [](const TokenSeq& c, const TokenSeq& r, std::size_t n) {
    const std::vector<TokenSeq> refs{r};
    return metrics::bleu_n(c, refs, n).value;
  };
  expect("bleu1(abcd|abcdef)", bleu(abcd, abcdef, 1), std::exp(1.0 - 6.0 / 4.0));
  expect("bleu1 value", bleu(abcd, abcdef, 1), 0.6065306597126334);
  expect("bleu4 disjoint", bleu(abcd, seq({7, 8, 9, 10}), 4), 0.0);
  expect("bleu1 disjoint", bleu(abcd, seq({7, 8, 9, 10}), 1), 0.0);
  expect("rougeL(ac|abc)", metrics::rouge_l(seq({1, 3}), seq({1, 2, 3})), 0.8);
  expect("rougeL disjoint", metrics::rouge_l(abcd, seq({7, 8})), 0.0);
  for (std::size_t n = 1; n <= 4; ++n) expect("bleu identical", bleu(abcdef, abcdef, n), 1.0);
  expect("rougeL identical", metrics::rouge_l(abcdef, abcdef), 1.0);

  // identity through the whole evaluation path: teacher targets as predictions
  const auto ds = data::generate_dataset(50, {}, 0);
  const auto oracle = cli::oracle_report(ds, ds);
  for (double b : oracle.bleu) expect("oracle corpus bleu", b, 1.0);
  expect("oracle rougeL", oracle.rouge_l, 1.0);
  expect("oracle pose mae", oracle.mae_pose, 0.0);
  expect("oracle emotion mae", oracle.mae_emo.mean, 0.0);

  std::string detail = failed.empty() ? "all 18 hand-computed and identity cases within 1e-9" : "mismatches:";
  for (const auto& f : failed) detail += " " + f;
  return {failed.empty(), detail};
}

// ---------------------------------------------------------------- 6

Outcome desk_learning() {
  auto& d = desk();
  const auto& h = d.run->outcome.history;
  const double p0 = h.front().loss_pose, pn = h.back().loss_pose, en = h.back().loss_emo;
  const bool pass = pn <= 0.5 * p0 && en < 0.15 && d.seconds < 300;
  return {pass, "pose MAE " + fmt("%.4f -> %.4f (ratio %.3f)", p0, pn, pn / p0) + ", emotion MAE " + fmt("%.4f", en) +
                    ", " + fmt("%.1fs", d.seconds)};
}

// ---------------------------------------------------------------- 7

Outcome ablation_direction(const fs::path& dir) {
  const auto t0 = Clock::now();
  auto& d = desk();
  const std::vector<std::uint64_t> seeds{0, 1, 2};
  const auto& grid = cli::ablation_grid();
  std::vector<cli::AblationResult> results;
  // mae[config][seed]
  std::vector<std::vector<double>> mae(grid.size(), std::vector<double>(seeds.size()));
  for (std::size_t c = 0; c < grid.size(); ++c) {
    for (std::size_t s = 0; s < seeds.size(); ++s) {
      const auto run = cli::train_run(d.dataset, ModelConfig{}, training::TrainConfig{}, grid[c].flags, seeds[s]);
      const auto report = cli::evaluate_report(run.model, d.dataset, d.dataset);
      results.push_back({grid[c].name, seeds[s], report});
      mae[c][s] = report.mae_emo.mean;
    }
  }
  data::write_file_atomic(dir / "ablation_summary.csv", cli::ablation_summary_csv(results));

  auto mean = [](const std::vector<double>& v) {
    double s = 0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
  };
  const double full = mean(mae[0]);
  bool full_best = true;
  std::string means = "mean emotion MAE:";
  for (std::size_t c = 0; c < grid.size(); ++c) {
    means += " " + grid[c].name + "=" + fmt("%.5f", mean(mae[c]));
    if (c > 0 && full > mean(mae[c])) full_best = false;
  }
  std::size_t worst_count = 0;
  for (std::size_t s = 0; s < seeds.size(); ++s) {
    bool worst = true;
    for (std::size_t c = 0; c < grid.size(); ++c)
      if (c != 1 && mae[c][s] > mae[1][s]) worst = false;
    worst_count += worst;
  }
  return {full_best && worst_count >= 2, means + "; full <= every ablation: " + (full_best ? "yes" : "no") +
                                             "; no_three_phase worst on " + std::to_string(worst_count) + "/3 seeds; " +
                                             fmt("%.1fs", seconds_since(t0))};
}

// ---------------------------------------------------------------- 8

Outcome disentanglement_shape() {
  const auto& h = desk().run->outcome.history;
  // epochs 0..30 phase 1, 31..60 phase 2, 61..90 phase 3
  const double sem_gain = h[30].rho_sem - h[0].rho_sem;
  const double emo_gain = h[60].rho_emo - h[30].rho_emo;
  double lo = h[60].rho_cross, hi = lo;
  for (std::size_t e = 60; e < h.size(); ++e) {
    lo = std::min(lo, h[e].rho_cross);
    hi = std::max(hi, h[e].rho_cross);
  }
  const bool pass = sem_gain >= 0.05 && emo_gain >= 0.05 && hi - lo < 0.02;
  return {pass, "rho_sem gain over phase 1 " + fmt("%+.4f", sem_gain) + ", rho_emo gain over phase 2 " +
                    fmt("%+.4f", emo_gain) + ", rho_cross range in phase 3 " + fmt("%.4f", hi - lo)};
}

// ---------------------------------------------------------------- 9

Outcome persistence(const fs::path& dir) {
  auto& d = desk();
  std::vector<std::string> failed;

  const Checkpoint& ckpt = d.run->checkpoint;
  const std::string bytes = serialize_checkpoint(ckpt);
  save_checkpoint(ckpt, dir / "desk.ckpt");
  const Checkpoint loaded = load_checkpoint(dir / "desk.ckpt");
  if (!(loaded == ckpt) || serialize_checkpoint(loaded) != bytes) failed.push_back("checkpoint round trip");
  if (data::read_file(dir / "desk.ckpt") != bytes) failed.push_back("checkpoint file bytes");

  data::save_dataset(d.dataset, dir / "desk.jsonl");
  const auto ds = data::load_dataset(dir / "desk.jsonl");
  if (!(ds == d.dataset) || data::to_jsonl(ds) != data::to_jsonl(d.dataset)) failed.push_back("dataset round trip");

  const auto again = cli::train_run(data::generate_dataset(200, {}, 0), ModelConfig{}, training::TrainConfig{}, {}, 0);
  if (serialize_checkpoint(again.checkpoint) != bytes) failed.push_back("repeat-run checkpoint");

  const auto& h1 = d.run->outcome.history;
  const auto h2 = training::parse_history_csv(training::history_csv(again.outcome.history));
  const std::string svg1 = cli::render_svg(cli::similarity_plot(h1)) + cli::render_svg(cli::loss_plot(h1));
  const std::string svg2 = cli::render_svg(cli::similarity_plot(h2)) + cli::render_svg(cli::loss_plot(h2));
  if (svg1 != svg2) failed.push_back("repeat-run SVG");
  data::write_file_atomic(dir / "desk.history.csv", training::history_csv(h1));
  data::write_file_atomic(dir / "similarity.svg", cli::render_svg(cli::similarity_plot(h1)));
  data::write_file_atomic(dir / "loss.svg", cli::render_svg(cli::loss_plot(h1)));

  std::string detail = failed.empty() ? "checkpoint " + std::to_string(bytes.size()) +
                                            " bytes and dataset round trip exactly; repeat run bit-identical"
                                      : "failed:";
  for (const auto& f : failed) detail += " " + f;
  return {failed.empty(), detail};
}

}  // namespace

int main(int argc, char** argv) {
  const fs::path dir = argc > 1 ? fs::path(argv[1]) : fs::temp_directory_path() / "easl_acceptance";
  fs::create_directories(dir);

  struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {1, "gradient oracle", gradient_oracle},
      {2, "freeze exactness", freeze_exactness},
      {3, "gate decay invariant", gate_decay},
      {4, "emotion confidence range", emotion_range},
      {5, "metric oracles", metric_oracles},
      {6, "learning at desk scale", desk_learning},
      {7, "ablation direction", [&] { return ablation_direction(dir); }},
      {8, "disentanglement curve shape", disentanglement_shape},
      {9, "persistence", [&] { return persistence(dir); }},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += !o.pass;
    std::printf("[%s] criterion %d, %s: %s\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed; artifacts in %s\n", static_cast<int>(criteria.size()) - failures,
              criteria.size(), dir.string().c_str());
  return failures;
}
