#include "easl/cli/commands.hpp"

#include <CLI11.hpp>
#include <atomic>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <nlohmann/json.hpp>
#include <optional>
#include <ostream>
#include <thread>

#include "easl/cli/svg_plot.hpp"
#include "easl/errors.hpp"

namespace easl::cli {

namespace fs = std::filesystem;

// ---------------------------------------------------------------- reports

namespace {

template <class PredictFn>
EvalReport score(const data::Dataset& eval, const data::Dataset& corpus, PredictFn predict) {
  if (corpus.empty()) throw ContractError("evaluation: empty back-translation corpus");
  EvalReport r;
  r.samples = eval.size();
  if (eval.empty()) return r;
  metrics::NGramStats stats;
  for (const auto& sample : eval.samples) {
    const auto [poses, emotions] = predict(sample);
    const TokenSeq candidate = metrics::back_translate(poses, corpus.samples);
    const TokenSeq refs[] = {sample.tokens};
    stats += metrics::ngram_stats(candidate, refs);
    if (candidate.empty()) ++r.empty_candidates;
    r.rouge_l += metrics::rouge_l(candidate, sample.tokens);
    r.mae_pose += metrics::mean_abs_error(poses, sample.poses);
    const metrics::EmotionMae emo = metrics::mae_per_category(emotions, sample.emotions);
    for (std::size_t c = 0; c < kEmotionClasses; ++c) r.mae_emo.per_category[c] += emo.per_category[c];
    r.mae_emo.mean += emo.mean;
  }
  const auto n = static_cast<double>(eval.size());
  for (std::size_t k = 1; k <= metrics::kMaxNgram; ++k) r.bleu[k - 1] = metrics::bleu_from_stats(stats, k);
  r.rouge_l /= n;
  r.mae_pose /= n;
  for (auto& v : r.mae_emo.per_category) v /= n;
  r.mae_emo.mean /= n;
  return r;
}

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt4(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

}  // namespace

EvalReport evaluate_report(const EaslModel& model, const data::Dataset& eval, const data::Dataset& corpus) {
  return score(eval, corpus, [&](const data::Sample& s) {
    ForwardResult f = model.forward(s.tokens, s.frames());
    return std::pair{f.decoded.poses.detach(), f.decoded.emotions.detach()};
  });
}

EvalReport oracle_report(const data::Dataset& eval, const data::Dataset& corpus) {
  return score(eval, corpus, [](const data::Sample& s) { return std::pair{s.poses, s.emotions}; });
}

std::string report_csv_header() {
  std::string h = "bleu1,bleu2,bleu3,bleu4,rougeL,mae_pose,mae_emo_mean";
  for (auto name : kEmotionNames) h += ",mae_emo_" + std::string(name);
  return h + "\n";
}

std::string report_csv_row(const EvalReport& r) {
  std::string row;
  for (double b : r.bleu) row += fmt17(b) + ",";
  row += fmt17(r.rouge_l) + "," + fmt17(r.mae_pose) + "," + fmt17(r.mae_emo.mean);
  for (double v : r.mae_emo.per_category) row += "," + fmt17(v);
  return row + "\n";
}

std::string report_table(const EvalReport& r) {
  std::string t = "samples        " + std::to_string(r.samples) + "\n";
  for (std::size_t k = 0; k < r.bleu.size(); ++k)
    t += "BLEU-" + std::to_string(k + 1) + "         " + fmt4(r.bleu[k]) + "\n";
  t += "ROUGE-L        " + fmt4(r.rouge_l) + "\n";
  t += "MAE pose       " + fmt4(r.mae_pose) + "\n";
  t += "MAE emotion    " + fmt4(r.mae_emo.mean) + "\n";
  for (std::size_t c = 0; c < kEmotionClasses; ++c) {
    std::string name(kEmotionNames[c]);
    name.resize(9, ' ');
    t += "  " + name + "    " + fmt4(r.mae_emo.per_category[c]) + "\n";
  }
  if (r.empty_candidates > 0) t += "warning: " + std::to_string(r.empty_candidates) + " empty candidates\n";
  return t;
}

// ---------------------------------------------------------------- training runs

ModelConfig model_for_dataset(ModelConfig cfg, const data::Dataset& dataset) {
  if (dataset.header.vocab_size > 0) cfg.dese.vocab_size = dataset.header.vocab_size;
  if (dataset.header.pose_dim > 0) cfg.egsid.pose_dim = dataset.header.pose_dim;
  for (const auto& s : dataset.samples) cfg.egsid.max_frames = std::max(cfg.egsid.max_frames, s.frames());
  cfg.sync_dims();
  return cfg;
}

TrainedRun train_run(const data::Dataset& dataset, ModelConfig model_cfg, training::TrainConfig train_cfg,
                     const AblationFlags& ablation, std::uint64_t seed, const training::TrainHooks& hooks) {
  apply_ablation(ablation, model_cfg, train_cfg);
  model_cfg = model_for_dataset(model_cfg, dataset);
  model_cfg.validate();
  for (const auto& s : dataset.samples) {
    if (s.ref_sem.size() != model_cfg.dese.semantic_dim || s.ref_emo.size() != model_cfg.dese.emotion_dim) {
      throw InputError("dataset reference widths (" + std::to_string(s.ref_sem.size()) + ", " +
                       std::to_string(s.ref_emo.size()) + ") do not match encoder widths (" +
                       std::to_string(model_cfg.dese.semantic_dim) + ", " + std::to_string(model_cfg.dese.emotion_dim) +
                       ")");
    }
  }
  train_cfg.seed = seed;
  EaslModel model(model_cfg, seed);
  training::TrainOutcome outcome = training::train(model, dataset, train_cfg, hooks);
  Checkpoint ckpt = capture_checkpoint(model, train_cfg, outcome);
  return TrainedRun{std::move(model), std::move(outcome), std::move(ckpt)};
}

const std::vector<AblationConfig>& ablation_grid() {
  static const std::vector<AblationConfig> grid = {
      {"full", {}},
      {"no_three_phase", {true, false, false}},
      {"no_e_dese", {false, true, false}},
      {"no_e_egsid", {false, false, true}},
      {"no_e_dese_egsid", {false, true, true}},
  };
  return grid;
}

std::string ablation_summary_csv(const std::vector<AblationResult>& results) {
  std::string out = "config,seed,bleu4,rougeL,mae_emo_mean,mae_pose\n";
  for (const auto& r : results) {
    out += r.config + "," + std::to_string(r.seed) + "," + fmt17(r.report.bleu[3]) + "," + fmt17(r.report.rouge_l) +
           "," + fmt17(r.report.mae_emo.mean) + "," + fmt17(r.report.mae_pose) + "\n";
  }
  for (const auto& cfg : ablation_grid()) {
    double b = 0, rl = 0, me = 0, mp = 0;
    std::size_t n = 0;
    for (const auto& r : results) {
      if (r.config != cfg.name) continue;
      b += r.report.bleu[3];
      rl += r.report.rouge_l;
      me += r.report.mae_emo.mean;
      mp += r.report.mae_pose;
      ++n;
    }
    if (n == 0) continue;
    const auto k = static_cast<double>(n);
    out += cfg.name + ",mean," + fmt17(b / k) + "," + fmt17(rl / k) + "," + fmt17(me / k) + "," + fmt17(mp / k) + "\n";
  }
  return out;
}

// ---------------------------------------------------------------- command line

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Flag values; unset ones leave the config-file (or default) value alone.
struct Flags {
  std::string config_path;
  std::string dump_config;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> size;
  std::optional<double> noise;
  std::optional<std::string> data, out, checkpoint, history, corpus;
  std::optional<double> lr, lambda_pose, lambda_emo;
  std::optional<std::size_t> batch_size, jobs;
  std::vector<std::size_t> phase_epochs;
  std::vector<std::uint64_t> seeds;
  bool no_three_phase = false, no_e_dese = false, no_e_egsid = false;
  bool oracle = false;
};

template <class T>
void overlay(const std::optional<T>& v, T& dst) {
  if (v) dst = *v;
}

RunConfig resolve(const std::string& command, const Flags& f) {
  RunConfig c;
  bool file_seed = false;
  if (!f.config_path.empty()) {
    const std::string text = data::read_file(f.config_path);
    c = parse_run_config(text);
    file_seed = nlohmann::json::parse(text).contains("seed");
  }
  c.command = command;
  if (f.seed) {
    c.seed = *f.seed;
  } else if (!file_seed) {
    try {
      c.seed = env_seed().value_or(0);
    } catch (const InputError& e) {
      throw UsageError(e.what());
    }
  }
  overlay(f.size, c.size);
  overlay(f.noise, c.generator.noise);
  overlay(f.data, c.paths.data);
  overlay(f.out, c.paths.out);
  overlay(f.checkpoint, c.paths.checkpoint);
  overlay(f.history, c.paths.history);
  overlay(f.corpus, c.paths.corpus);
  overlay(f.lr, c.train.learning_rate);
  overlay(f.lambda_pose, c.train.lambda_pose);
  overlay(f.lambda_emo, c.train.lambda_emo);
  overlay(f.batch_size, c.train.batch_size);
  overlay(f.jobs, c.jobs);
  if (!f.phase_epochs.empty()) {
    if (f.phase_epochs.size() != 3) throw UsageError("--phase-epochs expects three values");
    std::copy(f.phase_epochs.begin(), f.phase_epochs.end(), c.train.phase_epochs.begin());
  }
  if (!f.seeds.empty()) c.seeds = f.seeds;
  c.ablation.no_three_phase = c.ablation.no_three_phase || f.no_three_phase;
  c.ablation.no_e_dese = c.ablation.no_e_dese || f.no_e_dese;
  c.ablation.no_e_egsid = c.ablation.no_e_egsid || f.no_e_egsid;
  c.train.seed = c.seed;
  c.model.sync_dims();
  if (!f.dump_config.empty()) data::write_file_atomic(f.dump_config, dump_run_config(c));
  return c;
}

void require(const std::string& value, const char* flag) {
  if (value.empty()) throw UsageError(std::string(flag) + " is required");
}

std::string history_path_for(const std::string& checkpoint) {
  fs::path p(checkpoint);
  p.replace_extension();
  return p.string() + ".history.csv";
}

void ensure_parent(const fs::path& p) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
}

int cmd_gen_data(const RunConfig& c, std::ostream& out) {
  require(c.paths.out, "--out");
  if (c.size < 1) throw UsageError("--size must be >= 1");
  data::GeneratorConfig gen = c.generator;
  gen.semantic_ref_dim = c.model.dese.semantic_dim;
  gen.emotion_ref_dim = c.model.dese.emotion_dim;
  const data::Dataset ds = data::generate_dataset(c.size, gen, c.seed);
  ensure_parent(c.paths.out);
  data::save_dataset(ds, c.paths.out);
  char hash[20];
  std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(data::dataset_hash(ds)));
  out << "wrote " << ds.size() << " samples to " << c.paths.out << " (hash " << hash << ")\n";
  return kExitOk;
}

int cmd_train(const RunConfig& c, std::ostream& out) {
  require(c.paths.data, "--data");
  require(c.paths.out, "--out");
  const data::Dataset ds = data::load_dataset(c.paths.data);
  training::TrainHooks hooks;
  hooks.on_phase_end = [&](training::Phase phase, const EaslModel&) {
    out << "finished " << training::to_string(phase) << " phase\n";
  };
  TrainedRun run = train_run(ds, c.model, c.train, c.ablation, c.seed, hooks);
  const std::string history = c.paths.history.empty() ? history_path_for(c.paths.out) : c.paths.history;
  ensure_parent(c.paths.out);
  ensure_parent(history);
  save_checkpoint(run.checkpoint, c.paths.out);
  data::write_file_atomic(history, training::history_csv(run.outcome.history));
  const auto& last = run.outcome.history.back();
  out << "epoch " << last.epoch << ": loss_pose " << fmt4(last.loss_pose) << ", loss_emo " << fmt4(last.loss_emo)
      << "\ncheckpoint " << c.paths.out << "\nhistory " << history << "\n";
  return kExitOk;
}

int cmd_eval(const RunConfig& c, bool config_given, bool oracle, std::ostream& out) {
  require(c.paths.data, "--data");
  require(c.paths.out, "--out");
  const data::Dataset ds = data::load_dataset(c.paths.data);
  const data::Dataset corpus = c.paths.corpus.empty() ? ds : data::load_dataset(c.paths.corpus);
  EvalReport report;
  if (oracle) {
    report = oracle_report(ds, corpus);
  } else {
    require(c.paths.checkpoint, "--checkpoint");
    const Checkpoint ckpt = load_checkpoint(c.paths.checkpoint);
    ModelConfig expected = ckpt.model_config;
    if (config_given) {
      training::TrainConfig unused = c.train;
      expected = c.model;
      apply_ablation(c.ablation, expected, unused);
      expected = model_for_dataset(expected, ds);
    }
    const EaslModel model = restore_model(ckpt, expected);
    report = evaluate_report(model, ds, corpus);
  }
  ensure_parent(c.paths.out);
  data::write_file_atomic(c.paths.out, report_csv_header() + report_csv_row(report));
  out << report_table(report);
  return kExitOk;
}

int cmd_ablate(const RunConfig& c, std::ostream& out) {
  require(c.paths.data, "--data");
  require(c.paths.out, "--out");
  if (c.seeds.empty()) throw UsageError("--seeds must name at least one seed");
  const data::Dataset ds = data::load_dataset(c.paths.data);
  const data::Dataset corpus = c.paths.corpus.empty() ? ds : data::load_dataset(c.paths.corpus);
  const fs::path dir(c.paths.out);
  fs::create_directories(dir);

  struct Job {
    const AblationConfig* cfg;
    std::uint64_t seed;
  };
  std::vector<Job> jobs;
  for (const auto& cfg : ablation_grid())
    for (auto s : c.seeds) jobs.push_back({&cfg, s});
  std::vector<AblationResult> results(jobs.size());
  std::vector<std::exception_ptr> errors(jobs.size());
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      try {
        const Job& job = jobs[i];
        TrainedRun run = train_run(ds, c.model, c.train, job.cfg->flags, job.seed);
        const std::string stem = (dir / (job.cfg->name + "_seed" + std::to_string(job.seed))).string();
        save_checkpoint(run.checkpoint, stem + ".ckpt");
        data::write_file_atomic(stem + ".history.csv", training::history_csv(run.outcome.history));
        results[i] = {job.cfg->name, job.seed, evaluate_report(run.model, ds, corpus)};
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t n_threads = std::max<std::size_t>(1, std::min(c.jobs, jobs.size()));
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < n_threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);

  const std::string summary = ablation_summary_csv(results);
  data::write_file_atomic(dir / "summary.csv", summary);
  out << summary;
  return kExitOk;
}

int cmd_analyze(const RunConfig& c, std::ostream& out) {
  require(c.paths.history, "--history");
  require(c.paths.out, "--out");
  const auto history = training::parse_history_csv(data::read_file(c.paths.history));
  if (history.empty()) throw InputError("history " + c.paths.history + " has no epochs");
  const fs::path dir(c.paths.out);
  fs::create_directories(dir);
  data::write_file_atomic(dir / "similarity.svg", render_svg(similarity_plot(history)));
  data::write_file_atomic(dir / "loss.svg", render_svg(loss_plot(history)));
  out << "wrote " << (dir / "similarity.svg").string() << " and " << (dir / "loss.svg").string() << "\n";
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Emotion-aware sign pose generation at desk scale", "easl"};
  app.require_subcommand(1);
  Flags f;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", f.config_path, "JSON run config; flags override its values");
    sub->add_option("--dump-config", f.dump_config, "write the resolved run config here");
    sub->add_option("--seed", f.seed, "seed (default: config file, then EASL_SEED, then 0)");
  };
  auto training_flags = [&](CLI::App* sub) {
    sub->add_option("--phase-epochs", f.phase_epochs, "epochs for the three phases, e.g. 30,30,30")->delimiter(',');
    sub->add_option("--lr", f.lr, "SGD learning rate")->check(CLI::NonNegativeNumber);
    sub->add_option("--batch-size", f.batch_size, "samples per SGD step")->check(CLI::PositiveNumber);
    sub->add_option("--lambda-pose", f.lambda_pose, "pose loss weight")->check(CLI::NonNegativeNumber);
    sub->add_option("--lambda-emo", f.lambda_emo, "emotion loss weight")->check(CLI::NonNegativeNumber);
  };

  auto* gen = app.add_subcommand("gen-data", "generate a synthetic teacher dataset");
  common(gen);
  gen->add_option("--size", f.size, "number of samples")->check(CLI::PositiveNumber);
  gen->add_option("--noise", f.noise, "pose noise sigma")->check(CLI::NonNegativeNumber);
  gen->add_option("--out", f.out, "output JSON-lines path");

  auto* train = app.add_subcommand("train", "train a model and write a checkpoint and history CSV");
  common(train);
  training_flags(train);
  train->add_option("--data", f.data, "dataset path");
  train->add_option("--out", f.out, "checkpoint path");
  train->add_option("--history", f.history, "history CSV path (default: next to the checkpoint)");
  train->add_flag("--no-three-phase", f.no_three_phase, "train everything jointly for the summed epochs");
  train->add_flag("--no-e-dese", f.no_e_dese, "hold the encoder emotion stream at its initial value");
  train->add_flag("--no-e-egsid", f.no_e_egsid, "decode from the semantic stream only");

  auto* eval = app.add_subcommand("eval", "score a checkpoint on a dataset");
  common(eval);
  eval->add_option("--checkpoint", f.checkpoint, "checkpoint path");
  eval->add_option("--data", f.data, "dataset path");
  eval->add_option("--corpus", f.corpus, "back-translation corpus (default: the evaluated dataset)");
  eval->add_option("--out", f.out, "report CSV path");
  eval->add_flag("--oracle", f.oracle, "score the teacher targets instead of a model");
  eval->add_flag("--no-e-dese", f.no_e_dese, "expect a checkpoint trained without the encoder emotion stream");
  eval->add_flag("--no-e-egsid", f.no_e_egsid, "expect a checkpoint trained without decoder emotion guidance");

  auto* ablate = app.add_subcommand("ablate", "train and score the ablation grid over several seeds");
  common(ablate);
  training_flags(ablate);
  ablate->add_option("--data", f.data, "dataset path");
  ablate->add_option("--corpus", f.corpus, "back-translation corpus (default: the training dataset)");
  ablate->add_option("--out", f.out, "output directory");
  ablate->add_option("--seeds", f.seeds, "seeds, e.g. 0,1,2")->delimiter(',');
  ablate->add_option("--jobs", f.jobs, "concurrent runs")->check(CLI::PositiveNumber);

  auto* analyze = app.add_subcommand("analyze", "plot similarity and loss curves from a history CSV");
  common(analyze);
  analyze->add_option("--history", f.history, "history CSV path");
  analyze->add_option("--out", f.out, "output directory for SVG files");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    CLI::App* sub = app.get_subcommands().front();
    const RunConfig c = resolve(sub->get_name(), f);
    if (sub == gen) return cmd_gen_data(c, out);
    if (sub == train) return cmd_train(c, out);
    if (sub == eval) return cmd_eval(c, !f.config_path.empty(), f.oracle, out);
    if (sub == ablate) return cmd_ablate(c, out);
    return cmd_analyze(c, out);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
}

}  // namespace easl::cli
