#include "eqarm/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "eqarm/adapter.hpp"
#include "eqarm/augment.hpp"
#include "eqarm/bench.hpp"
#include "eqarm/cgrpo.hpp"
#include "eqarm/dataset.hpp"
#include "eqarm/engine_config.hpp"
#include "eqarm/errors.hpp"
#include "eqarm/image_io.hpp"
#include "eqarm/policy.hpp"
#include "eqarm/rft.hpp"
#include "eqarm/rng.hpp"
#include "eqarm/structured_io.hpp"

namespace eqarm {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr const char* kVersion = "0.1.0";

#ifndef EQARM_ASSET_DIR
#define EQARM_ASSET_DIR "assets"
#endif

std::string join_argv(int argc, const char* const* argv) {
  std::string joined;
  for (int i = 0; i < argc; ++i) {
    if (i > 0) joined += ' ';
    joined += argv[i];
  }
  return joined;
}

/// Manifest beside each run's outputs: command, seed, version and the
/// effective config. No timestamps, so re-runs are byte-identical.
void write_manifest(const fs::path& target, const std::string& command,
                    const EngineConfig& config) {
  fs::path manifest_path;
  if (fs::is_directory(target) || target.extension().empty()) {
    fs::create_directories(target);
    manifest_path = target / "manifest.json";
  } else {
    manifest_path = target;
    manifest_path += ".manifest.json";
  }
  json manifest;
  manifest["command"] = command;
  manifest["version"] = kVersion;
  if (config.seed) manifest["seed"] = *config.seed;
  else manifest["seed"] = nullptr;
  manifest["config"] = json::parse(engine_config_to_json(config));
  std::ofstream out(manifest_path);
  if (!out) throw ValidationError("cannot write manifest " + manifest_path.string());
  out << manifest.dump(2) << "\n";
}

void write_text_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write " + path.string());
  out << text;
}

std::set<AugKind> parse_ablate(const std::string& spec) {
  if (spec == "none" || spec.empty()) return {};
  std::set<AugKind> augs;
  std::stringstream stream(spec);
  std::string item;
  while (std::getline(stream, item, ',')) {
    if (item == "temporal") augs.insert(AugKind::Temporal);
    else if (item == "spatial") augs.insert(AugKind::Spatial);
    else if (item == "reasoning") augs.insert(AugKind::Reasoning);
    else
      throw ValidationError("--ablate: unknown augmentation '" + item +
                            "' (expected temporal,spatial,reasoning or none)");
  }
  return augs;
}

const EqaInstance& pick_instance(const std::vector<EqaInstance>& instances,
                                 const std::string& id, long index) {
  if (!id.empty()) {
    for (const auto& inst : instances)
      if (inst.id == id) return inst;
    throw ValidationError("no instance with id '" + id + "'");
  }
  if (index < 0 || static_cast<std::size_t>(index) >= instances.size())
    throw ValidationError("instance index out of range");
  return instances[static_cast<std::size_t>(index)];
}

int cmd_dataset_validate(const std::string& in) {
  const auto instances = load_dataset(in);
  std::size_t hm3d = 0, scannet = 0;
  for (const auto& inst : instances)
    (inst.environment == Environment::HM3D ? hm3d : scannet) += 1;
  std::cout << "valid: " << instances.size() << " instance(s), HM3D " << hm3d
            << ", ScanNet " << scannet << "\n";
  return 0;
}

int cmd_dataset_synth(EngineConfig config, const SynthConfig& synth,
                      const std::string& out, const std::string& command) {
  const auto instances = synth_dataset(synth, *config.seed);
  fs::create_directories(fs::path(out).parent_path().empty()
                             ? fs::path(".")
                             : fs::path(out).parent_path());
  save_dataset(out, instances);
  write_manifest(out, command, config);
  std::cout << "wrote " << instances.size() << " instance(s) to " << out << "\n";
  return 0;
}

int cmd_dataset_split(EngineConfig config, const std::string& in,
                      const std::string& mode, double fraction, long count,
                      const std::string& out_finetune, const std::string& out_bench,
                      const std::string& command) {
  const auto instances = load_dataset(in);
  SplitDescriptor descriptor;
  if (mode == "source-fraction") {
    descriptor = descriptor_by_source_fraction(instances, fraction,
                                               config.seed.value_or(0));
  } else if (mode == "scannet-count") {
    if (count < 0) throw ValidationError("--count is required for scannet-count");
    descriptor = descriptor_scannet_count(instances,
                                          static_cast<std::size_t>(count));
  } else {
    throw ValidationError("--mode must be source-fraction or scannet-count");
  }
  const DatasetSplit split = split_dataset(instances, descriptor);
  save_dataset(out_finetune, split.finetune);
  save_dataset(out_bench, split.bench);
  write_manifest(out_finetune, command, config);
  std::cout << "finetune: " << split.finetune.size() << " instance(s), bench: "
            << split.bench.size() << " instance(s)\n";
  return 0;
}

int cmd_augment_preview(EngineConfig config, const std::string& in,
                        const std::string& id, long index, std::size_t keyframes,
                        const std::string& out, const std::string& command) {
  const auto instances = load_dataset(in);
  const EqaInstance& inst = pick_instance(instances, id, index);
  const std::uint64_t seed = config.seed.value_or(0);
  ConditionSeeds seeds{mix_seed(seed, 1), mix_seed(seed, 2), mix_seed(seed, 3)};
  const auto conditions = build_condition_set(inst, config.mask, seeds, keyframes);

  fs::create_directories(out);
  const char* ext = conditions.original_episode.frames.front().channels == 1
                        ? ".pgm"
                        : ".ppm";
  const auto dump_frames = [&](const EpisodeMemory& episode, const char* prefix) {
    for (std::size_t i = 0; i < episode.frames.size(); ++i)
      save_frame_image(episode.frames[i],
                       fs::path(out) / (std::string(prefix) + "_" +
                                        std::to_string(i) + ext));
  };
  dump_frames(conditions.original_episode, "original");
  dump_frames(conditions.temporal, "temporal");
  dump_frames(conditions.spatial, "spatial");

  std::ostringstream traces;
  traces << "# original trace\n";
  for (const auto& step : conditions.original_trace.steps) traces << step << "\n";
  traces << "\n# jumbled trace\n";
  for (const auto& step : conditions.reasoning.steps) traces << step << "\n";
  write_text_file(fs::path(out) / "traces.txt", traces.str());
  write_manifest(out, command, config);
  std::cout << "wrote previews for instance '" << inst.id << "' to " << out << "\n";
  return 0;
}

int cmd_rft_filter(EngineConfig config, const std::string& candidates_path,
                   const std::string& instances_path, double tau,
                   const std::string& out, const std::string& summary_path,
                   const std::string& command) {
  const auto instances = load_dataset(instances_path);
  std::map<std::string, int> gt_by_id;
  for (const auto& inst : instances) gt_by_id[inst.id] = inst.gt_score;

  std::ifstream in(candidates_path);
  if (!in)
    throw ValidationError("cannot open candidate file " + candidates_path);
  std::vector<std::string> group_order;
  std::map<std::string, std::vector<CandidateEvaluation>> groups;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json rec;
    try {
      rec = json::parse(line);
      CandidateEvaluation cand;
      cand.instance_id = rec.at("instance_id").get<std::string>();
      cand.evaluation.critique = rec.value("critique", std::string());
      cand.evaluation.score = rec.at("score").get<int>();
      cand.parsed_ok = rec.value("format_ok", true);
      const auto gt = gt_by_id.find(cand.instance_id);
      if (gt == gt_by_id.end())
        throw ValidationError("candidate references unknown instance '" +
                              cand.instance_id + "'");
      cand.correct =
          cand.parsed_ok && classify_correct(gt->second, cand.evaluation.score, tau);
      if (!groups.count(cand.instance_id)) group_order.push_back(cand.instance_id);
      groups[cand.instance_id].push_back(std::move(cand));
    } catch (const json::exception& e) {
      throw ValidationError(candidates_path + ":" + std::to_string(line_no) + ": " +
                            e.what());
    }
  }

  std::size_t kept_count = 0, dropped_incorrect = 0, dropped_too_easy = 0;
  std::ofstream kept_out(out);
  if (!kept_out) throw ValidationError("cannot write " + out);
  for (const auto& id : group_order) {
    const auto& group = groups.at(id);
    const auto kept = rejective_filter(group);
    if (kept.empty() && !group.empty() &&
        static_cast<std::size_t>(std::count_if(group.begin(), group.end(),
                                               [](const auto& c) {
                                                 return c.correct;
                                               })) == group.size()) {
      dropped_too_easy += group.size();
    } else {
      dropped_incorrect += group.size() - kept.size();
    }
    kept_count += kept.size();
    for (const auto& cand : kept) {
      json rec;
      rec["instance_id"] = cand.instance_id;
      rec["critique"] = cand.evaluation.critique;
      rec["score"] = cand.evaluation.score;
      kept_out << rec.dump() << "\n";
    }
  }

  json summary;
  summary["instances"] = group_order.size();
  summary["candidates"] = [&] {
    std::size_t total = 0;
    for (const auto& [_, group] : groups) total += group.size();
    return total;
  }();
  summary["kept"] = kept_count;
  summary["dropped_incorrect"] = dropped_incorrect;
  summary["dropped_too_easy"] = dropped_too_easy;
  summary["tau"] = tau;
  write_text_file(summary_path, summary.dump(2) + "\n");
  write_manifest(out, command, config);
  std::cout << summary.dump(2) << "\n";
  return 0;
}

int cmd_train_cgrpo(EngineConfig config, const std::string& data_path,
                    const std::string& init_checkpoint, std::size_t prefit_steps,
                    double prefit_lr, const std::string& policy_kind,
                    const std::string& out_dir, const std::string& command) {
  if (policy_kind == "remote") {
    RemoteEvaluationPolicy remote(config.remote.value_or(RemoteConfig{}),
                                  PromptTemplate{}, nullptr);
    require_trainable(remote);  // always throws: remote has no gradients
  } else if (policy_kind != "toy") {
    throw ValidationError("--policy must be toy or remote");
  }

  const auto dataset = load_dataset(data_path);
  config.cgrpo.seed = *config.seed;
  config.cgrpo.validate();

  ToySoftmaxPolicy policy(config.cgrpo.feature_dim);
  if (!init_checkpoint.empty()) {
    policy = ToySoftmaxPolicy::load(init_checkpoint);
    if (policy.feature_dim() != config.cgrpo.feature_dim)
      throw ValidationError("checkpoint feature dim does not match config");
  }
  if (prefit_steps > 0) {
    std::vector<std::pair<ContextFeatures, int>> pairs;
    pairs.reserve(dataset.size());
    for (const auto& inst : dataset)
      pairs.emplace_back(featurize_original(inst, config.cgrpo.feature_dim),
                         inst.gt_score);
    MleFitConfig fit;
    fit.steps = prefit_steps;
    fit.lr = prefit_lr;
    fit.seed = mix_seed(*config.seed, 0xf17);
    policy = toy_mle_fit(policy, pairs, fit);
  }

  const auto [trained, reports] = train(policy, dataset, config.cgrpo);

  fs::create_directories(out_dir);
  write_text_file(fs::path(out_dir) / "steps.csv", step_reports_csv(reports));
  trained.save(fs::path(out_dir) / "policy.txt");
  write_manifest(out_dir, command, config);
  if (!reports.empty())
    std::cout << "steps: " << reports.size() << ", mean_acc first "
              << reports.front().mean_acc << " -> last " << reports.back().mean_acc
              << "\n";
  std::cout << "checkpoint: " << (fs::path(out_dir) / "policy.txt").string() << "\n";
  return 0;
}

int cmd_predict(EngineConfig config, const std::string& data_path,
                const std::string& checkpoint, const std::string& policy_kind,
                const std::string& template_path, std::size_t k,
                const std::string& out, const std::string& command) {
  const auto instances = load_dataset(data_path);
  std::vector<Prediction> predictions;
  if (policy_kind == "toy") {
    auto policy = ToySoftmaxPolicy::load(checkpoint);
    ToyEvaluationPolicy toy(std::move(policy), config.cgrpo.feature_dim);
    predictions = predict(toy, instances, k, config.seed.value_or(0));
  } else if (policy_kind == "remote") {
    if (!config.remote)
      throw ConfigError("predict --policy remote requires a remote config block");
    const auto tmpl = PromptTemplate::load(
        template_path.empty()
            ? fs::path(EQARM_ASSET_DIR) / "prompts" / "rft_evaluator.txt"
            : fs::path(template_path));
    RemoteEvaluationPolicy remote(*config.remote, tmpl,
                                  std::shared_ptr<Transport>(make_http_transport()));
    predictions = predict(remote, instances, k, config.seed.value_or(0));
  } else {
    throw ValidationError("--policy must be toy or remote");
  }
  save_predictions(out, predictions, config.bench.aggregation);
  write_manifest(out, command, config);
  std::cout << "wrote " << predictions.size() << " prediction(s) to " << out << "\n";
  return 0;
}

int cmd_tts(EngineConfig config, const std::string& in, const std::string& method,
            const std::string& out, const std::string& command) {
  auto predictions = load_predictions(in);
  const Aggregation aggregation = aggregation_from_string(method);
  for (auto& pred : predictions)
    pred.aggregated = tts_aggregate(pred.raw_scores, aggregation);
  save_predictions(out, predictions, aggregation);
  write_manifest(out, command, config);
  std::cout << "aggregated " << predictions.size() << " prediction(s) via "
            << method << "\n";
  return 0;
}

int cmd_eval_bench(EngineConfig config, const std::string& data_path,
                   const std::string& preds_path, const std::string& out_dir,
                   const std::string& command) {
  const auto instances = load_dataset(data_path);
  const auto predictions = load_predictions(preds_path);
  BenchConfig bench = config.bench;
  if (!predictions.empty() && bench.k == 1)
    bench.k = predictions.front().raw_scores.size();
  const BenchReport report = evaluate(predictions, instances, bench);

  fs::create_directories(out_dir);
  const std::string text = render_report_text(report);
  write_text_file(fs::path(out_dir) / "report.txt", text);
  write_text_file(fs::path(out_dir) / "report.csv", render_report_csv(report));
  write_manifest(out_dir, command, config);
  std::cout << text;
  return 0;
}

int cmd_report(const std::string& in) {
  std::ifstream csv(in);
  if (!csv) throw ValidationError("cannot open report csv " + in);
  std::string line;
  bool header = true;
  char formatted[160];
  while (std::getline(csv, line)) {
    std::stringstream stream(line);
    std::string scope, count, acc, rmse_text;
    std::getline(stream, scope, ',');
    std::getline(stream, count, ',');
    std::getline(stream, acc, ',');
    std::getline(stream, rmse_text, ',');
    if (header) {
      std::snprintf(formatted, sizeof(formatted), "%-34s %7s %9s %9s\n",
                    scope.c_str(), count.c_str(), acc.c_str(), rmse_text.c_str());
      header = false;
    } else {
      std::snprintf(formatted, sizeof(formatted), "%-34s %7s %9s %9s\n",
                    scope.c_str(), count.c_str(), acc.c_str(), rmse_text.c_str());
    }
    std::cout << formatted;
  }
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  const std::string command_line = join_argv(argc, argv);

  // --config is honored wherever it appears; flags parsed later override it.
  EngineConfig config;
  for (int i = 0; i + 1 < argc; ++i) {
    if (std::string_view(argv[i]) == "--config") {
      try {
        config = load_engine_config(argv[i + 1]);
      } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
      }
    }
  }

  CLI::App app{"EQA reward-model engine: datasets, contrastive training, "
               "benchmarking and test-time scaling"};
  app.name("eqarm");
  app.fallthrough();
  std::string config_path;
  app.add_option("--config", config_path, "engine config JSON file");

  int exit_code = 0;
  const auto run = [&](auto&& fn) {
    try {
      exit_code = fn();
    } catch (const TransportError& e) {
      std::cerr << "transport error: " << e.what() << "\n";
      exit_code = 2;
    } catch (const ValidationError& e) {
      std::cerr << "error: " << e.what() << "\n";
      exit_code = 1;
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << "\n";
      exit_code = 1;
    }
  };

  // dataset ------------------------------------------------------------
  auto* dataset_cmd = app.add_subcommand("dataset", "dataset operations");
  dataset_cmd->require_subcommand(1);

  auto* validate_cmd = dataset_cmd->add_subcommand("validate", "validate a dataset file");
  {
    auto in = std::make_shared<std::string>();
    validate_cmd->add_option("--in", *in, "dataset file")->required();
    validate_cmd->callback([&, in] { run([&] { return cmd_dataset_validate(*in); }); });
  }

  auto* synth_cmd = dataset_cmd->add_subcommand("synth", "generate synthetic data");
  {
    struct Args {
      SynthConfig synth;
      std::string out;
      std::uint64_t seed = 0;
    };
    auto args = std::make_shared<Args>();
    synth_cmd->add_option("--out", args->out, "output dataset file")->required();
    synth_cmd->add_option("--count", args->synth.count, "instance count")->required();
    synth_cmd->add_option("--seed", args->seed, "generator seed")->required();
    synth_cmd->add_option("--height", args->synth.frame_height, "frame height");
    synth_cmd->add_option("--width", args->synth.frame_width, "frame width");
    synth_cmd->add_option("--channels", args->synth.frame_channels, "1 or 3");
    synth_cmd->add_option("--frames-min", args->synth.frames_min, "min frames");
    synth_cmd->add_option("--frames-max", args->synth.frames_max, "max frames");
    synth_cmd->add_option("--trace-min", args->synth.trace_len_min, "min trace steps");
    synth_cmd->add_option("--trace-max", args->synth.trace_len_max, "max trace steps");
    synth_cmd->add_option("--scannet-frac", args->synth.scannet_fraction,
                          "fraction routed to ScanNet");
    synth_cmd->add_option("--feature-dim", args->synth.feature_dim, "labeler feature dim");
    synth_cmd->add_option("--labeler-gain", args->synth.labeler_gain, "labeler gain");
    synth_cmd->add_option("--labeler-bias", args->synth.labeler_bias, "labeler bias");
    synth_cmd->add_option("--labeler-noise", args->synth.labeler_noise_std,
                          "labeler noise std");
    synth_cmd->callback([&, args] {
      run([&] {
        EngineConfig local = config;
        local.seed = args->seed;
        return cmd_dataset_synth(local, args->synth, args->out, command_line);
      });
    });
  }

  auto* split_cmd = dataset_cmd->add_subcommand("split", "partition a dataset");
  {
    struct Args {
      std::string in, mode = "source-fraction", out_finetune, out_bench;
      double fraction = 0.5;
      long count = -1;
      std::uint64_t seed = 0;
      bool seed_given = false;
    };
    auto args = std::make_shared<Args>();
    split_cmd->add_option("--in", args->in, "dataset file")->required();
    split_cmd->add_option("--mode", args->mode, "source-fraction | scannet-count");
    split_cmd->add_option("--fraction", args->fraction, "finetune fraction of sources");
    split_cmd->add_option("--count", args->count, "finetune ScanNet count");
    auto* seed_opt = split_cmd->add_option("--seed", args->seed, "shuffle seed");
    split_cmd->add_option("--out-finetune", args->out_finetune, "finetune output")
        ->required();
    split_cmd->add_option("--out-bench", args->out_bench, "bench output")->required();
    split_cmd->callback([&, args, seed_opt] {
      run([&] {
        EngineConfig local = config;
        if (seed_opt->count() > 0) local.seed = args->seed;
        return cmd_dataset_split(local, args->in, args->mode, args->fraction,
                                 args->count, args->out_finetune, args->out_bench,
                                 command_line);
      });
    });
  }

  // augment ------------------------------------------------------------
  auto* augment_cmd = app.add_subcommand("augment", "context perturbations");
  augment_cmd->require_subcommand(1);
  auto* preview_cmd =
      augment_cmd->add_subcommand("preview", "write before/after frames");
  {
    struct Args {
      std::string in, id, out = "preview";
      long index = 0;
      std::uint64_t seed = 0;
      std::size_t keyframes = 0;
    };
    auto args = std::make_shared<Args>();
    preview_cmd->add_option("--in", args->in, "dataset file")->required();
    preview_cmd->add_option("--id", args->id, "instance id");
    preview_cmd->add_option("--index", args->index, "instance index (default 0)");
    preview_cmd->add_option("--seed", args->seed, "perturbation seed")->required();
    preview_cmd->add_option("--keyframes", args->keyframes, "keyframe count (0 = all)");
    preview_cmd->add_option("--out", args->out, "output directory");
    preview_cmd->add_option("--mask-patch-height", config.mask.patch_height, "");
    preview_cmd->add_option("--mask-patch-width", config.mask.patch_width, "");
    preview_cmd->add_option("--mask-ratio", config.mask.ratio, "");
    preview_cmd->add_option("--mask-fill", config.mask.fill_value, "");
    preview_cmd->callback([&, args] {
      run([&] {
        EngineConfig local = config;
        local.seed = args->seed;
        return cmd_augment_preview(local, args->in, args->id, args->index,
                                   args->keyframes, args->out, command_line);
      });
    });
  }

  // rft ----------------------------------------------------------------
  auto* rft_cmd = app.add_subcommand("rft", "rejective fine-tuning data ops");
  rft_cmd->require_subcommand(1);
  auto* filter_cmd = rft_cmd->add_subcommand("filter", "apply the rejective filter");
  {
    struct Args {
      std::string candidates, instances, out, summary = "rft_summary.json";
      double tau = 2.0;
    };
    auto args = std::make_shared<Args>();
    filter_cmd->add_option("--candidates", args->candidates, "candidate JSONL")
        ->required();
    filter_cmd->add_option("--instances", args->instances, "dataset file")->required();
    filter_cmd->add_option("--tau", args->tau, "score tolerance (strict |gap| < tau)");
    filter_cmd->add_option("--out", args->out, "kept-candidate output")->required();
    filter_cmd->add_option("--summary", args->summary, "summary JSON output");
    filter_cmd->callback([&, args] {
      run([&] {
        return cmd_rft_filter(config, args->candidates, args->instances, args->tau,
                              args->out, args->summary, command_line);
      });
    });
  }

  // train ----------------------------------------------------------------
  auto* train_cmd = app.add_subcommand("train", "policy optimization");
  train_cmd->require_subcommand(1);
  auto* cgrpo_cmd = train_cmd->add_subcommand("cgrpo", "contrastive GRPO loop");
  {
    struct Args {
      std::string data, init, ablate = "temporal,spatial,reasoning";
      std::string policy = "toy", out = "train_out";
      std::uint64_t seed = 0;
      std::size_t prefit_steps = 0;
      double prefit_lr = 0.5;
    };
    auto args = std::make_shared<Args>();
    cgrpo_cmd->add_option("--data", args->data, "training dataset")->required();
    cgrpo_cmd->add_option("--seed", args->seed, "run seed")->required();
    cgrpo_cmd->add_option("--steps", config.cgrpo.steps, "optimizer steps");
    cgrpo_cmd->add_option("--g", config.cgrpo.g, "evaluations per condition");
    cgrpo_cmd->add_option("--beta-kl", config.cgrpo.beta_kl, "KL coefficient");
    cgrpo_cmd->add_option("--clip-eps", config.cgrpo.clip_eps, "clip half-width");
    cgrpo_cmd->add_option("--lr", config.cgrpo.lr, "learning rate");
    cgrpo_cmd->add_option("--batch-size", config.cgrpo.batch_size, "instances per step");
    cgrpo_cmd->add_option("--keyframes", config.cgrpo.keyframes, "keyframes (0 = all)");
    cgrpo_cmd->add_option("--feature-dim", config.cgrpo.feature_dim, "feature dim");
    cgrpo_cmd->add_option("--delta", config.reward.delta, "boost comparison factor");
    cgrpo_cmd->add_option("--mu", config.reward.mu, "boost value");
    cgrpo_cmd->add_option("--h-min-acc", config.reward.h_min_acc,
                          "per-evaluation boost floor");
    cgrpo_cmd->add_option("--mask-patch-height", config.mask.patch_height, "");
    cgrpo_cmd->add_option("--mask-patch-width", config.mask.patch_width, "");
    cgrpo_cmd->add_option("--mask-ratio", config.mask.ratio, "");
    cgrpo_cmd->add_option("--mask-fill", config.mask.fill_value, "");
    cgrpo_cmd->add_option("--ablate", args->ablate,
                          "active augmentations (csv of temporal,spatial,reasoning "
                          "or none)");
    cgrpo_cmd->add_option("--init", args->init, "initial policy checkpoint");
    cgrpo_cmd->add_option("--prefit-steps", args->prefit_steps,
                          "MLE pre-fit steps before the RL stage");
    cgrpo_cmd->add_option("--prefit-lr", args->prefit_lr, "MLE pre-fit learning rate");
    cgrpo_cmd->add_option("--policy", args->policy, "toy | remote");
    cgrpo_cmd->add_option("--out", args->out, "output directory");
    cgrpo_cmd->callback([&, args] {
      run([&] {
        EngineConfig local = config;
        local.seed = args->seed;
        local.sync_nested();
        local.cgrpo.active_augs = parse_ablate(args->ablate);
        return cmd_train_cgrpo(local, args->data, args->init, args->prefit_steps,
                               args->prefit_lr, args->policy, args->out,
                               command_line);
      });
    });
  }

  // predict / tts / eval -------------------------------------------------
  auto* predict_cmd = app.add_subcommand("predict", "sample raw K-score predictions");
  {
    struct Args {
      std::string data, checkpoint, policy = "toy", tmpl, out;
      std::size_t k = 1;
      std::uint64_t seed = 0;
    };
    auto args = std::make_shared<Args>();
    predict_cmd->add_option("--data", args->data, "dataset file")->required();
    predict_cmd->add_option("--checkpoint", args->checkpoint, "toy policy checkpoint");
    predict_cmd->add_option("--policy", args->policy, "toy | remote");
    predict_cmd->add_option("--template", args->tmpl, "prompt template (remote)");
    predict_cmd->add_option("--k", args->k, "samples per instance");
    predict_cmd->add_option("--seed", args->seed, "sampling seed")->required();
    predict_cmd->add_option("--feature-dim", config.cgrpo.feature_dim, "feature dim");
    predict_cmd->add_option("--out", args->out, "raw prediction output")->required();
    predict_cmd->callback([&, args] {
      run([&] {
        EngineConfig local = config;
        local.seed = args->seed;
        return cmd_predict(local, args->data, args->checkpoint, args->policy,
                           args->tmpl, args->k, args->out, command_line);
      });
    });
  }

  auto* tts_cmd = app.add_subcommand("tts", "aggregate raw predictions");
  {
    struct Args {
      std::string in, method = "average", out;
    };
    auto args = std::make_shared<Args>();
    tts_cmd->add_option("--in", args->in, "raw prediction file")->required();
    tts_cmd->add_option("--method", args->method, "majority_vote | average");
    tts_cmd->add_option("--out", args->out, "aggregated output")->required();
    tts_cmd->callback([&, args] {
      run([&] { return cmd_tts(config, args->in, args->method, args->out,
                               command_line); });
    });
  }

  auto* eval_cmd = app.add_subcommand("eval", "benchmark evaluation");
  eval_cmd->require_subcommand(1);
  auto* bench_cmd = eval_cmd->add_subcommand("bench", "score predictions");
  {
    struct Args {
      std::string data, preds, out = "bench_out", method;
      double tau = -1.0;
    };
    auto args = std::make_shared<Args>();
    bench_cmd->add_option("--data", args->data, "instance file")->required();
    bench_cmd->add_option("--preds", args->preds, "prediction file")->required();
    bench_cmd->add_option("--tau", args->tau, "accuracy tolerance");
    bench_cmd->add_option("--method", args->method, "majority_vote | average");
    bench_cmd->add_option("--out", args->out, "output directory");
    bench_cmd->callback([&, args] {
      run([&] {
        EngineConfig local = config;
        if (args->tau >= 0.0) local.bench.tau = args->tau;
        if (!args->method.empty())
          local.bench.aggregation = aggregation_from_string(args->method);
        return cmd_eval_bench(local, args->data, args->preds, args->out,
                              command_line);
      });
    });
  }

  auto* report_cmd = app.add_subcommand("report", "pretty-print a report CSV");
  {
    auto in = std::make_shared<std::string>();
    report_cmd->add_option("--in", *in, "report.csv path")->required();
    report_cmd->callback([&, in] { run([&] { return cmd_report(*in); }); });
  }

  app.require_subcommand(1);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    std::cout << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 64;
  }
  return exit_code;
}

}  // namespace eqarm
