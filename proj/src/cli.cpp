// Copyright 2026 The layercut Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "layercut/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "layercut/contribution.hpp"
#include "layercut/finetune.hpp"
#include "layercut/surgery.hpp"

namespace layercut {

namespace {

using nlohmann::json;

constexpr const char* kSchemaVersion = "1";

// argument-level problem: exit code 1
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void emit_report(const std::string& command, const json& payload) {
  json report;
  report["schema_version"] = kSchemaVersion;
  report["command"] = command;
  report["payload"] = payload;
  std::cout << report.dump(2) << "\n";
}

json plan_to_json(const DropPlan& p) {
  json j;
  j["strategy"] = strategy_name(p.strategy);
  j["L"] = p.num_layers;
  j["dropped"] = std::vector<std::size_t>(p.dropped.begin(), p.dropped.end());
  j["kept"] = p.kept;
  return j;
}

DropPlan plan_from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cli", "cannot open plan file \"" + path + "\"");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw Error("cli", "plan file \"" + path + "\" is not valid JSON: " + std::string(e.what()));
  }
  if (!j.contains("L") || !j.contains("dropped")) {
    throw Error("cli", "plan file \"" + path + "\" must contain \"L\" and \"dropped\"");
  }
  const Strategy strategy =
      j.contains("strategy") ? strategy_from_name(j["strategy"].get<std::string>())
                             : Strategy::kTop;
  std::set<std::size_t> dropped;
  for (const auto& d : j["dropped"]) dropped.insert(d.get<std::size_t>());
  const DropPlan plan = DropPlan::make(strategy, j["L"].get<std::size_t>(), std::move(dropped));
  if (j.contains("kept") && j["kept"].get<std::vector<std::size_t>>() != plan.kept) {
    throw Error("cli", "plan file \"" + path + "\": \"kept\" disagrees with \"dropped\"");
  }
  return plan;
}

json profile_to_json(const SimilarityProfile& p) {
  json j;
  j["L"] = p.num_layers;
  j["mean_similarity"] = p.mean_similarity;
  j["n_examples"] = p.n_examples;
  return j;
}

SimilarityProfile profile_from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cli", "cannot open profile file \"" + path + "\"");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw Error("cli",
                "profile file \"" + path + "\" is not valid JSON: " + std::string(e.what()));
  }
  SimilarityProfile p;
  if (!j.contains("mean_similarity")) {
    throw Error("cli", "profile file \"" + path + "\" lacks \"mean_similarity\"");
  }
  p.mean_similarity = j["mean_similarity"].get<std::vector<double>>();
  p.num_layers = j.value("L", p.mean_similarity.size());
  p.n_examples = j.value("n_examples", std::size_t{1});
  p.validate();
  return p;
}

json param_report_to_json(const ParamReport& r) {
  json j;
  j["total"] = r.total;
  j["embedding"] = r.embedding;
  j["per_layer"] = r.per_layer;
  j["other"] = r.other;
  j["total_without_other"] = r.total_without_other();
  return j;
}

json reduction_to_json(const ReductionReport& r) {
  json j;
  j["params_before"] = r.params_before;
  j["params_after"] = r.params_after;
  j["reduction_fraction"] = r.reduction_fraction;
  j["layers_before"] = r.layers_before;
  j["layers_after"] = r.layers_after;
  j["est_finetune_speedup"] = r.est_finetune_speedup;
  return j;
}

json metrics_to_json(const TrainMetrics& m) {
  json j;
  j["steps"] = m.total_steps();
  j["final_train_accuracy"] = m.final_train_accuracy;
  j["final_dev_accuracy"] = m.final_dev_accuracy;
  json epochs = json::array();
  for (const EpochRecord& e : m.epochs) {
    json je;
    je["epoch"] = e.epoch;
    je["dev_accuracy"] = e.dev_accuracy;
    je["layers"] = e.layers;
    epochs.push_back(je);
  }
  j["epochs"] = epochs;
  return j;
}

NamingScheme scheme_from_flag(const std::string& path) {
  return path.empty() ? NamingScheme::bert_default() : NamingScheme::load_file(path);
}

DType checkpoint_dtype(const Checkpoint& c) {
  if (c.tensor_count() == 0) throw Error("cli", "checkpoint holds no tensors");
  const DType dtype = c.tensors().begin()->second.dtype;
  for (const auto& [name, entry] : c.tensors()) {
    if (entry.dtype != dtype) {
      throw Error("cli", "checkpoint mixes dtypes; tensor \"" + name + "\" differs");
    }
  }
  return dtype;
}

// ---- subcommand state --------------------------------------------------

struct InspectArgs {
  std::string ckpt;
  std::string scheme;
};

struct PlanArgs {
  std::size_t layers = 0;
  std::string strategy;
  std::size_t k = 0;
  bool k_set = false;
  double threshold = 0.0;
  bool threshold_set = false;
  std::string profile;
  std::string ckpt, config, data;
  std::string out;
};

struct ApplyArgs {
  std::string ckpt;
  std::string plan;
  std::string out;
  std::string scheme;
};

struct ScoreArgs {
  std::string ckpt;
  std::string config;
  std::string data;
  std::vector<double> thresholds{0.95, 0.925, 0.9};
  std::size_t batch_size = 32;
  std::string profile_out;
  std::string scheme;
};

struct FinetuneArgs {
  std::string ckpt;
  std::string config;
  std::string task;
  std::string plan;
  bool gradual = false;
  bool drop_after = false;
  TrainConfig train;
  std::string optimizer = "sgd";
  std::string metrics_out;
  std::string out;
  std::string scheme;
};

struct ReportArgs {
  std::string scores;
  double threshold_points = 0.0;
};

struct MakeToyArgs {
  std::string out;
  EncoderConfig config;
  std::uint64_t seed = 1;
  std::string dtype = "f32";
  std::string config_out;
};

void run_inspect(const InspectArgs& args) {
  const Checkpoint c = load_checkpoint_file(args.ckpt);
  const NamingScheme scheme = scheme_from_flag(args.scheme);
  const ModelTopology topo = infer_topology(c, scheme);
  const ParamReport params = count_parameters(c, topo);

  json payload;
  payload["num_layers"] = topo.num_layers;
  payload["tensors"] = c.tensor_count();
  payload["embedding_tensors"] = topo.embedding_tensors.size();
  std::size_t layer_tensor_count = 0;
  for (const auto& l : topo.layer_tensors) layer_tensor_count += l.size();
  payload["layer_tensors"] = layer_tensor_count;
  payload["other_tensors"] = topo.other_tensors.size();
  payload["params"] = param_report_to_json(params);
  if (c.metadata()) payload["metadata"] = *c.metadata();
  emit_report("inspect", payload);
}

void run_plan(const PlanArgs& args) {
  if (args.strategy.empty()) throw UsageError("plan requires --strategy");
  Strategy strategy;
  try {
    strategy = strategy_from_name(args.strategy);
  } catch (const Error& e) {
    throw UsageError(e.what());
  }

  DropPlan plan;
  if (strategy == Strategy::kContribution) {
    if (args.k_set || args.layers != 0) {
      throw UsageError("contribution planning takes --threshold and a profile, not --layers/--k");
    }
    if (!args.threshold_set) throw UsageError("contribution planning requires --threshold");
    SimilarityProfile profile;
    if (!args.profile.empty()) {
      profile = profile_from_file(args.profile);
    } else if (!args.ckpt.empty() && !args.config.empty() && !args.data.empty()) {
      const Checkpoint c = load_checkpoint_file(args.ckpt);
      const EncoderConfig cfg = EncoderConfig::load_file(args.config);
      const auto records = load_token_records(args.data);
      const auto batches = batches_from_records(records, 32);
      if (checkpoint_dtype(c) == DType::F32) {
        const auto model = load_weights<float>(c, cfg, NamingScheme::bert_default());
        profile = similarity_profile(model, std::span<const TokenBatch>(batches));
      } else {
        const auto model = load_weights<double>(c, cfg, NamingScheme::bert_default());
        profile = similarity_profile(model, std::span<const TokenBatch>(batches));
      }
    } else {
      throw UsageError(
          "contribution planning needs --profile FILE or --ckpt/--config/--data to compute one");
    }
    plan = select_by_threshold(profile, args.threshold);
  } else {
    if (!args.profile.empty() || args.threshold_set) {
      throw UsageError("--profile/--threshold only apply to --strategy contribution");
    }
    if (args.layers == 0) throw UsageError("plan requires --layers");
    if (!args.k_set) throw UsageError("plan requires --k");
    try {
      plan = make_plan(strategy, args.layers, args.k);
    } catch (const Error& e) {
      // (L, K) came straight from flags, so precondition failures are usage
      // errors
      throw UsageError(e.what());
    }
  }

  const json payload = plan_to_json(plan);
  if (!args.out.empty()) {
    std::ofstream out(args.out, std::ios::trunc);
    if (!out) throw Error("cli", "cannot open \"" + args.out + "\" for writing");
    out << payload.dump(2) << "\n";
  }
  emit_report("plan", payload);
}

void run_apply(const ApplyArgs& args) {
  namespace fs = std::filesystem;
  if (fs::weakly_canonical(fs::path(args.ckpt)) == fs::weakly_canonical(fs::path(args.out))) {
    throw UsageError("apply refuses to overwrite its input; --out must differ from the input");
  }
  const Checkpoint c = load_checkpoint_file(args.ckpt);
  const NamingScheme scheme = scheme_from_flag(args.scheme);
  const ModelTopology topo = infer_topology(c, scheme);
  const DropPlan plan = plan_from_file(args.plan);

  const Checkpoint pruned = apply_plan(c, topo, plan);
  save_checkpoint_file(pruned, args.out);

  const ParamReport before = count_parameters(c, topo);
  const ModelTopology topo_after = infer_topology(pruned, scheme);
  const ParamReport after = count_parameters(pruned, topo_after);
  const ReductionReport reduction = reduction_report(before, after, plan);

  json payload = reduction_to_json(reduction);
  payload["plan"] = plan_to_json(plan);
  payload["out"] = args.out;
  emit_report("apply", payload);
}

template <class T>
SimilarityProfile score_checkpoint(const Checkpoint& c, const EncoderConfig& cfg,
                                   const NamingScheme& scheme,
                                   const std::vector<TokenBatch>& batches) {
  const EncoderModel<T> model = load_weights<T>(c, cfg, scheme);
  return similarity_profile(model, std::span<const TokenBatch>(batches));
}

void run_score(const ScoreArgs& args) {
  const Checkpoint c = load_checkpoint_file(args.ckpt);
  const EncoderConfig cfg = EncoderConfig::load_file(args.config);
  const NamingScheme scheme = scheme_from_flag(args.scheme);
  const auto records = load_token_records(args.data);
  const auto batches = batches_from_records(records, args.batch_size);

  const SimilarityProfile profile =
      checkpoint_dtype(c) == DType::F32
          ? score_checkpoint<float>(c, cfg, scheme, batches)
          : score_checkpoint<double>(c, cfg, scheme, batches);

  json payload = profile_to_json(profile);
  payload["thresholds"] = args.thresholds;
  json table = json::array();
  for (std::size_t layer = 1; layer <= profile.num_layers; ++layer) {
    json row;
    row["layer"] = layer;
    row["mean_similarity"] = profile.mean_similarity[layer - 1];
    json dropped = json::array();
    for (const double tau : args.thresholds) {
      dropped.push_back(profile.mean_similarity[layer - 1] > tau);
    }
    row["dropped_at"] = dropped;
    table.push_back(row);
  }
  payload["table"] = table;

  if (!args.profile_out.empty()) {
    std::ofstream out(args.profile_out, std::ios::trunc);
    if (!out) throw Error("cli", "cannot open \"" + args.profile_out + "\" for writing");
    out << profile_to_json(profile).dump(2) << "\n";
  }
  emit_report("score", payload);
}

template <class T>
json run_finetune_typed(const FinetuneArgs& args, const Checkpoint& c,
                        const EncoderConfig& cfg, const NamingScheme& scheme,
                        const SyntheticTask& task) {
  const EncoderModel<T> model = load_weights<T>(c, cfg, scheme);

  std::optional<DropPlan> plan;
  if (!args.plan.empty()) plan = plan_from_file(args.plan);
  if ((args.gradual || args.drop_after) && !plan) {
    throw UsageError("--gradual and --drop-after-finetune require --plan");
  }
  if (args.gradual && args.drop_after) {
    throw UsageError("--gradual and --drop-after-finetune are mutually exclusive");
  }

  json payload;
  TrainMetrics metrics_for_file;
  const EncoderModel<T>* to_save = nullptr;
  EncoderModel<T> trained_holding;

  if (args.gradual) {
    const TrainedModel<T> trained = gradual_drop_finetune(model, task, *plan, args.train);
    payload["mode"] = "gradual";
    payload["metrics"] = metrics_to_json(trained.metrics);
    payload["layers_after"] = trained.model.num_layers();
    metrics_for_file = trained.metrics;
    trained_holding = trained.model;
    to_save = &trained_holding;
  } else if (args.drop_after) {
    const TwoStageResult<T> result = drop_after_finetune(model, task, *plan, args.train, scheme);
    payload["mode"] = "drop-after-finetune";
    payload["stage1"] = metrics_to_json(result.stage1.metrics);
    payload["stage2"] = metrics_to_json(result.stage2.metrics);
    payload["layers_after"] = result.stage2.model.num_layers();
    metrics_for_file = result.stage1.metrics;
    for (const auto& s : result.stage2.metrics.steps) metrics_for_file.steps.push_back(s);
    for (const auto& e : result.stage2.metrics.epochs) metrics_for_file.epochs.push_back(e);
    metrics_for_file.final_train_accuracy = result.stage2.metrics.final_train_accuracy;
    metrics_for_file.final_dev_accuracy = result.stage2.metrics.final_dev_accuracy;
    trained_holding = result.stage2.model;
    to_save = &trained_holding;
  } else {
    EncoderModel<T> base = model;
    if (plan) {
      const ModelTopology topo = infer_topology(c, scheme);
      const Checkpoint pruned_ckpt = apply_plan(c, topo, *plan);
      EncoderConfig reduced_cfg = cfg;
      reduced_cfg.num_layers = plan->kept.size();
      base = load_weights<T>(pruned_ckpt, reduced_cfg, scheme);
    }
    const TrainedModel<T> trained = finetune(base, task, args.train);
    payload["mode"] = plan ? "drop-then-finetune" : "finetune";
    payload["metrics"] = metrics_to_json(trained.metrics);
    payload["layers_after"] = trained.model.num_layers();
    metrics_for_file = trained.metrics;
    trained_holding = trained.model;
    to_save = &trained_holding;
  }
  if (plan) payload["plan"] = plan_to_json(*plan);

  if (!args.metrics_out.empty()) {
    std::ofstream out(args.metrics_out, std::ios::trunc);
    if (!out) throw Error("cli", "cannot open \"" + args.metrics_out + "\" for writing");
    write_metrics_jsonl(metrics_for_file, out);
  }
  if (!args.out.empty() && to_save) {
    save_checkpoint_file(model_to_checkpoint(*to_save, scheme), args.out);
    payload["out"] = args.out;
  }
  return payload;
}

void run_finetune(const FinetuneArgs& args_in) {
  FinetuneArgs args = args_in;
  args.train.optimizer = optimizer_from_name(args.optimizer);
  args.train.validate();
  const Checkpoint c = load_checkpoint_file(args.ckpt);
  const EncoderConfig cfg = EncoderConfig::load_file(args.config);
  const NamingScheme scheme = scheme_from_flag(args.scheme);
  const SyntheticTask task = SyntheticTask::load_file(args.task);

  const json payload = checkpoint_dtype(c) == DType::F32
                           ? run_finetune_typed<float>(args, c, cfg, scheme, task)
                           : run_finetune_typed<double>(args, c, cfg, scheme, task);
  emit_report("finetune", payload);
}

void run_report(const ReportArgs& args) {
  std::ifstream in(args.scores);
  if (!in) throw Error("cli", "cannot open scores file \"" + args.scores + "\"");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw Error("cli", "scores file \"" + args.scores +
                           "\" is not valid JSON: " + std::string(e.what()));
  }
  std::optional<double> full_score;
  json scores_obj;
  if (j.contains("scores")) {
    scores_obj = j["scores"];
    if (j.contains("full_score")) full_score = j["full_score"].get<double>();
  } else {
    scores_obj = j;
  }
  if (!scores_obj.is_object() || scores_obj.empty()) {
    throw Error("cli", "scores file must map K -> score");
  }
  std::map<std::size_t, double> scores;
  for (const auto& [key, value] : scores_obj.items()) {
    try {
      scores[static_cast<std::size_t>(std::stoull(key))] = value.get<double>();
    } catch (const std::exception&) {
      throw Error("cli", "score key \"" + key + "\" is not a drop count");
    }
  }
  const std::size_t k = max_droppable_within(scores, full_score, args.threshold_points);

  json payload;
  payload["max_droppable"] = k;
  payload["threshold_points"] = args.threshold_points;
  payload["full_score"] = full_score ? *full_score : scores.at(0);
  emit_report("report", payload);
}

void run_make_toy(const MakeToyArgs& args) {
  args.config.validate();
  json payload;
  if (args.dtype == "f32") {
    const auto model = random_model<float>(args.config, args.seed);
    save_checkpoint_file(model_to_checkpoint(model, NamingScheme::bert_default()), args.out);
    payload["parameters"] = model.parameter_count();
  } else if (args.dtype == "f64") {
    const auto model = random_model<double>(args.config, args.seed);
    save_checkpoint_file(model_to_checkpoint(model, NamingScheme::bert_default()), args.out);
    payload["parameters"] = model.parameter_count();
  } else {
    throw UsageError("--dtype must be f32 or f64");
  }
  if (!args.config_out.empty()) args.config.save_file(args.config_out);
  payload["path"] = args.out;
  payload["num_layers"] = args.config.num_layers;
  payload["dtype"] = args.dtype == "f32" ? "F32" : "F64";
  emit_report("make-toy", payload);
}

}  // namespace

int cli_main(int argc, const char* const* argv) {
  CLI::App app{"layercut: layer-pruning toolkit for transformer encoder checkpoints"};
  app.require_subcommand(1);

  InspectArgs inspect_args;
  auto* inspect = app.add_subcommand("inspect", "Show topology and parameter counts");
  inspect->add_option("ckpt", inspect_args.ckpt, "checkpoint file")->required();
  inspect->add_option("--scheme", inspect_args.scheme, "naming-scheme JSON file");
  inspect->callback([&] { run_inspect(inspect_args); });

  PlanArgs plan_args;
  auto* plan = app.add_subcommand("plan", "Compute a drop plan");
  plan->add_option("--layers", plan_args.layers, "layer count L");
  plan->add_option("--strategy", plan_args.strategy,
                   "top|bottom|odd-alternate|even-alternate|symmetric|contribution")
      ->required();
  plan->add_option("--k", plan_args.k, "layers to drop")
      ->each([&plan_args](const std::string&) { plan_args.k_set = true; });
  plan->add_option("--threshold", plan_args.threshold, "similarity threshold (contribution)")
      ->each([&plan_args](const std::string&) { plan_args.threshold_set = true; });
  plan->add_option("--profile", plan_args.profile, "similarity profile JSON file");
  plan->add_option("--ckpt", plan_args.ckpt, "checkpoint (inline contribution scoring)");
  plan->add_option("--config", plan_args.config, "encoder config (inline contribution scoring)");
  plan->add_option("--data", plan_args.data, "batch file (inline contribution scoring)");
  plan->add_option("--out", plan_args.out, "write the plan JSON here as well");
  plan->callback([&] { run_plan(plan_args); });

  ApplyArgs apply_args;
  auto* apply = app.add_subcommand("apply", "Rewrite a checkpoint under a plan");
  apply->add_option("ckpt", apply_args.ckpt, "input checkpoint")->required();
  apply->add_option("--plan", apply_args.plan, "plan JSON file")->required();
  apply->add_option("--out", apply_args.out, "output checkpoint")->required();
  apply->add_option("--scheme", apply_args.scheme, "naming-scheme JSON file");
  apply->callback([&] { run_apply(apply_args); });

  ScoreArgs score_args;
  auto* score = app.add_subcommand("score", "Per-layer CLS cosine similarity profile");
  score->add_option("ckpt", score_args.ckpt, "checkpoint file")->required();
  score->add_option("--config", score_args.config, "encoder config JSON")->required();
  score->add_option("--data", score_args.data, "line-delimited batch file")->required();
  score->add_option("--thresholds", score_args.thresholds, "report drop flags at these taus")
      ->delimiter(',');
  score->add_option("--batch-size", score_args.batch_size, "scoring batch size");
  score->add_option("--profile-out", score_args.profile_out, "write the profile JSON here");
  score->add_option("--scheme", score_args.scheme, "naming-scheme JSON file");
  score->callback([&] { run_score(score_args); });

  FinetuneArgs ft_args;
  auto* ft = app.add_subcommand("finetune", "Fine-tune on a synthetic task");
  ft->add_option("ckpt", ft_args.ckpt, "checkpoint file")->required();
  ft->add_option("--config", ft_args.config, "encoder config JSON")->required();
  ft->add_option("--task", ft_args.task, "synthetic task JSON")->required();
  ft->add_option("--plan", ft_args.plan, "drop plan JSON");
  ft->add_flag("--gradual", ft_args.gradual, "drop one layer after every two epochs");
  ft->add_flag("--drop-after-finetune", ft_args.drop_after,
               "fine-tune, then drop, then fine-tune again");
  ft->add_option("--epochs", ft_args.train.epochs, "training epochs");
  ft->add_option("--lr", ft_args.train.learning_rate, "learning rate");
  ft->add_option("--batch-size", ft_args.train.batch_size, "batch size");
  ft->add_option("--seed", ft_args.train.seed, "seed for init and shuffling");
  ft->add_option("--optimizer", ft_args.optimizer, "sgd|sgd-momentum");
  ft->add_option("--momentum", ft_args.train.momentum, "momentum coefficient");
  ft->add_option("--metrics-out", ft_args.metrics_out, "write step/epoch records here (JSONL)");
  ft->add_option("--out", ft_args.out, "write the trained checkpoint here");
  ft->add_option("--scheme", ft_args.scheme, "naming-scheme JSON file");
  ft->callback([&] { run_finetune(ft_args); });

  ReportArgs report_args;
  auto* report = app.add_subcommand("report", "Largest K within a score-loss threshold");
  report->add_option("--scores", report_args.scores, "JSON map K -> score")->required();
  report->add_option("--threshold-points", report_args.threshold_points,
                     "allowed loss in absolute points")
      ->required();
  report->callback([&] { run_report(report_args); });

  MakeToyArgs toy_args;
  auto* toy = app.add_subcommand("make-toy", "Write a random toy checkpoint");
  toy->add_option("out", toy_args.out, "output checkpoint path")->required();
  toy->add_option("--layers", toy_args.config.num_layers, "encoder layers");
  toy->add_option("--d-model", toy_args.config.d_model, "hidden width");
  toy->add_option("--heads", toy_args.config.n_heads, "attention heads");
  toy->add_option("--d-ff", toy_args.config.d_ff, "feed-forward width");
  toy->add_option("--vocab", toy_args.config.vocab_size, "vocabulary size");
  toy->add_option("--max-positions", toy_args.config.max_positions, "positional table size");
  toy->add_option("--token-types", toy_args.config.num_token_types, "segment table size");
  toy->add_option("--cls-index", toy_args.config.cls_index, "sentence-token position");
  toy->add_option("--seed", toy_args.seed, "init seed");
  toy->add_option("--dtype", toy_args.dtype, "f32|f64");
  toy->add_option("--config-out", toy_args.config_out, "write the matching encoder config");
  toy->callback([&] { run_make_toy(toy_args); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);  // prints help, exits 0
  } catch (const CLI::ParseError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 1;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 1;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

}  // namespace layercut
