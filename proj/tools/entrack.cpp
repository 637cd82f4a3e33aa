// entrack command-line tool.
//
// Every command accepts `--config FILE` (flat "key = value" lines) and the
// shared flags below; flags are applied after the file, so they win.

#include <iostream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "commands.hpp"
#include "entrack/checkpoint.hpp"
#include "entrack/corpus.hpp"
#include "entrack/trainer.hpp"

namespace {

using entrack::KeyValues;

struct Shared {
  std::string config_file;
  KeyValues overrides;
};

void add_shared(CLI::App* app, Shared& s) {
  app->add_option("--config", s.config_file, "Flat key = value settings file (flags override it)")
      ->check(CLI::ExistingFile);
  auto setting = [&](const std::string& flag, const std::string& key, const std::string& help) {
    app->add_option_function<std::string>(
        flag, [&s, key](const std::string& v) { s.overrides.emplace_back(key, v); }, help);
  };
  setting("--corpus", "corpus", "Canonical corpus (JSONL)");
  setting("--dev", "dev_corpus", "Development corpus for early stopping");
  setting("--embeddings", "embeddings", "Embedding sidecar file");
  setting("--params", "params", "Model checkpoint");
  setting("--out", "out", "Output path");
  setting("--seed", "seed", "Random seed");
  setting("--threads", "threads", "Worker threads (1 = bit-deterministic)");
  setting("--tagset", "tagset", "Tag scheme: full6, merged5 or merged4");
  setting("--lambda", "lambda", "Weight of the location loss");
  setting("--epochs", "epochs", "Training epochs");
  setting("--lr", "lr", "Learning rate");
  setting("--hidden", "hidden", "Hidden size of every recurrent layer");
  setting("--optimizer", "optimizer", "adam or sgd");
  setting("--batch-size", "batch_size", "Paragraphs per update");
  app->add_flag_callback("--no-transitions", [&s] { s.overrides.emplace_back("transitions", "false"); },
                         "Fix transition scores at zero (constraints kept)");
  app->add_flag_callback("--no-verb", [&s] { s.overrides.emplace_back("verb", "false"); },
                         "Drop verb features");
  app->add_flag_callback("--attention", [&s] { s.overrides.emplace_back("attention", "true"); },
                         "Soft attention instead of mention pooling");
}

entrack::RunConfig resolve(const Shared& s) {
  entrack::RunConfig config;
  if (!s.config_file.empty()) entrack::apply_settings(config, entrack::load_key_values(s.config_file));
  entrack::apply_settings(config, s.overrides);
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Entity state tracking for procedural text"};
  app.require_subcommand(1);
  Shared shared;

  auto* train = app.add_subcommand("train", "Train a model and write a checkpoint (--out)");
  entrack::cli::TrainArgs train_args;
  train->add_option("--log", train_args.log, "Write per-epoch metrics as JSON lines");

  auto* predict = app.add_subcommand("predict", "Decode a corpus with a checkpoint");
  entrack::cli::PredictArgs predict_args;
  predict->add_option("--tsv", predict_args.tsv, "Also export the grids as tab-separated values");

  auto* eval = app.add_subcommand("eval", "Score predictions against a gold corpus");
  entrack::cli::EvalArgs eval_args;
  eval->add_option("--predictions", eval_args.predictions, "Predictions file (decodes with --params if absent)");
  eval->add_flag("--any-move", eval_args.any_move, "Credit Moved when any step or location matches");

  auto* gradcheck = app.add_subcommand("gradcheck", "Compare analytic and finite-difference gradients");
  entrack::cli::GradcheckArgs grad_args;
  gradcheck->add_option("--tolerance", grad_args.tolerance, "Maximum relative error");
  gradcheck->add_option("--steps", grad_args.steps, "Sentences in the probe paragraph");
  gradcheck->add_option("--entities", grad_args.entities, "Entities in the probe paragraph");
  gradcheck->add_option("--probe-hidden", grad_args.hidden, "Hidden size of the probe model");

  auto* oracle = app.add_subcommand("oracle-check", "Compare CRF inference with brute-force enumeration");
  entrack::cli::OracleArgs oracle_args;
  oracle->add_option("--max-T", oracle_args.max_steps, "Longest sequence to enumerate");
  oracle->add_option("--trials", oracle_args.trials, "Random problems per length and scheme");
  oracle->add_option("--tolerance", oracle_args.tolerance, "Relative tolerance on log Z");

  auto* synth = app.add_subcommand("synth", "Generate a synthetic corpus (--out) and embeddings (--embeddings)");
  entrack::cli::SynthArgs synth_args;
  synth->add_option("--n", synth_args.n, "Paragraphs to generate");
  synth->add_option("--max-T", synth_args.max_steps, "Maximum sentences per paragraph");

  auto* ablate = app.add_subcommand("ablate", "Train and evaluate one ablation variant");
  entrack::cli::AblateArgs ablate_args;
  ablate->add_option("variant", ablate_args.variant, "full, tagset1, tagset2, no-trans, no-verb or attention")
      ->required()
      ->check(CLI::IsMember({"full", "tagset1", "tagset2", "no-trans", "no-verb", "attention"}));
  ablate->add_option("--test", ablate_args.test_corpus, "Held-out corpus to evaluate on")->required();

  for (auto* sub : {train, predict, eval, gradcheck, oracle, synth, ablate}) add_shared(sub, shared);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    const auto config = resolve(shared);
    std::cerr << "# resolved configuration\n" << entrack::describe(config);
    if (*train) return entrack::cli::run_train(config, train_args);
    if (*predict) return entrack::cli::run_predict(config, predict_args);
    if (*eval) return entrack::cli::run_eval(config, eval_args);
    if (*gradcheck) return entrack::cli::run_gradcheck(config, grad_args);
    if (*oracle) return entrack::cli::run_oracle_check(config, oracle_args);
    if (*synth) return entrack::cli::run_synth(config, synth_args);
    if (*ablate) return entrack::cli::run_ablate(config, ablate_args);
  } catch (const entrack::cli::UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const entrack::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const entrack::ParseError& e) {
    std::cerr << "corpus error: " << e.what() << "\n";
    return 3;
  } catch (const entrack::CheckpointError& e) {
    std::cerr << "checkpoint error: " << e.what() << "\n";
    return 3;
  } catch (const entrack::TrainingError& e) {
    std::cerr << "training error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
