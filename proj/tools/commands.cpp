#include "commands.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>

#include <json.hpp>

#include "entrack/checkpoint.hpp"
#include "entrack/crf.hpp"
#include "entrack/embeddings.hpp"
#include "entrack/evaluation.hpp"
#include "entrack/gradcheck.hpp"
#include "entrack/network.hpp"
#include "entrack/pipeline.hpp"
#include "entrack/random.hpp"
#include "entrack/synth.hpp"
#include "entrack/trainer.hpp"

namespace entrack::cli {

namespace {

const std::string& require(const std::string& value, const char* flag) {
  if (value.empty()) throw UsageError(std::string("missing required ") + flag);
  return value;
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open '" + path + "' for writing");
  f << text;
  if (!f) throw std::runtime_error("write failed for '" + path + "'");
}

std::vector<Paragraph> load_with_ids(const std::string& path, const Embeddings& embeddings) {
  auto corpus = load_canonical(path);
  assign_embedding_ids(corpus, embeddings);
  return corpus;
}

void print_epoch(const EpochMetrics& m) {
  std::fprintf(stderr, "epoch %3zu  loss %.5f  state %.5f  location %.5f", m.epoch, m.loss, m.state_nll,
               m.location_loss);
  if (m.dev_score) std::fprintf(stderr, "  dev cat1 %.2f cat2 %.2f score %.2f", *m.dev_cat1, *m.dev_cat2, *m.dev_score);
  std::fprintf(stderr, "  (%.1fs)\n", m.seconds);
}

nlohmann::json epoch_json(const EpochMetrics& m) {
  nlohmann::json j = {{"epoch", m.epoch},
                      {"loss", m.loss},
                      {"state_nll", m.state_nll},
                      {"location_loss", m.location_loss},
                      {"seconds", m.seconds}};
  if (m.dev_score) {
    j["dev_cat1"] = *m.dev_cat1;
    j["dev_cat2"] = *m.dev_cat2;
    j["dev_score"] = *m.dev_score;
  }
  return j;
}

TrainResult train_from(const RunConfig& config, const std::string& log_path) {
  const auto embeddings = load_embeddings(require(config.embeddings, "--embeddings"));
  const auto corpus = load_with_ids(require(config.corpus, "--corpus"), embeddings);
  std::vector<Paragraph> dev;
  if (!config.dev_corpus.empty()) dev = load_with_ids(config.dev_corpus, embeddings);
  std::ofstream log;
  if (!log_path.empty()) {
    log.open(log_path);
    if (!log) throw std::runtime_error("cannot open '" + log_path + "' for writing");
  }
  return train(corpus, config.dev_corpus.empty() ? nullptr : &dev, config.model, embeddings, config.train,
               [&](const EpochMetrics& m) {
                 print_epoch(m);
                 if (log.is_open()) log << epoch_json(m).dump() << '\n' << std::flush;
               });
}

}  // namespace

int run_train(const RunConfig& config, const TrainArgs& args) {
  const auto& out = require(config.out, "--out (checkpoint path)");
  auto result = train_from(config, args.log);
  save_checkpoint(out, result.model);
  std::fprintf(stderr, "kept parameters from epoch %zu; wrote %s\n", result.best_epoch, out.c_str());
  return 0;
}

int run_predict(const RunConfig& config, const PredictArgs& args) {
  const auto model = load_checkpoint(require(config.params, "--params"));
  const auto corpus = load_with_ids(require(config.corpus, "--corpus"), model.embeddings());
  const auto predictions = decode_corpus(model, corpus, config.train.threads);
  const auto text = write_predictions(predictions, crf::scheme_name(model.config().scheme));
  if (config.out.empty()) {
    std::cout << text;
  } else {
    write_file(config.out, text);
  }
  if (!args.tsv.empty()) write_file(args.tsv, export_grid_tsv(predictions));
  return 0;
}

int run_eval(const RunConfig& config, const EvalArgs& args) {
  auto gold = load_canonical(require(config.corpus, "--corpus"));
  std::vector<ParagraphPrediction> predictions;
  if (!args.predictions.empty()) {
    predictions = load_predictions(args.predictions);
  } else {
    const auto model = load_checkpoint(require(config.params, "--predictions or --params"));
    assign_embedding_ids(gold, model.embeddings());
    predictions = decode_corpus(model, gold, config.train.threads);
  }
  Task1Options options;
  options.strict_moves = !args.any_move;
  const auto report = evaluate(gold, predictions, options);
  std::cout << report.to_table();
  if (report.skipped_paragraphs > 0) {
    std::cerr << report.skipped_paragraphs << " paragraph(s) skipped for gold annotation errors\n";
  }
  if (!config.out.empty()) write_file(config.out, report.to_json() + "\n");
  return 0;
}

int run_gradcheck(const RunConfig& config, const GradcheckArgs& args) {
  SynthConfig sc;
  sc.min_steps = sc.max_steps = args.steps;
  sc.min_entities = sc.max_entities = args.entities;
  sc.embedding_dim = 4;
  auto corpus = synth_corpus(config.train.seed, 1, sc);
  const auto embeddings = synth_embeddings(sc);
  assign_embedding_ids(corpus, embeddings);

  ModelConfig mc = config.model;
  mc.token_hidden = mc.entity_hidden = mc.location_hidden = args.hidden;
  auto model = Model::create(mc, embeddings, config.train.seed);
  // Random transition scores so their gradient is exercised away from zero.
  Rng rng(config.train.seed + 1);
  if (mc.transitions) {
    for (double& x : model.store().tensor(model.params().transitions).values) x = rng.uniform(-0.5, 0.5);
  }
  const auto prepared = prepare(corpus[0], model.scheme());
  const double lambda = config.train.lambda;
  Gradients analytic = paragraph_gradient(model, prepared, lambda).gradients;
  auto report = check_gradients(model.store(), analytic, [&](const ParameterStore&) {
    Tape tape;
    return paragraph_loss(tape, model, prepared, lambda).total.value()[0];
  });
  for (const auto& p : report.params) {
    std::printf("%-22s entries %5zu  max rel error %.3e\n", p.name.c_str(), p.checked, p.max_rel_error);
  }
  const bool ok = report.passed(args.tolerance);
  std::printf("%s max relative error %.3e (tolerance %.1e)\n", ok ? "PASS" : "FAIL", report.max_rel_error,
              args.tolerance);
  return ok ? 0 : 1;
}

int run_oracle_check(const RunConfig& config, const OracleArgs& args) {
  Rng rng(config.train.seed);
  std::size_t failures = 0, checked = 0;
  double worst = 0.0;
  for (auto kind : {crf::SchemeKind::Full6, crf::SchemeKind::Merged5, crf::SchemeKind::Merged4}) {
    crf::TagScheme scheme(kind);
    const std::size_t k = scheme.size();
    for (std::size_t steps = 1; steps <= args.max_steps; ++steps) {
      for (std::size_t trial = 0; trial < args.trials; ++trial) {
        Tensor phi = Tensor::zeros({steps, k});
        for (double& x : phi.values) x = 2.0 * rng.normal();
        Tensor raw = Tensor::zeros({k + 2, k + 2});
        for (double& x : raw.values) x = rng.normal();
        const Tensor psi = crf::effective_transitions(raw, scheme);
        const double z = crf::log_partition(phi, psi, scheme);
        const double zb = crf::brute_force_log_partition(phi, psi, scheme);
        const double rel = std::abs(z - zb) / std::max(1.0, std::abs(zb));
        worst = std::max(worst, rel);
        const auto v = crf::viterbi(phi, psi, scheme);
        const auto vb = crf::brute_force_argmax(phi, psi, scheme);
        ++checked;
        if (rel > args.tolerance || v.labels != vb.labels || !scheme.accepts(v.labels)) {
          ++failures;
          if (failures <= 5) {
            std::fprintf(stderr, "mismatch: scheme %s T=%zu trial %zu logZ %.12g vs %.12g\n",
                         std::string(crf::scheme_name(kind)).c_str(), steps, trial, z, zb);
          }
        }
      }
    }
  }
  std::printf("%s %zu problems, %zu mismatches, worst log Z relative error %.3e\n", failures == 0 ? "PASS" : "FAIL",
              checked, failures, worst);
  return failures == 0 ? 0 : 1;
}

int run_synth(const RunConfig& config, const SynthArgs& args) {
  SynthConfig sc;
  sc.max_steps = args.max_steps;
  sc.min_steps = std::min(sc.min_steps, sc.max_steps);
  const auto corpus = synth_corpus(config.train.seed, args.n, sc);
  const auto text = write_canonical(corpus);
  if (config.out.empty()) {
    std::cout << text;
  } else {
    write_file(config.out, text);
  }
  if (!config.embeddings.empty()) save_embeddings(config.embeddings, synth_embeddings(sc));
  return 0;
}

int run_ablate(RunConfig config, const AblateArgs& args) {
  const auto& v = args.variant;
  if (v == "tagset1") config.model.scheme = crf::SchemeKind::Merged5;
  if (v == "tagset2") config.model.scheme = crf::SchemeKind::Merged4;
  if (v == "no-trans") config.model.transitions = false;
  if (v == "no-verb") config.model.use_verb = false;
  if (v == "attention") config.model.attention = true;
  std::fprintf(stderr, "variant %s: tagset %s, transitions %d, verb %d, attention %d\n", v.c_str(),
               std::string(crf::scheme_name(config.model.scheme)).c_str(), config.model.transitions,
               config.model.use_verb, config.model.attention);
  auto result = train_from(config, "");
  auto test = load_with_ids(args.test_corpus, result.model.embeddings());
  const auto predictions = decode_corpus(result.model, test, config.train.threads);
  const auto report = evaluate(test, predictions);
  std::size_t invalid = 0, total = 0;
  for (const auto& p : predictions) {
    for (const auto& e : p.entities) {
      ++total;
      if (!crf::TagScheme(crf::SchemeKind::Full6).accepts(crf::TagScheme(crf::SchemeKind::Full6).map(e.tags))) {
        ++invalid;
      }
    }
  }
  std::cout << "variant " << v << "\n" << report.to_table();
  std::cout << "valid sequences " << (total - invalid) << "/" << total << "\n";
  if (!config.out.empty()) write_file(config.out, report.to_json() + "\n");
  return invalid == 0 ? 0 : 1;
}

}  // namespace entrack::cli
