#pragma once

#include <cstdint>
#include <string>

#include "entrack/config.hpp"

namespace entrack::cli {

// Raised for bad invocations; main() prints it with usage and exits 2.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct TrainArgs {
  std::string log;  // optional per-epoch metrics JSONL
};
int run_train(const RunConfig& config, const TrainArgs& args);

struct PredictArgs {
  std::string tsv;  // optional grid export
};
int run_predict(const RunConfig& config, const PredictArgs& args);

struct EvalArgs {
  std::string predictions;  // decode with --params when empty
  bool any_move = false;
};
int run_eval(const RunConfig& config, const EvalArgs& args);

struct GradcheckArgs {
  double tolerance = 1e-4;
  std::size_t steps = 3;
  std::size_t entities = 2;
  std::size_t hidden = 4;  // every recurrent layer of the probe model
};
int run_gradcheck(const RunConfig& config, const GradcheckArgs& args);

struct OracleArgs {
  std::size_t max_steps = 6;
  std::size_t trials = 500;
  double tolerance = 1e-8;
};
int run_oracle_check(const RunConfig& config, const OracleArgs& args);

struct SynthArgs {
  std::size_t n = 50;
  std::size_t max_steps = 8;
};
int run_synth(const RunConfig& config, const SynthArgs& args);

struct AblateArgs {
  std::string variant;  // full, tagset1, tagset2, no-trans, no-verb, attention
  std::string test_corpus;
};
int run_ablate(RunConfig config, const AblateArgs& args);

}  // namespace entrack::cli
