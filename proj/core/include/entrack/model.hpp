// Model configuration and the full set of trainable weights.

#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "entrack/autodiff.hpp"
#include "entrack/crf.hpp"
#include "entrack/embeddings.hpp"
#include "entrack/lstm.hpp"

namespace entrack {

enum class VerbMode { All, Nearest };
enum class ContextScope { Paragraph, Sentence };

struct ModelConfig {
  std::size_t token_hidden = 100;     // per direction, base BiLSTM
  std::size_t entity_hidden = 100;    // per direction, entity-tracking BiLSTM
  std::size_t location_hidden = 100;  // location-tracking LSTM
  crf::SchemeKind scheme = crf::SchemeKind::Full6;
  bool transitions = true;  // false: transition scores fixed at 0, constraints kept
  bool use_verb = true;     // false: no verb indicator and no verb half in entity inputs
  bool attention = false;   // soft attention over sentence tokens instead of mentions
  VerbMode verb_mode = VerbMode::All;
  ContextScope scope = ContextScope::Paragraph;
  double init_range = 0.1;

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

std::string_view verb_mode_name(VerbMode mode);
VerbMode parse_verb_mode(std::string_view name);
std::string_view scope_name(ContextScope scope);
ContextScope parse_scope(std::string_view name);

// Named handles into a ParameterStore. The store holds, in order: the frozen
// embedding table, the base BiLSTM, the entity BiLSTM, the emission matrix,
// the transition matrix, the location LSTM, the NULL/UNK symbol vectors, the
// location scoring vector and (attention only) the attention query.
struct ModelParams {
  ParamId embeddings = 0;
  LstmWeights token_fwd, token_bwd;
  LstmWeights entity_fwd, entity_bwd;
  ParamId emission = 0;     // [K, 2 * entity_hidden]
  ParamId transitions = 0;  // [K + 2, K + 2]
  LstmWeights location;
  ParamId null_symbol = 0;  // [2 * token_hidden]
  ParamId unk_symbol = 0;   // [2 * token_hidden]
  ParamId location_score = 0;  // [location_hidden]
  ParamId attention_query = 0;  // [2 * token_hidden], attention only
};

class Model {
 public:
  // Fresh weights: uniform(-init_range, init_range) for matrices and symbol
  // vectors, zeros for biases and trainable transitions.
  static Model create(const ModelConfig& config, const Embeddings& embeddings, std::uint64_t seed);
  // Rebinds handles for a store produced by create() with the same config.
  static Model bind(const ModelConfig& config, std::vector<std::string> vocab, ParameterStore store);

  const ModelConfig& config() const { return config_; }
  const crf::TagScheme& scheme() const { return scheme_; }
  const ParameterStore& store() const { return store_; }
  ParameterStore& store() { return store_; }
  const ModelParams& params() const { return params_; }
  const std::vector<std::string>& vocab() const { return vocab_; }
  Embeddings embeddings() const;

  std::size_t embedding_dim() const;
  std::size_t token_width() const { return 2 * config_.token_hidden; }
  std::size_t entity_input_width() const { return token_width() * (config_.use_verb ? 2 : 1); }
  std::size_t location_input_width() const { return 2 * token_width(); }

 private:
  ModelConfig config_;
  crf::TagScheme scheme_;
  std::vector<std::string> vocab_;
  ParameterStore store_;
  ModelParams params_;
};

}  // namespace entrack
