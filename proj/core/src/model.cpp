#include "entrack/model.hpp"

#include <stdexcept>

#include "entrack/random.hpp"

namespace entrack {

std::string_view verb_mode_name(VerbMode mode) { return mode == VerbMode::All ? "all" : "nearest"; }

VerbMode parse_verb_mode(std::string_view name) {
  if (name == "all") return VerbMode::All;
  if (name == "nearest") return VerbMode::Nearest;
  throw std::invalid_argument("unknown verb mode '" + std::string(name) + "' (expected all or nearest)");
}

std::string_view scope_name(ContextScope scope) {
  return scope == ContextScope::Paragraph ? "paragraph" : "sentence";
}

ContextScope parse_scope(std::string_view name) {
  if (name == "paragraph") return ContextScope::Paragraph;
  if (name == "sentence") return ContextScope::Sentence;
  throw std::invalid_argument("unknown context scope '" + std::string(name) +
                              "' (expected paragraph or sentence)");
}

namespace {

Tensor uniform(Shape shape, Rng& rng, double range) {
  Tensor t = Tensor::zeros(std::move(shape));
  for (auto& v : t.values) v = rng.uniform(-range, range);
  return t;
}

}  // namespace

Model Model::create(const ModelConfig& config, const Embeddings& embeddings, std::uint64_t seed) {
  if (config.token_hidden == 0 || config.entity_hidden == 0 || config.location_hidden == 0) {
    throw std::invalid_argument("hidden sizes must be positive");
  }
  Model m;
  m.config_ = config;
  m.scheme_ = crf::TagScheme(config.scheme);
  m.vocab_ = embeddings.vocab();
  Rng rng(seed);
  auto& s = m.store_;
  auto& p = m.params_;
  const double r = config.init_range;
  const std::size_t k = m.scheme_.size();

  p.embeddings = s.add("embeddings", embeddings.table(), /*trainable=*/false);
  const std::size_t token_in = embeddings.dim() + 1;
  p.token_fwd = LstmWeights::create(s, "token.fwd", token_in, config.token_hidden, rng, r);
  p.token_bwd = LstmWeights::create(s, "token.bwd", token_in, config.token_hidden, rng, r);
  p.entity_fwd = LstmWeights::create(s, "entity.fwd", m.entity_input_width(), config.entity_hidden, rng, r);
  p.entity_bwd = LstmWeights::create(s, "entity.bwd", m.entity_input_width(), config.entity_hidden, rng, r);
  p.emission = s.add("crf.emission", uniform({k, 2 * config.entity_hidden}, rng, r));
  p.transitions = s.add("crf.transitions", Tensor::zeros({k + 2, k + 2}), config.transitions);
  p.location = LstmWeights::create(s, "location", m.location_input_width(), config.location_hidden, rng, r);
  p.null_symbol = s.add("location.null", uniform({m.token_width()}, rng, r));
  p.unk_symbol = s.add("location.unk", uniform({m.token_width()}, rng, r));
  p.location_score = s.add("location.score", uniform({config.location_hidden}, rng, r));
  if (config.attention) p.attention_query = s.add("attention.query", uniform({m.token_width()}, rng, r));
  return m;
}

Model Model::bind(const ModelConfig& config, std::vector<std::string> vocab, ParameterStore store) {
  Model m;
  m.config_ = config;
  m.scheme_ = crf::TagScheme(config.scheme);
  m.vocab_ = std::move(vocab);
  m.store_ = std::move(store);
  auto& s = m.store_;
  auto& p = m.params_;
  p.embeddings = s.find("embeddings");
  p.token_fwd = LstmWeights::bind(s, "token.fwd");
  p.token_bwd = LstmWeights::bind(s, "token.bwd");
  p.entity_fwd = LstmWeights::bind(s, "entity.fwd");
  p.entity_bwd = LstmWeights::bind(s, "entity.bwd");
  p.emission = s.find("crf.emission");
  p.transitions = s.find("crf.transitions");
  p.location = LstmWeights::bind(s, "location");
  p.null_symbol = s.find("location.null");
  p.unk_symbol = s.find("location.unk");
  p.location_score = s.find("location.score");
  if (config.attention) p.attention_query = s.find("attention.query");

  const std::size_t k = m.scheme_.size();
  auto expect = [&](ParamId id, const Shape& shape) {
    if (s.tensor(id).shape != shape) {
      throw ShapeError("parameter '" + s.name(id) + "' has shape " + shape_string(s.tensor(id).shape) +
                       ", configuration expects " + shape_string(shape));
    }
  };
  const std::size_t th = config.token_hidden, eh = config.entity_hidden, lh = config.location_hidden;
  if (s.tensor(p.embeddings).rows() != m.vocab_.size()) {
    throw ShapeError("embedding table rows do not match vocabulary size");
  }
  const std::size_t d = s.tensor(p.embeddings).cols();
  expect(p.token_fwd.gates, {4 * th, d + 1 + th});
  expect(p.token_bwd.gates, {4 * th, d + 1 + th});
  expect(p.entity_fwd.gates, {4 * eh, m.entity_input_width() + eh});
  expect(p.entity_bwd.gates, {4 * eh, m.entity_input_width() + eh});
  expect(p.emission, {k, 2 * eh});
  expect(p.transitions, {k + 2, k + 2});
  expect(p.location.gates, {4 * lh, m.location_input_width() + lh});
  expect(p.null_symbol, {2 * th});
  expect(p.unk_symbol, {2 * th});
  expect(p.location_score, {lh});
  if (config.attention) expect(p.attention_query, {2 * th});
  if (s.trainable(p.transitions) != config.transitions) {
    throw std::invalid_argument("transition trainability does not match configuration");
  }
  return m;
}

Embeddings Model::embeddings() const { return Embeddings(vocab_, store_.tensor(params_.embeddings)); }

std::size_t Model::embedding_dim() const { return store_.tensor(params_.embeddings).cols(); }

}  // namespace entrack
