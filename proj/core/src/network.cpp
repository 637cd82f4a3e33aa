#include "entrack/network.hpp"

#include <stdexcept>

#include "entrack/location.hpp"

namespace entrack {

PreparedParagraph prepare(const Paragraph& paragraph, const crf::TagScheme& scheme) {
  PreparedParagraph out;
  out.paragraph = &paragraph;
  out.candidates = extract_candidates(paragraph);
  out.verbs = verb_positions(paragraph);
  for (const auto& e : paragraph.entities) out.mentions.push_back(find_mentions(paragraph, e));
  if (paragraph.grid) {
    auto gold = derive_gold_tags(paragraph);
    out.annotation_errors = gold.errors;
    if (gold.ok()) {
      out.gold_tags = gold.per_entity;
      for (const auto& tags : out.gold_tags) out.gold_labels.push_back(scheme.map(tags));
      for (const auto& row : paragraph.grid->rows) {
        out.location_targets.push_back(gold_location_targets(row, out.candidates));
      }
    }
  }
  return out;
}

Var constrained_transitions(Tape& tape, const Model& model) {
  const auto& scheme = model.scheme();
  if (!model.config().transitions) {
    const std::size_t n = scheme.size() + 2;
    return tape.constant(crf::effective_transitions(Tensor::zeros({n, n}), scheme, false));
  }
  Var raw = tape.param(model.store(), model.params().transitions);
  Tensor value = crf::effective_transitions(raw.value(), scheme, true);
  const std::size_t n = scheme.size() + 2;
  std::vector<bool> allowed(n * n);
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b < n; ++b) allowed[a * n + b] = scheme.allowed(a, b);
  }
  const auto ri = raw.index;
  return tape.record(std::move(value), [ri, allowed = std::move(allowed),
                                        self = static_cast<std::uint32_t>(tape.node_count())](Tape& tp) {
    const auto& g = tp.grad(self);
    auto& gr = tp.grad(ri);
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (allowed[i]) gr[i] += g[i];
    }
  });
}

ParagraphGraph build_graph(Tape& tape, const Model& model, const PreparedParagraph& prepared,
                           bool with_locations) {
  const Paragraph& paragraph = *prepared.paragraph;
  const std::size_t steps = paragraph.steps();
  const std::size_t k = model.scheme().size();
  ParagraphGraph g;
  g.token_states = encode_tokens(tape, model, paragraph);
  g.transitions = constrained_transitions(tape, model);
  Var emission = tape.param(model.store(), model.params().emission);

  for (std::size_t e = 0; e < paragraph.entities.size(); ++e) {
    std::vector<Var> inputs;
    inputs.reserve(steps);
    for (std::size_t t = 0; t < steps; ++t) {
      inputs.push_back(model.config().attention
                           ? entity_step_input_attention(tape, model, paragraph, g.token_states, prepared.verbs, t)
                           : entity_step_input(tape, model, paragraph, g.token_states, prepared.mentions[e],
                                               prepared.verbs, t));
    }
    auto tracked = entity_track(tape, model, inputs);
    std::vector<Var> rows;
    rows.reserve(steps);
    for (const Var& h : tracked) rows.push_back(ad::matmul(emission, h));
    g.emissions.push_back(ad::reshape(ad::concat(rows), {steps, k}));
    if (with_locations) {
      g.location_logits.push_back(location_logits(tape, model, paragraph, g.token_states,
                                                  prepared.mentions[e], prepared.candidates));
    }
  }
  return g;
}

ParagraphLoss paragraph_loss(Tape& tape, const Model& model, const PreparedParagraph& prepared,
                             double lambda) {
  if (!prepared.has_gold()) {
    throw std::invalid_argument("paragraph '" + prepared.paragraph->id + "' has no usable gold annotation");
  }
  auto graph = build_graph(tape, model, prepared, /*with_locations=*/true);
  std::vector<Var> terms;
  for (std::size_t e = 0; e < graph.emissions.size(); ++e) {
    Var nll = crf::nll(graph.emissions[e], graph.transitions, model.scheme(), prepared.gold_labels[e]);
    terms.push_back(ad::reshape(nll, {1}));
  }
  Var state = ad::sum(ad::concat(terms));
  Var location = location_loss(tape, graph.location_logits, prepared.location_targets);
  ParagraphLoss out;
  out.state_nll = state.value()[0];
  out.location_loss = location.value()[0];
  out.total = ad::add(state, ad::scale(location, lambda));
  return out;
}

}  // namespace entrack
