#include "entrack/encoders.hpp"

#include <algorithm>
#include <limits>

#include "entrack/lstm.hpp"

namespace entrack {

std::vector<std::vector<std::size_t>> verb_positions(const Paragraph& paragraph) {
  std::vector<std::vector<std::size_t>> out(paragraph.steps());
  for (std::size_t t = 0; t < paragraph.steps(); ++t) {
    const auto& s = paragraph.sentences[t];
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (s[i].is_verb) out[t].push_back(i);
    }
  }
  return out;
}

MentionIndex find_mentions(const Paragraph& paragraph, const Entity& entity) {
  std::vector<std::vector<std::string>> aliases;
  for (const auto& a : entity.aliases) {
    auto words = split_words(to_lower(a));
    if (!words.empty()) aliases.push_back(std::move(words));
  }
  std::stable_sort(aliases.begin(), aliases.end(),
                   [](const auto& a, const auto& b) { return a.size() > b.size(); });

  MentionIndex index;
  index.spans.resize(paragraph.steps());
  for (std::size_t t = 0; t < paragraph.steps(); ++t) {
    const auto& sentence = paragraph.sentences[t];
    std::vector<std::string> lower;
    lower.reserve(sentence.size());
    for (const auto& tok : sentence) lower.push_back(to_lower(tok.surface));
    std::size_t i = 0;
    while (i < lower.size()) {
      bool matched = false;
      for (const auto& alias : aliases) {
        if (i + alias.size() > lower.size()) continue;
        if (std::equal(alias.begin(), alias.end(), lower.begin() + static_cast<std::ptrdiff_t>(i))) {
          index.spans[t].push_back({i, i + alias.size() - 1});
          i += alias.size();
          matched = true;
          break;
        }
      }
      if (!matched) ++i;
    }
  }
  return index;
}

std::vector<Var> encode_tokens(Tape& tape, const Model& model, const Paragraph& paragraph) {
  const auto& store = model.store();
  const auto& p = model.params();
  const Tensor& table = store.tensor(p.embeddings);
  const std::size_t d = table.cols();

  std::vector<Var> inputs;
  inputs.reserve(paragraph.token_count());
  for (const auto& sentence : paragraph.sentences) {
    for (const auto& tok : sentence) {
      if (tok.embedding_id >= table.rows()) {
        throw std::out_of_range("token '" + tok.surface + "' has embedding id " +
                                std::to_string(tok.embedding_id) + " outside the table");
      }
      std::vector<double> x(table.values.begin() + static_cast<std::ptrdiff_t>(tok.embedding_id * d),
                            table.values.begin() + static_cast<std::ptrdiff_t>((tok.embedding_id + 1) * d));
      x.push_back(model.config().use_verb && tok.is_verb ? 1.0 : 0.0);
      inputs.push_back(tape.constant(Tensor::vector(std::move(x))));
    }
  }

  if (model.config().scope == ContextScope::Paragraph) {
    return run_bilstm(tape, store, p.token_fwd, p.token_bwd, inputs);
  }
  std::vector<Var> out;
  out.reserve(inputs.size());
  std::size_t offset = 0;
  for (const auto& sentence : paragraph.sentences) {
    std::vector<Var> part(inputs.begin() + static_cast<std::ptrdiff_t>(offset),
                          inputs.begin() + static_cast<std::ptrdiff_t>(offset + sentence.size()));
    auto states = run_bilstm(tape, store, p.token_fwd, p.token_bwd, part);
    out.insert(out.end(), states.begin(), states.end());
    offset += sentence.size();
  }
  return out;
}

std::vector<Var> sentence_states(const Paragraph& paragraph, const std::vector<Var>& token_states,
                                 std::size_t t) {
  const std::size_t offset = paragraph.sentence_offset(t);
  return {token_states.begin() + static_cast<std::ptrdiff_t>(offset),
          token_states.begin() + static_cast<std::ptrdiff_t>(offset + paragraph.sentences[t].size())};
}

namespace {

Var zeros(Tape& tape, std::size_t n) { return tape.constant(Tensor::zeros({n})); }

Var mean_of_spans(const std::vector<Var>& sentence, const std::vector<Span>& spans) {
  std::vector<Var> parts;
  for (const auto& s : spans) {
    for (std::size_t i = s.first; i <= s.last; ++i) parts.push_back(sentence[i]);
  }
  return ad::mean_pool(parts);
}

Var verb_half(Tape& tape, const Model& model, const std::vector<Var>& sentence,
              const std::vector<std::size_t>& verbs, const std::vector<Span>& mentions) {
  if (verbs.empty()) return zeros(tape, model.token_width());
  if (model.config().verb_mode == VerbMode::Nearest && !mentions.empty()) {
    std::size_t best = verbs.front();
    std::size_t best_dist = std::numeric_limits<std::size_t>::max();
    for (std::size_t v : verbs) {
      for (const auto& s : mentions) {
        std::size_t dist = v < s.first ? s.first - v : (v > s.last ? v - s.last : 0);
        if (dist < best_dist) {
          best_dist = dist;
          best = v;
        }
      }
    }
    return sentence[best];
  }
  std::vector<Var> parts;
  for (std::size_t v : verbs) parts.push_back(sentence[v]);
  return ad::mean_pool(parts);
}

}  // namespace

Var entity_step_input(Tape& tape, const Model& model, const Paragraph& paragraph,
                      const std::vector<Var>& token_states, const MentionIndex& mentions,
                      const std::vector<std::vector<std::size_t>>& verbs, std::size_t t) {
  if (!mentions.mentioned(t)) return zeros(tape, model.entity_input_width());
  auto sentence = sentence_states(paragraph, token_states, t);
  Var mention = mean_of_spans(sentence, mentions.spans[t]);
  if (!model.config().use_verb) return mention;
  return ad::concat({mention, verb_half(tape, model, sentence, verbs[t], mentions.spans[t])});
}

Var entity_step_input_attention(Tape& tape, const Model& model, const Paragraph& paragraph,
                                const std::vector<Var>& token_states,
                                const std::vector<std::vector<std::size_t>>& verbs, std::size_t t) {
  if (!model.config().attention) throw std::logic_error("attention input requested without attention weights");
  auto sentence = sentence_states(paragraph, token_states, t);
  Var query = tape.param(model.store(), model.params().attention_query);
  std::vector<Var> scores;
  scores.reserve(sentence.size());
  for (const Var& h : sentence) scores.push_back(ad::reshape(ad::dot(query, h), {1}));
  Var weights = ad::softmax(ad::concat(scores));
  Var stacked = ad::reshape(ad::concat(sentence), {sentence.size(), model.token_width()});
  Var attended = ad::matmul(ad::transpose(stacked), weights);
  if (!model.config().use_verb) return attended;
  return ad::concat({attended, verb_half(tape, model, sentence, verbs[t], {})});
}

std::vector<Var> entity_track(Tape& tape, const Model& model, const std::vector<Var>& inputs) {
  const auto& p = model.params();
  return run_bilstm(tape, model.store(), p.entity_fwd, p.entity_bwd, inputs);
}

Var location_step_input(Tape& tape, const Model& model, const Paragraph& paragraph,
                        const std::vector<Var>& token_states, const MentionIndex& mentions,
                        const LocationCandidate& candidate, std::size_t t) {
  auto sentence = sentence_states(paragraph, token_states, t);
  Var location;
  switch (candidate.kind) {
    case LocationCandidate::Kind::Null:
      location = tape.param(model.store(), model.params().null_symbol);
      break;
    case LocationCandidate::Kind::Unk:
      location = tape.param(model.store(), model.params().unk_symbol);
      break;
    case LocationCandidate::Kind::Span:
      location = candidate.occurrences[t].empty() ? zeros(tape, model.token_width())
                                                  : mean_of_spans(sentence, candidate.occurrences[t]);
      break;
  }
  Var entity = mentions.mentioned(t) ? mean_of_spans(sentence, mentions.spans[t])
                                     : zeros(tape, model.token_width());
  return ad::concat({location, entity});
}

}  // namespace entrack
