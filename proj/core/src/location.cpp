#include "entrack/location.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "entrack/lstm.hpp"

namespace entrack {

namespace {

std::vector<Span> occurrences_in(const std::vector<Token>& sentence, const std::vector<std::string>& words) {
  std::vector<Span> out;
  if (words.empty() || words.size() > sentence.size()) return out;
  for (std::size_t i = 0; i + words.size() <= sentence.size();) {
    bool match = true;
    for (std::size_t k = 0; k < words.size() && match; ++k) {
      match = to_lower(sentence[i + k].surface) == words[k];
    }
    if (match) {
      out.push_back({i, i + words.size() - 1});
      i += words.size();
    } else {
      ++i;
    }
  }
  return out;
}

}  // namespace

std::vector<LocationCandidate> extract_candidates(const Paragraph& paragraph) {
  std::vector<LocationCandidate> out;
  for (std::size_t t = 0; t < paragraph.steps(); ++t) {
    const auto& s = paragraph.sentences[t];
    std::size_t i = 0;
    while (i < s.size()) {
      std::size_t j = i;
      while (j < s.size() && s[j].pos == Pos::Adj) ++j;
      std::size_t k = j;
      while (k < s.size() && s[k].pos == Pos::Noun) ++k;
      if (k == j) {
        i = std::max(i + 1, j);
        continue;
      }
      std::string text;
      for (std::size_t x = i; x < k; ++x) text += (x == i ? "" : " ") + s[x].surface;
      LocationCandidate c;
      c.kind = LocationCandidate::Kind::Span;
      c.normalized_text = normalize_location(text);
      c.sentence = t;
      c.span = {i, k - 1};
      i = k;
      if (c.normalized_text.empty()) continue;
      const bool seen = std::any_of(out.begin(), out.end(), [&](const LocationCandidate& o) {
        return o.normalized_text == c.normalized_text;
      });
      if (!seen) out.push_back(std::move(c));
    }
  }
  for (auto& c : out) {
    auto words = split_words(c.normalized_text);
    c.occurrences.resize(paragraph.steps());
    for (std::size_t t = 0; t < paragraph.steps(); ++t) {
      c.occurrences[t] = occurrences_in(paragraph.sentences[t], words);
    }
  }
  LocationCandidate null_c{LocationCandidate::Kind::Null, "<null>", 0, {}, {}};
  LocationCandidate unk_c{LocationCandidate::Kind::Unk, "<unk>", 0, {}, {}};
  null_c.occurrences.resize(paragraph.steps());
  unk_c.occurrences.resize(paragraph.steps());
  out.push_back(std::move(null_c));
  out.push_back(std::move(unk_c));
  return out;
}

std::size_t null_index(std::span<const LocationCandidate> candidates) {
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (candidates[i].kind == LocationCandidate::Kind::Null) return i;
  }
  throw std::invalid_argument("candidate list has no NULL entry");
}

std::size_t unk_index(std::span<const LocationCandidate> candidates) {
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (candidates[i].kind == LocationCandidate::Kind::Unk) return i;
  }
  throw std::invalid_argument("candidate list has no UNK entry");
}

std::vector<Var> location_track(Tape& tape, const Model& model, const std::vector<Var>& step_inputs) {
  return run_lstm(tape, model.store(), model.params().location, step_inputs);
}

std::vector<Var> location_logits(Tape& tape, const Model& model, const Paragraph& paragraph,
                                 const std::vector<Var>& token_states, const MentionIndex& mentions,
                                 std::span<const LocationCandidate> candidates) {
  const std::size_t steps = paragraph.steps();
  Var w_loc = tape.param(model.store(), model.params().location_score);
  std::vector<std::vector<Var>> per_step(steps);
  for (const auto& candidate : candidates) {
    std::vector<Var> inputs;
    inputs.reserve(steps);
    for (std::size_t t = 0; t < steps; ++t) {
      inputs.push_back(location_step_input(tape, model, paragraph, token_states, mentions, candidate, t));
    }
    auto states = location_track(tape, model, inputs);
    for (std::size_t t = 0; t < steps; ++t) per_step[t].push_back(ad::reshape(ad::dot(w_loc, states[t]), {1}));
  }
  std::vector<Var> out;
  out.reserve(steps);
  for (auto& scores : per_step) out.push_back(ad::concat(scores));
  return out;
}

std::vector<double> location_distribution(const Tensor& logits) {
  const double lse = ad::log_sum_exp(std::span<const double>(logits.values));
  std::vector<double> p(logits.size());
  for (std::size_t i = 0; i < p.size(); ++i) p[i] = std::exp(logits.values[i] - lse);
  return p;
}

Var location_loss(Tape& tape, const std::vector<std::vector<Var>>& logits,
                  const std::vector<std::vector<LocationTarget>>& targets) {
  if (logits.size() != targets.size()) throw ShapeError("location_loss: entity count mismatch");
  std::vector<Var> terms;
  for (std::size_t e = 0; e < logits.size(); ++e) {
    if (logits[e].size() != targets[e].size()) throw ShapeError("location_loss: step count mismatch");
    for (std::size_t t = 0; t < logits[e].size(); ++t) {
      if (!targets[e][t]) continue;
      terms.push_back(ad::pick(ad::log_softmax(logits[e][t]), *targets[e][t]));
    }
  }
  if (terms.empty()) return tape.constant(Tensor::scalar(0.0));
  for (Var& x : terms) x = ad::reshape(x, {1});
  Var total = ad::sum(ad::concat(terms));
  return ad::scale(total, -1.0 / static_cast<double>(terms.size()));
}

Var location_loss(Tape& tape, const std::vector<Var>& logits, std::span<const LocationTarget> targets) {
  return location_loss(tape, std::vector<std::vector<Var>>{logits},
                       std::vector<std::vector<LocationTarget>>{{targets.begin(), targets.end()}});
}

}  // namespace entrack
