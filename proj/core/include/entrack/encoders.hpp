// Continuous representations: contextual token states, per-entity step
// inputs and the entity-tracking BiLSTM, and per-(entity, location) step
// inputs.

#pragma once

#include <cstddef>
#include <vector>

#include "entrack/autodiff.hpp"
#include "entrack/corpus.hpp"
#include "entrack/model.hpp"
#include "entrack/spans.hpp"

namespace entrack {

// Mention spans of one entity, per sentence.
struct MentionIndex {
  std::vector<std::vector<Span>> spans;
  bool mentioned(std::size_t t) const { return !spans[t].empty(); }
};

// Verb-flagged token positions, per sentence (sentence-local).
std::vector<std::vector<std::size_t>> verb_positions(const Paragraph& paragraph);

// Case-insensitive, longest-alias-first, left-to-right greedy matching of
// the entity's aliases against each sentence. Matches never overlap and
// never cross a sentence boundary.
MentionIndex find_mentions(const Paragraph& paragraph, const Entity& entity);

// Contextual token states h_i = [forward; backward] over the flat token list
// (or per sentence when the model's scope is Sentence). Input per token is
// [emb(w_i); v_i] with v_i the verb flag (always 0 when verbs are disabled).
std::vector<Var> encode_tokens(Tape& tape, const Model& model, const Paragraph& paragraph);

// Tokens of sentence `t` among the flat token states.
std::vector<Var> sentence_states(const Paragraph& paragraph, const std::vector<Var>& token_states,
                                 std::size_t t);

// x_t^e: [mean of mention-token states; mean of verb-token states] when the
// entity is mentioned in sentence t, the zero vector otherwise. The verb
// half is zero for a sentence without verbs and is omitted when verbs are
// disabled.
Var entity_step_input(Tape& tape, const Model& model, const Paragraph& paragraph,
                      const std::vector<Var>& token_states, const MentionIndex& mentions,
                      const std::vector<std::vector<std::size_t>>& verbs, std::size_t t);

// Attention ablation: the mention half becomes a softmax(q . h_i)-weighted
// mean over every token of sentence t; the verb half is the sentence's verb
// mean regardless of mentions.
Var entity_step_input_attention(Tape& tape, const Model& model, const Paragraph& paragraph,
                                const std::vector<Var>& token_states,
                                const std::vector<std::vector<std::size_t>>& verbs, std::size_t t);

// Entity-tracking BiLSTM over the T step inputs.
std::vector<Var> entity_track(Tape& tape, const Model& model, const std::vector<Var>& inputs);

// x_t^{e,l}: [location half; entity half]. The location half is the mean of
// the candidate's token states in sentence t (zero if it does not occur
// there); NULL/UNK use their learned symbol vectors. The entity half is the
// mention mean or zero.
Var location_step_input(Tape& tape, const Model& model, const Paragraph& paragraph,
                        const std::vector<Var>& token_states, const MentionIndex& mentions,
                        const LocationCandidate& candidate, std::size_t t);

}  // namespace entrack
