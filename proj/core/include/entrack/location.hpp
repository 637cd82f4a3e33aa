// Location candidates and the per-step location distribution of an entity.

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "entrack/autodiff.hpp"
#include "entrack/corpus.hpp"
#include "entrack/encoders.hpp"
#include "entrack/model.hpp"
#include "entrack/spans.hpp"

namespace entrack {

// Maximal ADJ* NOUN+ runs within each sentence, deduplicated across the
// paragraph by normalized text (first occurrence kept), followed by the NULL
// and UNK pseudo-candidates. Depends only on POS tags and surfaces.
std::vector<LocationCandidate> extract_candidates(const Paragraph& paragraph);

std::size_t null_index(std::span<const LocationCandidate> candidates);
std::size_t unk_index(std::span<const LocationCandidate> candidates);

// Location-tracking LSTM for one (entity, candidate) pair: one hidden state
// per sentence.
std::vector<Var> location_track(Tape& tape, const Model& model, const std::vector<Var>& step_inputs);

// Location potentials w_loc . h_t^{e,l} for every candidate at every step:
// result[t] is a [num_candidates] vector of logits.
std::vector<Var> location_logits(Tape& tape, const Model& model, const Paragraph& paragraph,
                                 const std::vector<Var>& token_states, const MentionIndex& mentions,
                                 std::span<const LocationCandidate> candidates);

// Softmax over candidates.
std::vector<double> location_distribution(const Tensor& logits);

// Mean cross-entropy over unmasked steps, or the constant 0 when every step
// is masked. `logits[t]` pairs with `targets[t]`.
Var location_loss(Tape& tape, const std::vector<Var>& logits, std::span<const LocationTarget> targets);

// Same, summed over several entities and averaged over all their unmasked
// (entity, step) cells.
Var location_loss(Tape& tape, const std::vector<std::vector<Var>>& logits,
                  const std::vector<std::vector<LocationTarget>>& targets);

}  // namespace entrack
