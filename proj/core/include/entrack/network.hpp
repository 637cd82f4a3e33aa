// Full forward computation for one paragraph: emission potentials per
// entity, the constrained transition matrix, location logits per entity and
// step, and the joint training loss.

#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "entrack/autodiff.hpp"
#include "entrack/corpus.hpp"
#include "entrack/crf.hpp"
#include "entrack/encoders.hpp"
#include "entrack/model.hpp"

namespace entrack {

// Everything about a paragraph that does not depend on model weights.
struct PreparedParagraph {
  const Paragraph* paragraph = nullptr;
  std::vector<LocationCandidate> candidates;
  std::vector<MentionIndex> mentions;  // per entity
  std::vector<std::vector<std::size_t>> verbs;

  // Gold annotation; empty when the paragraph has no grid.
  std::vector<TagSequence> gold_tags;
  std::vector<crf::Labels> gold_labels;  // gold_tags mapped into the scheme
  std::vector<std::vector<LocationTarget>> location_targets;
  std::vector<std::string> annotation_errors;

  bool has_gold() const { return !gold_tags.empty() && annotation_errors.empty(); }
};

// The result points into `paragraph`, which must outlive it.
PreparedParagraph prepare(const Paragraph& paragraph, const crf::TagScheme& scheme);
PreparedParagraph prepare(Paragraph&&, const crf::TagScheme&) = delete;

struct ParagraphGraph {
  std::vector<Var> token_states;
  std::vector<Var> emissions;  // per entity, [T, K]
  Var transitions;             // effective [K + 2, K + 2]
  std::vector<std::vector<Var>> location_logits;  // per entity, per step
};

ParagraphGraph build_graph(Tape& tape, const Model& model, const PreparedParagraph& prepared,
                           bool with_locations = true);

// Transition matrix as seen by the CRF: forbidden pairs at kForbidden and
// gradient flowing only into allowed entries. Constant zeros (plus the
// forbidden mask) when transitions are disabled.
Var constrained_transitions(Tape& tape, const Model& model);

struct ParagraphLoss {
  Var total;
  double state_nll = 0.0;      // summed over entities
  double location_loss = 0.0;  // mean over unmasked cells
};

// total = sum_e NLL_e + lambda * location_loss. Requires gold annotation.
ParagraphLoss paragraph_loss(Tape& tape, const Model& model, const PreparedParagraph& prepared,
                             double lambda);

}  // namespace entrack
