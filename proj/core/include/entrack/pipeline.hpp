// Pipelined inference: Viterbi state decoding per entity, then location
// prediction at C/M steps, propagated into a full grid.

#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "entrack/corpus.hpp"
#include "entrack/model.hpp"

namespace entrack {

// What a grid-fill location query is for.
enum class PickKind {
  Initial,  // column 0 of an entity that exists before the first sentence
  Create,   // location after a C step
  Move,     // location after an M step; must differ from `previous`
};

// Returns the cell to place for a location query at sentence `step`
// (0-based). `previous` is the cell in the preceding column.
using LocationPicker = std::function<Cell(PickKind kind, std::size_t step, const Cell& previous)>;

// Builds T + 1 grid columns from a tag sequence. Steps tagged O_B/O_A and
// the column after a D are ABSENT; E carries the previous location forward.
GridRow fill_grid(const TagSequence& tags, const LocationPicker& pick);

struct EntityPrediction {
  std::string name;
  TagSequence tags;
  GridRow row;
};

struct ParagraphPrediction {
  std::string id;
  std::vector<EntityPrediction> entities;

  EntityGrid grid() const;
};

// Decodes one paragraph. Location choice is the argmax of the location
// distribution (lowest index on ties); NULL or UNK become UNKNOWN; a move
// excludes the previous location, falling back to UNKNOWN when no other
// span candidate exists.
ParagraphPrediction decode(const Model& model, const Paragraph& paragraph);

// Decodes every paragraph (optionally on several threads) and returns
// predictions sorted by paragraph id.
std::vector<ParagraphPrediction> decode_corpus(const Model& model, const std::vector<Paragraph>& corpus,
                                               std::size_t threads = 1);

// Predictions file: one JSON object per line with the paragraph id, per
// entity the name, tag names and T + 1 grid cells, and a metadata block.
std::string write_predictions(const std::vector<ParagraphPrediction>& predictions,
                              std::string_view scheme_name);
void save_predictions(const std::string& path, const std::vector<ParagraphPrediction>& predictions,
                      std::string_view scheme_name);
std::vector<ParagraphPrediction> parse_predictions(std::string_view text);
std::vector<ParagraphPrediction> load_predictions(const std::string& path);

// Tab-separated grid export, one line per (paragraph, entity, column):
// id, sentence index (0 = before the process), entity, state, location.
std::string export_grid_tsv(const std::vector<ParagraphPrediction>& predictions);

}  // namespace entrack
