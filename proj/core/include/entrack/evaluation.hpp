// Sentence-level (Task 1) and document-level (Task 2) question answering
// derived from entity grids, with scorers and a metrics report.

#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "entrack/corpus.hpp"
#include "entrack/pipeline.hpp"

namespace entrack {

// Answers about one event for one entity. `steps` are 1-based sentence
// indices. `locations` holds the location after a creation, before a
// destruction, or one "from->to" pair per move; all normalized.
struct EventAnswer {
  bool yes = false;
  std::vector<std::size_t> steps;
  std::vector<std::string> locations;

  friend bool operator==(const EventAnswer&, const EventAnswer&) = default;
};

struct Task1Answers {
  EventAnswer created, moved, destroyed;
  friend bool operator==(const Task1Answers&, const Task1Answers&) = default;
};

// Answers from tags plus the grid row that carries their locations. The
// two-argument form does not re-derive tags from the row, so it also serves
// predicted rows.
Task1Answers derive_task1(const TagSequence& tags, const GridRow& row);
// Answers from a gold grid row (tags via gold_tags_from_grid).
Task1Answers derive_task1(const GridRow& row);

struct CategoryScore {
  std::size_t correct = 0;
  std::size_t total = 0;
  // Percentage; 0 over zero items.
  double score() const { return total == 0 ? 0.0 : 100.0 * static_cast<double>(correct) / total; }
};

struct Task1Scores {
  CategoryScore cat1, cat2, cat3;
  double macro() const { return (cat1.score() + cat2.score() + cat3.score()) / 3.0; }
  double micro() const;
};

struct Task1Options {
  // Moved "when": every step must match (strict) or any one suffices.
  bool strict_moves = true;
};

// Scores aligned answer lists (one entry per entity across the corpus).
Task1Scores score_task1(const std::vector<Task1Answers>& predicted, const std::vector<Task1Answers>& gold,
                        const Task1Options& options = {});

struct Conversion {
  std::vector<std::string> destroyed;  // sorted entity names
  std::vector<std::string> created;    // sorted entity names
  std::size_t step = 0;                // 1-based
  std::string location;                // normalized, "?" when undefined
  friend auto operator<=>(const Conversion&, const Conversion&) = default;
};

struct Move {
  std::string entity;
  std::size_t step = 0;  // 1-based
  std::string from, to;  // normalized
  friend auto operator<=>(const Move&, const Move&) = default;
};

struct Task2Tuples {
  std::vector<std::string> inputs;   // sorted
  std::vector<std::string> outputs;  // sorted
  std::vector<Conversion> conversions;
  std::vector<Move> moves;
  friend bool operator==(const Task2Tuples&, const Task2Tuples&) = default;
};

// `names[e]`, `tags[e]` and `rows[e]` describe entity e of one paragraph.
Task2Tuples derive_task2(const std::vector<std::string>& names, const std::vector<TagSequence>& tags,
                         const std::vector<GridRow>& rows);

struct Task2Scores {
  std::size_t predicted = 0, gold = 0, matched = 0;
  double precision() const;
  double recall() const;
  double f1() const;
};

// Micro-averaged over all tuple kinds of all paragraphs (aligned lists).
Task2Scores score_task2(const std::vector<Task2Tuples>& predicted, const std::vector<Task2Tuples>& gold);

struct EvaluationReport {
  Task1Scores task1;
  Task2Scores task2;
  std::size_t paragraphs = 0;
  std::size_t entities = 0;
  std::size_t skipped_paragraphs = 0;  // gold annotation errors

  std::string to_json() const;
  std::string to_table() const;
};

// Aligns predictions with gold paragraphs by id and entity name. Throws
// std::invalid_argument on a missing paragraph or an entity mismatch.
// Paragraphs whose gold grid has annotation errors are skipped and counted.
EvaluationReport evaluate(const std::vector<Paragraph>& gold, const std::vector<ParagraphPrediction>& predicted,
                          const Task1Options& options = {});

}  // namespace entrack
