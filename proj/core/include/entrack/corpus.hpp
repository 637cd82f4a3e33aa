// Data model for process paragraphs, the canonical line-delimited corpus
// format, and the rule that turns location grids into lifecycle tags.

#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "entrack/spans.hpp"

namespace entrack {

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& paragraph_id, std::size_t line, const std::string& field,
             const std::string& message);

  const std::string& paragraph_id() const { return paragraph_id_; }
  std::size_t line() const { return line_; }
  const std::string& field() const { return field_; }

 private:
  std::string paragraph_id_;
  std::size_t line_;
  std::string field_;
};

// Raised when a grid row cannot be expressed in the lifecycle tag alphabet.
class AnnotationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Pos { Noun, Adj, Verb, Other };

std::string_view pos_name(Pos pos);
std::optional<Pos> parse_pos(std::string_view text);

struct Token {
  std::string surface;
  Pos pos = Pos::Other;
  bool is_verb = false;
  std::size_t embedding_id = 0;
};

struct Entity {
  std::string canonical_name;
  std::vector<std::string> aliases;
};

struct Cell {
  enum class Kind { Absent, Unknown, Location };
  Kind kind = Kind::Absent;
  std::string location;  // Location only

  static Cell absent() { return {Kind::Absent, {}}; }
  static Cell unknown() { return {Kind::Unknown, {}}; }
  static Cell at(std::string where) { return {Kind::Location, std::move(where)}; }

  bool exists() const { return kind != Kind::Absent; }
  // "-", "?" or the location text.
  std::string text() const;
  static Cell parse(std::string_view text);

  friend bool operator==(const Cell&, const Cell&) = default;
};

using GridRow = std::vector<Cell>;

// One row per entity, each with T + 1 columns: the state before the first
// sentence and after every sentence.
struct EntityGrid {
  std::vector<GridRow> rows;
  friend bool operator==(const EntityGrid&, const EntityGrid&) = default;
};

struct Paragraph {
  std::string id;
  std::vector<std::vector<Token>> sentences;
  std::vector<Entity> entities;
  std::optional<EntityGrid> grid;

  std::size_t steps() const { return sentences.size(); }
  std::size_t token_count() const;
  // Index of the first token of sentence `t` (0-based) in the flat token list.
  std::size_t sentence_offset(std::size_t t) const;
};

// Lifecycle tags in fixed order; the order is the Viterbi tie-break order.
enum class Tag { OB = 0, OA = 1, C = 2, D = 3, E = 4, M = 5 };
inline constexpr std::size_t kTagCount = 6;

std::string_view tag_name(Tag tag);
std::optional<Tag> parse_tag(std::string_view text);

using TagSequence = std::vector<Tag>;

// Case-folded, whitespace-collapsed, leading articles removed.
std::string normalize_location(std::string_view text);
std::string to_lower(std::string_view text);
std::vector<std::string> split_words(std::string_view text);

// Parses the canonical corpus (one JSON object per line). Blank lines are
// skipped. Every record is validated; grid width must be sentence count + 1.
std::vector<Paragraph> parse_canonical(std::string_view text);
std::vector<Paragraph> load_canonical(const std::string& path);

std::string write_canonical(std::span<const Paragraph> paragraphs);
void save_canonical(const std::string& path, std::span<const Paragraph> paragraphs);

// Derives one tag per sentence from T + 1 grid cells by comparing
// consecutive columns. Throws AnnotationError on re-creation after a D.
TagSequence gold_tags_from_grid(const GridRow& row);

// Existence after each of T + 1 columns implied by a tag sequence:
// column 0 exists iff the first tag is E, M or D; column t exists iff tag t is
// C, E or M.
std::vector<bool> existence_from_tags(const TagSequence& tags);

struct GoldTags {
  std::vector<TagSequence> per_entity;
  std::vector<std::string> errors;  // one entry per flagged entity
  bool ok() const { return errors.empty(); }
};

GoldTags derive_gold_tags(const Paragraph& paragraph);

// Per-step location training target for one grid row: index into
// `candidates`, or nullopt (masked) where the entity does not exist.
// Column t + 1 of the row is the target for sentence t. A named location
// with no candidate of equal normalized text, and "?" cells, map to UNK.
using LocationTarget = std::optional<std::size_t>;
std::vector<LocationTarget> gold_location_targets(const GridRow& row,
                                                  std::span<const LocationCandidate> candidates);

}  // namespace entrack
