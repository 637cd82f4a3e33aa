#include "entrack/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace entrack {

using nlohmann::json;

ParseError::ParseError(const std::string& paragraph_id, std::size_t line, const std::string& field,
                       const std::string& message)
    : std::runtime_error("paragraph '" + paragraph_id + "', line " + std::to_string(line) +
                         ", field '" + field + "': " + message),
      paragraph_id_(paragraph_id),
      line_(line),
      field_(field) {}

std::string_view pos_name(Pos pos) {
  switch (pos) {
    case Pos::Noun: return "NOUN";
    case Pos::Adj: return "ADJ";
    case Pos::Verb: return "VERB";
    case Pos::Other: return "OTHER";
  }
  return "OTHER";
}

std::optional<Pos> parse_pos(std::string_view text) {
  if (text == "NOUN") return Pos::Noun;
  if (text == "ADJ") return Pos::Adj;
  if (text == "VERB") return Pos::Verb;
  if (text == "OTHER") return Pos::Other;
  return std::nullopt;
}

std::string_view tag_name(Tag tag) {
  switch (tag) {
    case Tag::OB: return "O_B";
    case Tag::OA: return "O_A";
    case Tag::C: return "C";
    case Tag::D: return "D";
    case Tag::E: return "E";
    case Tag::M: return "M";
  }
  return "?";
}

std::optional<Tag> parse_tag(std::string_view text) {
  for (std::size_t i = 0; i < kTagCount; ++i) {
    if (tag_name(static_cast<Tag>(i)) == text) return static_cast<Tag>(i);
  }
  return std::nullopt;
}

std::string Cell::text() const {
  switch (kind) {
    case Kind::Absent: return "-";
    case Kind::Unknown: return "?";
    case Kind::Location: return location;
  }
  return "-";
}

Cell Cell::parse(std::string_view text) {
  if (text == "-") return absent();
  if (text == "?") return unknown();
  return at(std::string(text));
}

std::size_t Paragraph::token_count() const {
  std::size_t n = 0;
  for (const auto& s : sentences) n += s.size();
  return n;
}

std::size_t Paragraph::sentence_offset(std::size_t t) const {
  std::size_t n = 0;
  for (std::size_t i = 0; i < t; ++i) n += sentences[i].size();
  return n;
}

std::string to_lower(std::string_view text) {
  std::string out(text);
  for (auto& ch : out) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  return out;
}

std::vector<std::string> split_words(std::string_view text) {
  std::vector<std::string> words;
  std::string current;
  for (char ch : text) {
    if (std::isspace(static_cast<unsigned char>(ch))) {
      if (!current.empty()) words.push_back(std::move(current));
      current.clear();
    } else {
      current.push_back(ch);
    }
  }
  if (!current.empty()) words.push_back(std::move(current));
  return words;
}

std::string normalize_location(std::string_view text) {
  auto words = split_words(to_lower(text));
  std::size_t first = 0;
  while (first < words.size() &&
         (words[first] == "the" || words[first] == "a" || words[first] == "an")) {
    ++first;
  }
  std::string out;
  for (std::size_t i = first; i < words.size(); ++i) {
    if (!out.empty()) out.push_back(' ');
    out += words[i];
  }
  return out;
}

namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

Paragraph parse_record(const json& rec, std::size_t line) {
  Paragraph p;
  if (!rec.is_object()) throw ParseError("?", line, "record", "expected a JSON object");
  if (!rec.contains("id") || !rec["id"].is_string()) {
    throw ParseError("?", line, "id", "missing or not a string");
  }
  p.id = rec["id"].get<std::string>();
  auto fail = [&](const std::string& field, const std::string& msg) {
    return ParseError(p.id, line, field, msg);
  };

  if (!rec.contains("sentences") || !rec["sentences"].is_array()) {
    throw fail("sentences", "missing or not an array");
  }
  const auto& sentences = rec["sentences"];
  if (sentences.empty()) throw fail("sentences", "paragraph has no sentences");
  for (std::size_t t = 0; t < sentences.size(); ++t) {
    const auto& s = sentences[t];
    const std::string field = "sentences[" + std::to_string(t) + "]";
    if (!s.is_array() || s.empty()) throw fail(field, "sentence must be a non-empty token array");
    std::vector<Token> tokens;
    for (std::size_t i = 0; i < s.size(); ++i) {
      const auto& tok = s[i];
      const std::string tfield = field + "[" + std::to_string(i) + "]";
      if (!tok.is_object()) throw fail(tfield, "token must be an object");
      if (!tok.contains("surface") || !tok["surface"].is_string()) {
        throw fail(tfield + ".surface", "missing or not a string");
      }
      if (!tok.contains("pos") || !tok["pos"].is_string()) {
        throw fail(tfield + ".pos", "missing or not a string");
      }
      Token token;
      token.surface = tok["surface"].get<std::string>();
      if (token.surface.empty()) throw fail(tfield + ".surface", "empty surface");
      auto pos = parse_pos(tok["pos"].get<std::string>());
      if (!pos) throw fail(tfield + ".pos", "unknown coarse tag '" + tok["pos"].get<std::string>() + "'");
      token.pos = *pos;
      if (tok.contains("is_verb")) {
        if (!tok["is_verb"].is_boolean()) throw fail(tfield + ".is_verb", "not a boolean");
        token.is_verb = tok["is_verb"].get<bool>();
      } else {
        token.is_verb = token.pos == Pos::Verb;
      }
      if (token.is_verb != (token.pos == Pos::Verb)) {
        throw fail(tfield + ".is_verb", "verb flag disagrees with pos " + std::string(pos_name(token.pos)));
      }
      tokens.push_back(std::move(token));
    }
    p.sentences.push_back(std::move(tokens));
  }

  if (!rec.contains("entities") || !rec["entities"].is_array() || rec["entities"].empty()) {
    throw fail("entities", "missing or empty");
  }
  for (std::size_t k = 0; k < rec["entities"].size(); ++k) {
    const auto& e = rec["entities"][k];
    const std::string field = "entities[" + std::to_string(k) + "]";
    Entity entity;
    if (!e.is_object() || !e.contains("name") || !e["name"].is_string()) {
      throw fail(field + ".name", "missing or not a string");
    }
    std::string name = e["name"].get<std::string>();
    if (e.contains("aliases")) {
      if (!e["aliases"].is_array()) throw fail(field + ".aliases", "not an array");
      for (const auto& a : e["aliases"]) {
        if (!a.is_string()) throw fail(field + ".aliases", "alias is not a string");
        entity.aliases.push_back(trim(a.get<std::string>()));
      }
      entity.canonical_name = trim(name);
    } else {
      std::stringstream ss(name);
      std::string part;
      while (std::getline(ss, part, ';')) {
        auto a = trim(part);
        if (!a.empty()) entity.aliases.push_back(a);
      }
      if (entity.aliases.empty()) throw fail(field + ".name", "empty entity name");
      entity.canonical_name = entity.aliases.front();
    }
    if (std::find(entity.aliases.begin(), entity.aliases.end(), entity.canonical_name) ==
        entity.aliases.end()) {
      throw fail(field + ".aliases", "canonical name '" + entity.canonical_name + "' is not an alias");
    }
    p.entities.push_back(std::move(entity));
  }

  if (rec.contains("grid") && !rec["grid"].is_null()) {
    const auto& g = rec["grid"];
    if (!g.is_array()) throw fail("grid", "not an array");
    if (g.size() != p.entities.size()) {
      throw fail("grid", "has " + std::to_string(g.size()) + " rows for " +
                             std::to_string(p.entities.size()) + " entities");
    }
    EntityGrid grid;
    for (std::size_t k = 0; k < g.size(); ++k) {
      const std::string field = "grid[" + std::to_string(k) + "]";
      if (!g[k].is_array()) throw fail(field, "row is not an array");
      if (g[k].size() != p.steps() + 1) {
        throw fail(field, "row has " + std::to_string(g[k].size()) + " cells, expected " +
                              std::to_string(p.steps() + 1) + " (sentences + 1)");
      }
      GridRow row;
      for (const auto& c : g[k]) {
        if (!c.is_string()) throw fail(field, "cell is not a string");
        auto text = trim(c.get<std::string>());
        if (text.empty()) throw fail(field, "empty cell");
        row.push_back(Cell::parse(text));
      }
      grid.rows.push_back(std::move(row));
    }
    p.grid = std::move(grid);
  }
  return p;
}

}  // namespace

std::vector<Paragraph> parse_canonical(std::string_view text) {
  std::vector<Paragraph> out;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (trim(line).empty()) continue;
    json rec;
    try {
      rec = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError("?", line_no, "record", std::string("invalid JSON: ") + e.what());
    }
    out.push_back(parse_record(rec, line_no));
  }
  return out;
}

std::vector<Paragraph> load_canonical(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open corpus file " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return parse_canonical(buf.str());
  } catch (const ParseError& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
}

std::string write_canonical(std::span<const Paragraph> paragraphs) {
  std::string out;
  for (const auto& p : paragraphs) {
    json rec;
    rec["id"] = p.id;
    json sentences = json::array();
    for (const auto& s : p.sentences) {
      json toks = json::array();
      for (const auto& t : s) {
        toks.push_back({{"surface", t.surface}, {"pos", pos_name(t.pos)}, {"is_verb", t.is_verb}});
      }
      sentences.push_back(std::move(toks));
    }
    rec["sentences"] = std::move(sentences);
    json entities = json::array();
    for (const auto& e : p.entities) {
      entities.push_back({{"name", e.canonical_name}, {"aliases", e.aliases}});
    }
    rec["entities"] = std::move(entities);
    if (p.grid) {
      json rows = json::array();
      for (const auto& row : p.grid->rows) {
        json cells = json::array();
        for (const auto& c : row) cells.push_back(c.text());
        rows.push_back(std::move(cells));
      }
      rec["grid"] = std::move(rows);
    }
    out += rec.dump();
    out.push_back('\n');
  }
  return out;
}

void save_canonical(const std::string& path, std::span<const Paragraph> paragraphs) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write corpus file " + path);
  out << write_canonical(paragraphs);
  if (!out) throw std::runtime_error("write failed for " + path);
}

TagSequence gold_tags_from_grid(const GridRow& row) {
  if (row.size() < 2) throw AnnotationError("grid row needs at least 2 columns");
  TagSequence tags;
  tags.reserve(row.size() - 1);
  bool destroyed = false;
  for (std::size_t t = 1; t < row.size(); ++t) {
    const Cell& prev = row[t - 1];
    const Cell& cur = row[t];
    if (!prev.exists() && !cur.exists()) {
      tags.push_back(destroyed ? Tag::OA : Tag::OB);
    } else if (!prev.exists()) {
      if (destroyed) {
        throw AnnotationError("entity re-created at step " + std::to_string(t) +
                              " after being destroyed");
      }
      tags.push_back(Tag::C);
    } else if (!cur.exists()) {
      tags.push_back(Tag::D);
      destroyed = true;
    } else if (prev.kind == Cell::Kind::Location && cur.kind == Cell::Kind::Location &&
               normalize_location(prev.location) != normalize_location(cur.location)) {
      tags.push_back(Tag::M);
    } else {
      tags.push_back(Tag::E);
    }
  }
  return tags;
}

std::vector<bool> existence_from_tags(const TagSequence& tags) {
  std::vector<bool> exists(tags.size() + 1, false);
  if (!tags.empty()) {
    exists[0] = tags[0] == Tag::E || tags[0] == Tag::M || tags[0] == Tag::D;
  }
  for (std::size_t t = 0; t < tags.size(); ++t) {
    exists[t + 1] = tags[t] == Tag::C || tags[t] == Tag::E || tags[t] == Tag::M;
  }
  return exists;
}

GoldTags derive_gold_tags(const Paragraph& paragraph) {
  GoldTags out;
  if (!paragraph.grid) {
    out.errors.push_back(paragraph.id + ": no gold grid");
    return out;
  }
  for (std::size_t k = 0; k < paragraph.grid->rows.size(); ++k) {
    try {
      out.per_entity.push_back(gold_tags_from_grid(paragraph.grid->rows[k]));
    } catch (const AnnotationError& e) {
      out.per_entity.push_back({});
      out.errors.push_back(paragraph.id + " entity '" + paragraph.entities[k].canonical_name +
                           "': " + e.what());
    }
  }
  return out;
}

std::vector<LocationTarget> gold_location_targets(const GridRow& row,
                                                  std::span<const LocationCandidate> candidates) {
  std::optional<std::size_t> unk;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (candidates[i].kind == LocationCandidate::Kind::Unk) unk = i;
  }
  if (!unk) throw std::invalid_argument("candidate list has no UNK entry");
  std::vector<LocationTarget> targets;
  for (std::size_t t = 1; t < row.size(); ++t) {
    const Cell& cell = row[t];
    if (!cell.exists()) {
      targets.push_back(std::nullopt);
    } else if (cell.kind == Cell::Kind::Unknown) {
      targets.push_back(unk);
    } else {
      const auto wanted = normalize_location(cell.location);
      LocationTarget hit = unk;
      for (std::size_t i = 0; i < candidates.size(); ++i) {
        if (candidates[i].is_span() && candidates[i].normalized_text == wanted) {
          hit = i;
          break;
        }
      }
      targets.push_back(hit);
    }
  }
  return targets;
}

}  // namespace entrack
