#include "entrack/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "entrack/location.hpp"
#include "entrack/network.hpp"

namespace entrack {

using json = nlohmann::json;

GridRow fill_grid(const TagSequence& tags, const LocationPicker& pick) {
  GridRow row(tags.size() + 1, Cell::absent());
  if (tags.empty()) return row;
  const Tag first = tags.front();
  if (first == Tag::E || first == Tag::M || first == Tag::D) {
    row[0] = pick(PickKind::Initial, 0, Cell::absent());
  }
  for (std::size_t t = 0; t < tags.size(); ++t) {
    const Cell& prev = row[t];
    switch (tags[t]) {
      case Tag::OB:
      case Tag::OA:
      case Tag::D:
        row[t + 1] = Cell::absent();
        break;
      case Tag::C:
        row[t + 1] = pick(PickKind::Create, t, prev);
        break;
      case Tag::E:
        row[t + 1] = prev;
        break;
      case Tag::M:
        row[t + 1] = pick(PickKind::Move, t, prev);
        break;
    }
  }
  return row;
}

EntityGrid ParagraphPrediction::grid() const {
  EntityGrid g;
  for (const auto& e : entities) g.rows.push_back(e.row);
  return g;
}

namespace {

Cell pick_location(const std::vector<LocationCandidate>& candidates, const Tensor& logits, PickKind kind,
                   const Cell& previous) {
  const bool exclude = kind == PickKind::Move && previous.kind == Cell::Kind::Location;
  const std::string prev_text = exclude ? normalize_location(previous.location) : std::string();
  std::size_t best = candidates.size();
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const auto& c = candidates[i];
    if (kind == PickKind::Move && !c.is_span()) continue;
    if (exclude && c.normalized_text == prev_text) continue;
    if (best == candidates.size() || logits.values[i] > logits.values[best]) best = i;
  }
  if (best == candidates.size() || !candidates[best].is_span()) return Cell::unknown();
  return Cell::at(candidates[best].normalized_text);
}

}  // namespace

ParagraphPrediction decode(const Model& model, const Paragraph& paragraph) {
  const auto& scheme = model.scheme();
  PreparedParagraph prepared = prepare(paragraph, scheme);
  Tape tape;
  ParagraphGraph graph = build_graph(tape, model, prepared, /*with_locations=*/true);

  ParagraphPrediction out;
  out.id = paragraph.id;
  for (std::size_t e = 0; e < paragraph.entities.size(); ++e) {
    EntityPrediction p;
    p.name = paragraph.entities[e].canonical_name;
    auto decoded = crf::viterbi(graph.emissions[e].value(), graph.transitions.value(), scheme);
    p.tags = scheme.lift(decoded.labels);
    const auto& logits = graph.location_logits[e];
    p.row = fill_grid(p.tags, [&](PickKind kind, std::size_t step, const Cell& previous) {
      return pick_location(prepared.candidates, logits[step].value(), kind, previous);
    });
    out.entities.push_back(std::move(p));
  }
  return out;
}

std::vector<ParagraphPrediction> decode_corpus(const Model& model, const std::vector<Paragraph>& corpus,
                                               std::size_t threads) {
  std::vector<ParagraphPrediction> out(corpus.size());
  threads = std::max<std::size_t>(1, std::min(threads, corpus.size()));
  if (threads == 1) {
    for (std::size_t i = 0; i < corpus.size(); ++i) out[i] = decode(model, corpus[i]);
  } else {
    std::vector<std::exception_ptr> errors(threads);
    std::vector<std::thread> workers;
    for (std::size_t w = 0; w < threads; ++w) {
      workers.emplace_back([&, w] {
        try {
          for (std::size_t i = w; i < corpus.size(); i += threads) out[i] = decode(model, corpus[i]);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    for (auto& t : workers) t.join();
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const ParagraphPrediction& a, const ParagraphPrediction& b) { return a.id < b.id; });
  return out;
}

std::string write_predictions(const std::vector<ParagraphPrediction>& predictions,
                              std::string_view scheme_name) {
  std::string out;
  for (const auto& p : predictions) {
    json entities = json::array();
    for (const auto& e : p.entities) {
      json tags = json::array();
      for (Tag t : e.tags) tags.push_back(std::string(tag_name(t)));
      json cells = json::array();
      for (const auto& c : e.row) cells.push_back(c.text());
      entities.push_back({{"name", e.name}, {"tags", tags}, {"grid", cells}});
    }
    json record = {{"id", p.id},
                   {"entities", entities},
                   {"meta", {{"scheme", std::string(scheme_name)}, {"initial_location", "step1_distribution"}}}};
    out += record.dump();
    out += '\n';
  }
  return out;
}

void save_predictions(const std::string& path, const std::vector<ParagraphPrediction>& predictions,
                      std::string_view scheme_name) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open '" + path + "' for writing");
  f << write_predictions(predictions, scheme_name);
  if (!f) throw std::runtime_error("write failed for '" + path + "'");
}

std::vector<ParagraphPrediction> parse_predictions(std::string_view text) {
  std::vector<ParagraphPrediction> out;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json record;
    try {
      record = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError("", line_no, "(record)", e.what());
    }
    ParagraphPrediction p;
    try {
      p.id = record.at("id").get<std::string>();
      for (const auto& e : record.at("entities")) {
        EntityPrediction ep;
        ep.name = e.at("name").get<std::string>();
        for (const auto& t : e.at("tags")) {
          auto tag = parse_tag(t.get<std::string>());
          if (!tag) throw ParseError(p.id, line_no, "tags", "unknown tag '" + t.get<std::string>() + "'");
          ep.tags.push_back(*tag);
        }
        for (const auto& c : e.at("grid")) ep.row.push_back(Cell::parse(c.get<std::string>()));
        if (ep.row.size() != ep.tags.size() + 1) {
          throw ParseError(p.id, line_no, "grid", "expected " + std::to_string(ep.tags.size() + 1) + " cells");
        }
        p.entities.push_back(std::move(ep));
      }
    } catch (const json::exception& e) {
      throw ParseError(p.id, line_no, "(record)", e.what());
    }
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<ParagraphPrediction> load_predictions(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_predictions(ss.str());
}

std::string export_grid_tsv(const std::vector<ParagraphPrediction>& predictions) {
  std::string out;
  for (const auto& p : predictions) {
    for (const auto& e : p.entities) {
      for (std::size_t col = 0; col < e.row.size(); ++col) {
        const Cell& c = e.row[col];
        std::string state = "NONE";
        if (col > 0) {
          switch (e.tags[col - 1]) {
            case Tag::C: state = "CREATE"; break;
            case Tag::D: state = "DESTROY"; break;
            case Tag::M: state = "MOVE"; break;
            default: break;
          }
        }
        out += p.id + '\t' + std::to_string(col) + '\t' + e.name + '\t' + state + '\t' + c.text() + '\n';
      }
    }
  }
  return out;
}

}  // namespace entrack
