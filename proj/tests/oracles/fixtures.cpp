#include "fixtures.hpp"

#include <algorithm>
#include <stdexcept>

#include "oracles.hpp"

namespace oracle {

namespace {

using entrack::EventAnswer;

std::string norm(const std::string& s) { return s == "?" ? s : entrack::normalize_location(s); }

// "no" or "<step>@<location>"
EventAnswer single_event(const std::string& text) {
  EventAnswer a;
  if (text == "no") return a;
  const auto at = text.find('@');
  if (at == std::string::npos) throw std::runtime_error("bad event: " + text);
  a.yes = true;
  a.steps = {std::stoul(text.substr(0, at))};
  a.locations = {norm(text.substr(at + 1))};
  return a;
}

// "no" or "<step>:<from>><to>,..."
EventAnswer moves(const std::string& text) {
  EventAnswer a;
  if (text == "no") return a;
  a.yes = true;
  for (const auto& item : split(text, ',')) {
    const auto colon = item.find(':');
    const auto arrow = item.find('>');
    if (colon == std::string::npos || arrow == std::string::npos) throw std::runtime_error("bad move: " + item);
    a.steps.push_back(std::stoul(item.substr(0, colon)));
    a.locations.push_back(norm(item.substr(colon + 1, arrow - colon - 1)) + "->" + norm(item.substr(arrow + 1)));
  }
  return a;
}

std::vector<std::string> names(const std::string& text) {
  std::vector<std::string> out;
  for (const auto& n : split(text, ',')) {
    if (!trim(n).empty()) out.push_back(trim(n));
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::string> items(const std::string& text) {
  std::vector<std::string> out;
  for (const auto& n : split(text, ';')) {
    if (!trim(n).empty()) out.push_back(trim(n));
  }
  return out;
}

}  // namespace

std::vector<Task1Case> load_task1_cases() {
  std::vector<Task1Case> out;
  const auto lines = read_lines(fixture_path("rule_oracle_task1.tsv"));
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (trim(lines[i]).empty() || lines[i][0] == '#') continue;
    const auto f = split(lines[i], '\t');
    Task1Case c;
    c.line = i + 1;
    c.grid_text = f.at(0);
    c.row = parse_row(f.at(0));
    if (f.at(1) != "ERROR") {
      if (f.size() != 5) throw std::runtime_error("task1 fixture line " + std::to_string(i + 1) + ": 5 fields");
      c.tags = from_letters(f[1]);
      c.answers.created = single_event(f[2]);
      c.answers.moved = moves(f[3]);
      c.answers.destroyed = single_event(f[4]);
    }
    out.push_back(std::move(c));
  }
  return out;
}

std::vector<Task2Case> load_task2_cases() {
  std::vector<Task2Case> out;
  for (const auto& raw : read_lines(fixture_path("rule_oracle_task2.txt"))) {
    const auto line = trim(raw);
    if (line.empty() || line[0] == '#') continue;
    if (line.rfind("case ", 0) == 0) {
      out.push_back({line.substr(5), {}, {}, {}});
      continue;
    }
    if (out.empty()) throw std::runtime_error("task2 fixture: content before first case");
    auto& c = out.back();
    const auto colon = line.find(':');
    const auto key = line.substr(0, colon);
    const auto value = trim(line.substr(colon + 1));
    if (key.rfind("row ", 0) == 0) {
      c.entities.push_back(trim(key.substr(4)));
      c.rows.push_back(parse_row(value));
    } else if (key == "inputs") {
      c.expected.inputs = names(value);
    } else if (key == "outputs") {
      c.expected.outputs = names(value);
    } else if (key == "conversions") {
      for (const auto& item : items(value)) {
        // d+d > c+c @step location
        const auto gt = item.find('>');
        const auto at = item.find('@');
        const auto space = item.find(' ', at);
        entrack::Conversion conv;
        for (const auto& n : split(item.substr(0, gt), '+')) conv.destroyed.push_back(trim(n));
        for (const auto& n : split(item.substr(gt + 1, at - gt - 1), '+')) conv.created.push_back(trim(n));
        std::sort(conv.destroyed.begin(), conv.destroyed.end());
        std::sort(conv.created.begin(), conv.created.end());
        conv.step = std::stoul(item.substr(at + 1, space - at - 1));
        conv.location = norm(trim(item.substr(space + 1)));
        c.expected.conversions.push_back(conv);
      }
    } else if (key == "moves") {
      for (const auto& item : items(value)) {
        // entity@step:from>to
        const auto at = item.find('@');
        const auto c2 = item.find(':', at);
        const auto gt = item.find('>', c2);
        c.expected.moves.push_back({trim(item.substr(0, at)), std::stoul(item.substr(at + 1, c2 - at - 1)),
                                    norm(item.substr(c2 + 1, gt - c2 - 1)), norm(item.substr(gt + 1))});
      }
      std::sort(c.expected.moves.begin(), c.expected.moves.end());
    } else {
      throw std::runtime_error("task2 fixture: unknown key " + key);
    }
  }
  return out;
}

}  // namespace oracle
