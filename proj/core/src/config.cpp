#include "entrack/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <set>

namespace entrack {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

template <typename T>
T parse_number(std::string_view key, std::string_view text) {
  T value{};
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) {
    throw ConfigError("setting '" + std::string(key) + "': cannot parse '" + std::string(text) + "'");
  }
  return value;
}

// Shortest text that reads back to the same double.
std::string format_double(double x) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
  (void)ec;
  return std::string(buf, end);
}

std::string format_bool(bool b) { return b ? "true" : "false"; }

}  // namespace

bool parse_bool(std::string_view text) {
  if (text == "true" || text == "1" || text == "yes" || text == "on") return true;
  if (text == "false" || text == "0" || text == "no" || text == "off") return false;
  throw ConfigError("expected a boolean, got '" + std::string(text) + "'");
}

KeyValues parse_key_values(std::string_view text) {
  KeyValues out;
  std::set<std::string> seen;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    auto line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    std::string key(trim(line.substr(0, eq)));
    std::string value(trim(line.substr(eq + 1)));
    if (key.empty()) throw ConfigError("line " + std::to_string(line_no) + ": empty key");
    if (!seen.insert(key).second) {
      throw ConfigError("line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
    }
    out.emplace_back(std::move(key), std::move(value));
  }
  return out;
}

KeyValues load_key_values(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  try {
    return parse_key_values(ss.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

void apply_setting(RunConfig& c, std::string_view key, std::string_view value) {
  auto& m = c.model;
  auto& t = c.train;
  try {
    if (key == "hidden") {
      m.token_hidden = m.entity_hidden = m.location_hidden = parse_number<std::size_t>(key, value);
    } else if (key == "token_hidden") {
      m.token_hidden = parse_number<std::size_t>(key, value);
    } else if (key == "entity_hidden") {
      m.entity_hidden = parse_number<std::size_t>(key, value);
    } else if (key == "location_hidden") {
      m.location_hidden = parse_number<std::size_t>(key, value);
    } else if (key == "tagset") {
      m.scheme = crf::parse_scheme(value);
    } else if (key == "transitions") {
      m.transitions = parse_bool(value);
    } else if (key == "verb") {
      m.use_verb = parse_bool(value);
    } else if (key == "attention") {
      m.attention = parse_bool(value);
    } else if (key == "verb_mode") {
      m.verb_mode = parse_verb_mode(value);
    } else if (key == "scope") {
      m.scope = parse_scope(value);
    } else if (key == "init_range") {
      m.init_range = parse_number<double>(key, value);
    } else if (key == "seed") {
      t.seed = parse_number<std::uint64_t>(key, value);
    } else if (key == "epochs") {
      t.epochs = parse_number<std::size_t>(key, value);
    } else if (key == "lr") {
      t.learning_rate = parse_number<double>(key, value);
    } else if (key == "optimizer") {
      t.optimizer = parse_optimizer(value);
    } else if (key == "lambda") {
      t.lambda = parse_number<double>(key, value);
    } else if (key == "batch_size") {
      t.batch_size = parse_number<std::size_t>(key, value);
    } else if (key == "clip_norm") {
      t.clip_norm = parse_number<double>(key, value);
    } else if (key == "dev_fraction") {
      t.dev_fraction = parse_number<double>(key, value);
    } else if (key == "patience") {
      t.patience = parse_number<std::size_t>(key, value);
    } else if (key == "threads") {
      t.threads = parse_number<std::size_t>(key, value);
    } else if (key == "corpus") {
      c.corpus = value;
    } else if (key == "dev_corpus") {
      c.dev_corpus = value;
    } else if (key == "embeddings") {
      c.embeddings = value;
    } else if (key == "params") {
      c.params = value;
    } else if (key == "out") {
      c.out = value;
    } else {
      throw ConfigError("unknown setting '" + std::string(key) + "'");
    }
  } catch (const std::invalid_argument& e) {
    throw ConfigError("setting '" + std::string(key) + "': " + e.what());
  }
}

void apply_settings(RunConfig& config, const KeyValues& values) {
  for (const auto& [k, v] : values) apply_setting(config, k, v);
}

KeyValues model_settings(const ModelConfig& m) {
  return {
      {"token_hidden", std::to_string(m.token_hidden)},
      {"entity_hidden", std::to_string(m.entity_hidden)},
      {"location_hidden", std::to_string(m.location_hidden)},
      {"tagset", std::string(crf::scheme_name(m.scheme))},
      {"transitions", format_bool(m.transitions)},
      {"verb", format_bool(m.use_verb)},
      {"attention", format_bool(m.attention)},
      {"verb_mode", std::string(verb_mode_name(m.verb_mode))},
      {"scope", std::string(scope_name(m.scope))},
      {"init_range", format_double(m.init_range)},
  };
}

ModelConfig parse_model_settings(const KeyValues& values) {
  RunConfig c;
  for (const auto& [k, v] : values) {
    if (k == "hidden") throw ConfigError("model settings must name each hidden size");
    apply_setting(c, k, v);
  }
  return c.model;
}

std::string describe(const RunConfig& c) {
  KeyValues all = model_settings(c.model);
  const auto& t = c.train;
  KeyValues train = {
      {"seed", std::to_string(t.seed)},
      {"epochs", std::to_string(t.epochs)},
      {"lr", format_double(t.learning_rate)},
      {"optimizer", std::string(optimizer_name(t.optimizer))},
      {"lambda", format_double(t.lambda)},
      {"batch_size", std::to_string(t.batch_size)},
      {"clip_norm", format_double(t.clip_norm)},
      {"dev_fraction", format_double(t.dev_fraction)},
      {"patience", std::to_string(t.patience)},
      {"threads", std::to_string(t.threads)},
      {"corpus", c.corpus},
      {"dev_corpus", c.dev_corpus},
      {"embeddings", c.embeddings},
      {"params", c.params},
      {"out", c.out},
  };
  all.insert(all.end(), train.begin(), train.end());
  std::string out;
  for (const auto& [k, v] : all) out += k + " = " + v + "\n";
  return out;
}

}  // namespace entrack
