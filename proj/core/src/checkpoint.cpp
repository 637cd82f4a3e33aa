#include "entrack/checkpoint.hpp"

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "entrack/config.hpp"

namespace entrack {

namespace {

constexpr std::string_view kMagic = "entrack-checkpoint";

std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t x) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(x));
  return buf;
}

class Lines {
 public:
  explicit Lines(std::string_view text) : text_(text) {}

  bool done() const { return pos_ >= text_.size(); }
  std::size_t line() const { return line_; }

  std::string_view next() {
    if (done()) fail("unexpected end of file");
    auto nl = text_.find('\n', pos_);
    if (nl == std::string_view::npos) nl = text_.size();
    auto out = text_.substr(pos_, nl - pos_);
    pos_ = nl + 1;
    ++line_;
    return out;
  }

  [[noreturn]] void fail(const std::string& message) const {
    throw CheckpointError("checkpoint line " + std::to_string(line_) + ": " + message);
  }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t line_ = 0;
};

std::vector<std::string_view> fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && line[i] == ' ') ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

std::size_t to_size(const Lines& lines, std::string_view s) {
  std::size_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) lines.fail("expected an integer, got '" + std::string(s) + "'");
  return v;
}

}  // namespace

std::string write_checkpoint(const Model& model) {
  std::string out;
  out += std::string(kMagic) + " " + std::to_string(kCheckpointVersion) + "\n[config]\n";
  for (const auto& [k, v] : model_settings(model.config())) out += k + " = " + v + "\n";
  out += "[vocab] " + std::to_string(model.vocab().size()) + "\n";
  for (const auto& w : model.vocab()) out += w + "\n";
  const auto& store = model.store();
  out += "[tensors] " + std::to_string(store.size()) + "\n";
  char buf[64];
  for (ParamId p = 0; p < store.size(); ++p) {
    const auto& t = store.tensor(p);
    out += store.name(p) + (store.trainable(p) ? " 1 " : " 0 ") + std::to_string(t.shape.size());
    for (auto d : t.shape) out += " " + std::to_string(d);
    out += "\n";
    for (std::size_t i = 0; i < t.values.size(); ++i) {
      auto [end, ec] = std::to_chars(buf, buf + sizeof buf, t.values[i], std::chars_format::hex);
      (void)ec;
      if (i > 0) out += ' ';
      out.append(buf, end);
    }
    out += "\n";
  }
  out += "[end]\n";
  out += "checksum " + hex64(fnv1a(out)) + "\n";
  return out;
}

Model read_checkpoint(std::string_view text, const ModelConfig* expected) {
  const auto marker = text.rfind("checksum ");
  if (marker == std::string_view::npos) throw CheckpointError("checkpoint has no checksum line");
  {
    auto stated = text.substr(marker + 9);
    while (!stated.empty() && (stated.back() == '\n' || stated.back() == '\r')) stated.remove_suffix(1);
    if (stated != hex64(fnv1a(text.substr(0, marker)))) {
      throw CheckpointError("checkpoint checksum mismatch (file is corrupt or was edited)");
    }
  }
  Lines lines(text.substr(0, marker));

  auto header = fields(lines.next());
  if (header.size() != 2 || header[0] != kMagic) lines.fail("not an entrack checkpoint");
  if (to_size(lines, header[1]) != static_cast<std::size_t>(kCheckpointVersion)) {
    lines.fail("unsupported checkpoint version " + std::string(header[1]) + " (this build reads version " +
               std::to_string(kCheckpointVersion) + ")");
  }
  if (lines.next() != "[config]") lines.fail("expected [config]");
  std::string config_text;
  std::string_view line;
  while (!(line = lines.next()).starts_with("[vocab]")) {
    config_text += line;
    config_text += '\n';
  }
  ModelConfig config;
  try {
    config = parse_model_settings(parse_key_values(config_text));
  } catch (const ConfigError& e) {
    lines.fail(std::string("bad config echo: ") + e.what());
  }
  if (expected != nullptr && !(*expected == config)) {
    std::string diff;
    auto want = model_settings(*expected);
    auto have = model_settings(config);
    for (std::size_t i = 0; i < want.size(); ++i) {
      if (want[i].second != have[i].second) {
        diff += " " + want[i].first + "=" + have[i].second + " (expected " + want[i].second + ")";
      }
    }
    throw CheckpointError("checkpoint was trained with a different configuration:" + diff);
  }

  auto vh = fields(line);
  if (vh.size() != 2) lines.fail("expected '[vocab] <n>'");
  std::vector<std::string> vocab(to_size(lines, vh[1]));
  for (auto& w : vocab) w = std::string(lines.next());

  auto th = fields(lines.next());
  if (th.size() != 2 || th[0] != "[tensors]") lines.fail("expected '[tensors] <count>'");
  const std::size_t count = to_size(lines, th[1]);
  ParameterStore store;
  for (std::size_t p = 0; p < count; ++p) {
    auto f = fields(lines.next());
    if (f.size() < 3) lines.fail("bad tensor header");
    const std::size_t rank = to_size(lines, f[2]);
    if (f.size() != 3 + rank) lines.fail("tensor header rank does not match its dimensions");
    Shape shape;
    for (std::size_t i = 0; i < rank; ++i) shape.push_back(to_size(lines, f[3 + i]));
    Tensor t = Tensor::zeros(shape);
    auto vals = fields(lines.next());
    if (vals.size() != t.size()) {
      lines.fail("tensor '" + std::string(f[0]) + "' has " + std::to_string(vals.size()) + " values, expected " +
                 std::to_string(t.size()));
    }
    for (std::size_t i = 0; i < vals.size(); ++i) {
      auto [ptr, ec] = std::from_chars(vals[i].data(), vals[i].data() + vals[i].size(), t.values[i],
                                       std::chars_format::hex);
      if (ec != std::errc() || ptr != vals[i].data() + vals[i].size()) lines.fail("bad value in tensor");
    }
    store.add(std::string(f[0]), std::move(t), f[1] == "1");
  }
  if (lines.next() != "[end]") lines.fail("expected [end]");
  try {
    return Model::bind(config, std::move(vocab), std::move(store));
  } catch (const std::exception& e) {
    throw CheckpointError(std::string("checkpoint tensors do not fit its configuration: ") + e.what());
  }
}

void save_checkpoint(const std::string& path, const Model& model) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw CheckpointError("cannot open '" + path + "' for writing");
  f << write_checkpoint(model);
  if (!f) throw CheckpointError("write failed for '" + path + "'");
}

Model load_checkpoint(const std::string& path, const ModelConfig* expected) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw CheckpointError("cannot open checkpoint '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  try {
    return read_checkpoint(ss.str(), expected);
  } catch (const CheckpointError& e) {
    throw CheckpointError(path + ": " + e.what());
  }
}

}  // namespace entrack
