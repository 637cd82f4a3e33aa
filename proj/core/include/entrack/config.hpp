// Flat key = value configuration shared by the command line and checkpoints.
//
// File syntax: one "key = value" per line, '#' starts a comment, blank lines
// are ignored, a key may appear once. Command-line flags are applied after
// the file, so flags win.

#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "entrack/model.hpp"
#include "entrack/trainer.hpp"

namespace entrack {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using KeyValues = std::vector<std::pair<std::string, std::string>>;

KeyValues parse_key_values(std::string_view text);
KeyValues load_key_values(const std::string& path);

struct RunConfig {
  ModelConfig model;
  TrainConfig train;
  std::string corpus;      // training or evaluation corpus
  std::string dev_corpus;  // optional early-stopping corpus
  std::string embeddings;
  std::string params;  // checkpoint path
  std::string out;
};

// Applies one key. Throws ConfigError on an unknown key or a bad value.
void apply_setting(RunConfig& config, std::string_view key, std::string_view value);
void apply_settings(RunConfig& config, const KeyValues& values);

// Model settings only, in a fixed order; used as the checkpoint echo.
KeyValues model_settings(const ModelConfig& config);
ModelConfig parse_model_settings(const KeyValues& values);

// Every setting, in a fixed order, as "key = value" lines.
std::string describe(const RunConfig& config);

bool parse_bool(std::string_view text);

}  // namespace entrack
