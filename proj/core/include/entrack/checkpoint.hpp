// Model checkpoints.
//
// Text format, version 1:
//
//   entrack-checkpoint 1
//   [config]
//   <key> = <value>            (model settings, fixed order)
//   [vocab] <n>
//   <token>                    (n lines, embedding row order)
//   [tensors] <count>
//   <name> <trainable 0|1> <rank> <dim>...
//   <values as hexadecimal floats, space separated>
//   [end]
//   checksum <fnv1a-64 of every preceding byte, 16 hex digits>
//
// Hexadecimal floats make the round trip bit-exact.

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

#include "entrack/model.hpp"

namespace entrack {

inline constexpr int kCheckpointVersion = 1;

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string write_checkpoint(const Model& model);
// Throws CheckpointError on a bad version, a checksum mismatch, malformed
// content, tensors that do not fit the echoed config, or (when `expected`
// is given) a config that differs from it.
Model read_checkpoint(std::string_view text, const ModelConfig* expected = nullptr);

void save_checkpoint(const std::string& path, const Model& model);
Model load_checkpoint(const std::string& path, const ModelConfig* expected = nullptr);

}  // namespace entrack
