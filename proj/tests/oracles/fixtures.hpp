// Parsers for the committed rule-oracle tables.

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "entrack/evaluation.hpp"

namespace oracle {

struct Task1Case {
  std::size_t line = 0;
  std::string grid_text;
  entrack::GridRow row;
  std::optional<entrack::TagSequence> tags;  // nullopt: the row is an annotation error
  entrack::Task1Answers answers;
};

std::vector<Task1Case> load_task1_cases();

struct Task2Case {
  std::string name;
  std::vector<std::string> entities;
  std::vector<entrack::GridRow> rows;
  entrack::Task2Tuples expected;
};

std::vector<Task2Case> load_task2_cases();

}  // namespace oracle
