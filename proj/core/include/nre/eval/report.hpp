// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>

#include <nlohmann/json.hpp>

namespace nre::eval {

struct EvalReport {
  std::string task;
  std::map<std::string, double> metrics;
  /// Unbounded auxiliary values (mean scores, counts); not range-checked.
  std::map<std::string, double> diagnostics;
  nlohmann::json config = nlohmann::json::object();
  std::uint64_t seed = 0;

  /// Throws NumericError when a metric leaves [0,1].
  void add(const std::string& name, double value);
  nlohmann::json to_json() const;
  void write_json(const std::filesystem::path& path) const;
};

}  // namespace nre::eval
