// SPDX-License-Identifier: Apache-2.0
#include "nre/eval/report.hpp"

#include <cmath>
#include <fstream>

#include "nre/core/error.hpp"

namespace nre::eval {

void EvalReport::add(const std::string& name, double value) {
  if (!(value >= 0.0 && value <= 1.0)) {
    throw NumericError("metric " + name + " = " + std::to_string(value) + " outside [0,1]");
  }
  metrics[name] = value;
}

nlohmann::json EvalReport::to_json() const {
  nlohmann::json j;
  j["task"] = task;
  j["metrics"] = metrics;
  j["diagnostics"] = diagnostics;
  j["config"] = config;
  j["seed"] = seed;
  return j;
}

void EvalReport::write_json(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << to_json().dump(2) << "\n";
}

}  // namespace nre::eval
