// Copyright 2026 The Covertlink Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "covert/types.hpp"

namespace fixtures {

inline std::vector<std::vector<std::string>> rows(const std::string& name) {
  std::ifstream in(std::string(COVERT_FIXTURE_DIR) + "/" + name);
  if (!in) throw std::runtime_error("missing fixture " + name);
  std::vector<std::vector<std::string>> out;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream fields(line);
    std::vector<std::string> row;
    std::string f;
    while (fields >> f) row.push_back(f);
    if (!row.empty()) out.push_back(row);
  }
  return out;
}

inline covert::Bytes hex(const std::string& s) {
  covert::Bytes out;
  if (s == "-") return out;
  for (std::size_t i = 0; i + 1 < s.size(); i += 2)
    out.push_back(static_cast<covert::Byte>(std::stoul(s.substr(i, 2), nullptr, 16)));
  return out;
}

inline std::vector<double> doubles(const std::string& csv) {
  std::vector<double> out;
  std::istringstream in(csv);
  std::string f;
  while (std::getline(in, f, ',')) out.push_back(std::stod(f));
  return out;
}

}  // namespace fixtures
