// Copyright 2026 The cfattest Authors
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

#include "corpus.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace cfattest::testing {

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Program load_corpus_program(const std::string& stem) {
  return parse_program(read_file(std::string(CFATTEST_PROGRAMS_DIR) + "/" + stem + ".s"), stem);
}

const std::vector<CorpusCase>& corpus_cases() {
  static const std::vector<CorpusCase> cases = {
      {"diamond", {0}},
      {"diamond", {1, 0}},
      {"diamond", {3, 0, 1, 1}},
      {"diamond", {6, 1, 0, 1, 0, 1, 0}},
      {"pump", {1234, 1234, 4, 0}},
      {"pump", {1, 1234, 4, 0}},
      {"pump", {7, 7, 1, 0}},
      {"pump", {7, 7, 0, 0}},
      {"dispatch", {0}},
      {"dispatch", {5, 0, 1, 2, 0, 1}},
      {"dispatch", {3, 2, 2, 2}},
      {"nested", {0}},
      {"nested", {1, 5}},
      {"nested", {5, 9, 3, 7, 1, 4}},
      {"nested", {8, 8, 7, 6, 5, 4, 3, 2, 1}},
      {"recursion", {0}},
      {"recursion", {1}},
      {"recursion", {5}},
  };
  return cases;
}

}  // namespace cfattest::testing
