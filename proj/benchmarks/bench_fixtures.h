// Copyright 2026 The Sentiscope Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
// https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#ifndef SENTISCOPE_BENCHMARKS_BENCH_FIXTURES_H_
#define SENTISCOPE_BENCHMARKS_BENCH_FIXTURES_H_

#include <cstdint>
#include <random>
#include <string>

#include "sentiscope/backends.h"

namespace sentiscope::bench {

inline LexiconBackend MakeBackend() {
  auto lexicon = ParseLexicon(
      "novel\t+1\nrobust\t+1\neffective\t+1\npromising\t+1\n"
      "limited\t-1\npoor\t-1\nweak\t-1\nfails\t-1\n");
  return LexiconBackend(*lexicon);
}

// Mix of lexicon words and neutral fillers, `words` long.
inline std::string MakeText(int64_t words, uint64_t seed = 1) {
  static const char* const kWords[] = {"novel", "method", "limited", "results", "the",
                                       "robust", "data", "poor", "of", "effective"};
  std::mt19937_64 rng(seed);
  std::string text;
  for (int64_t i = 0; i < words; ++i) {
    if (i > 0) text += ' ';
    text += kWords[rng() % std::size(kWords)];
  }
  return text;
}

}  // namespace sentiscope::bench

#endif  // SENTISCOPE_BENCHMARKS_BENCH_FIXTURES_H_
