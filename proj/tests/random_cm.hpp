/*
 * Copyright (c) 2026, The tsolive Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
*/


// Random lossy channel machines for cross-checking the reachability procedures.

#ifndef TSOLIVE_TESTS_RANDOM_CM_HPP_
#define TSOLIVE_TESTS_RANDOM_CM_HPP_

#include <random>
#include <string>

#include "tsolive/lcm.hpp"

namespace random_cm {

/// 2..5 states, one or two channels, alphabet {a, b}, 3..9 transitions.
inline tsolive::ChannelMachine Generate(std::mt19937& rng) {
  using tsolive::ChannelOp;
  auto uniform = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  tsolive::ChannelMachine cm;
  const int states = uniform(2, 5);
  for (int q = 0; q < states; ++q) cm.AddState("q" + std::to_string(q));
  const int channels = uniform(1, 2);
  for (int c = 0; c < channels; ++c) cm.AddChannel("c" + std::to_string(c));
  cm.AddSymbol("a");
  cm.AddSymbol("b");
  cm.init = 0;
  const int transitions = uniform(3, 9);
  for (int t = 0; t < transitions; ++t) {
    const auto from = static_cast<std::uint32_t>(uniform(0, states - 1));
    const auto to = static_cast<std::uint32_t>(uniform(0, states - 1));
    std::vector<ChannelOp> ops;
    const int kind = uniform(0, 4);  // nop is rarer than send/receive
    if (kind > 0) {
      ops.push_back(ChannelOp{kind <= 2 ? ChannelOp::kSend : ChannelOp::kReceive,
                              static_cast<std::uint32_t>(uniform(0, channels - 1)),
                              static_cast<std::uint32_t>(uniform(0, 1))});
    }
    cm.Add(from, "", ops, to);
  }
  return cm;
}

}  // namespace random_cm

#endif  // TSOLIVE_TESTS_RANDOM_CM_HPP_
