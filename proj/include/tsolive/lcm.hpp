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


#ifndef TSOLIVE_LCM_HPP_
#define TSOLIVE_LCM_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "tsolive/core.hpp"

namespace tsolive {

/// Channel word, leftmost (most recently sent) symbol first; back() is the
/// next symbol to be received.
using Word = std::vector<std::uint32_t>;

/// Order-preserving embedding of `small` into `big`.
bool IsSubword(const Word& small, const Word& big);
bool IsSubword(std::string_view small, std::string_view big);

struct ChannelOp {
  enum Kind : std::uint8_t { kSend, kReceive } kind = kSend;
  std::uint32_t channel = 0;
  std::uint32_t symbol = 0;
  friend bool operator==(const ChannelOp&, const ChannelOp&) = default;
};

struct CmTransition {
  std::uint32_t from = 0;
  std::string label;           // empty for an epsilon move
  std::vector<ChannelOp> ops;  // at most one per channel; empty is nop
  std::uint32_t to = 0;
};

class ChannelMachine {
 public:
  std::vector<std::string> states;
  std::vector<std::string> channels;
  std::vector<std::string> alphabet;
  std::uint32_t init = 0;
  std::vector<CmTransition> transitions;

  std::uint32_t AddState(const std::string& name);
  std::uint32_t AddChannel(const std::string& name);
  std::uint32_t AddSymbol(const std::string& name);
  std::uint32_t Add(std::uint32_t from, std::string label, std::vector<ChannelOp> ops,
                    std::uint32_t to);

  std::optional<std::uint32_t> FindState(std::string_view name) const;
  std::optional<std::uint32_t> FindChannel(std::string_view name) const;
  std::optional<std::uint32_t> FindSymbol(std::string_view name) const;
  std::uint32_t StateOrThrow(std::string_view name) const;

  /// Transition indices leaving `q`, for transitions added through Add().
  const std::vector<std::uint32_t>& out(std::uint32_t q) const { return out_[q]; }

 private:
  std::vector<std::vector<std::uint32_t>> out_;
  std::unordered_map<std::string, std::uint32_t> state_index_;
};

/**
 * Text form:
 *   states: s0 s1
 *   channels: c
 *   alphabet: a b
 *   init: s0
 *   s0 --guess [c!a; d?b]--> s1
 *   s1 --[nop]--> s0
 * Words may be separated by spaces or commas; `#` starts a comment.
 */
ChannelMachine ParseChannelMachine(std::string_view text);
std::string FormatChannelMachine(const ChannelMachine& cm);

struct CmConfig {
  std::uint32_t state = 0;
  std::vector<Word> channels;
  friend bool operator==(const CmConfig&, const CmConfig&) = default;
};

struct CmConfigHash {
  std::size_t operator()(const CmConfig& c) const;
};

CmConfig InitialCmConfig(const ChannelMachine& cm);
std::string FormatCmConfig(const ChannelMachine& cm, const CmConfig& c);

struct CmStep {
  std::uint32_t transition = 0;
  CmConfig next;
};

/// Exact channel semantics: send prepends, receive takes the rightmost.
std::vector<CmStep> StepPerfect(const ChannelMachine& cm, const CmConfig& c);

/**
 * Lossy successors restricted to canonical loss choices. A receive c?a
 * first loses whatever lies right of the rightmost a in c; after the step,
 * each channel may in addition be emptied outright. If a lossy run reaches
 * (q, v), these steps reach some (q, u) with v a componentwise subword of
 * u: cutting at the rightmost a loses the least, and sends preserve the
 * subword relation. Control-state reachability is therefore preserved,
 * and perfect steps are included.
 */
std::vector<CmStep> StepLossy(const ChannelMachine& cm, const CmConfig& c);

/// Every lossy successor: lose any subword, step perfectly, lose again.
/// Exponential in channel length; meant for cross-checks on short words.
std::vector<CmStep> StepLossyAll(const ChannelMachine& cm, const CmConfig& c);

struct BackwardStats {
  std::size_t iterations = 0;
  std::size_t minimal_elements = 0;
};

/// Whether a lossy run from (q_init, empty channels) reaches q_target, by
/// the upward-closed backward fixpoint over minimal channel vectors.
bool BackwardReach(const ChannelMachine& cm, std::uint32_t q_init, std::uint32_t q_target,
                   BackwardStats* stats = nullptr);

struct ForwardResult {
  bool found = false;
  bool complete = false;  // no successor was cut off by the channel bound
  std::size_t explored = 0;
};

/// Breadth-first lossy search (StepLossyAll) with channel contents capped.
ForwardResult ForwardReachBounded(const ChannelMachine& cm, std::uint32_t q_init,
                                  std::uint32_t q_target, std::size_t channel_bound);

struct CmLasso {
  CmConfig start;
  std::vector<CmStep> stem;
  std::vector<CmStep> loop;  // ends at the configuration the loop starts from
};

struct LassoSearchResult {
  std::optional<CmLasso> witness;
  std::size_t explored = 0;
  bool budget_hit = false;
};

/// Lasso through `target` over StepLossy with every channel at most
/// `channel_bound` long, exploring at most `depth_bound` configurations.
LassoSearchResult BoundedLassoSearch(const ChannelMachine& cm, std::uint32_t target,
                                     std::size_t channel_bound, std::size_t depth_bound);

/// Whether each step of `steps` is a StepLossy successor of the previous
/// configuration, starting at `from`.
bool ReplaysLossy(const ChannelMachine& cm, const CmConfig& from,
                  const std::vector<CmStep>& steps);

}  // namespace tsolive

#endif  // TSOLIVE_LCM_HPP_
