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


#ifndef TSOLIVE_SEMANTICS_HPP_
#define TSOLIVE_SEMANTICS_HPP_

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "tsolive/core.hpp"
#include "tsolive/dsl.hpp"

namespace tsolive {

struct StepResult {
  Action action;
  Configuration next;
};

/// Newest buffered value of `x` in process `pid`'s buffer, else memory.
ValueId Lookup(const Configuration& c, int pid, LocId x);

/**
 * Transitions of the TSO system out of `c`, ordered by process id, then
 * rule (tau, read, write, cas_suc, cas_fail, flush, call, return), then
 * location and values. Writes are disabled once a buffer holds
 * `buffer_bound` entries.
 */
std::vector<StepResult> EnabledTso(const SystemSpec& spec, const Configuration& c);

/// SC transitions: writes go straight to memory, no flushes. Throws Error
/// if some buffer of `c` is nonempty.
std::vector<StepResult> EnabledSc(const SystemSpec& spec, const Configuration& c);

/// Dispatches on spec.model.
std::vector<StepResult> Enabled(const SystemSpec& spec, const Configuration& c);

/// Every successor of `c` labelled `a`. Libraries with several edges of the
/// same label out of one position (choose, duplicated reads) yield more
/// than one.
std::vector<Configuration> Successors(const SystemSpec& spec, const Configuration& c,
                                      const Action& a);

/// The first successor labelled `a`, if any.
std::optional<Configuration> Step(const SystemSpec& spec, const Configuration& c,
                                  const Action& a);

class ReplayError : public Error {
 public:
  ReplayError(std::size_t index, Configuration at, std::vector<Action> enabled,
              const std::string& msg)
      : Error(msg), index_(index), at_(std::move(at)), enabled_(std::move(enabled)) {}

  /// 1-based position of the first action that could not fire.
  std::size_t index() const { return index_; }
  const Configuration& configuration() const { return at_; }
  const std::vector<Action>& enabled() const { return enabled_; }

 private:
  std::size_t index_;
  Configuration at_;
  std::vector<Action> enabled_;
};

/// All configurations reachable from `from` along exactly the labels of `t`,
/// in discovery order. Throws ReplayError at the first label no candidate
/// can take.
std::vector<Configuration> ReplayAll(const SystemSpec& spec, const Trace& t,
                                     const std::vector<Configuration>& from);

/// First configuration of ReplayAll(spec, t, {from}).
Configuration Replay(const SystemSpec& spec, const Trace& t, const Configuration& from);

/// Replays the stem from the initial configuration and the loop from the
/// entry configuration; true when the entry is reachable by the stem and
/// the loop can come back to it. A witness with an empty `entry` takes the
/// first configuration the stem reaches from which the loop closes.
bool LassoReplays(const SystemSpec& spec, LassoWitness& w);

/// Inserts flush(i,x,a) right after every write(i,x,a).
Trace EmbedScInTso(const Trace& sc_trace);

// ---------------------------------------------------------------------------
// Exhaustive exploration

struct StateGraph {
  struct Arc {
    std::uint32_t src;
    std::uint32_t dst;
    Action action;
  };

  std::vector<Configuration> nodes;  // nodes[0] is the initial configuration
  std::vector<Arc> arcs;             // grouped by src, in BFS order
  std::vector<std::uint32_t> first_arc;  // arcs of n: [first_arc[n], first_arc[n+1])
  std::vector<std::int64_t> parent_arc;  // BFS tree; -1 for the root
  std::vector<std::uint32_t> depth;

  std::size_t node_count() const { return nodes.size(); }
  std::size_t arc_count() const { return arcs.size(); }
  std::optional<std::uint32_t> Find(const Configuration& c) const;
  /// Labels of the BFS-tree path from the initial configuration to `n`.
  Trace PathTo(std::uint32_t n) const;

  std::unordered_map<Configuration, std::uint32_t, ConfigurationHash> index;
};

struct ExploreOptions {
  std::size_t node_budget = 10'000'000;
};

class BudgetExceeded : public Error {
 public:
  BudgetExceeded(std::size_t budget, std::vector<Configuration> frontier)
      : Error("node budget of " + std::to_string(budget) + " configurations exceeded"),
        budget_(budget),
        frontier_(std::move(frontier)) {}
  std::size_t budget() const { return budget_; }
  /// Discovered but unexpanded configurations at the time of the stop.
  const std::vector<Configuration>& frontier() const { return frontier_; }

 private:
  std::size_t budget_;
  std::vector<Configuration> frontier_;
};

/// Breadth-first reachable graph. TSO specs need a buffer bound.
StateGraph Explore(const SystemSpec& spec, const ExploreOptions& options = {});

/// `SRC_DIGEST action DST_DIGEST` lines to `arcs`, `DIGEST configuration`
/// lines to `nodes`.
void WriteGraph(const Library& lib, const StateGraph& g, std::ostream& arcs,
                std::ostream& nodes);

}  // namespace tsolive

#endif  // TSOLIVE_SEMANTICS_HPP_
