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


#ifndef TSOLIVE_LIVENESS_HPP_
#define TSOLIVE_LIVENESS_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tsolive/core.hpp"
#include "tsolive/dsl.hpp"
#include "tsolive/semantics.hpp"

namespace tsolive {

enum class Property {
  kLockFreedom,
  kWaitFreedom,
  kDeadlockFreedom,
  kStarvationFreedom,
  kObstructionFreedom,
};

inline constexpr Property kAllProperties[] = {
    Property::kLockFreedom, Property::kWaitFreedom, Property::kDeadlockFreedom,
    Property::kStarvationFreedom, Property::kObstructionFreedom};

/// "lock-freedom", "wait-freedom", ...
std::string_view PropertyName(Property p);
/// Accepts "lock-freedom", "lock" and "LOCK_FREEDOM" spellings.
std::optional<Property> ParseProperty(std::string_view s);

/// What a loop does, as seen from its entry configuration. Vectors are
/// indexed by pid - 1.
struct LoopSummary {
  std::vector<bool> pending;  // control != in_clt at loop entry
  std::vector<bool> acts;     // has an action in the loop (flush included)
  std::vector<bool> rets;     // returns in the loop
  bool any_return = false;
  bool single_pid = false;    // every loop action carries the same pid
};

LoopSummary Summarize(const Configuration& entry, const Trace& loop);

/**
 * Loop-level violation clauses, P = pending processes:
 *   lock        no return in loop and some q in P acts
 *   wait        some q in P acts and does not return
 *   deadlock    no return in loop and every process acts
 *   starvation  every process acts and some q in P does not return
 *   obstruction all actions by one pid q, q in P, no return
 */
bool ClauseViolated(Property p, const LoopSummary& s);

/// Replays `w` (filling in w.entry when empty) and evaluates the clause.
/// Throws Error when the witness does not replay.
bool CheckLassoConditions(const SystemSpec& spec, LassoWitness& w, Property p);

enum class Verdict { kViolated, kNoViolationAtBound, kSatisfied };
std::string_view VerdictName(Verdict v);

struct SearchStats {
  std::size_t nodes = 0;
  std::size_t arcs = 0;
  double millis = 0;
};

struct ViolationReport {
  Property property = Property::kLockFreedom;
  Verdict verdict = Verdict::kNoViolationAtBound;
  MemoryModel model = MemoryModel::kTso;
  int procs = 1;
  std::optional<int> bound;
  std::optional<LassoWitness> witness;
  SearchStats stats;
};

/// JSON document with fields property, verdict, bound, model, procs,
/// stem, loop, stats. Only stats.millis varies between identical runs.
std::string ReportJson(const Library& lib, const ViolationReport& r);

/**
 * Lasso search on the explored graph. Return-free SCCs host lock and
 * deadlock loops; SCCs of the graph without q's returns host wait and
 * starvation loops for q; obstruction uses only q's non-return arcs. The
 * entry is the BFS-first qualifying node.
 */
ViolationReport FindViolation(const SystemSpec& spec, Property p,
                              const ExploreOptions& options = {});
ViolationReport FindViolation(const SystemSpec& spec, const StateGraph& g, Property p);

struct BlockingPair {
  std::int32_t control = kInClient;
  std::vector<ValueId> memory;
  friend bool operator==(const BlockingPair&, const BlockingPair&) = default;
};

struct BlockingPairOptions {
  std::size_t max_nodes = 20'000'000;
};

/// Single-process SC pairs (control, memory) with an infinite return-free
/// run, over every control state and every memory valuation.
std::vector<BlockingPair> BlockingPairs(const Library& lib,
                                        const BlockingPairOptions& options = {});

/// Obstruction-freedom through blocking pairs reachable with empty buffers.
ViolationReport CheckObstructionFreedom(const SystemSpec& spec,
                                        const ExploreOptions& options = {});

/**
 * Independent verdict: for every entry node and every class of loop
 * summary (which pids act, which return) decides whether a closed walk of
 * that class passes through the node, then evaluates the clause and
 * confirms it on a concrete lasso. Throws Error above `max_nodes`.
 */
bool BruteForceOracle(const SystemSpec& spec, Property p, std::size_t max_nodes = 20000);

}  // namespace tsolive

#endif  // TSOLIVE_LIVENESS_HPP_
