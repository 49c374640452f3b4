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


#include <set>
#include <sstream>

#include "doctest.h"
#include "invariants.hpp"
#include "tsolive/semantics.hpp"
#include "zoo.hpp"

using namespace tsolive;

namespace {

// Both processes finished different methods with the value 0.
bool BothReadZero(const Library& lib, const Configuration& c) {
  const ValueId zero = lib.ValueOrThrow("0");
  if (c.control.size() != 2 || c.control[0] < 0 || c.control[1] < 0) return false;
  const Position& p = lib.positions[static_cast<PosId>(c.control[0])];
  const Position& q = lib.positions[static_cast<PosId>(c.control[1])];
  return p.final_for == zero && q.final_for == zero && p.method != q.method;
}

std::size_t CountBothZero(const Library& lib, const StateGraph& g) {
  std::size_t n = 0;
  for (const auto& c : g.nodes) n += BothReadZero(lib, c) ? 1 : 0;
  return n;
}

// Library with a cas guarded position: cas x a b, then return.
std::shared_ptr<const Library> CasLib() {
  return zoo::FromText(R"(
values: a, b;
locations: x = a;
method m {
  write x := b;
  cas x b a { return a; } else { return b; }
})");
}

}  // namespace

TEST_CASE("lookup prefers the newest own buffer entry") {
  Configuration c{{kInClient}, {0, 0}, {{}}};
  CHECK(Lookup(c, 1, 0) == 0);
  c.memory[0] = 3;
  CHECK(Lookup(c, 1, 0) == 3);
  c.memory[0] = 0;
  c.buffers[0] = {{0, 2}, {0, 1}};  // wrote 1, then 2
  CHECK(Lookup(c, 1, 0) == 2);
  c.buffers[0] = {{1, 5}};
  CHECK(Lookup(c, 1, 0) == 0);
}

TEST_CASE("the initial configuration of one process enables exactly its calls") {
  auto lib = zoo::Load("trivial");
  auto spec = MgcCompose(lib, 1, MemoryModel::kTso, 1);
  auto steps = EnabledTso(spec, InitialConfiguration(spec));
  CHECK(steps.size() == lib->values.size() * lib->methods.size());
  for (const auto& s : steps) CHECK(s.action.kind == ActionKind::kCall);
}

TEST_CASE("flush moves the oldest buffer entry to memory") {
  auto lib = zoo::FromText("values: 0, a, b; locations: x = 0; method m { return 0; }");
  auto spec = MgcCompose(lib, 1, MemoryModel::kTso, 4);
  const ValueId a = lib->ValueOrThrow("a"), b = lib->ValueOrThrow("b");
  Configuration c = InitialConfiguration(spec);
  c.buffers[0] = {{0, b}, {0, a}};
  std::vector<StepResult> flushes;
  for (auto& s : EnabledTso(spec, c)) {
    if (s.action.kind == ActionKind::kFlush) flushes.push_back(s);
  }
  REQUIRE(flushes.size() == 1);
  CHECK(flushes[0].action == Action::Flush(1, 0, a));
  CHECK(flushes[0].next.memory[0] == a);
  CHECK(flushes[0].next.buffers[0] == std::vector<BufferEntry>{{0, b}});
}

TEST_CASE("cas needs an empty store buffer") {
  auto lib = CasLib();
  auto spec = MgcCompose(lib, 1, MemoryModel::kTso, 2);
  Configuration c = InitialConfiguration(spec);
  c = *Step(spec, c, Action::Call(1, 0, 0));
  while (lib->positions[static_cast<PosId>(c.control[0])].name.find("is(") != std::string::npos ||
         c.buffers[0].empty()) {
    auto steps = EnabledTso(spec, c);
    REQUIRE_FALSE(steps.empty());
    c = steps.front().next;
  }
  // The write is buffered: no cas may fire, only the flush.
  for (const auto& s : EnabledTso(spec, c)) CHECK(s.action.kind != ActionKind::kCas);
  c = *Step(spec, c, Action::Flush(1, 0, lib->ValueOrThrow("b")));
  bool cas = false;
  for (const auto& s : EnabledTso(spec, c)) cas = cas || s.action.kind == ActionKind::kCas;
  CHECK(cas);
}

TEST_CASE("replay of a cas behind a buffered write fails at that index") {
  auto lib = CasLib();
  auto spec = MgcCompose(lib, 1, MemoryModel::kTso, 2);
  const ValueId a = lib->ValueOrThrow("a"), b = lib->ValueOrThrow("b");
  Configuration c = InitialConfiguration(spec);
  Trace t = {Action::Call(1, 0, a)};
  c = *Step(spec, c, t.back());
  while (t.back().kind != ActionKind::kWrite) {
    auto steps = EnabledTso(spec, c);
    REQUIRE_FALSE(steps.empty());
    t.push_back(steps.front().action);
    c = steps.front().next;
  }
  t.push_back(Action::Cas(1, 0, b, a));
  try {
    Replay(spec, t, InitialConfiguration(spec));
    FAIL("expected ReplayError");
  } catch (const ReplayError& e) {
    CHECK(e.index() == t.size());
    CHECK(e.configuration() == c);
    REQUIRE(e.enabled().size() == 1);
    CHECK(e.enabled()[0] == Action::Flush(1, 0, b));
  }
  CHECK(Replay(spec, {}, InitialConfiguration(spec)) == InitialConfiguration(spec));
}

TEST_CASE("SC writes go straight to memory") {
  auto lib = zoo::Load("sb");
  auto spec = MgcCompose(lib, 1, MemoryModel::kSc, std::nullopt);
  Configuration c = InitialConfiguration(spec);
  c = *Step(spec, c, Action::Call(1, lib->MethodOrThrow("m1"), 0));
  for (int k = 0; k < 4; ++k) {
    auto steps = EnabledSc(spec, c);
    REQUIRE_FALSE(steps.empty());
    if (steps[0].action.kind == ActionKind::kWrite) {
      CHECK(steps[0].next.memory[lib->LocationOrThrow("x")] == lib->ValueOrThrow("1"));
      CHECK(steps[0].next.AllBuffersEmpty());
      return;
    }
    c = steps[0].next;
  }
  FAIL("no write reached");
}

TEST_CASE("SC stepping refuses configurations with buffered writes") {
  auto lib = zoo::Load("sb");
  auto spec = MgcCompose(lib, 1, MemoryModel::kSc, std::nullopt);
  Configuration c = InitialConfiguration(spec);
  c.buffers[0].push_back({0, 1});
  CHECK_THROWS_AS(EnabledSc(spec, c), Error);
}

TEST_CASE("store buffering: both-read-0 under TSO only") {
  auto lib = zoo::Load("sb");
  const auto sc_outcomes = invariants::StoreBufferingOutcomes(false);
  const auto tso_outcomes = invariants::StoreBufferingOutcomes(true);
  CHECK(sc_outcomes.count({0, 0}) == 0);
  CHECK(tso_outcomes.count({0, 0}) == 1);
  CHECK(sc_outcomes.size() == 3);
  CHECK(tso_outcomes.size() == 4);

  auto sc = Explore(MgcCompose(lib, 2, MemoryModel::kSc, std::nullopt));
  auto tso1 = Explore(MgcCompose(lib, 2, MemoryModel::kTso, 1));
  CHECK(CountBothZero(*lib, sc) == 0);
  CHECK(CountBothZero(*lib, tso1) > 0);
  CHECK(tso1.node_count() > sc.node_count());
}

TEST_CASE("trivial library under SC with one process has three configurations") {
  auto lib = zoo::Load("trivial");
  REQUIRE(lib->values.size() == 1);
  auto g = Explore(MgcCompose(lib, 1, MemoryModel::kSc, std::nullopt));
  CHECK(g.node_count() == 3);
}

TEST_CASE("raising the buffer bound only adds configurations") {
  for (const auto& name : {"sb", "flag", "two_writes", "cas_fenced"}) {
    auto lib = zoo::Load(name);
    auto g1 = Explore(MgcCompose(lib, 2, MemoryModel::kTso, 1));
    auto g2 = Explore(MgcCompose(lib, 2, MemoryModel::kTso, 2));
    CHECK(g1.node_count() <= g2.node_count());
    for (const auto& c : g1.nodes) CHECK(g2.Find(c).has_value());
    for (const auto& c : g2.nodes) {
      for (const auto& b : c.buffers) CHECK(b.size() <= 2);
    }
  }
}

TEST_CASE("state graphs are connected from the initial node") {
  auto g = Explore(MgcCompose(zoo::Load("flag"), 2, MemoryModel::kTso, 2));
  for (std::uint32_t n = 0; n < g.node_count(); ++n) {
    Trace path = g.PathTo(n);
    CHECK(path.size() == g.depth[n]);
  }
  for (const auto& arc : g.arcs) {
    CHECK(arc.src < g.node_count());
    CHECK(arc.dst < g.node_count());
  }
}

TEST_CASE("exploration stops at the node budget with a frontier") {
  ExploreOptions small;
  small.node_budget = 50;
  try {
    Explore(MgcCompose(zoo::Load("sb"), 2, MemoryModel::kTso, 2), small);
    FAIL("expected BudgetExceeded");
  } catch (const BudgetExceeded& e) {
    CHECK(e.budget() == 50);
    CHECK_FALSE(e.frontier().empty());
  }
}

TEST_CASE("successor order is deterministic") {
  auto lib = zoo::Load("spinlock");
  auto spec = MgcCompose(lib, 2, MemoryModel::kTso, 2);
  auto g1 = Explore(spec);
  auto g2 = Explore(spec);
  REQUIRE(g1.arc_count() == g2.arc_count());
  for (std::size_t i = 0; i < g1.arc_count(); ++i) {
    CHECK(g1.arcs[i].action == g2.arcs[i].action);
    CHECK(g1.arcs[i].dst == g2.arcs[i].dst);
  }
  std::ostringstream a1, n1, a2, n2;
  WriteGraph(*lib, g1, a1, n1);
  WriteGraph(*lib, g2, a2, n2);
  CHECK(a1.str() == a2.str());
  CHECK(n1.str() == n2.str());
}

TEST_CASE("randomized executions respect the TSO rules on every zoo library") {
  for (const auto& name : zoo::Names()) {
    auto res = invariants::RandomInvariantSuite(zoo::Load(name), 2, 2, 200, 40, 11);
    CHECK_MESSAGE(res.failures.empty(), name << ": " << (res.failures.empty() ? "" : res.failures[0]));
  }
}

TEST_CASE("EmbedScInTso puts a flush right after every write") {
  Trace sc = {Action::Call(1, 0, 0), Action::Write(1, 0, 1), Action::Read(1, 0, 1)};
  Trace t = EmbedScInTso(sc);
  REQUIRE(t.size() == 4);
  CHECK(t[2] == Action::Flush(1, 0, 1));
}
