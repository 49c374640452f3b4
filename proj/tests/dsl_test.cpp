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


#include <string>

#include "doctest.h"
#include "tsolive/dsl.hpp"
#include "tsolive/semantics.hpp"
#include "zoo.hpp"

using namespace tsolive;

namespace {

std::string ErrorOf(const std::string& src) {
  try {
    ParseLibrary(src);
  } catch (const ParseError& e) {
    return e.what();
  }
  return "";
}

int CountEdges(const Library& lib, PosId from, CommandKind kind) {
  int n = 0;
  for (auto ei : lib.out(from)) n += lib.edges[ei].cmd.kind == kind ? 1 : 0;
  return n;
}

}  // namespace

TEST_CASE("return of a constant compiles to tau edges from every is to fs") {
  auto lib = ParseLibrary("values: a; method m { return a; }");
  REQUIRE(lib.methods.size() == 1);
  const Method& m = lib.methods[0];
  const ValueId a = lib.ValueOrThrow("a");
  REQUIRE(lib.out(m.initial[a]).size() == 1);
  const Edge& e = lib.edges[lib.out(m.initial[a])[0]];
  CHECK(e.cmd.kind == CommandKind::kTau);
  CHECK(e.to == m.final[a]);
  CHECK(ValidateLibrary(lib).empty());
}

TEST_CASE("reading into a register splits on every value") {
  auto lib = ParseLibrary(R"(
values: a, b;
locations: x = a;
method m {
  r := read x;
  return r;
})");
  const Method& m = lib.methods[0];
  const ValueId a = lib.ValueOrThrow("a"), b = lib.ValueOrThrow("b");
  // is -> (tau to the body) or directly reads; follow taus to the read position.
  PosId p = m.initial[a];
  while (CountEdges(lib, p, CommandKind::kTau) == 1 && lib.out(p).size() == 1) {
    p = lib.edges[lib.out(p)[0]].to;
  }
  REQUIRE(CountEdges(lib, p, CommandKind::kRead) == 2);
  PosId after[2] = {0, 0};
  for (auto ei : lib.out(p)) {
    const Edge& e = lib.edges[ei];
    after[e.cmd.a] = e.to;
  }
  CHECK(after[a] != after[b]);
  for (ValueId v : {a, b}) {
    PosId q = after[v];
    while (!lib.positions[q].final_for) {
      REQUIRE(lib.out(q).size() == 1);
      q = lib.edges[lib.out(q)[0]].to;
    }
    CHECK(q == m.final[v]);
  }
}

TEST_CASE("syntax errors report the line") {
  std::string msg = ErrorOf("values: a;\nmethod {\n");
  CHECK(msg.rfind("2:", 0) == 0);
  CHECK(ErrorOf("values: a; method m { write x := a; }").find("undeclared location 'x'") !=
        std::string::npos);
  CHECK(ErrorOf("values: a; method m { return c; }").find("undeclared") != std::string::npos);
  CHECK(ErrorOf("values: a; method m { return r; }").find("'r'") != std::string::npos);
  CHECK(ErrorOf("values: a; method m { goto nowhere; }").find("undefined label") !=
        std::string::npos);
  CHECK(ErrorOf("method m { return a; }").find("values") != std::string::npos);
  CHECK(ErrorOf("values: a; method m { return a; ").find("'}'") != std::string::npos);
}

TEST_CASE("a register read before any assignment is rejected") {
  std::string msg = ErrorOf(R"(
values: a, b;
locations: x = a;
method m {
  if arg == a { r := read x; }
  return r;
})");
  CHECK(msg.find("used before assignment") != std::string::npos);
}

TEST_CASE("register expansion past the position limit is a domain overflow") {
  ParseOptions tight;
  tight.max_positions = 10;
  std::string src = R"(
values: a, b, c, d;
locations: x = a, y = a;
method m {
  r := read x;
  s := read y;
  write x := r;
  write y := s;
  return r;
})";
  CHECK_THROWS_WITH_AS(ParseLibrary(src, tight), doctest::Contains("domain overflow"), ParseError);
  CHECK_NOTHROW(ParseLibrary(src));
}

TEST_CASE("raw libraries round-trip through FormatLibraryRaw") {
  for (const auto& name : zoo::Names()) {
    auto lib = zoo::Load(name);
    Library back = ParseLibrary(FormatLibraryRaw(*lib));
    CHECK_MESSAGE(back.values == lib->values, name);
    CHECK(back.locations == lib->locations);
    CHECK(back.initial_memory == lib->initial_memory);
    CHECK(back.positions.size() == lib->positions.size());
    CHECK(back.edges.size() == lib->edges.size());
    CHECK(FormatLibraryRaw(back) == FormatLibraryRaw(*lib));
    // Same behaviour: identical reachable state counts.
    auto spec_a = MgcCompose(lib, 2, MemoryModel::kTso, 1);
    auto spec_b = MgcCompose(std::make_shared<Library>(back), 2, MemoryModel::kTso, 1);
    CHECK(Explore(spec_a).node_count() == Explore(spec_b).node_count());
  }
}

TEST_CASE("raw methods accept wildcard reads") {
  auto lib = ParseLibrary(R"(
values: a, b;
locations: x = b;
method m raw {
  initial a -> s;
  final a -> done;
  s -> t : read x a;
  s -> u : read x *;
  t -> done : tau;
  u -> u : tau;
})");
  CHECK(ValidateLibrary(lib).empty());
  auto spec = MgcCompose(std::make_shared<Library>(lib), 1, MemoryModel::kSc, std::nullopt);
  Configuration c = InitialConfiguration(spec);
  c = *Step(spec, c, Action::Call(1, 0, lib.ValueOrThrow("a")));
  // x holds b, so only the wildcard edge fires.
  auto steps = EnabledSc(spec, c);
  REQUIRE(steps.size() == 1);
  CHECK(steps[0].action == Action::Read(1, 0, lib.ValueOrThrow("b")));
  CHECK(lib.positions[static_cast<PosId>(steps[0].next.control[0])].name.find("u") !=
        std::string::npos);
}

TEST_CASE("ValidateLibrary names wrong-way edges") {
  auto good = ParseLibrary("values: a; method m { return a; }");
  CHECK(ValidateLibrary(good).empty());

  Library into = good;
  into.edges.push_back({into.methods[0].final[0], Command{}, into.methods[0].initial[0]});
  into.Finalize();
  auto v = ValidateLibrary(into);
  // One edge both leaves fs and enters is.
  REQUIRE(v.size() == 2);
  CHECK(v[0].find("initial position") != std::string::npos);
  CHECK(v[1].find("final position") != std::string::npos);

  Library enters = good;
  PosId body = static_cast<PosId>(enters.positions.size());
  enters.positions.push_back(Position{0, "extra", {}, {}});
  enters.edges.push_back({body, Command{}, enters.methods[0].initial[0]});
  enters.Finalize();
  auto v2 = ValidateLibrary(enters);
  REQUIRE(v2.size() == 1);
  CHECK(v2[0].find("initial position") != std::string::npos);

  Library leaves = good;
  leaves.edges.push_back({leaves.methods[0].final[0], Command{}, body - 1});
  leaves.Finalize();
  CHECK(ValidateLibrary(leaves).size() >= 1);
}

TEST_CASE("MgcCompose checks its parameters") {
  auto lib = zoo::Load("trivial");
  CHECK_THROWS_AS(MgcCompose(lib, 0, MemoryModel::kTso, 1), Error);
  CHECK_THROWS_AS(MgcCompose(lib, 1, MemoryModel::kTso, 0), Error);
  CHECK_NOTHROW(MgcCompose(lib, 1, MemoryModel::kSc, std::nullopt));
  auto spec = MgcCompose(lib, 1, MemoryModel::kTso, 1);
  Configuration c = InitialConfiguration(spec);
  CHECK(c.control == std::vector<std::int32_t>{kInClient});
  CHECK(c.buffers.size() == 1);
  CHECK(c.buffers[0].empty());
  CHECK(c.memory == lib->initial_memory);
}

TEST_CASE("from the initial configuration only calls are enabled") {
  auto lib = zoo::FromText(R"(
values: a, b;
method m1 { return a; }
method m2 { return b; }
)");
  auto spec = MgcCompose(lib, 2, MemoryModel::kTso, 2);
  auto steps = EnabledTso(spec, InitialConfiguration(spec));
  CHECK(steps.size() == 2 * 2 * 2);
  for (const auto& s : steps) CHECK(s.action.kind == ActionKind::kCall);
}
