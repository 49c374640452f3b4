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


#include <algorithm>
#include <string>

#include "doctest.h"
#include "trichotomy.hpp"
#include "tsolive/cpcp.hpp"
#include "tsolive/liveness.hpp"
#include "tsolive/semantics.hpp"

using namespace tsolive;

namespace {

CpcpInstance Inst(const std::string& alphabet, const std::string& a, const std::string& b) {
  return ParseCpcp("alphabet: " + alphabet + "\nA: " + a + "\nB: " + b + "\n");
}

std::size_t Letters(const std::vector<std::string>& words) {
  std::size_t n = 0;
  for (const auto& w : words) n += w.size();
  return n;
}

Word Symbols(const ChannelMachine& cm, std::initializer_list<const char*> names) {
  Word w;
  for (const char* n : names) w.push_back(*cm.FindSymbol(n));
  return w;
}

// Perfect run of the gadget of cm2 transition `t` from `from`; returns the
// configuration reached at the gadget's exit, if any.
std::optional<CmConfig> RunGadget(const ChannelMachine& single,
                                  const std::vector<std::int64_t>& origin, std::size_t t,
                                  const CmConfig& from, std::uint32_t exit) {
  std::vector<CmConfig> todo{from};
  std::unordered_map<CmConfig, bool, CmConfigHash> seen{{from, true}};
  while (!todo.empty()) {
    CmConfig c = todo.back();
    todo.pop_back();
    for (auto& st : StepPerfect(single, c)) {
      if (origin[st.transition] != static_cast<std::int64_t>(t)) continue;
      if (st.next.state == exit) return st.next;
      if (seen.emplace(st.next, true).second) todo.push_back(st.next);
    }
  }
  return std::nullopt;
}

}  // namespace

TEST_CASE("instances parse and reject malformed input") {
  CpcpInstance inst = Inst("a b", "ab b", "a bb");
  CHECK(inst.alphabet == std::vector<char>{'a', 'b'});
  CHECK(inst.a == std::vector<std::string>{"ab", "b"});
  CHECK(inst.b == std::vector<std::string>{"a", "bb"});
  CHECK(ParseCpcp(FormatCpcp(inst)).a == inst.a);
  CHECK(ParseCpcp("ab\nB: b\nA: a\n").b == std::vector<std::string>{"b"});
  CHECK_THROWS_AS(ParseCpcp("a\nA: a\n"), ParseError);
  CHECK_THROWS_AS(ParseCpcp("a\nA: a\nB: a a\n"), ParseError);
  CHECK_THROWS_AS(ParseCpcp("a\nA: c\nB: a\n"), ParseError);
  CHECK_THROWS_AS(ParseCpcp("a a\nA: a\nB: a\n"), ParseError);
  CHECK_THROWS_AS(ParseCpcp("a\nA: a\nA: a\nB: a\n"), ParseError);
}

TEST_CASE("cyclic equality is equality up to rotation") {
  CHECK(CyclicEqual("ab", "ab"));
  CHECK(CyclicEqual("ba", "ab"));
  CHECK_FALSE(CyclicEqual("aa", "ab"));
  CHECK(CyclicEqual("", ""));
  CHECK_FALSE(CyclicEqual("abc", "acb"));
  CHECK(CyclicEqual("abc", "cab"));
}

TEST_CASE("brute-force solutions of the reference instances") {
  CHECK(SolveBrute(Inst("a", "a", "a"), 6) == std::vector<int>{1});
  CHECK(SolveBrute(Inst("a b", "ab b", "a bb"), 6) == std::vector<int>{1, 2});
  CHECK(SolveBrute(Inst("a b", "ba", "ab"), 6) == std::vector<int>{1});
  CHECK_FALSE(SolveBrute(Inst("a b", "a", "b"), 6).has_value());
  // Shortest first, then lexicographically least.
  CHECK(SolveBrute(Inst("a b", "a b", "b a"), 6) == std::vector<int>{1, 2});
}

TEST_CASE("the two-channel machine has the documented number of states") {
  for (auto inst : {Inst("a", "a", "a"), Inst("a b", "ab b", "a bb"), Inst("a b", "ba", "ab"),
                    Inst("a b c", "abc b ca", "c ab bca")}) {
    ChannelMachine cm = BuildCm(inst);
    const std::size_t L = Letters(inst.a), M = Letters(inst.b), m = inst.a.size(),
                      s = inst.alphabet.size();
    CHECK(cm.states.size() == 16 + 3 * L + 5 * M + 2 * m + 2 * s);
    CHECK(cm.channels == std::vector<std::string>{"c1", "c2"});
    CHECK(cm.FindState("s0").has_value());
    CHECK(cm.states[cm.init] == "s_start");
    for (const auto& t : cm.transitions) CHECK(t.ops.size() <= 1);
  }
}

TEST_CASE("the two-channel machine cycles through s1 exactly for solutions") {
  ChannelMachine yes = BuildCm(Inst("a", "a", "a"));
  auto found = BoundedLassoSearch(yes, yes.StateOrThrow("s1"), 8, 10'000);
  REQUIRE(found.witness.has_value());
  std::vector<CmStep> all = found.witness->stem;
  all.insert(all.end(), found.witness->loop.begin(), found.witness->loop.end());
  CHECK(ReplaysLossy(yes, found.witness->start, all));

  ChannelMachine no = BuildCm(Inst("a b", "a", "b"));
  CHECK_FALSE(BoundedLassoSearch(no, no.StateOrThrow("s1"), 8, 10'000).witness.has_value());
}

TEST_CASE("the one-channel encoding lays out both segments") {
  ChannelMachine cm2;
  cm2.AddState("q");
  cm2.AddChannel("c1");
  cm2.AddChannel("c2");
  const auto x = cm2.AddSymbol("x");
  const auto y = cm2.AddSymbol("y");
  cm2.Add(0, "", {ChannelOp{ChannelOp::kReceive, 0, x}}, 0);
  cm2.Add(0, "", {ChannelOp{ChannelOp::kSend, 1, y}}, 0);
  std::vector<std::int64_t> origin;
  ChannelMachine single = ToSingleChannel(cm2, &origin);
  CHECK(single.channels.size() == 1);
  CHECK(single.states[single.init] == "pre0");
  CHECK(origin.size() == single.transitions.size());

  Word enc = EncodeChannels(cm2, single, Word{x}, Word{y});
  CHECK(enc == Symbols(single, {"bot2", "y", "bot2", "bot1", "x", "bot1"}));

  // The prelude builds the empty encoding.
  CmConfig c = InitialCmConfig(single);
  for (int k = 0; k < 4; ++k) {
    auto st = StepPerfect(single, c);
    REQUIRE(st.size() == 1);
    c = st[0].next;
  }
  CHECK(c.state == cm2.init);
  CHECK(c.channels[0] == EncodeChannels(cm2, single, {}, {}));

  // c1?x removes x from the c1 segment and leaves c2 alone.
  CmConfig from{0, {EncodeChannels(cm2, single, Word{y, x}, Word{y, y})}};
  auto after = RunGadget(single, origin, 0, from, 0);
  REQUIRE(after.has_value());
  CHECK(after->channels[0] == EncodeChannels(cm2, single, Word{y}, Word{y, y}));
  // c2!y prepends to the c2 segment.
  auto sent = RunGadget(single, origin, 1, from, 0);
  REQUIRE(sent.has_value());
  CHECK(sent->channels[0] == EncodeChannels(cm2, single, Word{y, x}, Word{y, y, y}));
}

TEST_CASE("losing a delimiter strands the gadget") {
  ChannelMachine cm2;
  cm2.AddState("q");
  cm2.AddState("r");
  cm2.AddChannel("c1");
  cm2.AddChannel("c2");
  const auto x = cm2.AddSymbol("x");
  cm2.Add(0, "", {ChannelOp{ChannelOp::kSend, 0, x}}, 1);
  std::vector<std::int64_t> origin;
  ChannelMachine single = ToSingleChannel(cm2, &origin);
  CmConfig start{0, {EncodeChannels(cm2, single, Word{x}, Word{})}};
  REQUIRE(RunGadget(single, origin, 0, start, 1).has_value());

  // Take the first two gadget steps (receive and re-send bot1), then lose
  // the other bot1 that still closes the c1 segment.
  CmConfig mid = start;
  for (int k = 0; k < 2; ++k) {
    auto st = StepPerfect(single, mid);
    auto it = std::find_if(st.begin(), st.end(),
                           [&](const CmStep& s) { return origin[s.transition] == 0; });
    REQUIRE(it != st.end());
    mid = it->next;
  }
  const auto bot1 = *single.FindSymbol("bot1");
  Word& w = mid.channels[0];
  // Newest first: the bot1 just re-sent is at the front; the closing one is
  // the rightmost remaining bot1 after the c1 content.
  auto last = std::find(w.rbegin(), w.rend(), bot1);
  REQUIRE(last != w.rend());
  w.erase(std::next(last).base());
  CHECK_FALSE(RunGadget(single, origin, 0, mid, 1).has_value());
}

TEST_CASE("the generated library has the two methods and seven locations") {
  ReductionLibrary r = GenerateLibrary(Inst("a", "a", "a"));
  const Library& lib = r.library;
  CHECK(lib.methods.size() == 2);
  CHECK(lib.methods[r.m1].name == "M1");
  CHECK(lib.methods[r.m2].name == "M2");
  CHECK(lib.locations ==
        std::vector<std::string>{"x1", "y1", "x2", "y2", "phase", "failSimu", "firstM1"});
  CHECK(lib.initial_memory[r.x1] == r.hash);
  CHECK(lib.initial_memory[r.y2] == r.hash);
  CHECK(lib.initial_memory[r.phase] == r.guess);
  CHECK(lib.initial_memory[r.fail_simu] == r.v_false);
  CHECK(lib.initial_memory[r.first_m1] == r.v_true);
  CHECK(ValidateLibrary(lib).empty());
  CHECK(r.rule_value.size() == r.single.transitions.size());
  std::vector<std::string> sorted = lib.values;
  std::sort(sorted.begin(), sorted.end());
  CHECK(std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end());
  // Byte-for-byte deterministic.
  CHECK(FormatLibraryRaw(GenerateLibrary(Inst("a", "a", "a")).library) == FormatLibraryRaw(lib));
}

TEST_CASE("a first M1 call buffers the opening word on x1") {
  ReductionLibrary r = GenerateLibrary(Inst("a", "a", "a"));
  auto lib = std::make_shared<Library>(r.library);
  auto spec = MgcCompose(lib, 1, MemoryModel::kTso, 16);
  Configuration c = *Step(spec, InitialConfiguration(spec), Action::Call(1, r.m1, r.ok));
  for (int k = 0; k < 40 && Lookup(c, 1, r.first_m1) == r.v_true; ++k) {
    std::vector<StepResult> own;
    for (auto& s : EnabledTso(spec, c)) {
      if (s.action.kind != ActionKind::kFlush) own.push_back(std::move(s));
    }
    REQUIRE(own.size() == 1);
    c = own[0].next;
  }
  std::vector<ValueId> x1;
  for (auto it = c.buffers[0].rbegin(); it != c.buffers[0].rend(); ++it) {
    if (it->loc == r.x1) x1.push_back(it->val);
  }
  const ValueId first_rule = r.rule_value[r.single.out(r.single.init)[0]];
  CHECK(x1 == std::vector<ValueId>{first_rule, r.hash, r.bot_s, r.hash, r.bot_e, r.hash});
}

TEST_CASE("witness for ('a')/('a') violates the four blocking properties") {
  CpcpInstance inst = Inst("a", "a", "a");
  ReductionLibrary r = GenerateLibrary(inst);
  WitnessSchedule w = BuildWitnessSchedule(r, inst, {1}, 2);
  CHECK(w.required_buffer_bound >= 8);
  auto spec = MgcCompose(std::make_shared<Library>(r.library), 2, MemoryModel::kTso,
                         w.required_buffer_bound);
  LassoWitness lasso = w.lasso;
  REQUIRE(LassoReplays(spec, lasso));
  LoopSummary s = Summarize(lasso.entry, lasso.loop);
  CHECK_FALSE(s.any_return);
  CHECK(s.acts[0]);
  CHECK(s.acts[1]);
  for (Property p : {Property::kLockFreedom, Property::kWaitFreedom, Property::kDeadlockFreedom,
                     Property::kStarvationFreedom}) {
    CHECK(CheckLassoConditions(spec, lasso, p));
  }
  std::string why;
  CHECK_MESSAGE(trichotomy::GuessRoundsReturn(r, lasso.stem, &why), why);
  // One bound lower, the schedule needs a write that cannot happen.
  auto tight = MgcCompose(std::make_shared<Library>(r.library), 2, MemoryModel::kTso,
                          w.required_buffer_bound - 1);
  LassoWitness again = w.lasso;
  CHECK_FALSE(LassoReplays(tight, again));

  CHECK_THROWS_AS(BuildWitnessSchedule(r, inst, {}, 2), Error);
  CpcpInstance other = Inst("a b", "a", "b");
  CHECK_THROWS_AS(BuildWitnessSchedule(GenerateLibrary(other), other, {1}, 2), Error);
}

TEST_CASE("methods placed on the wrong processes fall into failSimu") {
  CpcpInstance inst = Inst("a", "a", "a");
  ReductionLibrary r = GenerateLibrary(inst);
  WitnessSchedule w = BuildWitnessSchedule(r, inst, {1}, 2);
  auto spec = MgcCompose(std::make_shared<Library>(r.library), 2, MemoryModel::kTso,
                         w.required_buffer_bound);
  // Replay up to the first return of M2: one full round has succeeded.
  Trace prefix;
  for (const Action& a : w.lasso.stem) {
    prefix.push_back(a);
    if (a.kind == ActionKind::kReturn && a.pid == 2) break;
  }
  Configuration c = Replay(spec, prefix, InitialConfiguration(spec));
  REQUIRE(c.control[1] == kInClient);
  // Process 2 now runs M1.
  c = *Step(spec, c, Action::Call(2, r.m1, r.ok));
  bool failed = false;
  for (int k = 0; k < 60 && c.control[1] != kInClient; ++k) {
    std::vector<StepResult> own;
    for (auto& s : EnabledTso(spec, c)) {
      if (s.action.pid == 2 && s.action.kind != ActionKind::kFlush) own.push_back(std::move(s));
    }
    if (own.empty()) break;
    const Action& a = own[0].action;
    if (a.kind == ActionKind::kRead && a.loc == r.y2) {
      // The misplaced reader sees the delimiter it wrote itself.
      CHECK(a.val == r.hash);
    }
    failed = failed || (a.kind == ActionKind::kWrite && a.loc == r.fail_simu && a.val == r.v_true);
    c = own[0].next;
  }
  CHECK(failed);
}

TEST_CASE("after failSimu every running method returns on its own") {
  ReductionLibrary r = GenerateLibrary(Inst("a", "a", "a"));
  auto report = trichotomy::SampleFailSimu(r, 2, 30, 17, 64);
  CHECK(report.samples >= 30);
  CHECK(report.in_flight > 0);
  CHECK_MESSAGE(report.failures.empty(), (report.failures.empty() ? "" : report.failures[0]));
}
