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

#include "tsolive/core.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <sstream>
#include <tuple>

namespace tsolive {

bool operator==(const Action& a, const Action& b) {
  return a.kind == b.kind && a.pid == b.pid && a.loc == b.loc &&
         a.method == b.method && a.val == b.val && a.val2 == b.val2;
}

// ---------------------------------------------------------------------------
// Library

namespace {

template <class Names>
std::optional<std::uint32_t> FindName(const Names& names,
                                      std::string_view name) {
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == name) return static_cast<std::uint32_t>(i);
  }
  return std::nullopt;
}

auto CommandKey(const Command& c) {
  return std::make_tuple(static_cast<int>(c.kind), c.loc, c.any_value, c.a,
                         c.b);
}

}  // namespace

std::optional<ValueId> Library::FindValue(std::string_view name) const {
  if (value_index_.size() == values.size()) {
    auto it = value_index_.find(std::string(name));
    if (it == value_index_.end()) return std::nullopt;
    return it->second;
  }
  return FindName(values, name);
}

std::optional<LocId> Library::FindLocation(std::string_view name) const {
  return FindName(locations, name);
}

std::optional<MethodId> Library::FindMethod(std::string_view name) const {
  for (std::size_t i = 0; i < methods.size(); ++i) {
    if (methods[i].name == name) return static_cast<MethodId>(i);
  }
  return std::nullopt;
}

ValueId Library::ValueOrThrow(std::string_view name) const {
  if (auto v = FindValue(name)) return *v;
  throw Error("unknown value '" + std::string(name) + "'");
}

LocId Library::LocationOrThrow(std::string_view name) const {
  if (auto v = FindLocation(name)) return *v;
  throw Error("unknown location '" + std::string(name) + "'");
}

MethodId Library::MethodOrThrow(std::string_view name) const {
  if (auto v = FindMethod(name)) return *v;
  throw Error("unknown method '" + std::string(name) + "'");
}

void Library::Finalize() {
  value_index_.clear();
  for (ValueId v = 0; v < values.size(); ++v) value_index_.emplace(values[v], v);
  if (value_index_.size() != values.size()) value_index_.clear();
  out_.assign(positions.size(), {});
  for (std::uint32_t i = 0; i < edges.size(); ++i) {
    if (edges[i].from >= positions.size() || edges[i].to >= positions.size()) {
      throw Error("edge " + std::to_string(i) + " references an unknown position");
    }
    out_[edges[i].from].push_back(i);
  }
  for (auto& list : out_) {
    std::stable_sort(list.begin(), list.end(),
                     [this](std::uint32_t x, std::uint32_t y) {
                       return CommandKey(edges[x].cmd) < CommandKey(edges[y].cmd);
                     });
  }
  finalized_ = true;
}

bool Library::HasExplicitRead(PosId p, LocId loc, ValueId v) const {
  const auto& list = out_[p];
  Command probe{CommandKind::kRead, loc, v, 0, false};
  auto it = std::lower_bound(list.begin(), list.end(), probe,
                             [this](std::uint32_t e, const Command& c) {
                               const Command& ec = edges[e].cmd;
                               return std::make_tuple(static_cast<int>(ec.kind), ec.loc,
                                                      ec.any_value, ec.a) <
                                      std::make_tuple(static_cast<int>(c.kind), c.loc,
                                                      c.any_value, c.a);
                             });
  if (it == list.end()) return false;
  const Command& c = edges[*it].cmd;
  return c.kind == CommandKind::kRead && c.loc == loc && !c.any_value && c.a == v;
}

// ---------------------------------------------------------------------------
// Configuration

bool Configuration::AllBuffersEmpty() const {
  return std::all_of(buffers.begin(), buffers.end(),
                     [](const auto& b) { return b.empty(); });
}

std::size_t ConfigurationHash::operator()(const Configuration& c) const {
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&h](std::uint64_t v) {
    h ^= v + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
  };
  for (auto p : c.control) mix(static_cast<std::uint32_t>(p));
  for (auto v : c.memory) mix(v);
  for (const auto& b : c.buffers) {
    mix(0xffffffffull + b.size());
    for (const auto& e : b) mix((static_cast<std::uint64_t>(e.loc) << 32) | e.val);
  }
  return static_cast<std::size_t>(h);
}

// ---------------------------------------------------------------------------
// Trace utilities

Trace ProjectByProcess(const Trace& t, int proc) {
  Trace out;
  for (const auto& a : t) {
    if (a.pid == proc) out.push_back(a);
  }
  return out;
}

std::vector<std::pair<std::size_t, Action>> PendingInvocations(const Trace& t) {
  // Per process: index of the open call, if any.
  std::unordered_map<int, std::size_t> open;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const Action& a = t[i];
    if (a.kind == ActionKind::kCall) {
      if (open.count(a.pid)) {
        throw TraceError(i + 1, "call by process " + std::to_string(a.pid) +
                                    " while a call is pending");
      }
      open[a.pid] = i;
    } else if (a.kind == ActionKind::kReturn) {
      auto it = open.find(a.pid);
      if (it == open.end()) {
        throw TraceError(i + 1, "return by process " + std::to_string(a.pid) +
                                    " without a pending call");
      }
      open.erase(it);
    }
  }
  std::vector<std::pair<std::size_t, Action>> result;
  for (const auto& [pid, idx] : open) result.emplace_back(idx + 1, t[idx]);
  std::sort(result.begin(), result.end(),
            [](const auto& x, const auto& y) { return x.first < y.first; });
  return result;
}

// ---------------------------------------------------------------------------
// Text forms

std::string FormatAction(const Library& lib, const Action& a) {
  const std::string pid = std::to_string(a.pid);
  auto v = [&lib](ValueId id) { return lib.values.at(id); };
  auto x = [&lib](LocId id) { return lib.locations.at(id); };
  switch (a.kind) {
    case ActionKind::kTau:
      return "tau(" + pid + ")";
    case ActionKind::kRead:
      return "read(" + pid + "," + x(a.loc) + "," + v(a.val) + ")";
    case ActionKind::kWrite:
      return "write(" + pid + "," + x(a.loc) + "," + v(a.val) + ")";
    case ActionKind::kCas:
      return "cas(" + pid + "," + x(a.loc) + "," + v(a.val) + "," + v(a.val2) + ")";
    case ActionKind::kFlush:
      return "flush(" + pid + "," + x(a.loc) + "," + v(a.val) + ")";
    case ActionKind::kCall:
      return "call(" + pid + "," + lib.methods.at(a.method).name + "," + v(a.val) + ")";
    case ActionKind::kReturn:
      return "return(" + pid + "," + lib.methods.at(a.method).name + "," + v(a.val) + ")";
  }
  return {};
}

namespace {

struct ActionSyntax {
  const char* name;
  ActionKind kind;
  int arity;  // including pid
};

constexpr ActionSyntax kActionSyntax[] = {
    {"tau", ActionKind::kTau, 1},       {"read", ActionKind::kRead, 3},
    {"write", ActionKind::kWrite, 3},   {"cas", ActionKind::kCas, 4},
    {"flush", ActionKind::kFlush, 3},   {"call", ActionKind::kCall, 3},
    {"return", ActionKind::kReturn, 3},
};

bool IsNameChar(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

}  // namespace

Action ParseAction(const Library& lib, std::string_view line, int line_no) {
  std::size_t pos = 0;
  auto fail = [&](const std::string& msg) -> ParseError {
    return ParseError(line_no, static_cast<int>(pos) + 1, msg);
  };
  auto skip_ws = [&] {
    while (pos < line.size() && (line[pos] == ' ' || line[pos] == '\t' || line[pos] == '\r')) ++pos;
  };
  auto word = [&]() -> std::string {
    skip_ws();
    std::size_t start = pos;
    while (pos < line.size() && IsNameChar(line[pos])) ++pos;
    if (start == pos) throw fail("expected a name");
    return std::string(line.substr(start, pos - start));
  };
  auto expect = [&](char c) {
    skip_ws();
    if (pos >= line.size() || line[pos] != c) {
      throw fail(std::string("expected '") + c + "'");
    }
    ++pos;
  };

  skip_ws();
  std::size_t kind_col = pos;
  std::string kind_name = word();
  const ActionSyntax* syn = nullptr;
  for (const auto& s : kActionSyntax) {
    if (kind_name == s.name) syn = &s;
  }
  if (syn == nullptr) {
    pos = kind_col;
    throw fail("unknown action '" + kind_name + "'");
  }
  expect('(');
  std::vector<std::pair<std::string, std::size_t>> args;
  for (int i = 0; i < syn->arity; ++i) {
    if (i > 0) expect(',');
    skip_ws();
    std::size_t col = pos;
    args.emplace_back(word(), col);
  }
  expect(')');
  skip_ws();
  if (pos != line.size()) throw fail("trailing characters");

  auto arg_error = [&](std::size_t i, const std::string& msg) {
    return ParseError(line_no, static_cast<int>(args[i].second) + 1, msg);
  };
  int pid = 0;
  try {
    std::size_t used = 0;
    pid = std::stoi(args[0].first, &used);
    if (used != args[0].first.size() || pid < 1) throw std::invalid_argument("");
  } catch (const std::exception&) {
    throw arg_error(0, "invalid process id '" + args[0].first + "'");
  }
  auto value = [&](std::size_t i) {
    if (auto v = lib.FindValue(args[i].first)) return *v;
    throw arg_error(i, "unknown value '" + args[i].first + "'");
  };
  auto location = [&](std::size_t i) {
    if (auto v = lib.FindLocation(args[i].first)) return *v;
    throw arg_error(i, "unknown location '" + args[i].first + "'");
  };
  auto method = [&](std::size_t i) {
    if (auto v = lib.FindMethod(args[i].first)) return *v;
    throw arg_error(i, "unknown method '" + args[i].first + "'");
  };

  switch (syn->kind) {
    case ActionKind::kTau:
      return Action::Tau(pid);
    case ActionKind::kRead:
      return Action::Read(pid, location(1), value(2));
    case ActionKind::kWrite:
      return Action::Write(pid, location(1), value(2));
    case ActionKind::kCas:
      return Action::Cas(pid, location(1), value(2), value(3));
    case ActionKind::kFlush:
      return Action::Flush(pid, location(1), value(2));
    case ActionKind::kCall:
      return Action::Call(pid, method(1), value(2));
    case ActionKind::kReturn:
      return Action::Return(pid, method(1), value(2));
  }
  throw fail("unreachable");
}

std::string FormatTrace(const Library& lib, const Trace& t) {
  std::string out;
  for (const auto& a : t) {
    out += FormatAction(lib, a);
    out += '\n';
  }
  return out;
}

namespace {

template <class Fn>
void ForEachLine(std::string_view text, Fn&& fn) {
  int line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    ++line_no;
    std::string_view line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    fn(line, line_no);
    if (end == text.size()) break;
    start = end + 1;
  }
}

bool IsBlankOrComment(std::string_view line) {
  for (char c : line) {
    if (c == '#') return true;
    if (c != ' ' && c != '\t') return false;
  }
  return true;
}

std::string_view Trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

}  // namespace

Trace ParseTrace(const Library& lib, std::string_view text) {
  Trace t;
  ForEachLine(text, [&](std::string_view line, int line_no) {
    if (IsBlankOrComment(line)) return;
    t.push_back(ParseAction(lib, line, line_no));
  });
  return t;
}

std::string FormatLasso(const Library& lib, const LassoWitness& w) {
  return "--- stem ---\n" + FormatTrace(lib, w.stem) + "--- loop ---\n" +
         FormatTrace(lib, w.loop);
}

LassoWitness ParseLasso(const Library& lib, std::string_view text) {
  LassoWitness w;
  enum { kNone, kStem, kLoop } section = kNone;
  bool saw_stem = false, saw_loop = false;
  ForEachLine(text, [&](std::string_view line, int line_no) {
    std::string_view t = Trim(line);
    if (t == "--- stem ---") {
      if (saw_stem || saw_loop) throw ParseError(line_no, 1, "unexpected stem section");
      section = kStem;
      saw_stem = true;
      return;
    }
    if (t == "--- loop ---") {
      if (saw_loop) throw ParseError(line_no, 1, "duplicate loop section");
      section = kLoop;
      saw_loop = true;
      return;
    }
    if (IsBlankOrComment(line)) return;
    if (section == kNone) throw ParseError(line_no, 1, "action outside a section");
    (section == kStem ? w.stem : w.loop).push_back(ParseAction(lib, line, line_no));
  });
  if (!saw_stem || !saw_loop) throw ParseError(1, 1, "lasso needs stem and loop sections");
  return w;
}

std::string FormatConfiguration(const Library& lib, const Configuration& c) {
  std::string out = "p=[";
  for (std::size_t i = 0; i < c.control.size(); ++i) {
    if (i) out += ',';
    out += c.control[i] == kInClient ? std::string("clt") : "q" + std::to_string(c.control[i]);
  }
  out += "] d=[";
  for (std::size_t x = 0; x < c.memory.size(); ++x) {
    if (x) out += ',';
    out += lib.locations.at(x) + ":" + lib.values.at(c.memory[x]);
  }
  out += "] u=[";
  for (std::size_t i = 0; i < c.buffers.size(); ++i) {
    if (i) out += ';';
    out += std::to_string(i + 1) + ":";
    for (const auto& e : c.buffers[i]) {
      out += "(" + lib.locations.at(e.loc) + "," + lib.values.at(e.val) + ")";
    }
  }
  out += "]";
  return out;
}

std::string ConfigurationDigest(const Library& lib, const Configuration& c) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : FormatConfiguration(lib, c)) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace tsolive
