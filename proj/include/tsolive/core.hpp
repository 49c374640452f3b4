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

#ifndef TSOLIVE_CORE_HPP_
#define TSOLIVE_CORE_HPP_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace tsolive {

using ValueId = std::uint32_t;
using LocId = std::uint32_t;
using MethodId = std::uint32_t;
using PosId = std::uint32_t;

/// Base class of every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A diagnostic tied to a line/column of some text input (1-based).
class ParseError : public Error {
 public:
  ParseError(int line, int col, const std::string& msg)
      : Error(std::to_string(line) + ":" + std::to_string(col) + ": " + msg),
        line_(line),
        col_(col),
        detail_(msg) {}

  int line() const { return line_; }
  int col() const { return col_; }
  const std::string& detail() const { return detail_; }

 private:
  int line_;
  int col_;
  std::string detail_;
};

// ---------------------------------------------------------------------------
// Actions

enum class ActionKind : std::uint8_t {
  kTau,
  kRead,
  kWrite,
  kCas,
  kFlush,
  kCall,
  kReturn,
};

/**
 * One labelled step of the concurrent system.
 *
 * `loc` is meaningful for read/write/cas/flush, `method` for call/return.
 * `val` is the value read/written/flushed, the cas expected value, or the
 * call argument / return value. `val2` is only used by cas (new value).
 */
struct Action {
  ActionKind kind = ActionKind::kTau;
  int pid = 1;
  LocId loc = 0;
  MethodId method = 0;
  ValueId val = 0;
  ValueId val2 = 0;

  static Action Tau(int pid) { return {ActionKind::kTau, pid, 0, 0, 0, 0}; }
  static Action Read(int pid, LocId x, ValueId v) {
    return {ActionKind::kRead, pid, x, 0, v, 0};
  }
  static Action Write(int pid, LocId x, ValueId v) {
    return {ActionKind::kWrite, pid, x, 0, v, 0};
  }
  static Action Cas(int pid, LocId x, ValueId expected, ValueId desired) {
    return {ActionKind::kCas, pid, x, 0, expected, desired};
  }
  static Action Flush(int pid, LocId x, ValueId v) {
    return {ActionKind::kFlush, pid, x, 0, v, 0};
  }
  static Action Call(int pid, MethodId m, ValueId arg) {
    return {ActionKind::kCall, pid, 0, m, arg, 0};
  }
  static Action Return(int pid, MethodId m, ValueId ret) {
    return {ActionKind::kReturn, pid, 0, m, ret, 0};
  }

  friend bool operator==(const Action& a, const Action& b);
};

using Trace = std::vector<Action>;

// ---------------------------------------------------------------------------
// Library IR

enum class CommandKind : std::uint8_t {
  kTau,
  kRead,
  kWrite,
  kCasSuc,
  kCasFail,
};

/// A primitive library command labelling one edge of a method graph.
struct Command {
  CommandKind kind = CommandKind::kTau;
  LocId loc = 0;
  ValueId a = 0;
  ValueId b = 0;
  // Read only: stands for read(loc, v) for every v that has no explicit
  // read(loc, v) edge leaving the same position.
  bool any_value = false;

  friend bool operator==(const Command&, const Command&) = default;
};

struct Edge {
  PosId from = 0;
  Command cmd;
  PosId to = 0;
};

struct Position {
  MethodId method = 0;
  std::string name;
  std::optional<ValueId> initial_for;  // this is is_(m, a)
  std::optional<ValueId> final_for;    // this is fs_(m, a)
};

struct Method {
  std::string name;
  std::vector<PosId> initial;  // indexed by argument value
  std::vector<PosId> final;    // indexed by return value
};

/**
 * A library: locations with initial values, a finite value domain, and one
 * transition graph per method over a shared (disjointly partitioned)
 * position space. Call Finalize() after construction to build the
 * per-position edge index used by the semantics.
 */
class Library {
 public:
  std::vector<std::string> values;
  std::vector<std::string> locations;
  std::vector<ValueId> initial_memory;
  std::vector<Method> methods;
  std::vector<Position> positions;
  std::vector<Edge> edges;

  std::size_t domain_size() const { return values.size(); }

  std::optional<ValueId> FindValue(std::string_view name) const;
  std::optional<LocId> FindLocation(std::string_view name) const;
  std::optional<MethodId> FindMethod(std::string_view name) const;

  ValueId ValueOrThrow(std::string_view name) const;
  LocId LocationOrThrow(std::string_view name) const;
  MethodId MethodOrThrow(std::string_view name) const;

  /// Outgoing edge indices of `p`, sorted by command kind then values.
  const std::vector<std::uint32_t>& out(PosId p) const { return out_[p]; }

  /// Values v with an explicit read(loc, v) edge leaving `p`.
  bool HasExplicitRead(PosId p, LocId loc, ValueId v) const;

  void Finalize();
  bool finalized() const { return finalized_; }

 private:
  std::vector<std::vector<std::uint32_t>> out_;
  std::unordered_map<std::string, ValueId> value_index_;
  bool finalized_ = false;
};

// ---------------------------------------------------------------------------
// Configurations

/// Control state value meaning "the process is in the most general client".
inline constexpr std::int32_t kInClient = -1;

struct BufferEntry {
  LocId loc = 0;
  ValueId val = 0;
  friend bool operator==(const BufferEntry&, const BufferEntry&) = default;
};

/**
 * (p, d, u): per-process control, memory valuation, per-process store
 * buffer. Buffers are stored newest-at-head: buffers[i].front() is the most
 * recent write and buffers[i].back() is the next entry to flush.
 * Processes are 1-based in actions; index i-1 here.
 */
struct Configuration {
  std::vector<std::int32_t> control;
  std::vector<ValueId> memory;
  std::vector<std::vector<BufferEntry>> buffers;

  std::size_t procs() const { return control.size(); }
  bool AllBuffersEmpty() const;

  friend bool operator==(const Configuration&, const Configuration&) = default;
};

struct ConfigurationHash {
  std::size_t operator()(const Configuration& c) const;
};

/// Finite stem plus repeatable nonempty loop, with the loop-entry
/// configuration.
struct LassoWitness {
  Trace stem;
  Trace loop;
  Configuration entry;
};

// ---------------------------------------------------------------------------
// Trace utilities

Trace ProjectByProcess(const Trace& t, int proc);

/// Raised by PendingInvocations on a call/return alternation violation.
class TraceError : public Error {
 public:
  TraceError(std::size_t index, const std::string& msg)
      : Error("trace index " + std::to_string(index) + ": " + msg),
        index_(index) {}
  /// 1-based index of the offending action.
  std::size_t index() const { return index_; }

 private:
  std::size_t index_;
};

/// Calls with no matching same-process return; indices are 1-based.
std::vector<std::pair<std::size_t, Action>> PendingInvocations(const Trace& t);

// ---------------------------------------------------------------------------
// Text forms

std::string FormatAction(const Library& lib, const Action& a);
/// Parses one action line. `line_no` is only used for diagnostics.
Action ParseAction(const Library& lib, std::string_view line, int line_no = 1);

std::string FormatTrace(const Library& lib, const Trace& t);
Trace ParseTrace(const Library& lib, std::string_view text);

std::string FormatLasso(const Library& lib, const LassoWitness& w);
/// Parses the stem/loop sections. The entry configuration is left empty;
/// callers recover it by replay.
LassoWitness ParseLasso(const Library& lib, std::string_view text);

/// Canonical one-line text of a configuration, e.g.
/// `p=[clt,q12] d=[x:a,y:b] u=[1:(x,b)(x,a);2:]` (buffers newest first).
std::string FormatConfiguration(const Library& lib, const Configuration& c);

/// 64-bit FNV-1a of the canonical text, as 16 hex digits.
std::string ConfigurationDigest(const Library& lib, const Configuration& c);

}  // namespace tsolive

#endif  // TSOLIVE_CORE_HPP_
