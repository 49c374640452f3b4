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

#ifndef TSOLIVE_DSL_HPP_
#define TSOLIVE_DSL_HPP_

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tsolive/core.hpp"

namespace tsolive {

/**
 * Library definition language.
 *
 *   values: a, b;                 # finite domain
 *   locations: x = a, y = b;      # shared memory with initial values
 *   method m {                    # structured body
 *     r := read x;  write y := r;  r := a;  skip;
 *     cas x a b { ... } else { ... }
 *     if r == a { ... } else { ... }      # also !=
 *     while (r != b) { ... }              # also while (true)
 *     choose { ... } or { ... }
 *     label l:  goto l;
 *     return r;                           # expressions: register, value, arg
 *   }
 *   method n raw {                # raw edge list
 *     initial a -> p0;  final b -> p2;
 *     p0 -> p1 : read x a;   p0 -> p2 : read x *;
 *     p1 -> p2 : write x b;  p1 -> p2 : cas_suc x a b;  ... tau; cas_fail
 *   }
 *
 * Local registers are expanded into program positions over the reachable
 * register valuations; registers are cleared once dead.
 */
struct ParseOptions {
  std::size_t max_positions = 2'000'000;
};

Library ParseLibrary(std::string_view source, const ParseOptions& options = {});

/// Invariant violations of a library IR; empty when well formed.
std::vector<std::string> ValidateLibrary(const Library& lib);

/// Raw edge-list text of any library; ParseLibrary reads it back.
std::string FormatLibraryRaw(const Library& lib);

enum class MemoryModel { kTso, kSc };

/// A library composed with n most-general clients.
struct SystemSpec {
  std::shared_ptr<const Library> library;
  int procs = 1;
  MemoryModel model = MemoryModel::kTso;
  // Maximum store-buffer length under TSO; nullopt means unbounded stepping.
  std::optional<int> buffer_bound;

  const Library& lib() const { return *library; }
};

SystemSpec MgcCompose(std::shared_ptr<const Library> lib, int procs,
                      MemoryModel model, std::optional<int> buffer_bound);

/// All processes in the client, initial memory, empty buffers.
Configuration InitialConfiguration(const SystemSpec& spec);

}  // namespace tsolive

#endif  // TSOLIVE_DSL_HPP_
