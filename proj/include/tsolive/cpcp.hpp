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


#ifndef TSOLIVE_CPCP_HPP_
#define TSOLIVE_CPCP_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tsolive/core.hpp"
#include "tsolive/dsl.hpp"
#include "tsolive/lcm.hpp"

namespace tsolive {

/// Two equally long lists of nonempty words over single-character letters.
struct CpcpInstance {
  std::vector<char> alphabet;
  std::vector<std::string> a;
  std::vector<std::string> b;
};

/// First line: the alphabet (letters separated by blanks, optionally
/// prefixed `alphabet:`); then `A: w1 w2 ...` and `B: w1 w2 ...`.
CpcpInstance ParseCpcp(std::string_view text);
std::string FormatCpcp(const CpcpInstance& inst);

/// l2 is a rotation of l1.
bool CyclicEqual(std::string_view l1, std::string_view l2);

/// Concatenation of the words selected by 1-based `indices`.
std::string Concat(const std::vector<std::string>& words, const std::vector<int>& indices);

/// Shortest index sequence (lexicographically least among the shortest)
/// of length <= max_len whose A and B concatenations are cyclically equal.
std::optional<std::vector<int>> SolveBrute(const CpcpInstance& inst, int max_len);

/**
 * Two-channel machine that guesses an index sequence I and then checks,
 * round after round, that the B-concatenation is a rotation of the
 * A-concatenation.
 *
 * Channel contents, receive end first: c2 holds `i_1 ... i_k eoi` and c1
 * holds `hd` followed by the letters of alpha_I. Guess phase: s_start
 * sends hd on c1 and moves to s0; at s0 each index i sends i on c2 and
 * then alpha_i on c1; s0 sends eoi on c2 and moves to s1. One check round
 * from s1:
 *   1. rotate hd;
 *   2. alpha pass: rotate at least one index, each followed by its alpha
 *      letters, then rotate eoi and hd;
 *   3. rotate any number of letters and send the marker `stop`;
 *   4. beta pass: rotate indices with their beta letters, passing hd
 *      exactly once at any letter boundary, then rotate eoi and receive
 *      `stop`;
 *   5. rotate letters up to hd and return to s1.
 * Every receive in a round is paired with a send of the same symbol
 * (`stop` is sent once and received once), so a run that loses anything
 * during a round cannot come back to the configuration it started from;
 * a lasso through s1 therefore needs beta_I to be a rotation of alpha_I.
 *
 * State count: 16 + 3L + 5M + 2m + 2s, where L and M are the total
 * lengths of the A and B words, m the number of pairs and s the alphabet
 * size. Channel symbols: the letters, `i1`..`im`, `hd`, `eoi`, `stop`.
 */
ChannelMachine BuildCm(const CpcpInstance& inst);

/// Name of the CM symbol for 1-based index i.
std::string IndexSymbol(int i);

/**
 * One-channel simulation of a machine over channels c1 and c2. The channel
 * word (newest first) is `bot2 w2 bot2 bot1 w1 bot1`. A prelude from the
 * new initial state `pre0` sends bot1, bot1, bot2, bot2. Every transition
 * q -> q' becomes a gadget that receives and re-sends the c1 segment
 * (applying a c1 operation on the way), then does the same for the c2
 * segment. States of the original machine keep their names.
 * `origin`, if given, receives for each new transition the index of the
 * simulated transition, or -1 for the prelude.
 */
ChannelMachine ToSingleChannel(const ChannelMachine& cm2,
                               std::vector<std::int64_t>* origin = nullptr);

/// The single-channel word encoding channel words w1 (c1) and w2 (c2) of
/// `cm2` in the alphabet of `single`.
Word EncodeChannels(const ChannelMachine& cm2, const ChannelMachine& single,
                    const Word& w1, const Word& w2);

/// Metadata of a generated L(A,B).
struct ReductionLibrary {
  Library library;
  ChannelMachine cm;                  // BuildCm of the instance
  ChannelMachine single;              // ToSingleChannel(cm)
  std::vector<std::int64_t> origin;   // per transition of `single`
  MethodId m1 = 0;
  MethodId m2 = 1;
  LocId x1 = 0, y1 = 1, x2 = 2, y2 = 3, phase = 4, fail_simu = 5, first_m1 = 6;
  ValueId hash = 0, bot_s = 0, bot_e = 0, guess = 0, check = 0, v_true = 0, v_false = 0,
          ok = 0;
  std::vector<ValueId> rule_value;    // per transition of `single`
  std::vector<ValueId> symbol_value;  // per symbol of `single`
  PosId m1_read_rule = 0;             // where M1 reads the next rule from y2
};

/**
 * The two-method library simulating the one-channel machine of the
 * instance. Locations x1, y1, x2, y2 start at `hash`, phase at `guess`,
 * failSimu at `false`, firstM1 at `true`; both methods return `ok`.
 * Values: the eight constants, `c_<symbol>` per channel symbol and
 * `r<k>` per transition rule.
 */
ReductionLibrary GenerateLibrary(const CpcpInstance& inst);

struct WitnessSchedule {
  LassoWitness lasso;
  int required_buffer_bound = 0;
  std::size_t guess_rounds = 0;  // M1 invocations that returned
  std::size_t simulated_rules = 0;
};

/**
 * Drives L(A,B) with two processes (M1 on process 1, M2 on process 2)
 * through the machine run for `solution`: guess phase, then check rounds
 * until the library configuration at the start of a check round repeats.
 * Values are only read once flushed and unread, and a buffered entry is
 * only flushed once the previous value of its location has been read,
 * so nothing is lost.
 */
WitnessSchedule BuildWitnessSchedule(const ReductionLibrary& lib, const CpcpInstance& inst,
                                     const std::vector<int>& solution, int rounds = 2);

}  // namespace tsolive

#endif  // TSOLIVE_CPCP_HPP_
