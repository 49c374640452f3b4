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


#include "tsolive/cpcp.hpp"

#include <algorithm>
#include <cctype>
#include <deque>
#include <memory>
#include <set>
#include <sstream>
#include <unordered_map>
#include <utility>

#include "tsolive/semantics.hpp"

namespace tsolive {

// ---------------------------------------------------------------------------
// Instances

namespace {

std::vector<std::string> SplitWords(std::string_view s) {
  std::vector<std::string> out;
  std::istringstream in{std::string(s)};
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

}  // namespace

CpcpInstance ParseCpcp(std::string_view text) {
  CpcpInstance inst;
  bool have_alphabet = false, have_a = false, have_b = false;
  int line_no = 0;
  std::istringstream in{std::string(text)};
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    auto words = SplitWords(line);
    if (words.empty()) continue;
    if (!have_alphabet) {
      if (words.front() == "alphabet:") words.erase(words.begin());
      for (const auto& w : words) {
        for (char ch : w) {
          if (!std::isalnum(static_cast<unsigned char>(ch))) {
            throw ParseError(line_no, 1, std::string("letter '") + ch + "' is not alphanumeric");
          }
          if (std::find(inst.alphabet.begin(), inst.alphabet.end(), ch) != inst.alphabet.end()) {
            throw ParseError(line_no, 1, std::string("letter '") + ch + "' listed twice");
          }
          inst.alphabet.push_back(ch);
        }
      }
      if (inst.alphabet.empty()) throw ParseError(line_no, 1, "empty alphabet");
      have_alphabet = true;
      continue;
    }
    const std::string head = words.front();
    std::vector<std::string>* target = nullptr;
    if (head == "A:" && !have_a) {
      target = &inst.a;
      have_a = true;
    } else if (head == "B:" && !have_b) {
      target = &inst.b;
      have_b = true;
    } else {
      throw ParseError(line_no, 1, "expected `A:` or `B:` (each once), got '" + head + "'");
    }
    for (std::size_t i = 1; i < words.size(); ++i) {
      for (char ch : words[i]) {
        if (std::find(inst.alphabet.begin(), inst.alphabet.end(), ch) == inst.alphabet.end()) {
          throw ParseError(line_no, 1,
                           std::string("letter '") + ch + "' is not in the alphabet");
        }
      }
      target->push_back(words[i]);
    }
  }
  if (!have_alphabet || !have_a || !have_b) {
    throw ParseError(line_no, 1, "an instance needs an alphabet line, an A: line and a B: line");
  }
  if (inst.a.empty() || inst.a.size() != inst.b.size()) {
    throw ParseError(line_no, 1, "A and B must be nonempty lists of equal length");
  }
  return inst;
}

std::string FormatCpcp(const CpcpInstance& inst) {
  std::string out = "alphabet:";
  for (char ch : inst.alphabet) (out += ' ') += ch;
  out += "\nA:";
  for (const auto& w : inst.a) (out += ' ') += w;
  out += "\nB:";
  for (const auto& w : inst.b) (out += ' ') += w;
  out += '\n';
  return out;
}

bool CyclicEqual(std::string_view l1, std::string_view l2) {
  if (l1.size() != l2.size()) return false;
  std::string doubled = std::string(l1) + std::string(l1);
  return doubled.find(l2) != std::string::npos;
}

std::string Concat(const std::vector<std::string>& words, const std::vector<int>& indices) {
  std::string out;
  for (int i : indices) out += words.at(static_cast<std::size_t>(i - 1));
  return out;
}

std::optional<std::vector<int>> SolveBrute(const CpcpInstance& inst, int max_len) {
  const int m = static_cast<int>(inst.a.size());
  for (int len = 1; len <= max_len; ++len) {
    std::vector<int> seq(static_cast<std::size_t>(len), 1);
    while (true) {
      if (CyclicEqual(Concat(inst.a, seq), Concat(inst.b, seq))) return seq;
      int k = len - 1;
      while (k >= 0 && seq[static_cast<std::size_t>(k)] == m) seq[static_cast<std::size_t>(k--)] = 1;
      if (k < 0) break;
      ++seq[static_cast<std::size_t>(k)];
    }
  }
  return std::nullopt;
}

std::string IndexSymbol(int i) { return "i" + std::to_string(i); }

// ---------------------------------------------------------------------------
// Two-channel machine

ChannelMachine BuildCm(const CpcpInstance& inst) {
  ChannelMachine cm;
  const std::uint32_t c1 = cm.AddChannel("c1");
  const std::uint32_t c2 = cm.AddChannel("c2");
  std::unordered_map<char, std::uint32_t> letter;
  for (char ch : inst.alphabet) letter[ch] = cm.AddSymbol(std::string(1, ch));
  const int m = static_cast<int>(inst.a.size());
  std::vector<std::uint32_t> index(static_cast<std::size_t>(m) + 1);
  for (int i = 1; i <= m; ++i) index[static_cast<std::size_t>(i)] = cm.AddSymbol(IndexSymbol(i));
  const std::uint32_t hd = cm.AddSymbol("hd");
  const std::uint32_t eoi = cm.AddSymbol("eoi");
  const std::uint32_t stop = cm.AddSymbol("stop");

  auto send = [](std::uint32_t c, std::uint32_t a) {
    return ChannelOp{ChannelOp::kSend, c, a};
  };
  auto recv = [](std::uint32_t c, std::uint32_t a) {
    return ChannelOp{ChannelOp::kReceive, c, a};
  };
  auto state = [&](const std::string& name) { return cm.AddState(name); };
  // Receive a on c and send it back, through a fresh middle state.
  auto rotate = [&](std::uint32_t from, std::uint32_t c, std::uint32_t a,
                    const std::string& mid, std::uint32_t to, const std::string& label = "") {
    std::uint32_t r = state(mid);
    cm.Add(from, label, {recv(c, a)}, r);
    cm.Add(r, "", {send(c, a)}, to);
  };

  const std::uint32_t s_start = state("s_start");
  const std::uint32_t s0 = state("s0");
  const std::uint32_t s1 = state("s1");
  cm.init = s_start;

  cm.Add(s_start, "init", {send(c1, hd)}, s0);
  for (int i = 1; i <= m; ++i) {
    const std::string& w = inst.a[static_cast<std::size_t>(i - 1)];
    const std::string base = "g" + std::to_string(i) + ".";
    std::uint32_t cur = state(base + "0");
    cm.Add(s0, "guess" + std::to_string(i), {send(c2, index[static_cast<std::size_t>(i)])}, cur);
    for (std::size_t j = 0; j < w.size(); ++j) {
      std::uint32_t next = j + 1 < w.size() ? state(base + std::to_string(j + 1)) : s0;
      cm.Add(cur, "", {send(c1, letter[w[j]])}, next);
      cur = next;
    }
  }
  cm.Add(s0, "done", {send(c2, eoi)}, s1);

  // Alpha pass.
  const std::uint32_t a_start = state("a.start");
  const std::uint32_t a_more = state("a.more");
  rotate(s1, c1, hd, "chk.hd", a_start, "check");
  for (int i = 1; i <= m; ++i) {
    const std::string& w = inst.a[static_cast<std::size_t>(i - 1)];
    const std::string base = "a.i" + std::to_string(i);
    std::uint32_t x = state(base);
    cm.Add(a_start, "", {recv(c2, index[static_cast<std::size_t>(i)])}, x);
    cm.Add(a_more, "", {recv(c2, index[static_cast<std::size_t>(i)])}, x);
    std::uint32_t cur = state(base + ".0");
    cm.Add(x, "", {send(c2, index[static_cast<std::size_t>(i)])}, cur);
    for (std::size_t j = 0; j < w.size(); ++j) {
      std::uint32_t next = j + 1 < w.size() ? state(base + "." + std::to_string(j + 1)) : a_more;
      rotate(cur, c1, letter[w[j]], base + "." + std::to_string(j) + "r", next);
      cur = next;
    }
  }
  const std::uint32_t a_eoi = state("a.eoi");
  const std::uint32_t rot = state("rot");
  rotate(a_more, c2, eoi, "a.eoi.r", a_eoi);
  rotate(a_eoi, c1, hd, "a.hd", rot);

  // Free rotation of letters, then the marker.
  for (char ch : inst.alphabet) rotate(rot, c1, letter[ch], std::string("rot.") + ch, rot);
  std::uint32_t b_start[2] = {state("b0.start"), state("b1.start")};
  cm.Add(rot, "", {send(c1, stop)}, b_start[0]);

  // Beta pass; flag f records whether hd has been passed.
  rotate(b_start[0], c1, hd, "b0.start.hd", b_start[1]);
  for (int i = 1; i <= m; ++i) {
    const std::string& w = inst.b[static_cast<std::size_t>(i - 1)];
    std::vector<std::uint32_t> at[2];
    for (int f = 0; f < 2; ++f) {
      const std::string base = "b" + std::to_string(f) + ".i" + std::to_string(i);
      std::uint32_t y = state(base);
      cm.Add(b_start[f], "", {recv(c2, index[static_cast<std::size_t>(i)])}, y);
      for (std::size_t j = 0; j < w.size(); ++j) at[f].push_back(state(base + "." + std::to_string(j)));
      cm.Add(y, "", {send(c2, index[static_cast<std::size_t>(i)])}, at[f][0]);
      for (std::size_t j = 0; j < w.size(); ++j) {
        std::uint32_t next = j + 1 < w.size() ? at[f][j + 1] : b_start[f];
        rotate(at[f][j], c1, letter[w[j]], base + "." + std::to_string(j) + "r", next);
      }
    }
    for (std::size_t j = 1; j < w.size(); ++j) {
      rotate(at[0][j], c1, hd, cm.states[at[0][j]] + ".hd", at[1][j]);
    }
  }
  const std::uint32_t b_eoi = state("b.eoi");
  const std::uint32_t realign = state("realign");
  rotate(b_start[1], c2, eoi, "b.eoi.r", b_eoi);
  cm.Add(b_eoi, "", {recv(c1, stop)}, realign);
  for (char ch : inst.alphabet) {
    rotate(realign, c1, letter[ch], std::string("realign.") + ch, realign);
  }
  cm.Add(realign, "round", {}, s1);
  return cm;
}

// ---------------------------------------------------------------------------
// One-channel simulation

ChannelMachine ToSingleChannel(const ChannelMachine& cm2, std::vector<std::int64_t>* origin) {
  const auto ch1 = cm2.FindChannel("c1");
  const auto ch2 = cm2.FindChannel("c2");
  if (!ch1 || !ch2 || cm2.channels.size() != 2) {
    throw Error("ToSingleChannel expects exactly the channels c1 and c2");
  }
  ChannelMachine out;
  const std::uint32_t c = out.AddChannel("c");
  for (const auto& a : cm2.alphabet) out.AddSymbol(a);
  if (cm2.FindSymbol("bot1") || cm2.FindSymbol("bot2")) {
    throw Error("the symbols bot1 and bot2 are reserved for the encoding");
  }
  const std::uint32_t bot1 = out.AddSymbol("bot1");
  const std::uint32_t bot2 = out.AddSymbol("bot2");
  for (const auto& q : cm2.states) out.AddState(q);
  if (origin) origin->clear();
  std::int64_t owner = -1;
  auto add = [&](std::uint32_t from, std::string label, std::vector<ChannelOp> ops,
                 std::uint32_t to) {
    out.Add(from, std::move(label), std::move(ops), to);
    if (origin) origin->push_back(owner);
  };
  auto send = [&](std::uint32_t a) { return std::vector<ChannelOp>{{ChannelOp::kSend, c, a}}; };
  auto recv = [&](std::uint32_t a) {
    return std::vector<ChannelOp>{{ChannelOp::kReceive, c, a}};
  };

  std::uint32_t pre[4];
  for (int k = 0; k < 4; ++k) {
    pre[k] = out.AddState("pre" + std::to_string(k));
    if (out.states[pre[k]] != "pre" + std::to_string(k) || pre[k] < cm2.states.size()) {
      throw Error("state name pre" + std::to_string(k) + " is reserved for the encoding");
    }
  }
  out.init = pre[0];
  add(pre[0], "", send(bot1), pre[1]);
  add(pre[1], "", send(bot1), pre[2]);
  add(pre[2], "", send(bot2), pre[3]);
  add(pre[3], "", send(bot2), cm2.init);

  for (std::size_t k = 0; k < cm2.transitions.size(); ++k) {
    const CmTransition& t = cm2.transitions[k];
    owner = static_cast<std::int64_t>(k);
    const std::string base = "t" + std::to_string(k) + ".";
    std::optional<ChannelOp> op[2];
    for (const auto& o : t.ops) op[o.channel == *ch1 ? 0 : 1] = o;
    std::string label = t.label;
    auto segment = [&](std::uint32_t from, int which, std::uint32_t to) {
      const std::uint32_t bot = which == 0 ? bot1 : bot2;
      const std::string p = base + std::to_string(which + 1);
      std::uint32_t cur = out.AddState(p + "a");
      add(from, std::exchange(label, ""), recv(bot), cur);
      std::uint32_t next = out.AddState(p + "b");
      add(cur, "", send(bot), next);
      cur = next;
      if (op[which] && op[which]->kind == ChannelOp::kReceive) {
        next = out.AddState(p + "r");
        add(cur, "", recv(op[which]->symbol), next);
        cur = next;
      }
      for (std::uint32_t a = 0; a < cm2.alphabet.size(); ++a) {
        std::uint32_t mid = out.AddState(out.states[cur] + "." + cm2.alphabet[a]);
        add(cur, "", recv(a), mid);
        add(mid, "", send(a), cur);
      }
      next = out.AddState(p + "e");
      add(cur, "", recv(bot), next);
      cur = next;
      if (op[which] && op[which]->kind == ChannelOp::kSend) {
        next = out.AddState(p + "s");
        add(cur, "", send(op[which]->symbol), next);
        cur = next;
      }
      add(cur, "", send(bot), to);
    };
    std::uint32_t mid = out.AddState(base + "mid");
    segment(t.from, 0, mid);
    segment(mid, 1, t.to);
  }
  return out;
}

Word EncodeChannels(const ChannelMachine& cm2, const ChannelMachine& single, const Word& w1,
                    const Word& w2) {
  auto sym = [&](const std::string& name) {
    auto s = single.FindSymbol(name);
    if (!s) throw Error("symbol '" + name + "' missing from the one-channel machine");
    return *s;
  };
  const std::uint32_t bot1 = sym("bot1"), bot2 = sym("bot2");
  Word out{bot2};
  for (auto a : w2) out.push_back(sym(cm2.alphabet.at(a)));
  out.push_back(bot2);
  out.push_back(bot1);
  for (auto a : w1) out.push_back(sym(cm2.alphabet.at(a)));
  out.push_back(bot1);
  return out;
}

// ---------------------------------------------------------------------------
// L(A,B)

namespace {

class MethodBuilder {
 public:
  MethodBuilder(Library& lib, MethodId m) : lib_(lib), m_(m) {}

  PosId P(const std::string& key) {
    auto [it, inserted] = index_.try_emplace(key, 0);
    if (inserted) {
      it->second = static_cast<PosId>(lib_.positions.size());
      lib_.positions.push_back(Position{m_, lib_.methods[m_].name + "." + key, {}, {}});
    }
    return it->second;
  }
  PosId Fresh() { return P("w" + std::to_string(counter_++)); }

  void Tau(PosId from, PosId to) { lib_.edges.push_back({from, Command{}, to}); }
  void Read(PosId from, LocId x, ValueId v, PosId to) {
    lib_.edges.push_back({from, Command{CommandKind::kRead, x, v, 0, false}, to});
  }
  void ReadAny(PosId from, LocId x, PosId to) {
    lib_.edges.push_back({from, Command{CommandKind::kRead, x, 0, 0, true}, to});
  }
  void Write(PosId from, LocId x, ValueId v, PosId to) {
    lib_.edges.push_back({from, Command{CommandKind::kWrite, x, v, 0, false}, to});
  }

  // Writes each value followed by hash.
  void WriteSeq(PosId from, LocId x, const std::vector<ValueId>& vals, ValueId hash, PosId to) {
    PosId cur = from;
    for (std::size_t i = 0; i < vals.size(); ++i) {
      PosId mid = Fresh();
      Write(cur, x, vals[i], mid);
      PosId next = i + 1 < vals.size() ? Fresh() : to;
      Write(mid, x, hash, next);
      cur = next;
    }
    if (vals.empty()) Tau(from, to);
  }

  // Reads v and then hash; anything else goes to `fail`.
  void ReadOne(PosId from, LocId x, ValueId v, ValueId hash, PosId to, PosId fail) {
    PosId mid = Fresh();
    Read(from, x, v, mid);
    ReadAny(from, x, fail);
    Read(mid, x, hash, to);
    ReadAny(mid, x, fail);
  }

  void Interface(PosId top, ValueId ret) {
    Method& meth = lib_.methods[m_];
    const std::size_t n = lib_.values.size();
    meth.initial.resize(n);
    meth.final.resize(n);
    for (ValueId a = 0; a < n; ++a) {
      meth.initial[a] = P("is(" + lib_.values[a] + ")");
      lib_.positions[meth.initial[a]].initial_for = a;
      Tau(meth.initial[a], top);
    }
    for (ValueId a = 0; a < n; ++a) {
      meth.final[a] = P("fs(" + lib_.values[a] + ")");
      lib_.positions[meth.final[a]].final_for = a;
    }
    ret_ = meth.final[ret];
  }
  PosId ret() const { return ret_; }

 private:
  Library& lib_;
  MethodId m_;
  std::unordered_map<std::string, PosId> index_;
  std::size_t counter_ = 0;
  PosId ret_ = 0;
};

}  // namespace

ReductionLibrary GenerateLibrary(const CpcpInstance& inst) {
  ReductionLibrary r;
  r.cm = BuildCm(inst);
  r.single = ToSingleChannel(r.cm, &r.origin);
  const ChannelMachine& cm = r.single;
  Library& lib = r.library;

  auto value = [&](const std::string& name) {
    lib.values.push_back(name);
    return static_cast<ValueId>(lib.values.size() - 1);
  };
  r.hash = value("hash");
  r.bot_s = value("bot_s");
  r.bot_e = value("bot_e");
  r.guess = value("guess");
  r.check = value("check");
  r.v_true = value("true");
  r.v_false = value("false");
  r.ok = value("ok");
  for (const auto& a : cm.alphabet) r.symbol_value.push_back(value("c_" + a));
  for (std::size_t k = 0; k < cm.transitions.size(); ++k) {
    r.rule_value.push_back(value("r" + std::to_string(k)));
  }

  auto location = [&](const std::string& name, ValueId init) {
    lib.locations.push_back(name);
    lib.initial_memory.push_back(init);
    return static_cast<LocId>(lib.locations.size() - 1);
  };
  r.x1 = location("x1", r.hash);
  r.y1 = location("y1", r.hash);
  r.x2 = location("x2", r.hash);
  r.y2 = location("y2", r.hash);
  r.phase = location("phase", r.guess);
  r.fail_simu = location("failSimu", r.v_false);
  r.first_m1 = location("firstM1", r.v_true);

  lib.methods.push_back(Method{"M1", {}, {}});
  lib.methods.push_back(Method{"M2", {}, {}});
  r.m1 = 0;
  r.m2 = 1;

  const std::uint32_t s1 = cm.StateOrThrow("s1");
  // Values that travel through the channel locations, apart from bot_e.
  std::vector<ValueId> data = r.rule_value;
  data.insert(data.end(), r.symbol_value.begin(), r.symbol_value.end());
  data.push_back(r.bot_s);

  auto transport = [&](MethodBuilder& b, const std::string& tag, PosId from, LocId src,
                       LocId dst, PosId exit, PosId fail) {
    const PosId sep = b.P(tag + ".sep");
    for (ValueId e : data) {
      PosId got = b.P(tag + ".got(" + lib.values[e] + ")");
      PosId put = b.P(tag + ".put(" + lib.values[e] + ")");
      b.Read(from, src, e, got);
      b.Read(got, src, r.hash, put);
      b.ReadAny(got, src, fail);
      b.Write(put, dst, e, sep);
    }
    b.Write(sep, dst, r.hash, from);
    PosId end = b.P(tag + ".end");
    PosId end_put = b.P(tag + ".end.put");
    b.Read(from, src, r.bot_e, end);
    b.ReadAny(from, src, fail);
    b.Read(end, src, r.hash, end_put);
    b.ReadAny(end, src, fail);
    b.WriteSeq(end_put, dst, {r.bot_e}, r.hash, exit);
  };

  // M1
  {
    MethodBuilder b(lib, r.m1);
    const PosId top = b.P("top");
    b.Interface(top, r.ok);
    const PosId ret = b.P("ret");
    const PosId fail = b.P("fail");
    b.Tau(ret, b.ret());
    b.Write(fail, r.fail_simu, r.v_true, b.ret());

    const PosId not_failed = b.P("running");
    b.Read(top, r.fail_simu, r.v_true, ret);
    b.Read(top, r.fail_simu, r.v_false, not_failed);
    const PosId first = b.P("first");
    const PosId next_rule = b.P("readRule");
    r.m1_read_rule = next_rule;
    b.Read(not_failed, r.first_m1, r.v_true, first);
    b.Read(not_failed, r.first_m1, r.v_false, next_rule);

    auto phase_update = [&](bool to_s1) { return b.P(to_s1 ? "phase.s1" : "phase.other"); };
    auto nd = [&](std::uint32_t t) { return cm.transitions[t].to == s1; };

    for (std::uint32_t t : cm.out(cm.init)) {
      PosId mid = b.Fresh();
      b.Write(first, r.x1, r.rule_value[t], mid);
      PosId sep = b.Fresh();
      b.Write(mid, r.x1, r.hash, sep);
      PosId done = b.Fresh();
      b.WriteSeq(sep, r.x1, {r.bot_s, r.bot_e}, r.hash, done);
      b.Write(done, r.first_m1, r.v_false, phase_update(nd(t)));
    }

    auto sym_key = [&](const std::optional<std::uint32_t>& s) {
      return s ? cm.alphabet[*s] : std::string("-");
    };
    b.ReadAny(next_rule, r.y2, fail);
    std::set<std::string> built;
    for (std::uint32_t t = 0; t < cm.transitions.size(); ++t) {
      const CmTransition& tr = cm.transitions[t];
      std::optional<std::uint32_t> z1, z2;
      for (const auto& op : tr.ops) (op.kind == ChannelOp::kReceive ? z1 : z2) = op.symbol;
      const std::string key = sym_key(z1) + "," + sym_key(z2) + "," + cm.states[tr.to];
      const std::string apply = sym_key(z2) + "," + cm.states[tr.to];
      const PosId got = b.P("rule(" + key + ")");
      b.Read(next_rule, r.y2, r.rule_value[t], got);
      if (!built.insert("rule(" + key + ")").second) continue;
      const PosId sep = b.P("rule(" + key + ").sep");
      b.Read(got, r.y2, r.hash, sep);
      b.ReadAny(got, r.y2, fail);
      const PosId chosen = b.P("apply(" + apply + ")");
      if (z1) {
        const PosId start = b.P("rule(" + key + ").start");
        b.ReadOne(sep, r.y2, r.bot_s, r.hash, start, fail);
        b.ReadOne(start, r.y2, r.symbol_value[*z1], r.hash, chosen, fail);
      } else {
        b.ReadOne(sep, r.y2, r.bot_s, r.hash, chosen, fail);
      }
      if (!built.insert("apply(" + apply + ")").second) continue;
      // Guess the next rule, copy the rest of the channel, append z2.
      for (std::uint32_t t2 : cm.out(tr.to)) {
        const std::string ck = apply + "," + (nd(t2) ? "s1" : "other");
        const PosId wrote = b.P("copy(" + ck + ").rule");
        b.Write(chosen, r.x1, r.rule_value[t2], wrote);
        if (!built.insert("copy(" + ck + ")").second) continue;
        const PosId copy = b.P("copy(" + ck + ")");
        const PosId wrote_sep = b.P("copy(" + ck + ").rule.sep");
        b.Write(wrote, r.x1, r.hash, wrote_sep);
        b.WriteSeq(wrote_sep, r.x1, {r.bot_s}, r.hash, copy);
        const PosId tail = b.P("copy(" + ck + ").tail");
        const PosId sep2 = b.P("copy(" + ck + ").sep");
        for (std::uint32_t s = 0; s < cm.alphabet.size(); ++s) {
          const ValueId v = r.symbol_value[s];
          const PosId got2 = b.P("copy(" + ck + ").got(" + cm.alphabet[s] + ")");
          const PosId put = b.P("copy(" + ck + ").put(" + cm.alphabet[s] + ")");
          b.Read(copy, r.y2, v, got2);
          b.Read(got2, r.y2, r.hash, put);
          b.ReadAny(got2, r.y2, fail);
          b.Write(put, r.x1, v, sep2);
        }
        b.Write(sep2, r.x1, r.hash, copy);
        const PosId end = b.P("copy(" + ck + ").end");
        b.Read(copy, r.y2, r.bot_e, end);
        b.ReadAny(copy, r.y2, fail);
        b.Read(end, r.y2, r.hash, tail);
        b.ReadAny(end, r.y2, fail);
        std::vector<ValueId> suffix;
        if (z2) suffix.push_back(r.symbol_value[*z2]);
        suffix.push_back(r.bot_e);
        b.WriteSeq(tail, r.x1, suffix, r.hash, phase_update(nd(t2)));
      }
    }
    const PosId transport_in = b.P("transport");
    const PosId after = b.P("transported");
    const PosId set_check = b.P("phase.set");
    b.Read(phase_update(true), r.phase, r.guess, set_check);
    b.Write(set_check, r.phase, r.check, transport_in);
    b.Read(phase_update(true), r.phase, r.check, transport_in);
    b.Read(phase_update(false), r.phase, r.guess, transport_in);
    b.Read(phase_update(false), r.phase, r.check, transport_in);
    transport(b, "y1x2", transport_in, r.y1, r.x2, after, fail);
    b.Read(after, r.phase, r.guess, ret);
    b.Read(after, r.phase, r.check, top);
  }

  // M2
  {
    MethodBuilder b(lib, r.m2);
    const PosId top = b.P("top");
    b.Interface(top, r.ok);
    const PosId ret = b.P("ret");
    const PosId fail = b.P("fail");
    b.Tau(ret, b.ret());
    b.Write(fail, r.fail_simu, r.v_true, b.ret());
    const PosId first = b.P("x1y1");
    const PosId second = b.P("x2y2");
    const PosId after = b.P("transported");
    b.Read(top, r.fail_simu, r.v_true, ret);
    b.Read(top, r.fail_simu, r.v_false, first);
    transport(b, "x1y1", first, r.x1, r.y1, second, fail);
    transport(b, "x2y2", second, r.x2, r.y2, after, fail);
    b.Read(after, r.phase, r.guess, ret);
    b.Read(after, r.phase, r.check, top);
  }

  lib.Finalize();
  return r;
}

// ---------------------------------------------------------------------------
// Witness schedule

namespace {

// Shortest perfect run from `from` to `to` (at least one step), using only
// transitions accepted by `allowed` and configurations whose channels stay
// within `cap` symbols each.
template <typename Allowed>
std::vector<std::uint32_t> PerfectPath(const ChannelMachine& cm, const CmConfig& from,
                                       const CmConfig& to, std::size_t cap, Allowed allowed) {
  std::vector<CmConfig> nodes{from};
  std::vector<std::pair<std::int64_t, std::uint32_t>> parent{{-1, 0}};
  std::unordered_map<CmConfig, std::size_t, CmConfigHash> seen{{from, 0}};
  for (std::size_t head = 0; head < nodes.size(); ++head) {
    for (auto& st : StepPerfect(cm, nodes[head])) {
      if (!allowed(st.transition)) continue;
      bool fits = std::all_of(st.next.channels.begin(), st.next.channels.end(),
                              [&](const Word& w) { return w.size() <= cap; });
      if (!fits) continue;
      if (st.next == to) {
        std::vector<std::uint32_t> path{st.transition};
        for (auto n = static_cast<std::int64_t>(head); parent[n].first >= 0; n = parent[n].first) {
          path.push_back(parent[n].second);
        }
        std::reverse(path.begin(), path.end());
        return path;
      }
      if (seen.emplace(st.next, nodes.size()).second) {
        nodes.push_back(st.next);
        parent.emplace_back(static_cast<std::int64_t>(head), st.transition);
      }
    }
  }
  throw Error("no perfect run to " + FormatCmConfig(cm, to));
}

CmConfig Apply(const ChannelMachine& cm, const CmConfig& c, std::uint32_t t) {
  for (auto& st : StepPerfect(cm, c)) {
    if (st.transition == t) return st.next;
  }
  throw Error("transition not enabled");
}

}  // namespace

WitnessSchedule BuildWitnessSchedule(const ReductionLibrary& r, const CpcpInstance& inst,
                                     const std::vector<int>& solution, int rounds) {
  if (solution.empty()) throw Error("a witness needs a nonempty index sequence");
  if (!CyclicEqual(Concat(inst.a, solution), Concat(inst.b, solution))) {
    throw Error("the index sequence is not a solution");
  }
  if (rounds < 1) throw Error("at least one check round is needed");
  const ChannelMachine& cm = r.cm;
  const ChannelMachine& single = r.single;

  // Two-channel run: guess the solution, then rounds + 1 check rounds.
  CmConfig target;
  target.state = cm.StateOrThrow("s1");
  {
    std::vector<std::uint32_t> q1{*cm.FindSymbol("hd")}, q2;
    for (int i : solution) {
      q2.push_back(*cm.FindSymbol(IndexSymbol(i)));
      for (char ch : inst.a.at(static_cast<std::size_t>(i - 1))) {
        q1.push_back(*cm.FindSymbol(std::string(1, ch)));
      }
    }
    q2.push_back(*cm.FindSymbol("eoi"));
    // Channel words are stored newest first.
    target.channels = {Word(q1.rbegin(), q1.rend()), Word(q2.rbegin(), q2.rend())};
  }
  const std::size_t cap = std::max(target.channels[0].size(), target.channels[1].size()) + 1;
  auto any = [](std::uint32_t) { return true; };
  std::vector<std::uint32_t> run = PerfectPath(cm, InitialCmConfig(cm), target, cap, any);
  const std::vector<std::uint32_t> round = PerfectPath(cm, target, target, cap, any);
  for (int k = 0; k <= rounds; ++k) run.insert(run.end(), round.begin(), round.end());

  // One-channel run: prelude, then one gadget per transition.
  std::vector<std::uint32_t> rules;
  CmConfig sc = InitialCmConfig(single);
  for (std::uint32_t q = single.init; q != cm.init;) {
    std::uint32_t t = single.out(q).at(0);
    rules.push_back(t);
    sc = Apply(single, sc, t);
    q = single.transitions[t].to;
  }
  CmConfig cc = InitialCmConfig(cm);
  for (std::uint32_t t : run) {
    CmConfig next = Apply(cm, cc, t);
    CmConfig goal{next.state, {EncodeChannels(cm, single, next.channels[0], next.channels[1])}};
    std::size_t len_cap = goal.channels[0].size() + 1;
    auto path = PerfectPath(single, sc, goal, len_cap, [&](std::uint32_t u) {
      return r.origin[u] == static_cast<std::int64_t>(t);
    });
    rules.insert(rules.end(), path.begin(), path.end());
    sc = std::move(goal);
    cc = std::move(next);
  }

  // Drive the library.
  auto lib = std::make_shared<Library>(r.library);
  const SystemSpec spec = MgcCompose(lib, 2, MemoryModel::kTso, std::nullopt);
  Configuration c = InitialConfiguration(spec);
  const LocId channel_locs[4] = {r.x1, r.y1, r.x2, r.y2};
  auto is_channel = [&](LocId x) {
    return std::find(std::begin(channel_locs), std::end(channel_locs), x) !=
           std::end(channel_locs);
  };
  std::vector<bool> fresh(lib->locations.size(), false);
  std::vector<bool> is_rule(lib->values.size(), false);
  for (ValueId v : r.rule_value) is_rule[v] = true;

  WitnessSchedule out;
  Trace trace;
  std::size_t next_rule = 0;
  std::size_t occupancy = 0;
  struct Seen {
    std::vector<bool> fresh;
    std::size_t index;
    Configuration config;
  };
  std::unordered_map<Configuration, std::vector<Seen>, ConfigurationHash> snapshots;
  const std::size_t max_steps = 200'000'000;

  struct Candidate {
    Action action;
    PosId to;
  };
  auto candidates = [&](int pid) {
    std::vector<Candidate> list;
    const std::int32_t ctl = c.control[static_cast<std::size_t>(pid - 1)];
    if (ctl == kInClient) {
      MethodId m = pid == 1 ? r.m1 : r.m2;
      list.push_back({Action::Call(pid, m, r.ok), lib->methods[m].initial[r.ok]});
      return list;
    }
    const PosId q = static_cast<PosId>(ctl);
    if (auto v = lib->positions[q].final_for) {
      list.push_back({Action::Return(pid, lib->positions[q].method, *v), 0});
    }
    for (std::uint32_t ei : lib->out(q)) {
      const Edge& e = lib->edges[ei];
      switch (e.cmd.kind) {
        case CommandKind::kTau:
          list.push_back({Action::Tau(pid), e.to});
          break;
        case CommandKind::kRead: {
          ValueId v = Lookup(c, pid, e.cmd.loc);
          bool fires = e.cmd.any_value ? !lib->HasExplicitRead(q, e.cmd.loc, v) : v == e.cmd.a;
          if (fires) list.push_back({Action::Read(pid, e.cmd.loc, v), e.to});
          break;
        }
        case CommandKind::kWrite:
          list.push_back({Action::Write(pid, e.cmd.loc, e.cmd.a), e.to});
          break;
        default:
          throw Error("unexpected cas in the generated library");
      }
    }
    return list;
  };

  for (std::size_t step = 0;; ++step) {
    if (step == max_steps) throw Error("witness schedule did not close a loop");
    std::optional<Candidate> pick;
    // Flush when the previous value of a channel location has been consumed.
    for (int pid = 1; pid <= 2 && !pick; ++pid) {
      const auto& buf = c.buffers[static_cast<std::size_t>(pid - 1)];
      if (buf.empty()) continue;
      const BufferEntry& e = buf.back();
      if (!is_channel(e.loc) || !fresh[e.loc]) pick = Candidate{Action::Flush(pid, e.loc, e.val), 0};
    }
    for (int pid = 1; pid <= 2 && !pick; ++pid) {
      for (const Candidate& cand : candidates(pid)) {
        const Action& a = cand.action;
        if (a.kind == ActionKind::kRead && is_channel(a.loc) && !fresh[a.loc]) continue;
        const bool guess = a.kind == ActionKind::kWrite && a.loc == r.x1 && is_rule[a.val];
        if (guess) {
          if (next_rule >= rules.size() || a.val != r.rule_value[rules[next_rule]]) continue;
        }
        pick = cand;
        break;
      }
    }
    if (!pick) {
      throw Error("witness schedule stuck after " + FormatTrace(*lib, trace) + " " + lib->positions[c.control[0] < 0 ? 0 : c.control[0]].name + " / " + lib->positions[c.control[1] < 0 ? 0 : c.control[1]].name +
                  " actions at " + FormatConfiguration(*lib, c));
    }
    const Action& a = pick->action;
    const std::size_t i = static_cast<std::size_t>(a.pid - 1);
    switch (a.kind) {
      case ActionKind::kFlush:
        c.buffers[i].pop_back();
        c.memory[a.loc] = a.val;
        if (is_channel(a.loc)) fresh[a.loc] = true;
        break;
      case ActionKind::kRead:
        if (is_channel(a.loc)) fresh[a.loc] = false;
        c.control[i] = static_cast<std::int32_t>(pick->to);
        break;
      case ActionKind::kWrite:
        c.buffers[i].insert(c.buffers[i].begin(), BufferEntry{a.loc, a.val});
        occupancy = std::max(occupancy, c.buffers[i].size());
        if (a.loc == r.x1 && is_rule[a.val]) ++next_rule;
        c.control[i] = static_cast<std::int32_t>(pick->to);
        break;
      case ActionKind::kReturn:
        c.control[i] = kInClient;
        if (a.method == r.m1) ++out.guess_rounds;
        break;
      default:
        c.control[i] = static_cast<std::int32_t>(pick->to);
        break;
    }
    trace.push_back(a);

    if (a.pid == 1 && a.kind != ActionKind::kFlush &&
        c.control[0] == static_cast<std::int32_t>(r.m1_read_rule) &&
        Lookup(c, 1, r.phase) == r.check) {
      auto& bucket = snapshots[c];
      for (const Seen& s : bucket) {
        if (s.fresh != fresh) continue;
        out.lasso.stem.assign(trace.begin(), trace.begin() + static_cast<std::ptrdiff_t>(s.index));
        out.lasso.loop.assign(trace.begin() + static_cast<std::ptrdiff_t>(s.index), trace.end());
        out.lasso.entry = s.config;
        out.required_buffer_bound = static_cast<int>(std::max<std::size_t>(occupancy, 1));
        out.simulated_rules = next_rule;
        return out;
      }
      bucket.push_back(Seen{fresh, trace.size(), c});
    }
  }
}

}  // namespace tsolive
