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

#include "tsolive/dsl.hpp"

#include <algorithm>
#include <cctype>
#include <deque>
#include <map>
#include <set>
#include <unordered_map>

namespace tsolive {

namespace {

// ---------------------------------------------------------------------------
// Lexer

struct Token {
  enum Kind { kWord, kPunct, kEnd } kind = kEnd;
  std::string text;
  int line = 1;
  int col = 1;
};

std::vector<Token> Lex(std::string_view src) {
  std::vector<Token> tokens;
  int line = 1, col = 1;
  std::size_t i = 0;
  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n; ++k) {
      if (src[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
      ++i;
    }
  };
  static const char* kTwoChar[] = {"==", "!=", ":=", "->"};
  while (i < src.size()) {
    char c = src[i];
    if (c == '#') {
      while (i < src.size() && src[i] != '\n') advance(1);
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(1);
      continue;
    }
    Token t;
    t.line = line;
    t.col = col;
    if (std::isalnum(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t start = i;
      while (i < src.size() &&
             (std::isalnum(static_cast<unsigned char>(src[i])) || src[i] == '_')) {
        advance(1);
      }
      t.kind = Token::kWord;
      t.text = std::string(src.substr(start, i - start));
      tokens.push_back(std::move(t));
      continue;
    }
    bool matched = false;
    for (const char* two : kTwoChar) {
      if (src.substr(i, 2) == two) {
        t.kind = Token::kPunct;
        t.text = two;
        advance(2);
        matched = true;
        break;
      }
    }
    if (!matched) {
      if (std::string_view("{}();:,=*").find(c) == std::string_view::npos) {
        throw ParseError(line, col, std::string("unexpected character '") + c + "'");
      }
      t.kind = Token::kPunct;
      t.text = std::string(1, c);
      advance(1);
    }
    tokens.push_back(std::move(t));
  }
  Token end;
  end.line = line;
  end.col = col;
  tokens.push_back(end);
  return tokens;
}

// ---------------------------------------------------------------------------
// AST

struct Expr {
  std::string name;
  int line = 0, col = 0;
};

struct Cond {
  bool always = false;
  bool equal = true;
  Expr lhs, rhs;
};

struct Stmt {
  enum Kind {
    kSkip, kRead, kAssign, kWrite, kCas, kIf, kChoose, kWhile, kLabel, kGoto, kReturn
  } kind = kSkip;
  int line = 0, col = 0;
  std::string reg;     // read / assign target
  std::string target;  // location, label
  Expr e1, e2;
  Cond cond;
  std::vector<std::vector<Stmt>> blocks;  // if: then/else, cas: suc/fail, choose/while
};

class Parser {
 public:
  explicit Parser(std::vector<Token> tokens) : tokens_(std::move(tokens)) {}

  const Token& Peek(std::size_t ahead = 0) const {
    return tokens_[std::min(pos_ + ahead, tokens_.size() - 1)];
  }
  const Token& Next() {
    const Token& t = tokens_[pos_];
    if (pos_ + 1 < tokens_.size()) ++pos_;
    return t;
  }
  bool AtEnd() const { return Peek().kind == Token::kEnd; }
  bool IsPunct(const char* p, std::size_t ahead = 0) const {
    return Peek(ahead).kind == Token::kPunct && Peek(ahead).text == p;
  }
  bool IsWord(const char* w, std::size_t ahead = 0) const {
    return Peek(ahead).kind == Token::kWord && Peek(ahead).text == w;
  }
  [[noreturn]] void Fail(const Token& t, const std::string& msg) const {
    throw ParseError(t.line, t.col, msg);
  }
  void Expect(const char* p) {
    if (!IsPunct(p)) {
      Fail(Peek(), std::string("expected '") + p + "'" + Found());
    }
    Next();
  }
  const Token& ExpectWord(const char* what) {
    if (Peek().kind != Token::kWord) Fail(Peek(), std::string("expected ") + what + Found());
    return Next();
  }
  std::string Found() const {
    if (Peek().kind == Token::kEnd) return " but found end of input";
    return " but found '" + Peek().text + "'";
  }

  Expr ParseExpr() {
    const Token& t = ExpectWord("an expression");
    return Expr{t.text, t.line, t.col};
  }

  Cond ParseCond() {
    Cond c;
    Expr lhs = ParseExpr();
    if (IsPunct("==") || IsPunct("!=")) {
      c.equal = Next().text == "==";
      c.lhs = lhs;
      c.rhs = ParseExpr();
    } else if (lhs.name == "true") {
      c.always = true;
    } else {
      Fail(Peek(), "expected '==' or '!='" + Found());
    }
    return c;
  }

  std::vector<Stmt> ParseBlock() {
    Expect("{");
    std::vector<Stmt> stmts;
    while (!IsPunct("}")) {
      if (AtEnd()) Fail(Peek(), "unterminated block: expected '}'");
      stmts.push_back(ParseStmt());
    }
    Next();
    return stmts;
  }

  Stmt ParseStmt() {
    const Token& head = Peek();
    Stmt s;
    s.line = head.line;
    s.col = head.col;
    if (head.kind != Token::kWord) Fail(head, "expected a statement" + Found());
    if (IsWord("skip")) {
      Next();
      s.kind = Stmt::kSkip;
      Expect(";");
    } else if (IsWord("write") && !IsPunct(":=", 1)) {
      Next();
      s.kind = Stmt::kWrite;
      s.target = ExpectWord("a location").text;
      Expect(":=");
      s.e1 = ParseExpr();
      Expect(";");
    } else if (IsWord("cas") && !IsPunct(":=", 1)) {
      Next();
      s.kind = Stmt::kCas;
      s.target = ExpectWord("a location").text;
      s.e1 = ParseExpr();
      s.e2 = ParseExpr();
      s.blocks.push_back(ParseBlock());
      if (IsWord("else")) {
        Next();
        s.blocks.push_back(ParseBlock());
      } else {
        s.blocks.emplace_back();
      }
    } else if (IsWord("if") && !IsPunct(":=", 1)) {
      Next();
      s.kind = Stmt::kIf;
      bool paren = IsPunct("(");
      if (paren) Next();
      s.cond = ParseCond();
      if (paren) Expect(")");
      s.blocks.push_back(ParseBlock());
      if (IsWord("else")) {
        Next();
        if (IsWord("if")) {
          s.blocks.push_back({ParseStmt()});
        } else {
          s.blocks.push_back(ParseBlock());
        }
      } else {
        s.blocks.emplace_back();
      }
    } else if (IsWord("while") && !IsPunct(":=", 1)) {
      Next();
      s.kind = Stmt::kWhile;
      bool paren = IsPunct("(");
      if (paren) Next();
      s.cond = ParseCond();
      if (paren) Expect(")");
      s.blocks.push_back(ParseBlock());
    } else if (IsWord("choose") && !IsPunct(":=", 1)) {
      Next();
      s.kind = Stmt::kChoose;
      s.blocks.push_back(ParseBlock());
      while (IsWord("or")) {
        Next();
        s.blocks.push_back(ParseBlock());
      }
    } else if (IsWord("label") && !IsPunct(":=", 1)) {
      Next();
      s.kind = Stmt::kLabel;
      s.target = ExpectWord("a label name").text;
      Expect(":");
    } else if (IsWord("goto") && !IsPunct(":=", 1)) {
      Next();
      s.kind = Stmt::kGoto;
      s.target = ExpectWord("a label name").text;
      Expect(";");
    } else if (IsWord("return") && !IsPunct(":=", 1)) {
      Next();
      s.kind = Stmt::kReturn;
      s.e1 = ParseExpr();
      Expect(";");
    } else if (IsPunct(":=", 1)) {
      s.reg = Next().text;
      Next();
      if (IsWord("read") && Peek(1).kind == Token::kWord && IsPunct(";", 2)) {
        Next();
        s.kind = Stmt::kRead;
        s.target = Next().text;
      } else {
        s.kind = Stmt::kAssign;
        s.e1 = ParseExpr();
      }
      Expect(";");
    } else {
      Fail(head, "unknown statement '" + head.text + "'");
    }
    return s;
  }

 private:
  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
};

// ---------------------------------------------------------------------------
// Structured method compilation

constexpr std::int32_t kUnset = -1;

struct Operand {
  enum Kind { kValue, kRegister } kind = kValue;
  std::int32_t id = 0;  // value id or register index
  int line = 0, col = 0;
  std::string name;
};

struct Instr {
  enum Kind {
    kTau, kAssign, kRead, kWrite, kCas, kBranch, kChoose, kReturn, kEnd, kJump
  } kind = kTau;
  int reg = -1;
  LocId loc = 0;
  Operand a, b;
  bool always = false;
  bool equal = true;
  std::vector<int> next;
  int line = 0, col = 0;
};

struct VecHash {
  std::size_t operator()(const std::vector<std::int32_t>& v) const {
    std::size_t h = 1469598103934665603ull;
    for (auto x : v) {
      h ^= static_cast<std::uint32_t>(x) + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    }
    return h;
  }
};

class MethodCompiler {
 public:
  MethodCompiler(Library& lib, MethodId mid, const ParseOptions& opts)
      : lib_(lib), mid_(mid), opts_(opts) {}

  void Compile(const std::vector<Stmt>& body, int line, int col) {
    line_ = line;
    col_ = col;
    registers_.push_back("arg");
    CollectRegisters(body);
    CompileBlock(body);
    Instr end;
    end.kind = Instr::kEnd;
    Emit(end);
    for (auto& [idx, label, tok_line, tok_col] : gotos_) {
      auto it = labels_.find(label);
      if (it == labels_.end()) {
        throw ParseError(tok_line, tok_col, "undefined label '" + label + "'");
      }
      code_[idx].next = {it->second};
    }
    ComputeLiveness();
    Expand();
  }

 private:
  void CollectRegisters(const std::vector<Stmt>& body) {
    for (const auto& s : body) {
      if (s.kind == Stmt::kRead || s.kind == Stmt::kAssign) {
        if (s.reg == "arg") throw ParseError(s.line, s.col, "'arg' is read-only");
        if (lib_.FindValue(s.reg)) {
          throw ParseError(s.line, s.col, "register '" + s.reg + "' clashes with a value name");
        }
        if (std::find(registers_.begin(), registers_.end(), s.reg) == registers_.end()) {
          registers_.push_back(s.reg);
        }
      }
      for (const auto& b : s.blocks) CollectRegisters(b);
    }
  }

  Operand Resolve(const Expr& e) const {
    Operand op;
    op.line = e.line;
    op.col = e.col;
    op.name = e.name;
    auto it = std::find(registers_.begin(), registers_.end(), e.name);
    if (it != registers_.end()) {
      op.kind = Operand::kRegister;
      op.id = static_cast<std::int32_t>(it - registers_.begin());
      return op;
    }
    if (auto v = lib_.FindValue(e.name)) {
      op.kind = Operand::kValue;
      op.id = static_cast<std::int32_t>(*v);
      return op;
    }
    throw ParseError(e.line, e.col, "undeclared identifier '" + e.name + "'");
  }

  LocId ResolveLoc(const std::string& name, int line, int col) const {
    if (auto x = lib_.FindLocation(name)) return *x;
    throw ParseError(line, col, "undeclared location '" + name + "'");
  }

  int RegIndex(const std::string& name) const {
    return static_cast<int>(std::find(registers_.begin(), registers_.end(), name) -
                            registers_.begin());
  }

  int Emit(Instr in) {
    int idx = static_cast<int>(code_.size());
    if (in.next.empty() && in.kind != Instr::kEnd && in.kind != Instr::kReturn) {
      in.next = {idx + 1};
    }
    code_.push_back(std::move(in));
    return idx;
  }

  int Size() const { return static_cast<int>(code_.size()); }

  static Instr JumpTo(int target) {
    Instr in;
    in.kind = Instr::kJump;
    in.next = {target};
    return in;
  }

  void CompileBlock(const std::vector<Stmt>& body) {
    for (const auto& s : body) CompileStmt(s);
  }

  void CompileStmt(const Stmt& s) {
    Instr in;
    in.line = s.line;
    in.col = s.col;
    switch (s.kind) {
      case Stmt::kSkip:
        in.kind = Instr::kTau;
        Emit(in);
        break;
      case Stmt::kRead:
        in.kind = Instr::kRead;
        in.reg = RegIndex(s.reg);
        in.loc = ResolveLoc(s.target, s.line, s.col);
        Emit(in);
        break;
      case Stmt::kAssign:
        in.kind = Instr::kAssign;
        in.reg = RegIndex(s.reg);
        in.a = Resolve(s.e1);
        Emit(in);
        break;
      case Stmt::kWrite:
        in.kind = Instr::kWrite;
        in.loc = ResolveLoc(s.target, s.line, s.col);
        in.a = Resolve(s.e1);
        Emit(in);
        break;
      case Stmt::kReturn:
        in.kind = Instr::kReturn;
        in.a = Resolve(s.e1);
        Emit(in);
        break;
      case Stmt::kGoto: {
        in.kind = Instr::kTau;
        in.next = {-1};
        int idx = Emit(in);
        gotos_.emplace_back(idx, s.target, s.line, s.col);
        break;
      }
      case Stmt::kLabel:
        if (labels_.count(s.target)) {
          throw ParseError(s.line, s.col, "duplicate label '" + s.target + "'");
        }
        labels_[s.target] = Size();
        break;
      case Stmt::kCas:
      case Stmt::kIf: {
        if (s.kind == Stmt::kCas) {
          in.kind = Instr::kCas;
          in.loc = ResolveLoc(s.target, s.line, s.col);
          in.a = Resolve(s.e1);
          in.b = Resolve(s.e2);
        } else {
          in.kind = Instr::kBranch;
          SetCond(in, s.cond);
        }
        in.next = {-1, -1};
        int head = Emit(in);
        code_[head].next[0] = Size();
        CompileBlock(s.blocks[0]);
        int jump = Emit(JumpTo(-1));
        code_[head].next[1] = Size();
        CompileBlock(s.blocks[1]);
        code_[jump].next[0] = Size();
        break;
      }
      case Stmt::kWhile: {
        in.kind = Instr::kBranch;
        SetCond(in, s.cond);
        in.next = {-1, -1};
        int head = Emit(in);
        code_[head].next[0] = Size();
        CompileBlock(s.blocks[0]);
        Emit(JumpTo(head));
        code_[head].next[1] = Size();
        break;
      }
      case Stmt::kChoose: {
        in.kind = Instr::kChoose;
        in.next.assign(s.blocks.size(), -1);
        int head = Emit(in);
        std::vector<int> jumps;
        for (std::size_t b = 0; b < s.blocks.size(); ++b) {
          code_[head].next[b] = Size();
          CompileBlock(s.blocks[b]);
          jumps.push_back(Emit(JumpTo(-1)));
        }
        for (int j : jumps) code_[j].next[0] = Size();
        break;
      }
    }
  }

  void SetCond(Instr& in, const Cond& c) {
    in.always = c.always;
    in.equal = c.equal;
    if (!c.always) {
      in.a = Resolve(c.lhs);
      in.b = Resolve(c.rhs);
    }
  }

  int Follow(int pc) const {
    int guard = 0;
    while (code_[pc].kind == Instr::kJump) {
      pc = code_[pc].next[0];
      if (++guard > static_cast<int>(code_.size())) break;
    }
    return pc;
  }

  void ComputeLiveness() {
    const std::size_t nregs = registers_.size();
    live_.assign(code_.size(), std::vector<char>(nregs, 0));
    bool changed = true;
    while (changed) {
      changed = false;
      for (int pc = Size() - 1; pc >= 0; --pc) {
        const Instr& in = code_[pc];
        if (in.kind == Instr::kJump) continue;
        std::vector<char> live(nregs, 0);
        for (int n : in.next) {
          const auto& succ = live_[Follow(n)];
          for (std::size_t r = 0; r < nregs; ++r) live[r] |= succ[r];
        }
        if (in.reg >= 0) live[in.reg] = 0;
        auto use = [&](const Operand& op) {
          if (op.kind == Operand::kRegister) live[op.id] = 1;
        };
        switch (in.kind) {
          case Instr::kAssign:
          case Instr::kWrite:
          case Instr::kReturn:
            use(in.a);
            break;
          case Instr::kCas:
            use(in.a);
            use(in.b);
            break;
          case Instr::kBranch:
            if (!in.always) {
              use(in.a);
              use(in.b);
            }
            break;
          default:
            break;
        }
        if (live != live_[pc]) {
          live_[pc] = std::move(live);
          changed = true;
        }
      }
    }
  }

  // State key: pc followed by register values.
  using Key = std::vector<std::int32_t>;

  Key Normalize(int pc, Key regs) const {
    pc = Follow(pc);
    const auto& live = live_[pc];
    for (std::size_t r = 0; r < regs.size(); ++r) {
      if (!live[r]) regs[r] = kUnset;
    }
    Key key;
    key.reserve(regs.size() + 1);
    key.push_back(pc);
    key.insert(key.end(), regs.begin(), regs.end());
    return key;
  }

  ValueId Eval(const Operand& op, const Key& key) const {
    if (op.kind == Operand::kValue) return static_cast<ValueId>(op.id);
    std::int32_t v = key[1 + op.id];
    if (v == kUnset) {
      throw ParseError(op.line, op.col,
                       "register '" + op.name + "' used before assignment");
    }
    return static_cast<ValueId>(v);
  }

  std::string KeyName(const Key& key) const {
    std::string name = lib_.methods[mid_].name + "@" + std::to_string(key[0]);
    std::string regs;
    for (std::size_t r = 1; r < key.size(); ++r) {
      if (key[r] == kUnset) continue;
      if (!regs.empty()) regs += ",";
      regs += registers_[r - 1] + "=" + lib_.values[key[r]];
    }
    if (!regs.empty()) name += "[" + regs + "]";
    return name;
  }

  PosId AddPosition(std::string name) {
    if (lib_.positions.size() >= opts_.max_positions) {
      throw ParseError(line_, col_, "domain overflow: method '" + lib_.methods[mid_].name +
                                        "' expands past " +
                                        std::to_string(opts_.max_positions) + " positions");
    }
    PosId id = static_cast<PosId>(lib_.positions.size());
    Position p;
    p.method = mid_;
    p.name = std::move(name);
    lib_.positions.push_back(std::move(p));
    return id;
  }

  PosId Intern(const Key& key) {
    auto it = index_.find(key);
    if (it != index_.end()) return it->second;
    PosId id = AddPosition(KeyName(key));
    index_.emplace(key, id);
    work_.push_back(key);
    return id;
  }

  void AddEdges(PosId from, const Key& key) {
    const Instr& in = code_[key[0]];
    Key regs(key.begin() + 1, key.end());
    auto go = [&](int next, const Key& r) { return Intern(Normalize(next, r)); };
    auto add = [&](Command c, PosId to) { lib_.edges.push_back(Edge{from, c, to}); };
    const Method& m = lib_.methods[mid_];
    switch (in.kind) {
      case Instr::kTau:
        add(Command{CommandKind::kTau}, go(in.next[0], regs));
        break;
      case Instr::kAssign: {
        Key r = regs;
        r[in.reg] = static_cast<std::int32_t>(Eval(in.a, key));
        add(Command{CommandKind::kTau}, go(in.next[0], r));
        break;
      }
      case Instr::kRead:
        for (ValueId v = 0; v < lib_.values.size(); ++v) {
          Key r = regs;
          r[in.reg] = static_cast<std::int32_t>(v);
          add(Command{CommandKind::kRead, in.loc, v}, go(in.next[0], r));
        }
        break;
      case Instr::kWrite:
        add(Command{CommandKind::kWrite, in.loc, Eval(in.a, key)}, go(in.next[0], regs));
        break;
      case Instr::kCas: {
        ValueId a = Eval(in.a, key), b = Eval(in.b, key);
        add(Command{CommandKind::kCasSuc, in.loc, a, b}, go(in.next[0], regs));
        add(Command{CommandKind::kCasFail, in.loc, a, b}, go(in.next[1], regs));
        break;
      }
      case Instr::kBranch: {
        bool taken = in.always || ((Eval(in.a, key) == Eval(in.b, key)) == in.equal);
        add(Command{CommandKind::kTau}, go(in.next[taken ? 0 : 1], regs));
        break;
      }
      case Instr::kChoose:
        for (int n : in.next) add(Command{CommandKind::kTau}, go(n, regs));
        break;
      case Instr::kReturn:
        add(Command{CommandKind::kTau}, m.final[Eval(in.a, key)]);
        break;
      case Instr::kEnd:
      case Instr::kJump:
        break;
    }
  }

  void Expand() {
    Method& m = lib_.methods[mid_];
    const std::size_t nvals = lib_.values.size();
    m.initial.resize(nvals);
    m.final.resize(nvals);
    for (ValueId a = 0; a < nvals; ++a) {
      PosId p = AddPosition(m.name + ".is(" + lib_.values[a] + ")");
      lib_.positions[p].initial_for = a;
      m.initial[a] = p;
    }
    for (ValueId a = 0; a < nvals; ++a) {
      PosId p = AddPosition(m.name + ".fs(" + lib_.values[a] + ")");
      lib_.positions[p].final_for = a;
      m.final[a] = p;
    }
    for (ValueId a = 0; a < nvals; ++a) {
      Key regs(registers_.size(), kUnset);
      regs[0] = static_cast<std::int32_t>(a);
      AddEdges(m.initial[a], Normalize(0, regs));
    }
    while (!work_.empty()) {
      Key key = std::move(work_.front());
      work_.pop_front();
      AddEdges(index_.at(key), key);
    }
  }

  Library& lib_;
  MethodId mid_;
  const ParseOptions& opts_;
  int line_ = 0, col_ = 0;
  std::vector<std::string> registers_;
  std::vector<Instr> code_;
  std::map<std::string, int> labels_;
  std::vector<std::tuple<int, std::string, int, int>> gotos_;
  std::vector<std::vector<char>> live_;
  std::unordered_map<Key, PosId, VecHash> index_;
  std::deque<Key> work_;
};

// ---------------------------------------------------------------------------
// Raw methods

void ParseRawMethod(Parser& p, Library& lib, MethodId mid) {
  Method& m = lib.methods[mid];
  const std::size_t nvals = lib.values.size();
  std::map<std::string, PosId> names;
  std::vector<std::optional<PosId>> initial(nvals), final(nvals);
  auto pos = [&](const std::string& name) {
    auto it = names.find(name);
    if (it != names.end()) return it->second;
    PosId id = static_cast<PosId>(lib.positions.size());
    lib.positions.push_back(Position{mid, name, std::nullopt, std::nullopt});
    names.emplace(name, id);
    return id;
  };
  auto value = [&](const Token& t) {
    if (auto v = lib.FindValue(t.text)) return *v;
    p.Fail(t, "undeclared value '" + t.text + "'");
  };
  auto location = [&](const Token& t) {
    if (auto x = lib.FindLocation(t.text)) return *x;
    p.Fail(t, "undeclared location '" + t.text + "'");
  };
  p.Expect("{");
  while (!p.IsPunct("}")) {
    if (p.AtEnd()) p.Fail(p.Peek(), "unterminated method: expected '}'");
    if (p.IsWord("initial") || p.IsWord("final")) {
      bool is_initial = p.Next().text == "initial";
      const Token& vt = p.ExpectWord("a value");
      ValueId v = value(vt);
      p.Expect("->");
      PosId q = pos(p.ExpectWord("a position").text);
      auto& slot = is_initial ? initial[v] : final[v];
      if (slot) p.Fail(vt, "duplicate declaration for value '" + vt.text + "'");
      auto& tag = is_initial ? lib.positions[q].initial_for : lib.positions[q].final_for;
      if (tag) p.Fail(vt, "position already declared for another value");
      slot = q;
      tag = v;
      p.Expect(";");
      continue;
    }
    PosId from = pos(p.ExpectWord("a position").text);
    p.Expect("->");
    PosId to = pos(p.ExpectWord("a position").text);
    p.Expect(":");
    const Token& op = p.ExpectWord("a command");
    Command c;
    if (op.text == "tau") {
      c.kind = CommandKind::kTau;
    } else if (op.text == "read") {
      c.kind = CommandKind::kRead;
      c.loc = location(p.ExpectWord("a location"));
      if (p.IsPunct("*")) {
        p.Next();
        c.any_value = true;
      } else {
        c.a = value(p.ExpectWord("a value"));
      }
    } else if (op.text == "write") {
      c.kind = CommandKind::kWrite;
      c.loc = location(p.ExpectWord("a location"));
      c.a = value(p.ExpectWord("a value"));
    } else if (op.text == "cas_suc" || op.text == "cas_fail") {
      c.kind = op.text == "cas_suc" ? CommandKind::kCasSuc : CommandKind::kCasFail;
      c.loc = location(p.ExpectWord("a location"));
      c.a = value(p.ExpectWord("a value"));
      c.b = value(p.ExpectWord("a value"));
    } else {
      p.Fail(op, "unknown command '" + op.text + "'");
    }
    p.Expect(";");
    lib.edges.push_back(Edge{from, c, to});
  }
  p.Next();
  m.initial.resize(nvals);
  m.final.resize(nvals);
  for (ValueId a = 0; a < nvals; ++a) {
    if (!initial[a]) {
      initial[a] = pos(m.name + ".is(" + lib.values[a] + ")");
      lib.positions[*initial[a]].initial_for = a;
    }
    if (!final[a]) {
      final[a] = pos(m.name + ".fs(" + lib.values[a] + ")");
      lib.positions[*final[a]].final_for = a;
    }
    m.initial[a] = *initial[a];
    m.final[a] = *final[a];
  }
}

}  // namespace

// ---------------------------------------------------------------------------

Library ParseLibrary(std::string_view source, const ParseOptions& options) {
  Parser p(Lex(source));
  Library lib;
  bool saw_values = false;
  while (!p.AtEnd()) {
    const Token& head = p.Peek();
    if (p.IsWord("values")) {
      p.Next();
      p.Expect(":");
      if (saw_values) p.Fail(head, "duplicate values declaration");
      if (!lib.methods.empty() || !lib.locations.empty()) {
        p.Fail(head, "values must be declared first");
      }
      saw_values = true;
      while (!p.IsPunct(";")) {
        const Token& t = p.ExpectWord("a value name");
        if (lib.FindValue(t.text)) p.Fail(t, "duplicate value '" + t.text + "'");
        lib.values.push_back(t.text);
        if (p.IsPunct(",")) p.Next();
      }
      p.Next();
      if (lib.values.empty()) p.Fail(head, "empty value domain");
    } else if (p.IsWord("locations")) {
      p.Next();
      p.Expect(":");
      while (!p.IsPunct(";")) {
        const Token& t = p.ExpectWord("a location name");
        if (lib.FindLocation(t.text)) p.Fail(t, "duplicate location '" + t.text + "'");
        p.Expect("=");
        const Token& v = p.ExpectWord("an initial value");
        auto id = lib.FindValue(v.text);
        if (!id) p.Fail(v, "undeclared value '" + v.text + "'");
        lib.locations.push_back(t.text);
        lib.initial_memory.push_back(*id);
        if (p.IsPunct(",")) p.Next();
      }
      p.Next();
    } else if (p.IsWord("method")) {
      p.Next();
      if (!saw_values) p.Fail(head, "values must be declared before methods");
      const Token& name = p.ExpectWord("a method name");
      if (lib.FindMethod(name.text)) p.Fail(name, "duplicate method '" + name.text + "'");
      MethodId mid = static_cast<MethodId>(lib.methods.size());
      lib.methods.push_back(Method{name.text, {}, {}});
      if (p.IsWord("raw")) {
        p.Next();
        ParseRawMethod(p, lib, mid);
      } else {
        std::vector<Stmt> body = p.ParseBlock();
        MethodCompiler(lib, mid, options).Compile(body, name.line, name.col);
      }
    } else {
      p.Fail(head, "expected 'values', 'locations' or 'method'" + p.Found());
    }
  }
  if (!saw_values) throw ParseError(1, 1, "missing values declaration");
  lib.Finalize();
  return lib;
}

std::vector<std::string> ValidateLibrary(const Library& lib) {
  std::vector<std::string> out;
  const std::size_t nvals = lib.values.size();
  auto pname = [&lib](PosId p) {
    return p < lib.positions.size() ? lib.positions[p].name : "#" + std::to_string(p);
  };
  if (lib.initial_memory.size() != lib.locations.size()) {
    out.push_back("initial memory does not cover every location");
  }
  for (std::size_t x = 0; x < lib.initial_memory.size(); ++x) {
    if (lib.initial_memory[x] >= nvals) out.push_back("location " + lib.locations[x] + " has an undeclared initial value");
  }
  for (MethodId m = 0; m < lib.methods.size(); ++m) {
    const Method& meth = lib.methods[m];
    if (meth.initial.size() != nvals || meth.final.size() != nvals) {
      out.push_back("method " + meth.name + " lacks is/fs positions for every value");
      continue;
    }
    for (ValueId a = 0; a < nvals; ++a) {
      for (PosId p : {meth.initial[a], meth.final[a]}) {
        if (p >= lib.positions.size() || lib.positions[p].method != m) {
          out.push_back("method " + meth.name + ": is/fs position " + pname(p) +
                        " belongs to another method");
        }
      }
    }
  }
  for (std::size_t i = 0; i < lib.edges.size(); ++i) {
    const Edge& e = lib.edges[i];
    std::string where = "edge " + std::to_string(i) + " (" + pname(e.from) + " -> " + pname(e.to) + ")";
    if (e.from >= lib.positions.size() || e.to >= lib.positions.size()) {
      out.push_back(where + " references an unknown position");
      continue;
    }
    const Position& from = lib.positions[e.from];
    const Position& to = lib.positions[e.to];
    if (from.method != to.method) out.push_back(where + " crosses methods");
    if (to.initial_for) out.push_back(where + " enters initial position " + to.name);
    if (from.final_for) out.push_back(where + " leaves final position " + from.name);
    const Command& c = e.cmd;
    if (c.kind != CommandKind::kTau && c.loc >= lib.locations.size()) {
      out.push_back(where + " uses an undeclared location");
    }
    bool uses_a = c.kind != CommandKind::kTau && !(c.kind == CommandKind::kRead && c.any_value);
    bool uses_b = c.kind == CommandKind::kCasSuc || c.kind == CommandKind::kCasFail;
    if ((uses_a && c.a >= nvals) || (uses_b && c.b >= nvals)) {
      out.push_back(where + " uses an undeclared value");
    }
  }
  return out;
}

std::string FormatLibraryRaw(const Library& lib) {
  std::string out = "values: ";
  for (std::size_t i = 0; i < lib.values.size(); ++i) {
    out += (i ? ", " : "") + lib.values[i];
  }
  out += ";\n";
  if (!lib.locations.empty()) {
    out += "locations: ";
    for (std::size_t x = 0; x < lib.locations.size(); ++x) {
      out += (x ? ", " : "") + lib.locations[x] + " = " + lib.values[lib.initial_memory[x]];
    }
    out += ";\n";
  }
  std::vector<std::vector<std::size_t>> edges_of(lib.methods.size());
  for (std::size_t i = 0; i < lib.edges.size(); ++i) {
    edges_of[lib.positions[lib.edges[i].from].method].push_back(i);
  }
  auto p = [](PosId id) { return "p" + std::to_string(id); };
  for (MethodId m = 0; m < lib.methods.size(); ++m) {
    const Method& meth = lib.methods[m];
    out += "\nmethod " + meth.name + " raw {\n";
    for (ValueId a = 0; a < meth.initial.size(); ++a) {
      out += "  initial " + lib.values[a] + " -> " + p(meth.initial[a]) + ";\n";
    }
    for (ValueId a = 0; a < meth.final.size(); ++a) {
      out += "  final " + lib.values[a] + " -> " + p(meth.final[a]) + ";\n";
    }
    for (std::size_t i : edges_of[m]) {
      const Edge& e = lib.edges[i];
      const Command& c = e.cmd;
      out += "  " + p(e.from) + " -> " + p(e.to) + " : ";
      switch (c.kind) {
        case CommandKind::kTau:
          out += "tau";
          break;
        case CommandKind::kRead:
          out += "read " + lib.locations[c.loc] + " " + (c.any_value ? std::string("*") : lib.values[c.a]);
          break;
        case CommandKind::kWrite:
          out += "write " + lib.locations[c.loc] + " " + lib.values[c.a];
          break;
        case CommandKind::kCasSuc:
        case CommandKind::kCasFail:
          out += std::string(c.kind == CommandKind::kCasSuc ? "cas_suc " : "cas_fail ") +
                 lib.locations[c.loc] + " " + lib.values[c.a] + " " + lib.values[c.b];
          break;
      }
      out += ";\n";
    }
    out += "}\n";
  }
  return out;
}

SystemSpec MgcCompose(std::shared_ptr<const Library> lib, int procs,
                      MemoryModel model, std::optional<int> buffer_bound) {
  if (!lib) throw Error("no library");
  if (procs < 1) throw Error("process count must be at least 1");
  if (model == MemoryModel::kTso && buffer_bound && *buffer_bound < 1) {
    throw Error("buffer bound must be positive under TSO");
  }
  if (!lib->finalized()) throw Error("library is not finalized");
  auto violations = ValidateLibrary(*lib);
  if (!violations.empty()) throw Error("invalid library: " + violations.front());
  SystemSpec spec;
  spec.library = std::move(lib);
  spec.procs = procs;
  spec.model = model;
  spec.buffer_bound = model == MemoryModel::kTso ? buffer_bound : std::nullopt;
  return spec;
}

Configuration InitialConfiguration(const SystemSpec& spec) {
  Configuration c;
  c.control.assign(spec.procs, kInClient);
  c.memory = spec.lib().initial_memory;
  c.buffers.assign(spec.procs, {});
  return c;
}

}  // namespace tsolive
