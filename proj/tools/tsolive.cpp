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


// Command-line front end. Every command prints one JSON report on stdout;
// artifacts (witnesses, machines, libraries) go to files.

#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "tsolive/core.hpp"
#include "tsolive/cpcp.hpp"
#include "tsolive/dsl.hpp"
#include "tsolive/lcm.hpp"
#include "tsolive/liveness.hpp"
#include "tsolive/semantics.hpp"

namespace {

using json = nlohmann::ordered_json;
using namespace tsolive;

enum Exit : int {
  kOk = 0,
  kViolated = 1,
  kUsage = 2,
  kBudget = 3,
  kNoSolution = 4,
};

constexpr const char* kExitTable =
    "Exit codes:\n"
    "  0  no violation at the bound, SATISFIED, or command succeeded\n"
    "  1  VIOLATED (witness written); for replay, the trace does not replay\n"
    "  2  usage, parse or input error\n"
    "  3  node budget exceeded\n"
    "  4  cpcp witness: no solution up to the length bound\n"
    "Environment: TSOLIVE_BUDGET sets the default node budget (10000000).\n";

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void WriteFile(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UsageError("cannot write " + path);
  out << text;
}

std::string Fnv1a(const std::string& bytes) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : bytes) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string DefaultOutput(const std::string& input, const std::string& suffix) {
  return std::filesystem::path(input).stem().string() + suffix;
}

std::size_t DefaultBudget() {
  if (const char* env = std::getenv("TSOLIVE_BUDGET")) {
    try {
      return static_cast<std::size_t>(std::stoull(env));
    } catch (const std::exception&) {
      throw UsageError(std::string("TSOLIVE_BUDGET is not a number: ") + env);
    }
  }
  return 10'000'000;
}

struct Report {
  json doc;
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();

  explicit Report(const std::string& command) { doc["command"] = command; }

  void Input(const std::string& path, const std::string& bytes) {
    doc["inputs"].push_back({{"file", path}, {"fnv1a64", Fnv1a(bytes)}});
  }

  int Emit(int code) {
    doc["exit"] = code;
    doc["wall_ms"] = std::chrono::duration<double, std::milli>(
                         std::chrono::steady_clock::now() - start)
                         .count();
    std::cout << doc.dump(2) << "\n";
    return code;
  }
};

struct SystemFlags {
  int procs = 2;
  std::string model = "tso";
  int bound = 4;
  std::size_t budget = 0;

  void Add(CLI::App* app, bool with_budget) {
    app->add_option("--procs", procs, "number of processes")->check(CLI::PositiveNumber);
    app->add_option("--model", model, "memory model")->check(CLI::IsMember({"tso", "sc"}));
    app->add_option("--buffer-bound", bound, "store-buffer bound under tso")
        ->check(CLI::PositiveNumber);
    if (with_budget) app->add_option("--budget", budget, "node budget");
  }

  SystemSpec Spec(std::shared_ptr<const Library> lib) const {
    MemoryModel m = model == "sc" ? MemoryModel::kSc : MemoryModel::kTso;
    return MgcCompose(std::move(lib), procs, m, m == MemoryModel::kTso ? std::optional(bound)
                                                                        : std::nullopt);
  }

  json Json() const {
    json j{{"procs", procs}, {"model", model}};
    j["buffer_bound"] = model == "tso" ? json(bound) : json(nullptr);
    if (budget) j["budget"] = budget;
    return j;
  }
};

std::shared_ptr<Library> LoadLibrary(const std::string& path, Report& report) {
  std::string text = ReadFile(path);
  report.Input(path, text);
  return std::make_shared<Library>(ParseLibrary(text));
}

json ViolationJson(const Library& lib, ViolationReport r) {
  r.stats.millis = 0;
  json j = json::parse(ReportJson(lib, r));
  if (j.contains("stats")) j["stats"].erase("millis");
  return j;
}

// ---------------------------------------------------------------------------

int RunCheck(const std::string& file, const std::string& property, const SystemFlags& flags,
             std::string witness_path) {
  Report report("check");
  auto p = ParseProperty(property);
  if (!p) throw UsageError("unknown property '" + property + "'");
  auto lib = LoadLibrary(file, report);
  report.doc["parameters"] = flags.Json();
  report.doc["parameters"]["property"] = PropertyName(*p);
  const SystemSpec spec = flags.Spec(lib);
  ExploreOptions options;
  options.node_budget = flags.budget;
  try {
    ViolationReport r = *p == Property::kObstructionFreedom
                            ? CheckObstructionFreedom(spec, options)
                            : FindViolation(spec, *p, options);
    report.doc["result"] = ViolationJson(*lib, r);
    if (r.verdict == Verdict::kViolated) {
      if (witness_path.empty()) {
        witness_path = DefaultOutput(file, "." + std::string(PropertyName(*p)) + ".lasso");
      }
      std::ostringstream head;
      head << "# procs=" << flags.procs << " model=" << flags.model;
      if (flags.model == "tso") head << " buffer-bound=" << flags.bound;
      WriteFile(witness_path, head.str() + "\n" + FormatLasso(*lib, *r.witness));
      report.doc["witness_file"] = witness_path;
      return report.Emit(kViolated);
    }
    return report.Emit(kOk);
  } catch (const BudgetExceeded& e) {
    report.doc["result"] = {{"verdict", "BUDGET_EXCEEDED"},
                            {"budget", e.budget()},
                            {"frontier", e.frontier().size()}};
    return report.Emit(kBudget);
  }
}

// Reads `# procs=2 model=tso buffer-bound=7` from a witness header.
void ApplyHeader(const std::string& text, SystemFlags& flags, const CLI::App& app) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line.rfind("# ", 0) != 0) return;
  std::istringstream words(line.substr(2));
  for (std::string w; words >> w;) {
    auto eq = w.find('=');
    if (eq == std::string::npos) continue;
    std::string key = w.substr(0, eq), val = w.substr(eq + 1);
    if (key == "procs" && app.count("--procs") == 0) flags.procs = std::stoi(val);
    if (key == "model" && app.count("--model") == 0) flags.model = val;
    if (key == "buffer-bound" && app.count("--buffer-bound") == 0) flags.bound = std::stoi(val);
  }
}

int RunReplay(const std::string& file, const std::string& trace_file, SystemFlags flags,
              const CLI::App& app) {
  Report report("replay");
  auto lib = LoadLibrary(file, report);
  std::string text = ReadFile(trace_file);
  report.Input(trace_file, text);
  ApplyHeader(text, flags, app);
  report.doc["parameters"] = flags.Json();
  const SystemSpec spec = flags.Spec(lib);
  const bool lasso = text.find("--- stem ---") != std::string::npos;
  try {
    if (lasso) {
      LassoWitness w = ParseLasso(*lib, text);
      report.doc["result"]["kind"] = "lasso";
      report.doc["result"]["stem"] = w.stem.size();
      report.doc["result"]["loop"] = w.loop.size();
      if (!LassoReplays(spec, w)) {
        report.doc["result"]["replays"] = false;
        return report.Emit(kViolated);
      }
      report.doc["result"]["replays"] = true;
      json violated = json::array();
      for (Property p : kAllProperties) {
        if (CheckLassoConditions(spec, w, p)) violated.push_back(PropertyName(p));
      }
      report.doc["result"]["violates"] = violated;
      return report.Emit(kOk);
    }
    Trace t = ParseTrace(*lib, text);
    report.doc["result"]["kind"] = "trace";
    report.doc["result"]["length"] = t.size();
    auto ends = ReplayAll(spec, t, {InitialConfiguration(spec)});
    report.doc["result"]["replays"] = true;
    report.doc["result"]["end_configurations"] = ends.size();
    return report.Emit(kOk);
  } catch (const ReplayError& e) {
    report.doc["result"]["replays"] = false;
    report.doc["result"]["failed_at"] = e.index();
    report.doc["result"]["error"] = e.what();
    return report.Emit(kViolated);
  }
}

int RunExplore(const std::string& file, const SystemFlags& flags, const std::string& arcs_file,
               const std::string& nodes_file) {
  Report report("explore");
  auto lib = LoadLibrary(file, report);
  report.doc["parameters"] = flags.Json();
  ExploreOptions options;
  options.node_budget = flags.budget;
  try {
    StateGraph g = Explore(flags.Spec(lib), options);
    std::uint32_t depth = 0;
    for (auto d : g.depth) depth = std::max(depth, d);
    std::size_t empty = 0;
    for (const auto& c : g.nodes) empty += c.AllBuffersEmpty() ? 1 : 0;
    report.doc["result"] = {{"nodes", g.node_count()},
                            {"arcs", g.arc_count()},
                            {"max_depth", depth},
                            {"buffers_empty_nodes", empty}};
    if (!arcs_file.empty() || !nodes_file.empty()) {
      std::ostringstream arcs, nodes;
      WriteGraph(*lib, g, arcs, nodes);
      if (!arcs_file.empty()) WriteFile(arcs_file, arcs.str());
      if (!nodes_file.empty()) WriteFile(nodes_file, nodes.str());
    }
    return report.Emit(kOk);
  } catch (const BudgetExceeded& e) {
    report.doc["result"] = {{"verdict", "BUDGET_EXCEEDED"}, {"budget", e.budget()}};
    return report.Emit(kBudget);
  }
}

json SolutionJson(const std::optional<std::vector<int>>& sol, int max_len) {
  if (!sol) return "NONE_UP_TO(" + std::to_string(max_len) + ")";
  return *sol;
}

CpcpInstance LoadInstance(const std::string& file, Report& report) {
  std::string text = ReadFile(file);
  report.Input(file, text);
  return ParseCpcp(text);
}

int RunCpcp(const std::string& sub, const std::string& file, std::string out, int max_len,
            int rounds) {
  Report report("cpcp " + sub);
  if (sub == "to-single") {
    std::string text = ReadFile(file);
    report.Input(file, text);
    ChannelMachine single = ToSingleChannel(ParseChannelMachine(text));
    if (out.empty()) out = DefaultOutput(file, ".single.cm");
    WriteFile(out, FormatChannelMachine(single));
    report.doc["result"] = {{"states", single.states.size()},
                            {"transitions", single.transitions.size()},
                            {"output", out}};
    return report.Emit(kOk);
  }
  const CpcpInstance inst = LoadInstance(file, report);
  report.doc["parameters"] = {{"max_len", max_len}};
  if (sub == "solve") {
    auto sol = SolveBrute(inst, max_len);
    if (out.empty()) out = DefaultOutput(file, ".solution");
    std::string text;
    if (sol) {
      for (int i : *sol) text += std::to_string(i) + " ";
      text.back() = '\n';
    } else {
      text = "NONE_UP_TO(" + std::to_string(max_len) + ")\n";
    }
    WriteFile(out, text);
    report.doc["result"] = {{"solution", SolutionJson(sol, max_len)}, {"output", out}};
    return report.Emit(kOk);
  }
  if (sub == "build-cm") {
    ChannelMachine cm = BuildCm(inst);
    if (out.empty()) out = DefaultOutput(file, ".cm");
    WriteFile(out, FormatChannelMachine(cm));
    report.doc["result"] = {{"states", cm.states.size()},
                            {"transitions", cm.transitions.size()},
                            {"output", out}};
    return report.Emit(kOk);
  }
  if (sub == "compile-lib") {
    ReductionLibrary r = GenerateLibrary(inst);
    if (out.empty()) out = DefaultOutput(file, ".lib");
    WriteFile(out, FormatLibraryRaw(r.library));
    report.doc["result"] = {{"values", r.library.values.size()},
                            {"positions", r.library.positions.size()},
                            {"edges", r.library.edges.size()},
                            {"output", out}};
    return report.Emit(kOk);
  }
  // witness
  auto sol = SolveBrute(inst, max_len);
  report.doc["result"]["solution"] = SolutionJson(sol, max_len);
  if (!sol) return report.Emit(kNoSolution);
  ReductionLibrary r = GenerateLibrary(inst);
  WitnessSchedule w = BuildWitnessSchedule(r, inst, *sol, rounds);
  auto lib = std::make_shared<Library>(r.library);
  const SystemSpec spec = MgcCompose(lib, 2, MemoryModel::kTso, w.required_buffer_bound);
  LassoWitness lasso = w.lasso;
  const bool replays = LassoReplays(spec, lasso);
  json& res = report.doc["result"];
  res["buffer_bound"] = w.required_buffer_bound;
  res["stem"] = lasso.stem.size();
  res["loop"] = lasso.loop.size();
  res["guess_rounds"] = w.guess_rounds;
  res["simulated_rules"] = w.simulated_rules;
  res["replays"] = replays;
  json violated = json::array();
  bool all_four = replays;
  if (replays) {
    LoopSummary s = Summarize(lasso.entry, lasso.loop);
    res["loop_fair"] = std::all_of(s.acts.begin(), s.acts.end(), [](bool b) { return b; });
    res["loop_return_free"] = !s.any_return;
    for (Property p : kAllProperties) {
      const bool v = CheckLassoConditions(spec, lasso, p);
      if (v) violated.push_back(PropertyName(p));
      if (p != Property::kObstructionFreedom) all_four = all_four && v;
    }
  }
  res["violates"] = violated;
  if (out.empty()) out = DefaultOutput(file, ".lasso");
  const std::string lib_out = std::filesystem::path(out).replace_extension(".lib").string();
  WriteFile(out, "# procs=2 model=tso buffer-bound=" + std::to_string(w.required_buffer_bound) +
                     "\n" + FormatLasso(*lib, lasso));
  WriteFile(lib_out, FormatLibraryRaw(*lib));
  res["witness_file"] = out;
  res["library_file"] = lib_out;
  return report.Emit(all_four ? kViolated : kOk);
}

json LassoJson(const ChannelMachine& cm, const CmLasso& l) {
  auto steps = [&](const std::vector<CmStep>& v) {
    json a = json::array();
    for (const auto& s : v) a.push_back(s.transition);
    return a;
  };
  return {{"start", FormatCmConfig(cm, l.start)}, {"stem", steps(l.stem)}, {"loop", steps(l.loop)}};
}

int RunLcm(const std::string& sub, const std::string& file, const std::string& from,
           const std::string& to, std::size_t channel_bound, std::size_t depth) {
  Report report("lcm " + sub);
  std::string text = ReadFile(file);
  report.Input(file, text);
  ChannelMachine cm = ParseChannelMachine(text);
  if (sub == "reach") {
    const std::uint32_t q0 = from.empty() ? cm.init : cm.StateOrThrow(from);
    const std::uint32_t q1 = cm.StateOrThrow(to);
    BackwardStats stats;
    bool reach = BackwardReach(cm, q0, q1, &stats);
    report.doc["parameters"] = {{"from", cm.states[q0]}, {"to", cm.states[q1]}};
    report.doc["result"] = {{"reachable", reach},
                            {"iterations", stats.iterations},
                            {"minimal_elements", stats.minimal_elements}};
    return report.Emit(kOk);
  }
  const std::uint32_t target = cm.StateOrThrow(to);
  report.doc["parameters"] = {
      {"through", cm.states[target]}, {"channel_bound", channel_bound}, {"depth", depth}};
  LassoSearchResult res = BoundedLassoSearch(cm, target, channel_bound, depth);
  report.doc["result"]["explored"] = res.explored;
  report.doc["result"]["budget_hit"] = res.budget_hit;
  if (res.witness) {
    report.doc["result"]["verdict"] = "WITNESS";
    report.doc["result"]["witness"] = LassoJson(cm, *res.witness);
  } else {
    report.doc["result"]["verdict"] = "NO_WITNESS_AT_BOUND";
  }
  return report.Emit(kOk);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"tsolive: liveness checking for concurrent libraries under TSO"};
  app.footer(kExitTable);
  app.require_subcommand(1);

  SystemFlags flags;
  flags.budget = 0;
  std::string file, second, property, out, arcs_file, nodes_file, from, to = "s1";
  int max_len = 6, rounds = 2;
  std::size_t channel_bound = 8, depth = 10'000;

  auto* check = app.add_subcommand("check", "search for a liveness violation");
  check->add_option("--property", property,
                    "lock-freedom | wait-freedom | deadlock-freedom | starvation-freedom | "
                    "obstruction-freedom")
      ->required();
  flags.Add(check, true);
  check->add_option("--witness", out, "witness file (default: <lib>.<property>.lasso)");
  check->add_option("file", file, "library file")->required();

  auto* replay = app.add_subcommand("replay", "replay a trace or lasso on a library");
  flags.Add(replay, false);
  replay->add_option("file", file, "library file")->required();
  replay->add_option("trace", second, "trace or lasso file")->required();

  auto* explore = app.add_subcommand("explore", "enumerate the reachable configurations");
  flags.Add(explore, true);
  explore->add_option("--arcs", arcs_file, "write arcs as TSV");
  explore->add_option("--nodes", nodes_file, "write nodes as TSV");
  explore->add_option("file", file, "library file")->required();

  auto* cpcp = app.add_subcommand("cpcp", "cyclic PCP reduction pipeline");
  cpcp->require_subcommand(1);
  for (const char* sub : {"solve", "build-cm", "to-single", "compile-lib", "witness"}) {
    auto* s = cpcp->add_subcommand(sub);
    s->add_option("file", file, std::string(sub) == "to-single" ? "two-channel machine file"
                                                                : "instance file")
        ->required();
    s->add_option("--out", out, "artifact file");
    if (std::string(sub) == "solve" || std::string(sub) == "witness") {
      s->add_option("--max-len", max_len, "longest index sequence tried")
          ->check(CLI::PositiveNumber);
    }
    if (std::string(sub) == "witness") {
      s->add_option("--rounds", rounds, "check rounds planned")->check(CLI::PositiveNumber);
    }
  }

  auto* lcm = app.add_subcommand("lcm", "lossy channel machines");
  lcm->require_subcommand(1);
  auto* reach = lcm->add_subcommand("reach", "control-state reachability");
  reach->add_option("file", file)->required();
  reach->add_option("--from", from, "start state (default: init)");
  reach->add_option("--to", to, "target state")->required();
  auto* lasso = lcm->add_subcommand("lasso", "bounded search for a lasso through a state");
  lasso->add_option("file", file)->required();
  lasso->add_option("--through", to, "state the loop must visit");
  lasso->add_option("--channel-bound", channel_bound);
  lasso->add_option("--depth", depth, "configuration budget");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    std::cerr << app.help();
    return kUsage;
  }

  try {
    if (flags.budget == 0 && (*check || *explore)) flags.budget = DefaultBudget();
    if (*check) return RunCheck(file, property, flags, out);
    if (*replay) return RunReplay(file, second, flags, *replay);
    if (*explore) return RunExplore(file, flags, arcs_file, nodes_file);
    if (*cpcp) {
      for (auto* s : cpcp->get_subcommands()) {
        if (*s) return RunCpcp(s->get_name(), file, out, max_len, rounds);
      }
    }
    if (*reach) return RunLcm("reach", file, from, to, 0, 0);
    if (*lasso) return RunLcm("lasso", file, "", to, channel_bound, depth);
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kUsage;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  }
  return kUsage;
}
