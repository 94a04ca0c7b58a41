// One PASS/FAIL line per acceptance criterion. Exit status is the number of
// failed criteria (capped at 1).

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "neck/cli.hpp"
#include "neck/neck.hpp"
#include "support/brute_graph.hpp"
#include "support/corpus.hpp"
#include "support/program_gen.hpp"
#include "support/properties.hpp"
#include "support/taint_oracle.hpp"

using namespace neck;
using Clock = std::chrono::steady_clock;

namespace {

// Pinned limits.
constexpr int kOraclePrograms = 300;
constexpr double kOracleBudgetSeconds = 60.0;
constexpr int kInvariantPrograms = 300;
constexpr int kTaintPrograms = 100;
constexpr std::size_t kArticulationNodes = 12;
constexpr std::size_t kPostDomNodes = 10;
constexpr double kScalingBudgetSeconds = 10.0;
constexpr double kTimingFloorMs = 1.0;
constexpr int kTimingRepeats = 3;

struct Outcome {
  bool pass;
  std::string detail;
};

int failures = 0;

void report(const std::string& name, const Outcome& o) {
  std::cout << (o.pass ? "PASS " : "FAIL ") << name << ": " << o.detail << std::endl;
  failures += !o.pass;
}

void criterion(const std::string& name, const std::function<Outcome()>& fn) {
  try {
    report(name, fn());
  } catch (const std::exception& e) {
    report(name, {false, std::string("exception: ") + e.what()});
  }
}

std::string where(const BoundaryReport& r) {
  if (!r.boundary) return "none";
  return r.boundary->to_string() + (r.boundary_start ? "@" + std::to_string(r.boundary_start) : "");
}

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

bool has_step(const Candidate& c, OriginStep::Kind k) {
  return std::any_of(c.origin.begin(), c.origin.end(), [&](const OriginStep& s) { return s.kind == k; });
}

const Candidate* selected(const BoundaryReport& r) {
  for (const auto& c : r.candidates)
    if (c.survived()) return &c;
  return nullptr;
}

Outcome golden_corpus() {
  struct Case {
    std::string fixture;
    std::string expect;  // "none" or "main/<block>[@start]"
    std::function<std::string(const BoundaryReport&)> extra;
  };
  auto proxy = [](const BoundaryReport& r) -> std::string {
    const auto* c = selected(r);
    return c && has_step(*c, OriginStep::Kind::proxy_for) ? "" : "boundary is not a proxy";
  };
  auto override_first = [](const BoundaryReport& r) -> std::string {
    for (const auto& c : r.candidates)
      if (c.block.block == "norm" && c.eliminated_by) return "";
    return "the loop exit before the override was not rejected";
  };
  std::vector<Case> cases{
      {"wc_mini.mir", "main/done", {}},
      {"config_file.mir", "main/loaded", {}},
      {"blended.mir", "none", {}},
      {"no_loop.mir", "none", {}},
      {"two_proc.mir", "main/setup@1", proxy},
      {"feature_override.mir", "main/ready", override_first},
      {"nested_loops.mir", "main/done", {}},
      {"server.mir", "main/listen", {}},
      {"dead_code.mir", "main/done", {}},
      {"getopt_style.mir", "main/done", {}},
      {"recursive_parse.mir", "none", {}},
  };
  std::string bad;
  for (const auto& c : cases) {
    auto r = identify_boundary(fixtures::fixture(c.fixture));
    std::string got = where(r);
    if (got != c.expect) bad += " " + c.fixture + "=" + got + "(want " + c.expect + ")";
    if (c.extra)
      if (auto m = c.extra(r); !m.empty()) bad += " " + c.fixture + ":" + m;
  }
  if (!bad.empty()) return {false, "mismatches:" + bad};
  return {true, std::to_string(cases.size()) + " fixtures exact"};
}

Outcome oracle_agreement() {
  auto start = Clock::now();
  int agree = 0, found = 0, with_loops = 0;
  std::string first_bad;
  for (int k = 0; k < kOraclePrograms; ++k) {
    auto p = testgen::ProgramGenerator(static_cast<std::uint64_t>(k) + 1).generate();
    bool loop = false;
    for (const auto& proc : p.procedures) {
      auto a = analyze_procedure(proc);
      for (int b = 0; b < a.cfg.block_count(); ++b) loop = loop || a.sccs.in_loop(b);
    }
    with_loops += loop;
    auto x = identify_boundary(p);
    auto y = oracle_boundary(p);
    found += x.boundary.has_value();
    if (same_outcome(x, y))
      ++agree;
    else if (first_bad.empty())
      first_bad = " first disagreement: seed " + std::to_string(k + 1) + " pipeline " + where(x) + " oracle " + where(y);
  }
  double secs = seconds_since(start);
  std::ostringstream d;
  d << agree << "/" << kOraclePrograms << " agree (" << found << " with a boundary, " << with_loops
    << " with a loop) in " << secs << " s, budget " << kOracleBudgetSeconds << " s" << first_bad;
  return {agree == kOraclePrograms && secs < kOracleBudgetSeconds, d.str()};
}

Outcome graph_oracles() {
  std::vector<graph::Digraph> graphs;
  for (std::uint64_t seed = 1; seed <= 2000; ++seed) {
    auto p = testgen::ProgramGenerator(seed, {.max_blocks = 14}).generate();
    for (const auto& proc : p.procedures) graphs.push_back(build_block_graph(proc).edges);
  }
  std::mt19937_64 rng(11);
  for (int k = 0; k < 500; ++k)
    graphs.push_back(brute::random_digraph(rng, 1 + static_cast<int>(rng() % kArticulationNodes), 0.05 + 0.05 * (k % 8)));

  int ap = 0, ap_ok = 0, pd = 0, pd_ok = 0, scc = 0, scc_ok = 0;
  for (const auto& g : graphs) {
    auto adj = brute::adjacency(g);
    const int n = static_cast<int>(adj.size());
    if (adj.size() <= kArticulationNodes) {
      ++ap;
      ap_ok += graph::articulation_points(g) == brute::articulation_by_removal(adj);
    }
    ++scc;
    auto parts = graph::scc(g);
    auto closure = brute::transitive_closure(adj);
    bool same = true;
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        same = same && ((parts.component_of[a] == parts.component_of[b]) == (closure[a][b] && closure[b][a]));
    scc_ok += same;
    if (adj.size() <= kPostDomNodes) {
      ++pd;
      // Block graphs end in their virtual exit; random graphs use the last node.
      auto tree = graph::post_dominators(g, n - 1);
      bool ok = true;
      for (int p = 0; p < n; ++p)
        for (int v = 0; v < n; ++v) ok = ok && tree.post_dominates(p, v) == brute::post_dominates_by_paths(adj, n - 1, p, v);
      pd_ok += ok;
    }
  }
  std::ostringstream d;
  d << "articulation " << ap_ok << "/" << ap << ", post-dominance " << pd_ok << "/" << pd << ", scc " << scc_ok << "/"
    << scc;
  return {ap_ok == ap && pd_ok == pd && scc_ok == scc && ap > 0 && pd > 0, d.str()};
}

Outcome invariants() {
  int checked = 0, with_boundary = 0;
  std::string first_bad;
  auto check = [&](const std::string& label, const ir::Program& p) {
    auto r = identify_boundary(p);
    ++checked;
    with_boundary += r.boundary.has_value();
    auto v = testprop::boundary_violations(p, {}, r);
    if (!v.empty() && first_bad.empty()) first_bad = " first violation: " + label + " " + v.front();
    return v.empty();
  };
  int ok = 0;
  for (const auto& name : fixtures::valid_fixtures()) ok += check(name, fixtures::fixture(name));
  for (int k = 0; k < kInvariantPrograms; ++k)
    ok += check("seed " + std::to_string(5000 + k), testgen::ProgramGenerator(5000 + static_cast<std::uint64_t>(k)).generate());
  std::ostringstream d;
  d << ok << "/" << checked << " programs without violations (" << with_boundary << " with a boundary)" << first_bad;
  return {ok == checked && with_boundary > 0, d.str()};
}

Outcome taint_soundness() {
  testgen::GenOptions opt;
  opt.loop_probability = 0;
  opt.allow_calls = false;
  int ok = 0;
  std::size_t points = 0;
  std::string first_bad;
  for (int k = 0; k < kTaintPrograms; ++k) {
    auto p = testgen::ProgramGenerator(9000 + static_cast<std::uint64_t>(k), opt).generate();
    auto t = taint_analysis(p, {});
    testoracle::DefUseTaint oracle(p, {});
    bool same = true;
    for (int n = 0; n < static_cast<int>(oracle.point_count()); ++n)
      for (const auto& var : oracle.variables()) {
        auto loc = oracle.location(n);
        ++points;
        if (t.tainted_before(loc, resolve_variable(p, loc.procedure, var)) != oracle.tainted_before(n, var)) {
          same = false;
          if (first_bad.empty()) first_bad = " first mismatch: " + loc.to_string() + " " + var;
        }
      }
    ok += same;
  }
  std::ostringstream d;
  d << ok << "/" << kTaintPrograms << " programs agree (" << points << " point-variable pairs)" << first_bad;
  return {ok == kTaintPrograms, d.str()};
}

Outcome scaling() {
  const std::vector<int> loops{333, 1666, 3333};
  std::vector<std::size_t> blocks;
  std::vector<double> ms;
  for (int l : loops) {
    auto p = parse({testgen::chain_of_loops_source(l)});
    blocks.push_back(p.procedures[0].blocks.size());
    double best = 1e300;
    for (int r = 0; r < kTimingRepeats; ++r) {
      auto t = Clock::now();
      auto report = identify_boundary(p);
      best = std::min(best, seconds_since(t) * 1000.0);
      if (report.candidates.empty()) throw Error("chain program produced no candidates");
    }
    ms.push_back(best);
  }
  bool ok = true;
  std::ostringstream d;
  for (std::size_t k = 0; k < ms.size(); ++k) {
    d << (k ? ", " : "") << blocks[k] << " blocks " << ms[k] << " ms";
    ok = ok && ms[k] < kScalingBudgetSeconds * 1000.0;
  }
  for (std::size_t k = 1; k < ms.size(); ++k) {
    double size_ratio = static_cast<double>(blocks[k]) / static_cast<double>(blocks[k - 1]);
    double time_ratio = std::max(ms[k], kTimingFloorMs) / std::max(ms[k - 1], kTimingFloorMs);
    d << "; x" << size_ratio << " size -> x" << time_ratio << " time (limit x" << size_ratio * size_ratio << ")";
    ok = ok && time_ratio <= size_ratio * size_ratio;
  }
  return {ok, d.str()};
}

int run_binary(const std::string& args, std::string* out = nullptr) {
  auto dir = std::filesystem::temp_directory_path();
  auto capture = dir / ("neckid_acceptance_" + std::to_string(std::rand()) + ".out");
  std::string cmd = std::string("\"") + NECKID_PATH + "\" " + args + " >\"" + capture.string() + "\" 2>/dev/null";
  int status = std::system(cmd.c_str());
  if (out) *out = fixtures::read_file(capture.string());
  std::filesystem::remove(capture);
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string strip_timing(std::string json) {
  auto at = json.find("\"timing_ms\"");
  if (at == std::string::npos) return json;
  return json.erase(at, json.find_first_of(",\n}", at) - at);
}

Outcome cli_contract() {
  auto quote = [](const std::string& name) { return "\"" + fixtures::fixture_path(name) + "\""; };
  int found = run_binary("analyze " + quote("wc_mini.mir"));
  int none = run_binary("analyze " + quote("blended.mir"));
  int error = run_binary("analyze " + quote("broken.mir"));

  // Exit 3 needs a disagreeing oracle, injected through the CLI hooks.
  cli::Hooks lying;
  lying.oracle = [](const ir::Program&, const TaintSourceSpec&) { return BoundaryReport{}; };
  std::string path = fixtures::fixture_path("wc_mini.mir");
  const char* argv[] = {"neckid", "analyze", path.c_str(), "--oracle-check"};
  std::ostringstream sink_out, sink_err;
  int disagree = cli::run_command_line(4, argv, sink_out, sink_err, lying);
  int agree = run_binary("analyze " + quote("wc_mini.mir") + " --oracle-check");

  std::string a, b;
  run_binary("analyze " + quote("two_proc.mir") + " --format json", &a);
  run_binary("analyze " + quote("two_proc.mir") + " --format json", &b);
  bool stable = !a.empty() && strip_timing(a) == strip_timing(b);

  std::ostringstream d;
  d << "found=" << found << " none=" << none << " parse-error=" << error << " disagreement=" << disagree
    << " oracle-agrees=" << agree << " json-stable=" << (stable ? "yes" : "no");
  return {found == 0 && none == 1 && error == 2 && disagree == 3 && agree == 0 && stable, d.str()};
}

}  // namespace

int main() {
  criterion("golden corpus", golden_corpus);
  criterion("oracle agreement (P8)", oracle_agreement);
  criterion("graph-algorithm oracles", graph_oracles);
  criterion("boundary invariants P1-P7", invariants);
  criterion("taint soundness", taint_soundness);
  criterion("scaling smoke test", scaling);
  criterion("CLI contract", cli_contract);
  std::cout << (failures ? "FAILED " : "ALL PASSED ") << failures << " failing criteria" << std::endl;
  return failures ? 1 : 0;
}
