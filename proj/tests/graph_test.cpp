#include <gtest/gtest.h>

#include "neck/block_graph.hpp"
#include "support/brute_graph.hpp"
#include "support/corpus.hpp"
#include "support/program_gen.hpp"

using namespace neck;

namespace {

const char* kDiamond = R"(proc main(c) {
entry:
  br c left right
left:
  jmp join
right:
  jmp join
join:
  ret
}
)";

ProcedureAnalyses analyze(const std::string& text) { return analyze_procedure(fixtures::program(text).procedures[0]); }

void expect_matches_brute(const graph::Digraph& g, int exit, const std::string& what) {
  auto adj = brute::adjacency(g);
  EXPECT_EQ(graph::articulation_points(g), brute::articulation_by_removal(adj)) << what;

  auto sccs = graph::scc(g);
  auto closure = brute::transitive_closure(adj);
  for (int a = 0; a < static_cast<int>(adj.size()); ++a) {
    bool self = std::find(adj[a].begin(), adj[a].end(), a) != adj[a].end();
    bool cyclic = self;
    for (int b = 0; b < static_cast<int>(adj.size()); ++b) {
      bool mutual = closure[a][b] && closure[b][a];
      EXPECT_EQ(sccs.component_of[a] == sccs.component_of[b], mutual) << what << " " << a << "," << b;
      if (b != a && mutual) cyclic = true;
    }
    EXPECT_EQ(sccs.in_loop(a), cyclic) << what << " " << a;
  }

  if (exit < 0) return;
  auto pd = graph::post_dominators(g, exit);
  for (int p = 0; p < static_cast<int>(adj.size()); ++p)
    for (int n = 0; n < static_cast<int>(adj.size()); ++n)
      EXPECT_EQ(pd.post_dominates(p, n), brute::post_dominates_by_paths(adj, exit, p, n))
          << what << " p=" << p << " n=" << n;

  auto cd = graph::control_dependence(g, pd);
  for (int b = 0; b < static_cast<int>(adj.size()); ++b) {
    std::vector<graph::ControlDep> expected;
    for (int a = 0; a < static_cast<int>(adj.size()); ++a)
      for (int k = 0; k < static_cast<int>(adj[a].size()); ++k) {
        int s = adj[a][k];
        bool strict = b != a && brute::post_dominates_by_paths(adj, exit, b, a);
        if (brute::post_dominates_by_paths(adj, exit, b, s) && !strict) expected.push_back({a, k});
      }
    EXPECT_EQ(cd.deps[b], expected) << what << " b=" << b;
  }
}

}  // namespace

TEST(BlockGraph, SingleBlock) {
  auto a = analyze("proc main() {\nentry:\n  ret\n}\n");
  EXPECT_EQ(a.cfg.node_count(), 2u);
  EXPECT_EQ(a.cfg.edges.edge_count(), 1u);
  EXPECT_EQ(a.cfg.virtual_exit, 1);
  EXPECT_EQ(a.cfg.labels[1], "<exit>");
}

TEST(BlockGraph, Diamond) {
  auto a = analyze(kDiamond);
  EXPECT_EQ(a.cfg.node_count(), 5u);
  EXPECT_EQ(a.cfg.edges.edge_count(), 5u);
  int entry = a.cfg.node_of("entry"), left = a.cfg.node_of("left"), right = a.cfg.node_of("right"),
      join = a.cfg.node_of("join");
  EXPECT_EQ(a.articulation, (graph::NodeSet{join}));
  EXPECT_EQ(a.postdom.ipdom[entry], join);
  EXPECT_EQ(a.postdom.ipdom[left], join);
  EXPECT_EQ(a.postdom.ipdom[right], join);
  EXPECT_EQ(a.postdom.ipdom[join], a.cfg.virtual_exit);
  EXPECT_EQ(a.cdeps.deps[left], (std::vector<graph::ControlDep>{{entry, 0}}));
  EXPECT_EQ(a.cdeps.deps[right], (std::vector<graph::ControlDep>{{entry, 1}}));
  EXPECT_TRUE(a.cdeps.deps[join].empty());
  auto dist = graph::bfs_distance(a.cfg, a.cfg.entry);
  EXPECT_EQ(dist.at(join), 2);
}

TEST(BlockGraph, BranchToSameTargetIsOneEdge) {
  auto a = analyze("proc main(c) {\nentry:\n  br c next next\nnext:\n  ret\n}\n");
  EXPECT_EQ(a.cfg.successors(0).size(), 1u);
}

TEST(BlockGraph, ExitIntrinsicEndsBlock) {
  auto a = analyze("proc main(c) {\nentry:\n  br c stop go\nstop:\n  call exit(1)\n  jmp go\ngo:\n  ret\n}\n");
  int stop = a.cfg.node_of("stop");
  EXPECT_EQ(a.cfg.successors(stop), (std::vector<int>{a.cfg.virtual_exit}));
}

TEST(Graph, ArticulationOnPathAndTriangle) {
  graph::Digraph path(3);
  path.add_edge(0, 1);
  path.add_edge(1, 2);
  EXPECT_EQ(graph::articulation_points(path), (graph::NodeSet{1}));
  graph::Digraph triangle(3);
  triangle.add_edge(0, 1);
  triangle.add_edge(1, 2);
  triangle.add_edge(2, 0);
  EXPECT_TRUE(graph::articulation_points(triangle).empty());
}

TEST(Graph, ThreeCycleIsOneComponent) {
  graph::Digraph g(4);
  g.add_edge(0, 1);
  g.add_edge(1, 2);
  g.add_edge(2, 0);
  g.add_edge(2, 3);
  auto s = graph::scc(g);
  EXPECT_EQ(s.component_of[0], s.component_of[2]);
  EXPECT_NE(s.component_of[0], s.component_of[3]);
  EXPECT_TRUE(s.in_loop(1));
  EXPECT_FALSE(s.in_loop(3));
}

TEST(Graph, WcMiniLoops) {
  auto a = analyze_procedure(fixtures::fixture("wc_mini.mir").procedures[0]);
  std::set<int> loops;
  for (int v = 0; v < a.cfg.block_count(); ++v)
    if (a.sccs.in_loop(v)) loops.insert(a.sccs.component_of[v]);
  EXPECT_EQ(loops.size(), 2u);
  EXPECT_TRUE(a.sccs.in_loop(a.cfg.node_of("count")));
  EXPECT_FALSE(a.sccs.in_loop(a.cfg.node_of("done")));
  EXPECT_EQ(a.postdom.ipdom[a.cfg.node_of("set_c")], a.cfg.node_of("head"));
  EXPECT_EQ(graph::bfs_distance(a.cfg, a.cfg.entry).at(a.cfg.node_of("done")), 2);
  EXPECT_TRUE(graph::contains(a.articulation, a.cfg.node_of("done")));
}

TEST(Graph, InfiniteLoopIsExcludedFromPostDominators) {
  auto a = analyze("proc main(c) {\nentry:\n  br c spin out\nspin:\n  jmp spin\nout:\n  ret\n}\n");
  int spin = a.cfg.node_of("spin");
  EXPECT_FALSE(a.postdom.contains(spin));
  EXPECT_EQ(a.postdom.excluded(), (graph::NodeSet{spin}));
  EXPECT_FALSE(a.postdom.post_dominates(spin, spin));
}

TEST(Graph, RandomDigraphsAgreeWithExhaustiveSearch) {
  std::mt19937_64 rng(7);
  for (int round = 0; round < 300; ++round) {
    int n = 1 + static_cast<int>(rng() % 10);
    double p = 0.1 + static_cast<double>(rng() % 40) / 100.0;
    auto g = brute::random_digraph(rng, n, p);
    expect_matches_brute(g, static_cast<int>(rng() % static_cast<unsigned>(n)), "round " + std::to_string(round));
  }
}

TEST(Graph, GeneratedBlockGraphsAgreeWithExhaustiveSearch) {
  int checked = 0;
  for (std::uint64_t seed = 1; checked < 150 && seed < 5000; ++seed) {
    auto program = testgen::ProgramGenerator(seed, {.max_blocks = 11}).generate();
    for (const auto& proc : program.procedures) {
      auto cfg = build_block_graph(proc);
      if (cfg.node_count() > 10) continue;
      expect_matches_brute(cfg.edges, cfg.virtual_exit, "seed " + std::to_string(seed) + " " + proc.name);
      ++checked;
    }
  }
  EXPECT_GE(checked, 150);
}
