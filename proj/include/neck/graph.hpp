#pragma once

// Directed-graph algorithms over any type exposing `node_count()` and
// `successors(n)`: strongly connected components, articulation points of
// the undirected view, post-dominators, control dependence, reachability
// and BFS distances.
//
// All algorithms are iterative (no recursion on graph depth) and produce
// canonically ordered results.

#include <algorithm>
#include <concepts>
#include <cstddef>
#include <map>
#include <queue>
#include <ranges>
#include <utility>
#include <vector>

namespace neck::graph {

template <typename G>
concept SuccessorGraph = requires(const G& g, int n) {
  { g.node_count() } -> std::convertible_to<std::size_t>;
  { g.successors(n) } -> std::ranges::forward_range;
};

using NodeSet = std::vector<int>;  // sorted, unique

inline bool contains(const NodeSet& set, int n) { return std::binary_search(set.begin(), set.end(), n); }

// Plain adjacency-list digraph. Duplicate edges are ignored.
struct Digraph {
  std::vector<std::vector<int>> adjacency;

  Digraph() = default;
  explicit Digraph(std::size_t n) : adjacency(n) {}

  std::size_t node_count() const { return adjacency.size(); }
  const std::vector<int>& successors(int n) const { return adjacency[static_cast<std::size_t>(n)]; }

  void add_edge(int from, int to) {
    auto& succ = adjacency[static_cast<std::size_t>(from)];
    if (std::find(succ.begin(), succ.end(), to) == succ.end()) succ.push_back(to);
  }

  std::size_t edge_count() const {
    std::size_t n = 0;
    for (const auto& s : adjacency) n += s.size();
    return n;
  }
};

template <SuccessorGraph G>
std::vector<std::vector<int>> predecessors(const G& g) {
  std::vector<std::vector<int>> preds(g.node_count());
  for (int n = 0; n < static_cast<int>(g.node_count()); ++n)
    for (int s : g.successors(n)) preds[static_cast<std::size_t>(s)].push_back(n);
  return preds;
}

// ---------------------------------------------------------------------------
// Strongly connected components (Tarjan)

struct SccPartition {
  // Components in topological order: every edge between two distinct
  // components goes from a lower index to a higher one.
  std::vector<NodeSet> components;
  std::vector<int> component_of;
  std::vector<bool> is_loop;

  bool in_loop(int n) const { return is_loop[static_cast<std::size_t>(component_of[static_cast<std::size_t>(n)])]; }
};

template <SuccessorGraph G>
SccPartition scc(const G& g) {
  const int n = static_cast<int>(g.node_count());
  std::vector<int> index(n, -1), low(n, 0);
  std::vector<bool> on_stack(n, false);
  std::vector<int> stack;
  std::vector<NodeSet> reverse_topo;
  int counter = 0;

  struct Frame {
    int node;
    std::vector<int> succ;
    std::size_t next = 0;
  };

  for (int root = 0; root < n; ++root) {
    if (index[root] != -1) continue;
    std::vector<Frame> frames;
    auto push = [&](int v) {
      index[v] = low[v] = counter++;
      stack.push_back(v);
      on_stack[v] = true;
      Frame f{v, {}, 0};
      for (int s : g.successors(v)) f.succ.push_back(s);
      frames.push_back(std::move(f));
    };
    push(root);
    while (!frames.empty()) {
      auto& f = frames.back();
      if (f.next < f.succ.size()) {
        int w = f.succ[f.next++];
        if (index[w] == -1) {
          push(w);
        } else if (on_stack[w]) {
          low[f.node] = std::min(low[f.node], index[w]);
        }
        continue;
      }
      int v = f.node;
      frames.pop_back();
      if (!frames.empty()) low[frames.back().node] = std::min(low[frames.back().node], low[v]);
      if (low[v] == index[v]) {
        NodeSet comp;
        int w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = false;
          comp.push_back(w);
        } while (w != v);
        std::sort(comp.begin(), comp.end());
        reverse_topo.push_back(std::move(comp));
      }
    }
  }

  SccPartition out;
  out.components.assign(reverse_topo.rbegin(), reverse_topo.rend());
  out.component_of.assign(n, -1);
  out.is_loop.assign(out.components.size(), false);
  for (std::size_t c = 0; c < out.components.size(); ++c) {
    const auto& comp = out.components[c];
    for (int v : comp) out.component_of[v] = static_cast<int>(c);
    if (comp.size() > 1) {
      out.is_loop[c] = true;
    } else {
      for (int s : g.successors(comp.front()))
        if (s == comp.front()) out.is_loop[c] = true;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Articulation points of the undirected view (Hopcroft-Tarjan)
//
// A node is an articulation point when removing it (with its incident
// edges) increases the number of connected components.

template <SuccessorGraph G>
NodeSet articulation_points(const G& g) {
  const int n = static_cast<int>(g.node_count());
  std::vector<std::vector<int>> undirected(n);
  for (int u = 0; u < n; ++u)
    for (int v : g.successors(u))
      if (u != v) {
        undirected[u].push_back(v);
        undirected[v].push_back(u);
      }
  for (auto& adj : undirected) {
    std::sort(adj.begin(), adj.end());
    adj.erase(std::unique(adj.begin(), adj.end()), adj.end());
  }

  std::vector<int> disc(n, -1), low(n, 0), parent(n, -1);
  std::vector<bool> is_ap(n, false);
  int timer = 0;

  for (int root = 0; root < n; ++root) {
    if (disc[root] != -1) continue;
    int root_children = 0;
    std::vector<std::pair<int, std::size_t>> frames{{root, 0}};
    disc[root] = low[root] = timer++;
    while (!frames.empty()) {
      auto& [u, next] = frames.back();
      if (next < undirected[u].size()) {
        int v = undirected[u][next++];
        if (disc[v] == -1) {
          parent[v] = u;
          if (u == root) ++root_children;
          disc[v] = low[v] = timer++;
          frames.push_back({v, 0});
        } else if (v != parent[u]) {
          low[u] = std::min(low[u], disc[v]);
        }
        continue;
      }
      int done = u;
      frames.pop_back();
      if (!frames.empty()) {
        int p = frames.back().first;
        low[p] = std::min(low[p], low[done]);
        if (p != root && low[done] >= disc[p]) is_ap[p] = true;
      }
    }
    if (root_children > 1) is_ap[root] = true;
  }

  NodeSet out;
  for (int v = 0; v < n; ++v)
    if (is_ap[v]) out.push_back(v);
  return out;
}

// ---------------------------------------------------------------------------
// Post-dominators (Cooper-Harvey-Kennedy over the reverse graph)

struct PostDomTree {
  int root = -1;
  // Immediate post-dominator; -1 for the root and for nodes that cannot
  // reach the root.
  std::vector<int> ipdom;
  // Pre/post DFS numbers on the tree, -1 for excluded nodes.
  std::vector<int> pre, post;

  bool contains(int n) const { return pre[static_cast<std::size_t>(n)] >= 0; }

  // Reflexive: every node in the tree post-dominates itself.
  bool post_dominates(int p, int n) const {
    if (!contains(p) || !contains(n)) return false;
    return pre[p] <= pre[n] && post[n] <= post[p];
  }

  NodeSet excluded() const {
    NodeSet out;
    for (int v = 0; v < static_cast<int>(pre.size()); ++v)
      if (!contains(v)) out.push_back(v);
    return out;
  }
};

template <SuccessorGraph G>
PostDomTree post_dominators(const G& g, int exit) {
  const int n = static_cast<int>(g.node_count());
  auto preds = predecessors(g);

  // Postorder of the reverse graph rooted at exit.
  std::vector<int> po_number(n, -1), order;
  {
    std::vector<bool> seen(n, false);
    std::vector<std::pair<int, std::size_t>> frames{{exit, 0}};
    seen[exit] = true;
    while (!frames.empty()) {
      auto& [v, next] = frames.back();
      if (next < preds[v].size()) {
        int w = preds[v][next++];
        if (!seen[w]) {
          seen[w] = true;
          frames.push_back({w, 0});
        }
        continue;
      }
      po_number[v] = static_cast<int>(order.size());
      order.push_back(v);
      frames.pop_back();
    }
  }

  std::vector<int> idom(n, -1);
  idom[exit] = exit;
  auto intersect = [&](int a, int b) {
    while (a != b) {
      while (po_number[a] < po_number[b]) a = idom[a];
      while (po_number[b] < po_number[a]) b = idom[b];
    }
    return a;
  };

  bool changed = true;
  while (changed) {
    changed = false;
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
      int v = *it;
      if (v == exit) continue;
      int candidate = -1;
      for (int s : g.successors(v)) {
        if (idom[s] == -1) continue;
        candidate = candidate == -1 ? s : intersect(s, candidate);
      }
      if (candidate != -1 && idom[v] != candidate) {
        idom[v] = candidate;
        changed = true;
      }
    }
  }

  PostDomTree tree;
  tree.root = exit;
  tree.ipdom.assign(n, -1);
  for (int v = 0; v < n; ++v)
    if (v != exit && idom[v] != -1) tree.ipdom[v] = idom[v];

  std::vector<std::vector<int>> children(n);
  for (int v = 0; v < n; ++v)
    if (tree.ipdom[v] >= 0) children[tree.ipdom[v]].push_back(v);
  tree.pre.assign(n, -1);
  tree.post.assign(n, -1);
  int clock = 0;
  std::vector<std::pair<int, std::size_t>> frames{{exit, 0}};
  tree.pre[exit] = clock++;
  while (!frames.empty()) {
    auto& [v, next] = frames.back();
    if (next < children[v].size()) {
      int c = children[v][next++];
      tree.pre[c] = clock++;
      frames.push_back({c, 0});
      continue;
    }
    tree.post[v] = clock++;
    frames.pop_back();
  }
  return tree;
}

// ---------------------------------------------------------------------------
// Control dependence (Ferrante-Ottenstein-Warren)

struct ControlDep {
  int branch;
  // Position of the taken edge in successors(branch).
  int edge;

  auto operator<=>(const ControlDep&) const = default;
};

struct ControlDependence {
  // deps[b]: the (branch, edge) pairs b is directly control dependent on.
  std::vector<std::vector<ControlDep>> deps;
};

template <SuccessorGraph G>
ControlDependence control_dependence(const G& g, const PostDomTree& pd) {
  const int n = static_cast<int>(g.node_count());
  ControlDependence cd;
  cd.deps.resize(n);
  for (int a = 0; a < n; ++a) {
    if (!pd.contains(a)) continue;
    int edge = 0;
    for (int s : g.successors(a)) {
      int k = edge++;
      if (!pd.contains(s)) continue;
      // Every node on the ipdom chain from s up to (excluding) ipdom(a)
      // post-dominates s but not a.
      for (int runner = s; runner != pd.ipdom[a] && runner >= 0; runner = pd.ipdom[runner])
        cd.deps[runner].push_back({a, k});
    }
  }
  for (auto& d : cd.deps) {
    std::sort(d.begin(), d.end());
    d.erase(std::unique(d.begin(), d.end()), d.end());
  }
  return cd;
}

// ---------------------------------------------------------------------------
// Reachability and distances

template <SuccessorGraph G>
std::vector<bool> reachable_mask(const G& g, int start) {
  std::vector<bool> seen(g.node_count(), false);
  std::vector<int> work{start};
  seen[start] = true;
  while (!work.empty()) {
    int v = work.back();
    work.pop_back();
    for (int s : g.successors(v))
      if (!seen[s]) {
        seen[s] = true;
        work.push_back(s);
      }
  }
  return seen;
}

template <SuccessorGraph G>
NodeSet reachable_from(const G& g, int start) {
  auto mask = reachable_mask(g, start);
  NodeSet out;
  for (int v = 0; v < static_cast<int>(mask.size()); ++v)
    if (mask[v]) out.push_back(v);
  return out;
}

// Unweighted shortest-path edge counts; unreachable nodes are absent.
template <SuccessorGraph G>
std::map<int, int> bfs_distance(const G& g, int start) {
  std::vector<int> dist(g.node_count(), -1);
  std::queue<int> q;
  dist[start] = 0;
  q.push(start);
  while (!q.empty()) {
    int v = q.front();
    q.pop();
    for (int s : g.successors(v))
      if (dist[s] < 0) {
        dist[s] = dist[v] + 1;
        q.push(s);
      }
  }
  std::map<int, int> out;
  for (int v = 0; v < static_cast<int>(dist.size()); ++v)
    if (dist[v] >= 0) out.emplace(v, dist[v]);
  return out;
}

}  // namespace neck::graph
