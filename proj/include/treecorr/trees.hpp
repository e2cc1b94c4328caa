#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <numeric>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "treecorr/graph.hpp"

namespace treecorr {

using BigInt = boost::multiprecision::cpp_int;

// Canonical representative of an isomorphism class of free trees with k
// edges. Vertex labels are [0, k], label 0 is the canonical root (a centroid)
// and labels follow the canonical preorder.
struct UnlabeledTree {
  int k = 0;
  std::vector<Edge> edges;
  std::string canon;       // equal iff isomorphic
  std::uint64_t aut = 1;   // automorphism-group order
};

struct TreeFamily {
  int k = 0;
  std::vector<UnlabeledTree> trees;  // one per isomorphism class, canonical order
};

namespace tree_detail {

struct TreeView {
  std::uint32_t n = 0;
  std::vector<std::vector<std::uint32_t>> adj;
};

// Validates that the edge list is a tree on exactly |E|+1 vertices labelled
// [0, |E|] and returns its adjacency lists.
inline TreeView tree_view(const std::vector<Edge>& edges) {
  if (edges.empty()) throw std::invalid_argument("tree: at least one edge required");
  const std::uint32_t n = static_cast<std::uint32_t>(edges.size()) + 1;
  TreeView t;
  t.n = n;
  t.adj.assign(n, {});
  for (const auto& [u, v] : edges) {
    if (u >= n || v >= n || u == v)
      throw std::invalid_argument("tree: vertex labels must cover [0, k] with no self-loops");
    t.adj[u].push_back(v);
    t.adj[v].push_back(u);
  }
  // n vertices, n-1 edges: connectivity is the only remaining tree condition.
  std::vector<char> seen(n, 0);
  std::vector<std::uint32_t> stack{0};
  seen[0] = 1;
  std::uint32_t reached = 1;
  while (!stack.empty()) {
    const auto v = stack.back();
    stack.pop_back();
    for (auto w : t.adj[v])
      if (!seen[w]) {
        seen[w] = 1;
        ++reached;
        stack.push_back(w);
      }
  }
  if (reached != n) throw std::invalid_argument("tree: input is not connected");
  return t;
}

inline std::vector<std::uint32_t> centroids(const TreeView& t) {
  const std::uint32_t n = t.n;
  std::vector<std::uint32_t> size(n, 1), order, parent(n, n);
  order.reserve(n);
  order.push_back(0);
  parent[0] = 0;
  for (std::size_t i = 0; i < order.size(); ++i)
    for (auto w : t.adj[order[i]])
      if (w != parent[order[i]]) {
        parent[w] = order[i];
        order.push_back(w);
      }
  for (auto it = order.rbegin(); it != order.rend(); ++it)
    if (*it != 0) size[parent[*it]] += size[*it];
  std::vector<std::uint32_t> result;
  std::uint32_t best = n;
  for (std::uint32_t v = 0; v < n; ++v) {
    std::uint32_t heaviest = n - size[v];
    for (auto w : t.adj[v])
      if (parent[w] == v) heaviest = std::max(heaviest, size[w]);
    if (heaviest < best) {
      best = heaviest;
      result.assign(1, v);
    } else if (heaviest == best) {
      result.push_back(v);
    }
  }
  return result;  // one or two vertices
}

struct RootedCanon {
  std::string code;
  std::uint64_t aut = 1;
  std::vector<std::uint32_t> preorder;  // canonical visit order
};

// AHU encoding rooted at `root`: code(v) = '(' + concat(sorted child codes)
// + ')'. The automorphism order of the rooted tree is the product over
// vertices of the factorials of equal-child-code multiplicities.
inline RootedCanon rooted_canon(const TreeView& t, std::uint32_t root, std::uint32_t skip) {
  struct Sub {
    std::string code;
    std::uint64_t aut;
    std::vector<std::uint32_t> pre;
  };
  // explicit stack to avoid recursion limits on long paths
  std::vector<Sub> memo(t.n);
  std::vector<std::pair<std::uint32_t, std::uint32_t>> stack{{root, t.n}};
  std::vector<char> expanded(t.n, 0);
  while (!stack.empty()) {
    auto [v, par] = stack.back();
    if (!expanded[v]) {
      expanded[v] = 1;
      for (auto w : t.adj[v])
        if (w != par && w != skip) stack.emplace_back(w, v);
      continue;
    }
    stack.pop_back();
    std::vector<Sub*> kids;
    for (auto w : t.adj[v])
      if (w != par && w != skip) kids.push_back(&memo[w]);
    std::sort(kids.begin(), kids.end(),
              [](const Sub* a, const Sub* b) { return a->code < b->code; });
    Sub s;
    s.code = "(";
    s.aut = 1;
    s.pre.push_back(v);
    std::uint64_t run = 1;
    for (std::size_t i = 0; i < kids.size(); ++i) {
      s.code += kids[i]->code;
      s.aut *= kids[i]->aut;
      s.pre.insert(s.pre.end(), kids[i]->pre.begin(), kids[i]->pre.end());
      if (i > 0 && kids[i]->code == kids[i - 1]->code) {
        ++run;
        s.aut *= run;
      } else {
        run = 1;
      }
    }
    s.code += ")";
    memo[v] = std::move(s);
  }
  RootedCanon out;
  out.code = std::move(memo[root].code);
  out.aut = memo[root].aut;
  out.preorder = std::move(memo[root].pre);
  return out;
}

inline RootedCanon rooted_canon(const TreeView& t, std::uint32_t root) {
  return rooted_canon(t, root, t.n);
}

}  // namespace tree_detail

// Isomorphism-invariant canonical byte string for a free tree.
inline std::string canonical_form(const std::vector<Edge>& edges) {
  const auto t = tree_detail::tree_view(edges);
  const auto cs = tree_detail::centroids(t);
  std::string best;
  for (auto c : cs) best = std::max(best, tree_detail::rooted_canon(t, c).code);
  return best;
}

// Order of the automorphism group of a free tree.
inline std::uint64_t aut_count(const std::vector<Edge>& edges) {
  const auto t = tree_detail::tree_view(edges);
  const auto cs = tree_detail::centroids(t);
  if (cs.size() == 1) return tree_detail::rooted_canon(t, cs[0]).aut;
  // Bicentral tree: split on the central edge; halves may swap.
  const auto h1 = tree_detail::rooted_canon(t, cs[0], cs[1]);
  const auto h2 = tree_detail::rooted_canon(t, cs[1], cs[0]);
  return h1.aut * h2.aut * (h1.code == h2.code ? 2 : 1);
}

// Relabels a free tree so that vertex 0 is the canonical root (a centroid)
// and labels follow the canonical preorder. Isomorphic inputs map to the
// same labelled edge list.
inline std::vector<Edge> canonical_relabel(const std::vector<Edge>& edges) {
  const auto t = tree_detail::tree_view(edges);
  const auto cs = tree_detail::centroids(t);
  std::uint32_t root = cs[0];
  if (cs.size() == 2 &&
      tree_detail::rooted_canon(t, cs[1]).code > tree_detail::rooted_canon(t, cs[0]).code)
    root = cs[1];
  const auto canon = tree_detail::rooted_canon(t, root);
  std::vector<std::uint32_t> label(t.n, 0);
  for (std::uint32_t i = 0; i < canon.preorder.size(); ++i) label[canon.preorder[i]] = i;
  std::vector<Edge> out;
  out.reserve(edges.size());
  for (const auto& [u, v] : edges) {
    const auto a = label[u], b = label[v];
    out.emplace_back(std::min(a, b), std::max(a, b));
  }
  std::sort(out.begin(), out.end());
  return out;
}

inline UnlabeledTree make_unlabeled_tree(const std::vector<Edge>& edges) {
  UnlabeledTree tree;
  tree.k = static_cast<int>(edges.size());
  tree.edges = canonical_relabel(edges);
  tree.canon = canonical_form(edges);
  tree.aut = aut_count(edges);
  return tree;
}

constexpr int kDefaultTreeCap = 12;

// Enumerates one representative per isomorphism class of free trees with k
// edges. Rooted trees on k+1 vertices are generated by the level-sequence
// successor rule and deduplicated by their free canonical form.
inline TreeFamily enumerate_free_trees(int k, int cap = kDefaultTreeCap) {
  if (k < 1) throw std::invalid_argument("enumerate_free_trees: k must be at least 1");
  if (k > cap) throw std::length_error("enumerate_free_trees: k exceeds the configured cap");
  const int n = k + 1;
  std::vector<int> level(n);
  std::iota(level.begin(), level.end(), 1);  // the rooted path 1,2,...,n
  std::map<std::string, UnlabeledTree> classes;
  while (true) {
    // Build the edge list from the level sequence: parent of position i is
    // the most recent position at level[i]-1.
    std::vector<Edge> edges;
    edges.reserve(n - 1);
    std::vector<std::uint32_t> last(n + 2, 0);
    last[1] = 0;
    for (int i = 1; i < n; ++i) {
      edges.emplace_back(last[level[i] - 1], static_cast<std::uint32_t>(i));
      last[level[i]] = static_cast<std::uint32_t>(i);
    }
    auto tree = make_unlabeled_tree(edges);
    classes.emplace(tree.canon, std::move(tree));
    // Successor in reverse lexicographic order.
    int p = n - 1;
    while (p > 0 && level[p] <= 2) --p;
    if (p == 0) break;
    int q = p - 1;
    while (level[q] != level[p] - 1) --q;
    for (int i = p; i < n; ++i) level[i] = level[i - (p - q)];
  }
  TreeFamily family;
  family.k = k;
  family.trees.reserve(classes.size());
  for (auto& [canon, tree] : classes) family.trees.push_back(std::move(tree));
  return family;
}

// Exact number of labelled copies of the tree in the complete graph K_n:
// C(n, k+1) (k+1)! / aut(H). Returns 0 when n < k+1.
inline BigInt sub_n(const UnlabeledTree& tree, std::uint64_t n) {
  const std::uint64_t v = static_cast<std::uint64_t>(tree.k) + 1;
  if (n < v) return 0;
  BigInt result = 1;
  for (std::uint64_t i = 0; i < v; ++i) result *= n - i;  // C(n,v) * v!
  result /= tree.aut;
  return result;
}

}  // namespace treecorr
