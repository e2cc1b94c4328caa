#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "treecorr/graph.hpp"
#include "treecorr/rng.hpp"
#include "treecorr/trees.hpp"

namespace treecorr {

// A map [0, n) -> [0, k] of vertex colors; palette size is k+1.
struct Coloring {
  std::uint32_t n = 0;
  int k = 0;
  std::vector<std::uint8_t> colors;
};

inline std::vector<Coloring> random_colorings(std::uint32_t n, int k, int t,
                                              const RandomStream& stream) {
  if (t < 1) throw std::invalid_argument("random_colorings: t must be at least 1");
  std::vector<Coloring> out(t);
  for (int rep = 0; rep < t; ++rep) {
    const RandomStream s = stream.fold(static_cast<std::uint64_t>(rep));
    out[rep].n = n;
    out[rep].k = k;
    out[rep].colors.resize(n);
    for (std::uint32_t v = 0; v < n; ++v)
      out[rep].colors[v] = static_cast<std::uint8_t>(s.below(v, static_cast<std::uint32_t>(k) + 1));
  }
  return out;
}

// DFS-ordered edge sequence of a rooted tree together with the split indices
// that drive the dynamic program. Edges are labelled e_1..e_K in the reverse
// order visited by DFS; removing e_i splits the tree T_i containing it into
// T_{a_i} rooted at the parent endpoint and T_{b_i} rooted at the child.
struct RootedDecomposition {
  int k = 0;
  std::uint32_t root = 0;
  struct Step {
    std::uint32_t parent = 0;
    std::uint32_t child = 0;
    int a = 0;
    int b = 0;
    int size = 1;  // |V(T_i)|; index 0 is the single-vertex tree
  };
  std::vector<Step> steps;  // steps[0] unused except for size
};

inline RootedDecomposition decompose(const std::vector<Edge>& edges, std::uint32_t root = 0) {
  const auto t = tree_detail::tree_view(edges);
  if (root >= t.n) throw std::invalid_argument("decompose: root out of range");
  const int k = static_cast<int>(edges.size());
  // DFS from the root, children in ascending label order, edges recorded in
  // visit order and then reversed.
  std::vector<std::pair<std::uint32_t, std::uint32_t>> visit;
  visit.reserve(k);
  std::vector<std::pair<std::uint32_t, std::uint32_t>> stack{{root, t.n}};
  std::vector<std::vector<std::uint32_t>> adj = t.adj;
  for (auto& nb : adj) std::sort(nb.begin(), nb.end(), std::greater<>());
  while (!stack.empty()) {
    auto [v, par] = stack.back();
    stack.pop_back();
    if (par != t.n) visit.emplace_back(par, v);
    for (auto w : adj[v])
      if (w != par) stack.emplace_back(w, v);
  }
  RootedDecomposition d;
  d.k = k;
  d.root = root;
  d.steps.assign(k + 1, {});
  for (int i = 1; i <= k; ++i) {
    const auto [p, c] = visit[static_cast<std::size_t>(k - i)];
    auto& step = d.steps[i];
    step.parent = p;
    step.child = c;
    auto incident = [&](int j, std::uint32_t v) {
      return d.steps[j].parent == v || d.steps[j].child == v;
    };
    for (int j = i - 1; j >= 1; --j)
      if (incident(j, p)) {
        step.a = j;
        break;
      }
    for (int j = i - 1; j >= 1; --j)
      if (incident(j, c)) {
        step.b = j;
        break;
      }
    step.size = d.steps[step.a].size + d.steps[step.b].size;
  }
  d.steps[0].size = 1;
  if (d.steps[k].size != k + 1)
    throw std::logic_error("decompose: split sizes do not cover the tree");
  return d;
}

using TableMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Host graph seen as the linear map V -> M V on per-color score tables.
// A host that tracks support reports which output rows can be nonzero and
// leaves the other rows uninitialized; consumers must skip them.
class HostOperator {
 public:
  virtual ~HostOperator() = default;
  virtual Eigen::Index n() const = 0;
  virtual void apply(const TableMatrix& v, TableMatrix& out) const = 0;
  virtual bool tracks_support() const { return false; }
  virtual void apply_masked(const TableMatrix& v, const std::vector<char>& v_active,
                            TableMatrix& out, std::vector<char>& out_active) const {
    (void)v_active;
    apply(v, out);
    out_active.assign(static_cast<std::size_t>(n()), 1);
  }
};

// Dense weighted host; the diagonal must be zero.
class DenseHost final : public HostOperator {
 public:
  explicit DenseHost(const CenteredMatrix& m) : m_(m) {
    if (m_.rows() != m_.cols()) throw std::invalid_argument("DenseHost: matrix must be square");
  }
  Eigen::Index n() const override { return m_.rows(); }
  void apply(const TableMatrix& v, TableMatrix& out) const override { out.noalias() = m_ * v; }

 private:
  const CenteredMatrix& m_;
};

// Unweighted host; multiplication enumerates adjacency lists, so sparse
// graphs cost O(m) per column block instead of O(n^2). Output row x is
// active only when x has a neighbor with an active input row, which keeps
// the downstream elementwise work proportional to the realized support.
class SparseHost final : public HostOperator {
 public:
  explicit SparseHost(const Graph& g) : n_(g.n()), adj_(g.adjacency()) {}
  Eigen::Index n() const override { return n_; }
  bool tracks_support() const override { return true; }
  void apply(const TableMatrix& v, TableMatrix& out) const override {
    out.setZero(n_, v.cols());
    for (Eigen::Index x = 0; x < n_; ++x)
      for (std::uint32_t e = adj_.offsets[x]; e < adj_.offsets[x + 1]; ++e)
        out.row(x) += v.row(adj_.targets[e]);
  }
  void apply_masked(const TableMatrix& v, const std::vector<char>& v_active,
                    TableMatrix& out, std::vector<char>& out_active) const override {
    const Eigen::Index t = v.cols();
    out.resize(n_, t);
    out_active.assign(static_cast<std::size_t>(n_), 0);
    const double* src = v.data();
    double* dst = out.data();
    for (Eigen::Index x = 0; x < n_; ++x) {
      double* row = dst + x * t;
      bool first = true;
      for (std::uint32_t e = adj_.offsets[x]; e < adj_.offsets[x + 1]; ++e) {
        const std::uint32_t y = adj_.targets[e];
        if (!v_active[y]) continue;
        const double* in = src + static_cast<Eigen::Index>(y) * t;
        if (first) {
          for (Eigen::Index j = 0; j < t; ++j) row[j] = in[j];
          first = false;
        } else {
          for (Eigen::Index j = 0; j < t; ++j) row[j] += in[j];
        }
      }
      out_active[x] = first ? 0 : 1;
    }
  }

 private:
  Eigen::Index n_;
  Graph::Adjacency adj_;
};

// Evaluates X_H(M, mu) for a batch of colorings sharing one host graph.
// Table rows are host vertices, columns are coloring replicates; the
// recursion per split is one host multiply plus an elementwise product.
class ColorfulTreeCounter {
 public:
  ColorfulTreeCounter(const HostOperator& host, const std::vector<Coloring>& colorings, int k)
      : host_(host), k_(k), t_(static_cast<Eigen::Index>(colorings.size())) {
    const Eigen::Index n = host.n();
    if (t_ == 0) throw std::invalid_argument("ColorfulTreeCounter: empty coloring batch");
    base_.resize(k + 1);
    for (int c = 0; c <= k; ++c) base_[c] = TableMatrix::Zero(n, t_);
    for (Eigen::Index rep = 0; rep < t_; ++rep) {
      const auto& col = colorings[rep];
      if (col.k != k || static_cast<Eigen::Index>(col.n) != n)
        throw std::invalid_argument("ColorfulTreeCounter: coloring palette or size mismatch");
      for (Eigen::Index v = 0; v < n; ++v) base_[col.colors[v]](v, rep) = 1.0;
    }
    masked_ = host.tracks_support();
    if (masked_) {
      base_active_.assign(k + 1, std::vector<char>(static_cast<std::size_t>(n), 0));
      for (Eigen::Index rep = 0; rep < t_; ++rep)
        for (Eigen::Index v = 0; v < n; ++v)
          base_active_[colorings[rep].colors[v]][v] = 1;
    }
    base_product_.assign(k + 1, Entry());
    base_product_done_.assign(k + 1, false);
  }

  // One X value per coloring replicate.
  Eigen::VectorXd evaluate(const RootedDecomposition& d, std::uint64_t aut) {
    if (d.k != k_) throw std::invalid_argument("evaluate: tree size does not match palette");
    const Eigen::Index n = host_.n();
    const std::uint32_t full = (1u << (k_ + 1)) - 1u;
    std::vector<std::map<std::uint32_t, Entry>> tables(d.k + 1);
    std::vector<int> uses(d.k + 1, 0);
    for (int i = 1; i <= d.k; ++i) {
      if (d.steps[i].a >= 1) ++uses[d.steps[i].a];
      if (d.steps[i].b >= 1) ++uses[d.steps[i].b];
    }
    Entry product;
    for (int i = 1; i <= d.k; ++i) {
      const auto& step = d.steps[i];
      auto& out = tables[i];
      auto accumulate = [&](const TableMatrix& y1, const std::vector<char>& a1,
                            std::uint32_t c1_mask, std::uint32_t c2_mask, const Entry& z) {
        if (c1_mask & c2_mask) return;
        auto [it, fresh] = out.try_emplace(c1_mask | c2_mask);
        Entry& slot = it->second;
        if (fresh) recycle_into(slot, n);
        if (!masked_) {
          if (fresh)
            slot.m = y1.cwiseProduct(z.m);
          else
            slot.m += y1.cwiseProduct(z.m);
          return;
        }
        if (fresh) slot.active.assign(static_cast<std::size_t>(n), 0);
        const double* py = y1.data();
        const double* pz = z.m.data();
        double* po = slot.m.data();
        for (Eigen::Index x = 0; x < n; ++x) {
          if (!a1[x] || !z.active[x]) continue;
          const double* ry = py + x * t_;
          const double* rz = pz + x * t_;
          double* ro = po + x * t_;
          if (slot.active[x]) {
            for (Eigen::Index j = 0; j < t_; ++j) ro[j] += ry[j] * rz[j];
          } else {
            for (Eigen::Index j = 0; j < t_; ++j) ro[j] = ry[j] * rz[j];
            slot.active[x] = 1;
          }
        }
      };
      auto combine = [&](std::uint32_t c2_mask, const Entry& z) {
        if (step.a == 0) {
          for (int c = 0; c <= k_; ++c)
            accumulate(base_[c], masked_ ? base_active_[c] : kNoMask, 1u << c, c2_mask, z);
        } else {
          for (const auto& [c1_mask, y1] : tables[step.a])
            accumulate(y1.m, y1.active, c1_mask, c2_mask, z);
        }
      };
      if (step.b == 0) {
        for (int c = 0; c <= k_; ++c) combine(1u << c, base_product(c));
      } else {
        for (const auto& [c2_mask, y2] : tables[step.b]) {
          apply_host(y2, product);
          combine(c2_mask, product);
        }
      }
      if (step.a >= 1 && --uses[step.a] == 0) retire(tables[step.a]);
      if (step.b >= 1 && --uses[step.b] == 0) retire(tables[step.b]);
    }
    const auto it = tables[d.k].find(full);
    Eigen::VectorXd result = Eigen::VectorXd::Zero(t_);
    if (it != tables[d.k].end()) {
      if (!masked_) {
        result = it->second.m.colwise().sum().transpose();
      } else {
        for (Eigen::Index x = 0; x < n; ++x)
          if (it->second.active[x]) result += it->second.m.row(x).transpose();
      }
      result /= static_cast<double>(aut);
    }
    for (auto& level : tables) retire(level);
    return result;
  }

 private:
  struct Entry {
    TableMatrix m;
    std::vector<char> active;  // empty unless the host tracks support
  };

  inline static const std::vector<char> kNoMask{};

  // Large tables all share one shape; retired buffers are reused for fresh
  // entries so repeated evaluations avoid reallocating them.
  void retire(std::map<std::uint32_t, Entry>& level) {
    for (auto& [mask, entry] : level) pool_.push_back(std::move(entry.m));
    level.clear();
  }

  void recycle_into(Entry& slot, Eigen::Index n) {
    if (pool_.empty()) {
      if (masked_) slot.m.resize(n, t_);
      return;
    }
    slot.m = std::move(pool_.back());
    pool_.pop_back();
  }

  void apply_host(const Entry& v, Entry& out) {
    if (masked_)
      host_.apply_masked(v.m, v.active, out.m, out.active);
    else
      host_.apply(v.m, out.m);
  }

  const Entry& base_product(int c) {
    if (!base_product_done_[c]) {
      if (masked_)
        host_.apply_masked(base_[c], base_active_[c], base_product_[c].m,
                           base_product_[c].active);
      else
        host_.apply(base_[c], base_product_[c].m);
      base_product_done_[c] = true;
    }
    return base_product_[c];
  }

  const HostOperator& host_;
  int k_;
  Eigen::Index t_;
  bool masked_ = false;
  std::vector<TableMatrix> base_;
  std::vector<std::vector<char>> base_active_;
  std::vector<Entry> base_product_;
  std::vector<bool> base_product_done_;
  std::vector<TableMatrix> pool_;
};

// Single-coloring variant of the dynamic program.
inline double xh_dp(const CenteredMatrix& m, const UnlabeledTree& tree,
                    const RootedDecomposition& d, const Coloring& coloring) {
  if (coloring.k != tree.k)
    throw std::invalid_argument("xh_dp: coloring palette must have K+1 colors");
  DenseHost host(m);
  ColorfulTreeCounter counter(host, {coloring}, tree.k);
  return counter.evaluate(d, tree.aut)(0);
}

// Colorful count on an unweighted graph through the adjacency-list kernel.
inline double wh_unweighted_neighbors(const Graph& g, const UnlabeledTree& tree,
                                      const RootedDecomposition& d, const Coloring& coloring) {
  SparseHost host(g);
  ColorfulTreeCounter counter(host, {coloring}, tree.k);
  return counter.evaluate(d, tree.aut)(0);
}

namespace brute_detail {

constexpr Eigen::Index kOracleMaxN = 12;
constexpr int kOracleMaxK = 5;

inline void check_caps(Eigen::Index n, int k) {
  if (n > kOracleMaxN || k > kOracleMaxK)
    throw std::length_error("oracle: instance exceeds the brute-force caps (n<=12, K<=5)");
}

// Parent array over a DFS order of the tree's vertices so that embeddings
// can be extended one vertex at a time.
struct EmbedOrder {
  std::vector<std::uint32_t> order;    // order[0] is the start vertex
  std::vector<std::uint32_t> parent;   // parent[i] is an index into `order`
};

inline EmbedOrder embed_order(const std::vector<Edge>& edges) {
  const auto t = tree_detail::tree_view(edges);
  EmbedOrder eo;
  std::vector<std::uint32_t> pos(t.n, t.n);
  std::vector<std::pair<std::uint32_t, std::uint32_t>> stack{{0, t.n}};
  while (!stack.empty()) {
    auto [v, par] = stack.back();
    stack.pop_back();
    pos[v] = static_cast<std::uint32_t>(eo.order.size());
    eo.order.push_back(v);
    eo.parent.push_back(par == t.n ? 0 : pos[par]);
    for (auto w : t.adj[v])
      if (w != par) stack.emplace_back(w, v);
  }
  return eo;
}

template <typename Visit>
inline void for_each_embedding(Eigen::Index n, const EmbedOrder& eo, Visit&& visit) {
  const std::size_t v_count = eo.order.size();
  std::vector<std::uint32_t> image(v_count, 0);
  std::uint32_t used = 0;  // bitmask over host vertices, n <= 12
  auto rec = [&](auto&& self, std::size_t depth) -> void {
    if (depth == v_count) {
      visit(image);
      return;
    }
    for (std::uint32_t x = 0; x < n; ++x) {
      if (used & (1u << x)) continue;
      image[depth] = x;
      used |= 1u << x;
      self(self, depth + 1);
      used &= ~(1u << x);
    }
  };
  rec(rec, 0);
}

}  // namespace brute_detail

// Exhaustive oracle for W_H(M): sums the edge-weight product over all
// labelled subgraphs isomorphic to H.
inline double brute_wh(const CenteredMatrix& m, const UnlabeledTree& tree) {
  brute_detail::check_caps(m.rows(), tree.k);
  const auto eo = brute_detail::embed_order(tree.edges);
  double sum = 0.0;
  brute_detail::for_each_embedding(m.rows(), eo, [&](const std::vector<std::uint32_t>& image) {
    double prod = 1.0;
    for (std::size_t i = 1; i < image.size(); ++i) prod *= m(image[eo.parent[i]], image[i]);
    sum += prod;
  });
  return sum / static_cast<double>(tree.aut);
}

// W_H on the centered matrix of an unweighted graph, evaluated exactly: each
// embedding falls into one of K+1 sign classes by its number of present host
// edges, the classes are counted in integers, and the class values are
// combined in an order that is invariant under vertex relabelling and graph
// complementation, making those symmetries bit-exact.
inline double brute_wh_signed(const Graph& g, const UnlabeledTree& tree) {
  brute_detail::check_caps(static_cast<Eigen::Index>(g.n()), tree.k);
  const auto eo = brute_detail::embed_order(tree.edges);
  const int k = tree.k;
  std::vector<std::uint64_t> count(k + 1, 0);
  brute_detail::for_each_embedding(g.n(), eo, [&](const std::vector<std::uint32_t>& image) {
    int present = 0;
    for (std::size_t i = 1; i < image.size(); ++i)
      if (g.has_edge(image[eo.parent[i]], image[i])) ++present;
    ++count[present];
  });
  std::vector<double> terms;
  terms.reserve(k + 1);
  for (int e = 0; e <= k; ++e) {
    if (count[e] == 0) continue;
    if (count[e] % tree.aut != 0)
      throw std::logic_error("brute_wh_signed: class count not divisible by aut");
    // Magnitude q_complement^e * q^(k-e) with factors multiplied in sorted
    // order so that (q, e) and (q_complement, k-e) produce identical bits.
    std::vector<double> factors;
    factors.reserve(k);
    for (int i = 0; i < e; ++i) factors.push_back(g.q_complement());
    for (int i = 0; i < k - e; ++i) factors.push_back(g.q());
    std::sort(factors.begin(), factors.end());
    double magnitude = static_cast<double>(count[e] / tree.aut);
    for (double f : factors) magnitude *= f;
    terms.push_back(((k - e) % 2 == 0) ? magnitude : -magnitude);
  }
  // Positive and negative magnitudes are accumulated separately, each in
  // ascending order, so that negating every term negates the result exactly
  // and complementation stays a bit-exact symmetry for odd k as well.
  std::vector<double> pos, neg;
  for (double v : terms) (v >= 0.0 ? pos : neg).push_back(std::abs(v));
  std::sort(pos.begin(), pos.end());
  std::sort(neg.begin(), neg.end());
  double p = 0.0, m = 0.0;
  for (double v : pos) p += v;
  for (double v : neg) m += v;
  return p - m;
}

// Exact subgraph count sub(H, G) by embedding enumeration.
inline std::uint64_t brute_subgraph_count(const Graph& g, const UnlabeledTree& tree) {
  brute_detail::check_caps(static_cast<Eigen::Index>(g.n()), tree.k);
  const auto eo = brute_detail::embed_order(tree.edges);
  std::uint64_t embeddings = 0;
  brute_detail::for_each_embedding(g.n(), eo, [&](const std::vector<std::uint32_t>& image) {
    for (std::size_t i = 1; i < image.size(); ++i)
      if (!g.has_edge(image[eo.parent[i]], image[i])) return;
    ++embeddings;
  });
  return embeddings / tree.aut;
}

// Definitionally exact value of X_H(M, mu): the colorful-only restriction of
// brute_wh.
inline double xh_bruteforce(const CenteredMatrix& m, const UnlabeledTree& tree,
                            const Coloring& coloring) {
  brute_detail::check_caps(m.rows(), tree.k);
  const auto eo = brute_detail::embed_order(tree.edges);
  double sum = 0.0;
  brute_detail::for_each_embedding(m.rows(), eo, [&](const std::vector<std::uint32_t>& image) {
    std::uint32_t palette = 0;
    for (auto x : image) {
      const std::uint32_t bit = 1u << coloring.colors[x];
      if (palette & bit) return;
      palette |= bit;
    }
    double prod = 1.0;
    for (std::size_t i = 1; i < image.size(); ++i) prod *= m(image[eo.parent[i]], image[i]);
    sum += prod;
  });
  return sum / static_cast<double>(tree.aut);
}

}  // namespace treecorr
