#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "treecorr/rng.hpp"

namespace treecorr {

using Edge = std::pair<std::uint32_t, std::uint32_t>;

// Undirected simple graph on [0, n) with the nominal edge probability used
// for centering. The complement probability is stored alongside q so that
// complement() is an exact involution and centering a complemented graph
// yields the exact elementwise negation of the original centered matrix.
class Graph {
 public:
  Graph(std::uint32_t n, std::vector<Edge> edges, double q)
      : Graph(n, std::move(edges), q, 1.0 - q) {}

  Graph(std::uint32_t n, std::vector<Edge> edges, double q, double q_complement)
      : n_(n), q_(q), qc_(q_complement), edges_(std::move(edges)) {
    if (n == 0) throw std::invalid_argument("Graph: n must be positive");
    if (!(q > 0.0 && q < 1.0)) throw std::invalid_argument("Graph: q must lie in (0, 1)");
    for (auto& e : edges_) {
      if (e.first == e.second) throw std::invalid_argument("Graph: self-loop");
      if (e.first > e.second) std::swap(e.first, e.second);
      if (e.second >= n) throw std::invalid_argument("Graph: endpoint out of range");
    }
    std::sort(edges_.begin(), edges_.end());
    if (std::adjacent_find(edges_.begin(), edges_.end()) != edges_.end())
      throw std::invalid_argument("Graph: duplicate edge");
  }

  std::uint32_t n() const { return n_; }
  double q() const { return q_; }
  double q_complement() const { return qc_; }
  std::size_t edge_count() const { return edges_.size(); }
  const std::vector<Edge>& edges() const { return edges_; }

  bool has_edge(std::uint32_t u, std::uint32_t v) const {
    if (u > v) std::swap(u, v);
    return std::binary_search(edges_.begin(), edges_.end(), Edge{u, v});
  }

  // CSR adjacency with both directions of every edge.
  struct Adjacency {
    std::vector<std::uint32_t> offsets;  // size n + 1
    std::vector<std::uint32_t> targets;  // size 2m
  };

  Adjacency adjacency() const {
    Adjacency adj;
    adj.offsets.assign(n_ + 1, 0);
    for (const auto& [u, v] : edges_) {
      ++adj.offsets[u + 1];
      ++adj.offsets[v + 1];
    }
    for (std::uint32_t i = 0; i < n_; ++i) adj.offsets[i + 1] += adj.offsets[i];
    adj.targets.resize(2 * edges_.size());
    std::vector<std::uint32_t> cursor(adj.offsets.begin(), adj.offsets.end() - 1);
    for (const auto& [u, v] : edges_) {
      adj.targets[cursor[u]++] = v;
      adj.targets[cursor[v]++] = u;
    }
    return adj;
  }

 private:
  std::uint32_t n_;
  double q_;
  double qc_;
  std::vector<Edge> edges_;
};

// Dense symmetric matrix of centered adjacency entries. The diagonal is
// zeroed so kernels may iterate over all y without excluding y == x.
using CenteredMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline CenteredMatrix center(const Graph& g) {
  const auto n = static_cast<Eigen::Index>(g.n());
  CenteredMatrix m = CenteredMatrix::Constant(n, n, -g.q());
  m.diagonal().setZero();
  for (const auto& [u, v] : g.edges()) {
    m(u, v) = g.q_complement();
    m(v, u) = g.q_complement();
  }
  return m;
}

inline Graph complement(const Graph& g) {
  std::vector<Edge> edges;
  edges.reserve(static_cast<std::size_t>(g.n()) * (g.n() - 1) / 2 - g.edge_count());
  for (std::uint32_t u = 0; u + 1 < g.n(); ++u)
    for (std::uint32_t v = u + 1; v < g.n(); ++v)
      if (!g.has_edge(u, v)) edges.emplace_back(u, v);
  return Graph(g.n(), std::move(edges), g.q_complement(), g.q());
}

struct CorrelatedPair {
  Graph a;
  Graph b;
  std::vector<std::uint32_t> pi;  // latent correspondence, diagnostics only
  double rho;
};

inline double min_admissible_rho(double q) {
  return -std::min(q / (1.0 - q), (1.0 - q) / q);
}

inline void check_sample_params(std::uint32_t n, double q, double rho) {
  if (n < 1) throw std::invalid_argument("n must be at least 1");
  if (!(q > 0.0 && q < 1.0)) throw std::invalid_argument("q must lie in (0, 1)");
  const double lo = min_admissible_rho(q);
  if (!(rho >= lo && rho <= 1.0)) {
    std::ostringstream msg;
    msg << "rho=" << rho << " outside the admissible range [" << lo << ", 1] for q=" << q;
    throw std::invalid_argument(msg.str());
  }
}

// Samples (A, B) from the correlated Erdos-Renyi model: pi is uniform and,
// conditioned on pi, the pairs (A_ij, B_{pi(i)pi(j)}) are i.i.d. Bernoulli(q)
// pairs with correlation rho. One uniform draw decides each joint outcome.
inline CorrelatedPair sample_correlated_pair(std::uint32_t n, double q, double rho,
                                             const RandomStream& stream) {
  check_sample_params(n, q, rho);
  const double p11 = q * q + rho * q * (1.0 - q);
  const double p10 = q - p11;  // == p01
  auto pi = random_permutation(n, stream.fold(1));
  const RandomStream edge_stream = stream.fold(2);
  std::vector<Edge> ea, eb;
  std::uint64_t idx = 0;
  for (std::uint32_t i = 0; i + 1 < n; ++i) {
    for (std::uint32_t j = i + 1; j < n; ++j, ++idx) {
      // Joint law laid out on [0,1): [0,p11) -> 11, [p11,q) -> 10,
      // [q, q+p10) -> 01, rest -> 00.
      const double u = edge_stream.uniform(idx);
      if (u < q) ea.emplace_back(i, j);
      if (u < p11 || (u >= q && u < q + p10)) eb.emplace_back(pi[i], pi[j]);
    }
  }
  Graph a(n, std::move(ea), q);
  Graph b(n, std::move(eb), q);
  return CorrelatedPair{std::move(a), std::move(b), std::move(pi), rho};
}

inline std::pair<Graph, Graph> sample_independent_pair(std::uint32_t n, double q,
                                                       const RandomStream& stream) {
  check_sample_params(n, q, 0.0);
  std::vector<Edge> ea, eb;
  const RandomStream sa = stream.fold(3);
  const RandomStream sb = stream.fold(4);
  std::uint64_t idx = 0;
  for (std::uint32_t i = 0; i + 1 < n; ++i) {
    for (std::uint32_t j = i + 1; j < n; ++j, ++idx) {
      if (sa.uniform(idx) < q) ea.emplace_back(i, j);
      if (sb.uniform(idx) < q) eb.emplace_back(i, j);
    }
  }
  return {Graph(n, std::move(ea), q), Graph(n, std::move(eb), q)};
}

// Subsampling view of positive correlation: both graphs are children of a
// common parent G(n, p) kept with probability s, where s = rho(1-q)+q.
inline std::pair<double, double> subsampling_params(double q, double rho) {
  if (!(q > 0.0 && q < 1.0)) throw std::invalid_argument("q must lie in (0, 1)");
  if (!(rho > 0.0)) throw std::domain_error("subsampling view requires rho > 0");
  const double s = rho * (1.0 - q) + q;
  return {q / s, s};
}

// Edge-list text format: first line "n m", then m lines "u v" (0-based).
// Lines starting with '#' are comments.
inline Graph read_edge_list(std::istream& in, double q_override = -1.0) {
  std::string line;
  auto next_line = [&]() {
    while (std::getline(in, line)) {
      const auto pos = line.find_first_not_of(" \t\r");
      if (pos == std::string::npos || line[pos] == '#') continue;
      return true;
    }
    return false;
  };
  if (!next_line()) throw std::runtime_error("edge list: missing header line");
  std::istringstream header(line);
  std::uint64_t n = 0, m = 0;
  if (!(header >> n >> m)) throw std::runtime_error("edge list: malformed header, expected 'n m'");
  std::vector<Edge> edges;
  edges.reserve(m);
  for (std::uint64_t i = 0; i < m; ++i) {
    if (!next_line()) throw std::runtime_error("edge list: fewer edges than announced");
    std::istringstream row(line);
    std::uint32_t u = 0, v = 0;
    if (!(row >> u >> v)) throw std::runtime_error("edge list: malformed edge line");
    edges.emplace_back(u, v);
  }
  double q = q_override;
  if (q < 0.0) {
    const double possible = static_cast<double>(n) * (static_cast<double>(n) - 1.0) / 2.0;
    q = possible > 0.0 ? static_cast<double>(m) / possible : 0.5;
    if (q <= 0.0) q = 1.0 / (possible + 1.0);
    if (q >= 1.0) q = possible / (possible + 1.0);
  }
  return Graph(static_cast<std::uint32_t>(n), std::move(edges), q);
}

inline void write_edge_list(std::ostream& out, const Graph& g) {
  out << g.n() << ' ' << g.edge_count() << '\n';
  for (const auto& [u, v] : g.edges()) out << u << ' ' << v << '\n';
}

}  // namespace treecorr
