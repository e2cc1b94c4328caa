#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "treecorr/counting.hpp"
#include "treecorr/graph.hpp"
#include "treecorr/rng.hpp"
#include "treecorr/trees.hpp"

namespace treecorr {

enum class StatMode { exact, signed_cc, unsigned_cc };

inline StatMode parse_stat_mode(const std::string& name) {
  if (name == "exact") return StatMode::exact;
  if (name == "signed") return StatMode::signed_cc;
  if (name == "unsigned") return StatMode::unsigned_cc;
  throw std::invalid_argument("mode must be one of exact, signed, unsigned");
}

// Probability that a fixed set of k+1 vertices is colorful under a uniform
// (k+1)-coloring.
inline double colorful_probability(int k) {
  double r = 1.0;
  for (int i = 1; i <= k + 1; ++i) r *= static_cast<double>(i) / static_cast<double>(k + 1);
  return r;
}

inline int default_replicates(int k) {
  return static_cast<int>(std::ceil(1.0 / colorful_probability(k)));
}

struct StatConfig {
  int k = 4;
  double q = 0.1;
  double rho = 0.9;
  int t = 0;  // colorings per side; 0 means ceil(1/r)
  double c = 0.5;
  StatMode mode = StatMode::signed_cc;

  int replicates() const { return t > 0 ? t : default_replicates(k); }

  void validate() const {
    if (k < 1) throw std::invalid_argument("k must be at least 1");
    if (!(q > 0.0 && q < 1.0)) throw std::invalid_argument("q must lie in (0, 1)");
    if (rho == 0.0)
      throw std::invalid_argument(
          "rho = 0 makes the statistic scale undefined; for independence-only "
          "testing use a plain edge-count comparison instead");
    if (!(c > 0.0 && c < 1.0)) throw std::invalid_argument("c must lie in (0, 1)");
    if (t < 0) throw std::invalid_argument("t must be positive (or 0 for the default)");
  }
};

struct StatResult {
  double value = 0.0;      // on the f scale (or g scale in unsigned mode)
  double threshold = 0.0;
  bool correlated = false;
  std::vector<double> components;  // per-tree contributions
  double wall_ms = 0.0;
};

// Scaling factor beta = (rho / (q(1-q)))^K (n-K-1)!/n!, evaluated as a
// telescoped product of ratio terms to keep intermediates near 1.
inline double beta_factor(std::uint64_t n, int k, double q, double rho) {
  if (n < static_cast<std::uint64_t>(k) + 1)
    throw std::domain_error("beta: n must be at least K+1");
  const double sigma2 = q * (1.0 - q);
  double beta = 1.0;
  for (int j = 0; j < k; ++j) beta *= (rho / sigma2) / static_cast<double>(n - j);
  beta /= static_cast<double>(n - k);
  return beta;
}

struct ScaleFactors {
  double beta = 0.0;
  double r = 0.0;
  double sigma2 = 0.0;
  std::vector<double> a_h;  // rho^K / sub_n(H), family order
};

inline ScaleFactors scale_factors(std::uint64_t n, const TreeFamily& family, double q,
                                  double rho) {
  ScaleFactors s;
  s.beta = beta_factor(n, family.k, q, rho);
  s.r = colorful_probability(family.k);
  s.sigma2 = q * (1.0 - q);
  s.a_h.reserve(family.trees.size());
  const double rho_k = std::pow(rho, family.k);
  for (const auto& tree : family.trees)
    s.a_h.push_back(rho_k / static_cast<double>(sub_n(tree, n)));
  return s;
}

// Detection threshold on the f scale: tau = c rho^{2K} |T|.
inline double detection_threshold(const StatConfig& cfg, std::size_t family_size) {
  return cfg.c * std::pow(cfg.rho, 2 * cfg.k) * static_cast<double>(family_size);
}

// Neumaier compensated accumulator; keeps cross-tree sums deterministic to
// below 1e-9 relative regardless of magnitude spread.
class CompensatedSum {
 public:
  void add(double value) {
    const double t = sum_ + value;
    if (std::abs(sum_) >= std::abs(value))
      comp_ += (sum_ - t) + value;
    else
      comp_ += (value - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

namespace stat_detail {

inline void check_pair(const Graph& a, const Graph& b) {
  if (a.n() != b.n()) throw std::invalid_argument("statistic: graphs must share n");
}

inline std::vector<RootedDecomposition> decompose_family(const TreeFamily& family) {
  std::vector<RootedDecomposition> out;
  out.reserve(family.trees.size());
  for (const auto& tree : family.trees) out.push_back(decompose(tree.edges, 0));
  return out;
}

// Per-tree averages of X_H over a batch of colorings, processed in column
// chunks to bound table memory.
inline std::vector<double> tree_count_averages(const HostOperator& host,
                                               const TreeFamily& family,
                                               const std::vector<RootedDecomposition>& decomps,
                                               const std::vector<Coloring>& colorings) {
  const std::size_t t = colorings.size();
  // Dense hosts amortize the matrix product over wide chunks; support-
  // tracking hosts run best when a chunk of tables stays cache-resident.
  const std::size_t budget = host.tracks_support() ? 64000 : 400000;
  const std::size_t chunk = std::max<std::size_t>(1, budget / static_cast<std::size_t>(host.n()));
  std::vector<CompensatedSum> sums(family.trees.size());
  for (std::size_t begin = 0; begin < t; begin += chunk) {
    const std::size_t end = std::min(t, begin + chunk);
    std::vector<Coloring> batch(colorings.begin() + begin, colorings.begin() + end);
    ColorfulTreeCounter counter(host, batch, family.k);
    for (std::size_t h = 0; h < family.trees.size(); ++h) {
      const Eigen::VectorXd x = counter.evaluate(decomps[h], family.trees[h].aut);
      for (Eigen::Index j = 0; j < x.size(); ++j) sums[h].add(x(j));
    }
  }
  std::vector<double> avg(family.trees.size());
  for (std::size_t h = 0; h < avg.size(); ++h) avg[h] = sums[h].value() / static_cast<double>(t);
  return avg;
}

class WallTimer {
 public:
  double elapsed_ms() const {
    return std::chrono::duration<double, std::milli>(Clock::now() - start_).count();
  }

 private:
  using Clock = std::chrono::steady_clock;
  Clock::time_point start_ = Clock::now();
};

}  // namespace stat_detail

// Exact statistic f_T = sum over trees of beta aut(H) W_H(Abar) W_H(Bbar),
// with the signed counts evaluated by the exhaustive oracle.
inline StatResult f_exact(const Graph& a, const Graph& b, const StatConfig& cfg,
                          const TreeFamily& family) {
  cfg.validate();
  stat_detail::check_pair(a, b);
  const stat_detail::WallTimer timer;
  const double beta = beta_factor(a.n(), cfg.k, cfg.q, cfg.rho);
  StatResult res;
  CompensatedSum total;
  for (const auto& tree : family.trees) {
    const double term = beta * static_cast<double>(tree.aut) * brute_wh_signed(a, tree) *
                        brute_wh_signed(b, tree);
    res.components.push_back(term);
    total.add(term);
  }
  res.value = total.value();
  res.threshold = detection_threshold(cfg, family.trees.size());
  res.correlated = res.value >= res.threshold;
  res.wall_ms = timer.elapsed_ms();
  return res;
}

// Color-coding estimate Y_T: products of per-side averages of X_H over t
// fresh colorings each, weighted by aut(H).
inline double y_stat(const Graph& a, const Graph& b, const StatConfig& cfg,
                     const TreeFamily& family, const RandomStream& stream) {
  cfg.validate();
  stat_detail::check_pair(a, b);
  const int t = cfg.replicates();
  const auto decomps = stat_detail::decompose_family(family);
  const auto mu = random_colorings(a.n(), cfg.k, t, stream.fold(1));
  const auto nu = random_colorings(b.n(), cfg.k, t, stream.fold(2));
  const CenteredMatrix ma = center(a);
  const CenteredMatrix mb = center(b);
  const DenseHost ha(ma);
  const DenseHost hb(mb);
  const auto xa = stat_detail::tree_count_averages(ha, family, decomps, mu);
  const auto xb = stat_detail::tree_count_averages(hb, family, decomps, nu);
  CompensatedSum total;
  for (std::size_t h = 0; h < family.trees.size(); ++h)
    total.add(static_cast<double>(family.trees[h].aut) * xa[h] * xb[h]);
  return total.value();
}

// f~ = (beta / r^2) Y_T, compared against the same threshold as f_exact.
inline StatResult f_tilde(const Graph& a, const Graph& b, const StatConfig& cfg,
                          const TreeFamily& family, const RandomStream& stream) {
  const stat_detail::WallTimer timer;
  const double y = y_stat(a, b, cfg, family, stream);
  const double r = colorful_probability(cfg.k);
  const double beta = beta_factor(a.n(), cfg.k, cfg.q, cfg.rho);
  StatResult res;
  res.value = beta / (r * r) * y;
  res.threshold = detection_threshold(cfg, family.trees.size());
  res.correlated = res.value >= res.threshold;
  res.wall_ms = timer.elapsed_ms();
  return res;
}

// Mean subgraph count of H in G(n, q): gamma_H = C(n,K+1)(K+1)! q^K / aut.
inline double gamma_mean_count(const UnlabeledTree& tree, std::uint64_t n, double q) {
  double value = static_cast<double>(sub_n(tree, n));
  for (int i = 0; i < tree.k; ++i) value *= q;
  return value;
}

// Exact uncentered statistic g_T = beta sum aut(H) (W_H(A)-gamma)(W_H(B)-gamma)
// on plain subgraph counts; oracle scale only.
inline StatResult g_exact(const Graph& a, const Graph& b, const StatConfig& cfg,
                          const TreeFamily& family) {
  cfg.validate();
  stat_detail::check_pair(a, b);
  const stat_detail::WallTimer timer;
  const double beta = beta_factor(a.n(), cfg.k, cfg.q, cfg.rho);
  StatResult res;
  CompensatedSum total;
  for (const auto& tree : family.trees) {
    const double gamma = gamma_mean_count(tree, a.n(), cfg.q);
    const double wa = static_cast<double>(brute_subgraph_count(a, tree));
    const double wb = static_cast<double>(brute_subgraph_count(b, tree));
    const double term = beta * static_cast<double>(tree.aut) * (wa - gamma) * (wb - gamma);
    res.components.push_back(term);
    total.add(term);
  }
  res.value = total.value();
  res.threshold = detection_threshold(cfg, family.trees.size());
  res.correlated = res.value >= res.threshold;
  res.wall_ms = timer.elapsed_ms();
  return res;
}

// Color-coding estimate of g_T through the sparse adjacency kernel:
// Z_T = sum aut(H) (avg X_H(A) - r gamma_H)(avg X_H(B) - r gamma_H), with
// E[Z | A, B] = (r^2 / beta) g_T; reported rescaled to the g scale.
inline StatResult z_stat(const Graph& a, const Graph& b, const StatConfig& cfg,
                         const TreeFamily& family, const RandomStream& stream) {
  cfg.validate();
  stat_detail::check_pair(a, b);
  const stat_detail::WallTimer timer;
  const auto decomps = stat_detail::decompose_family(family);
  const int t = cfg.replicates();
  const double r = colorful_probability(cfg.k);
  const auto mu = random_colorings(a.n(), cfg.k, t, stream.fold(1));
  const auto nu = random_colorings(b.n(), cfg.k, t, stream.fold(2));
  const SparseHost ha(a);
  const SparseHost hb(b);
  const auto xa = stat_detail::tree_count_averages(ha, family, decomps, mu);
  const auto xb = stat_detail::tree_count_averages(hb, family, decomps, nu);
  const double beta = beta_factor(a.n(), cfg.k, cfg.q, cfg.rho);
  CompensatedSum total;
  for (std::size_t h = 0; h < family.trees.size(); ++h) {
    const double gamma = gamma_mean_count(family.trees[h], a.n(), cfg.q);
    total.add(static_cast<double>(family.trees[h].aut) * (xa[h] - r * gamma) *
              (xb[h] - r * gamma));
  }
  StatResult res;
  res.value = beta / (r * r) * total.value();
  res.threshold = detection_threshold(cfg, family.trees.size());
  res.correlated = res.value >= res.threshold;
  res.wall_ms = timer.elapsed_ms();
  return res;
}

// Mode dispatch used by the experiment driver and the CLI.
inline StatResult evaluate_statistic(const Graph& a, const Graph& b, const StatConfig& cfg,
                                     const TreeFamily& family, const RandomStream& stream) {
  switch (cfg.mode) {
    case StatMode::exact:
      return f_exact(a, b, cfg, family);
    case StatMode::signed_cc:
      return f_tilde(a, b, cfg, family, stream);
    case StatMode::unsigned_cc:
      return z_stat(a, b, cfg, family, stream);
  }
  throw std::logic_error("unknown statistic mode");
}

}  // namespace treecorr
