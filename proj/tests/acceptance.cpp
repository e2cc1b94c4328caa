// Acceptance checks for the detection pipeline. Each numbered criterion
// prints exactly one PASS/FAIL line; the process exits with the number of
// failed criteria. Argument 1 is the path to the command-line binary.
//
// The full-size power experiment (criterion 1b) takes hours on one core and
// only runs when TREECORR_ACCEPT_FULL=1 is set; it is reported as SKIP
// otherwise and does not count against the result.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "treecorr/counting.hpp"
#include "treecorr/graph.hpp"
#include "treecorr/harness.hpp"
#include "treecorr/rng.hpp"
#include "treecorr/statistic.hpp"
#include "treecorr/trees.hpp"

using namespace treecorr;

namespace {

int failures = 0;

void report(const std::string& name, bool ok, const std::string& detail) {
  std::cout << (ok ? "PASS" : "FAIL") << ": " << name << " -- " << detail << std::endl;
  if (!ok) ++failures;
}

double now_ms() {
  return std::chrono::duration<double, std::milli>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

// --- 1. detection power ----------------------------------------------------

void criterion_power() {
  {
    ExperimentConfig cfg;
    cfg.n = 300;
    cfg.q = 0.1;
    cfg.rho = 0.99;
    cfg.k = 5;
    cfg.t = 200;
    cfg.pairs = 50;
    cfg.c = 0.5;
    cfg.seed = 1;
    cfg.mode = StatMode::signed_cc;
    const auto family = enumerate_free_trees(cfg.k);
    const double t0 = now_ms();
    const auto rows = run_experiment(cfg, family);
    const double mins = (now_ms() - t0) / 60000.0;
    const auto roc = roc_from_runs(rows);
    const auto err = error_rates(rows);
    report("1a power, reduced size (n=300 K=5 t=200)",
           roc.auc >= 0.95 && err.total() <= 0.30 && mins < 10.0,
           "auc=" + fmt(roc.auc) + " type1=" + fmt(err.type1) + " type2=" + fmt(err.type2) +
               " minutes=" + fmt(mins) + " (need auc>=0.95, total error<=0.30, <10 min)");
  }
  if (const char* full = std::getenv("TREECORR_ACCEPT_FULL"); full && std::string(full) == "1") {
    ExperimentConfig cfg;
    cfg.n = 1000;
    cfg.q = 0.1;
    cfg.rho = 0.99;
    cfg.k = 7;
    cfg.t = 1000;
    cfg.pairs = 100;
    cfg.c = 0.5;
    cfg.seed = 1;
    cfg.mode = StatMode::signed_cc;
    const auto family = enumerate_free_trees(cfg.k);
    const auto rows = run_experiment(cfg, family);
    const auto err = error_rates(rows);
    report("1b power, full size (n=1000 K=7 t=1000)", err.total() <= 0.25,
           "type1=" + fmt(err.type1) + " type2=" + fmt(err.type2) + " (need sum<=0.25)");
  } else {
    std::cout << "SKIP: 1b power, full size -- set TREECORR_ACCEPT_FULL=1 to run (hours on one core)"
              << std::endl;
  }
}

// --- 2. tree combinatorics -------------------------------------------------

void criterion_trees() {
  const std::vector<std::size_t> expected{1, 1, 2, 3, 6, 11, 23, 47, 106, 235, 551};
  bool ok = true;
  std::string detail = "counts";
  for (int k = 1; k <= 11; ++k) {
    const auto family = enumerate_free_trees(k);
    detail += (k == 1 ? " " : ",") + std::to_string(family.trees.size());
    if (family.trees.size() != expected[k - 1]) ok = false;
    if (k == 4 && family.trees.size() != 3) ok = false;   // anchor
    if (k == 6 && family.trees.size() != 11) ok = false;  // anchor
    if (k <= 9) {
      // Sum over classes of (k+1)!/aut must give the labelled-tree count
      // (k+1)^(k-1) exactly.
      std::uint64_t fact = 1;
      for (std::uint64_t i = 2; i <= static_cast<std::uint64_t>(k) + 1; ++i) fact *= i;
      std::uint64_t labelled = 0;
      for (const auto& tree : family.trees) {
        if (fact % tree.aut != 0) ok = false;
        labelled += fact / tree.aut;
      }
      std::uint64_t cayley = 1;
      for (int i = 0; i + 1 < k; ++i) cayley *= static_cast<std::uint64_t>(k) + 1;
      if (labelled != cayley) {
        ok = false;
        detail += "(labelled-count mismatch at k=" + std::to_string(k) + ")";
      }
    }
  }
  report("2 tree class counts and labelled-count identity", ok, detail);
}

// --- 3. oracle equivalence -------------------------------------------------

std::uint64_t count_by_edge_subsets(const Graph& g, const UnlabeledTree& tree) {
  const auto& host_edges = g.edges();
  const int k = tree.k;
  std::uint64_t hits = 0;
  std::vector<std::size_t> pick(k);
  auto rec = [&](auto&& self, int depth, std::size_t from) -> void {
    if (depth == k) {
      std::map<std::uint32_t, std::uint32_t> relabel;
      std::vector<Edge> sub;
      for (int i = 0; i < k; ++i) {
        const auto& [u, v] = host_edges[pick[i]];
        const auto ru = relabel.emplace(u, static_cast<std::uint32_t>(relabel.size())).first->second;
        const auto rv = relabel.emplace(v, static_cast<std::uint32_t>(relabel.size())).first->second;
        sub.emplace_back(std::min(ru, rv), std::max(ru, rv));
      }
      if (relabel.size() != static_cast<std::size_t>(k) + 1) return;
      try {
        if (canonical_form(sub) == tree.canon) ++hits;
      } catch (const std::invalid_argument&) {
      }
      return;
    }
    for (std::size_t e = from; e < host_edges.size(); ++e) {
      pick[depth] = e;
      self(self, depth + 1, e + 1);
    }
  };
  rec(rec, 0, 0);
  return hits;
}

void criterion_oracles() {
  bool ok = true;
  double worst = 0.0;
  for (int rep = 0; rep < 200; ++rep) {
    const RandomStream stream = RandomStream(300).fold(rep);
    const int k = 1 + static_cast<int>(stream.below(0, 4));
    const Eigen::Index n = k + 2 + static_cast<Eigen::Index>(stream.below(1, 8 - k - 1));
    CenteredMatrix m = CenteredMatrix::Zero(n, n);
    std::uint64_t idx = 0;
    for (Eigen::Index i = 0; i + 1 < n; ++i)
      for (Eigen::Index j = i + 1; j < n; ++j, ++idx) {
        const double w = 2.0 * stream.fold(1).uniform(idx) - 1.0;
        m(i, j) = w;
        m(j, i) = w;
      }
    const auto family = enumerate_free_trees(k);
    const auto& tree = family.trees[stream.below(2, static_cast<std::uint32_t>(family.trees.size()))];
    const auto coloring =
        random_colorings(static_cast<std::uint32_t>(n), k, 1, stream.fold(2))[0];
    const double dp = xh_dp(m, tree, decompose(tree.edges, 0), coloring);
    const double brute = xh_bruteforce(m, tree, coloring);
    const double rel = std::abs(dp - brute) / std::max({1.0, std::abs(dp), std::abs(brute)});
    worst = std::max(worst, rel);
    if (rel > 1e-9) ok = false;
  }
  bool counts_ok = true;
  for (int rep = 0; rep < 10 && counts_ok; ++rep) {
    const auto g = sample_independent_pair(10, 0.35, RandomStream(301).fold(rep)).first;
    CenteredMatrix m01 = CenteredMatrix::Zero(10, 10);
    for (const auto& [u, v] : g.edges()) {
      m01(u, v) = 1.0;
      m01(v, u) = 1.0;
    }
    for (int k = 1; k <= 4; ++k)
      for (const auto& tree : enumerate_free_trees(k).trees) {
        const double w = brute_wh(m01, tree);
        if (std::abs(w - static_cast<double>(count_by_edge_subsets(g, tree))) > 1e-9)
          counts_ok = false;
      }
  }
  report("3 dynamic program vs exhaustive oracle", ok && counts_ok,
         "200 instances, worst relative gap=" + fmt(worst) +
             (counts_ok ? ", 0/1 counts match an edge-subset counter"
                        : ", 0/1 count mismatch"));
}

// --- 4. exact unbiasedness by full coloring enumeration --------------------

void criterion_unbiased() {
  const std::uint32_t n = 5;
  StatConfig cfg;
  cfg.k = 2;
  cfg.q = 0.4;
  cfg.rho = 0.6;
  const auto family = enumerate_free_trees(cfg.k);
  const double r = colorful_probability(cfg.k);
  const double beta = beta_factor(n, cfg.k, cfg.q, cfg.rho);
  bool ok = true;
  double worst = 0.0;
  for (int rep = 0; rep < 5; ++rep) {
    const auto [a, b] = sample_independent_pair(n, cfg.q, RandomStream(400).fold(rep));
    const CenteredMatrix ma = center(a), mb = center(b);
    double y_full = 0.0;
    for (const auto& tree : family.trees) {
      const auto d = decompose(tree.edges, 0);
      double xa = 0.0, xb = 0.0;
      Coloring col;
      col.n = n;
      col.k = cfg.k;
      col.colors.assign(n, 0);
      for (std::uint64_t code = 0; code < 243; ++code) {
        std::uint64_t c = code;
        for (std::uint32_t v = 0; v < n; ++v) {
          col.colors[v] = static_cast<std::uint8_t>(c % 3);
          c /= 3;
        }
        xa += xh_dp(ma, tree, d, col);
        xb += xh_dp(mb, tree, d, col);
      }
      y_full += static_cast<double>(tree.aut) * (xa / 243.0) * (xb / 243.0);
    }
    const double f = f_exact(a, b, cfg, family).value;
    const double gap =
        std::abs(beta / (r * r) * y_full - f) / std::max(1.0, std::abs(f));
    worst = std::max(worst, gap);
    if (gap > 1e-9) ok = false;
  }
  report("4 coloring-averaged estimate equals the exact statistic", ok,
         "all 243 colorings at n=5 K=2, worst relative gap=" + fmt(worst));
}

// --- 5. moment identities by Monte Carlo -----------------------------------

void criterion_moments() {
  const std::uint32_t n = 10;
  StatConfig cfg;
  cfg.k = 3;
  cfg.q = 0.3;
  cfg.rho = 0.6;
  cfg.mode = StatMode::exact;
  const auto family = enumerate_free_trees(cfg.k);
  const double target = std::pow(cfg.rho, 2 * cfg.k) * static_cast<double>(family.trees.size());
  const int trials = 5000;
  double sum1 = 0.0, sum0 = 0.0, sumsq1 = 0.0, sumsq0 = 0.0;
  for (int i = 0; i < trials; ++i) {
    const auto pair = sample_correlated_pair(n, cfg.q, cfg.rho, RandomStream(500).fold(i));
    const double f1 = f_exact(pair.a, pair.b, cfg, family).value;
    sum1 += f1;
    sumsq1 += f1 * f1;
    const auto [a, b] = sample_independent_pair(n, cfg.q, RandomStream(501).fold(i));
    const double f0 = f_exact(a, b, cfg, family).value;
    sum0 += f0;
    sumsq0 += f0 * f0;
  }
  const double mean1 = sum1 / trials, mean0 = sum0 / trials;
  const double var0 = sumsq0 / trials - mean0 * mean0;
  const double se1 = std::sqrt((sumsq1 / trials - mean1 * mean1) / trials);
  const double se0 = std::sqrt(var0 / trials);
  const bool ok = std::abs(mean1 - target) < 3.0 * se1 && std::abs(mean0) < 3.0 * se0 &&
                  std::abs(var0 - target) < 0.2 * target;
  report("5 first and second moments of the exact statistic", ok,
         "mean_corr=" + fmt(mean1) + " (target " + fmt(target) + "), mean_indep=" + fmt(mean0) +
             ", var_indep=" + fmt(var0) + " (target " + fmt(target) + " within 20%)");
}

// --- 6. bit-exact symmetries -----------------------------------------------

void criterion_symmetries() {
  StatConfig cfg;
  cfg.k = 3;
  cfg.q = 0.3;
  cfg.rho = 0.7;
  cfg.mode = StatMode::exact;
  const auto family = enumerate_free_trees(cfg.k);
  bool ok = true;
  for (int rep = 0; rep < 20; ++rep) {
    const std::uint32_t n = 8 + rep % 3;
    const auto [a, b] = sample_independent_pair(n, cfg.q, RandomStream(600).fold(rep));
    const double base = f_exact(a, b, cfg, family).value;
    if (f_exact(complement(a), complement(b), cfg, family).value != base) ok = false;
    const auto pa = random_permutation(n, RandomStream(601).fold(rep));
    const auto pb = random_permutation(n, RandomStream(602).fold(rep));
    auto apply = [&](const Graph& g, const std::vector<std::uint32_t>& p) {
      std::vector<Edge> e;
      for (const auto& [u, v] : g.edges())
        e.emplace_back(std::min(p[u], p[v]), std::max(p[u], p[v]));
      return Graph(g.n(), std::move(e), g.q());
    };
    if (f_exact(apply(a, pa), apply(b, pb), cfg, family).value != base) ok = false;
  }
  report("6 complement and relabelling leave the exact statistic unchanged, bit for bit", ok,
         "20 random pairs at n=8..10");
}

// --- 7. quadratic scaling of the counting kernel ---------------------------

double time_evaluate(Eigen::Index n, int k, int t) {
  CenteredMatrix m = CenteredMatrix::Zero(n, n);
  const RandomStream stream(700);
  std::uint64_t idx = 0;
  for (Eigen::Index i = 0; i + 1 < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j, ++idx) {
      const double w = 2.0 * stream.uniform(idx) - 1.0;
      m(i, j) = w;
      m(j, i) = w;
    }
  const auto family = enumerate_free_trees(k);
  const auto cols = random_colorings(static_cast<std::uint32_t>(n), k, t, RandomStream(701));
  const DenseHost host(m);
  double best = 1e18;
  for (int run = 0; run < 5; ++run) {
    const double t0 = now_ms();
    ColorfulTreeCounter counter(host, cols, k);
    double sink = 0.0;
    for (const auto& tree : family.trees)
      sink += counter.evaluate(decompose(tree.edges, 0), tree.aut).sum();
    const double elapsed = now_ms() - t0;
    if (sink == 1e300) std::cout << "";  // keep the work observable
    best = std::min(best, elapsed);
  }
  return best;
}

void criterion_scaling() {
  const double small = time_evaluate(350, 4, 40);
  const double large = time_evaluate(700, 4, 40);
  const double ratio = large / small;
  const bool quad_ok = ratio >= 4.0 * 0.7 && ratio <= 4.0 * 1.3;
  // Tree-size growth at fixed n stays within the K 3^K budget shape
  // (generous factor-2 headroom for constants).
  const double k3 = time_evaluate(350, 3, 40);
  const double k5 = time_evaluate(350, 5, 40);
  const double bound = 2.0 * (5.0 * 243.0) / (3.0 * 27.0);
  const bool k_ok = k5 / k3 <= bound;
  report("7 kernel time scales quadratically in n and within the K 3^K budget",
         quad_ok && k_ok,
         "t(700)/t(350)=" + fmt(ratio) + " (need 2.8..5.2), t(K=5)/t(K=3)=" + fmt(k5 / k3) +
             " (need <=" + fmt(bound) + ")");
}

// --- 8. signed vs unsigned on sparse inputs --------------------------------

void criterion_compare() {
  ExperimentConfig cfg;
  cfg.n = 2000;
  cfg.q = 0.002;
  cfg.rho = 0.99;
  cfg.k = 5;
  cfg.t = 200;
  cfg.pairs = 50;
  cfg.seed = 1;
  const auto family = enumerate_free_trees(cfg.k);
  const auto rep = compare_signed_unsigned(cfg, family);
  const bool ok = rep.auc_signed > rep.auc_unsigned &&
                  rep.median_ms_unsigned * 10.0 <= rep.median_ms_signed;
  report("8 centered beats uncentered in power; uncentered is >=10x faster when sparse", ok,
         "auc_centered=" + fmt(rep.auc_signed) + " auc_uncentered=" + fmt(rep.auc_unsigned) +
             " median_ms=" + fmt(rep.median_ms_signed) + "/" + fmt(rep.median_ms_unsigned));
}

// --- 9. byte-identical command-line runs -----------------------------------

std::string run_cli(const std::string& cli, const std::string& args, const std::string& out,
                    unsigned threads) {
  const std::string cmd = "TREECORR_THREADS=" + std::to_string(threads) + " " + cli + " " + args +
                          " > " + out + " 2>/dev/null";
  if (std::system(cmd.c_str()) != 0) return "";
  std::ifstream in(out, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void criterion_determinism(const std::string& cli) {
  const std::string sim =
      "simulate --n 60 --q 0.15 --rho 0.9 --k 3 --t 10 --pairs 8 --seed 7 --no-wall --out -";
  const std::string a = run_cli(cli, sim, "/tmp/treecorr_acc_a.csv", 1);
  const std::string b = run_cli(cli, sim, "/tmp/treecorr_acc_b.csv", 4);
  const std::string c = run_cli(cli, sim, "/tmp/treecorr_acc_c.csv", 2);
  bool ok = !a.empty() && a == b && a == c;
  {
    std::ofstream csv("/tmp/treecorr_acc_in.csv", std::ios::binary);
    csv << a;
  }
  const std::string r1 =
      run_cli(cli, "roc --in /tmp/treecorr_acc_in.csv", "/tmp/treecorr_acc_r1.txt", 1);
  const std::string r2 =
      run_cli(cli, "roc --in /tmp/treecorr_acc_in.csv", "/tmp/treecorr_acc_r2.txt", 3);
  ok = ok && !r1.empty() && r1 == r2;
  const std::string t1 = run_cli(cli, "trees --k 6", "/tmp/treecorr_acc_t1.txt", 1);
  const std::string t2 = run_cli(cli, "trees --k 6", "/tmp/treecorr_acc_t2.txt", 4);
  ok = ok && !t1.empty() && t1 == t2;
  report("9 command-line output is byte-identical across reruns and thread counts", ok,
         "simulate/roc/trees with TREECORR_THREADS in {1,2,3,4}");
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::cerr << "usage: acceptance <path-to-cli>" << std::endl;
    return 2;
  }
  try {
    criterion_power();
    criterion_trees();
    criterion_oracles();
    criterion_unbiased();
    criterion_moments();
    criterion_symmetries();
    criterion_scaling();
    criterion_compare();
    criterion_determinism(argv[1]);
  } catch (const std::exception& e) {
    std::cerr << "acceptance aborted: " << e.what() << std::endl;
    return 99;
  }
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed")
            << std::endl;
  return failures;
}
