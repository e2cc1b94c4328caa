#pragma once

#include <algorithm>
#include <atomic>
#include <cinttypes>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <ostream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "treecorr/graph.hpp"
#include "treecorr/statistic.hpp"
#include "treecorr/trees.hpp"

namespace treecorr {

struct ExperimentConfig {
  std::uint32_t n = 100;
  double q = 0.1;
  double rho = 0.9;
  int k = 4;
  int t = 0;  // 0 = ceil(1/r)
  int pairs = 50;  // per hypothesis
  std::uint64_t seed = 0;
  double c = 0.5;
  StatMode mode = StatMode::signed_cc;
  bool emit_wall = true;  // false prints wall_ms as 0 for byte-stable output

  StatConfig stat_config() const {
    StatConfig cfg;
    cfg.k = k;
    cfg.q = q;
    cfg.rho = rho;
    cfg.t = t;
    cfg.c = c;
    cfg.mode = mode;
    return cfg;
  }

  void validate() const {
    if (pairs < 1) throw std::invalid_argument("pairs must be at least 1");
    stat_config().validate();
    check_sample_params(n, q, rho);
  }
};

struct TestRun {
  std::uint32_t pair_id = 0;
  bool alternative = false;  // false: H0 (independent), true: H1 (correlated)
  double statistic = 0.0;
  double threshold = 0.0;
  bool decided_correlated = false;
  double wall_ms = 0.0;
};

inline unsigned worker_count(std::size_t tasks) {
  unsigned workers = std::thread::hardware_concurrency();
  if (workers == 0) workers = 1;
  if (const char* env = std::getenv("TREECORR_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v >= 1) workers = static_cast<unsigned>(v);
  }
  return static_cast<unsigned>(std::min<std::size_t>(workers, std::max<std::size_t>(tasks, 1)));
}

namespace harness_detail {

// Runs fn(index) for index in [0, tasks) on a small worker pool. Each task
// must be independent; results keyed by index stay schedule-independent.
template <typename Fn>
void parallel_for(std::size_t tasks, Fn&& fn) {
  const unsigned workers = worker_count(tasks);
  if (workers <= 1) {
    for (std::size_t i = 0; i < tasks; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w)
    pool.emplace_back([&]() {
      for (std::size_t i = next.fetch_add(1); i < tasks; i = next.fetch_add(1)) fn(i);
    });
  for (auto& th : pool) th.join();
}

inline RandomStream pair_stream(std::uint64_t seed, std::uint32_t pair_id, bool alternative) {
  return RandomStream(seed).fold(alternative ? 1 : 0).fold(pair_id);
}

inline double median(std::vector<double> values) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const std::size_t mid = values.size() / 2;
  return values.size() % 2 == 1 ? values[mid] : 0.5 * (values[mid - 1] + values[mid]);
}

}  // namespace harness_detail

// Runs `pairs` tests under each hypothesis; rows are ordered null block then
// alternative block, pair ids ascending, independent of worker count.
inline std::vector<TestRun> run_experiment(const ExperimentConfig& cfg,
                                           const TreeFamily& family) {
  cfg.validate();
  const std::size_t tasks = 2 * static_cast<std::size_t>(cfg.pairs);
  std::vector<TestRun> rows(tasks);
  const StatConfig stat_cfg = cfg.stat_config();
  harness_detail::parallel_for(tasks, [&](std::size_t idx) {
    const bool alternative = idx >= static_cast<std::size_t>(cfg.pairs);
    const auto pair_id = static_cast<std::uint32_t>(idx % cfg.pairs);
    const RandomStream stream = harness_detail::pair_stream(cfg.seed, pair_id, alternative);
    StatResult result;
    if (alternative) {
      const auto pair = sample_correlated_pair(cfg.n, cfg.q, cfg.rho, stream.fold(10));
      result = evaluate_statistic(pair.a, pair.b, stat_cfg, family, stream.fold(20));
    } else {
      const auto [a, b] = sample_independent_pair(cfg.n, cfg.q, stream.fold(10));
      result = evaluate_statistic(a, b, stat_cfg, family, stream.fold(20));
    }
    rows[idx] = TestRun{pair_id, alternative, result.value, result.threshold,
                        result.correlated, result.wall_ms};
  });
  return rows;
}

// CSV schema (bit-exact): header and one row per test, floats with 17
// significant digits.
inline void write_csv(std::ostream& out, const std::vector<TestRun>& rows,
                      bool emit_wall = true) {
  out << "pair_id,hypothesis,statistic,threshold,decision,wall_ms\n";
  char buf[96];
  for (const auto& row : rows) {
    std::snprintf(buf, sizeof(buf), "%" PRIu32 ",%s,%.17g,%.17g,%s,%.17g\n", row.pair_id,
                  row.alternative ? "alt" : "null", row.statistic, row.threshold,
                  row.decided_correlated ? "correlated" : "independent",
                  emit_wall ? row.wall_ms : 0.0);
    out << buf;
  }
}

struct ErrorRates {
  double type1 = 0.0;  // null pairs declared correlated
  double type2 = 0.0;  // alternative pairs declared independent
  double total() const { return type1 + type2; }
};

inline ErrorRates error_rates(const std::vector<TestRun>& rows) {
  std::size_t n0 = 0, n1 = 0, fp = 0, fn = 0;
  for (const auto& row : rows) {
    if (row.alternative) {
      ++n1;
      if (!row.decided_correlated) ++fn;
    } else {
      ++n0;
      if (row.decided_correlated) ++fp;
    }
  }
  ErrorRates e;
  if (n0 > 0) e.type1 = static_cast<double>(fp) / static_cast<double>(n0);
  if (n1 > 0) e.type2 = static_cast<double>(fn) / static_cast<double>(n1);
  return e;
}

struct RocCurve {
  std::vector<std::pair<double, double>> points;  // (FPR, TPR) as threshold sweeps down
  double auc = 0.0;
};

// ROC curve over every distinct observed score plus the +/- infinity
// endpoints; AUC by trapezoid, cross-checked against the Mann-Whitney U
// estimate with ties half-counted.
inline RocCurve roc_auc(const std::vector<double>& null_scores,
                        const std::vector<double>& alt_scores) {
  if (null_scores.empty() || alt_scores.empty())
    throw std::invalid_argument("roc_auc: both score lists must be nonempty");
  std::vector<double> thresholds;
  thresholds.reserve(null_scores.size() + alt_scores.size());
  thresholds.insert(thresholds.end(), null_scores.begin(), null_scores.end());
  thresholds.insert(thresholds.end(), alt_scores.begin(), alt_scores.end());
  std::sort(thresholds.begin(), thresholds.end(), std::greater<>());
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());

  RocCurve curve;
  curve.points.emplace_back(0.0, 0.0);  // tau = +infinity
  const double n0 = static_cast<double>(null_scores.size());
  const double n1 = static_cast<double>(alt_scores.size());
  for (double tau : thresholds) {
    const auto fp = std::count_if(null_scores.begin(), null_scores.end(),
                                  [&](double s) { return s >= tau; });
    const auto tp = std::count_if(alt_scores.begin(), alt_scores.end(),
                                  [&](double s) { return s >= tau; });
    curve.points.emplace_back(static_cast<double>(fp) / n0, static_cast<double>(tp) / n1);
  }
  curve.points.emplace_back(1.0, 1.0);  // tau = -infinity

  double trapezoid = 0.0;
  for (std::size_t i = 1; i < curve.points.size(); ++i) {
    const auto& [x0, y0] = curve.points[i - 1];
    const auto& [x1, y1] = curve.points[i];
    trapezoid += (x1 - x0) * (y0 + y1) / 2.0;
  }
  double wins = 0.0;
  for (double s1 : alt_scores)
    for (double s0 : null_scores) {
      if (s1 > s0)
        wins += 1.0;
      else if (s1 == s0)
        wins += 0.5;
    }
  const double mann_whitney = wins / (n0 * n1);
  if (std::abs(trapezoid - mann_whitney) > 1e-9)
    throw std::logic_error("roc_auc: trapezoid and Mann-Whitney AUC disagree");
  curve.auc = trapezoid;
  return curve;
}

inline RocCurve roc_from_runs(const std::vector<TestRun>& rows) {
  std::vector<double> null_scores, alt_scores;
  for (const auto& row : rows)
    (row.alternative ? alt_scores : null_scores).push_back(row.statistic);
  return roc_auc(null_scores, alt_scores);
}

struct SweepCell {
  std::string parameter;
  double value = 0.0;
  std::vector<TestRun> rows;
  RocCurve roc;
  ErrorRates errors;
};

// Cross-product run over one parameter axis (rho, q, or k).
inline std::vector<SweepCell> sweep(const std::string& parameter,
                                    const std::vector<double>& values,
                                    const ExperimentConfig& base) {
  std::vector<SweepCell> cells;
  cells.reserve(values.size());
  for (double value : values) {
    ExperimentConfig cfg = base;
    if (parameter == "rho")
      cfg.rho = value;
    else if (parameter == "q")
      cfg.q = value;
    else if (parameter == "k")
      cfg.k = static_cast<int>(value);
    else
      throw std::invalid_argument("sweep: parameter must be rho, q, or k");
    const TreeFamily family = enumerate_free_trees(cfg.k);
    SweepCell cell;
    cell.parameter = parameter;
    cell.value = value;
    cell.rows = run_experiment(cfg, family);
    cell.roc = roc_from_runs(cell.rows);
    cell.errors = error_rates(cell.rows);
    cells.push_back(std::move(cell));
  }
  return cells;
}

struct CompareReport {
  double auc_signed = 0.0;
  double auc_unsigned = 0.0;
  double median_ms_signed = 0.0;
  double median_ms_unsigned = 0.0;
  std::vector<TestRun> signed_rows;
  std::vector<TestRun> unsigned_rows;
};

// Runs the signed (Y_T) and unsigned (Z_T) statistics on identical pairs and
// identical colorings, reporting AUCs and median per-pair wall times.
inline CompareReport compare_signed_unsigned(const ExperimentConfig& base,
                                             const TreeFamily& family) {
  ExperimentConfig cfg = base;
  cfg.validate();
  const std::size_t tasks = 2 * static_cast<std::size_t>(cfg.pairs);
  CompareReport report;
  report.signed_rows.resize(tasks);
  report.unsigned_rows.resize(tasks);
  StatConfig signed_cfg = cfg.stat_config();
  signed_cfg.mode = StatMode::signed_cc;
  StatConfig unsigned_cfg = cfg.stat_config();
  unsigned_cfg.mode = StatMode::unsigned_cc;
  harness_detail::parallel_for(tasks, [&](std::size_t idx) {
    const bool alternative = idx >= static_cast<std::size_t>(cfg.pairs);
    const auto pair_id = static_cast<std::uint32_t>(idx % cfg.pairs);
    const RandomStream stream = harness_detail::pair_stream(cfg.seed, pair_id, alternative);
    Graph a(1, {}, cfg.q), b(1, {}, cfg.q);
    if (alternative) {
      auto pair = sample_correlated_pair(cfg.n, cfg.q, cfg.rho, stream.fold(10));
      a = std::move(pair.a);
      b = std::move(pair.b);
    } else {
      auto pair = sample_independent_pair(cfg.n, cfg.q, stream.fold(10));
      a = std::move(pair.first);
      b = std::move(pair.second);
    }
    const StatResult ys = f_tilde(a, b, signed_cfg, family, stream.fold(20));
    const StatResult zs = z_stat(a, b, unsigned_cfg, family, stream.fold(20));
    report.signed_rows[idx] =
        TestRun{pair_id, alternative, ys.value, ys.threshold, ys.correlated, ys.wall_ms};
    report.unsigned_rows[idx] =
        TestRun{pair_id, alternative, zs.value, zs.threshold, zs.correlated, zs.wall_ms};
  });
  report.auc_signed = roc_from_runs(report.signed_rows).auc;
  report.auc_unsigned = roc_from_runs(report.unsigned_rows).auc;
  std::vector<double> ms_signed, ms_unsigned;
  for (const auto& row : report.signed_rows) ms_signed.push_back(row.wall_ms);
  for (const auto& row : report.unsigned_rows) ms_unsigned.push_back(row.wall_ms);
  report.median_ms_signed = harness_detail::median(std::move(ms_signed));
  report.median_ms_unsigned = harness_detail::median(std::move(ms_unsigned));
  return report;
}

}  // namespace treecorr
