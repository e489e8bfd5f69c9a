#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Dense>

#include "faft/core.hpp"
#include "faft/dgp.hpp"
#include "faft/errors.hpp"
#include "faft/forecast.hpp"
#include "faft/pca.hpp"
#include "faft/rng.hpp"
#include "faft/stats.hpp"

namespace faft {

struct TestSpec {
  TestId id = TestId::g1;
  bool adjusted = false;

  std::string name() const {
    return std::string(test_name(id)) + (adjusted ? "adj" : "");
  }
};

/// Parse "g1", "g2adj", ... into a TestSpec.
inline TestSpec parse_test_spec(const std::string& s) {
  TestSpec spec;
  std::string base = s;
  if (base.size() > 3 && base.substr(base.size() - 3) == "adj") {
    spec.adjusted = true;
    base = base.substr(0, base.size() - 3);
  }
  if (base == "g1") spec.id = TestId::g1;
  else if (base == "g2") spec.id = TestId::g2;
  else if (base == "g3") spec.id = TestId::g3;
  else if (base == "g4") spec.id = TestId::g4;
  else throw ValidationError("unknown test name '" + s + "'");
  if (spec.adjusted && spec.id == TestId::g1)
    throw ValidationError("g1 has no power-adjusted variant");
  return spec;
}

struct TuningPoint {
  std::string label;
  SplitConfig cfg;
};

struct RSelection {
  bool use_icp1 = false;
  int r = 3;       ///< fixed factor count when use_icp1 is false
  int r_max = 10;  ///< search bound for IC_p1
};

/// One size/power experiment: a DGP template crossed with a beta grid, a
/// tuning grid and a test battery, evaluated over R replications on common
/// random numbers.
struct ExperimentSpec {
  DgpConfig dgp;
  std::vector<Eigen::VectorXd> beta_grid;  ///< each of length dgp.r
  std::vector<TestSpec> tests;
  std::vector<TuningPoint> tunings;
  int replications = 500;
  double nominal_level = 0.05;
  bool feasible = true;  ///< PC-estimated factors; false = observed factors
  RSelection r_selection;

  void validate() const {
    dgp.validate();
    if (beta_grid.empty()) throw ValidationError("experiment: empty beta grid");
    for (const auto& b : beta_grid)
      if (b.size() != dgp.r)
        throw ValidationError("experiment: beta entries must have length r");
    if (tests.empty()) throw ValidationError("experiment: no tests requested");
    if (tunings.empty()) throw ValidationError("experiment: no tunings given");
    for (const auto& tp : tunings) {
      tp.cfg.validate();
      if (tp.cfg.pi0 != tunings.front().cfg.pi0)
        throw ValidationError("experiment: all tunings must share pi0 "
                              "(streams are computed once per replication)");
    }
    if (replications < 1) throw ValidationError("experiment: replications >= 1");
    if (!(nominal_level > 0.0 && nominal_level < 0.5))
      throw ValidationError("experiment: nominal_level must be in (0, 0.5)");
    if (!r_selection.use_icp1 && r_selection.r < 1)
      throw ValidationError("experiment: fixed r must be >= 1");
    if (r_selection.use_icp1 && r_selection.r_max < 1)
      throw ValidationError("experiment: r_max must be >= 1");
  }
};

struct RejectionCell {
  TestSpec test;
  std::string tuning_label;
  int beta_index = 0;
  double beta_j = 0.0;  ///< first entry of the beta vector (grid coordinate)
  long rejections = 0;
  long failures = 0;
  int replications = 0;

  int effective() const { return replications - static_cast<int>(failures); }
  double frequency() const {
    return effective() > 0 ? static_cast<double>(rejections) / effective() : 0.0;
  }
  double mc_stderr() const {
    if (effective() <= 0) return 0.0;
    const double p = frequency();
    return std::sqrt(p * (1.0 - p) / effective());
  }
  /// Cells with more than 1% failed replications are not trustworthy.
  bool valid() const {
    return failures <= static_cast<long>(0.01 * replications);
  }
};

struct RejectionTable {
  std::vector<RejectionCell> cells;
  double nominal_level = 0.05;

  bool all_valid() const {
    for (const auto& c : cells)
      if (!c.valid()) return false;
    return true;
  }

  const RejectionCell* find(const std::string& test_name_in,
                            const std::string& tuning_label,
                            int beta_index) const {
    for (const auto& c : cells)
      if (c.test.name() == test_name_in && c.tuning_label == tuning_label &&
          c.beta_index == beta_index)
        return &c;
    return nullptr;
  }

  std::string to_csv() const {
    std::ostringstream os;
    os << "test,adjusted,beta,tuning,rejection,stderr,failures,replications,valid\n";
    os << std::setprecision(17);
    for (const auto& c : cells)
      os << test_name(c.test.id) << ',' << (c.test.adjusted ? 1 : 0) << ','
         << c.beta_j << ',' << c.tuning_label << ',' << c.frequency() << ','
         << c.mc_stderr() << ',' << c.failures << ',' << c.replications << ','
         << (c.valid() ? 1 : 0) << '\n';
    return os.str();
  }

  /// Rejection frequencies laid out like the published tables: one block per
  /// test, beta down the rows, tunings across the columns.
  std::string to_text() const {
    std::ostringstream os;
    std::vector<std::string> tests_seen, tunings_seen;
    std::vector<int> betas_seen;
    for (const auto& c : cells) {
      if (std::find(tests_seen.begin(), tests_seen.end(), c.test.name()) ==
          tests_seen.end())
        tests_seen.push_back(c.test.name());
      if (std::find(tunings_seen.begin(), tunings_seen.end(), c.tuning_label) ==
          tunings_seen.end())
        tunings_seen.push_back(c.tuning_label);
      if (std::find(betas_seen.begin(), betas_seen.end(), c.beta_index) ==
          betas_seen.end())
        betas_seen.push_back(c.beta_index);
    }
    os << std::fixed << std::setprecision(3);
    for (const auto& tn : tests_seen) {
      os << tn << "  (nominal " << nominal_level << ")\n";
      os << std::setw(12) << "beta_j";
      for (const auto& tl : tunings_seen) os << std::setw(18) << tl;
      os << '\n';
      for (int bi : betas_seen) {
        const RejectionCell* first = nullptr;
        for (const auto& tl : tunings_seen) {
          const RejectionCell* c = find(tn, tl, bi);
          if (c && !first) first = c;
        }
        if (!first) continue;
        os << std::setw(12) << first->beta_j;
        for (const auto& tl : tunings_seen) {
          const RejectionCell* c = find(tn, tl, bi);
          if (!c) {
            os << std::setw(18) << "-";
          } else {
            std::ostringstream cell;
            cell << std::fixed << std::setprecision(3) << c->frequency();
            if (!c->valid()) cell << "!";
            os << std::setw(18) << cell.str();
          }
        }
        os << '\n';
      }
      os << '\n';
    }
    return os.str();
  }
};

namespace detail {

/// Per-cell outcome codes within one replication.
enum : unsigned char { kNoReject = 0, kReject = 1, kCellFailed = 2 };

struct ReplicationOutcome {
  std::vector<unsigned char> cell;  // tunings x tests, flattened
  bool failed = false;              // the whole replication failed upstream
};

}  // namespace detail

/// Runs the experiment. Replications are distributed over worker threads,
/// each replication is seeded by hash(seed, beta index, replication index),
/// and aggregation order is fixed, so the output table does not depend on
/// the thread count.
inline RejectionTable run_experiment(const ExperimentSpec& spec, int n_threads = 0) {
  spec.validate();
  if (n_threads <= 0)
    n_threads = std::max(1u, std::thread::hardware_concurrency());

  const int n_beta = static_cast<int>(spec.beta_grid.size());
  const int n_tune = static_cast<int>(spec.tunings.size());
  const int n_test = static_cast<int>(spec.tests.size());
  const int per_rep = n_tune * n_test;
  const long n_tasks = static_cast<long>(n_beta) * spec.replications;

  std::vector<detail::ReplicationOutcome> outcomes(n_tasks);
  std::atomic<long> next_task{0};

  auto worker = [&]() {
    for (;;) {
      const long task = next_task.fetch_add(1);
      if (task >= n_tasks) return;
      const int bi = static_cast<int>(task / spec.replications);
      const int rep = static_cast<int>(task % spec.replications);
      detail::ReplicationOutcome& out = outcomes[task];
      out.cell.assign(per_rep, detail::kNoReject);
      try {
        DgpConfig cfg = spec.dgp;
        cfg.beta = spec.beta_grid[bi];
        cfg.seed = replication_key(spec.dgp.seed, bi, rep);
        const SimulatedDataset ds = generate_dataset(cfg);
        const SplitIndices split =
            compute_split_indices(ds.panel.T(), spec.tunings.front().cfg);
        int r = spec.r_selection.r;
        if (spec.r_selection.use_icp1)
          r = select_num_factors_icp1(ds.panel.X.topRows(split.k0),
                                      spec.r_selection.r_max);
        ForecastOptions fopt;
        fopt.feasible = spec.feasible;
        const ForecastErrorStreams streams = recursive_forecast_errors(
            ds.panel, split, r, spec.feasible ? nullptr : &ds.F_true, fopt);
        for (int ti = 0; ti < n_tune; ++ti) {
          // Streams share pi0 across tunings; per-tuning indices re-derived.
          ForecastErrorStreams local = streams;
          local.split = compute_split_indices(ds.panel.T(), spec.tunings[ti].cfg);
          for (int si = 0; si < n_test; ++si) {
            try {
              const TestResult res =
                  run_test(spec.tests[si].id, local, spec.tunings[ti].cfg,
                           spec.feasible);
              const double p = spec.tests[si].adjusted
                                   ? res.p_value_adjusted.value()
                                   : res.p_value;
              out.cell[ti * n_test + si] =
                  (p < spec.nominal_level) ? detail::kReject : detail::kNoReject;
            } catch (const NumericError&) {
              out.cell[ti * n_test + si] = detail::kCellFailed;
            }
          }
        }
      } catch (const NumericError&) {
        out.failed = true;
      }
    }
  };

  std::vector<std::thread> pool;
  for (int i = 1; i < n_threads; ++i) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  RejectionTable table;
  table.nominal_level = spec.nominal_level;
  table.cells.reserve(static_cast<std::size_t>(n_beta) * per_rep);
  for (int si = 0; si < n_test; ++si)
    for (int ti = 0; ti < n_tune; ++ti)
      for (int bi = 0; bi < n_beta; ++bi) {
        RejectionCell cell;
        cell.test = spec.tests[si];
        cell.tuning_label = spec.tunings[ti].label;
        cell.beta_index = bi;
        cell.beta_j = spec.beta_grid[bi].size() > 0 ? spec.beta_grid[bi][0] : 0.0;
        cell.replications = spec.replications;
        for (int rep = 0; rep < spec.replications; ++rep) {
          const auto& out = outcomes[static_cast<long>(bi) * spec.replications + rep];
          if (out.failed || out.cell[ti * n_test + si] == detail::kCellFailed)
            ++cell.failures;
          else if (out.cell[ti * n_test + si] == detail::kReject)
            ++cell.rejections;
        }
        table.cells.push_back(std::move(cell));
      }
  return table;
}

}  // namespace faft
