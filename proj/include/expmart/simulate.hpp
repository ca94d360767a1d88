#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "expmart/cumulant.hpp"
#include "expmart/linalg.hpp"
#include "expmart/report.hpp"
#include "expmart/triplet.hpp"

namespace expmart {

struct TimeGrid {
  std::vector<double> nodes;

  static TimeGrid uniform(double T, std::size_t steps);
  static TimeGrid from_nodes(std::vector<double> nodes);

  std::size_t steps() const { return nodes.size() - 1; }
  double end() const { return nodes.back(); }
  /// Index of the node equal to t (relative tolerance 1e-12).
  std::optional<std::size_t> index_of(double t) const;
};

enum class SchemeKind { Gaussian, CompoundPoisson, SmallJumpApproximation };
std::string to_string(SchemeKind k);

struct SimulationOptions {
  double epsilon = 1e-3;
  /// Small-jump variance above which the Gaussian substitution is used.
  double variance_floor = 1e-10;
  /// Ceiling on the jump rate above epsilon, per unit time.
  double max_jump_rate = 1e5;
  int threads = 1;
};

struct SchemeInfo {
  SchemeKind kind = SchemeKind::Gaussian;
  double epsilon = 0.0;
  bool gaussian_small_jumps = false;
  /// Largest per-unit-activity variance of the jumps below epsilon.
  double small_jump_variance = 0.0;
};

struct JumpRecord {
  std::size_t step;
  double time;
  Vec size;
};

/// Per-step increment law of a PIIAC driver on a fixed grid.
class PathGenerator {
 public:
  PathGenerator(const CharacteristicTriplet& tr, TimeGrid grid, const SimulationOptions& opts = {});
  ~PathGenerator();
  PathGenerator(const PathGenerator&) = delete;
  PathGenerator& operator=(const PathGenerator&) = delete;

  int dim() const { return dim_; }
  const TimeGrid& grid() const { return grid_; }
  const SchemeInfo& scheme() const { return scheme_; }

  /// Increments of one path, step-major (steps * dim values).
  void generate(std::uint64_t seed, std::size_t path, double* increments, std::vector<JumpRecord>* jumps) const;

 private:
  struct Impl;
  int dim_;
  TimeGrid grid_;
  SchemeInfo scheme_;
  std::unique_ptr<Impl> impl_;
};

/// Simulated paths, generated on demand from (seed, path index) so that
/// large ensembles need no storage. Coarsened views sum the fine increments
/// of the same underlying paths.
class PathEnsemble {
 public:
  PathEnsemble(std::shared_ptr<const PathGenerator> gen, std::uint64_t seed, std::size_t n_paths,
               std::size_t factor = 1, int threads = 1);

  const TimeGrid& grid() const { return grid_; }
  std::size_t n_paths() const { return n_paths_; }
  std::size_t steps() const { return grid_.steps(); }
  int dim() const { return gen_->dim(); }
  std::uint64_t seed() const { return seed_; }
  const SchemeInfo& scheme() const { return gen_->scheme(); }
  int threads() const { return threads_; }
  const PathGenerator& generator() const { return *gen_; }

  /// Increments of one path on this ensemble's grid (steps * dim values).
  void increments(std::size_t path, std::vector<double>& out, std::vector<JumpRecord>* jumps = nullptr) const;
  /// Terminal values X_T - X_0 of every path.
  std::vector<Vec> terminal_values() const;

  /// Same paths on every factor-th node.
  PathEnsemble coarsen(std::size_t factor) const;
  /// Same paths on a coarser grid whose nodes are all nodes of the generator grid.
  PathEnsemble restrict_to(const TimeGrid& coarse) const;
  PathEnsemble with_threads(int threads) const;

 private:
  std::shared_ptr<const PathGenerator> gen_;
  std::uint64_t seed_;
  std::size_t n_paths_;
  int threads_;
  TimeGrid grid_;
  std::vector<std::size_t> step_of_;  ///< coarse step of each fine step; empty when not coarsened
};

/// Requires PIIAC integrability on the grid's span.
PathEnsemble simulate_piiac(const CharacteristicTriplet& tr, const TimeGrid& grid, std::size_t n_paths,
                            std::uint64_t seed, const SimulationOptions& opts = {});

/// Values of M = exp(lambda . X - K) at the nodes of the cumulant path.
struct MartingalePaths {
  std::vector<double> times;
  std::size_t n_paths = 0;
  std::vector<double> values;  ///< path-major, times.size() per path

  double at(std::size_t path, std::size_t k) const { return values[path * times.size() + k]; }
  std::vector<double> column(std::size_t k) const;
};

MartingalePaths exponential_martingale_paths(const PathEnsemble& ens, const StrategyPath& s, const CumulantPath& K);

struct TestReport {
  std::string quantity;
  double estimate = 0.0;
  double std_error = 0.0;
  double z = 0.0;
  std::size_t n_paths = 0;
  Verdict verdict = Verdict::Indeterminate;
};

struct SampleMean {
  double mean = 0.0;
  double std_error = 0.0;
};

/// Mean and standard error, summed in index order.
SampleMean sample_mean(const std::vector<double>& x);

/// z-test of the sample mean against target; pass iff |z| <= 3. Refuses
/// fewer than 100 samples.
TestReport mean_test(std::string quantity, const std::vector<double>& samples, double target);

TestReport mc_martingale_test(const MartingalePaths& M, double t);

/// quantity,estimate,stderr,z,verdict
std::string csv_row(const TestReport& r);

/// Columnar export: path,step,time,dx_0..dx_{d-1},jumps
void write_ensemble_csv(std::ostream& os, const PathEnsemble& ens, std::size_t max_paths);

}  // namespace expmart
