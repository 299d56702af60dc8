#pragma once

// Baselines, parameter sweeps, convergence statistics and the analytic
// complexity model.

#include "risopt/channel.hpp"
#include "risopt/estimation.hpp"
#include "risopt/power_control.hpp"

#include <cstdint>
#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

namespace risopt {

/// theta uniform, w_k = h_k / ||h_k||, p = min_power. Infeasible draws are
/// reported with feasible = false and p = p_max.
SolveReport baseline_random_phase_mrt(const ChannelSet &ch,
                                      const SystemConfig &cfg, Rng &rng);

/// G treated as zero, W with normalized complex-Gaussian columns.
SolveReport baseline_no_ris(const ChannelSet &ch, const SystemConfig &cfg,
                            Rng &rng);

enum class ComplexityMethod { RcgJo, Sdr };

/// Dominant-term flop counts with unit constants:
///   RCG-JO: K^2 N^2 M + K^3 + K^2 N^3 + K^2 M^2
///   SDR:    K^2 N^2 M + N^6 + K^6 M^6
/// Throws DomainError unless k, m, n >= 1.
double complexity_estimate(ComplexityMethod method, int k, int m, int n);

enum class Method { RcgJo, RandomPhaseMrt, NoRis, RcgJoEstimatedCsi };
enum class SweepVariable {
  NElements,
  RateMin,
  HorizDistance,
  NoisePower,
  KDevices,
  SampleFraction
};

std::string to_string(Method m);
std::string to_string(SweepVariable v);
/// Throw ConfigError on unknown names.
Method parse_method(const std::string &s);
SweepVariable parse_variable(const std::string &s);

/// Near-square N_x x N_y factorization of N (N_x <= N_y, N_x largest).
std::pair<int, int> ris_grid(int n);

/// Copy of `base` with the sweep variable set to `value`.
SystemConfig apply_variable(const SystemConfig &base, SweepVariable v,
                            double value);

struct SweepSpec {
  SweepVariable variable = SweepVariable::NElements;
  std::vector<double> values{64};
  int realizations = 100;
  std::vector<Method> methods{Method::RcgJo, Method::RandomPhaseMrt,
                              Method::NoRis};
  SystemConfig base;
  JoOptions jo;
  /// Fraction of active elements for the estimated-CSI method, unless the
  /// sweep variable is sample_fraction.
  double sample_fraction = 0.3;
  PilotOptions pilot;
  int jobs = 1;
  /// Directory for data.csv, summary.csv and meta.txt; empty = no files.
  std::filesystem::path out_dir;

  /// Throws ConfigError when a field is out of range.
  void validate() const;
};

/// One method on one channel draw.
struct RunRecord {
  Method method = Method::RcgJo;
  double value = 0.0;
  int realization = 0;
  std::uint64_t seed = 0;
  std::uint64_t channel_hash = 0;
  double total_power = 0.0; // includes the p_max fallback when infeasible
  bool feasible = false;
  int outer_iterations = 0;
  int max_inner_iterations = 0;
  /// Every inner RCG solve stopped on a tolerance rather than the budget.
  bool inner_converged = true;
  std::string error; // non-empty when the run threw
};

struct SummaryRow {
  Method method = Method::RcgJo;
  double value = 0.0;
  int runs = 0;
  int feasible_runs = 0;
  double feasibility_rate = 0.0;
  /// Mean over all runs, infeasible ones counted at their fallback power.
  double mean_power = 0.0;
  double stderr_power = 0.0;
  /// Mean over feasible runs only (NaN when there are none).
  double mean_power_feasible = 0.0;
  double mean_outer = 0.0;
  double mean_inner = 0.0;
};

struct SweepResult {
  std::vector<RunRecord> records; // ordered by (value, realization, method)
  std::vector<SummaryRow> summary;

  const SummaryRow &row(Method m, double value) const;
};

/// Seed used for realization r; shared across values so every value sees
/// the same draw index.
std::uint64_t realization_seed(std::uint64_t base, int realization);

/// Runs every method on the same channel draw per (value, realization).
/// Per-run exceptions are recorded in RunRecord::error; I/O problems throw
/// Error with the offending path.
SweepResult run_sweep(const SweepSpec &spec);

/// Aggregates records per (method, value), preserving first-seen order.
std::vector<SummaryRow> summarize(const std::vector<RunRecord> &records);

void write_data_csv(const std::vector<RunRecord> &records, SweepVariable v,
                    const std::filesystem::path &path);
void write_summary_csv(const std::vector<SummaryRow> &rows, SweepVariable v,
                       const std::filesystem::path &path);

struct CdfPoint {
  int iterations = 0;
  double fraction = 0.0; // share of runs needing <= iterations
};

struct ConvergenceStats {
  std::vector<CdfPoint> outer;
  std::vector<CdfPoint> inner;
  int runs = 0;
  /// Runs in which some inner solve ended on the iteration budget.
  int inner_budget_hits = 0;

  /// Fraction of runs with outer <= n (and, for inner, converged within n).
  double outer_within(int n) const;
  double inner_within(int n) const;

  std::vector<int> outer_counts;
  std::vector<int> inner_counts; // -1 when a solve hit the budget
};

/// Empirical CDFs of outer iterations and of the largest inner RCG count per
/// run. A run whose inner solve was cut by the budget never counts as
/// converged. Throws DomainError on an empty list.
ConvergenceStats convergence_stats(const std::vector<SolveReport> &reports);

void write_cdf_csv(const ConvergenceStats &stats,
                   const std::filesystem::path &path);

/// One CSV row: seed, total power, feasibility, iterations, then p_k and
/// rate slack per device. Writes the header when `header` is true.
void write_report_row(std::ostream &out, const SolveReport &rep,
                      const std::string &label, bool header);

/// Per-iteration trace of every inner solve (solve index, iteration, value,
/// grad norm, alpha, beta, Zoutendijk sum, descent ratio).
void write_trace_csv(const SolveReport &rep, const std::filesystem::path &path);

/// One full rcg_jo solve with its baselines on a single draw, for the CLI.
struct SingleRun {
  std::uint64_t channel_hash = 0;
  SolveReport jo;
  SolveReport random_phase;
  SolveReport no_ris;
};
SingleRun solve_one(const SystemConfig &cfg, const JoOptions &opts,
                    std::uint64_t seed);

} // namespace risopt
