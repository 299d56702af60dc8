// risopt: command-line front end for sweeps, single solves, estimated-CSI
// runs, the complexity table and convergence CDFs.
//
// Exit codes: 0 success, 1 configuration error, 2 runtime failure.

#include "risopt/config.hpp"
#include "risopt/experiments.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>

using namespace risopt;

namespace {

struct Common {
  std::string config;
  long long seed = -1;
  std::string out;
  int realizations = -1;
  int jobs = 1;
};

void add_common(CLI::App *cmd, Common &c) {
  cmd->add_option("--config", c.config, "key = value configuration file");
  cmd->add_option("--seed", c.seed, "base RNG seed (overrides the config)");
  cmd->add_option("--out", c.out, "output directory");
  cmd->add_option("--realizations", c.realizations,
                  "channel realizations per value");
  cmd->add_option("--jobs", c.jobs, "worker threads")->check(CLI::PositiveNumber);
}

SweepSpec load(const Common &c, SweepSpec spec = {}) {
  if (!c.config.empty())
    apply_config_file(c.config, spec);
  if (c.seed >= 0)
    spec.base.rng_seed = static_cast<std::uint64_t>(c.seed);
  if (c.realizations > 0)
    spec.realizations = c.realizations;
  else if (c.realizations == 0)
    throw ConfigError("--realizations must be >= 1");
  spec.jobs = c.jobs;
  if (!c.out.empty())
    spec.out_dir = c.out;
  return spec;
}

void print_summary(const SweepResult &res) {
  std::cout << std::left << std::setw(22) << "method" << std::setw(10)
            << "value" << std::setw(14) << "mean_power_w" << std::setw(12)
            << "stderr" << std::setw(10) << "feasible" << "outer/inner\n";
  for (const auto &r : res.summary)
    std::cout << std::left << std::setw(22) << to_string(r.method)
              << std::setw(10) << r.value << std::setw(14) << r.mean_power
              << std::setw(12) << r.stderr_power << std::setw(10)
              << r.feasibility_rate << r.mean_outer << " / " << r.mean_inner
              << '\n';
}

int cmd_sweep(const Common &c) {
  SweepSpec spec = load(c);
  print_summary(run_sweep(spec));
  return 0;
}

int cmd_solve_one(const Common &c) {
  SweepSpec spec = load(c);
  const SingleRun run = solve_one(spec.base, spec.jo, spec.base.rng_seed);
  std::cout << "channel_hash " << std::hex << run.channel_hash << std::dec
            << '\n';
  write_report_row(std::cout, run.jo, "rcg_jo", true);
  write_report_row(std::cout, run.random_phase, "random_phase_mrt", false);
  write_report_row(std::cout, run.no_ris, "no_ris", false);
  if (!spec.out_dir.empty()) {
    std::filesystem::create_directories(spec.out_dir);
    std::ofstream f(spec.out_dir / "report.csv");
    if (!f)
      throw Error("cannot write '" + (spec.out_dir / "report.csv").string() +
                  "'");
    write_report_row(f, run.jo, "rcg_jo", true);
    write_report_row(f, run.random_phase, "random_phase_mrt", false);
    write_report_row(f, run.no_ris, "no_ris", false);
    write_trace_csv(run.jo, spec.out_dir / "trace.csv");
  }
  return 0;
}

int cmd_estimate_csi(const Common &c) {
  SweepSpec spec;
  spec.variable = SweepVariable::SampleFraction;
  spec.values = {0.1, 0.2, 0.3, 0.5, 1.0};
  spec.methods = {Method::RcgJo, Method::RcgJoEstimatedCsi};
  spec.base.n_x = 10;
  spec.base.n_y = 10;
  spec.realizations = 50;
  spec = load(c, spec);
  if (spec.variable != SweepVariable::SampleFraction)
    throw ConfigError("estimate-csi sweeps sample_fraction only");
  print_summary(run_sweep(spec));
  return 0;
}

int cmd_complexity(const std::vector<int> &ns, int k, int m) {
  std::cout << "N,rcg_jo_flops,sdr_flops\n";
  for (int n : ns) {
    char a[32], b[32];
    std::snprintf(a, sizeof a, "%.3g",
                  complexity_estimate(ComplexityMethod::RcgJo, k, m, n));
    std::snprintf(b, sizeof b, "%.3g",
                  complexity_estimate(ComplexityMethod::Sdr, k, m, n));
    std::cout << n << ',' << a << ',' << b << '\n';
  }
  return 0;
}

int cmd_convergence(const Common &c) {
  SweepSpec spec = load(c);
  if (c.realizations < 0)
    spec.realizations = 200;
  spec.variable = SweepVariable::NElements;
  spec.values = {static_cast<double>(spec.base.n_elements())};
  spec.methods = {Method::RcgJo};
  std::vector<SolveReport> reports(spec.realizations);
  // the sweep records only counts, so solve directly to keep the traces
  for (int r = 0; r < spec.realizations; ++r) {
    SystemConfig cfg = spec.base;
    cfg.rng_seed = realization_seed(spec.base.rng_seed, r);
    reports[r] = solve_one(cfg, spec.jo, cfg.rng_seed).jo;
  }
  const ConvergenceStats st = convergence_stats(reports);
  std::cout << "runs " << st.runs << "\nouter<=15 " << st.outer_within(15)
            << "\nouter<=30 " << st.outer_within(30) << "\ninner<=30 "
            << st.inner_within(30) << "\ninner<=60 " << st.inner_within(60)
            << "\ninner solves cut by the budget in " << st.inner_budget_hits
            << " runs\n";
  if (!spec.out_dir.empty()) {
    std::filesystem::create_directories(spec.out_dir);
    write_cdf_csv(st, spec.out_dir / "cdf.csv");
  }
  return 0;
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"RIS-aided uplink power minimization"};
  app.require_subcommand(1);

  Common sweep_opts, one_opts, est_opts, conv_opts;
  auto *sweep = app.add_subcommand("sweep", "parameter sweep over a variable");
  add_common(sweep, sweep_opts);
  auto *one = app.add_subcommand("solve-one", "one draw, RCG-JO and baselines");
  add_common(one, one_opts);
  auto *est = app.add_subcommand("estimate-csi",
                                 "genie vs estimated CSI over sample fractions");
  add_common(est, est_opts);
  auto *conv = app.add_subcommand("convergence", "iteration-count CDFs");
  add_common(conv, conv_opts);
  auto *cx = app.add_subcommand("complexity", "analytic flop counts");
  std::vector<int> ns{4, 16, 32, 64};
  int k = 1, m = 4;
  cx->add_option("--n", ns, "numbers of RIS elements");
  cx->add_option("-k", k, "devices")->check(CLI::PositiveNumber);
  cx->add_option("-m", m, "BS antennas")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    if (*sweep)
      return cmd_sweep(sweep_opts);
    if (*one)
      return cmd_solve_one(one_opts);
    if (*est)
      return cmd_estimate_csi(est_opts);
    if (*conv)
      return cmd_convergence(conv_opts);
    if (*cx)
      return cmd_complexity(ns, k, m);
  } catch (const ConfigError &e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
