#include "risopt/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

namespace risopt {

namespace {

SolveReport report_for(const ChannelSet &ch, const SystemConfig &cfg,
                       ProductPoint point, std::uint64_t seed) {
  SolveReport rep;
  rep.seed = seed;
  rep.point = std::move(point);
  try {
    rep.powers = min_power(ch, rep.point.theta, rep.point.w, cfg);
    rep.feasible = true;
  } catch (const InfeasibleError &) {
    rep.powers = PowerVector::Constant(ch.k_devices(), cfg.p_max);
    rep.feasible = false;
  }
  finalize_report(rep, ch, cfg);
  return rep;
}

// splitmix64 finalizer
std::uint64_t mix(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

} // namespace

SolveReport baseline_random_phase_mrt(const ChannelSet &ch,
                                      const SystemConfig &cfg, Rng &rng) {
  ch.validate();
  std::uniform_real_distribution<double> phase(0.0, 2.0 * M_PI);
  CVector theta(ch.n_elements());
  for (Eigen::Index i = 0; i < theta.size(); ++i)
    theta(i) = std::polar(1.0, phase(rng));
  CMatrix w = mrt_beams(ch, theta);
  return report_for(ch, cfg, ProductPoint{std::move(theta), std::move(w)},
                    cfg.rng_seed);
}

SolveReport baseline_no_ris(const ChannelSet &ch, const SystemConfig &cfg,
                            Rng &rng) {
  ch.validate();
  const ChannelSet bare = without_ris(ch);
  ProductPoint x = random_point(ch.n_elements(), ch.m_antennas(),
                                ch.k_devices(), rng);
  return report_for(bare, cfg, std::move(x), cfg.rng_seed);
}

double complexity_estimate(ComplexityMethod method, int k, int m, int n) {
  if (k < 1 || m < 1 || n < 1)
    throw DomainError("complexity_estimate: K, M, N must be >= 1");
  const double K = k, M = m, N = n;
  if (method == ComplexityMethod::RcgJo)
    return K * K * N * N * M + K * K * K + K * K * N * N * N + K * K * M * M;
  return K * K * N * N * M + std::pow(N, 6) + std::pow(K, 6) * std::pow(M, 6);
}

std::string to_string(Method m) {
  switch (m) {
  case Method::RcgJo:
    return "rcg_jo";
  case Method::RandomPhaseMrt:
    return "random_phase_mrt";
  case Method::NoRis:
    return "no_ris";
  case Method::RcgJoEstimatedCsi:
    return "rcg_jo_estimated_csi";
  }
  return "unknown";
}

std::string to_string(SweepVariable v) {
  switch (v) {
  case SweepVariable::NElements:
    return "n_elements";
  case SweepVariable::RateMin:
    return "rate_min";
  case SweepVariable::HorizDistance:
    return "horiz_distance";
  case SweepVariable::NoisePower:
    return "noise_power";
  case SweepVariable::KDevices:
    return "k_devices";
  case SweepVariable::SampleFraction:
    return "sample_fraction";
  }
  return "unknown";
}

Method parse_method(const std::string &s) {
  for (Method m : {Method::RcgJo, Method::RandomPhaseMrt, Method::NoRis,
                   Method::RcgJoEstimatedCsi})
    if (to_string(m) == s)
      return m;
  throw ConfigError("unknown method '" + s + "'");
}

SweepVariable parse_variable(const std::string &s) {
  for (SweepVariable v :
       {SweepVariable::NElements, SweepVariable::RateMin,
        SweepVariable::HorizDistance, SweepVariable::NoisePower,
        SweepVariable::KDevices, SweepVariable::SampleFraction})
    if (to_string(v) == s)
      return v;
  throw ConfigError("unknown sweep variable '" + s + "'");
}

std::pair<int, int> ris_grid(int n) {
  if (n < 1)
    throw ConfigError("ris_grid: N must be >= 1");
  int nx = static_cast<int>(std::sqrt(static_cast<double>(n)));
  while (nx > 1 && n % nx != 0)
    --nx;
  return {nx, n / nx};
}

SystemConfig apply_variable(const SystemConfig &base, SweepVariable v,
                            double value) {
  SystemConfig c = base;
  auto as_count = [&](const char *what) {
    if (!(value >= 1.0) || value != std::floor(value))
      throw ConfigError(std::string(what) + " must be a positive integer");
    return static_cast<int>(value);
  };
  switch (v) {
  case SweepVariable::NElements: {
    auto [nx, ny] = ris_grid(as_count("n_elements"));
    c.n_x = nx;
    c.n_y = ny;
    break;
  }
  case SweepVariable::RateMin:
    c.rate_min = value;
    break;
  case SweepVariable::HorizDistance:
    c.horiz_distance = value;
    break;
  case SweepVariable::NoisePower:
    c.noise_power = value;
    break;
  case SweepVariable::KDevices:
    c.k_devices = as_count("k_devices");
    break;
  case SweepVariable::SampleFraction:
    break; // read by the estimated-CSI method
  }
  c.validate();
  return c;
}

void SweepSpec::validate() const {
  if (values.empty())
    throw ConfigError("sweep: no values given");
  if (realizations < 1)
    throw ConfigError("sweep: realizations must be >= 1");
  if (methods.empty())
    throw ConfigError("sweep: no methods given");
  if (jobs < 1)
    throw ConfigError("sweep: jobs must be >= 1");
  if (!(sample_fraction > 0.0 && sample_fraction <= 1.0))
    throw ConfigError("sweep: sample_fraction must lie in (0, 1]");
  for (double v : values) {
    if (variable == SweepVariable::SampleFraction) {
      if (!(v > 0.0 && v <= 1.0))
        throw ConfigError("sweep: sample_fraction values must lie in (0, 1]");
    } else {
      apply_variable(base, variable, v);
    }
  }
}

const SummaryRow &SweepResult::row(Method m, double value) const {
  for (const auto &r : summary)
    if (r.method == m && r.value == value)
      return r;
  throw DomainError("SweepResult: no row for " + to_string(m));
}

std::uint64_t realization_seed(std::uint64_t base, int realization) {
  return mix(base ^ mix(static_cast<std::uint64_t>(realization) + 1));
}

namespace {

RunRecord make_record(Method m, double value, int r, std::uint64_t seed,
                      std::uint64_t hash, const SolveReport &rep) {
  RunRecord rec;
  rec.method = m;
  rec.value = value;
  rec.realization = r;
  rec.seed = seed;
  rec.channel_hash = hash;
  rec.total_power = rep.total_power;
  rec.feasible = rep.feasible;
  rec.outer_iterations = rep.outer_iterations;
  rec.max_inner_iterations = rep.max_inner_iterations();
  for (const auto &t : rep.inner_traces)
    if (t.stop == StopReason::MaxIterations)
      rec.inner_converged = false;
  return rec;
}

// All methods of one (value, realization) cell on one channel draw.
std::vector<RunRecord> run_cell(const SweepSpec &spec, double value, int r) {
  SystemConfig cfg = apply_variable(spec.base, spec.variable, value);
  const std::uint64_t seed = realization_seed(spec.base.rng_seed, r);
  cfg.rng_seed = seed;
  const double fraction = spec.variable == SweepVariable::SampleFraction
                              ? value
                              : spec.sample_fraction;

  std::vector<RunRecord> out;
  std::uint64_t hash = 0;
  ChannelSet ch;
  try {
    Rng chan_rng(seed);
    ch = draw_channels(cfg, chan_rng);
    hash = ch.hash();
  } catch (const std::exception &e) {
    for (Method m : spec.methods) {
      RunRecord rec;
      rec.method = m;
      rec.value = value;
      rec.realization = r;
      rec.seed = seed;
      rec.error = e.what();
      out.push_back(rec);
    }
    return out;
  }

  for (std::size_t mi = 0; mi < spec.methods.size(); ++mi) {
    const Method m = spec.methods[mi];
    // one stream per method so adding a method leaves the others unchanged
    Rng rng(mix(seed + 0x5eed + static_cast<std::uint64_t>(m)));
    try {
      SolveReport rep;
      switch (m) {
      case Method::RcgJo:
        rep = rcg_jo(ch, cfg, spec.jo, rng);
        break;
      case Method::RandomPhaseMrt:
        rep = baseline_random_phase_mrt(ch, cfg, rng);
        break;
      case Method::NoRis:
        rep = baseline_no_ris(ch, cfg, rng);
        break;
      case Method::RcgJoEstimatedCsi: {
        // same warm-start stream as the genie run, so the two differ only in
        // the channels they see
        Rng jo_rng(mix(seed + 0x5eed + static_cast<std::uint64_t>(Method::RcgJo)));
        Rng est_rng(mix(seed + 0xe57));
        const SampleMask mask = make_mask(cfg.n_x, cfg.n_y, fraction, est_rng);
        const ChannelSet est =
            estimate_channels(ch, cfg.n_x, cfg.n_y, mask, spec.pilot, est_rng);
        const SolveReport decided = rcg_jo(est, cfg, spec.jo, jo_rng);
        rep = evaluate_on(decided, ch, cfg);
        break;
      }
      }
      out.push_back(make_record(m, value, r, seed, hash, rep));
    } catch (const std::exception &e) {
      RunRecord rec;
      rec.method = m;
      rec.value = value;
      rec.realization = r;
      rec.seed = seed;
      rec.channel_hash = hash;
      rec.total_power = cfg.p_max * cfg.k_devices;
      rec.error = e.what();
      out.push_back(rec);
    }
  }
  return out;
}

std::string fmt(double v) {
  std::ostringstream s;
  s << std::setprecision(10) << v;
  return s.str();
}

std::ofstream open_out(const std::filesystem::path &path) {
  std::ofstream f(path);
  if (!f)
    throw Error("cannot open '" + path.string() + "' for writing");
  return f;
}

} // namespace

std::vector<SummaryRow> summarize(const std::vector<RunRecord> &records) {
  std::vector<SummaryRow> rows;
  std::map<std::pair<int, double>, std::vector<const RunRecord *>> groups;
  for (const auto &rec : records) {
    auto key = std::make_pair(static_cast<int>(rec.method), rec.value);
    if (!groups.count(key)) {
      SummaryRow row;
      row.method = rec.method;
      row.value = rec.value;
      rows.push_back(row);
    }
    groups[key].push_back(&rec);
  }
  for (auto &row : rows) {
    const auto &g = groups[{static_cast<int>(row.method), row.value}];
    row.runs = static_cast<int>(g.size());
    double sum = 0.0, sum2 = 0.0, fsum = 0.0, outer = 0.0, inner = 0.0;
    for (const RunRecord *rec : g) {
      sum += rec->total_power;
      sum2 += rec->total_power * rec->total_power;
      outer += rec->outer_iterations;
      inner += rec->max_inner_iterations;
      if (rec->feasible) {
        ++row.feasible_runs;
        fsum += rec->total_power;
      }
    }
    const double n = row.runs;
    row.mean_power = sum / n;
    const double var = n > 1 ? std::max(0.0, (sum2 - sum * sum / n) / (n - 1)) : 0.0;
    row.stderr_power = std::sqrt(var / n);
    row.feasibility_rate = row.feasible_runs / n;
    row.mean_power_feasible = row.feasible_runs > 0
                                  ? fsum / row.feasible_runs
                                  : std::numeric_limits<double>::quiet_NaN();
    row.mean_outer = outer / n;
    row.mean_inner = inner / n;
  }
  return rows;
}

void write_data_csv(const std::vector<RunRecord> &records, SweepVariable v,
                    const std::filesystem::path &path) {
  std::ofstream f = open_out(path);
  f << "method,variable,value,realization,seed,channel_hash,total_power_w,"
       "feasible,outer_iters,max_inner_iters,inner_converged,error\n";
  for (const auto &r : records) {
    std::string err = r.error;
    std::replace(err.begin(), err.end(), ',', ';');
    std::replace(err.begin(), err.end(), '\n', ' ');
    f << to_string(r.method) << ',' << to_string(v) << ',' << fmt(r.value)
      << ',' << r.realization << ',' << r.seed << ',' << std::hex
      << r.channel_hash << std::dec << ',' << fmt(r.total_power) << ','
      << (r.feasible ? 1 : 0) << ',' << r.outer_iterations << ','
      << r.max_inner_iterations << ',' << (r.inner_converged ? 1 : 0) << ','
      << err << '\n';
  }
  if (!f)
    throw Error("write failed on '" + path.string() + "'");
}

void write_summary_csv(const std::vector<SummaryRow> &rows, SweepVariable v,
                       const std::filesystem::path &path) {
  std::ofstream f = open_out(path);
  f << "method,variable,value,runs,feasible_runs,feasibility_rate,"
       "mean_power_w,stderr_power_w,mean_power_feasible_w,mean_outer_iters,"
       "mean_inner_iters\n";
  for (const auto &r : rows)
    f << to_string(r.method) << ',' << to_string(v) << ',' << fmt(r.value)
      << ',' << r.runs << ',' << r.feasible_runs << ','
      << fmt(r.feasibility_rate) << ',' << fmt(r.mean_power) << ','
      << fmt(r.stderr_power) << ',' << fmt(r.mean_power_feasible) << ','
      << fmt(r.mean_outer) << ',' << fmt(r.mean_inner) << '\n';
  if (!f)
    throw Error("write failed on '" + path.string() + "'");
}

SweepResult run_sweep(const SweepSpec &spec) {
  spec.validate();
  const auto t0 = std::chrono::steady_clock::now();
  const int nv = static_cast<int>(spec.values.size());
  const int cells = nv * spec.realizations;
  std::vector<std::vector<RunRecord>> slots(cells);

  std::atomic<int> next{0};
  auto worker = [&] {
    for (int c = next++; c < cells; c = next++)
      slots[c] = run_cell(spec, spec.values[c / spec.realizations],
                          c % spec.realizations);
  };
  const int jobs = std::min(spec.jobs, cells);
  if (jobs <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int j = 0; j < jobs; ++j)
      pool.emplace_back(worker);
    for (auto &t : pool)
      t.join();
  }

  SweepResult res;
  for (auto &s : slots)
    for (auto &r : s)
      res.records.push_back(std::move(r));
  res.summary = summarize(res.records);
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();

  if (!spec.out_dir.empty()) {
    std::error_code ec;
    std::filesystem::create_directories(spec.out_dir, ec);
    if (ec)
      throw Error("cannot create '" + spec.out_dir.string() +
                  "': " + ec.message());
    write_data_csv(res.records, spec.variable, spec.out_dir / "data.csv");
    write_summary_csv(res.summary, spec.variable, spec.out_dir / "summary.csv");
    std::ofstream meta = open_out(spec.out_dir / "meta.txt");
    const SystemConfig &c = spec.base;
    meta << "version = 0.1.0\n"
         << "variable = " << to_string(spec.variable) << "\nvalues =";
    for (double v : spec.values)
      meta << ' ' << fmt(v);
    meta << "\nmethods =";
    for (Method m : spec.methods)
      meta << ' ' << to_string(m);
    meta << "\nrealizations = " << spec.realizations
         << "\nseed = " << c.rng_seed << "\njobs = " << spec.jobs
         << "\nk_devices = " << c.k_devices << "\nm_antennas = " << c.m_antennas
         << "\nn_x = " << c.n_x << "\nn_y = " << c.n_y
         << "\nbs_ris_distance = " << fmt(c.bs_ris_distance)
         << "\nhoriz_distance = " << fmt(c.horiz_distance)
         << "\nvert_spread = " << fmt(c.vert_spread)
         << "\nrician_d = " << fmt(c.rician_d)
         << "\nrician_u = " << fmt(c.rician_u)
         << "\nrician_g = " << fmt(c.rician_g)
         << "\nnoise_power = " << fmt(c.noise_power)
         << "\nrate_min = " << fmt(c.rate_min) << "\np_max = " << fmt(c.p_max)
         << "\nsample_fraction = " << fmt(spec.sample_fraction)
         << "\nwall_time_s = " << fmt(secs) << '\n';
  }
  return res;
}

double ConvergenceStats::outer_within(int n) const {
  int c = 0;
  for (int v : outer_counts)
    c += v <= n;
  return runs > 0 ? static_cast<double>(c) / runs : 0.0;
}

double ConvergenceStats::inner_within(int n) const {
  int c = 0;
  for (int v : inner_counts)
    c += v >= 0 && v <= n;
  return runs > 0 ? static_cast<double>(c) / runs : 0.0;
}

ConvergenceStats convergence_stats(const std::vector<SolveReport> &reports) {
  if (reports.empty())
    throw DomainError("convergence_stats: no reports");
  ConvergenceStats st;
  st.runs = static_cast<int>(reports.size());
  for (const auto &rep : reports) {
    st.outer_counts.push_back(rep.outer_iterations);
    bool cut = false;
    for (const auto &t : rep.inner_traces)
      cut = cut || t.stop == StopReason::MaxIterations;
    if (cut)
      ++st.inner_budget_hits;
    st.inner_counts.push_back(cut ? -1 : rep.max_inner_iterations());
  }
  auto cdf = [&](const std::vector<int> &counts) {
    std::vector<int> v;
    for (int c : counts)
      if (c >= 0)
        v.push_back(c);
    std::sort(v.begin(), v.end());
    std::vector<CdfPoint> out;
    for (std::size_t i = 0; i < v.size(); ++i)
      if (i + 1 == v.size() || v[i + 1] != v[i])
        out.push_back({v[i], static_cast<double>(i + 1) / counts.size()});
    return out;
  };
  st.outer = cdf(st.outer_counts);
  st.inner = cdf(st.inner_counts);
  return st;
}

void write_cdf_csv(const ConvergenceStats &stats,
                   const std::filesystem::path &path) {
  std::ofstream f = open_out(path);
  f << "loop,iterations,fraction_le\n";
  for (const auto &p : stats.outer)
    f << "outer," << p.iterations << ',' << fmt(p.fraction) << '\n';
  for (const auto &p : stats.inner)
    f << "inner," << p.iterations << ',' << fmt(p.fraction) << '\n';
  if (!f)
    throw Error("write failed on '" + path.string() + "'");
}

void write_report_row(std::ostream &out, const SolveReport &rep,
                      const std::string &label, bool header) {
  const Eigen::Index k = rep.powers.size();
  if (header) {
    out << "method,seed,total_power_w,feasible,outer_iters,max_inner_iters";
    for (Eigen::Index i = 0; i < k; ++i)
      out << ",p" << i << "_w";
    for (Eigen::Index i = 0; i < k; ++i)
      out << ",rate_slack" << i;
    out << '\n';
  }
  out << label << ',' << rep.seed << ',' << fmt(rep.total_power) << ','
      << (rep.feasible ? 1 : 0) << ',' << rep.outer_iterations << ','
      << rep.max_inner_iterations();
  for (Eigen::Index i = 0; i < k; ++i)
    out << ',' << fmt(rep.powers(i));
  for (Eigen::Index i = 0; i < rep.rate_slack.size(); ++i)
    out << ',' << fmt(rep.rate_slack(i));
  out << '\n';
}

void write_trace_csv(const SolveReport &rep, const std::filesystem::path &path) {
  std::ofstream f = open_out(path);
  f << "solve,iteration,value,grad_norm,alpha,beta,restarted,zoutendijk_sum,"
       "descent_ratio,stop\n";
  for (std::size_t s = 0; s < rep.inner_traces.size(); ++s) {
    const RcgTrace &t = rep.inner_traces[s];
    for (const auto &it : t.iterations)
      f << s << ',' << it.iteration << ',' << fmt(it.value) << ','
        << fmt(it.grad_norm) << ',' << fmt(it.alpha) << ',' << fmt(it.beta)
        << ',' << (it.restarted ? 1 : 0) << ',' << fmt(it.zoutendijk_sum)
        << ',' << fmt(it.descent_ratio) << ',' << to_string(t.stop) << '\n';
  }
  if (!f)
    throw Error("write failed on '" + path.string() + "'");
}

SingleRun solve_one(const SystemConfig &cfg, const JoOptions &opts,
                    std::uint64_t seed) {
  SystemConfig c = cfg;
  c.rng_seed = seed;
  Rng chan_rng(seed);
  const ChannelSet ch = draw_channels(c, chan_rng);
  SingleRun run;
  run.channel_hash = ch.hash();
  Rng r1(mix(seed + 0x5eed + static_cast<std::uint64_t>(Method::RcgJo)));
  run.jo = rcg_jo(ch, c, opts, r1);
  Rng r2(mix(seed + 0x5eed + static_cast<std::uint64_t>(Method::RandomPhaseMrt)));
  run.random_phase = baseline_random_phase_mrt(ch, c, r2);
  Rng r3(mix(seed + 0x5eed + static_cast<std::uint64_t>(Method::NoRis)));
  run.no_ris = baseline_no_ris(ch, c, r3);
  return run;
}

} // namespace risopt
