#include "risopt/power_control.hpp"

#include <Eigen/LU>

#include <cmath>
#include <limits>

namespace risopt {

namespace {

void check_lengths(const ChannelSet &ch, const CVector &theta, const CMatrix &w,
                   const PowerVector &p) {
  ch.validate();
  const int k = ch.k_devices();
  if (theta.size() != ch.n_elements())
    throw DimensionError("theta length does not match the RIS size");
  if (w.rows() != ch.m_antennas() || w.cols() != k)
    throw DimensionError("W must be M x K");
  if (p.size() != k)
    throw DimensionError("power vector length must equal K");
}

// Coefficient of A_jk in the Lagrangian: lambda_k * (-p_k/gamma) on the
// diagonal and lambda_k * p_j off it.
Eigen::MatrixXd lagrangian_coefficients(const PowerVector &p,
                                        const Multipliers &lambda,
                                        double gamma) {
  const Eigen::Index k = p.size();
  Eigen::MatrixXd c(k, k);
  for (Eigen::Index kk = 0; kk < k; ++kk)
    for (Eigen::Index j = 0; j < k; ++j)
      c(j, kk) = lambda(kk) * (j == kk ? -p(kk) / gamma : p(j));
  return c;
}

} // namespace

LinkModel::LinkModel(const ChannelSet &ch, double noise_power,
                     double sinr_target)
    : direct_(ch.direct), cascaded_(cascaded_channels(ch)),
      m_(ch.m_antennas()), n_(ch.n_elements()), noise_(noise_power),
      gamma_(sinr_target) {
  ch.validate();
  if (!(sinr_target > 0.0))
    throw DomainError("LinkModel: the SINR target 2^R_min - 1 must be > 0");
}

CMatrix LinkModel::effective_channels(const CVector &theta) const {
  if (theta.size() != n_)
    throw DimensionError("LinkModel: theta length mismatch");
  CMatrix h(m_, k_devices());
  for (int j = 0; j < k_devices(); ++j)
    h.col(j) = direct_[j] + cascaded_[j] * theta;
  return h;
}

Eigen::MatrixXd LinkModel::gains(const ProductPoint &x) const {
  const CMatrix h = effective_channels(x.theta);
  // (W^H H)(k, j) = w_k^H h_j
  const CMatrix s = x.w.adjoint() * h;
  return s.cwiseAbs2().transpose();
}

double LinkModel::lagrangian(const ProductPoint &x, const PowerVector &p,
                             const Multipliers &lambda) const {
  const Eigen::MatrixXd a = gains(x);
  const Eigen::MatrixXd c = lagrangian_coefficients(p, lambda, gamma_);
  return (c.array() * a.array()).sum() + noise_ * lambda.sum();
}

AmbientPair LinkModel::lagrangian_gradient(const ProductPoint &x,
                                           const PowerVector &p,
                                           const Multipliers &lambda) const {
  const CMatrix h = effective_channels(x.theta);
  const CMatrix s = (x.w.adjoint() * h).transpose(); // s(j, k) = w_k^H h_j
  const Eigen::MatrixXd c = lagrangian_coefficients(p, lambda, gamma_);

  AmbientPair g{CVector::Zero(n_), CMatrix::Zero(m_, k_devices())};
  // d/dtheta A_jk = 2 B_j^H w_k (w_k^H h_j)
  for (int j = 0; j < k_devices(); ++j) {
    const CVector coeff =
        (c.row(j).transpose().cast<cplx>().array() * s.row(j).transpose().array())
            .matrix();
    g.theta += 2.0 * cascaded_[j].adjoint() * (x.w * coeff);
  }
  // d/dw_k A_jk = 2 h_j (h_j^H w_k)
  const CMatrix weights = (c.cast<cplx>().array() * s.conjugate().array()).matrix();
  g.w = 2.0 * h * weights;
  return g;
}

RVector LinkModel::constraint_values(const ProductPoint &x,
                                     const PowerVector &p) const {
  const Eigen::MatrixXd a = gains(x);
  const int k = k_devices();
  RVector g(k);
  for (int kk = 0; kk < k; ++kk) {
    double interference = 0.0;
    for (int j = 0; j < k; ++j)
      if (j != kk)
        interference += p(j) * a(j, kk);
    g(kk) = -p(kk) / gamma_ * a(kk, kk) + interference + noise_;
  }
  return g;
}

double coupling_gain(const ChannelSet &ch, const CVector &theta,
                     const CVector &w_k, int j, int k) {
  if (k < 0 || k >= ch.k_devices())
    throw DimensionError("coupling_gain: device index out of range");
  if (w_k.size() != ch.m_antennas())
    throw DimensionError("coupling_gain: beam length mismatch");
  return std::norm(w_k.dot(effective_channel(ch, theta, j)));
}

double achievable_rate(const ChannelSet &ch, const CVector &theta,
                       const CMatrix &w, const PowerVector &p, int k,
                       double noise_power) {
  check_lengths(ch, theta, w, p);
  if (k < 0 || k >= ch.k_devices())
    throw DimensionError("achievable_rate: device index out of range");
  const CVector wk = w.col(k);
  double interference = 0.0;
  for (int j = 0; j < ch.k_devices(); ++j)
    if (j != k)
      interference += p(j) * coupling_gain(ch, theta, wk, j, k);
  const double signal = p(k) * coupling_gain(ch, theta, wk, k, k);
  return std::log2(1.0 + signal / (interference + noise_power));
}

double lagrangian_value(const ChannelSet &ch, const CVector &theta,
                        const CMatrix &w, const PowerVector &p,
                        const Multipliers &lambda, double rate_min,
                        double noise_power) {
  check_lengths(ch, theta, w, p);
  const LinkModel model(ch, noise_power, std::exp2(rate_min) - 1.0);
  return model.lagrangian(ProductPoint{theta, w}, p, lambda);
}

CVector euclidean_grad_theta(const ChannelSet &ch, const CVector &theta,
                             const CMatrix &w, const PowerVector &p,
                             const Multipliers &lambda, double rate_min) {
  check_lengths(ch, theta, w, p);
  const LinkModel model(ch, 1.0, std::exp2(rate_min) - 1.0);
  return model.lagrangian_gradient(ProductPoint{theta, w}, p, lambda).theta;
}

CMatrix euclidean_grad_w(const ChannelSet &ch, const CVector &theta,
                         const CMatrix &w, const PowerVector &p,
                         const Multipliers &lambda, double rate_min) {
  check_lengths(ch, theta, w, p);
  const LinkModel model(ch, 1.0, std::exp2(rate_min) - 1.0);
  return model.lagrangian_gradient(ProductPoint{theta, w}, p, lambda).w;
}

Multipliers subgradient_step(const ChannelSet &ch, const CVector &theta,
                             const CMatrix &w, const PowerVector &p,
                             const Multipliers &lambda, double step,
                             double rate_min, double noise_power) {
  check_lengths(ch, theta, w, p);
  if (!(step > 0.0))
    throw DomainError("subgradient_step: step must be positive");
  if ((lambda.array() < 0.0).any())
    throw DomainError("subgradient_step: multipliers must be nonnegative");
  const LinkModel model(ch, noise_power, std::exp2(rate_min) - 1.0);
  const RVector g = model.constraint_values(ProductPoint{theta, w}, p);
  return (lambda + step * g).cwiseMax(0.0);
}

PowerVector min_power_from_gains(const Eigen::MatrixXd &a, double gamma,
                                 double noise_power, double p_max) {
  const Eigen::Index k = a.rows();
  for (Eigen::Index i = 0; i < k; ++i)
    if (!(a(i, i) > 0.0))
      throw InfeasibleError("min_power: device " + std::to_string(i) +
                            " has zero desired-link gain");
  // (I - F) p = u with F(k, j) = gamma A_jk / A_kk, u_k = gamma sigma^2 / A_kk
  Eigen::MatrixXd sys = Eigen::MatrixXd::Identity(k, k);
  RVector u(k);
  for (Eigen::Index kk = 0; kk < k; ++kk) {
    for (Eigen::Index j = 0; j < k; ++j)
      if (j != kk)
        sys(kk, j) = -gamma * a(j, kk) / a(kk, kk);
    u(kk) = gamma * noise_power / a(kk, kk);
  }
  Eigen::FullPivLU<Eigen::MatrixXd> lu(sys);
  if (!lu.isInvertible())
    throw InfeasibleError("min_power: interference system is singular");
  const PowerVector p = lu.solve(u);
  for (Eigen::Index i = 0; i < k; ++i) {
    if (!std::isfinite(p(i)) || p(i) < 0.0)
      throw InfeasibleError("min_power: rate targets unreachable at any power");
    if (p(i) > p_max)
      throw InfeasibleError("min_power: device " + std::to_string(i) +
                            " needs " + std::to_string(p(i)) +
                            " W, above p_max");
  }
  return p;
}

PowerVector min_power(const ChannelSet &ch, const CVector &theta,
                      const CMatrix &w, const SystemConfig &cfg) {
  check_lengths(ch, theta, w, RVector::Zero(ch.k_devices()));
  const LinkModel model(ch, cfg.noise_power, cfg.sinr_target());
  return min_power_from_gains(model.gains(ProductPoint{theta, w}),
                              cfg.sinr_target(), cfg.noise_power, cfg.p_max);
}

CMatrix mrt_beams(const ChannelSet &ch, const CVector &theta) {
  CMatrix w(ch.m_antennas(), ch.k_devices());
  for (int k = 0; k < ch.k_devices(); ++k) {
    CVector h = effective_channel(ch, theta, k);
    const double n = h.norm();
    if (n > 0.0) {
      w.col(k) = h / n;
    } else {
      w.col(k).setZero();
      w(0, k) = 1.0;
    }
  }
  return w;
}

PhaseBeamResult optimize_phase_beam(const ChannelSet &ch, const PowerVector &p,
                                    const Multipliers &lambda0,
                                    const ProductPoint &start,
                                    const SystemConfig &cfg,
                                    const JoOptions &opts) {
  if ((lambda0.array() < 0.0).any())
    throw DomainError("optimize_phase_beam: multipliers must be nonnegative");
  const LinkModel model(ch, cfg.noise_power, cfg.sinr_target());

  const double inf = std::numeric_limits<double>::infinity();
  auto power_at = [&](const ProductPoint &x) {
    try {
      return min_power_from_gains(model.gains(x), cfg.sinr_target(),
                                  cfg.noise_power, cfg.p_max)
          .sum();
    } catch (const InfeasibleError &) {
      return inf;
    }
  };

  PhaseBeamResult out;
  out.point = start;
  out.lambda = lambda0;
  ProductPoint best = start;
  double best_power = power_at(start);
  bool best_from_loop = false;
  double eta0 = 0.0;

  for (int i = 1; i <= opts.multiplier_budget; ++i) {
    const Multipliers lambda = out.lambda;
    const double lsum = lambda.sum();
    const double scale = lsum > 0.0 ? 1.0 / (cfg.noise_power * lsum) : 0.0;
    Objective obj{
        [&model, &p, lambda, scale](const ProductPoint &x) {
          return scale * model.lagrangian(x, p, lambda);
        },
        [&model, &p, lambda, scale](const ProductPoint &x) {
          AmbientPair g = model.lagrangian_gradient(x, p, lambda);
          g.theta *= scale;
          g.w *= scale;
          return g;
        }};

    ProductPoint next;
    try {
      RcgResult r = rcg_minimize(obj, out.point, opts.rcg);
      next = std::move(r.x);
      out.traces.push_back(std::move(r.trace));
    } catch (const SolverStalled &s) {
      // Every accepted step decreased L, so the last iterate is the best one.
      next = s.last;
      out.traces.push_back(s.trace);
    }
    out.multiplier_iterations = i;
    const double candidate = power_at(next);
    if (!best_from_loop || candidate < best_power) {
      best = next;
      best_power = candidate;
      best_from_loop = true;
    }

    const RVector g = model.constraint_values(next, p);
    if (i == 1) {
      const double gmax = g.cwiseAbs().maxCoeff();
      eta0 = gmax > 0.0 ? opts.subgradient_scale / gmax : 1.0;
    }
    const double eta = eta0 / std::sqrt(static_cast<double>(i));
    Multipliers updated = (lambda + eta * g).cwiseMax(0.0);

    const double moved = squared_distance(next, out.point);
    const double lnorm = lambda.norm();
    const double dl = lnorm > 0.0 ? (updated - lambda).norm() / lnorm
                                  : updated.norm();
    out.point = std::move(next);
    out.lambda = std::move(updated);
    // with lambda = 0 the cost is identically zero, nothing left to solve
    if (lsum == 0.0)
      break;
    if (moved <= opts.point_tol && dl <= opts.multiplier_tol)
      break;
  }
  if (opts.keep_best_iterate) {
    out.point = std::move(best);
    out.point_power = best_power;
  } else {
    out.point_power = power_at(out.point);
  }
  return out;
}

int SolveReport::max_inner_iterations() const {
  int best = 0;
  for (const auto &t : inner_traces)
    best = std::max(best, t.iteration_count());
  return best;
}

void finalize_report(SolveReport &rep, const ChannelSet &ch,
                     const SystemConfig &cfg) {
  const int k = ch.k_devices();
  rep.total_power = rep.powers.sum();
  rep.rate_slack.resize(k);
  bool ok = rep.feasible;
  for (int i = 0; i < k; ++i) {
    rep.rate_slack(i) = achievable_rate(ch, rep.point.theta, rep.point.w,
                                        rep.powers, i, cfg.noise_power) -
                        cfg.rate_min;
    if (rep.rate_slack(i) < -1e-9)
      ok = false;
    if (rep.powers(i) < 0.0 || rep.powers(i) > cfg.p_max)
      ok = false;
  }
  rep.feasible = ok;
}

namespace {

struct Candidate {
  ProductPoint point;
  PowerVector p;
  bool feasible = false;
};

Candidate warm_start(const ChannelSet &ch, const SystemConfig &cfg, Rng &rng) {
  std::uniform_real_distribution<double> phase(0.0, 2.0 * M_PI);
  CVector theta(ch.n_elements());
  for (Eigen::Index i = 0; i < theta.size(); ++i)
    theta(i) = std::polar(1.0, phase(rng));
  Candidate c;
  c.point = ProductPoint{theta, mrt_beams(ch, theta)};
  try {
    c.p = min_power(ch, c.point.theta, c.point.w, cfg);
    c.feasible = true;
  } catch (const InfeasibleError &) {
    c.p = PowerVector::Constant(ch.k_devices(), cfg.p_max / 2.0);
  }
  return c;
}

} // namespace

SolveReport rcg_jo(const ChannelSet &ch, const SystemConfig &cfg,
                   const JoOptions &opts, Rng &rng) {
  ch.validate();
  const int k = ch.k_devices();
  SolveReport rep;
  rep.seed = cfg.rng_seed;

  for (int attempt = 0; attempt <= opts.infeasible_retries; ++attempt) {
    Candidate cur = warm_start(ch, cfg, rng);
    Multipliers lambda = Multipliers::Ones(k);
    std::vector<RcgTrace> traces;
    std::vector<double> history;
    int outer = 0;

    for (int t = 1; t <= opts.outer_budget; ++t) {
      outer = t;
      PhaseBeamResult pb =
          optimize_phase_beam(ch, cur.p, lambda, cur.point, cfg, opts);
      for (auto &tr : pb.traces)
        traces.push_back(std::move(tr));
      lambda = opts.warm_start_multipliers ? pb.lambda : Multipliers::Ones(k);
      if (lambda.sum() == 0.0)
        lambda = Multipliers::Ones(k);

      const double before = cur.p.sum();
      bool improved = false;
      try {
        PowerVector p_new = min_power(ch, pb.point.theta, pb.point.w, cfg);
        if (!cur.feasible || p_new.sum() <= before) {
          cur = Candidate{std::move(pb.point), std::move(p_new), true};
          improved = true;
        }
      } catch (const InfeasibleError &) {
        if (!cur.feasible)
          cur.point = std::move(pb.point);
      }
      history.push_back(cur.feasible ? cur.p.sum()
                                     : std::numeric_limits<double>::infinity());

      if (cur.feasible) {
        const double after = cur.p.sum();
        const double rel = before > 0.0 ? std::abs(before - after) / before : 0.0;
        if (!improved || rel < opts.outer_rel_tol)
          break;
      }
    }

    if (cur.feasible || attempt == opts.infeasible_retries) {
      rep.point = std::move(cur.point);
      rep.powers = cur.feasible ? cur.p : PowerVector::Constant(k, cfg.p_max);
      rep.feasible = cur.feasible;
      rep.outer_iterations = outer;
      rep.inner_traces = std::move(traces);
      rep.power_history = std::move(history);
      break;
    }
  }
  finalize_report(rep, ch, cfg);
  return rep;
}

SolveReport evaluate_on(const SolveReport &decided, const ChannelSet &truth,
                        const SystemConfig &cfg) {
  SolveReport rep = decided;
  try {
    rep.powers = min_power(truth, decided.point.theta, decided.point.w, cfg);
    rep.feasible = true;
  } catch (const InfeasibleError &) {
    rep.powers = PowerVector::Constant(truth.k_devices(), cfg.p_max);
    rep.feasible = false;
  }
  finalize_report(rep, truth, cfg);
  return rep;
}

} // namespace risopt
