#pragma once

// Joint phase/beam optimization and uplink power control (RCG-JO).
//
// With the device powers p fixed, the rate constraints are moved into the
// Lagrangian
//   L(theta, W, lambda) = sum_k lambda_k ( -p_k/gamma A_kk
//                                          + sum_{j != k} p_j A_jk + sigma^2 )
// with A_jk = |w_k^H (d_j + G diag(u_j) theta)|^2 and gamma = 2^{R_min} - 1.
// L is minimized over the product manifold by Riemannian CG, the multipliers
// follow a projected subgradient ascent, and p is then recomputed as the
// minimum-power solution for the current (theta, W).

#include "risopt/channel.hpp"
#include "risopt/errors.hpp"
#include "risopt/rcg.hpp"

#include <cstdint>
#include <vector>

namespace risopt {

/// Per-device transmit powers in watts.
using PowerVector = RVector;
/// Lagrange multipliers of the rate constraints, all >= 0.
using Multipliers = RVector;

/// Precomputed data for repeated evaluation of the gains A_jk.
class LinkModel {
public:
  LinkModel(const ChannelSet &ch, double noise_power, double sinr_target);

  int k_devices() const { return static_cast<int>(direct_.size()); }
  Eigen::Index m_antennas() const { return m_; }
  Eigen::Index n_elements() const { return n_; }
  double noise_power() const { return noise_; }
  double sinr_target() const { return gamma_; }

  /// h_j(theta) for every device, stacked as the columns of an M x K matrix.
  CMatrix effective_channels(const CVector &theta) const;
  /// A(j, k) = |w_k^H h_j|^2.
  Eigen::MatrixXd gains(const ProductPoint &x) const;

  /// Value of the Lagrangian above.
  double lagrangian(const ProductPoint &x, const PowerVector &p,
                    const Multipliers &lambda) const;
  /// Euclidean gradient w.r.t. the real metric Re{<., .>}, i.e. twice the
  /// conjugate Wirtinger derivative.
  AmbientPair lagrangian_gradient(const ProductPoint &x, const PowerVector &p,
                                  const Multipliers &lambda) const;
  /// g_k = -p_k/gamma A_kk + sum_{j != k} p_j A_jk + sigma^2.
  RVector constraint_values(const ProductPoint &x, const PowerVector &p) const;

private:
  std::vector<CVector> direct_;
  std::vector<CMatrix> cascaded_; // G diag(u_j)
  Eigen::Index m_ = 0;
  Eigen::Index n_ = 0;
  double noise_ = 1.0;
  double gamma_ = 1.0;
};

/// |w_k^H h_j(theta)|^2 for the column w_k.
double coupling_gain(const ChannelSet &ch, const CVector &theta,
                     const CVector &w_k, int j, int k);

/// log2(1 + p_k A_kk / (sum_{j != k} p_j A_jk + sigma^2)).
double achievable_rate(const ChannelSet &ch, const CVector &theta,
                       const CMatrix &w, const PowerVector &p, int k,
                       double noise_power);

double lagrangian_value(const ChannelSet &ch, const CVector &theta,
                        const CMatrix &w, const PowerVector &p,
                        const Multipliers &lambda, double rate_min,
                        double noise_power);

CVector euclidean_grad_theta(const ChannelSet &ch, const CVector &theta,
                             const CMatrix &w, const PowerVector &p,
                             const Multipliers &lambda, double rate_min);

CMatrix euclidean_grad_w(const ChannelSet &ch, const CVector &theta,
                         const CMatrix &w, const PowerVector &p,
                         const Multipliers &lambda, double rate_min);

/// lambda' = max(lambda + step * g, 0) with g the constraint values.
Multipliers subgradient_step(const ChannelSet &ch, const CVector &theta,
                             const CMatrix &w, const PowerVector &p,
                             const Multipliers &lambda, double step,
                             double rate_min, double noise_power);

/// Minimum total power meeting every rate target with equality, solved as
/// (I - F) p = u. Throws InfeasibleError if the system is singular, the
/// solution has a negative entry, or some p_k exceeds p_max.
PowerVector min_power(const ChannelSet &ch, const CVector &theta,
                      const CMatrix &w, const SystemConfig &cfg);

/// Same, from a precomputed gain matrix A(j, k).
PowerVector min_power_from_gains(const Eigen::MatrixXd &gains,
                                 double sinr_target, double noise_power,
                                 double p_max);

/// Unit-norm MRT beams w_k = h_k / ||h_k|| at the given phases.
CMatrix mrt_beams(const ChannelSet &ch, const CVector &theta);

struct JoOptions {
  /// Inner solver settings. The iteration budget T is cut to 50: fully
  /// converging L at a fixed lambda overshoots toward the strongest device,
  /// and the multiplier loop corrects more cheaply from a partial solve.
  RcgOptions rcg = [] {
    RcgOptions o;
    o.max_iters = 50;
    return o;
  }();
  int outer_budget = 50;         // outer alternation steps
  double outer_rel_tol = 1e-4;   // relative change of total power
  int multiplier_budget = 100;   // lambda-loop iterations per outer step
  double multiplier_tol = 1e-6;  // relative change of lambda
  double point_tol = 1e-10;      // squared move of (theta, W)
  bool warm_start_multipliers = true;
  int infeasible_retries = 3;
  /// eta_0 = subgradient_scale / max_k |g_k| at the first multiplier step.
  double subgradient_scale = 1.0;
  /// Return the multiplier-loop iterate with the lowest minimum power
  /// instead of the last one.
  bool keep_best_iterate = true;
};

struct PhaseBeamResult {
  ProductPoint point;
  Multipliers lambda;
  std::vector<RcgTrace> traces;
  int multiplier_iterations = 0;
  /// Minimum total power at `point`, +inf when no feasible power exists.
  double point_power = 0.0;
};

/// Alternates RCG minimization of L(., ., lambda) with subgradient updates of
/// lambda until both settle or the budget is spent. The RCG cost is L
/// divided by sigma^2 sum(lambda), a positive rescaling that keeps the
/// gradient tolerance meaningful at physical channel scales.
PhaseBeamResult optimize_phase_beam(const ChannelSet &ch, const PowerVector &p,
                                    const Multipliers &lambda0,
                                    const ProductPoint &start,
                                    const SystemConfig &cfg,
                                    const JoOptions &opts);

struct SolveReport {
  PowerVector powers;
  ProductPoint point;
  double total_power = 0.0;
  int outer_iterations = 0;
  std::vector<RcgTrace> inner_traces;
  RVector rate_slack; // achieved rate - R_min
  bool feasible = false;
  std::uint64_t seed = 0;
  /// Total power after each outer iteration.
  std::vector<double> power_history;

  /// Largest inner RCG iteration count across all inner solves.
  int max_inner_iterations() const;
};

/// Fills rate_slack / feasible / total_power from powers and point.
void finalize_report(SolveReport &rep, const ChannelSet &ch,
                     const SystemConfig &cfg);

/// Joint optimization: random phases + MRT warm start, then alternate
/// optimize_phase_beam and min_power until the total power settles.
SolveReport rcg_jo(const ChannelSet &ch, const SystemConfig &cfg,
                   const JoOptions &opts, Rng &rng);

/// Evaluates the report's (theta, W, p) against another channel set, used to
/// score decisions made from estimated channels on the true ones.
SolveReport evaluate_on(const SolveReport &decided, const ChannelSet &truth,
                        const SystemConfig &cfg);

} // namespace risopt
