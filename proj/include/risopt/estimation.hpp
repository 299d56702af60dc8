#pragma once

// Channel estimation with a partially active RIS.
//
// Only the elements in the active set Omega reflect pilots, so per BS antenna
// m the cascaded channel is observed on Omega only. Reshaped to the RIS grid,
// each observed matrix is (close to) low rank because the links are LoS
// dominated, and the unobserved entries are filled in by nuclear-norm
// minimization.
//
// Grid layout: RIS element n sits at (x, y) = (n / N_y, n % N_y), i.e. the
// grid is the row-major reshape of the element vector. This is the layout in
// which a LoS steering vector a_x (kron) a_y becomes the rank-1 matrix
// a_x a_y^T.

#include "risopt/channel.hpp"
#include "risopt/errors.hpp"

#include <utility>
#include <vector>

namespace risopt {

/// Set of active elements as (x, y) pairs.
class SampleMask {
public:
  SampleMask() = default;
  /// Throws DimensionError for out-of-range or duplicate pairs and
  /// DomainError for an empty set.
  SampleMask(int n_x, int n_y, std::vector<std::pair<int, int>> active);

  int n_x() const { return n_x_; }
  int n_y() const { return n_y_; }
  const std::vector<std::pair<int, int>> &active() const { return active_; }
  std::size_t size() const { return active_.size(); }
  bool contains(int x, int y) const;
  /// 1 on Omega, 0 elsewhere.
  Eigen::MatrixXd indicator() const;

private:
  int n_x_ = 0;
  int n_y_ = 0;
  std::vector<std::pair<int, int>> active_;
  Eigen::MatrixXd ind_;
};

/// P_Omega(G): values off the mask are exactly zero.
struct SampledMatrix {
  CMatrix values;
  SampleMask mask;

  void validate() const;
};

/// The sampling operator P_Omega.
SampledMatrix sample(const CMatrix &full, const SampleMask &mask);

/// Which side of the pilot the received model uses.
enum class PilotConvention {
  Conjugate, // Y = x^* P_Omega(G) + N
  Plain,     // Y = x P_Omega(G) + N
};

/// LS estimate on the mask: Y / x^* (Conjugate) or Y / x (Plain).
/// Throws DomainError when |pilot| == 0.
SampledMatrix ls_sampled_estimate(const CMatrix &received, cplx pilot,
                                  const SampleMask &mask,
                                  PilotConvention conv = PilotConvention::Conjugate);

struct CompletionOptions {
  int max_iters = 20000;
  /// Success when the shrunk iterate and its data-consistent reflection
  /// differ by at most tol relative to ||sampled||_F.
  double tol = 1e-6;
  /// Singular-value threshold as a fraction of the largest singular value of
  /// the zero-filled data. Any positive value leads to the same minimizer;
  /// it only sets the speed.
  double threshold_fraction = 0.1;
};

/// Completion did not reach the residual target.
class CompletionFailure : public Error {
public:
  CompletionFailure(const std::string &what, CMatrix last, double residual)
      : Error(what), last(std::move(last)), residual(residual) {}
  CMatrix last;
  double residual;
};

/// Nuclear-norm completion: singular-value soft thresholding alternated with
/// projection onto the data constraint (Douglas-Rachford splitting), so the
/// returned matrix matches the samples exactly. Throws CompletionFailure
/// when the iterates have not met within max_iters.
CMatrix complete_low_rank(const SampledMatrix &sampled,
                          const CompletionOptions &opts);
CMatrix complete_low_rank(const SampledMatrix &sampled, int max_iters,
                          double tol);

/// Element vector (length N_x N_y) to N_x x N_y grid and back.
CMatrix to_grid(const CVector &v, int n_x, int n_y);
CVector from_grid(const CMatrix &grid);

/// Completes every matrix and assembles G with row m = vec(G_m)^T and
/// u_k = vec(U_k). `direct` is copied through unchanged (the direct links
/// are estimated with the RIS off). Throws DimensionError for empty or
/// inconsistent input; a CompletionFailure names the failing matrix.
ChannelSet reconstruct_channel_set(const std::vector<SampledMatrix> &samples_g,
                                   const std::vector<SampledMatrix> &samples_u,
                                   const std::vector<CVector> &direct,
                                   const CompletionOptions &opts = {});

/// round(fraction * N) distinct elements drawn uniformly.
SampleMask make_mask(int n_x, int n_y, double fraction, Rng &rng);

struct PilotOptions {
  cplx pilot{1.0, 0.0};
  /// Variance of the CN noise added to every received sample; 0 = noiseless.
  double noise_variance = 0.0;
  /// Rician targets are only approximately low rank, so the pipeline stops
  /// earlier and thresholds harder than the exact-recovery defaults.
  CompletionOptions completion = [] {
    CompletionOptions o;
    o.tol = 1e-5;
    o.threshold_fraction = 0.5;
    return o;
  }();
};

/// Full pipeline on a ground-truth channel set: sample G rows and every u_k
/// on one mask, add pilot noise, LS-estimate and complete.
ChannelSet estimate_channels(const ChannelSet &truth, int n_x, int n_y,
                             const SampleMask &mask, const PilotOptions &opts,
                             Rng &rng);

} // namespace risopt
