#include "risopt/estimation.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace risopt {

SampleMask::SampleMask(int n_x, int n_y, std::vector<std::pair<int, int>> active)
    : n_x_(n_x), n_y_(n_y), active_(std::move(active)) {
  if (n_x < 1 || n_y < 1)
    throw DimensionError("SampleMask: grid dimensions must be >= 1");
  if (active_.empty())
    throw DomainError("SampleMask: the active set is empty");
  ind_ = Eigen::MatrixXd::Zero(n_x, n_y);
  for (const auto &[x, y] : active_) {
    if (x < 0 || x >= n_x || y < 0 || y >= n_y)
      throw DimensionError("SampleMask: index (" + std::to_string(x) + ", " +
                           std::to_string(y) + ") out of range");
    if (ind_(x, y) != 0.0)
      throw DimensionError("SampleMask: duplicate index (" + std::to_string(x) +
                           ", " + std::to_string(y) + ")");
    ind_(x, y) = 1.0;
  }
}

bool SampleMask::contains(int x, int y) const {
  if (x < 0 || x >= n_x_ || y < 0 || y >= n_y_)
    return false;
  return ind_(x, y) != 0.0;
}

Eigen::MatrixXd SampleMask::indicator() const { return ind_; }

void SampledMatrix::validate() const {
  if (values.rows() != mask.n_x() || values.cols() != mask.n_y())
    throw DimensionError("SampledMatrix: values and mask shapes differ");
  for (Eigen::Index x = 0; x < values.rows(); ++x)
    for (Eigen::Index y = 0; y < values.cols(); ++y)
      if (!mask.contains(x, y) && values(x, y) != cplx(0.0, 0.0))
        throw DomainError("SampledMatrix: nonzero entry off the mask");
}

SampledMatrix sample(const CMatrix &full, const SampleMask &mask) {
  if (full.rows() != mask.n_x() || full.cols() != mask.n_y())
    throw DimensionError("sample: matrix and mask shapes differ");
  CMatrix v = CMatrix::Zero(full.rows(), full.cols());
  for (const auto &[x, y] : mask.active())
    v(x, y) = full(x, y);
  return SampledMatrix{std::move(v), mask};
}

SampledMatrix ls_sampled_estimate(const CMatrix &received, cplx pilot,
                                  const SampleMask &mask, PilotConvention conv) {
  if (!(std::abs(pilot) > 0.0))
    throw DomainError("ls_sampled_estimate: pilot must be nonzero");
  const cplx div = conv == PilotConvention::Conjugate ? std::conj(pilot) : pilot;
  SampledMatrix s = sample(received, mask);
  for (const auto &[x, y] : mask.active())
    s.values(x, y) /= div;
  return s;
}

namespace {

// Soft-thresholds the singular values of y by `mu`.
CMatrix shrink(const CMatrix &y, double mu) {
  Eigen::JacobiSVD<CMatrix> svd(y, Eigen::ComputeThinU | Eigen::ComputeThinV);
  RVector s = (svd.singularValues().array() - mu).cwiseMax(0.0).matrix();
  return svd.matrixU() * s.cast<cplx>().asDiagonal() * svd.matrixV().adjoint();
}

} // namespace

CMatrix complete_low_rank(const SampledMatrix &sampled,
                          const CompletionOptions &opts) {
  sampled.validate();
  if (opts.max_iters < 1 || !(opts.threshold_fraction > 0.0) || !(opts.tol >= 0.0))
    throw DomainError("complete_low_rank: invalid options");
  const CMatrix &m = sampled.values;
  const Eigen::MatrixXd ind = sampled.mask.indicator();
  const double mnorm = m.norm();
  if (mnorm == 0.0)
    return CMatrix::Zero(m.rows(), m.cols());

  Eigen::JacobiSVD<CMatrix> top(m);
  const double mu = opts.threshold_fraction * top.singularValues()(0);
  const Eigen::ArrayXXd off = 1.0 - ind.array();

  // Douglas-Rachford on ||X||_* + indicator{P_Omega(X) = M}: shrink the
  // singular values, then reflect through the data constraint.
  CMatrix z = m;
  CMatrix x = z;
  double gap = 1.0;
  for (int it = 0; it < opts.max_iters; ++it) {
    x = shrink(z, mu);
    CMatrix r = 2.0 * x - z;
    CMatrix y = (off.cast<cplx>() * r.array()).matrix() + m;
    const CMatrix diff = y - x;
    z += diff;
    gap = diff.norm() / mnorm;
    if (gap <= opts.tol) {
      // y agrees with the data exactly and sits within tol of x
      return y;
    }
  }
  throw CompletionFailure("complete_low_rank: iterate gap " +
                              std::to_string(gap) + " above tolerance after " +
                              std::to_string(opts.max_iters) + " iterations",
                          std::move(x), gap);
}

CMatrix complete_low_rank(const SampledMatrix &sampled, int max_iters,
                          double tol) {
  CompletionOptions o;
  o.max_iters = max_iters;
  o.tol = tol;
  return complete_low_rank(sampled, o);
}

CMatrix to_grid(const CVector &v, int n_x, int n_y) {
  if (v.size() != static_cast<Eigen::Index>(n_x) * n_y)
    throw DimensionError("to_grid: length is not N_x * N_y");
  CMatrix g(n_x, n_y);
  for (int x = 0; x < n_x; ++x)
    for (int y = 0; y < n_y; ++y)
      g(x, y) = v(x * n_y + y);
  return g;
}

CVector from_grid(const CMatrix &grid) {
  const Eigen::Index n_y = grid.cols();
  CVector v(grid.size());
  for (Eigen::Index x = 0; x < grid.rows(); ++x)
    for (Eigen::Index y = 0; y < n_y; ++y)
      v(x * n_y + y) = grid(x, y);
  return v;
}

ChannelSet reconstruct_channel_set(const std::vector<SampledMatrix> &samples_g,
                                   const std::vector<SampledMatrix> &samples_u,
                                   const std::vector<CVector> &direct,
                                   const CompletionOptions &opts) {
  if (samples_g.empty() || samples_u.empty())
    throw DimensionError("reconstruct_channel_set: empty sample list");
  if (direct.size() != samples_u.size())
    throw DimensionError("reconstruct_channel_set: need one direct channel "
                         "per device");
  const int n_x = samples_g.front().mask.n_x();
  const int n_y = samples_g.front().mask.n_y();
  auto check = [&](const SampledMatrix &s) {
    if (s.mask.n_x() != n_x || s.mask.n_y() != n_y)
      throw DimensionError("reconstruct_channel_set: grids differ in shape");
  };
  auto complete = [&](const SampledMatrix &s, const std::string &name) {
    check(s);
    try {
      return complete_low_rank(s, opts);
    } catch (const CompletionFailure &f) {
      throw CompletionFailure(name + ": " + f.what(), f.last, f.residual);
    }
  };

  const int m = static_cast<int>(samples_g.size());
  ChannelSet ch;
  ch.ris_bs.resize(m, static_cast<Eigen::Index>(n_x) * n_y);
  for (int row = 0; row < m; ++row)
    ch.ris_bs.row(row) =
        from_grid(complete(samples_g[row], "G row " + std::to_string(row)))
            .transpose();
  for (std::size_t k = 0; k < samples_u.size(); ++k)
    ch.device_ris.push_back(
        from_grid(complete(samples_u[k], "u_" + std::to_string(k))));
  ch.direct = direct;
  ch.validate();
  return ch;
}

SampleMask make_mask(int n_x, int n_y, double fraction, Rng &rng) {
  const int n = n_x * n_y;
  if (!(fraction > 0.0 && fraction <= 1.0))
    throw DomainError("make_mask: fraction must lie in (0, 1]");
  const int count = static_cast<int>(std::lround(fraction * n));
  if (count < 1)
    throw DomainError("make_mask: fraction * N rounds to zero elements");
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  // partial Fisher-Yates
  for (int i = 0; i < count; ++i) {
    std::uniform_int_distribution<int> pick(i, n - 1);
    std::swap(idx[i], idx[pick(rng)]);
  }
  std::vector<std::pair<int, int>> active;
  active.reserve(count);
  for (int i = 0; i < count; ++i)
    active.emplace_back(idx[i] / n_y, idx[i] % n_y);
  return SampleMask(n_x, n_y, std::move(active));
}

ChannelSet estimate_channels(const ChannelSet &truth, int n_x, int n_y,
                             const SampleMask &mask, const PilotOptions &opts,
                             Rng &rng) {
  truth.validate();
  if (truth.n_elements() != static_cast<Eigen::Index>(n_x) * n_y ||
      mask.n_x() != n_x || mask.n_y() != n_y)
    throw DimensionError("estimate_channels: RIS grid does not match");
  std::normal_distribution<double> g(0.0, std::sqrt(opts.noise_variance / 2.0));
  auto observe = [&](const CMatrix &grid) {
    CMatrix y = std::conj(opts.pilot) * grid;
    if (opts.noise_variance > 0.0)
      for (Eigen::Index i = 0; i < y.size(); ++i) {
        const double re = g(rng);
        const double im = g(rng);
        y(i) += cplx(re, im);
      }
    return ls_sampled_estimate(y, opts.pilot, mask, PilotConvention::Conjugate);
  };

  std::vector<SampledMatrix> sg;
  for (Eigen::Index row = 0; row < truth.m_antennas(); ++row)
    sg.push_back(observe(to_grid(truth.ris_bs.row(row).transpose(), n_x, n_y)));
  std::vector<SampledMatrix> su;
  for (const auto &u : truth.device_ris)
    su.push_back(observe(to_grid(u, n_x, n_y)));
  return reconstruct_channel_set(sg, su, truth.direct, opts.completion);
}

} // namespace risopt
