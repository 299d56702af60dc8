#pragma once

// Shared fixtures and independent oracles for the test binaries.

#include "risopt/channel.hpp"
#include "risopt/estimation.hpp"
#include "risopt/power_control.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <functional>
#include <limits>
#include <numeric>
#include <vector>

namespace risopt::oracle {

inline CVector gaussian_vector(Eigen::Index n, Rng &rng, double scale = 1.0) {
  std::normal_distribution<double> g(0.0, scale);
  CVector v(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double re = g(rng);
    const double im = g(rng);
    v(i) = cplx(re, im);
  }
  return v;
}

inline CMatrix gaussian_matrix(Eigen::Index r, Eigen::Index c, Rng &rng,
                               double scale = 1.0) {
  CMatrix m(r, c);
  for (Eigen::Index j = 0; j < c; ++j)
    m.col(j) = gaussian_vector(r, rng, scale);
  return m;
}

/// Unit-scale random channels, handy when physical path loss is irrelevant.
inline ChannelSet random_channels(int k, int m, int n, Rng &rng,
                                  double scale = 1.0) {
  ChannelSet ch;
  for (int i = 0; i < k; ++i) {
    ch.direct.push_back(gaussian_vector(m, rng, scale));
    ch.device_ris.push_back(gaussian_vector(n, rng, 1.0));
  }
  ch.ris_bs = gaussian_matrix(m, n, rng, scale);
  return ch;
}

/// Brute-force LP oracle for
///   min sum p  s.t.  p_k A_kk / gamma - sum_{j != k} p_j A_jk >= sigma^2,
///                    0 <= p_k <= p_max
/// by enumerating every vertex (K active constraints out of 3K). Returns
/// +inf when the polytope is empty.
inline double lp_vertex_oracle(const Eigen::MatrixXd &a, double gamma,
                               double sigma2, double p_max) {
  const int k = static_cast<int>(a.rows());
  // rows: SINR constraints, then p >= 0, then p <= p_max, all as c^T p >= b
  const int rows = 3 * k;
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(rows, k);
  Eigen::VectorXd b(rows);
  for (int kk = 0; kk < k; ++kk) {
    for (int j = 0; j < k; ++j)
      c(kk, j) = j == kk ? a(kk, kk) / gamma : -a(j, kk);
    b(kk) = sigma2;
    c(k + kk, kk) = 1.0;
    b(k + kk) = 0.0;
    c(2 * k + kk, kk) = -1.0;
    b(2 * k + kk) = -p_max;
  }
  double best = std::numeric_limits<double>::infinity();
  std::vector<int> pick(k);
  // iterate over k-subsets of rows
  std::vector<bool> sel(rows, false);
  std::fill(sel.begin(), sel.begin() + k, true);
  do {
    int t = 0;
    for (int r = 0; r < rows; ++r)
      if (sel[r])
        pick[t++] = r;
    Eigen::MatrixXd sys(k, k);
    Eigen::VectorXd rhs(k);
    for (int i = 0; i < k; ++i) {
      sys.row(i) = c.row(pick[i]);
      rhs(i) = b(pick[i]);
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(sys);
    if (!lu.isInvertible())
      continue;
    const Eigen::VectorXd p = lu.solve(rhs);
    const Eigen::VectorXd slack = c * p - b;
    const double scale = std::max(1.0, b.cwiseAbs().maxCoeff());
    if ((slack.array() >= -1e-12 * scale).all())
      best = std::min(best, p.sum());
  } while (std::prev_permutation(sel.begin(), sel.end()));
  return best;
}

/// A rank-1 matrix with no zero entries is determined by its samples iff the
/// bipartite row/column graph of the mask is connected.
inline bool rank_one_identifiable(const SampleMask &mask) {
  const int r = mask.n_x();
  const int c = mask.n_y();
  std::vector<int> parent(r + c);
  std::iota(parent.begin(), parent.end(), 0);
  std::function<int(int)> find = [&](int v) {
    return parent[v] == v ? v : parent[v] = find(parent[v]);
  };
  for (const auto &[x, y] : mask.active())
    parent[find(x)] = find(r + y);
  for (int v = 1; v < r + c; ++v)
    if (find(v) != find(0))
      return false;
  return true;
}

/// a_x a_y^T built from two uniform-linear-array vectors with random spatial
/// frequencies and a random complex gain, the shape of a LoS RIS channel.
inline CMatrix steering_rank_one(int n_x, int n_y, Rng &rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::normal_distribution<double> g;
  const double fx = u(rng);
  const double fy = u(rng);
  const double gr = g(rng);
  const double gi = g(rng);
  CVector ax(n_x), ay(n_y);
  for (int i = 0; i < n_x; ++i)
    ax(i) = std::polar(1.0, -M_PI * i * fx);
  for (int i = 0; i < n_y; ++i)
    ay(i) = std::polar(1.0, -M_PI * i * fy);
  return cplx(gr, gi) * ax * ay.transpose();
}

} // namespace risopt::oracle
