#pragma once

// Scenario geometry and Rician channel synthesis for the RIS-aided uplink.
//
// Planar layout: BS at the origin, RIS at (R, 0), device k at (d_h, y_k) with
// y_k ~ U[-d_v, d_v]. The BS is a uniform linear array whose angles are
// measured from the +x axis; the RIS is an N_x x N_y planar array. For a link
// leaving/arriving at the RIS with in-plane offset (dx, dy) we use azimuth
// psi = atan2(dy, dx) and elevation phi = pi/2 (all links lie in the
// horizontal plane), so the x-array phase progression is cos(psi) and the
// y-array progression is sin(psi).
//
// Element ordering on the RIS: element n <-> (x, y) with n = x * N_y + y,
// which matches a_RIS = a_x (kron) a_y.

#include "risopt/manifold.hpp"

#include <cstdint>
#include <limits>
#include <random>
#include <vector>

namespace risopt {

using Rng = std::mt19937_64;

struct SystemConfig {
  int k_devices = 2;
  int m_antennas = 4;
  int n_x = 8;
  int n_y = 8;
  double bs_ris_distance = 65.0; // m
  double horiz_distance = 57.0;  // m
  double vert_spread = 3.0;      // m
  double rician_d = 0.0;
  double rician_u = 10.0;
  double rician_g = std::numeric_limits<double>::infinity();
  double pathloss_ref_db = -30.0;
  double ref_distance = 1.0; // m
  double alpha_d = 3.8;
  double alpha_u = 2.8;
  double alpha_g = 2.0;
  double noise_power = 1e-9; // W, -60 dBm
  double rate_min = 0.3;     // bps/Hz
  double p_max = 1.0;        // W
  std::uint64_t rng_seed = 1;

  int n_elements() const { return n_x * n_y; }
  /// 2^{R_min} - 1, the SINR target.
  double sinr_target() const;
  /// Throws ConfigError when an invariant is violated.
  void validate() const;
};

/// One realization of every channel in the network.
struct ChannelSet {
  std::vector<CVector> direct;     // d_k, length M
  std::vector<CVector> device_ris; // u_k, length N
  CMatrix ris_bs;                  // G, M x N

  int k_devices() const { return static_cast<int>(direct.size()); }
  Eigen::Index m_antennas() const { return ris_bs.rows(); }
  Eigen::Index n_elements() const { return ris_bs.cols(); }

  /// Throws DimensionError if the blocks disagree in shape.
  void validate() const;
  /// FNV-1a hash over the raw bytes, used to prove paired comparisons.
  std::uint64_t hash() const;
};

/// Device positions drawn alongside a ChannelSet.
struct Geometry {
  std::vector<double> device_y; // y_k
};

/// [1, e^{-j pi sin a}, ..., e^{-j pi (m-1) sin a}]
CVector steering_bs(int m, double angle);

/// a_x (kron) a_y with a_x[i] = e^{-j pi i cos(psi) sin(phi)} and
/// a_y[i] = e^{-j pi i sin(psi) sin(phi)}.
CVector steering_ris(int n_x, int n_y, double azimuth, double elevation);

/// Linear power gain C0 (d / D0)^{-alpha}. Throws DomainError for d <= 0.
double path_loss(double distance, double exponent, const SystemConfig &cfg);

/// Draws one realization. Deterministic in the state of `rng`.
ChannelSet draw_channels(const SystemConfig &cfg, Rng &rng,
                         Geometry *geometry = nullptr);

/// Convenience: seeds a fresh generator from cfg.rng_seed.
ChannelSet draw_channels(const SystemConfig &cfg);

/// h_k = d_k + G diag(u_k) theta. `theta` need not be unit modulus.
CVector effective_channel(const ChannelSet &ch, const CVector &theta, int k);

/// Cascaded matrices B_k = G diag(u_k), so h_k = d_k + B_k theta.
std::vector<CMatrix> cascaded_channels(const ChannelSet &ch);

/// Copy of `ch` with G replaced by zeros (the no-RIS system).
ChannelSet without_ris(const ChannelSet &ch);

} // namespace risopt
