#include "risopt/channel.hpp"

#include "risopt/errors.hpp"

#include <cmath>
#include <cstring>

namespace risopt {

namespace {

// Weights (LoS, NLoS) of a Rician mixture with factor kappa.
std::pair<double, double> rician_weights(double kappa) {
  if (std::isinf(kappa))
    return {1.0, 0.0};
  return {std::sqrt(kappa / (kappa + 1.0)), std::sqrt(1.0 / (kappa + 1.0))};
}

// CN(0, 1) entries.
CVector complex_gaussian(Eigen::Index n, Rng &rng) {
  std::normal_distribution<double> g(0.0, std::sqrt(0.5));
  CVector v(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double re = g(rng);
    const double im = g(rng);
    v(i) = cplx(re, im);
  }
  return v;
}

CVector ula(int n, double spatial_freq) {
  CVector a(n);
  for (int i = 0; i < n; ++i)
    a(i) = std::polar(1.0, -M_PI * i * spatial_freq);
  return a;
}

} // namespace

double SystemConfig::sinr_target() const { return std::exp2(rate_min) - 1.0; }

void SystemConfig::validate() const {
  if (k_devices < 1 || m_antennas < 1 || n_x < 1 || n_y < 1)
    throw ConfigError("SystemConfig: counts must be >= 1");
  if (!(bs_ris_distance > 0.0) || !(horiz_distance > 0.0) ||
      !(vert_spread >= 0.0) || !(ref_distance > 0.0))
    throw ConfigError("SystemConfig: distances must be positive");
  if (!(rician_d >= 0.0) || !(rician_u >= 0.0) || !(rician_g >= 0.0))
    throw ConfigError("SystemConfig: Rician factors must be >= 0");
  if (!(p_max > 0.0) || !(noise_power > 0.0))
    throw ConfigError("SystemConfig: p_max and noise_power must be positive");
  if (!(rate_min >= 0.0))
    throw ConfigError("SystemConfig: rate_min must be >= 0");
}

void ChannelSet::validate() const {
  if (direct.size() != device_ris.size() || direct.empty())
    throw DimensionError("ChannelSet: need one direct and one RIS channel per "
                         "device");
  for (std::size_t k = 0; k < direct.size(); ++k) {
    if (direct[k].size() != ris_bs.rows())
      throw DimensionError("ChannelSet: d_" + std::to_string(k) +
                           " length differs from the number of BS antennas");
    if (device_ris[k].size() != ris_bs.cols())
      throw DimensionError("ChannelSet: u_" + std::to_string(k) +
                           " length differs from the number of RIS elements");
  }
}

std::uint64_t ChannelSet::hash() const {
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&h](const cplx *data, Eigen::Index n) {
    const auto *bytes = reinterpret_cast<const unsigned char *>(data);
    for (std::size_t i = 0; i < static_cast<std::size_t>(n) * sizeof(cplx);
         ++i) {
      h ^= bytes[i];
      h *= 1099511628211ull;
    }
  };
  for (const auto &d : direct)
    mix(d.data(), d.size());
  for (const auto &u : device_ris)
    mix(u.data(), u.size());
  mix(ris_bs.data(), ris_bs.size());
  return h;
}

CVector steering_bs(int m, double angle) {
  if (m < 1)
    throw DomainError("steering_bs: m must be >= 1");
  return ula(m, std::sin(angle));
}

CVector steering_ris(int n_x, int n_y, double azimuth, double elevation) {
  if (n_x < 1 || n_y < 1)
    throw DomainError("steering_ris: array dimensions must be >= 1");
  const CVector ax = ula(n_x, std::cos(azimuth) * std::sin(elevation));
  const CVector ay = ula(n_y, std::sin(azimuth) * std::sin(elevation));
  CVector a(n_x * n_y);
  for (int x = 0; x < n_x; ++x)
    for (int y = 0; y < n_y; ++y)
      a(x * n_y + y) = ax(x) * ay(y);
  return a;
}

double path_loss(double distance, double exponent, const SystemConfig &cfg) {
  if (!(distance > 0.0))
    throw DomainError("path_loss: distance must be positive");
  return std::pow(10.0, cfg.pathloss_ref_db / 10.0) *
         std::pow(distance / cfg.ref_distance, -exponent);
}

ChannelSet draw_channels(const SystemConfig &cfg, Rng &rng,
                         Geometry *geometry) {
  cfg.validate();
  const int k_dev = cfg.k_devices;
  const int m = cfg.m_antennas;
  const int n = cfg.n_elements();
  constexpr double kInPlane = M_PI / 2.0;

  std::uniform_real_distribution<double> offset(-cfg.vert_spread,
                                                cfg.vert_spread);
  std::vector<double> ys(k_dev);
  for (auto &y : ys)
    y = cfg.vert_spread > 0.0 ? offset(rng) : 0.0;

  ChannelSet ch;
  ch.direct.resize(k_dev);
  ch.device_ris.resize(k_dev);

  const auto [los_d, nlos_d] = rician_weights(cfg.rician_d);
  const auto [los_u, nlos_u] = rician_weights(cfg.rician_u);
  const auto [los_g, nlos_g] = rician_weights(cfg.rician_g);

  for (int k = 0; k < k_dev; ++k) {
    const double dx_bs = cfg.horiz_distance;
    const double dy = ys[k];
    const double beta_d =
        path_loss(std::hypot(dx_bs, dy), cfg.alpha_d, cfg);
    CVector d = los_d * steering_bs(m, std::atan2(dy, dx_bs));
    if (nlos_d > 0.0)
      d += nlos_d * complex_gaussian(m, rng);
    ch.direct[k] = std::sqrt(beta_d) * d;

    const double dx_ris = cfg.horiz_distance - cfg.bs_ris_distance;
    const double beta_u = path_loss(std::hypot(dx_ris, dy), cfg.alpha_u, cfg);
    CVector u = los_u * steering_ris(cfg.n_x, cfg.n_y, std::atan2(dy, dx_ris),
                                     kInPlane);
    if (nlos_u > 0.0)
      u += nlos_u * complex_gaussian(n, rng);
    ch.device_ris[k] = std::sqrt(beta_u) * u;
  }

  const double beta_g = path_loss(cfg.bs_ris_distance, cfg.alpha_g, cfg);
  // BS sees the RIS along +x; the RIS sees the BS along -x.
  const CVector a_bs = steering_bs(m, 0.0);
  const CVector a_ris = steering_ris(cfg.n_x, cfg.n_y, M_PI, kInPlane);
  CMatrix g = los_g * (a_bs * a_ris.adjoint());
  if (nlos_g > 0.0) {
    for (int col = 0; col < n; ++col)
      g.col(col) += nlos_g * complex_gaussian(m, rng);
  }
  ch.ris_bs = std::sqrt(beta_g) * g;

  if (geometry)
    geometry->device_y = ys;
  return ch;
}

ChannelSet draw_channels(const SystemConfig &cfg) {
  Rng rng(cfg.rng_seed);
  return draw_channels(cfg, rng);
}

CVector effective_channel(const ChannelSet &ch, const CVector &theta, int k) {
  if (k < 0 || k >= ch.k_devices())
    throw DimensionError("effective_channel: device index " +
                         std::to_string(k) + " out of range");
  if (theta.size() != ch.n_elements())
    throw DimensionError("effective_channel: theta length mismatch");
  return ch.direct[k] +
         ch.ris_bs * (ch.device_ris[k].array() * theta.array()).matrix();
}

std::vector<CMatrix> cascaded_channels(const ChannelSet &ch) {
  std::vector<CMatrix> out;
  out.reserve(ch.device_ris.size());
  for (const auto &u : ch.device_ris)
    out.push_back(ch.ris_bs * u.asDiagonal());
  return out;
}

ChannelSet without_ris(const ChannelSet &ch) {
  ChannelSet out = ch;
  out.ris_bs.setZero();
  return out;
}

} // namespace risopt
