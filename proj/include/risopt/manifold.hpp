#pragma once

// Geometry of the product manifold M = M_theta x M_W, where
//   M_theta = { theta in C^N : |theta_n| = 1 }           (complex circle)
//   M_W     = { W in C^{MxK} : ||w_k|| = 1 for every k }  (complex oblique)
// equipped with the real metric <a, b> = Re{a_theta^H b_theta} +
// Re{tr(a_W^H b_W)}.

#include <Eigen/Dense>

#include <complex>
#include <random>

namespace risopt {

using cplx = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;
using RVector = Eigen::VectorXd;

inline constexpr double kManifoldTol = 1e-12;
inline constexpr double kTangentTol = 1e-10;

/// Unconstrained vector/matrix pair living in the ambient space C^N x C^{MxK}.
/// Used for Euclidean gradients and for raw directions before projection.
struct AmbientPair {
  CVector theta;
  CMatrix w;
};

/// A point on the product manifold. Either block may be empty (N = 0 or
/// K = 0) so that single-factor problems use the same machinery.
struct ProductPoint {
  CVector theta;
  CMatrix w;

  /// Entrywise |theta_n| = 1 and unit column norms, both within `tol`.
  bool on_manifold(double tol = kManifoldTol) const;
};

/// A direction in the tangent space at some ProductPoint. The anchor is
/// identified by shape only; callers keep track of which point it belongs to.
struct TangentVector {
  CVector d_theta;
  CMatrix d_w;

  static TangentVector zeros_like(const ProductPoint &x);

  TangentVector &operator+=(const TangentVector &o);
  TangentVector &operator*=(double s);
  friend TangentVector operator+(TangentVector a, const TangentVector &b) {
    return a += b;
  }
  friend TangentVector operator*(double s, TangentVector a) { return a *= s; }
  friend TangentVector operator-(const TangentVector &a) { return -1.0 * a; }
};

/// Builds a point from raw arrays after checking the manifold invariants.
/// Throws DomainError if an entry is off the manifold by more than 1e-12.
ProductPoint make_point(CVector theta, CMatrix w);

/// Normalizes each phase entry and each column; useful for sampling.
ProductPoint normalize_to_manifold(const AmbientPair &raw);

/// Random point: uniform phases, complex-Gaussian columns normalized.
template <class Rng>
ProductPoint random_point(Eigen::Index n, Eigen::Index m, Eigen::Index k,
                          Rng &rng) {
  std::uniform_real_distribution<double> phase(0.0, 2.0 * M_PI);
  std::normal_distribution<double> gauss(0.0, 1.0);
  AmbientPair raw{CVector(n), CMatrix(m, k)};
  for (Eigen::Index i = 0; i < n; ++i)
    raw.theta(i) = std::polar(1.0, phase(rng));
  for (Eigen::Index j = 0; j < k; ++j)
    for (Eigen::Index i = 0; i < m; ++i)
      raw.w(i, j) = cplx(gauss(rng), gauss(rng));
  return normalize_to_manifold(raw);
}

/// Re{a^H b} over both blocks. Throws DimensionError on shape mismatch.
double inner_product(const TangentVector &a, const TangentVector &b);
double norm(const TangentVector &a);

/// Same metric evaluated on ambient pairs.
double ambient_inner_product(const AmbientPair &a, const AmbientPair &b);

/// Orthogonal projection onto T_base M:
///   circle:  u - Re{conj(theta) .* u} .* theta
///   oblique: U - W ddiag(Re{W^H U})
TangentVector project_tangent(const ProductPoint &base,
                              const AmbientPair &ambient);

/// Re-anchors a tangent vector at another point by projection (the vector
/// transport used by the conjugate-gradient update).
TangentVector project_tangent(const ProductPoint &base,
                              const TangentVector &v);

/// Riemannian gradient from a Euclidean one. Identical to project_tangent.
TangentVector riemannian_gradient(const ProductPoint &base,
                                  const AmbientPair &euclidean_grad);

/// Nearest-point retraction of base + step * v. Phase entries are divided by
/// their modulus, beam columns by their own Euclidean norm. step = 0 returns
/// base unchanged. Throws DegenerateRetraction when an entry or column
/// vanishes.
ProductPoint retract(const ProductPoint &base, const TangentVector &v,
                     double step);

/// Tangency residuals: max_n |Re{conj(v_n) theta_n}| and
/// max_k |Re{w_k^H v_k}|.
double tangency_residual(const ProductPoint &base, const TangentVector &v);

/// Squared ambient distance ||a - b||^2 over both blocks.
double squared_distance(const ProductPoint &a, const ProductPoint &b);

} // namespace risopt
