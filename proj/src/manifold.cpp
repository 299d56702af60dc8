#include "risopt/manifold.hpp"

#include "risopt/errors.hpp"

#include <cmath>
#include <string>

namespace risopt {

namespace {

void check_same_shape(const CVector &a, const CMatrix &aw, const CVector &b,
                      const CMatrix &bw, const char *what) {
  if (a.size() != b.size() || aw.rows() != bw.rows() ||
      aw.cols() != bw.cols()) {
    throw DimensionError(std::string(what) + ": shape mismatch (theta " +
                         std::to_string(a.size()) + " vs " +
                         std::to_string(b.size()) + ", W " +
                         std::to_string(aw.rows()) + "x" +
                         std::to_string(aw.cols()) + " vs " +
                         std::to_string(bw.rows()) + "x" +
                         std::to_string(bw.cols()) + ")");
  }
}

} // namespace

bool ProductPoint::on_manifold(double tol) const {
  for (Eigen::Index i = 0; i < theta.size(); ++i)
    if (std::abs(std::abs(theta(i)) - 1.0) > tol)
      return false;
  for (Eigen::Index k = 0; k < w.cols(); ++k)
    if (std::abs(w.col(k).norm() - 1.0) > tol)
      return false;
  return true;
}

TangentVector TangentVector::zeros_like(const ProductPoint &x) {
  return {CVector::Zero(x.theta.size()), CMatrix::Zero(x.w.rows(), x.w.cols())};
}

TangentVector &TangentVector::operator+=(const TangentVector &o) {
  check_same_shape(d_theta, d_w, o.d_theta, o.d_w, "TangentVector::operator+=");
  d_theta += o.d_theta;
  d_w += o.d_w;
  return *this;
}

TangentVector &TangentVector::operator*=(double s) {
  d_theta *= s;
  d_w *= s;
  return *this;
}

ProductPoint make_point(CVector theta, CMatrix w) {
  ProductPoint x{std::move(theta), std::move(w)};
  if (!x.on_manifold())
    throw DomainError("make_point: entries violate unit-modulus or unit-norm "
                      "constraints");
  return x;
}

ProductPoint normalize_to_manifold(const AmbientPair &raw) {
  ProductPoint x{raw.theta, raw.w};
  for (Eigen::Index i = 0; i < x.theta.size(); ++i) {
    const double r = std::abs(x.theta(i));
    if (r == 0.0)
      throw DegenerateRetraction("normalize_to_manifold: zero phase entry");
    x.theta(i) /= r;
  }
  for (Eigen::Index k = 0; k < x.w.cols(); ++k) {
    const double r = x.w.col(k).norm();
    if (r == 0.0)
      throw DegenerateRetraction("normalize_to_manifold: zero beam column");
    x.w.col(k) /= r;
  }
  return x;
}

double inner_product(const TangentVector &a, const TangentVector &b) {
  check_same_shape(a.d_theta, a.d_w, b.d_theta, b.d_w, "inner_product");
  return a.d_theta.dot(b.d_theta).real() +
         (a.d_w.array().conjugate() * b.d_w.array()).sum().real();
}

double norm(const TangentVector &a) { return std::sqrt(inner_product(a, a)); }

double ambient_inner_product(const AmbientPair &a, const AmbientPair &b) {
  check_same_shape(a.theta, a.w, b.theta, b.w, "ambient_inner_product");
  return a.theta.dot(b.theta).real() +
         (a.w.array().conjugate() * b.w.array()).sum().real();
}

TangentVector project_tangent(const ProductPoint &base,
                              const AmbientPair &ambient) {
  check_same_shape(base.theta, base.w, ambient.theta, ambient.w,
                   "project_tangent");
  TangentVector v;
  const RVector radial =
      (base.theta.array().conjugate() * ambient.theta.array()).real();
  v.d_theta = ambient.theta.array() - radial.array().cast<cplx>() *
                                          base.theta.array();
  // ddiag(Re{W^H U}) computed columnwise without forming W^H U.
  v.d_w = ambient.w;
  for (Eigen::Index k = 0; k < base.w.cols(); ++k) {
    const double c = base.w.col(k).dot(ambient.w.col(k)).real();
    v.d_w.col(k) -= c * base.w.col(k);
  }
  return v;
}

TangentVector project_tangent(const ProductPoint &base,
                              const TangentVector &v) {
  return project_tangent(base, AmbientPair{v.d_theta, v.d_w});
}

TangentVector riemannian_gradient(const ProductPoint &base,
                                  const AmbientPair &euclidean_grad) {
  return project_tangent(base, euclidean_grad);
}

ProductPoint retract(const ProductPoint &base, const TangentVector &v,
                     double step) {
  check_same_shape(base.theta, base.w, v.d_theta, v.d_w, "retract");
  if (step == 0.0)
    return base;

  ProductPoint out{base.theta + step * v.d_theta, base.w + step * v.d_w};
  for (Eigen::Index i = 0; i < out.theta.size(); ++i) {
    const double r = std::abs(out.theta(i));
    if (!(r > 0.0) || !std::isfinite(r))
      throw DegenerateRetraction("retract: phase entry " + std::to_string(i) +
                                 " collapsed to zero modulus");
    out.theta(i) /= r;
  }
  for (Eigen::Index k = 0; k < out.w.cols(); ++k) {
    const double r = out.w.col(k).norm();
    if (!(r > 0.0) || !std::isfinite(r))
      throw DegenerateRetraction("retract: beam column " + std::to_string(k) +
                                 " collapsed to zero norm");
    out.w.col(k) /= r;
  }
  return out;
}

double tangency_residual(const ProductPoint &base, const TangentVector &v) {
  check_same_shape(base.theta, base.w, v.d_theta, v.d_w, "tangency_residual");
  double worst = 0.0;
  for (Eigen::Index i = 0; i < base.theta.size(); ++i)
    worst = std::max(worst,
                     std::abs((std::conj(v.d_theta(i)) * base.theta(i)).real()));
  for (Eigen::Index k = 0; k < base.w.cols(); ++k)
    worst = std::max(worst, std::abs(base.w.col(k).dot(v.d_w.col(k)).real()));
  return worst;
}

double squared_distance(const ProductPoint &a, const ProductPoint &b) {
  check_same_shape(a.theta, a.w, b.theta, b.w, "squared_distance");
  return (a.theta - b.theta).squaredNorm() + (a.w - b.w).squaredNorm();
}

} // namespace risopt
