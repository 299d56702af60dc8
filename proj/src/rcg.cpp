#include "risopt/rcg.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <sstream>

namespace risopt {

void RcgOptions::validate() const {
  if (!(c1 > 0.0 && c1 < c2 && c2 < 0.5))
    throw DomainError("RcgOptions: need 0 < c1 < c2 < 1/2");
  if (max_iters < 1 || line_search_max_bisections < 1 ||
      line_search_max_expansions < 0)
    throw DomainError("RcgOptions: iteration budgets must be positive");
  if (!(initial_step > 0.0) || !(tol >= 0.0) || !(grad_tol >= 0.0))
    throw DomainError("RcgOptions: initial_step > 0 and tolerances >= 0");
}

std::string to_string(StopReason r) {
  switch (r) {
  case StopReason::GradientSmall:
    return "gradient_small";
  case StopReason::StepSmall:
    return "step_small";
  case StopReason::MaxIterations:
    return "max_iterations";
  }
  return "unknown";
}

MonitorReport audit_trace(const RcgTrace &trace, double rel_slack) {
  MonitorReport rep;
  std::ostringstream why;
  const double c2 = trace.c2;
  const double lo = -1.0 / (1.0 - c2);
  const double hi = (2.0 * c2 - 1.0) / (1.0 - c2);
  double prev_sum = 0.0;
  for (std::size_t i = 0; i < trace.iterations.size(); ++i) {
    const RcgIterate &it = trace.iterations[i];
    if (!it.step_taken)
      continue;
    if (!(it.slope < 0.0)) {
      rep.descent = false;
      why << "iter " << it.iteration << ": non-descent slope " << it.slope
          << "; ";
    }
    if (!(it.armijo && it.curvature)) {
      rep.wolfe = false;
      why << "iter " << it.iteration << ": Wolfe flags false; ";
    }
    const double eps = 1e-9;
    if (it.descent_ratio < lo - eps || it.descent_ratio > hi + eps) {
      rep.ratio_bounded = false;
      why << "iter " << it.iteration << ": ratio " << it.descent_ratio
          << " outside [" << lo << ", " << hi << "]; ";
    }
    if (!std::isfinite(it.zoutendijk_sum) || it.zoutendijk_sum < prev_sum) {
      rep.zoutendijk_ok = false;
      why << "iter " << it.iteration << ": Zoutendijk sum not monotone/finite; ";
    }
    prev_sum = it.zoutendijk_sum;
    const double next = (i + 1 < trace.iterations.size())
                            ? trace.iterations[i + 1].value
                            : trace.final_value;
    if (next > it.value + rel_slack * std::max(1.0, std::abs(it.value))) {
      rep.monotone = false;
      why << "iter " << it.iteration << ": value rose " << it.value << " -> "
          << next << "; ";
    }
  }
  rep.detail = why.str();
  return rep;
}

LineSearchResult strong_wolfe_search(const Objective &obj, const ProductPoint &x,
                                     double value0, const TangentVector &grad0,
                                     const TangentVector &d,
                                     const RcgOptions &opts,
                                     double first_step) {
  const double slope = inner_product(grad0, d);
  if (!(slope < 0.0))
    throw InvalidDirection("strong_wolfe_search: <grad, d> = " +
                           std::to_string(slope) + " is not negative");
  if (!(norm(d) > 0.0))
    throw InvalidDirection("strong_wolfe_search: zero direction");

  const double inf = std::numeric_limits<double>::infinity();
  double lo = 0.0;
  double hi = inf;
  double alpha = first_step > 0.0 ? first_step : opts.initial_step;
  double best_armijo = 0.0;
  int bisections = 0;
  int expansions = 0;
  int evals = 0;

  while (true) {
    ++evals;
    bool armijo = false;
    try {
      ProductPoint xn = retract(x, d, alpha);
      const double fn = obj.value(xn);
      armijo = std::isfinite(fn) && fn <= value0 + opts.c1 * alpha * slope;
      if (armijo) {
        best_armijo = std::max(best_armijo, alpha);
        TangentVector gn = riemannian_gradient(xn, obj.euclidean_gradient(xn));
        // grad at xn is tangent there, so <gn, P(d)> = <gn, d>.
        const double dslope = inner_product(gn, d);
        if (std::abs(dslope) <= -opts.c2 * slope) {
          return LineSearchResult{alpha, std::move(xn), fn, std::move(gn),
                                  true, true, evals};
        }
        if (dslope < 0.0)
          lo = alpha;
        else
          hi = alpha;
      } else {
        hi = alpha;
      }
    } catch (const DegenerateRetraction &) {
      hi = alpha;
    }

    if (std::isinf(hi)) {
      if (++expansions > opts.line_search_max_expansions)
        break;
      alpha *= 2.0;
    } else {
      if (++bisections > opts.line_search_max_bisections)
        break;
      alpha = 0.5 * (lo + hi);
    }
  }
  throw LineSearchFailure("strong_wolfe_search: no strong Wolfe step within "
                          "budget",
                          best_armijo);
}

LineSearchResult strong_wolfe_search(const Objective &obj, const ProductPoint &x,
                                     const TangentVector &d,
                                     const RcgOptions &opts) {
  opts.validate();
  const double f0 = obj.value(x);
  const TangentVector g0 = riemannian_gradient(x, obj.euclidean_gradient(x));
  return strong_wolfe_search(obj, x, f0, g0, d, opts, opts.initial_step);
}

RcgResult rcg_minimize(const Objective &obj, const ProductPoint &x0,
                       const RcgOptions &opts) {
  opts.validate();
  RcgTrace trace;
  trace.c2 = opts.c2;

  ProductPoint x = x0;
  double f = obj.value(x);
  TangentVector g = riemannian_gradient(x, obj.euclidean_gradient(x));
  double gn2 = inner_product(g, g);
  double prev_gn2 = gn2;
  TangentVector dir = -g;
  double prev_slope = 0.0;
  double prev_alpha = 0.0;
  double zsum = 0.0;

  for (int i = 1; i <= opts.max_iters; ++i) {
    RcgIterate rec;
    rec.iteration = i;
    rec.value = f;
    rec.grad_norm = std::sqrt(gn2);
    rec.zoutendijk_sum = zsum;

    if (rec.grad_norm < opts.grad_tol) {
      trace.iterations.push_back(rec);
      trace.stop = StopReason::GradientSmall;
      break;
    }

    double beta = 0.0;
    if (i > 1 && !opts.steepest_descent) {
      beta = gn2 / prev_gn2;
      dir = -g + beta * project_tangent(x, dir);
    } else {
      dir = -g;
    }
    double slope = inner_product(g, dir);
    bool restarted = false;
    if (!(slope < 0.0)) {
      dir = -g;
      slope = -gn2;
      beta = 0.0;
      restarted = true;
    }

    double first = opts.initial_step;
    if (opts.adaptive_initial_step && i > 1 && prev_alpha > 0.0)
      first = std::max(prev_alpha * prev_slope / slope, 1e-12 * prev_alpha);

    LineSearchResult ls;
    try {
      ls = strong_wolfe_search(obj, x, f, g, dir, opts, first);
    } catch (const LineSearchFailure &) {
      if (beta == 0.0 && first == opts.initial_step) {
        trace.iterations.push_back(rec);
        trace.final_value = f;
        trace.final_grad_norm = std::sqrt(gn2);
        throw SolverStalled("rcg_minimize: line search failed on a "
                            "steepest-descent step at iteration " +
                                std::to_string(i),
                            std::move(trace), std::move(x));
      }
      dir = -g;
      slope = -gn2;
      beta = 0.0;
      restarted = true;
      try {
        ls = strong_wolfe_search(obj, x, f, g, dir, opts, opts.initial_step);
      } catch (const LineSearchFailure &) {
        trace.iterations.push_back(rec);
        trace.final_value = f;
        trace.final_grad_norm = std::sqrt(gn2);
        throw SolverStalled("rcg_minimize: line search failed on a "
                            "steepest-descent restart at iteration " +
                                std::to_string(i),
                            std::move(trace), std::move(x));
      }
    }

    const double dn2 = inner_product(dir, dir);
    zsum += slope * slope / dn2;
    rec.alpha = ls.alpha;
    rec.beta = beta;
    rec.slope = slope;
    rec.direction_norm = std::sqrt(dn2);
    rec.armijo = ls.armijo;
    rec.curvature = ls.curvature;
    rec.restarted = restarted;
    rec.step_taken = true;
    rec.zoutendijk_sum = zsum;
    rec.descent_ratio = slope / gn2;
    rec.line_search_evals = ls.evaluations;
    trace.iterations.push_back(rec);

    const double moved = squared_distance(ls.x_next, x);
    prev_alpha = ls.alpha;
    prev_slope = slope;
    prev_gn2 = gn2;
    x = std::move(ls.x_next);
    f = ls.value;
    g = std::move(ls.grad);
    gn2 = inner_product(g, g);

    if (moved <= opts.tol) {
      trace.stop = StopReason::StepSmall;
      break;
    }
  }

  trace.final_value = f;
  trace.final_grad_norm = std::sqrt(gn2);
  return {std::move(x), std::move(trace)};
}

double check_gradient(const Objective &obj, const ProductPoint &x, int trials,
                      std::uint64_t seed, double h) {
  if (trials < 1)
    throw DomainError("check_gradient: trials must be >= 1");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const TangentVector g = riemannian_gradient(x, obj.euclidean_gradient(x));
  const double gnorm = norm(g);

  double worst = 0.0;
  for (int t = 0; t < trials; ++t) {
    AmbientPair raw{CVector(x.theta.size()), CMatrix(x.w.rows(), x.w.cols())};
    for (Eigen::Index i = 0; i < raw.theta.size(); ++i)
      raw.theta(i) = cplx(gauss(rng), gauss(rng));
    for (Eigen::Index k = 0; k < raw.w.cols(); ++k)
      for (Eigen::Index i = 0; i < raw.w.rows(); ++i)
        raw.w(i, k) = cplx(gauss(rng), gauss(rng));
    TangentVector v = project_tangent(x, raw);
    const double vn = norm(v);
    if (vn == 0.0)
      continue;
    v *= 1.0 / vn;

    const double fp = obj.value(retract(x, v, h));
    const double fm = obj.value(retract(x, -v, h));
    const double fd = (fp - fm) / (2.0 * h);
    const double an = inner_product(g, v);
    const double scale = std::max(std::abs(an), gnorm);
    const double err = scale > 0.0 ? std::abs(fd - an) / scale : std::abs(fd);
    worst = std::max(worst, err);
  }
  return worst;
}

} // namespace risopt
