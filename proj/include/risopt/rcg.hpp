#pragma once

// Riemannian conjugate gradient on the phase/beam product manifold with
// Fletcher-Reeves updates and a strong Wolfe line search. Every run records
// the quantities used by the convergence analysis (Zoutendijk partial sums and
// the gradient/direction ratio bound) so tests can audit them.

#include "risopt/errors.hpp"
#include "risopt/manifold.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace risopt {

/// Smooth cost on the product manifold together with its Euclidean gradient
/// with respect to the real metric Re{<., .>}.
struct Objective {
  std::function<double(const ProductPoint &)> value;
  std::function<AmbientPair(const ProductPoint &)> euclidean_gradient;
};

struct RcgOptions {
  int max_iters = 500;
  /// Stop once ||x_{i+1} - x_i||^2 <= tol.
  double tol = 1e-10;
  /// Stop once the Riemannian gradient norm drops below this.
  double grad_tol = 1e-6;
  double c1 = 1e-4;
  double c2 = 0.1;
  int line_search_max_bisections = 50;
  int line_search_max_expansions = 60;
  double initial_step = 1.0;
  /// Scale later first trial steps by the previous slope ratio.
  bool adaptive_initial_step = true;
  /// Force beta = 0 at every iteration (plain Riemannian steepest descent).
  bool steepest_descent = false;

  /// Throws DomainError unless 0 < c1 < c2 < 1/2 and the budgets are positive.
  void validate() const;
};

struct RcgIterate {
  int iteration = 0;
  double value = 0.0;     // L at the start of the iteration
  double grad_norm = 0.0; // ||grad L||
  double alpha = 0.0;     // accepted step, 0 when no step was taken
  double beta = 0.0;
  double slope = 0.0; // <grad, D>
  double direction_norm = 0.0;
  bool armijo = false;
  bool curvature = false;
  bool restarted = false;
  bool step_taken = false;
  double zoutendijk_sum = 0.0; // sum_i <grad_i, D_i>^2 / ||D_i||^2
  double descent_ratio = 0.0;  // <grad_i, D_i> / ||grad_i||^2
  int line_search_evals = 0;
};

enum class StopReason { GradientSmall, StepSmall, MaxIterations };

std::string to_string(StopReason r);

struct RcgTrace {
  std::vector<RcgIterate> iterations;
  StopReason stop = StopReason::MaxIterations;
  double final_value = 0.0;
  double final_grad_norm = 0.0;
  double c2 = 0.1;

  int iteration_count() const { return static_cast<int>(iterations.size()); }
};

struct MonitorReport {
  bool monotone = true;         // values non-increasing along accepted steps
  bool wolfe = true;            // both Wolfe flags set on every accepted step
  bool ratio_bounded = true;    // descent ratio inside the c2 bound
  bool zoutendijk_ok = true;    // partial sums finite and non-decreasing
  bool descent = true;          // <grad, D> < 0 whenever a step was taken
  std::string detail;

  bool ok() const {
    return monotone && wolfe && ratio_bounded && zoutendijk_ok && descent;
  }
};

/// Audits a trace against the convergence-analysis invariants. `rel_slack`
/// absorbs floating-point noise in the monotonicity check.
MonitorReport audit_trace(const RcgTrace &trace, double rel_slack = 1e-12);

class InvalidDirection : public Error {
public:
  using Error::Error;
};

class LineSearchFailure : public Error {
public:
  LineSearchFailure(const std::string &what, double best_armijo_alpha)
      : Error(what), best_armijo_alpha(best_armijo_alpha) {}
  /// Largest step that met the sufficient-decrease rule, or 0 if none did.
  double best_armijo_alpha;
};

class SolverStalled : public Error {
public:
  SolverStalled(const std::string &what, RcgTrace trace, ProductPoint last)
      : Error(what), trace(std::move(trace)), last(std::move(last)) {}
  RcgTrace trace;
  ProductPoint last;
};

struct LineSearchResult {
  double alpha = 0.0;
  ProductPoint x_next;
  double value = 0.0;
  TangentVector grad; // Riemannian gradient at x_next
  bool armijo = false;
  bool curvature = false;
  int evaluations = 0;
};

/// Finds alpha > 0 with
///   L(R_x(alpha d)) <= L(x) + c1 alpha <grad, d>
///   |<grad L(R_x(alpha d)), P(d)>| <= -c2 <grad, d>
/// by expanding (doubling) and then bisecting a bracket. `value0` and `grad0`
/// are L(x) and the Riemannian gradient at x. Throws InvalidDirection if d is
/// not a descent direction, LineSearchFailure if the budget runs out.
LineSearchResult strong_wolfe_search(const Objective &obj, const ProductPoint &x,
                                     double value0, const TangentVector &grad0,
                                     const TangentVector &d,
                                     const RcgOptions &opts,
                                     double first_step);

/// Convenience overload that evaluates L(x) and its gradient and starts at
/// opts.initial_step.
LineSearchResult strong_wolfe_search(const Objective &obj, const ProductPoint &x,
                                     const TangentVector &d,
                                     const RcgOptions &opts);

struct RcgResult {
  ProductPoint x;
  RcgTrace trace;
};

/// Fletcher-Reeves Riemannian conjugate gradient. Throws SolverStalled when
/// even a steepest-descent step cannot satisfy the line search.
RcgResult rcg_minimize(const Objective &obj, const ProductPoint &x0,
                       const RcgOptions &opts = {});

/// Worst relative mismatch between the central difference
/// [L(R(x, h v)) - L(R(x, -h v))] / 2h and <grad, v> over `trials` random unit
/// tangent directions. Errors are measured relative to
/// max(|<grad, v>|, ||grad||), so a vanishing directional derivative does not
/// blow up the ratio.
double check_gradient(const Objective &obj, const ProductPoint &x, int trials,
                      std::uint64_t seed = 12345, double h = 1e-5);

} // namespace risopt
