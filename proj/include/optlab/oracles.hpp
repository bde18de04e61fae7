#pragma once

#include <iosfwd>
#include <vector>

#include "optlab/optimizers.hpp"
#include "optlab/problems.hpp"

namespace optlab {

// Terminal period-2 oscillation of plain descent on lambda1*||.||_1.
// Per coordinate the iterate settles onto {entry, rebound} where entry keeps
// the sign of beta0[k], |entry| lies in (0, alpha*lambda1), and
// rebound = entry - sign(beta0[k]) * alpha * lambda1.
struct LimitCycle {
  Vector entry;
  Vector rebound;
  std::vector<long> settle;  // first iteration sitting on entry, per coordinate
  long settle_iter;          // max over coordinates
};

// Replays the exact scalar float recursion per coordinate until the cycle is
// bit-stable, so simulated tails match the prediction to rounding error.
// Throws std::domain_error if a coordinate starts at or lands on exact 0.
LimitCycle lasso_limit_cycle(const Vector& beta0, double alpha, double lambda1);

// True when every iterate in the closing `window` satisfies
// ||beta_t - beta_{t+2}||_inf <= tol. Needs stored iterates.
bool period2_tail(const Trajectory& traj, long window = 100, double tol = 1e-9);

// Worst-case tail loss level of constant-rate descent on an L-Lipschitz
// convex loss: min over the tail cannot exceed f* + alpha * L^2.
double unstable_bound(double lipschitz, double alpha);

// Max sampled difference quotient |f(x)-f(y)| / ||x-y||_2 over random pairs
// drawn uniformly from [-radius, radius]^P. A lower bound on the true L.
double lipschitz_estimate(const Problem& p, long samples, double radius, SeededRng& rng);

double l1_toy_lipschitz(double lambda1, Index dim);        // lambda1 * sqrt(dim)
double huber_lipschitz_bound(const HuberRegression& p);    // (delta/N) * sum_i ||z_i||_2

// Dominant Hessian eigenvalue by power iteration on central-difference
// Hessian-vector products (h = 1e-5 * (1 + ||beta||_inf)). Converges to the
// eigenvalue of largest magnitude and reports it with its sign. Only the
// smooth families (HuberRegression, Quadratic) are accepted.
double dominant_curvature(const Problem& p, const Vector& beta, long iters = 100);

// Squared-gradient accumulator of RMSProp on the pure L1 loss after t steps
// from v_0 = 0: v_t = (1 - gamma^t) * lambda1^2, identical per coordinate
// while no coordinate has crossed zero.
double rmsprop_vt_closed_form(long t, double gamma, double lambda1);

// Fraction of entries with |beta_k| < threshold.
double prunable_fraction(const Vector& beta, double threshold);

struct CaptureReport {
  bool held;
  long violation_iter;  // first iteration with distance >= radius; -1 if held
};

// Checks whether iterates stay inside the open inf-norm ball around center.
// Works from stored iterates, or from recorded Linf norms when center is 0.
CaptureReport capture_check(const Trajectory& traj, const Vector& center, double radius);

struct BoundReport {
  double bound;
  double observed;
  bool satisfied;
};

BoundReport make_bound_report(double bound, double observed);

// Header bound,observed,satisfied; satisfied rendered as 1/0.
void write_bound_reports_csv(std::ostream& out, const std::vector<BoundReport>& reports);
void write_bound_reports_csv(const std::string& path, const std::vector<BoundReport>& reports);

}  // namespace optlab
