#include "optlab/oracles.hpp"

#include <cmath>
#include <fstream>
#include <ostream>
#include <stdexcept>

namespace optlab {

namespace {

// One descent step of the scalar recursion; mirrors the vector pipeline's
// float operations exactly (subgradient scale, then step).
inline double l1_scalar_step(double x, double alpha, double lambda1) {
  return x - alpha * (lambda1 * sign0(x));
}

}  // namespace

LimitCycle lasso_limit_cycle(const Vector& beta0, double alpha, double lambda1) {
  if (beta0.size() < 1) throw std::invalid_argument("lasso_limit_cycle: empty beta0");
  if (!(alpha > 0.0) || !(lambda1 > 0.0)) {
    throw std::invalid_argument("lasso_limit_cycle: alpha and lambda1 must be positive");
  }
  const double band = alpha * lambda1;
  const Index p = beta0.size();

  LimitCycle cycle;
  cycle.entry.resize(p);
  cycle.rebound.resize(p);
  cycle.settle.resize(static_cast<std::size_t>(p));
  cycle.settle_iter = 0;

  for (Index k = 0; k < p; ++k) {
    double x = beta0[k];
    if (x == 0.0) {
      throw std::domain_error("lasso_limit_cycle: coordinate starts at exact 0");
    }
    const double ratio = std::abs(x) / band;
    if (!(ratio < 1e15)) {
      throw std::invalid_argument("lasso_limit_cycle: beta0 too large for this alpha*lambda1");
    }
    const long cap = static_cast<long>(ratio) + 64;
    long t = 0;
    while (std::abs(x) >= band) {
      x = l1_scalar_step(x, alpha, lambda1);
      ++t;
      if (x == 0.0) throw std::domain_error("lasso_limit_cycle: coordinate hit exact 0");
      if (t > cap) throw std::runtime_error("lasso_limit_cycle: no band entry within bound");
    }
    // Rounding can shift the first few in-band points by an ulp or two;
    // advance until the two-step return is bit-exact.
    long extra = 0;
    while (true) {
      const double x1 = l1_scalar_step(x, alpha, lambda1);
      const double x2 = l1_scalar_step(x1, alpha, lambda1);
      if (x1 == 0.0 || x2 == 0.0) {
        throw std::domain_error("lasso_limit_cycle: coordinate hit exact 0");
      }
      if (x2 == x) break;
      x = x1;
      ++t;
      if (++extra > 256) throw std::runtime_error("lasso_limit_cycle: cycle failed to stabilize");
    }
    double entry = x;
    long settle = t;
    if (sign0(entry) != sign0(beta0[k])) {
      entry = l1_scalar_step(entry, alpha, lambda1);
      settle = t + 1;
    }
    cycle.entry[k] = entry;
    cycle.rebound[k] = l1_scalar_step(entry, alpha, lambda1);
    cycle.settle[static_cast<std::size_t>(k)] = settle;
    cycle.settle_iter = std::max(cycle.settle_iter, settle);
  }
  return cycle;
}

bool period2_tail(const Trajectory& traj, long window, double tol) {
  if (window < 1) throw std::invalid_argument("period2_tail: window must be >= 1");
  const auto n = static_cast<long>(traj.iterates.size());
  if (n < window + 2) {
    throw std::invalid_argument("period2_tail: need stored iterates covering window + 2");
  }
  for (long t = n - window - 2; t + 2 < n; ++t) {
    const double gap = (traj.iterates[static_cast<std::size_t>(t)] -
                        traj.iterates[static_cast<std::size_t>(t + 2)])
                           .lpNorm<Eigen::Infinity>();
    if (!(gap <= tol)) return false;
  }
  return true;
}

double unstable_bound(double lipschitz, double alpha) {
  if (!(lipschitz > 0.0) || !(alpha > 0.0)) {
    throw std::invalid_argument("unstable_bound: lipschitz and alpha must be positive");
  }
  return alpha * lipschitz * lipschitz;
}

double lipschitz_estimate(const Problem& p, long samples, double radius, SeededRng& rng) {
  if (samples < 1) throw std::invalid_argument("lipschitz_estimate: samples must be >= 1");
  if (!(radius > 0.0)) throw std::invalid_argument("lipschitz_estimate: radius must be > 0");
  const Index dim = dimension(p);
  double best = 0.0;
  for (long s = 0; s < samples; ++s) {
    const Vector x = uniform_vector(rng, dim, -radius, radius);
    const Vector y = uniform_vector(rng, dim, -radius, radius);
    const double dist = (x - y).norm();
    if (dist == 0.0) continue;
    best = std::max(best, std::abs(value(p, x) - value(p, y)) / dist);
  }
  return best;
}

double l1_toy_lipschitz(double lambda1, Index dim) {
  if (!(lambda1 > 0.0) || dim < 1) {
    throw std::invalid_argument("l1_toy_lipschitz: need lambda1 > 0 and dim >= 1");
  }
  return lambda1 * std::sqrt(static_cast<double>(dim));
}

double huber_lipschitz_bound(const HuberRegression& p) {
  double acc = 0.0;
  for (Index i = 0; i < p.z.rows(); ++i) acc += p.z.row(i).norm();
  return p.delta / static_cast<double>(p.z.rows()) * acc;
}

double dominant_curvature(const Problem& p, const Vector& beta, long iters) {
  const bool smooth = std::holds_alternative<HuberRegression>(p) ||
                      std::holds_alternative<Quadratic>(p);
  if (!smooth) {
    throw std::invalid_argument("dominant_curvature: loss must have a Hessian almost everywhere");
  }
  if (beta.size() != dimension(p)) {
    throw std::invalid_argument("dominant_curvature: beta dimension mismatch");
  }
  if (iters < 1) throw std::invalid_argument("dominant_curvature: iters must be >= 1");

  const double h = 1e-5 * (1.0 + norm(beta, Norm::Linf));
  const auto hessian_vec = [&](const Vector& u) -> Vector {
    return (subgradient(p, beta + h * u) - subgradient(p, beta - h * u)) / (2.0 * h);
  };

  SeededRng rng(0x5eedu);  // fixed interior seed: repeat calls agree bit-for-bit
  Vector u = uniform_vector(rng, beta.size(), -1.0, 1.0);
  u.normalize();

  double lambda = 0.0;
  for (long it = 0; it < iters; ++it) {
    Vector w = hessian_vec(u);
    if (!w.allFinite()) throw std::runtime_error("dominant_curvature: non-finite product");
    const double nw = w.norm();
    if (nw == 0.0) throw std::runtime_error("dominant_curvature: vanished iterate");
    const double next = u.dot(w);
    u = w / nw;
    if (it > 0 && std::abs(next - lambda) <= 1e-10 * std::max(1.0, std::abs(next))) {
      return next;
    }
    lambda = next;
  }
  return lambda;
}

double rmsprop_vt_closed_form(long t, double gamma, double lambda1) {
  if (t < 1) throw std::invalid_argument("rmsprop_vt_closed_form: t must be >= 1");
  if (!(gamma > 0.0 && gamma < 1.0)) {
    throw std::invalid_argument("rmsprop_vt_closed_form: gamma must lie in (0, 1)");
  }
  return (1.0 - std::pow(gamma, static_cast<double>(t))) * (lambda1 * lambda1);
}

double prunable_fraction(const Vector& beta, double threshold) {
  if (beta.size() < 1) throw std::invalid_argument("prunable_fraction: empty vector");
  if (!(threshold > 0.0)) throw std::invalid_argument("prunable_fraction: threshold must be > 0");
  Index count = 0;
  for (Index k = 0; k < beta.size(); ++k) {
    if (std::abs(beta[k]) < threshold) ++count;
  }
  return static_cast<double>(count) / static_cast<double>(beta.size());
}

CaptureReport capture_check(const Trajectory& traj, const Vector& center, double radius) {
  if (!(radius > 0.0)) throw std::invalid_argument("capture_check: radius must be > 0");
  if (traj.records.empty()) throw std::invalid_argument("capture_check: empty trajectory");

  const bool have_iterates = !traj.iterates.empty();
  if (!have_iterates && center.lpNorm<Eigen::Infinity>() != 0.0) {
    throw std::invalid_argument(
        "capture_check: norms-only trajectories support only center = 0");
  }
  const auto n = have_iterates ? static_cast<long>(traj.iterates.size())
                               : static_cast<long>(traj.records.size());
  for (long t = 0; t < n; ++t) {
    const double dist =
        have_iterates
            ? (traj.iterates[static_cast<std::size_t>(t)] - center).lpNorm<Eigen::Infinity>()
            : traj.records[static_cast<std::size_t>(t)].linf;
    if (dist >= radius) return {false, traj.records[static_cast<std::size_t>(t)].iter};
  }
  return {true, -1};
}

BoundReport make_bound_report(double bound, double observed) {
  return {bound, observed, observed <= bound};
}

void write_bound_reports_csv(std::ostream& out, const std::vector<BoundReport>& reports) {
  out << "bound,observed,satisfied\n";
  for (const auto& r : reports) {
    out << format_double(r.bound) << ',' << format_double(r.observed) << ','
        << (r.satisfied ? 1 : 0) << '\n';
  }
}

void write_bound_reports_csv(const std::string& path, const std::vector<BoundReport>& reports) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  write_bound_reports_csv(out, reports);
  if (!out.good()) throw std::runtime_error("write failed: " + path);
}

}  // namespace optlab
