#pragma once

#include <functional>
#include <iosfwd>
#include <variant>
#include <vector>

#include "optlab/problems.hpp"

namespace optlab {

struct ConstantRate {
  double alpha;
};

// alpha0 / (1 + t / tau); the classic divergent-sum schedule.
struct DiminishingRate {
  double alpha0;
  double tau;
};

// alpha0 * decay^floor(t / period); summable (geometric between drops).
struct ReducingRate {
  double alpha0;
  double decay;
  long period;
};

using StepSchedule = std::variant<ConstantRate, DiminishingRate, ReducingRate>;

double schedule_rate(const StepSchedule& s, long t);

struct Vanilla {};

// Damped two-point form: next = beta - alpha*(1-eta)*g + eta*(beta - prev).
// prev seeds to beta0 on the first step, so the first update is plain descent
// scaled by (1-eta). The damping makes the zero-escape identity exact: from
// beta = 0 with g = 0 the next iterate is -eta * prev.
struct Momentum {
  double eta = 0.9;
  Vector prev;
};

// v <- gamma*v + (1-gamma)*g^2; next = beta - alpha * g / sqrt(v + epsilon).
// The jitter sits inside the square root, which is what makes the effective
// step on a pure L1 loss independent of lambda1.
struct RmsProp {
  double gamma = 0.99;
  double epsilon = 1e-8;
  Vector v;
};

// Standard bias-corrected form; epsilon sits outside the square root:
//   m <- beta1*m + (1-beta1)*g,  v <- beta2*v + (1-beta2)*g^2
//   next = beta - alpha * (m / (1-beta1^t)) / (sqrt(v / (1-beta2^t)) + epsilon)
struct Adam {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  Vector m;
  Vector v;
  long t = 0;
};

using OptimizerState = std::variant<Vanilla, Momentum, RmsProp, Adam>;

Vector ndgm_step(const Vector& beta, const Vector& g, double alpha);
Vector momentum_step(Momentum& state, const Vector& beta, const Vector& g, double alpha);
Vector rmsprop_step(RmsProp& state, const Vector& beta, const Vector& g, double alpha);
Vector adam_step(Adam& state, const Vector& beta, const Vector& g, double alpha);

enum class RecordMode { Full, NormsOnly };

struct TrajectoryRecord {
  long iter;
  double alpha;  // step size the schedule prescribes at this iteration index
  double loss;
  double l1;
  double l2;
  double linf;
};

struct Trajectory {
  std::vector<TrajectoryRecord> records;
  // Aligned with records; populated only in Full mode with dim <= 1000.
  std::vector<Vector> iterates;
  Vector final_iterate;
  bool diverged = false;

  std::size_t size() const { return records.size(); }
  const TrajectoryRecord& back() const { return records.back(); }
};

using ValueFn = std::function<double(const Vector&)>;
using GradFn = std::function<Vector(const Vector&)>;

// Core loop shared by every experiment: record, step, check divergence.
// Row 0 is the starting point; divergence sets the flag and halts early.
Trajectory run_with(const ValueFn& value_fn, const GradFn& grad_fn, OptimizerState state,
                    const StepSchedule& schedule, const Vector& beta0, long iters,
                    RecordMode record = RecordMode::Full);

Trajectory run(const Problem& problem, OptimizerState state, const StepSchedule& schedule,
               const Vector& beta0, long iters, RecordMode record = RecordMode::Full);

// Header iter,alpha,loss,l1,l2,linf plus b0..b{P-1} when iterates are stored.
void write_trajectory_csv(std::ostream& out, const Trajectory& traj);
void write_trajectory_csv(const std::string& path, const Trajectory& traj);

}  // namespace optlab
