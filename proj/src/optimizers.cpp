#include "optlab/optimizers.hpp"

#include <cmath>
#include <fstream>
#include <ostream>
#include <stdexcept>

namespace optlab {

double schedule_rate(const StepSchedule& s, long t) {
  if (t < 0) throw std::invalid_argument("schedule_rate: t must be >= 0");
  return std::visit(
      [t](const auto& sched) -> double {
        using T = std::decay_t<decltype(sched)>;
        if constexpr (std::is_same_v<T, ConstantRate>) {
          if (!(sched.alpha > 0.0)) throw std::invalid_argument("ConstantRate: alpha must be > 0");
          return sched.alpha;
        } else if constexpr (std::is_same_v<T, DiminishingRate>) {
          if (!(sched.alpha0 > 0.0) || !(sched.tau > 0.0)) {
            throw std::invalid_argument("DiminishingRate: alpha0 and tau must be > 0");
          }
          return sched.alpha0 / (1.0 + static_cast<double>(t) / sched.tau);
        } else {
          if (!(sched.alpha0 > 0.0) || !(sched.decay > 0.0 && sched.decay < 1.0) ||
              sched.period < 1) {
            throw std::invalid_argument("ReducingRate: need alpha0 > 0, decay in (0,1), period >= 1");
          }
          return sched.alpha0 * std::pow(sched.decay, static_cast<double>(t / sched.period));
        }
      },
      s);
}

Vector ndgm_step(const Vector& beta, const Vector& g, double alpha) {
  if (beta.size() != g.size()) throw std::invalid_argument("ndgm_step: dimension mismatch");
  return beta - alpha * g;
}

Vector momentum_step(Momentum& state, const Vector& beta, const Vector& g, double alpha) {
  if (beta.size() != g.size()) throw std::invalid_argument("momentum_step: dimension mismatch");
  if (!(state.eta >= 0.0 && state.eta < 1.0)) {
    throw std::invalid_argument("momentum_step: eta must lie in [0, 1)");
  }
  if (state.prev.size() == 0) state.prev = beta;
  if (state.prev.size() != beta.size()) {
    throw std::invalid_argument("momentum_step: prev has wrong dimension");
  }
  Vector next = beta - (alpha * (1.0 - state.eta)) * g + state.eta * (beta - state.prev);
  state.prev = beta;
  return next;
}

Vector rmsprop_step(RmsProp& state, const Vector& beta, const Vector& g, double alpha) {
  if (beta.size() != g.size()) throw std::invalid_argument("rmsprop_step: dimension mismatch");
  if (!(state.gamma > 0.0 && state.gamma < 1.0)) {
    throw std::invalid_argument("rmsprop_step: gamma must lie in (0, 1)");
  }
  if (!(state.epsilon > 0.0)) throw std::invalid_argument("rmsprop_step: epsilon must be > 0");
  if (state.v.size() == 0) state.v = Vector::Zero(beta.size());
  if (state.v.size() != beta.size()) {
    throw std::invalid_argument("rmsprop_step: v has wrong dimension");
  }
  state.v = (state.gamma * state.v.array() + (1.0 - state.gamma) * g.array().square()).matrix();
  Vector next =
      (beta.array() - alpha * g.array() / (state.v.array() + state.epsilon).sqrt()).matrix();
  return next;
}

Vector adam_step(Adam& state, const Vector& beta, const Vector& g, double alpha) {
  if (beta.size() != g.size()) throw std::invalid_argument("adam_step: dimension mismatch");
  if (!(state.beta1 >= 0.0 && state.beta1 < 1.0) || !(state.beta2 >= 0.0 && state.beta2 < 1.0)) {
    throw std::invalid_argument("adam_step: beta1/beta2 must lie in [0, 1)");
  }
  if (!(state.epsilon > 0.0)) throw std::invalid_argument("adam_step: epsilon must be > 0");
  if (state.m.size() == 0) state.m = Vector::Zero(beta.size());
  if (state.v.size() == 0) state.v = Vector::Zero(beta.size());
  if (state.m.size() != beta.size() || state.v.size() != beta.size()) {
    throw std::invalid_argument("adam_step: moment vectors have wrong dimension");
  }
  state.t += 1;
  state.m = (state.beta1 * state.m.array() + (1.0 - state.beta1) * g.array()).matrix();
  state.v = (state.beta2 * state.v.array() + (1.0 - state.beta2) * g.array().square()).matrix();
  const double c1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.t));
  const double c2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.t));
  Vector next =
      (beta.array() -
       alpha * (state.m.array() / c1) / ((state.v.array() / c2).sqrt() + state.epsilon))
          .matrix();
  return next;
}

namespace {

Vector apply_step(OptimizerState& state, const Vector& beta, const Vector& g, double alpha) {
  return std::visit(
      [&](auto& st) -> Vector {
        using T = std::decay_t<decltype(st)>;
        if constexpr (std::is_same_v<T, Vanilla>) {
          return ndgm_step(beta, g, alpha);
        } else if constexpr (std::is_same_v<T, Momentum>) {
          return momentum_step(st, beta, g, alpha);
        } else if constexpr (std::is_same_v<T, RmsProp>) {
          return rmsprop_step(st, beta, g, alpha);
        } else {
          return adam_step(st, beta, g, alpha);
        }
      },
      state);
}

void append_record(Trajectory& traj, long iter, double alpha, double loss, const Vector& beta,
                   bool keep_iterates) {
  traj.records.push_back({iter, alpha, loss, norm(beta, Norm::L1), norm(beta, Norm::L2),
                          norm(beta, Norm::Linf)});
  if (keep_iterates) traj.iterates.push_back(beta);
}

}  // namespace

Trajectory run_with(const ValueFn& value_fn, const GradFn& grad_fn, OptimizerState state,
                    const StepSchedule& schedule, const Vector& beta0, long iters,
                    RecordMode record) {
  if (iters < 1) throw std::invalid_argument("run: iters must be >= 1");
  if (beta0.size() < 1) throw std::invalid_argument("run: beta0 must be non-empty");
  const bool keep = record == RecordMode::Full && beta0.size() <= kFullRecordDimCap;

  Trajectory traj;
  traj.records.reserve(static_cast<std::size_t>(iters) + 1);
  Vector beta = beta0;
  append_record(traj, 0, schedule_rate(schedule, 0), value_fn(beta), beta, keep);
  for (long t = 0; t < iters; ++t) {
    const double alpha = schedule_rate(schedule, t);
    const Vector g = grad_fn(beta);
    beta = apply_step(state, beta, g, alpha);
    append_record(traj, t + 1, schedule_rate(schedule, t + 1), value_fn(beta), beta, keep);
    if (diverged(beta)) {
      traj.diverged = true;
      break;
    }
  }
  traj.final_iterate = beta;
  return traj;
}

Trajectory run(const Problem& problem, OptimizerState state, const StepSchedule& schedule,
               const Vector& beta0, long iters, RecordMode record) {
  if (beta0.size() != dimension(problem)) {
    throw std::invalid_argument("run: beta0 dimension does not match problem");
  }
  return run_with([&problem](const Vector& b) { return value(problem, b); },
                  [&problem](const Vector& b) { return subgradient(problem, b); },
                  std::move(state), schedule, beta0, iters, record);
}

void write_trajectory_csv(std::ostream& out, const Trajectory& traj) {
  out << "iter,alpha,loss,l1,l2,linf";
  const bool with_coords = !traj.iterates.empty();
  if (with_coords) {
    for (Index k = 0; k < traj.iterates.front().size(); ++k) out << ",b" << k;
  }
  out << '\n';
  for (std::size_t i = 0; i < traj.records.size(); ++i) {
    const auto& r = traj.records[i];
    out << r.iter << ',' << format_double(r.alpha) << ',' << format_double(r.loss) << ','
        << format_double(r.l1) << ',' << format_double(r.l2) << ',' << format_double(r.linf);
    if (with_coords) {
      const Vector& b = traj.iterates[i];
      for (Index k = 0; k < b.size(); ++k) out << ',' << format_double(b[k]);
    }
    out << '\n';
  }
}

void write_trajectory_csv(const std::string& path, const Trajectory& traj) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  write_trajectory_csv(out, traj);
  if (!out.good()) throw std::runtime_error("write failed: " + path);
}

}  // namespace optlab
