#include "optlab/netlab.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace optlab {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;

double gauss_cdf(double x) { return 0.5 * (1.0 + std::erf(x * kInvSqrt2)); }
double gauss_pdf(double x) { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }

}  // namespace

double activation_value(Activation kind, double x) {
  switch (kind) {
    case Activation::Relu:
      return x > 0.0 ? x : 0.0;
    case Activation::Gelu:
      return x * gauss_cdf(x);
  }
  throw std::invalid_argument("activation_value: unknown kind");
}

double activation_deriv(Activation kind, double x) {
  switch (kind) {
    case Activation::Relu:
      return x > 0.0 ? 1.0 : 0.0;
    case Activation::Gelu:
      return gauss_cdf(x) + x * gauss_pdf(x);
  }
  throw std::invalid_argument("activation_deriv: unknown kind");
}

Index Mlp::parameter_count() const {
  Index n = 0;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    n += weights[l].size() + biases[l].size();
  }
  return n;
}

Mlp make_mlp(const std::vector<Index>& dims, Activation act, SeededRng& rng) {
  if (dims.size() < 2) throw std::invalid_argument("make_mlp: need at least input and output");
  for (Index d : dims) {
    if (d < 1) throw std::invalid_argument("make_mlp: layer widths must be >= 1");
  }
  if (dims.back() != 1) throw std::invalid_argument("make_mlp: output width must be 1");

  Mlp net;
  net.dims = dims;
  net.activation = act;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    const Index fan_in = dims[l];
    const Index fan_out = dims[l + 1];
    const double scale = std::sqrt(2.0 / static_cast<double>(fan_in));
    Matrix w(fan_out, fan_in);
    for (Index r = 0; r < fan_out; ++r) {
      for (Index c = 0; c < fan_in; ++c) w(r, c) = scale * rng.normal();
    }
    net.weights.push_back(std::move(w));
    net.biases.push_back(Vector::Zero(fan_out));
  }
  return net;
}

SyntheticDataset make_synthetic_dataset(std::uint64_t seed, Index n, Index d, double noise_sd) {
  if (n < 1 || d < 1) throw std::invalid_argument("make_synthetic_dataset: n and d must be >= 1");
  if (!(noise_sd >= 0.0)) throw std::invalid_argument("make_synthetic_dataset: noise_sd < 0");
  SeededRng rng(seed);
  SeededRng input_rng = rng.split();
  SeededRng teacher_rng = rng.split();
  SeededRng noise_rng = rng.split();

  SyntheticDataset data;
  data.x = uniform_matrix(input_rng, n, d, -1.0, 1.0);

  // Fixed-width tanh teacher keeps the targets bounded and nonlinear.
  const Index teacher_width = 8;
  const double in_scale = 1.0 / std::sqrt(static_cast<double>(d));
  Matrix a = uniform_matrix(teacher_rng, teacher_width, d, -1.0, 1.0) * in_scale;
  Vector c = uniform_vector(teacher_rng, teacher_width, -1.0, 1.0);

  data.y.resize(n);
  for (Index i = 0; i < n; ++i) {
    const Vector h = (a * data.x.row(i).transpose()).array().tanh().matrix();
    data.y[i] = c.dot(h) + noise_sd * noise_rng.normal();
  }
  return data;
}

ForwardCache forward(const Mlp& net, const Matrix& x) {
  if (x.cols() != net.dims.front()) throw std::invalid_argument("forward: input width mismatch");
  ForwardCache cache;
  cache.post.push_back(x);
  const auto layers = net.weights.size();
  for (std::size_t l = 0; l < layers; ++l) {
    Matrix pre = cache.post.back() * net.weights[l].transpose();
    pre.rowwise() += net.biases[l].transpose();
    const bool last = l + 1 == layers;
    if (last) {
      cache.pre.push_back(pre);
      cache.post.push_back(std::move(pre));
    } else {
      Matrix post = pre.unaryExpr(
          [kind = net.activation](double v) { return activation_value(kind, v); });
      cache.pre.push_back(std::move(pre));
      cache.post.push_back(std::move(post));
    }
  }
  return cache;
}

double mse_loss(const Matrix& pred, const Vector& targets) {
  if (pred.cols() != 1 || pred.rows() != targets.size()) {
    throw std::invalid_argument("mse_loss: prediction shape mismatch");
  }
  return (pred.col(0) - targets).squaredNorm() / static_cast<double>(targets.size());
}

Gradients backward(const Mlp& net, const ForwardCache& cache, const Vector& targets) {
  const auto layers = net.weights.size();
  if (cache.pre.size() != layers || cache.post.size() != layers + 1) {
    throw std::invalid_argument("backward: cache does not match network");
  }
  const Matrix& pred = cache.post.back();
  if (pred.rows() != targets.size()) throw std::invalid_argument("backward: target size mismatch");
  const double n = static_cast<double>(targets.size());

  Gradients grads;
  grads.weights.resize(layers);
  grads.biases.resize(layers);

  // Output layer is linear, so the first delta is just the MSE derivative.
  Matrix delta = (2.0 / n) * (pred.col(0) - targets);
  for (std::size_t l = layers; l-- > 0;) {
    grads.weights[l] = delta.transpose() * cache.post[l];
    grads.biases[l] = delta.colwise().sum().transpose();
    if (l > 0) {
      Matrix dpost = delta * net.weights[l];
      Matrix dact = cache.pre[l - 1].unaryExpr(
          [kind = net.activation](double v) { return activation_deriv(kind, v); });
      delta = dpost.cwiseProduct(dact);
    }
  }
  return grads;
}

Vector flatten_parameters(const Mlp& net) {
  Vector out(net.parameter_count());
  Index at = 0;
  for (std::size_t l = 0; l < net.weights.size(); ++l) {
    const Matrix& w = net.weights[l];
    for (Index r = 0; r < w.rows(); ++r) {
      for (Index c = 0; c < w.cols(); ++c) out[at++] = w(r, c);
    }
    for (Index r = 0; r < net.biases[l].size(); ++r) out[at++] = net.biases[l][r];
  }
  return out;
}

void unflatten_parameters(Mlp& net, const Vector& params) {
  if (params.size() != net.parameter_count()) {
    throw std::invalid_argument("unflatten_parameters: size mismatch");
  }
  Index at = 0;
  for (std::size_t l = 0; l < net.weights.size(); ++l) {
    Matrix& w = net.weights[l];
    for (Index r = 0; r < w.rows(); ++r) {
      for (Index c = 0; c < w.cols(); ++c) w(r, c) = params[at++];
    }
    for (Index r = 0; r < net.biases[l].size(); ++r) net.biases[l][r] = params[at++];
  }
}

Vector flatten_gradients(const Mlp& net, const Gradients& g) {
  Vector out(net.parameter_count());
  Index at = 0;
  for (std::size_t l = 0; l < g.weights.size(); ++l) {
    const Matrix& w = g.weights[l];
    for (Index r = 0; r < w.rows(); ++r) {
      for (Index c = 0; c < w.cols(); ++c) out[at++] = w(r, c);
    }
    for (Index r = 0; r < g.biases[l].size(); ++r) out[at++] = g.biases[l][r];
  }
  return out;
}

namespace {

double full_loss(const Mlp& net, const SyntheticDataset& data) {
  return mse_loss(forward(net, data.x).post.back(), data.y);
}

void record_epoch(Trajectory& traj, long epoch, double alpha, double loss, const Vector& params) {
  traj.records.push_back({epoch, alpha, loss, norm(params, Norm::L1), norm(params, Norm::L2),
                          norm(params, Norm::Linf)});
}

}  // namespace

Trajectory train(Mlp& net, const SyntheticDataset& data, const StepSchedule& schedule,
                 long epochs, std::uint64_t seed, Index batch_size) {
  if (epochs < 1) throw std::invalid_argument("train: epochs must be >= 1");
  if (batch_size < 0 || batch_size > data.x.rows()) {
    throw std::invalid_argument("train: batch_size out of range");
  }
  if (data.x.cols() != net.dims.front()) throw std::invalid_argument("train: input width mismatch");

  SeededRng shuffle_rng(seed);
  Vector params = flatten_parameters(net);

  Trajectory traj;
  traj.records.reserve(static_cast<std::size_t>(epochs) + 1);
  record_epoch(traj, 0, schedule_rate(schedule, 0), full_loss(net, data), params);

  const Index n = data.x.rows();
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});

  for (long epoch = 0; epoch < epochs; ++epoch) {
    const double alpha = schedule_rate(schedule, epoch);
    if (batch_size == 0) {
      const ForwardCache cache = forward(net, data.x);
      const Vector g = flatten_gradients(net, backward(net, cache, data.y));
      params = ndgm_step(params, g, alpha);
      unflatten_parameters(net, params);
    } else {
      // Seeded Fisher-Yates; draw order depends only on (seed, epoch order).
      for (std::size_t i = order.size(); i > 1; --i) {
        const auto j = static_cast<std::size_t>(shuffle_rng.next_u64() % i);
        std::swap(order[i - 1], order[j]);
      }
      for (Index start = 0; start < n; start += batch_size) {
        const Index len = std::min(batch_size, n - start);
        Matrix xb(len, data.x.cols());
        Vector yb(len);
        for (Index r = 0; r < len; ++r) {
          xb.row(r) = data.x.row(order[static_cast<std::size_t>(start + r)]);
          yb[r] = data.y[order[static_cast<std::size_t>(start + r)]];
        }
        const ForwardCache cache = forward(net, xb);
        const Vector g = flatten_gradients(net, backward(net, cache, yb));
        params = ndgm_step(params, g, alpha);
        unflatten_parameters(net, params);
      }
    }
    record_epoch(traj, epoch + 1, schedule_rate(schedule, epoch + 1), full_loss(net, data),
                 params);
    if (diverged(params)) {
      traj.diverged = true;
      break;
    }
  }
  traj.final_iterate = params;
  return traj;
}

long epochs_to_fraction(const Trajectory& traj, double frac) {
  if (traj.records.empty()) throw std::invalid_argument("epochs_to_fraction: empty trajectory");
  if (!(frac > 0.0 && frac < 1.0)) {
    throw std::invalid_argument("epochs_to_fraction: frac must lie in (0, 1)");
  }
  const double target = frac * traj.records.front().loss;
  for (const auto& r : traj.records) {
    if (r.loss <= target) return r.iter;
  }
  return -1;
}

}  // namespace optlab
