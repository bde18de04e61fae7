#pragma once

#include <vector>

#include "optlab/optimizers.hpp"

namespace optlab {

enum class Activation { Relu, Gelu };

// Gelu is x * Phi(x) with the exact Gaussian CDF (erf), not the tanh
// approximation. Relu'(0) = 0, matching the kink selection used elsewhere.
double activation_value(Activation kind, double x);
double activation_deriv(Activation kind, double x);

// Fully connected net, hidden layers share one activation, output is linear.
// weights[l] maps layer l (cols = dims[l]) to layer l+1 (rows = dims[l+1]).
struct Mlp {
  std::vector<Index> dims;
  std::vector<Matrix> weights;
  std::vector<Vector> biases;
  Activation activation = Activation::Relu;

  Index depth() const { return static_cast<Index>(weights.size()); }
  Index parameter_count() const;
};

// He initialization: entries ~ N(0, 2 / fan_in), biases zero.
Mlp make_mlp(const std::vector<Index>& dims, Activation act, SeededRng& rng);

struct SyntheticDataset {
  Matrix x;  // N x D, uniform on (-1, 1)
  Vector y;  // tanh teacher outputs plus Gaussian noise
};

SyntheticDataset make_synthetic_dataset(std::uint64_t seed, Index n, Index d,
                                        double noise_sd = 0.01);

struct ForwardCache {
  std::vector<Matrix> pre;   // pre-activations per layer, batch rows
  std::vector<Matrix> post;  // post[0] is the input batch
};

ForwardCache forward(const Mlp& net, const Matrix& x);

// Mean over the batch of squared error; pred is the N x 1 network output.
double mse_loss(const Matrix& pred, const Vector& targets);

struct Gradients {
  std::vector<Matrix> weights;
  std::vector<Vector> biases;
};

Gradients backward(const Mlp& net, const ForwardCache& cache, const Vector& targets);

// Row-major weights then bias, layer by layer. unflatten is the inverse.
Vector flatten_parameters(const Mlp& net);
void unflatten_parameters(Mlp& net, const Vector& params);
Vector flatten_gradients(const Mlp& net, const Gradients& g);

// Plain descent on the MSE, one record per epoch (row 0 is the initial
// loss). batch_size = 0 trains full batch, one step per epoch; otherwise
// each epoch walks a seeded shuffle in chunks of batch_size. The net is
// updated in place; divergence halts training with the flag set.
Trajectory train(Mlp& net, const SyntheticDataset& data, const StepSchedule& schedule,
                 long epochs, std::uint64_t seed, Index batch_size = 0);

// First recorded epoch with loss <= frac * initial loss; -1 if never reached.
long epochs_to_fraction(const Trajectory& traj, double frac);

}  // namespace optlab
