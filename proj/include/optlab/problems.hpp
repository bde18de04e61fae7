#pragma once

#include <variant>

#include "optlab/core.hpp"

namespace optlab {

// Sign with sign(0) = 0: the subgradient selection used at every kink.
inline double sign0(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

// lambda1 * ||beta||_1 on its own; the smallest loss with a limit cycle.
struct L1Toy {
  double lambda1;
  Index dim;
  L1Toy(double lambda1, Index dim);
};

// (1/N) ||y - W beta||^2 + lambda1 ||beta||_1.
struct GeneralLasso {
  Matrix w;
  Vector y;
  double lambda1;
  GeneralLasso(Matrix w, Vector y, double lambda1);
};

// ||y - max(0, Z beta)||^2 + lambda1 ||beta||_1 + lambda2 ||beta||_2^2,
// no 1/N factor. Requires max(y) <= 0 and lambda1 + lambda2 > 0, which makes
// 0 the unique global minimizer while gradient flow need not stay captured.
struct ReluPenalized {
  Matrix z;
  Vector y;
  double lambda1;
  double lambda2;
  ReluPenalized(Matrix z, Vector y, double lambda1, double lambda2);
};

// (1/N) sum_i huber_delta(y_i - z_i . beta); smooth with Lipschitz gradient.
struct HuberRegression {
  Matrix z;
  Vector y;
  double delta;
  HuberRegression(Matrix z, Vector y, double delta = 1.0);
};

// (1/2) beta' A beta - b' beta with A symmetric PSD.
struct Quadratic {
  Matrix a;
  Vector b;
  Quadratic(Matrix a, Vector b);
};

using Problem = std::variant<L1Toy, GeneralLasso, ReluPenalized, HuberRegression, Quadratic>;

double l1_toy_value(const Vector& beta, double lambda1);
Vector l1_toy_subgrad(const Vector& beta, double lambda1);

double lasso_value(const Vector& beta, const GeneralLasso& p);
Vector lasso_subgrad(const Vector& beta, const GeneralLasso& p);

double relu_penalized_value(const Vector& beta, const ReluPenalized& p);
Vector relu_penalized_subgrad(const Vector& beta, const ReluPenalized& p);

double huber_value(const Vector& beta, const HuberRegression& p);
Vector huber_grad(const Vector& beta, const HuberRegression& p);

double quadratic_value(const Vector& beta, const Quadratic& p);
Vector quadratic_grad(const Vector& beta, const Quadratic& p);

double value(const Problem& p, const Vector& beta);
Vector subgradient(const Problem& p, const Vector& beta);
Index dimension(const Problem& p);

}  // namespace optlab
