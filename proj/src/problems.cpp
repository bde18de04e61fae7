#include "optlab/problems.hpp"

#include <cmath>
#include <stdexcept>

namespace optlab {

namespace {

void require(bool ok, const char* msg) {
  if (!ok) throw std::invalid_argument(msg);
}

void check_dim(const Vector& beta, Index expected, const char* who) {
  if (beta.size() != expected) {
    throw std::invalid_argument(std::string(who) + ": beta has wrong dimension");
  }
}

Vector sign_vector(const Vector& beta, double scale) {
  return beta.unaryExpr([scale](double x) { return scale * sign0(x); });
}

}  // namespace

L1Toy::L1Toy(double lambda1, Index dim) : lambda1(lambda1), dim(dim) {
  require(std::isfinite(lambda1) && lambda1 > 0.0, "L1Toy: lambda1 must be positive");
  require(dim >= 1, "L1Toy: dim must be >= 1");
}

GeneralLasso::GeneralLasso(Matrix w, Vector y, double lambda1)
    : w(std::move(w)), y(std::move(y)), lambda1(lambda1) {
  require(this->w.rows() == this->y.size(), "GeneralLasso: W rows must match y");
  require(this->w.rows() >= 1 && this->w.cols() >= 1, "GeneralLasso: empty design");
  require(std::isfinite(lambda1) && lambda1 >= 0.0, "GeneralLasso: lambda1 must be >= 0");
}

ReluPenalized::ReluPenalized(Matrix z, Vector y, double lambda1, double lambda2)
    : z(std::move(z)), y(std::move(y)), lambda1(lambda1), lambda2(lambda2) {
  require(this->z.rows() == this->y.size(), "ReluPenalized: Z rows must match y");
  require(this->z.rows() >= 1 && this->z.cols() >= 1, "ReluPenalized: empty design");
  require(this->y.maxCoeff() <= 0.0, "ReluPenalized: y must be entrywise <= 0");
  require(std::isfinite(lambda1) && lambda1 >= 0.0, "ReluPenalized: lambda1 must be >= 0");
  require(std::isfinite(lambda2) && lambda2 >= 0.0, "ReluPenalized: lambda2 must be >= 0");
  require(lambda1 + lambda2 > 0.0, "ReluPenalized: need lambda1 + lambda2 > 0");
}

HuberRegression::HuberRegression(Matrix z, Vector y, double delta)
    : z(std::move(z)), y(std::move(y)), delta(delta) {
  require(this->z.rows() == this->y.size(), "HuberRegression: Z rows must match y");
  require(this->z.rows() >= 1 && this->z.cols() >= 1, "HuberRegression: empty design");
  require(std::isfinite(delta) && delta > 0.0, "HuberRegression: delta must be positive");
}

Quadratic::Quadratic(Matrix a, Vector b) : a(std::move(a)), b(std::move(b)) {
  require(this->a.rows() == this->a.cols(), "Quadratic: A must be square");
  require(this->a.rows() == this->b.size(), "Quadratic: A and b dimensions differ");
  const double asym = (this->a - this->a.transpose()).cwiseAbs().maxCoeff();
  require(asym <= 1e-12, "Quadratic: A must be symmetric");
}

double l1_toy_value(const Vector& beta, double lambda1) {
  return lambda1 * beta.lpNorm<1>();
}

Vector l1_toy_subgrad(const Vector& beta, double lambda1) {
  return sign_vector(beta, lambda1);
}

double lasso_value(const Vector& beta, const GeneralLasso& p) {
  check_dim(beta, p.w.cols(), "lasso_value");
  const Vector resid = p.y - p.w * beta;
  return resid.squaredNorm() / static_cast<double>(p.w.rows()) + p.lambda1 * beta.lpNorm<1>();
}

Vector lasso_subgrad(const Vector& beta, const GeneralLasso& p) {
  check_dim(beta, p.w.cols(), "lasso_subgrad");
  const Vector resid = p.y - p.w * beta;
  Vector g = (-2.0 / static_cast<double>(p.w.rows())) * (p.w.transpose() * resid);
  if (p.lambda1 > 0.0) g += sign_vector(beta, p.lambda1);
  return g;
}

double relu_penalized_value(const Vector& beta, const ReluPenalized& p) {
  check_dim(beta, p.z.cols(), "relu_penalized_value");
  const Vector act = (p.z * beta).cwiseMax(0.0);
  const Vector resid = p.y - act;
  return resid.squaredNorm() + p.lambda1 * beta.lpNorm<1>() + p.lambda2 * beta.squaredNorm();
}

Vector relu_penalized_subgrad(const Vector& beta, const ReluPenalized& p) {
  check_dim(beta, p.z.cols(), "relu_penalized_subgrad");
  const Vector pre = p.z * beta;
  // ReLU'(0) = 0 selection: rows with pre <= 0 contribute nothing.
  const Vector resid = p.y - pre.cwiseMax(0.0);
  const Vector masked = (pre.array() > 0.0).select(resid, 0.0);
  Vector g = -2.0 * (p.z.transpose() * masked);
  if (p.lambda1 > 0.0) g += sign_vector(beta, p.lambda1);
  g += (2.0 * p.lambda2) * beta;
  return g;
}

double huber_value(const Vector& beta, const HuberRegression& p) {
  check_dim(beta, p.z.cols(), "huber_value");
  const Vector resid = p.y - p.z * beta;
  const double d = p.delta;
  double acc = 0.0;
  for (Index i = 0; i < resid.size(); ++i) {
    const double a = std::abs(resid[i]);
    acc += a <= d ? 0.5 * resid[i] * resid[i] : d * (a - 0.5 * d);
  }
  return acc / static_cast<double>(p.z.rows());
}

Vector huber_grad(const Vector& beta, const HuberRegression& p) {
  check_dim(beta, p.z.cols(), "huber_grad");
  const Vector resid = p.y - p.z * beta;
  const Vector clipped = resid.cwiseMax(-p.delta).cwiseMin(p.delta);
  return (-1.0 / static_cast<double>(p.z.rows())) * (p.z.transpose() * clipped);
}

double quadratic_value(const Vector& beta, const Quadratic& p) {
  check_dim(beta, p.a.cols(), "quadratic_value");
  return 0.5 * beta.dot(p.a * beta) - p.b.dot(beta);
}

Vector quadratic_grad(const Vector& beta, const Quadratic& p) {
  check_dim(beta, p.a.cols(), "quadratic_grad");
  return p.a * beta - p.b;
}

double value(const Problem& p, const Vector& beta) {
  return std::visit(
      [&beta](const auto& prob) -> double {
        using T = std::decay_t<decltype(prob)>;
        if constexpr (std::is_same_v<T, L1Toy>) {
          check_dim(beta, prob.dim, "value");
          return l1_toy_value(beta, prob.lambda1);
        } else if constexpr (std::is_same_v<T, GeneralLasso>) {
          return lasso_value(beta, prob);
        } else if constexpr (std::is_same_v<T, ReluPenalized>) {
          return relu_penalized_value(beta, prob);
        } else if constexpr (std::is_same_v<T, HuberRegression>) {
          return huber_value(beta, prob);
        } else {
          return quadratic_value(beta, prob);
        }
      },
      p);
}

Vector subgradient(const Problem& p, const Vector& beta) {
  return std::visit(
      [&beta](const auto& prob) -> Vector {
        using T = std::decay_t<decltype(prob)>;
        if constexpr (std::is_same_v<T, L1Toy>) {
          check_dim(beta, prob.dim, "subgradient");
          return l1_toy_subgrad(beta, prob.lambda1);
        } else if constexpr (std::is_same_v<T, GeneralLasso>) {
          return lasso_subgrad(beta, prob);
        } else if constexpr (std::is_same_v<T, ReluPenalized>) {
          return relu_penalized_subgrad(beta, prob);
        } else if constexpr (std::is_same_v<T, HuberRegression>) {
          return huber_grad(beta, prob);
        } else {
          return quadratic_grad(beta, prob);
        }
      },
      p);
}

Index dimension(const Problem& p) {
  return std::visit(
      [](const auto& prob) -> Index {
        using T = std::decay_t<decltype(prob)>;
        if constexpr (std::is_same_v<T, L1Toy>) {
          return prob.dim;
        } else if constexpr (std::is_same_v<T, GeneralLasso>) {
          return prob.w.cols();
        } else if constexpr (std::is_same_v<T, ReluPenalized>) {
          return prob.z.cols();
        } else if constexpr (std::is_same_v<T, HuberRegression>) {
          return prob.z.cols();
        } else {
          return prob.a.cols();
        }
      },
      p);
}

}  // namespace optlab
