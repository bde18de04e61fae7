#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "optlab/core.hpp"

using namespace optlab;

TEST_CASE("norms agree with hand-rolled sums") {
  Vector v(4);
  v << 3.0, -4.0, 0.5, -0.25;
  double l1 = 0.0, l2sq = 0.0, linf = 0.0;
  for (Index i = 0; i < v.size(); ++i) {
    l1 += std::abs(v[i]);
    l2sq += v[i] * v[i];
    linf = std::max(linf, std::abs(v[i]));
  }
  CHECK(norm(v, Norm::L1) == doctest::Approx(l1).epsilon(1e-15));
  CHECK(norm(v, Norm::L2) == doctest::Approx(std::sqrt(l2sq)).epsilon(1e-15));
  CHECK(norm(v, Norm::Linf) == linf);
}

TEST_CASE("cycle-shaped vector has the documented L1 norm") {
  // Two coordinates parked at 0.0053 each.
  Vector v(2);
  v << 0.0053, 0.0053;
  CHECK(norm(v, Norm::L1) == doctest::Approx(0.0106).epsilon(1e-12));
}

TEST_CASE("matvec matches scalar loops and checks dimensions") {
  SeededRng rng(7);
  const Matrix m = uniform_matrix(rng, 3, 5, -2.0, 2.0);
  const Vector v = uniform_vector(rng, 5, -1.0, 1.0);
  const Vector got = matvec(m, v);
  for (Index r = 0; r < 3; ++r) {
    double acc = 0.0;
    for (Index c = 0; c < 5; ++c) acc += m(r, c) * v[c];
    CHECK(got[r] == doctest::Approx(acc).epsilon(1e-14));
  }
  CHECK_THROWS_AS(matvec(m, Vector::Zero(4)), std::invalid_argument);
}

TEST_CASE("divergence flag trips on threshold and non-finite entries") {
  Vector v(2);
  v << 1.0, 2.0;
  CHECK_FALSE(diverged(v));
  v[1] = 1.0000001e10;
  CHECK(diverged(v));
  v[1] = std::numeric_limits<double>::quiet_NaN();
  CHECK(diverged(v));
  v[1] = std::numeric_limits<double>::infinity();
  CHECK(diverged(v));
  v[1] = -1e10;  // exactly at the threshold is still inside
  CHECK_FALSE(diverged(v));
}

TEST_CASE("generator is deterministic and splits into independent streams") {
  SeededRng a(123);
  SeededRng b(123);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());

  SeededRng parent(9);
  SeededRng child = parent.split();
  // Child stream must not replay the parent stream.
  SeededRng parent2(9);
  parent2.next_u64();  // align with post-split parent state
  bool any_differ = false;
  for (int i = 0; i < 16; ++i) any_differ = any_differ || child.next_u64() != parent2.next_u64();
  CHECK(any_differ);
}

TEST_CASE("uniform draws live in range and nearly center at zero") {
  SeededRng rng(1);
  const Vector v = uniform_vector(rng, 20, -1.0, 1.0);
  for (Index i = 0; i < v.size(); ++i) {
    CHECK(v[i] >= -1.0);
    CHECK(v[i] < 1.0);
  }
  CHECK(std::abs(v.mean()) < 0.25);
}

TEST_CASE("uniform moments match direct Monte-Carlo statistics") {
  SeededRng rng(2024);
  const Index n = 200000;
  double acc = 0.0, acc2 = 0.0;
  for (Index i = 0; i < n; ++i) {
    const double x = rng.uniform(-1.0, 1.0);
    acc += x;
    acc2 += x * x;
  }
  const double mean = acc / static_cast<double>(n);
  const double var = acc2 / static_cast<double>(n) - mean * mean;
  CHECK(std::abs(mean) < 0.01);
  CHECK(var == doctest::Approx(1.0 / 3.0).epsilon(0.02));
}

TEST_CASE("normal draws match Gaussian moments") {
  SeededRng rng(99);
  const Index n = 200000;
  double acc = 0.0, acc2 = 0.0, acc4 = 0.0;
  for (Index i = 0; i < n; ++i) {
    const double x = rng.normal();
    acc += x;
    acc2 += x * x;
    acc4 += x * x * x * x;
  }
  const double mean = acc / static_cast<double>(n);
  const double var = acc2 / static_cast<double>(n);
  const double kurt = acc4 / static_cast<double>(n);
  CHECK(std::abs(mean) < 0.01);
  CHECK(var == doctest::Approx(1.0).epsilon(0.02));
  CHECK(kurt == doctest::Approx(3.0).epsilon(0.05));
}

TEST_CASE("uniform_vector validates its arguments") {
  SeededRng rng(5);
  CHECK_THROWS_AS(uniform_vector(rng, 0, -1.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(uniform_vector(rng, 3, 1.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(uniform_vector(rng, 3, 2.0, 1.0), std::invalid_argument);
  const double inf = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(uniform_vector(rng, 3, -inf, 1.0), std::invalid_argument);
}

TEST_CASE("matrix csv round-trips exactly, including awkward doubles") {
  Matrix m(2, 3);
  m << 0.1, -1.0 / 3.0, 1e-300, 1.7976931348623157e308, -0.0, 0.5053;
  std::stringstream buf;
  write_matrix_csv(buf, m);
  const Matrix back = read_matrix_csv(buf);
  REQUIRE(back.rows() == 2);
  REQUIRE(back.cols() == 3);
  for (Index r = 0; r < 2; ++r) {
    for (Index c = 0; c < 3; ++c) CHECK(back(r, c) == m(r, c));
  }
}

TEST_CASE("matrix csv writer emits the dimension header and stable bytes") {
  Matrix m(1, 2);
  m << 1.5, -2.0;
  std::stringstream a;
  write_matrix_csv(a, m);
  CHECK(a.str() == "1,2\n1.5,-2\n");
  std::stringstream b;
  write_matrix_csv(b, m);
  CHECK(a.str() == b.str());
}

TEST_CASE("matrix csv reader rejects malformed input") {
  std::stringstream missing_row("2,2\n1,2\n");
  CHECK_THROWS_AS(read_matrix_csv(missing_row), std::runtime_error);
  std::stringstream bad_cell("1,2\n1,abc\n");
  CHECK_THROWS_AS(read_matrix_csv(bad_cell), std::runtime_error);
  std::stringstream short_row("1,3\n1,2\n");
  CHECK_THROWS_AS(read_matrix_csv(short_row), std::runtime_error);
  std::stringstream empty("");
  CHECK_THROWS_AS(read_matrix_csv(empty), std::runtime_error);
}

TEST_CASE("column extraction from a written matrix matches the source") {
  SeededRng rng(31);
  const Matrix m = uniform_matrix(rng, 6, 4, -3.0, 3.0);
  std::stringstream buf;
  write_matrix_csv(buf, m);
  const Matrix back = read_matrix_csv(buf);
  for (Index c = 0; c < 4; ++c) {
    CHECK((back.col(c) - m.col(c)).lpNorm<Eigen::Infinity>() == 0.0);
  }
}
