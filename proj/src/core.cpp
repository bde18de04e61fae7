#include "optlab/core.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace optlab {

double norm(const Vector& v, Norm kind) {
  switch (kind) {
    case Norm::L1:
      return v.lpNorm<1>();
    case Norm::L2:
      return v.norm();
    case Norm::Linf:
      return v.size() == 0 ? 0.0 : v.lpNorm<Eigen::Infinity>();
  }
  throw std::invalid_argument("norm: unknown kind");
}

Vector matvec(const Matrix& m, const Vector& v) {
  if (m.cols() != v.size()) {
    throw std::invalid_argument("matvec: dimension mismatch");
  }
  return m * v;
}

bool diverged(const Vector& v) {
  if (!v.allFinite()) return true;
  return v.size() != 0 && v.cwiseAbs().maxCoeff() > kDivergenceThreshold;
}

std::uint64_t SeededRng::next_u64() {
  // SplitMix64 (Steele, Lea & Flood); the constants are part of the contract
  // since outputs are frozen into expected files.
  state_ += 0x9E3779B97F4A7C15ull;
  std::uint64_t z = state_;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

double SeededRng::next_unit() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double SeededRng::uniform(double lo, double hi) {
  return lo + next_unit() * (hi - lo);
}

double SeededRng::normal() {
  // Box-Muller, cosine branch only: one draw pair per variate keeps the
  // stream position independent of call history.
  constexpr double two_pi = 6.28318530717958647692;
  const double u1 = 1.0 - next_unit();  // in (0, 1], log stays finite
  const double u2 = next_unit();
  const double r = std::sqrt(-2.0 * std::log(u1));
  return r * std::cos(two_pi * u2);
}

SeededRng SeededRng::split() { return SeededRng(next_u64()); }

namespace {

void check_bounds(double lo, double hi) {
  if (!std::isfinite(lo) || !std::isfinite(hi)) {
    throw std::invalid_argument("uniform bounds must be finite");
  }
  if (!(lo < hi)) {
    throw std::invalid_argument("uniform bounds must satisfy lo < hi");
  }
}

}  // namespace

Vector uniform_vector(SeededRng& rng, Index dim, double lo, double hi) {
  if (dim < 1) throw std::invalid_argument("uniform_vector: dim must be >= 1");
  check_bounds(lo, hi);
  Vector v(dim);
  for (Index i = 0; i < dim; ++i) v[i] = rng.uniform(lo, hi);
  return v;
}

Matrix uniform_matrix(SeededRng& rng, Index rows, Index cols, double lo, double hi) {
  if (rows < 1 || cols < 1) {
    throw std::invalid_argument("uniform_matrix: dimensions must be >= 1");
  }
  check_bounds(lo, hi);
  Matrix m(rows, cols);
  for (Index r = 0; r < rows; ++r) {
    for (Index c = 0; c < cols; ++c) m(r, c) = rng.uniform(lo, hi);
  }
  return m;
}

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

void write_matrix_csv(std::ostream& out, const Matrix& m) {
  out << m.rows() << ',' << m.cols() << '\n';
  for (Index r = 0; r < m.rows(); ++r) {
    for (Index c = 0; c < m.cols(); ++c) {
      if (c) out << ',';
      out << format_double(m(r, c));
    }
    out << '\n';
  }
}

void write_matrix_csv(const std::string& path, const Matrix& m) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  write_matrix_csv(out, m);
  if (!out.good()) throw std::runtime_error("write failed: " + path);
}

namespace {

std::vector<double> parse_csv_line(const std::string& line, const char* what) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos <= line.size()) {
    std::size_t comma = line.find(',', pos);
    std::string cell = line.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
    char* end = nullptr;
    const double v = std::strtod(cell.c_str(), &end);
    if (end == cell.c_str() || *end != '\0') {
      throw std::runtime_error(std::string(what) + ": malformed value '" + cell + "'");
    }
    out.push_back(v);
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return out;
}

}  // namespace

Matrix read_matrix_csv(std::istream& in) {
  std::string header;
  if (!std::getline(in, header)) throw std::runtime_error("matrix csv: empty input");
  const auto dims = parse_csv_line(header, "matrix csv header");
  if (dims.size() != 2) throw std::runtime_error("matrix csv: header must be rows,cols");
  const auto rows = static_cast<Index>(dims[0]);
  const auto cols = static_cast<Index>(dims[1]);
  if (rows < 0 || cols < 0 || dims[0] != static_cast<double>(rows) ||
      dims[1] != static_cast<double>(cols)) {
    throw std::runtime_error("matrix csv: invalid dimensions");
  }
  Matrix m(rows, cols);
  std::string line;
  for (Index r = 0; r < rows; ++r) {
    if (!std::getline(in, line)) throw std::runtime_error("matrix csv: missing row");
    const auto vals = parse_csv_line(line, "matrix csv row");
    if (static_cast<Index>(vals.size()) != cols) {
      throw std::runtime_error("matrix csv: wrong column count");
    }
    for (Index c = 0; c < cols; ++c) m(r, c) = vals[c];
  }
  return m;
}

Matrix read_matrix_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open for reading: " + path);
  return read_matrix_csv(in);
}

}  // namespace optlab
