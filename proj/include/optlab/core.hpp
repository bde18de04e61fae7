#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <string>

namespace optlab {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Index = Eigen::Index;

// Any iterate entry beyond this magnitude (or any non-finite entry) marks a
// run as diverged.
inline constexpr double kDivergenceThreshold = 1e10;

// Full per-coordinate trajectory recording is capped at this dimension;
// larger problems fall back to norm summaries.
inline constexpr Index kFullRecordDimCap = 1000;

enum class Norm { L1, L2, Linf };

double norm(const Vector& v, Norm kind);

// Matrix-vector product with an explicit dimension check.
Vector matvec(const Matrix& m, const Vector& v);

// True when some entry is non-finite or exceeds the divergence threshold.
bool diverged(const Vector& v);

// Deterministic splittable generator (SplitMix64 core). Equal seeds give
// equal streams; split() consumes one draw and seeds an independent child,
// so sub-tasks can own their own streams without coupling draw counts.
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64();
  double next_unit();                    // uniform on [0, 1)
  double uniform(double lo, double hi);  // uniform on [lo, hi)
  double normal();                       // standard normal (Box-Muller)
  SeededRng split();

 private:
  std::uint64_t state_;
};

Vector uniform_vector(SeededRng& rng, Index dim, double lo, double hi);
Matrix uniform_matrix(SeededRng& rng, Index rows, Index cols, double lo, double hi);

// Fixed %.17g rendering: round-trips every double and keeps emitted files
// byte-stable across runs.
std::string format_double(double x);

// CSV exchange format for matrices: a "rows,cols" header line, then one
// comma-separated row per line, every value written with format_double.
void write_matrix_csv(std::ostream& out, const Matrix& m);
void write_matrix_csv(const std::string& path, const Matrix& m);
Matrix read_matrix_csv(std::istream& in);
Matrix read_matrix_csv(const std::string& path);

}  // namespace optlab
