#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace eofm {

/// Compressed sparse row matrix (square).
struct CsrMatrix {
  int n = 0;
  std::vector<std::int64_t> row_ptr;
  std::vector<int> col;
  std::vector<double> val;

  std::size_t nonzeros() const noexcept { return val.size(); }
  /// y = A x. Rows are processed in parallel; each row sums in fixed column order.
  void multiply(std::span<const double> x, std::span<double> y) const;
  std::vector<double> diagonal() const;
  double at(int row, int column) const noexcept;
  /// True if A(i,j) and A(j,i) are bitwise equal for every stored entry.
  bool is_exactly_symmetric() const;
};

/// Accumulates (row, col, value) contributions; duplicates are summed in
/// insertion order so the result does not depend on anything but call order.
class TripletBuilder {
 public:
  explicit TripletBuilder(int n) : n_(n) {}
  void add(int row, int column, double value) { entries_.push_back({row, column, value}); }
  void reserve(std::size_t count) { entries_.reserve(count); }
  CsrMatrix build() const;

 private:
  struct Entry {
    int row;
    int col;
    double value;
  };
  int n_;
  std::vector<Entry> entries_;
};

struct CgOptions {
  double tol = 1e-8;     ///< relative residual ||b - Ax|| / ||b||
  int max_iter = 10000;
};

struct CgResult {
  std::vector<double> x;
  int iterations = 0;
  double relative_residual = 0.0;
};

/// Jacobi-preconditioned conjugate gradients. Throws NumericalError if the
/// tolerance is not reached and IndefiniteOperator on non-positive curvature.
/// `initial` may be empty (zero start).
CgResult solve_pcg(const CsrMatrix& a, std::span<const double> b, const CgOptions& options,
                   std::span<const double> initial = {});

/// Dot product summed in fixed-size blocks combined in block order, so the
/// result is identical for any thread count.
double deterministic_dot(std::span<const double> a, std::span<const double> b);

/// Sets the worker thread count for row-parallel loops (0 = library default).
void set_thread_count(int threads);
int thread_count();

}  // namespace eofm
