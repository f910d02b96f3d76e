#include "eofm/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "eofm/error.hpp"

namespace eofm {

namespace {
constexpr std::int64_t kDotBlock = 4096;
}

void set_thread_count(int threads) {
#ifdef _OPENMP
  omp_set_num_threads(threads > 0 ? threads : omp_get_num_procs());
#else
  (void)threads;
#endif
}

int thread_count() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

void CsrMatrix::multiply(std::span<const double> x, std::span<double> y) const {
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n; ++i) {
    double sum = 0.0;
    for (auto k = row_ptr[i]; k < row_ptr[i + 1]; ++k) sum += val[k] * x[col[k]];
    y[i] = sum;
  }
}

std::vector<double> CsrMatrix::diagonal() const {
  std::vector<double> d(static_cast<std::size_t>(n), 0.0);
  for (int i = 0; i < n; ++i) d[i] = at(i, i);
  return d;
}

double CsrMatrix::at(int row, int column) const noexcept {
  const auto first = col.begin() + row_ptr[row];
  const auto last = col.begin() + row_ptr[row + 1];
  const auto it = std::lower_bound(first, last, column);
  if (it == last || *it != column) return 0.0;
  return val[static_cast<std::size_t>(it - col.begin())];
}

bool CsrMatrix::is_exactly_symmetric() const {
  for (int i = 0; i < n; ++i) {
    for (auto k = row_ptr[i]; k < row_ptr[i + 1]; ++k) {
      if (at(col[k], i) != val[k]) return false;
    }
  }
  return true;
}

CsrMatrix TripletBuilder::build() const {
  std::vector<std::size_t> order(entries_.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto& ea = entries_[a];
    const auto& eb = entries_[b];
    return ea.row != eb.row ? ea.row < eb.row : ea.col < eb.col;
  });

  CsrMatrix m;
  m.n = n_;
  m.row_ptr.assign(static_cast<std::size_t>(n_) + 1, 0);
  for (std::size_t k = 0; k < order.size();) {
    const auto& first = entries_[order[k]];
    if (first.row < 0 || first.row >= n_ || first.col < 0 || first.col >= n_) {
      throw InvalidArgument("sparse entry out of range");
    }
    double sum = 0.0;
    std::size_t j = k;
    for (; j < order.size() && entries_[order[j]].row == first.row &&
           entries_[order[j]].col == first.col;
         ++j) {
      sum += entries_[order[j]].value;
    }
    m.col.push_back(first.col);
    m.val.push_back(sum);
    ++m.row_ptr[static_cast<std::size_t>(first.row) + 1];
    k = j;
  }
  for (int i = 0; i < n_; ++i) m.row_ptr[i + 1] += m.row_ptr[i];
  return m;
}

double deterministic_dot(std::span<const double> a, std::span<const double> b) {
  const auto n = static_cast<std::int64_t>(a.size());
  const std::int64_t blocks = (n + kDotBlock - 1) / kDotBlock;
  std::vector<double> partial(static_cast<std::size_t>(blocks), 0.0);
#pragma omp parallel for schedule(static)
  for (std::int64_t blk = 0; blk < blocks; ++blk) {
    const auto lo = blk * kDotBlock;
    const auto hi = std::min(n, lo + kDotBlock);
    double s = 0.0;
    for (auto i = lo; i < hi; ++i) s += a[i] * b[i];
    partial[blk] = s;
  }
  double total = 0.0;
  for (double p : partial) total += p;
  return total;
}

CgResult solve_pcg(const CsrMatrix& a, std::span<const double> b, const CgOptions& options,
                   std::span<const double> initial) {
  const auto n = static_cast<std::size_t>(a.n);
  if (b.size() != n) throw InvalidArgument("pcg: rhs size mismatch");
  if (!initial.empty() && initial.size() != n) throw InvalidArgument("pcg: initial guess size mismatch");
  if (!(options.tol > 0.0)) throw InvalidArgument("pcg: tolerance must be positive");

  CgResult result;
  result.x.assign(n, 0.0);
  if (!initial.empty()) std::copy(initial.begin(), initial.end(), result.x.begin());
  if (n == 0) return result;

  const double b_norm = std::sqrt(deterministic_dot(b, b));
  if (b_norm == 0.0) {
    std::fill(result.x.begin(), result.x.end(), 0.0);
    return result;
  }

  auto inv_diag = a.diagonal();
  for (auto& d : inv_diag) {
    if (!(d > 0.0)) {
      throw IndefiniteOperator("pcg: non-positive diagonal entry", 0.0, 0);
    }
    d = 1.0 / d;
  }

  std::vector<double> r(n), z(n), p(n), q(n);
  a.multiply(result.x, q);
  for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - q[i];
  double r_norm = std::sqrt(deterministic_dot(r, r));
  result.relative_residual = r_norm / b_norm;
  if (result.relative_residual <= options.tol) return result;

  for (std::size_t i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
  p = z;
  double rz = deterministic_dot(r, z);

  for (int it = 1; it <= options.max_iter; ++it) {
    a.multiply(p, q);
    const double curvature = deterministic_dot(p, q);
    if (!(curvature > 0.0)) {
      throw IndefiniteOperator("pcg: non-positive curvature; operator is not positive definite",
                               result.relative_residual, it);
    }
    const double step = rz / curvature;
    for (std::size_t i = 0; i < n; ++i) {
      result.x[i] += step * p[i];
      r[i] -= step * q[i];
    }
    r_norm = std::sqrt(deterministic_dot(r, r));
    result.relative_residual = r_norm / b_norm;
    result.iterations = it;
    if (result.relative_residual <= options.tol) return result;

    for (std::size_t i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
    const double rz_next = deterministic_dot(r, z);
    const double beta = rz_next / rz;
    rz = rz_next;
    for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
  }
  throw NumericalError("pcg: no convergence after " + std::to_string(options.max_iter) +
                           " iterations (relative residual " +
                           std::to_string(result.relative_residual) + ")",
                       result.relative_residual, options.max_iter);
}

}  // namespace eofm
