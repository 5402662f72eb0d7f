#pragma once

// Per-row kernel bodies shared by the serial and OpenMP drivers. Keeping
// one body per row is what makes both drivers produce identical bits.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>

namespace calm::kernels::rows {

inline void gemm_nn_row(std::size_t i, std::size_t k, std::size_t n, const double* a,
                        const double* b, double* c) {
  double* ci = c + i * n;
  std::fill(ci, ci + n, 0.0);
  const double* ai = a + i * k;
  for (std::size_t p = 0; p < k; ++p) {
    const double aip = ai[p];
    const double* bp = b + p * n;
    for (std::size_t j = 0; j < n; ++j) ci[j] += aip * bp[j];
  }
}

inline void gemm_nt_row(std::size_t i, std::size_t k, std::size_t n, const double* a,
                        const double* b, double* c) {
  const double* ai = a + i * k;
  for (std::size_t j = 0; j < n; ++j) {
    const double* bj = b + j * k;
    double s = 0.0;
    for (std::size_t p = 0; p < k; ++p) s += ai[p] * bj[p];
    c[i * n + j] = s;
  }
}

// Row i of Aᵀ·B where A is k×m.
inline void gemm_tn_row(std::size_t i, std::size_t m, std::size_t k, std::size_t n,
                        const double* a, const double* b, double* c) {
  double* ci = c + i * n;
  std::fill(ci, ci + n, 0.0);
  for (std::size_t p = 0; p < k; ++p) {
    const double api = a[p * m + i];
    const double* bp = b + p * n;
    for (std::size_t j = 0; j < n; ++j) ci[j] += api * bp[j];
  }
}

inline void softmax_row(std::size_t i, std::size_t n, const double* x, double* y) {
  const double* xi = x + i * n;
  double* yi = y + i * n;
  const double mx = *std::max_element(xi, xi + n);
  double total = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    yi[j] = std::exp(xi[j] - mx);
    total += yi[j];
  }
  for (std::size_t j = 0; j < n; ++j) yi[j] /= total;
}

inline double row_norm(std::size_t i, std::size_t d, const double* x) {
  const double* xi = x + i * d;
  double s = 0.0;
  for (std::size_t p = 0; p < d; ++p) s += xi[p] * xi[p];
  return std::sqrt(s);
}

inline void cosine_row(std::size_t i, std::size_t n, std::size_t d, const double* x,
                       const double* nx, const double* y, const double* ny, double* out) {
  const double* xi = x + i * d;
  for (std::size_t j = 0; j < n; ++j) {
    const double* yj = y + j * d;
    double s = 0.0;
    for (std::size_t p = 0; p < d; ++p) s += xi[p] * yj[p];
    out[i * n + j] = s / (nx[i] * ny[j]);
  }
}

inline std::size_t rank_row(std::size_t q, std::size_t g, const double* scores,
                            std::size_t truth) {
  const double* sq = scores + q * g;
  const double target = sq[truth];
  std::size_t better = 0;
  for (std::size_t j = 0; j < g; ++j) better += sq[j] > target ? 1 : 0;
  return better + 1;
}

}  // namespace calm::kernels::rows
