#pragma once

// Dense row-major kernels used by the tape ops and by retrieval scoring.
//
// Every kernel exists twice: `serial` is the reference, `omp` splits the
// outer (row/query) loop across OpenMP threads. Both accumulate each output
// element in the same order, so their results are bitwise identical; the
// tests and the benchmark rely on that. The unqualified entry points pick
// the OpenMP version once the work is large enough to amortize a fork.

#include <cstddef>
#include <span>

namespace calm::kernels {

namespace serial {

/// C[m×n] = A[m×k] · B[k×n]
void gemm_nn(std::size_t m, std::size_t k, std::size_t n, std::span<const double> a,
             std::span<const double> b, std::span<double> c);
/// C[m×n] = A[m×k] · B[n×k]ᵀ
void gemm_nt(std::size_t m, std::size_t k, std::size_t n, std::span<const double> a,
             std::span<const double> b, std::span<double> c);
/// C[m×n] = A[k×m]ᵀ · B[k×n]
void gemm_tn(std::size_t m, std::size_t k, std::size_t n, std::span<const double> a,
             std::span<const double> b, std::span<double> c);
/// Row-wise softmax with max subtraction.
void softmax_rows(std::size_t m, std::size_t n, std::span<const double> x, std::span<double> y);
/// out[i] = ‖x_i‖₂
void row_norms(std::size_t m, std::size_t d, std::span<const double> x, std::span<double> out);
/// out[i×n+j] = ⟨x_i, y_j⟩ / (nx[i]·ny[j])
void cosine_matrix(std::size_t m, std::size_t n, std::size_t d, std::span<const double> x,
                   std::span<const double> nx, std::span<const double> y,
                   std::span<const double> ny, std::span<double> out);
/// ranks[q] = 1 + |{j : s[q,j] > s[q,truth[q]]}|
void ranks_of_truth(std::size_t q, std::size_t g, std::span<const double> scores,
                    std::span<const std::size_t> truth, std::span<std::size_t> ranks);

}  // namespace serial

namespace omp {

void gemm_nn(std::size_t m, std::size_t k, std::size_t n, std::span<const double> a,
             std::span<const double> b, std::span<double> c);
void gemm_nt(std::size_t m, std::size_t k, std::size_t n, std::span<const double> a,
             std::span<const double> b, std::span<double> c);
void gemm_tn(std::size_t m, std::size_t k, std::size_t n, std::span<const double> a,
             std::span<const double> b, std::span<double> c);
void softmax_rows(std::size_t m, std::size_t n, std::span<const double> x, std::span<double> y);
void row_norms(std::size_t m, std::size_t d, std::span<const double> x, std::span<double> out);
void cosine_matrix(std::size_t m, std::size_t n, std::size_t d, std::span<const double> x,
                   std::span<const double> nx, std::span<const double> y,
                   std::span<const double> ny, std::span<double> out);
void ranks_of_truth(std::size_t q, std::size_t g, std::span<const double> scores,
                    std::span<const std::size_t> truth, std::span<std::size_t> ranks);

}  // namespace omp

/// Work (in multiply-adds) above which the dispatchers go parallel.
inline constexpr std::size_t kParallelThreshold = 1 << 16;

inline bool use_parallel(std::size_t work) { return work >= kParallelThreshold; }

inline void gemm_nn(std::size_t m, std::size_t k, std::size_t n, std::span<const double> a,
                    std::span<const double> b, std::span<double> c) {
  use_parallel(m * k * n) ? omp::gemm_nn(m, k, n, a, b, c) : serial::gemm_nn(m, k, n, a, b, c);
}
inline void gemm_nt(std::size_t m, std::size_t k, std::size_t n, std::span<const double> a,
                    std::span<const double> b, std::span<double> c) {
  use_parallel(m * k * n) ? omp::gemm_nt(m, k, n, a, b, c) : serial::gemm_nt(m, k, n, a, b, c);
}
inline void gemm_tn(std::size_t m, std::size_t k, std::size_t n, std::span<const double> a,
                    std::span<const double> b, std::span<double> c) {
  use_parallel(m * k * n) ? omp::gemm_tn(m, k, n, a, b, c) : serial::gemm_tn(m, k, n, a, b, c);
}
inline void softmax_rows(std::size_t m, std::size_t n, std::span<const double> x,
                         std::span<double> y) {
  use_parallel(m * n * 8) ? omp::softmax_rows(m, n, x, y) : serial::softmax_rows(m, n, x, y);
}
inline void row_norms(std::size_t m, std::size_t d, std::span<const double> x,
                      std::span<double> out) {
  use_parallel(m * d) ? omp::row_norms(m, d, x, out) : serial::row_norms(m, d, x, out);
}
inline void cosine_matrix(std::size_t m, std::size_t n, std::size_t d, std::span<const double> x,
                          std::span<const double> nx, std::span<const double> y,
                          std::span<const double> ny, std::span<double> out) {
  use_parallel(m * n * d) ? omp::cosine_matrix(m, n, d, x, nx, y, ny, out)
                          : serial::cosine_matrix(m, n, d, x, nx, y, ny, out);
}
inline void ranks_of_truth(std::size_t q, std::size_t g, std::span<const double> scores,
                           std::span<const std::size_t> truth, std::span<std::size_t> ranks) {
  use_parallel(q * g) ? omp::ranks_of_truth(q, g, scores, truth, ranks)
                      : serial::ranks_of_truth(q, g, scores, truth, ranks);
}

}  // namespace calm::kernels
