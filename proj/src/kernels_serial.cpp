#include "calm/kernels.hpp"
#include "kernel_rows.hpp"

namespace calm::kernels::serial {

void gemm_nn(std::size_t m, std::size_t k, std::size_t n, std::span<const double> a,
             std::span<const double> b, std::span<double> c) {
  for (std::size_t i = 0; i < m; ++i) rows::gemm_nn_row(i, k, n, a.data(), b.data(), c.data());
}

void gemm_nt(std::size_t m, std::size_t k, std::size_t n, std::span<const double> a,
             std::span<const double> b, std::span<double> c) {
  for (std::size_t i = 0; i < m; ++i) rows::gemm_nt_row(i, k, n, a.data(), b.data(), c.data());
}

void gemm_tn(std::size_t m, std::size_t k, std::size_t n, std::span<const double> a,
             std::span<const double> b, std::span<double> c) {
  for (std::size_t i = 0; i < m; ++i)
    rows::gemm_tn_row(i, m, k, n, a.data(), b.data(), c.data());
}

void softmax_rows(std::size_t m, std::size_t n, std::span<const double> x, std::span<double> y) {
  for (std::size_t i = 0; i < m; ++i) rows::softmax_row(i, n, x.data(), y.data());
}

void row_norms(std::size_t m, std::size_t d, std::span<const double> x, std::span<double> out) {
  for (std::size_t i = 0; i < m; ++i) out[i] = rows::row_norm(i, d, x.data());
}

void cosine_matrix(std::size_t m, std::size_t n, std::size_t d, std::span<const double> x,
                   std::span<const double> nx, std::span<const double> y,
                   std::span<const double> ny, std::span<double> out) {
  for (std::size_t i = 0; i < m; ++i)
    rows::cosine_row(i, n, d, x.data(), nx.data(), y.data(), ny.data(), out.data());
}

void ranks_of_truth(std::size_t q, std::size_t g, std::span<const double> scores,
                    std::span<const std::size_t> truth, std::span<std::size_t> ranks) {
  for (std::size_t i = 0; i < q; ++i) ranks[i] = rows::rank_row(i, g, scores.data(), truth[i]);
}

}  // namespace calm::kernels::serial
