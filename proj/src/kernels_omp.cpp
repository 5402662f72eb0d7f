#include <cstdint>

#include "calm/kernels.hpp"
#include "kernel_rows.hpp"

namespace calm::kernels::omp {

// OpenMP wants a signed loop index.
using index_t = std::int64_t;

void gemm_nn(std::size_t m, std::size_t k, std::size_t n, std::span<const double> a,
             std::span<const double> b, std::span<double> c) {
  const index_t count = static_cast<index_t>(m);
#pragma omp parallel for schedule(static)
  for (index_t i = 0; i < count; ++i)
    rows::gemm_nn_row(static_cast<std::size_t>(i), k, n, a.data(), b.data(), c.data());
}

void gemm_nt(std::size_t m, std::size_t k, std::size_t n, std::span<const double> a,
             std::span<const double> b, std::span<double> c) {
  const index_t count = static_cast<index_t>(m);
#pragma omp parallel for schedule(static)
  for (index_t i = 0; i < count; ++i)
    rows::gemm_nt_row(static_cast<std::size_t>(i), k, n, a.data(), b.data(), c.data());
}

void gemm_tn(std::size_t m, std::size_t k, std::size_t n, std::span<const double> a,
             std::span<const double> b, std::span<double> c) {
  const index_t count = static_cast<index_t>(m);
#pragma omp parallel for schedule(static)
  for (index_t i = 0; i < count; ++i)
    rows::gemm_tn_row(static_cast<std::size_t>(i), m, k, n, a.data(), b.data(), c.data());
}

void softmax_rows(std::size_t m, std::size_t n, std::span<const double> x, std::span<double> y) {
  const index_t count = static_cast<index_t>(m);
#pragma omp parallel for schedule(static)
  for (index_t i = 0; i < count; ++i)
    rows::softmax_row(static_cast<std::size_t>(i), n, x.data(), y.data());
}

void row_norms(std::size_t m, std::size_t d, std::span<const double> x, std::span<double> out) {
  const index_t count = static_cast<index_t>(m);
#pragma omp parallel for schedule(static)
  for (index_t i = 0; i < count; ++i)
    out[static_cast<std::size_t>(i)] = rows::row_norm(static_cast<std::size_t>(i), d, x.data());
}

void cosine_matrix(std::size_t m, std::size_t n, std::size_t d, std::span<const double> x,
                   std::span<const double> nx, std::span<const double> y,
                   std::span<const double> ny, std::span<double> out) {
  const index_t count = static_cast<index_t>(m);
#pragma omp parallel for schedule(static)
  for (index_t i = 0; i < count; ++i)
    rows::cosine_row(static_cast<std::size_t>(i), n, d, x.data(), nx.data(), y.data(), ny.data(),
                     out.data());
}

void ranks_of_truth(std::size_t q, std::size_t g, std::span<const double> scores,
                    std::span<const std::size_t> truth, std::span<std::size_t> ranks) {
  const index_t queries = static_cast<index_t>(q);
#pragma omp parallel for schedule(static)
  for (index_t i = 0; i < queries; ++i) {
    const auto qi = static_cast<std::size_t>(i);
    ranks[qi] = rows::rank_row(qi, g, scores.data(), truth[qi]);
  }
}

}  // namespace calm::kernels::omp
