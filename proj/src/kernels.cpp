#include <vector>

#include "kernels.hpp"

namespace tempcast::kernels {

namespace detail {
namespace {

constexpr std::size_t kRowBlock = 4;
constexpr std::size_t kColBlock = 8;

// Accumulates a rows×cols tile of C over `depth` rank-1 updates. Row r of the
// tile takes its scalar from A(r, p), which is a[r*lda + p] or, when
// Transposed, a[p*lda + r]; every row shares b[p*ldb + j]. Each C element
// sums its products in ascending p, exactly as the untiled loop would.
template <bool Transposed, std::size_t Rows, std::size_t Cols>
void tile(const double* a, std::size_t lda, const double* b, std::size_t ldb, double* c,
          std::size_t ldc, std::size_t depth) {
  double acc[Rows][Cols];
  for (std::size_t r = 0; r < Rows; ++r)
    for (std::size_t j = 0; j < Cols; ++j) acc[r][j] = c[r * ldc + j];
  for (std::size_t p = 0; p < depth; ++p) {
    const double* b_row = b + p * ldb;
    for (std::size_t r = 0; r < Rows; ++r) {
      const double s = Transposed ? a[p * lda + r] : a[r * lda + p];
      for (std::size_t j = 0; j < Cols; ++j) acc[r][j] += s * b_row[j];
    }
  }
  for (std::size_t r = 0; r < Rows; ++r)
    for (std::size_t j = 0; j < Cols; ++j) c[r * ldc + j] = acc[r][j];
}

template <bool Transposed>
void tile_any(const double* a, std::size_t lda, const double* b, std::size_t ldb,
                     double* c, std::size_t ldc, std::size_t depth, std::size_t rows,
                     std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t p = 0; p < depth; ++p) {
      const double s = Transposed ? a[p * lda + r] : a[r * lda + p];
      const double* b_row = b + p * ldb;
      for (std::size_t j = 0; j < cols; ++j) c[r * ldc + j] += s * b_row[j];
    }
}

// C[rows×cols] += Σ_p A(r,p)·B[p][:]
template <bool Transposed>
void blocked(const double* a, std::size_t lda, const double* b, std::size_t ldb,
                    double* c, std::size_t ldc, std::size_t rows, std::size_t depth,
                    std::size_t cols) {
  auto row_ptr = [&](std::size_t i) { return Transposed ? a + i : a + i * lda; };
  std::size_t i = 0;
  for (; i + kRowBlock <= rows; i += kRowBlock) {
    std::size_t j = 0;
    for (; j + kColBlock <= cols; j += kColBlock)
      tile<Transposed, kRowBlock, kColBlock>(row_ptr(i), lda, b + j, ldb, c + i * ldc + j, ldc,
                                             depth);
    if (j < cols)
      tile_any<Transposed>(row_ptr(i), lda, b + j, ldb, c + i * ldc + j, ldc, depth, kRowBlock,
                           cols - j);
  }
  for (; i < rows; ++i) {
    std::size_t j = 0;
    for (; j + kColBlock <= cols; j += kColBlock)
      tile<Transposed, 1, kColBlock>(row_ptr(i), lda, b + j, ldb, c + i * ldc + j, ldc, depth);
    if (j < cols)
      tile_any<Transposed>(row_ptr(i), lda, b + j, ldb, c + i * ldc + j, ldc, depth, 1, cols - j);
  }
}

}  // namespace
}  // namespace detail


void gemm_acc(const double* a, std::size_t lda, const double* b, std::size_t ldb, double* c,
              std::size_t ldc, std::size_t m, std::size_t k, std::size_t n) {
  if (ldc < n) {
    for (std::size_t i = 0; i < m; ++i)
      detail::tile_any<false>(a + i * lda, lda, b, ldb, c + i * ldc, ldc, k, 1, n);
    return;
  }
  // Row blocks of A are packed depth-major so the tile reads its scalars from
  // one contiguous run per step.
  std::vector<double> panel(k * detail::kRowBlock);
  std::size_t i = 0;
  for (; i + detail::kRowBlock <= m; i += detail::kRowBlock) {
    for (std::size_t r = 0; r < detail::kRowBlock; ++r)
      for (std::size_t p = 0; p < k; ++p) panel[p * detail::kRowBlock + r] = a[(i + r) * lda + p];
    detail::blocked<true>(panel.data(), detail::kRowBlock, b, ldb, c + i * ldc, ldc,
                          detail::kRowBlock, k, n);
  }
  if (i < m) detail::blocked<false>(a + i * lda, lda, b, ldb, c + i * ldc, ldc, m - i, k, n);
}

void gemm_at_acc(const double* a, std::size_t lda, const double* b, std::size_t ldb, double* c,
                 std::size_t ldc, std::size_t m, std::size_t k, std::size_t n) {
  detail::blocked<true>(a, lda, b, ldb, c, ldc, k, m, n);
}

}  // namespace tempcast::kernels
