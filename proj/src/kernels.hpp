#pragma once

// Raw strided matrix kernels shared by the layers. All loops run in a fixed
// order so results are bit-reproducible; inner loops are unit-stride over the
// output row so the compiler can vectorize them without reassociation.

#include <cmath>
#include <cstddef>
#include <vector>

namespace tempcast::kernels {

// C[m×n] += A[m×k] · B[k×n]
//
// Output rows may overlap in memory (ldc smaller than n); rows are then
// applied one after another in ascending order.
void gemm_acc(const double* a, std::size_t lda, const double* b, std::size_t ldb, double* c,
              std::size_t ldc, std::size_t m, std::size_t k, std::size_t n);

// C[k×n] += A[m×k]ᵀ · B[m×n]; every element sums over i in ascending order.
void gemm_at_acc(const double* a, std::size_t lda, const double* b, std::size_t ldb, double* c,
                 std::size_t ldc, std::size_t m, std::size_t k, std::size_t n);

// dst[cols×rows] = src[rows×cols]ᵀ
inline void transpose(const double* src, std::size_t rows, std::size_t cols, double* dst) {
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) dst[j * rows + i] = src[i * cols + j];
}

inline double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace tempcast::kernels
