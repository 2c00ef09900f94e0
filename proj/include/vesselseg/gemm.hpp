#pragma once

// Row-major GEMM wrappers. Backed by CBLAS when available; the fallback is a
// plain ikj loop. Accumulation order over k is fixed per output element, so
// results are deterministic run to run.

#ifdef VESSELSEG_HAVE_CBLAS
#include <cblas.h>
#endif

namespace vesselseg::detail {

#ifdef VESSELSEG_HAVE_CBLAS

// C[M,N] = A[M,K] * B[K,N] (+ C when accumulate)
inline void gemm_nn(int M, int N, int K, const float* A, const float* B, float* C,
                    bool accumulate) {
  cblas_sgemm(CblasRowMajor, CblasNoTrans, CblasNoTrans, M, N, K, 1.0f, A, K, B, N,
              accumulate ? 1.0f : 0.0f, C, N);
}
inline void gemm_nn(int M, int N, int K, const double* A, const double* B, double* C,
                    bool accumulate) {
  cblas_dgemm(CblasRowMajor, CblasNoTrans, CblasNoTrans, M, N, K, 1.0, A, K, B, N,
              accumulate ? 1.0 : 0.0, C, N);
}

// C[M,N] = A[M,K] * B^T, B stored [N,K]
inline void gemm_nt(int M, int N, int K, const float* A, const float* B, float* C,
                    bool accumulate) {
  cblas_sgemm(CblasRowMajor, CblasNoTrans, CblasTrans, M, N, K, 1.0f, A, K, B, K,
              accumulate ? 1.0f : 0.0f, C, N);
}
inline void gemm_nt(int M, int N, int K, const double* A, const double* B, double* C,
                    bool accumulate) {
  cblas_dgemm(CblasRowMajor, CblasNoTrans, CblasTrans, M, N, K, 1.0, A, K, B, K,
              accumulate ? 1.0 : 0.0, C, N);
}

// C[M,N] = A^T * B[K,N], A stored [K,M]
inline void gemm_tn(int M, int N, int K, const float* A, const float* B, float* C,
                    bool accumulate) {
  cblas_sgemm(CblasRowMajor, CblasTrans, CblasNoTrans, M, N, K, 1.0f, A, M, B, N,
              accumulate ? 1.0f : 0.0f, C, N);
}
inline void gemm_tn(int M, int N, int K, const double* A, const double* B, double* C,
                    bool accumulate) {
  cblas_dgemm(CblasRowMajor, CblasTrans, CblasNoTrans, M, N, K, 1.0, A, M, B, N,
              accumulate ? 1.0 : 0.0, C, N);
}

#else

template <typename T>
void gemm_nn(int M, int N, int K, const T* A, const T* B, T* C, bool accumulate) {
  if (!accumulate) {
    for (int i = 0; i < M * N; ++i) C[i] = T(0);
  }
  for (int m = 0; m < M; ++m) {
    T* crow = C + static_cast<size_t>(m) * N;
    for (int k = 0; k < K; ++k) {
      const T a = A[static_cast<size_t>(m) * K + k];
      const T* brow = B + static_cast<size_t>(k) * N;
      for (int nn = 0; nn < N; ++nn) crow[nn] += a * brow[nn];
    }
  }
}

template <typename T>
void gemm_nt(int M, int N, int K, const T* A, const T* B, T* C, bool accumulate) {
  for (int m = 0; m < M; ++m) {
    const T* arow = A + static_cast<size_t>(m) * K;
    for (int nn = 0; nn < N; ++nn) {
      const T* brow = B + static_cast<size_t>(nn) * K;
      T acc = T(0);
      for (int k = 0; k < K; ++k) acc += arow[k] * brow[k];
      T& out = C[static_cast<size_t>(m) * N + nn];
      out = accumulate ? out + acc : acc;
    }
  }
}

template <typename T>
void gemm_tn(int M, int N, int K, const T* A, const T* B, T* C, bool accumulate) {
  if (!accumulate) {
    for (int i = 0; i < M * N; ++i) C[i] = T(0);
  }
  for (int k = 0; k < K; ++k) {
    const T* arow = A + static_cast<size_t>(k) * M;
    const T* brow = B + static_cast<size_t>(k) * N;
    for (int m = 0; m < M; ++m) {
      const T a = arow[m];
      T* crow = C + static_cast<size_t>(m) * N;
      for (int nn = 0; nn < N; ++nn) crow[nn] += a * brow[nn];
    }
  }
}

#endif  // VESSELSEG_HAVE_CBLAS

}  // namespace vesselseg::detail
