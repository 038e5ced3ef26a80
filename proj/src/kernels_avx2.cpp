#include "sib/kernels.hpp"

#include <cstring>
#include <immintrin.h>

// AVX2 variants. Vectorization is over the output (j) axis only, and
// multiply+add stay separate instructions, so each output element sees the
// same operations in the same order as the scalar reference. Equivalence
// tests assert bitwise equality.
namespace sib::kern {
namespace {

inline void matmul_rows_avx2(const double* a, const double* b, double* c, int m, int k, int n) {
    const int n4 = n & ~3;
    for (int i = 0; i < m; ++i) {
        const double* arow = a + static_cast<std::size_t>(i) * k;
        double* crow = c + static_cast<std::size_t>(i) * n;
        for (int kk = 0; kk < k; ++kk) {
            double aik = arow[kk];
            const double* brow = b + static_cast<std::size_t>(kk) * n;
            __m256d va = _mm256_set1_pd(aik);
            int j = 0;
            for (; j < n4; j += 4) {
                __m256d vc = _mm256_loadu_pd(crow + j);
                __m256d vb = _mm256_loadu_pd(brow + j);
                vc = _mm256_add_pd(vc, _mm256_mul_pd(va, vb));
                _mm256_storeu_pd(crow + j, vc);
            }
            for (; j < n; ++j) crow[j] += aik * brow[j];
        }
    }
}

void matmul_avx2(const double* a, const double* b, double* c, int m, int k, int n) {
    std::memset(c, 0, sizeof(double) * static_cast<std::size_t>(m) * n);
    matmul_rows_avx2(a, b, c, m, k, n);
}

void matmul_acc_avx2(const double* a, const double* b, double* c, int m, int k, int n) {
    matmul_rows_avx2(a, b, c, m, k, n);
}

void add_avx2(const double* a, const double* b, double* y, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(y + i, _mm256_add_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
    for (; i < n; ++i) y[i] = a[i] + b[i];
}

void sub_avx2(const double* a, const double* b, double* y, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(y + i, _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
    for (; i < n; ++i) y[i] = a[i] - b[i];
}

void mul_avx2(const double* a, const double* b, double* y, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(y + i, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
    for (; i < n; ++i) y[i] = a[i] * b[i];
}

void axpy_avx2(double alpha, const double* x, double* y, std::size_t n) {
    __m256d va = _mm256_set1_pd(alpha);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d vy = _mm256_loadu_pd(y + i);
        vy = _mm256_add_pd(vy, _mm256_mul_pd(va, _mm256_loadu_pd(x + i)));
        _mm256_storeu_pd(y + i, vy);
    }
    for (; i < n; ++i) y[i] += alpha * x[i];
}

void scale_avx2(const double* x, double alpha, double* y, std::size_t n) {
    __m256d va = _mm256_set1_pd(alpha);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(y + i, _mm256_mul_pd(va, _mm256_loadu_pd(x + i)));
    for (; i < n; ++i) y[i] = alpha * x[i];
}

void relu_avx2(const double* x, double* y, std::size_t n) {
    __m256d vz = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(y + i, _mm256_max_pd(_mm256_loadu_pd(x + i), vz));
    for (; i < n; ++i) y[i] = x[i] > 0.0 ? x[i] : 0.0;
}

void relu_bwd_acc_avx2(const double* x, const double* g, double* y, std::size_t n) {
    __m256d vz = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d mask = _mm256_cmp_pd(_mm256_loadu_pd(x + i), vz, _CMP_GT_OQ);
        __m256d vg = _mm256_and_pd(mask, _mm256_loadu_pd(g + i));
        _mm256_storeu_pd(y + i, _mm256_add_pd(_mm256_loadu_pd(y + i), vg));
    }
    for (; i < n; ++i) y[i] += x[i] > 0.0 ? g[i] : 0.0;
}

}  // namespace

const KernelTable* avx2_table_impl() {
    static const KernelTable table{
        matmul_avx2, matmul_acc_avx2, add_avx2,  sub_avx2,         mul_avx2,
        axpy_avx2,   scale_avx2,      relu_avx2, relu_bwd_acc_avx2};
    return &table;
}

}  // namespace sib::kern
