#include "sib/kernels.hpp"

#include <cstring>

// Reference kernels. The i-k-j matmul order keeps the k-accumulation for
// each output element strictly sequential; the AVX2 variant vectorizes over
// j only, so both produce identical bits (with -ffp-contract=off).
namespace sib::kern {
namespace {

void matmul_scalar(const double* a, const double* b, double* c, int m, int k, int n) {
    std::memset(c, 0, sizeof(double) * static_cast<std::size_t>(m) * n);
    for (int i = 0; i < m; ++i) {
        const double* arow = a + static_cast<std::size_t>(i) * k;
        double* crow = c + static_cast<std::size_t>(i) * n;
        for (int kk = 0; kk < k; ++kk) {
            double aik = arow[kk];
            const double* brow = b + static_cast<std::size_t>(kk) * n;
            for (int j = 0; j < n; ++j) crow[j] += aik * brow[j];
        }
    }
}

void matmul_acc_scalar(const double* a, const double* b, double* c, int m, int k, int n) {
    for (int i = 0; i < m; ++i) {
        const double* arow = a + static_cast<std::size_t>(i) * k;
        double* crow = c + static_cast<std::size_t>(i) * n;
        for (int kk = 0; kk < k; ++kk) {
            double aik = arow[kk];
            const double* brow = b + static_cast<std::size_t>(kk) * n;
            for (int j = 0; j < n; ++j) crow[j] += aik * brow[j];
        }
    }
}

void add_scalar(const double* a, const double* b, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] = a[i] + b[i];
}

void sub_scalar(const double* a, const double* b, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] = a[i] - b[i];
}

void mul_scalar(const double* a, const double* b, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] = a[i] * b[i];
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void scale_scalar(const double* x, double alpha, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] = alpha * x[i];
}

void relu_scalar(const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] = x[i] > 0.0 ? x[i] : 0.0;
}

void relu_bwd_acc_scalar(const double* x, const double* g, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += x[i] > 0.0 ? g[i] : 0.0;
}

}  // namespace

const KernelTable& scalar_kernels() {
    static const KernelTable table{
        matmul_scalar, matmul_acc_scalar, add_scalar,  sub_scalar,         mul_scalar,
        axpy_scalar,   scale_scalar,      relu_scalar, relu_bwd_acc_scalar};
    return table;
}

}  // namespace sib::kern
