#pragma once

#include <cstddef>
#include <string_view>

namespace sib::kern {

// Hot inner loops of the tensor layer. Every entry has a scalar reference
// implementation and, on x86 with AVX2, a vectorized variant. Variants are
// selected once at runtime and must agree bit-for-bit with the reference:
// identical accumulation order per output element, no FMA contraction.
struct KernelTable {
    // c = a[m x k] * b[k x n] (row-major, c overwritten)
    void (*matmul)(const double* a, const double* b, double* c, int m, int k, int n);
    // c += a[m x k] * b[k x n]
    void (*matmul_acc)(const double* a, const double* b, double* c, int m, int k, int n);
    void (*add)(const double* a, const double* b, double* y, std::size_t n);
    void (*sub)(const double* a, const double* b, double* y, std::size_t n);
    void (*mul)(const double* a, const double* b, double* y, std::size_t n);
    // y += alpha * x
    void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
    // y = alpha * x
    void (*scale)(const double* x, double alpha, double* y, std::size_t n);
    void (*relu)(const double* x, double* y, std::size_t n);
    // y += (x > 0) ? g : 0
    void (*relu_bwd_acc)(const double* x, const double* g, double* y, std::size_t n);
};

// Active table. First call resolves the backend: SIB_KERNELS env var
// ("scalar" | "avx2" | "auto") if set, otherwise best supported.
const KernelTable& kernels();

// Force a backend by name; "auto" re-detects. Throws ConfigError on an
// unknown name or an unsupported backend.
void select_backend(std::string_view name);
std::string_view active_backend();

bool avx2_supported();

// Direct access for equivalence tests.
const KernelTable& scalar_kernels();
const KernelTable* avx2_kernels();  // nullptr when not compiled in / unsupported

}  // namespace sib::kern
