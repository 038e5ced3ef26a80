#include "sib/kernels.hpp"

#include <cstdlib>
#include <string>

#include "sib/errors.hpp"

namespace sib::kern {

#if defined(SIB_HAVE_AVX2)
const KernelTable* avx2_table_impl();
#endif

bool avx2_supported() {
#if defined(SIB_HAVE_AVX2) && defined(__x86_64__)
    return __builtin_cpu_supports("avx2") != 0;
#else
    return false;
#endif
}

const KernelTable* avx2_kernels() {
#if defined(SIB_HAVE_AVX2)
    if (avx2_supported()) return avx2_table_impl();
#endif
    return nullptr;
}

namespace {

struct Active {
    const KernelTable* table;
    std::string name;
};

Active resolve(std::string_view name) {
    if (name == "auto" || name.empty()) {
        if (const KernelTable* t = avx2_kernels()) return {t, "avx2"};
        return {&scalar_kernels(), "scalar"};
    }
    if (name == "scalar") return {&scalar_kernels(), "scalar"};
    if (name == "avx2") {
        const KernelTable* t = avx2_kernels();
        if (!t) throw ConfigError("kernel backend 'avx2' is not supported on this CPU/build");
        return {t, "avx2"};
    }
    throw ConfigError("unknown kernel backend '" + std::string(name) +
                      "' (expected scalar, avx2 or auto)");
}

Active& active() {
    static Active a = [] {
        const char* env = std::getenv("SIB_KERNELS");
        return resolve(env ? std::string_view(env) : std::string_view("auto"));
    }();
    return a;
}

}  // namespace

const KernelTable& kernels() { return *active().table; }

void select_backend(std::string_view name) { active() = resolve(name); }

std::string_view active_backend() { return active().name; }

}  // namespace sib::kern
