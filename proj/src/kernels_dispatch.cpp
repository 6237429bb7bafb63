#include "exclab/kernels.hpp"

#include <cstdlib>
#include <cstring>

namespace exclab::kernels {

#if !defined(EXCLAB_HAVE_AVX2_TU)
// Build did not include the AVX2 translation unit (non-x86 target or the
// compiler lacks -mavx2); provide the null fallback here.
const FnTable* avx2_table() { return nullptr; }
#endif

namespace {

bool cpu_has_avx2() {
#if defined(__x86_64__) && (defined(__GNUC__) || defined(__clang__))
    return __builtin_cpu_supports("avx2");
#else
    return false;
#endif
}

const FnTable* select_initial() {
    if (const char* env = std::getenv("EXCLAB_KERNELS")) {
        if (std::strcmp(env, "scalar") == 0) return &scalar_table();
        if (std::strcmp(env, "avx2") == 0 && cpu_has_avx2() && avx2_table())
            return avx2_table();
    }
    if (cpu_has_avx2() && avx2_table()) return avx2_table();
    return &scalar_table();
}

const FnTable*& current() {
    static const FnTable* table = select_initial();
    return table;
}

}  // namespace

const FnTable& active() { return *current(); }

bool force(const char* name) {
    if (std::strcmp(name, "scalar") == 0) {
        current() = &scalar_table();
        return true;
    }
    if (std::strcmp(name, "avx2") == 0) {
        if (!cpu_has_avx2() || !avx2_table()) return false;
        current() = avx2_table();
        return true;
    }
    return false;
}

}  // namespace exclab::kernels
