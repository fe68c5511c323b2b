// SPDX-License-Identifier: Apache-2.0
#include "cspt/kernels.hpp"

#include <cstdlib>
#include <string_view>

namespace cspt::kernels {

#if defined(CSPT_HAVE_AVX2)
const KernelTable& avx2_table();
#endif

const KernelTable* avx2() {
#if defined(CSPT_HAVE_AVX2)
    static const bool supported = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("popcnt");
    return supported ? &avx2_table() : nullptr;
#else
    return nullptr;
#endif
}

const KernelTable& active() {
    static const KernelTable* chosen = [] {
        const char* forced = std::getenv("CSPT_KERNELS");
        if (forced != nullptr && std::string_view(forced) == "scalar") {
            return &scalar();
        }
        if (const KernelTable* v = avx2()) {
            return v;
        }
        return &scalar();
    }();
    return *chosen;
}

} // namespace cspt::kernels
