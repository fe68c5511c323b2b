// SPDX-License-Identifier: Apache-2.0
//
// AVX2 variants. This translation unit is compiled with -mavx2 -mpopcnt and
// must only be entered after the runtime CPU check in dispatch.cpp.

#include "cspt/kernels.hpp"

#include <immintrin.h>

#include <bit>

namespace cspt::kernels {
namespace {

inline __m256i load4(const std::uint64_t* p) {
    return _mm256_loadu_si256(reinterpret_cast<const __m256i*>(p));
}

bool subset_avx2(std::span<const std::uint64_t> a, std::span<const std::uint64_t> b) {
    const std::size_t n = a.size();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        // testc(b, a) == 1 iff (~b & a) == 0
        if (!_mm256_testc_si256(load4(b.data() + i), load4(a.data() + i))) {
            return false;
        }
    }
    for (; i < n; ++i) {
        if ((a[i] & ~b[i]) != 0) {
            return false;
        }
    }
    return true;
}

bool intersects_avx2(std::span<const std::uint64_t> a, std::span<const std::uint64_t> b) {
    const std::size_t n = a.size();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        if (!_mm256_testz_si256(load4(a.data() + i), load4(b.data() + i))) {
            return true;
        }
    }
    for (; i < n; ++i) {
        if ((a[i] & b[i]) != 0) {
            return true;
        }
    }
    return false;
}

std::size_t popcount_avx2(std::span<const std::uint64_t> a) {
    // Hardware popcnt per lane beats the nibble-LUT trick for the table sizes
    // used here (at most 2^18 words).
    std::size_t total = 0;
    std::size_t i = 0;
    const std::size_t n = a.size();
    for (; i + 4 <= n; i += 4) {
        total += static_cast<std::size_t>(_mm_popcnt_u64(a[i]) + _mm_popcnt_u64(a[i + 1]) +
                                          _mm_popcnt_u64(a[i + 2]) + _mm_popcnt_u64(a[i + 3]));
    }
    for (; i < n; ++i) {
        total += static_cast<std::size_t>(_mm_popcnt_u64(a[i]));
    }
    return total;
}

void and_not_avx2(std::span<const std::uint64_t> a, std::span<const std::uint64_t> b,
                  std::span<std::uint64_t> out) {
    const std::size_t n = a.size();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256i r = _mm256_andnot_si256(load4(b.data() + i), load4(a.data() + i));
        _mm256_storeu_si256(reinterpret_cast<__m256i*>(out.data() + i), r);
    }
    for (; i < n; ++i) {
        out[i] = a[i] & ~b[i];
    }
}

// The whole 16x16 matrix fits in one register, one 16-bit lane per row.
RelationMatrix compose_avx2(const RelationMatrix& lhs, const RelationMatrix& rhs) {
    const __m256i left = _mm256_load_si256(reinterpret_cast<const __m256i*>(lhs.rows.data()));
    const __m256i zero = _mm256_setzero_si256();
    __m256i acc = zero;
    for (int b = 0; b < 16; ++b) {
        const __m256i bit = _mm256_set1_epi16(static_cast<short>(1u << b));
        // lanes a with (a, b) in lhs
        const __m256i hit = _mm256_cmpeq_epi16(_mm256_and_si256(left, bit), bit);
        const __m256i row = _mm256_set1_epi16(static_cast<short>(rhs.rows[static_cast<std::size_t>(b)]));
        acc = _mm256_or_si256(acc, _mm256_and_si256(hit, row));
    }
    RelationMatrix out;
    _mm256_store_si256(reinterpret_cast<__m256i*>(out.rows.data()), acc);
    return out;
}

bool has_diagonal_avx2(const RelationMatrix& r) {
    const __m256i identity = _mm256_setr_epi16(
        0x0001, 0x0002, 0x0004, 0x0008, 0x0010, 0x0020, 0x0040, 0x0080,
        0x0100, 0x0200, 0x0400, 0x0800, 0x1000, 0x2000, 0x4000, static_cast<short>(0x8000));
    const __m256i m = _mm256_load_si256(reinterpret_cast<const __m256i*>(r.rows.data()));
    return !_mm256_testz_si256(m, identity);
}

} // namespace

const KernelTable& avx2_table() {
    static const KernelTable table{
        "avx2",       &subset_avx2,  &intersects_avx2,  &popcount_avx2,
        &and_not_avx2, &compose_avx2, &has_diagonal_avx2,
    };
    return table;
}

} // namespace cspt::kernels
