// SPDX-License-Identifier: Apache-2.0
#pragma once

// Data-parallel inner loops shared by the relational code: bit-set algebra
// over satisfying-tuple tables and boolean products of small relations.
// Each kernel has a portable scalar reference and, where the CPU allows it,
// a vector variant selected once at runtime. Both must agree bit-for-bit.

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>

namespace cspt {

/// A binary relation over a domain of at most 16 values, one 16-bit row per
/// left value: bit b of rows[a] is set iff (a, b) is in the relation.
struct alignas(32) RelationMatrix {
    std::array<std::uint16_t, 16> rows{};

    friend bool operator==(const RelationMatrix&, const RelationMatrix&) = default;
};

namespace kernels {

struct KernelTable {
    std::string_view name;

    /// a ⊆ b, word-wise; both spans have equal length.
    bool (*subset)(std::span<const std::uint64_t> a, std::span<const std::uint64_t> b);
    /// a ∩ b ≠ ∅.
    bool (*intersects)(std::span<const std::uint64_t> a, std::span<const std::uint64_t> b);
    std::size_t (*popcount)(std::span<const std::uint64_t> a);
    /// out = a & ~b.
    void (*and_not)(std::span<const std::uint64_t> a, std::span<const std::uint64_t> b,
                    std::span<std::uint64_t> out);

    /// Relational product: (a, c) ∈ result iff ∃b: (a, b) ∈ lhs and (b, c) ∈ rhs.
    RelationMatrix (*compose)(const RelationMatrix& lhs, const RelationMatrix& rhs);
    bool (*has_diagonal)(const RelationMatrix& r);
};

const KernelTable& scalar();

/// nullptr when the vector variant was not compiled in or the CPU lacks it.
const KernelTable* avx2();

/// The table used by the library. Chosen on first use; the environment
/// variable CSPT_KERNELS=scalar forces the reference path.
const KernelTable& active();

} // namespace kernels
} // namespace cspt
