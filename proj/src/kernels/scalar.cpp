// SPDX-License-Identifier: Apache-2.0
#include "cspt/kernels.hpp"

#include <bit>

namespace cspt::kernels {
namespace {

bool subset_scalar(std::span<const std::uint64_t> a, std::span<const std::uint64_t> b) {
    for (std::size_t i = 0; i < a.size(); ++i) {
        if ((a[i] & ~b[i]) != 0) {
            return false;
        }
    }
    return true;
}

bool intersects_scalar(std::span<const std::uint64_t> a, std::span<const std::uint64_t> b) {
    for (std::size_t i = 0; i < a.size(); ++i) {
        if ((a[i] & b[i]) != 0) {
            return true;
        }
    }
    return false;
}

std::size_t popcount_scalar(std::span<const std::uint64_t> a) {
    std::size_t total = 0;
    for (auto w : a) {
        total += static_cast<std::size_t>(std::popcount(w));
    }
    return total;
}

void and_not_scalar(std::span<const std::uint64_t> a, std::span<const std::uint64_t> b,
                    std::span<std::uint64_t> out) {
    for (std::size_t i = 0; i < a.size(); ++i) {
        out[i] = a[i] & ~b[i];
    }
}

RelationMatrix compose_scalar(const RelationMatrix& lhs, const RelationMatrix& rhs) {
    RelationMatrix out;
    for (std::size_t a = 0; a < 16; ++a) {
        std::uint16_t row = lhs.rows[a];
        std::uint16_t acc = 0;
        while (row != 0) {
            int b = std::countr_zero(row);
            acc |= rhs.rows[static_cast<std::size_t>(b)];
            row &= static_cast<std::uint16_t>(row - 1);
        }
        out.rows[a] = acc;
    }
    return out;
}

bool has_diagonal_scalar(const RelationMatrix& r) {
    for (std::size_t a = 0; a < 16; ++a) {
        if ((r.rows[a] >> a) & 1u) {
            return true;
        }
    }
    return false;
}

} // namespace

const KernelTable& scalar() {
    static const KernelTable table{
        "scalar",     &subset_scalar,  &intersects_scalar,  &popcount_scalar,
        &and_not_scalar, &compose_scalar, &has_diagonal_scalar,
    };
    return table;
}

} // namespace cspt::kernels
