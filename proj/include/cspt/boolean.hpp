// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <utility>

#include "cspt/templates.hpp"

namespace cspt {

struct UnitImplicate {
    std::size_t position = 0;
    Value value = 0;
    friend bool operator==(const UnitImplicate&, const UnitImplicate&) = default;
};

struct XorImplicate {
    std::size_t i = 0;
    std::size_t j = 1;
    friend bool operator==(const XorImplicate&, const XorImplicate&) = default;
};

enum class TrivialAssignment { AllZeros, AllOnes };

/// First (position, value) in lexicographic order that every satisfying tuple
/// agrees on. Throws NotBoolean unless t = 2.
std::optional<UnitImplicate> unit_implicate(const ConstraintTemplate& c);

/// First pair i < j with s_i != s_j on every satisfying tuple.
std::optional<XorImplicate> two_xor_implicate(const ConstraintTemplate& c);

std::optional<TrivialAssignment> is_trivially_valid(const ConstraintSet& cs);

struct SatVerdict {
    enum class Outcome { Trivial, CoarseUnit, CoarseTwoXor, Sharp };

    Outcome outcome = Outcome::Sharp;
    std::optional<TrivialAssignment> trivial;
    /// Template carrying the coarse witness.
    std::optional<std::size_t> template_index;
    std::optional<UnitImplicate> unit;
    std::optional<XorImplicate> two_xor;
};

/// Coarse/sharp classification of a boolean constraint set applied with
/// uniform weights. Cases are tried in order: trivially valid, a unit
/// implicate in some template, a disequality implicate in some template,
/// otherwise sharp. Templates are scanned in declared order.
SatVerdict classify_sat(const ConstraintSet& cs);

std::string_view to_string(SatVerdict::Outcome outcome);
std::string_view to_string(TrivialAssignment assignment);

/// e.g. "Coarse(2-XOR): neq x1!=x2"; positions are rendered 1-based.
std::string describe(const ConstraintSet& cs, const SatVerdict& verdict);

} // namespace cspt
