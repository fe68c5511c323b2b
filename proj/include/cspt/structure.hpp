// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cspt/templates.hpp"

namespace cspt {

// ============================================================================
// Bad values
// ============================================================================

struct BadnessWitness {
    Value value = 0;
    int level = 0;
    std::size_t template_index = 0;
    std::size_t position = 0;
    /// Position whose value is forced into the bad set; empty for level 0.
    std::optional<std::size_t> forcing_position;
};

struct BadnessReport {
    int t = 2;
    /// levels[v] is the first iteration in which v became bad; empty if good.
    std::vector<std::optional<int>> levels;
    /// One witness per bad value, ordered by (level, value).
    std::vector<BadnessWitness> trace;

    ValueSet good_values() const;
    ValueSet bad_values() const { return static_cast<ValueSet>(full_value_set(t) & ~good_values()); }
};

/// Least fixpoint of the bad-value forcing rule:
///  - v is bad at level 0 if some template never carries v at some position;
///  - v is bad at level j+1 if, for some template, position i and another
///    position m, every satisfying tuple with v at i has a value of level <= j
///    at m (the bad value may differ from tuple to tuple).
BadnessReport bad_values(const ConstraintSet& cs);

// ============================================================================
// Behavedness checks
// ============================================================================

struct WellBehavedResult {
    enum class Failure { None, NoGoodValue, ConstantSatisfied };

    bool holds = false;
    Failure failure = Failure::None;
    /// The constant value whose all-equal tuple every template accepts.
    std::optional<Value> value;
};

/// One link of a cycle formula: an instance of `template_index` whose position
/// `entry` holds the previous shared variable and `exit` the next one.
struct CycleSlot {
    std::size_t template_index = 0;
    std::size_t entry = 0;
    std::size_t exit = 1;

    friend bool operator==(const CycleSlot&, const CycleSlot&) = default;
    friend auto operator<=>(const CycleSlot&, const CycleSlot&) = default;
};

using Cycle = std::vector<CycleSlot>;

struct CycleCheck {
    bool holds = true;
    std::optional<Cycle> counterexample;
};

struct VeryWellBehavedResult {
    bool holds = false;
    std::optional<Cycle> counterexample;
};

struct ExtremeResult {
    bool holds = false;
    /// (good value, template index) pairs in value order, present iff holds.
    std::optional<std::vector<std::pair<Value, std::size_t>>> gamma;
};

WellBehavedResult is_well_behaved(const ConstraintSet& cs);
WellBehavedResult is_well_behaved(const ConstraintSet& cs, const BadnessReport& badness);

/// Decides whether every cycle formula (any length >= 2) has a satisfying
/// assignment using only `allowed` values, by closing the set of projected
/// link relations under composition. A failing cycle of minimal length is
/// returned on false.
CycleCheck cycles_admit_assignment(const ConstraintSet& cs, ValueSet allowed);

VeryWellBehavedResult is_very_well_behaved(const ConstraintSet& cs);

inline constexpr std::uint64_t kDefaultEnumerationBudget = 10'000'000;

/// Enumerates every cycle formula of length 2..max_len (max_len <= 8) and
/// searches each for an assignment over good values by exhaustion. Throws
/// BudgetExceeded past `budget` enumerated slots. With no good values the
/// answer is vacuously true.
CycleCheck cycle_oracle_brute(const ConstraintSet& cs, int max_len,
                              std::uint64_t budget = kDefaultEnumerationBudget);

ExtremeResult is_extremely_well_behaved(const ConstraintSet& cs);

// ============================================================================
// Verdict
// ============================================================================

enum class ThresholdOutlook { Sharp, Undetermined, NotSharp };

std::string_view to_string(ThresholdOutlook outlook);
std::string_view describe(ThresholdOutlook outlook);

struct StructureVerdict {
    ValueSet good_values = 0;
    BadnessReport badness;
    WellBehavedResult well;
    VeryWellBehavedResult very;
    ExtremeResult extreme;
    ThresholdOutlook outlook = ThresholdOutlook::NotSharp;
};

StructureVerdict classify_csp(const ConstraintSet& cs);

/// Human-readable rendering of a cycle, e.g. "neq(x1,x2) neq(x2,x3) neq(x3,x1)".
std::string format_cycle(const ConstraintSet& cs, const Cycle& cycle);

} // namespace cspt
