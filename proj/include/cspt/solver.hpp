// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "cspt/formula.hpp"
#include "cspt/templates.hpp"

namespace cspt {

/// values[x] is the value of variable x; total over 0..n-1.
using Assignment = std::vector<Value>;

struct SolveStats {
    std::uint64_t nodes = 0;
    std::uint64_t revisions = 0;
};

/// Complete backtracking search. Variables are branched on in order of
/// decreasing degree (ties by index), values ascending, with generalized arc
/// consistency maintained on every instance. Every variable, including those
/// in no instance, takes a value from `allowed` (all of the domain when
/// absent). The result is the least model in that search order, or nullopt.
std::optional<Assignment> solve(const ConstraintSet& cs, const Formula& f,
                                std::optional<ValueSet> allowed = std::nullopt,
                                SolveStats* stats = nullptr);

bool is_satisfiable(const ConstraintSet& cs, const Formula& f, std::optional<ValueSet> allowed = std::nullopt);

/// True iff every instance accepts the assignment.
bool satisfies(const ConstraintSet& cs, const Formula& f, const Assignment& a);

inline constexpr std::size_t kMaxMinimalityInstances = 20;

/// Unsatisfiable, and satisfiable once any single instance is deleted.
/// Throws TooLarge above kMaxMinimalityInstances instances.
bool is_minimally_unsatisfiable(const ConstraintSet& cs, const Formula& f);

// ============================================================================
// Size bound for minimally unsatisfiable formulas
// ============================================================================

inline constexpr std::size_t kMaxMuInstances = 5;

struct MuFormula {
    Formula formula;
    std::size_t variables = 0;   // variables that occur
    std::int64_t bound = 0;      // (k-1)|S| - 1
    bool violates = false;
};

struct MuBoundReport {
    /// The set has no trivial assignment and no template with a unit or
    /// disequality implicate, which is when the bound is claimed.
    bool hypothesis_holds = false;
    std::size_t max_instances = 0;
    std::uint64_t nodes = 0;
    /// One representative per renaming class, in discovery order.
    std::vector<MuFormula> formulas;

    std::size_t violation_count() const;
    /// A violation while the hypothesis holds.
    bool bound_refuted() const { return hypothesis_holds && violation_count() > 0; }
};

/// Enumerates connected formulas with at most `max_instances` instances up to
/// renaming and argument symmetries, keeps the minimally unsatisfiable ones
/// and checks |Var(S)| <= (k-1)|S| - 1 on each. Boolean sets only
/// (NotBoolean otherwise); max_instances above kMaxMuInstances or more than
/// `budget` search nodes throw BudgetExceeded.
MuBoundReport check_mu_bound(const ConstraintSet& cs, std::size_t max_instances,
                             std::uint64_t budget = kDefaultEnumerationBudget);

} // namespace cspt
