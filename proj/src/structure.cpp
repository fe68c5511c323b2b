// SPDX-License-Identifier: Apache-2.0
#include "cspt/structure.hpp"

#include <algorithm>
#include <bit>
#include <deque>
#include <unordered_map>

#include "cspt/error.hpp"

namespace cspt {

ValueSet BadnessReport::good_values() const {
    ValueSet good = 0;
    for (std::size_t v = 0; v < levels.size(); ++v) {
        if (!levels[v]) {
            good |= static_cast<ValueSet>(1u << v);
        }
    }
    return good;
}

namespace {

/// support[i][v][m]: values seen at position m over the satisfying tuples
/// carrying v at position i. support[i][v][i] is {v} or empty.
struct SupportTable {
    int k = 0;
    int t = 0;
    std::vector<ValueSet> masks;

    ValueSet at(std::size_t i, Value v, std::size_t m) const {
        return masks[(i * static_cast<std::size_t>(t) + v) * static_cast<std::size_t>(k) + m];
    }
};

SupportTable build_support(const ConstraintTemplate& c) {
    SupportTable table;
    table.k = c.arity();
    table.t = c.domain_size();
    const auto k = static_cast<std::size_t>(table.k);
    const auto t = static_cast<std::size_t>(table.t);
    table.masks.assign(k * t * k, 0);
    for (const Tuple& s : c.satisfying_tuples()) {
        for (std::size_t i = 0; i < k; ++i) {
            ValueSet* row = &table.masks[(i * t + s[i]) * k];
            for (std::size_t m = 0; m < k; ++m) {
                row[m] |= static_cast<ValueSet>(1u << s[m]);
            }
        }
    }
    return table;
}

} // namespace

BadnessReport bad_values(const ConstraintSet& cs) {
    const int t = cs.domain_size();
    const auto k = static_cast<std::size_t>(cs.arity());
    std::vector<SupportTable> support;
    support.reserve(cs.size());
    for (const auto& c : cs.templates()) {
        support.push_back(build_support(c));
    }

    BadnessReport report;
    report.t = t;
    report.levels.assign(static_cast<std::size_t>(t), std::nullopt);

    // level 0
    for (int v = 0; v < t; ++v) {
        const auto value = static_cast<Value>(v);
        for (std::size_t c = 0; c < cs.size() && !report.levels[value]; ++c) {
            for (std::size_t i = 0; i < k; ++i) {
                if (support[c].at(i, value, i) == 0) {
                    report.levels[value] = 0;
                    report.trace.push_back({value, 0, c, i, std::nullopt});
                    break;
                }
            }
        }
    }

    ValueSet bad = report.bad_values();
    for (int level = 1; level <= t; ++level) {
        ValueSet added = 0;
        for (int v = 0; v < t; ++v) {
            const auto value = static_cast<Value>(v);
            if (report.levels[value]) {
                continue;
            }
            bool found = false;
            for (std::size_t c = 0; c < cs.size() && !found; ++c) {
                for (std::size_t i = 0; i < k && !found; ++i) {
                    for (std::size_t m = 0; m < k && !found; ++m) {
                        if (m == i) {
                            continue;
                        }
                        // non-empty because v is not 0-bad
                        if ((support[c].at(i, value, m) & ~bad) == 0) {
                            report.levels[value] = level;
                            report.trace.push_back({value, level, c, i, m});
                            added |= static_cast<ValueSet>(1u << v);
                            found = true;
                        }
                    }
                }
            }
        }
        if (added == 0) {
            break;
        }
        bad |= added;
    }
    return report;
}

// ============================================================================
// Well-behaved
// ============================================================================

WellBehavedResult is_well_behaved(const ConstraintSet& cs) {
    return is_well_behaved(cs, bad_values(cs));
}

WellBehavedResult is_well_behaved(const ConstraintSet& cs, const BadnessReport& badness) {
    WellBehavedResult result;
    if (badness.good_values() == 0) {
        result.failure = WellBehavedResult::Failure::NoGoodValue;
        return result;
    }
    const auto k = static_cast<std::size_t>(cs.arity());
    for (int v = 0; v < cs.domain_size(); ++v) {
        const Tuple constant(k, static_cast<Value>(v));
        const bool rejected = std::any_of(cs.templates().begin(), cs.templates().end(),
                                          [&](const ConstraintTemplate& c) { return !c.contains(constant); });
        if (!rejected) {
            result.failure = WellBehavedResult::Failure::ConstantSatisfied;
            result.value = static_cast<Value>(v);
            return result;
        }
    }
    result.holds = true;
    return result;
}

// ============================================================================
// Cycle closure
// ============================================================================

namespace {

struct MatrixHash {
    std::size_t operator()(const RelationMatrix& m) const noexcept {
        std::uint64_t h = 0x9e3779b97f4a7c15ull;
        for (std::uint16_t row : m.rows) {
            h ^= row;
            h *= 0x100000001b3ull;
            h ^= h >> 29;
        }
        return static_cast<std::size_t>(h);
    }
};

struct Generator {
    RelationMatrix matrix;
    CycleSlot slot;
};

std::vector<Generator> link_generators(const ConstraintSet& cs, ValueSet allowed) {
    const auto k = static_cast<std::size_t>(cs.arity());
    std::vector<Generator> gens;
    for (std::size_t c = 0; c < cs.size(); ++c) {
        for (std::size_t i = 0; i < k; ++i) {
            for (std::size_t j = 0; j < k; ++j) {
                if (i == j) {
                    continue;
                }
                RelationMatrix m = projection_relation(cs[c], i, j, allowed).matrix;
                const bool dup = std::any_of(gens.begin(), gens.end(),
                                             [&](const Generator& g) { return g.matrix == m; });
                if (!dup) {
                    gens.push_back({m, {c, i, j}});
                }
            }
        }
    }
    return gens;
}

} // namespace

CycleCheck cycles_admit_assignment(const ConstraintSet& cs, ValueSet allowed) {
    CycleCheck result;
    if (allowed == 0) {
        return result;
    }
    const auto& kern = kernels::active();
    const std::vector<Generator> gens = link_generators(cs, allowed);

    // Products of >= 2 generators, discovered breadth-first so the first
    // diagonal-free product has minimal length.
    struct Node {
        RelationMatrix matrix;
        std::size_t parent;  // index into nodes, or npos for a generator
        std::size_t gen;
    };
    constexpr std::size_t npos = static_cast<std::size_t>(-1);
    std::vector<Node> nodes;
    std::unordered_map<RelationMatrix, std::size_t, MatrixHash> seen;

    auto unwind = [&](std::size_t idx) {
        Cycle cycle;
        while (idx != npos) {
            cycle.push_back(gens[nodes[idx].gen].slot);
            idx = nodes[idx].parent;
        }
        std::reverse(cycle.begin(), cycle.end());
        return cycle;
    };

    for (std::size_t g = 0; g < gens.size(); ++g) {
        nodes.push_back({gens[g].matrix, npos, g});
    }
    std::vector<std::size_t> frontier(gens.size());
    for (std::size_t g = 0; g < gens.size(); ++g) {
        frontier[g] = g;
    }
    while (!frontier.empty()) {
        std::vector<std::size_t> next;
        for (std::size_t idx : frontier) {
            for (std::size_t g = 0; g < gens.size(); ++g) {
                RelationMatrix product = kern.compose(nodes[idx].matrix, gens[g].matrix);
                if (seen.contains(product)) {
                    continue;
                }
                nodes.push_back({product, idx, g});
                const std::size_t id = nodes.size() - 1;
                seen.emplace(product, id);
                if (!kern.has_diagonal(product)) {
                    result.holds = false;
                    result.counterexample = unwind(id);
                    return result;
                }
                next.push_back(id);
            }
        }
        frontier = std::move(next);
    }
    return result;
}

VeryWellBehavedResult is_very_well_behaved(const ConstraintSet& cs) {
    const BadnessReport badness = bad_values(cs);
    VeryWellBehavedResult result;
    if (!is_well_behaved(cs, badness).holds) {
        return result;
    }
    CycleCheck cycles = cycles_admit_assignment(cs, badness.good_values());
    result.holds = cycles.holds;
    result.counterexample = std::move(cycles.counterexample);
    return result;
}

// ============================================================================
// Brute-force cycle oracle
// ============================================================================

namespace {

// Direct tuple scan, kept apart from projection_relation on purpose.
bool slot_feasible(const ConstraintTemplate& c, std::size_t entry, std::size_t exit, Value a, Value b,
                   ValueSet good) {
    for (const Tuple& s : c.satisfying_tuples()) {
        if (s[entry] != a || s[exit] != b) {
            continue;
        }
        bool ok = true;
        for (Value v : s) {
            ok = ok && ((good >> v) & 1u);
        }
        if (ok) {
            return true;
        }
    }
    return false;
}

struct SlotType {
    CycleSlot representative;
    std::vector<std::vector<bool>> feasible;  // [a][b] over all domain values
};

bool cycle_satisfiable(const std::vector<const SlotType*>& slots, const std::vector<Value>& good_list) {
    const std::size_t m = slots.size();
    std::vector<Value> shared(m);
    // depth-first over shared variables; slot r links shared[r] -> shared[r+1 mod m]
    auto dfs = [&](auto&& self, std::size_t r) -> bool {
        if (r == m) {
            return slots[m - 1]->feasible[shared[m - 1]][shared[0]];
        }
        for (Value v : good_list) {
            shared[r] = v;
            if (r > 0 && !slots[r - 1]->feasible[shared[r - 1]][v]) {
                continue;
            }
            if (self(self, r + 1)) {
                return true;
            }
        }
        return false;
    };
    return dfs(dfs, 0);
}

// Odometer over slot-type sequences, last slot fastest.
bool next_choice(std::vector<std::size_t>& choice, std::size_t base) {
    for (std::size_t r = choice.size(); r > 0; --r) {
        if (++choice[r - 1] < base) {
            return true;
        }
        choice[r - 1] = 0;
    }
    return false;
}

} // namespace

CycleCheck cycle_oracle_brute(const ConstraintSet& cs, int max_len, std::uint64_t budget) {
    if (max_len > 8) {
        fail(ErrorCode::BudgetExceeded, "cycle oracle supports max_len <= 8");
    }
    CycleCheck result;
    const BadnessReport badness = bad_values(cs);
    const ValueSet good = badness.good_values();
    if (good == 0) {
        return result;
    }
    std::vector<Value> good_list;
    for (int v = 0; v < cs.domain_size(); ++v) {
        if ((good >> v) & 1u) {
            good_list.push_back(static_cast<Value>(v));
        }
    }

    // Slots with identical feasibility tables are interchangeable; keep the
    // lexicographically first of each so the first failing candidate found is
    // the least one overall.
    const auto t = static_cast<std::size_t>(cs.domain_size());
    const auto k = static_cast<std::size_t>(cs.arity());
    std::vector<SlotType> types;
    for (std::size_t c = 0; c < cs.size(); ++c) {
        for (std::size_t i = 0; i < k; ++i) {
            for (std::size_t j = 0; j < k; ++j) {
                if (i == j) {
                    continue;
                }
                SlotType st{{c, i, j}, std::vector<std::vector<bool>>(t, std::vector<bool>(t, false))};
                for (Value a : good_list) {
                    for (Value b : good_list) {
                        st.feasible[a][b] = slot_feasible(cs[c], i, j, a, b, good);
                    }
                }
                const bool dup = std::any_of(types.begin(), types.end(),
                                             [&](const SlotType& o) { return o.feasible == st.feasible; });
                if (!dup) {
                    types.push_back(std::move(st));
                }
            }
        }
    }

    std::uint64_t spent = 0;
    for (int len = 2; len <= max_len; ++len) {
        const auto m = static_cast<std::size_t>(len);
        std::vector<std::size_t> choice(m, 0);
        std::vector<const SlotType*> slots(m);
        while (true) {
            spent += m;
            if (spent > budget) {
                fail(ErrorCode::BudgetExceeded, "cycle enumeration exceeded " + std::to_string(budget) + " slots");
            }
            for (std::size_t r = 0; r < m; ++r) {
                slots[r] = &types[choice[r]];
            }
            if (!cycle_satisfiable(slots, good_list)) {
                Cycle cycle;
                for (const SlotType* st : slots) {
                    cycle.push_back(st->representative);
                }
                result.holds = false;
                result.counterexample = std::move(cycle);
                return result;
            }
            if (!next_choice(choice, types.size())) {
                break;
            }
        }
    }
    return result;
}

// ============================================================================
// Extremely well-behaved
// ============================================================================

ExtremeResult is_extremely_well_behaved(const ConstraintSet& cs) {
    ExtremeResult result;
    const BadnessReport badness = bad_values(cs);
    if (!is_well_behaved(cs, badness).holds) {
        return result;
    }
    const ValueSet good = badness.good_values();
    std::vector<std::pair<Value, std::size_t>> gamma;
    for (int v = 0; v < cs.domain_size(); ++v) {
        if (((good >> v) & 1u) == 0) {
            continue;
        }
        const ConstraintTemplate occurs = occurs_relation(cs.domain_size(), cs.arity(), static_cast<Value>(v));
        std::optional<std::size_t> chosen;
        for (std::size_t c = 0; c < cs.size() && !chosen; ++c) {
            if (implies(cs[c], occurs)) {
                chosen = c;
            }
        }
        if (!chosen) {
            return result;
        }
        gamma.emplace_back(static_cast<Value>(v), *chosen);
    }
    // checked last: the closure is the expensive part
    if (!cycles_admit_assignment(cs, good).holds) {
        return result;
    }
    result.holds = true;
    result.gamma = std::move(gamma);
    return result;
}

// ============================================================================
// Verdict
// ============================================================================

std::string_view to_string(ThresholdOutlook outlook) {
    switch (outlook) {
    case ThresholdOutlook::Sharp: return "sharp";
    case ThresholdOutlook::Undetermined: return "undetermined";
    case ThresholdOutlook::NotSharp: return "not-sharp";
    }
    return "not-sharp";
}

std::string_view describe(ThresholdOutlook outlook) {
    switch (outlook) {
    case ThresholdOutlook::Sharp:
        return "sharp threshold (extremely well-behaved)";
    case ThresholdOutlook::Undetermined:
        return "transition guaranteed; sharpness undetermined (very well-behaved, not extremely)";
    case ThresholdOutlook::NotSharp:
        return "no sharp threshold (not very well-behaved)";
    }
    return "";
}

StructureVerdict classify_csp(const ConstraintSet& cs) {
    StructureVerdict verdict;
    verdict.badness = bad_values(cs);
    verdict.good_values = verdict.badness.good_values();
    verdict.well = is_well_behaved(cs, verdict.badness);
    if (verdict.well.holds) {
        CycleCheck cycles = cycles_admit_assignment(cs, verdict.good_values);
        verdict.very.holds = cycles.holds;
        verdict.very.counterexample = std::move(cycles.counterexample);
    }
    if (verdict.very.holds) {
        verdict.extreme = is_extremely_well_behaved(cs);
    }
    if (verdict.extreme.holds) {
        verdict.outlook = ThresholdOutlook::Sharp;
    } else if (verdict.very.holds) {
        verdict.outlook = ThresholdOutlook::Undetermined;
    } else {
        verdict.outlook = ThresholdOutlook::NotSharp;
    }
    return verdict;
}

std::string format_cycle(const ConstraintSet& cs, const Cycle& cycle) {
    const std::size_t m = cycle.size();
    const auto k = static_cast<std::size_t>(cs.arity());
    std::size_t fresh = m;
    std::string out;
    for (std::size_t r = 0; r < m; ++r) {
        const CycleSlot& slot = cycle[r];
        if (r != 0) {
            out += ' ';
        }
        out += cs[slot.template_index].name();
        out += '(';
        for (std::size_t p = 0; p < k; ++p) {
            if (p != 0) {
                out += ',';
            }
            std::size_t var = 0;
            if (p == slot.entry) {
                var = r;
            } else if (p == slot.exit) {
                var = (r + 1) % m;
            } else {
                var = fresh++;
            }
            out += 'x' + std::to_string(var + 1);
        }
        out += ')';
    }
    return out;
}

} // namespace cspt
