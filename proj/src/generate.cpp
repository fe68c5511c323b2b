// SPDX-License-Identifier: Apache-2.0
//
// Random formula models.

#include <algorithm>
#include <cmath>
#include <limits>

#include "cspt/error.hpp"
#include "cspt/formula.hpp"

namespace cspt {

namespace {

constexpr std::uint64_t kMaxMaterialised = 50'000'000;

void check_shape(const ConstraintSet& cs, std::size_t n) {
    if (n < static_cast<std::size_t>(cs.arity())) {
        fail(ErrorCode::TooFewVariables, "need at least " + std::to_string(cs.arity()) + " variables, got " +
                                             std::to_string(n));
    }
}

std::uint64_t swap_lookup(const std::map<std::uint64_t, std::uint64_t>& swaps, std::uint64_t i) {
    auto it = swaps.find(i);
    return it == swaps.end() ? i : it->second;
}

/// One step of a lazily stored Fisher-Yates shuffle of [0, universe): returns
/// the element placed at slot `j`.
std::uint64_t lazy_shuffle_step(std::map<std::uint64_t, std::uint64_t>& swaps, std::uint64_t j,
                                std::uint64_t universe, Rng& rng) {
    const std::uint64_t r = j + rng.below(universe - j);
    const std::uint64_t at_r = swap_lookup(swaps, r);
    const std::uint64_t at_j = swap_lookup(swaps, j);
    swaps[r] = at_j;
    swaps.erase(j);
    return at_r;
}

Formula assemble(const ConstraintSet& cs, std::size_t n, std::vector<std::pair<std::uint64_t, std::size_t>> picks) {
    std::sort(picks.begin(), picks.end());
    std::vector<Instance> instances;
    instances.reserve(picks.size());
    for (const auto& [rank, c] : picks) {
        instances.push_back({c, unrank_ordered_tuple(rank, n, cs.arity())});
    }
    return Formula(cs.name(), cs.arity(), n, std::move(instances));
}

} // namespace

std::uint64_t ordered_tuple_count(std::size_t n, int k) {
    std::uint64_t count = 1;
    for (int i = 0; i < k; ++i) {
        const std::uint64_t factor = n - static_cast<std::size_t>(i);
        if (n < static_cast<std::size_t>(i) + 1) {
            return 0;
        }
        if (count > std::numeric_limits<std::uint64_t>::max() / 64 / factor) {
            fail(ErrorCode::TooLarge, "ordered tuple space too large for n = " + std::to_string(n));
        }
        count *= factor;
    }
    return count;
}

std::vector<Var> unrank_ordered_tuple(std::uint64_t rank, std::size_t n, int k) {
    const auto kk = static_cast<std::size_t>(k);
    std::vector<Var> out(kk);
    std::vector<Var> used;
    std::uint64_t block = ordered_tuple_count(n, k) / n;
    for (std::size_t p = 0; p < kk; ++p) {
        const std::uint64_t digit = rank / block;
        rank %= block;
        if (p + 1 < kk) {
            block /= (n - p - 1);
        }
        auto x = static_cast<Var>(digit);
        for (Var u : used) {  // ascending
            if (u <= x) {
                ++x;
            }
        }
        out[p] = x;
        used.insert(std::upper_bound(used.begin(), used.end(), x), x);
    }
    return out;
}

std::uint64_t rank_ordered_tuple(std::span<const Var> vars, std::size_t n) {
    std::uint64_t rank = 0;
    for (std::size_t p = 0; p < vars.size(); ++p) {
        std::uint64_t smaller_used = 0;
        for (std::size_t q = 0; q < p; ++q) {
            smaller_used += vars[q] < vars[p] ? 1 : 0;
        }
        rank = rank * (n - p) + (vars[p] - smaller_used);
    }
    return rank;
}

double inclusion_probability(const ConstraintSet& cs, std::size_t template_index, double p) {
    if (!cs.weights()) {
        return p;
    }
    return std::min(1.0, p * static_cast<double>(cs.size()) * cs.weight(template_index));
}

// ============================================================================
// Constant-probability model
// ============================================================================

void InstanceStream::TemplateStream::draw_one() {
    const std::uint64_t remaining = universe - drawn;
    // 1 - U_(j+1) = (1 - U_(j)) * V^(1/remaining)
    log_survival += std::log(rng.uniform_open()) / static_cast<double>(remaining);
    labels.push_back(log_survival);
    ranks.push_back(lazy_shuffle_step(swaps, drawn, universe, rng));
    ++drawn;
}

InstanceStream::InstanceStream(const ConstraintSet& cs, std::size_t n, std::uint64_t seed) : cs_(&cs), n_(n) {
    check_shape(cs, n);
    const std::uint64_t universe = ordered_tuple_count(n, cs.arity());
    streams_.reserve(cs.size());
    for (std::size_t c = 0; c < cs.size(); ++c) {
        streams_.emplace_back(derive_seed(seed, {0x5eed, c}), universe);
    }
}

Formula InstanceStream::formula_at(double p) {
    if (!(p >= 0.0 && p <= 1.0)) {
        fail(ErrorCode::BadProbability, "probability " + std::to_string(p) + " outside [0, 1]");
    }
    std::vector<std::pair<std::uint64_t, std::size_t>> picks;
    for (std::size_t c = 0; c < streams_.size(); ++c) {
        TemplateStream& s = streams_[c];
        const double q = inclusion_probability(*cs_, c, p);
        std::size_t count = 0;
        if (q >= 1.0) {
            if (s.universe > kMaxMaterialised) {
                fail(ErrorCode::TooLarge, "complete formula has too many instances");
            }
            while (s.drawn < s.universe) {
                s.draw_one();
            }
            count = s.labels.size();
        } else if (q > 0.0) {
            // include label j iff u_j < q, i.e. log(1 - u_j) > log(1 - q)
            const double threshold = std::log1p(-q);
            while (s.drawn < s.universe && (s.labels.empty() || s.labels.back() > threshold)) {
                s.draw_one();
            }
            count = static_cast<std::size_t>(
                std::partition_point(s.labels.begin(), s.labels.end(), [&](double l) { return l > threshold; }) -
                s.labels.begin());
        }
        for (std::size_t j = 0; j < count; ++j) {
            picks.emplace_back(s.ranks[j], c);
        }
    }
    return assemble(*cs_, n_, std::move(picks));
}

Formula sample_constant_probability(const ConstraintSet& cs, std::size_t n, double p, std::uint64_t seed) {
    if (!(p >= 0.0 && p <= 1.0)) {
        fail(ErrorCode::BadProbability, "probability " + std::to_string(p) + " outside [0, 1]");
    }
    InstanceStream stream(cs, n, seed);
    return stream.formula_at(p);
}

// ============================================================================
// Counting model
// ============================================================================

CountingStream::CountingStream(const ConstraintSet& cs, std::size_t n, std::uint64_t seed)
    : cs_(&cs), n_(n), rng_(derive_seed(seed, {0xc0de})) {
    check_shape(cs, n);
    per_template_ = ordered_tuple_count(n, cs.arity());
    universe_total_ = per_template_ * cs.size();
    taken_.assign(cs.size(), 0);
    swaps_.resize(cs.size());
}

Formula CountingStream::prefix(std::uint64_t m) {
    if (m > universe_total_) {
        fail(ErrorCode::TooMany, std::to_string(m) + " instances requested but only " +
                                     std::to_string(universe_total_) + " exist");
    }
    if (m > kMaxMaterialised) {
        fail(ErrorCode::TooLarge, "too many instances requested");
    }
    while (order_.size() < m) {
        std::size_t c = 0;
        if (!cs_->weights()) {
            // uniform over all remaining pairs
            std::uint64_t remaining_total = universe_total_ - order_.size();
            std::uint64_t pick = rng_.below(remaining_total);
            while (pick >= per_template_ - taken_[c]) {
                pick -= per_template_ - taken_[c];
                ++c;
            }
        } else {
            double total = 0.0;
            for (std::size_t i = 0; i < cs_->size(); ++i) {
                total += cs_->weight(i) * static_cast<double>(per_template_ - taken_[i]);
            }
            double u = rng_.uniform_open() * total;
            c = cs_->size();
            for (std::size_t i = 0; i < cs_->size(); ++i) {
                const double mass = cs_->weight(i) * static_cast<double>(per_template_ - taken_[i]);
                if (mass > 0.0) {
                    c = i;
                    if (u < mass) {
                        break;
                    }
                    u -= mass;
                }
            }
        }
        const std::uint64_t rank = lazy_shuffle_step(swaps_[c], taken_[c], per_template_, rng_);
        ++taken_[c];
        order_.push_back({c, {static_cast<Var>(rank & 0xffffffffu), static_cast<Var>(rank >> 32)}});
    }
    std::vector<std::pair<std::uint64_t, std::size_t>> picks;
    picks.reserve(m);
    for (std::size_t j = 0; j < m; ++j) {
        const auto& inst = order_[j];
        const std::uint64_t rank = inst.vars[0] | (static_cast<std::uint64_t>(inst.vars[1]) << 32);
        picks.emplace_back(rank, inst.template_index);
    }
    return assemble(*cs_, n_, std::move(picks));
}

Formula sample_counting(const ConstraintSet& cs, std::size_t n, std::uint64_t m, std::uint64_t seed) {
    CountingStream stream(cs, n, seed);
    return stream.prefix(m);
}

// ============================================================================
// Tree-like and unicyclic formulas
// ============================================================================

namespace {

void attach_tendrils(const ConstraintSet& cs, Formula& f, std::vector<Var>& anchors, std::size_t count, Var& next_var,
                     Rng& rng) {
    const auto k = static_cast<std::size_t>(cs.arity());
    for (std::size_t step = 0; step < count; ++step) {
        const Var anchor = anchors[rng.below(anchors.size())];
        const std::size_t position = rng.below(k);
        Instance inst{rng.below(cs.size()), std::vector<Var>(k)};
        for (std::size_t p = 0; p < k; ++p) {
            if (p == position) {
                inst.vars[p] = anchor;
            } else {
                inst.vars[p] = next_var;
                anchors.push_back(next_var);
                ++next_var;
            }
        }
        f.add(std::move(inst));
    }
}

} // namespace

Formula sample_tree_formula(const ConstraintSet& cs, std::size_t size, std::uint64_t seed) {
    if (size == 0) {
        fail(ErrorCode::BadEntry, "tree formula needs at least one instance");
    }
    const auto k = static_cast<std::size_t>(cs.arity());
    const std::size_t n = 1 + size * (k - 1);
    Rng rng(derive_seed(seed, {0x7eee}));
    Formula f(cs.name(), cs.arity(), n);
    Instance first{rng.below(cs.size()), std::vector<Var>(k)};
    std::vector<Var> anchors;
    for (std::size_t p = 0; p < k; ++p) {
        first.vars[p] = static_cast<Var>(p);
        anchors.push_back(static_cast<Var>(p));
    }
    f.add(std::move(first));
    Var next_var = static_cast<Var>(k);
    attach_tendrils(cs, f, anchors, size - 1, next_var, rng);
    return f;
}

Formula sample_unicyclic_formula(const ConstraintSet& cs, std::size_t size, std::uint64_t seed) {
    const auto k = static_cast<std::size_t>(cs.arity());
    if (size < 2 || k < 2) {
        fail(ErrorCode::BadEntry, "unicyclic formula needs at least two instances of arity >= 2");
    }
    Rng rng(derive_seed(seed, {0xc1c1e}));
    const std::size_t max_len = std::min<std::size_t>(size, 8);
    const std::size_t m = 2 + rng.below(max_len - 1);
    Cycle cycle;
    for (std::size_t r = 0; r < m; ++r) {
        CycleSlot slot;
        slot.template_index = rng.below(cs.size());
        slot.entry = rng.below(k);
        slot.exit = rng.below(k - 1);
        if (slot.exit >= slot.entry) {
            ++slot.exit;
        }
        cycle.push_back(slot);
    }
    const Formula ring = cycle_to_formula(cs, cycle);
    const std::size_t n = ring.variable_count() + (size - m) * (k - 1);
    Formula f(cs.name(), cs.arity(), n, ring.instances());

    // Tendrils may hang from any variable except the private ones of the first
    // slot, so deleting that slot always leaves a connected tree.
    std::vector<Var> anchors;
    for (Var v = 0; v < static_cast<Var>(ring.variable_count()); ++v) {
        const bool private_of_first = v >= m && v < m + (k - 2);
        if (!private_of_first) {
            anchors.push_back(v);
        }
    }
    Var next_var = static_cast<Var>(ring.variable_count());
    attach_tendrils(cs, f, anchors, size - m, next_var, rng);
    return f;
}

} // namespace cspt
