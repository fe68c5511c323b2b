// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cspt/random.hpp"
#include "cspt/structure.hpp"
#include "cspt/templates.hpp"

namespace cspt {

using Var = std::uint32_t;

struct Instance {
    std::size_t template_index = 0;
    std::vector<Var> vars;

    friend bool operator==(const Instance&, const Instance&) = default;
    friend auto operator<=>(const Instance&, const Instance&) = default;
};

/// A conjunction of template instances over variables 0..n-1.
class Formula {
public:
    Formula() = default;
    Formula(std::string set_name, int arity, std::size_t n, std::vector<Instance> instances = {});

    const std::string& set_name() const noexcept { return set_name_; }
    int arity() const noexcept { return k_; }
    std::size_t variable_count() const noexcept { return n_; }
    const std::vector<Instance>& instances() const noexcept { return instances_; }
    std::size_t size() const noexcept { return instances_.size(); }

    void add(Instance inst);
    /// Copy without instance `index`; n is unchanged.
    Formula without(std::size_t index) const;

    /// Constraint density: instances per variable, as an exact ratio.
    Rational density() const { return Rational::make(static_cast<std::int64_t>(instances_.size()),
                                                     static_cast<std::int64_t>(n_)); }

    friend bool operator==(const Formula&, const Formula&) = default;

private:
    std::string set_name_;
    int k_ = 2;
    std::size_t n_ = 0;
    std::vector<Instance> instances_;
};

// ============================================================================
// Hypergraph taxonomy
// ============================================================================

struct Hypergraph {
    std::vector<Var> vertices;              // sorted, only variables that occur
    std::vector<std::vector<Var>> edges;    // one per instance, as sets
};

Hypergraph formula_hypergraph(const Formula& f);

enum class ComponentClass { TreeLike = 0, Unicyclic = 1, Complex = 2 };

std::string_view to_string(ComponentClass c);

struct StructureClass {
    /// One entry per connected component, ordered by smallest variable.
    std::vector<ComponentClass> components;
    /// Worst class present; TreeLike for the empty formula.
    ComponentClass overall = ComponentClass::TreeLike;
};

/// Tree-like: connected and Berge-acyclic, decided by leaf removal.
/// Unicyclic: some edge e leaves a tree-like hypergraph once removed (vertices
/// occurring only in e go with it).
StructureClass structure_class(const Formula& f);

/// Berge-acyclicity of an edge list by leaf removal (vertices of degree 1 and
/// edges with at most one remaining vertex are deleted until nothing changes).
bool berge_acyclic(const std::vector<std::vector<Var>>& edges);

/// True if some connected sub-formula with at most `max_edges` instances is
/// neither tree-like nor unicyclic.
bool has_complex_subformula(const Formula& f, std::size_t max_edges);

// ============================================================================
// Random models
// ============================================================================

/// Number of ordered k-tuples of distinct variables out of n: n!/(n-k)!.
std::uint64_t ordered_tuple_count(std::size_t n, int k);

/// Decodes the lexicographic rank of an ordered tuple of distinct variables.
std::vector<Var> unrank_ordered_tuple(std::uint64_t rank, std::size_t n, int k);
std::uint64_t rank_ordered_tuple(std::span<const Var> vars, std::size_t n);

/// Inclusion probability of each (tuple, template) pair under the weighted
/// constant-probability model: min(1, p * |C| * w_C). Uniform weights give p.
double inclusion_probability(const ConstraintSet& cs, std::size_t template_index, double p);

/// Coupled source of random formulas over one (set, n, seed).
///
/// Every (tuple, template) pair carries its own uniform label u; the formula
/// at parameter p holds the pairs with u < min(1, p|C|w_C). Labels are
/// materialised lazily in increasing order per template (sequential order
/// statistics over a lazily drawn permutation), so drawing a formula costs
/// O(instances) and formulas for p <= p' are nested exactly.
class InstanceStream {
public:
    InstanceStream(const ConstraintSet& cs, std::size_t n, std::uint64_t seed);

    /// Instances included at p, in canonical order (tuple rank, then template).
    Formula formula_at(double p);

    std::size_t variable_count() const noexcept { return n_; }

private:
    struct TemplateStream {
        Rng rng;
        std::uint64_t universe = 0;
        std::uint64_t drawn = 0;
        double log_survival = 0.0;           // log(1 - u) of the last label drawn
        std::vector<double> labels;          // log(1 - u_j), decreasing
        std::vector<std::uint64_t> ranks;    // tuple rank of the j-th label
        std::map<std::uint64_t, std::uint64_t> swaps;  // lazy Fisher-Yates

        explicit TemplateStream(std::uint64_t seed, std::uint64_t n) : rng(seed), universe(n) {}
        void draw_one();
    };

    const ConstraintSet* cs_;
    std::size_t n_;
    std::vector<TemplateStream> streams_;
};

/// Each (ordered distinct k-tuple, template) pair included independently with
/// probability min(1, p|C|w_C). Deterministic in (cs, n, p, seed).
Formula sample_constant_probability(const ConstraintSet& cs, std::size_t n, double p, std::uint64_t seed);

/// Exactly M distinct pairs, drawn without replacement (sequentially weighted
/// by template weight when the set declares weights). Instances are returned
/// in canonical order.
Formula sample_counting(const ConstraintSet& cs, std::size_t n, std::uint64_t m, std::uint64_t seed);

/// Coupled counting-model source: prefix(M) is nested in prefix(M') for M <= M'.
class CountingStream {
public:
    CountingStream(const ConstraintSet& cs, std::size_t n, std::uint64_t seed);

    Formula prefix(std::uint64_t m);
    std::uint64_t universe() const noexcept { return universe_total_; }

private:
    const ConstraintSet* cs_;
    std::size_t n_;
    Rng rng_;
    std::uint64_t per_template_ = 0;
    std::uint64_t universe_total_ = 0;
    std::vector<std::uint64_t> taken_;  // per template
    std::vector<std::map<std::uint64_t, std::uint64_t>> swaps_;
    std::vector<Instance> order_;
};

/// Random tree-like formula with `size` instances: each new instance attaches
/// to a uniformly chosen existing variable at a uniformly chosen position;
/// its other positions get fresh variables.
Formula sample_tree_formula(const ConstraintSet& cs, std::size_t size, std::uint64_t seed);

/// Random unicyclic formula with `size` >= 2 instances: a random cycle of
/// length 2..min(size, 8) with random tree tendrils attached.
Formula sample_unicyclic_formula(const ConstraintSet& cs, std::size_t size, std::uint64_t seed);

// ============================================================================
// Cycle formulas and canonical forms
// ============================================================================

/// Shared variables are 0..m-1 (slot r links r to r+1 mod m); private
/// positions get fresh variables m, m+1, ... in slot order.
Formula cycle_to_formula(const ConstraintSet& cs, const Cycle& cycle);

/// Canonical key of a formula up to variable renaming, instance order and
/// argument permutations that map a template onto a template of the set.
/// Variables that occur in no instance are ignored.
std::vector<std::uint64_t> canonical_key(const ConstraintSet& cs, const Formula& f);

/// All cycle formulas of length m (2 <= m <= 8) up to renaming, as the
/// lexicographically least slot sequence of each class. Throws
/// BudgetExceeded past `budget` enumerated slots.
std::vector<Cycle> enumerate_cycles(const ConstraintSet& cs, int m,
                                    std::uint64_t budget = kDefaultEnumerationBudget);
std::vector<Formula> enumerate_cycle_formulas(const ConstraintSet& cs, int m,
                                              std::uint64_t budget = kDefaultEnumerationBudget);

// ============================================================================
// Formula files
// ============================================================================

std::string write_formula(const ConstraintSet& cs, const Formula& f);
std::string write_formula_json(const ConstraintSet& cs, const Formula& f);
/// Parses `csp-formula v1`, resolving template names against `cs`.
Formula parse_formula(std::string_view text, const ConstraintSet& cs);
Formula load_formula(const std::string& path, const ConstraintSet& cs);

} // namespace cspt
