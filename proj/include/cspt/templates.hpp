// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cspt/kernels.hpp"

namespace cspt {

inline constexpr int kMaxDomainSize = 16;
inline constexpr int kMaxArity = 6;

using Value = std::uint8_t;
using Tuple = std::vector<Value>;

/// Bit mask over domain values; bit v set iff value v is a member.
using ValueSet = std::uint16_t;

inline constexpr ValueSet full_value_set(int t) {
    return static_cast<ValueSet>((1u << t) - 1u);
}

// ============================================================================
// ConstraintTemplate
// ============================================================================

/// A k-ary relation over {0, ..., t-1} stored as a bit table indexed by the
/// big-endian mixed-radix rank of each tuple (position 0 most significant).
/// Positions are 0-based in this API; text renderings print them 1-based.
class ConstraintTemplate {
public:
    static ConstraintTemplate from_forbidden(std::string name, int t, int k,
                                             std::span<const Tuple> forbidden);
    static ConstraintTemplate from_allowed(std::string name, int t, int k,
                                           std::span<const Tuple> allowed);
    /// Builds the relation {s : pred(s)}. Unlike the two constructors above this
    /// accepts the empty relation, for derived patterns used only as implicates.
    static ConstraintTemplate from_predicate(std::string name, int t, int k,
                                             const std::function<bool(std::span<const Value>)>& pred);

    const std::string& name() const noexcept { return name_; }
    int domain_size() const noexcept { return t_; }
    int arity() const noexcept { return k_; }
    std::size_t tuple_count() const noexcept { return tuple_count_; }
    std::size_t satisfying_count() const;
    bool is_full() const { return satisfying_count() == tuple_count_; }

    bool contains_rank(std::size_t rank) const noexcept {
        return (bits_[rank >> 6] >> (rank & 63)) & 1u;
    }
    bool contains(std::span<const Value> tuple) const { return contains_rank(rank(tuple)); }

    std::size_t rank(std::span<const Value> tuple) const;
    Tuple unrank(std::size_t rank) const;

    /// Satisfying tuples in rank order.
    std::vector<Tuple> satisfying_tuples() const;
    std::vector<Tuple> forbidden_tuples() const;

    std::span<const std::uint64_t> words() const noexcept { return bits_; }

    /// Same relation with coordinates and values relabelled:
    /// result contains (value_map[s[order[0]]], ..., value_map[s[order[k-1]]])
    /// for each satisfying s. `order` must be a permutation of 0..k-1.
    ConstraintTemplate permuted(std::span<const int> order, std::span<const Value> value_map,
                                std::string name) const;

    ConstraintTemplate renamed(std::string name) const;

    /// Same relation, same name.
    bool same_relation(const ConstraintTemplate& other) const {
        return t_ == other.t_ && k_ == other.k_ && bits_ == other.bits_;
    }

private:
    ConstraintTemplate(std::string name, int t, int k);
    void set_rank(std::size_t rank) { bits_[rank >> 6] |= std::uint64_t{1} << (rank & 63); }

    std::string name_;
    int t_ = 2;
    int k_ = 1;
    std::size_t tuple_count_ = 0;
    std::vector<std::uint64_t> bits_;
};

/// t^k, after validating 2 <= t <= 16 and 1 <= k <= 6.
std::size_t tuple_space(int t, int k);

/// satisfying(c1) ⊆ satisfying(c2). Throws ShapeMismatch on differing t or k.
bool implies(const ConstraintTemplate& c1, const ConstraintTemplate& c2);

// Derived relations, lifted to arity k, used as implicate patterns.
ConstraintTemplate unit_relation(int t, int k, std::size_t position, Value value);
ConstraintTemplate disequality_relation(int t, int k, std::size_t i, std::size_t j);
/// (x_1 = v) ∨ ... ∨ (x_k = v)
ConstraintTemplate occurs_relation(int t, int k, Value value);

// ============================================================================
// BinaryRelation
// ============================================================================

struct BinaryRelation {
    int t = 2;
    RelationMatrix matrix;

    bool contains(Value a, Value b) const { return (matrix.rows[a] >> b) & 1u; }
    void insert(Value a, Value b) { matrix.rows[a] |= static_cast<std::uint16_t>(1u << b); }
    bool empty() const;
    BinaryRelation transpose() const;

    friend bool operator==(const BinaryRelation&, const BinaryRelation&) = default;
};

/// {(s_i, s_j) : s satisfies c and every coordinate of s lies in `allowed`}.
BinaryRelation projection_relation(const ConstraintTemplate& c, std::size_t i, std::size_t j,
                                   ValueSet allowed);

// ============================================================================
// ConstraintSet
// ============================================================================

struct Rational {
    std::int64_t num = 0;
    std::int64_t den = 1;

    static Rational make(std::int64_t num, std::int64_t den);
    double to_double() const { return static_cast<double>(num) / static_cast<double>(den); }
    friend bool operator==(const Rational&, const Rational&) = default;
};

class ConstraintSet {
public:
    /// Validates shared shape, unique names and the weight invariants.
    ConstraintSet(std::string name, int t, int k, std::vector<ConstraintTemplate> templates,
                  std::optional<std::vector<Rational>> weights = std::nullopt);

    const std::string& name() const noexcept { return name_; }
    int domain_size() const noexcept { return t_; }
    int arity() const noexcept { return k_; }
    std::size_t size() const noexcept { return templates_.size(); }
    const std::vector<ConstraintTemplate>& templates() const noexcept { return templates_; }
    const ConstraintTemplate& operator[](std::size_t i) const { return templates_[i]; }
    const std::optional<std::vector<Rational>>& weights() const noexcept { return weights_; }

    /// Weight of template i; 1/|C| when no weights were declared.
    double weight(std::size_t i) const;

    std::optional<std::size_t> index_of(std::string_view template_name) const;

private:
    std::string name_;
    int t_;
    int k_;
    std::vector<ConstraintTemplate> templates_;
    std::optional<std::vector<Rational>> weights_;
};

// ============================================================================
// Text format
// ============================================================================

/// Parses the `csp-set v1` format. Throws SyntaxError (with line:column in the
/// message) or SemanticError.
ConstraintSet parse_constraint_set(std::string_view text);
ConstraintSet load_constraint_set(const std::string& path);

/// Canonical rendering: each template is listed by whichever of its forbidden
/// or satisfying tuples is shorter (forbidden on ties), in rank order.
std::string serialize_constraint_set(const ConstraintSet& cs);

std::string format_tuple(std::span<const Value> tuple);

} // namespace cspt
