// SPDX-License-Identifier: Apache-2.0
#include "cspt/templates.hpp"

#include <algorithm>
#include <bit>
#include <numeric>
#include <set>

#include "cspt/error.hpp"

namespace cspt {

std::string_view to_string(ErrorCode code) {
    switch (code) {
    case ErrorCode::SyntaxError: return "SyntaxError";
    case ErrorCode::SemanticError: return "SemanticError";
    case ErrorCode::EmptyRelation: return "EmptyRelation";
    case ErrorCode::BadEntry: return "BadEntry";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::BadPosition: return "BadPosition";
    case ErrorCode::NotBoolean: return "NotBoolean";
    case ErrorCode::BadProbability: return "BadProbability";
    case ErrorCode::TooFewVariables: return "TooFewVariables";
    case ErrorCode::TooMany: return "TooMany";
    case ErrorCode::TooLarge: return "TooLarge";
    case ErrorCode::BudgetExceeded: return "BudgetExceeded";
    case ErrorCode::NoThreshold: return "NoThreshold";
    case ErrorCode::Inconclusive: return "Inconclusive";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::UsageError: return "UsageError";
    }
    return "Unknown";
}

std::size_t tuple_space(int t, int k) {
    if (t < 2 || t > kMaxDomainSize) {
        fail(ErrorCode::SemanticError,
             "domain size " + std::to_string(t) + " outside [2, " + std::to_string(kMaxDomainSize) + "]");
    }
    if (k < 1 || k > kMaxArity) {
        fail(ErrorCode::SemanticError,
             "arity " + std::to_string(k) + " outside [1, " + std::to_string(kMaxArity) + "]");
    }
    std::size_t n = 1;
    for (int i = 0; i < k; ++i) {
        n *= static_cast<std::size_t>(t);
    }
    return n;
}

std::string format_tuple(std::span<const Value> tuple) {
    std::string out = "(";
    for (std::size_t i = 0; i < tuple.size(); ++i) {
        if (i != 0) {
            out += ',';
        }
        out += std::to_string(static_cast<int>(tuple[i]));
    }
    out += ')';
    return out;
}

// ============================================================================
// ConstraintTemplate
// ============================================================================

ConstraintTemplate::ConstraintTemplate(std::string name, int t, int k)
    : name_(std::move(name)), t_(t), k_(k), tuple_count_(tuple_space(t, k)),
      bits_((tuple_count_ + 63) / 64, 0) {}

std::size_t ConstraintTemplate::rank(std::span<const Value> tuple) const {
    if (tuple.size() != static_cast<std::size_t>(k_)) {
        fail(ErrorCode::BadEntry, "tuple " + format_tuple(tuple) + " does not have " +
                                      std::to_string(k_) + " entries");
    }
    std::size_t r = 0;
    for (Value v : tuple) {
        if (v >= t_) {
            fail(ErrorCode::BadEntry, "tuple " + format_tuple(tuple) + " has an entry outside the domain of size " +
                                          std::to_string(t_));
        }
        r = r * static_cast<std::size_t>(t_) + v;
    }
    return r;
}

Tuple ConstraintTemplate::unrank(std::size_t r) const {
    Tuple out(static_cast<std::size_t>(k_));
    for (int p = k_ - 1; p >= 0; --p) {
        out[static_cast<std::size_t>(p)] = static_cast<Value>(r % static_cast<std::size_t>(t_));
        r /= static_cast<std::size_t>(t_);
    }
    return out;
}

ConstraintTemplate ConstraintTemplate::from_forbidden(std::string name, int t, int k,
                                                      std::span<const Tuple> forbidden) {
    ConstraintTemplate c(std::move(name), t, k);
    std::fill(c.bits_.begin(), c.bits_.end(), ~std::uint64_t{0});
    if (c.tuple_count_ % 64 != 0) {
        c.bits_.back() = (std::uint64_t{1} << (c.tuple_count_ % 64)) - 1;
    }
    for (const auto& tuple : forbidden) {
        std::size_t r = c.rank(tuple);
        c.bits_[r >> 6] &= ~(std::uint64_t{1} << (r & 63));
    }
    if (c.satisfying_count() == 0) {
        fail(ErrorCode::EmptyRelation, "template '" + c.name_ + "' forbids every tuple");
    }
    return c;
}

ConstraintTemplate ConstraintTemplate::from_allowed(std::string name, int t, int k,
                                                    std::span<const Tuple> allowed) {
    ConstraintTemplate c(std::move(name), t, k);
    for (const auto& tuple : allowed) {
        c.set_rank(c.rank(tuple));
    }
    if (c.satisfying_count() == 0) {
        fail(ErrorCode::EmptyRelation, "template '" + c.name_ + "' allows no tuple");
    }
    return c;
}

ConstraintTemplate ConstraintTemplate::from_predicate(
    std::string name, int t, int k, const std::function<bool(std::span<const Value>)>& pred) {
    ConstraintTemplate c(std::move(name), t, k);
    for (std::size_t r = 0; r < c.tuple_count_; ++r) {
        if (pred(c.unrank(r))) {
            c.set_rank(r);
        }
    }
    return c;
}

std::size_t ConstraintTemplate::satisfying_count() const {
    return kernels::active().popcount(bits_);
}

namespace {

template <typename Fn>
void for_each_rank(std::span<const std::uint64_t> words, Fn&& fn) {
    for (std::size_t w = 0; w < words.size(); ++w) {
        std::uint64_t bits = words[w];
        while (bits != 0) {
            fn(w * 64 + static_cast<std::size_t>(std::countr_zero(bits)));
            bits &= bits - 1;
        }
    }
}

} // namespace

std::vector<Tuple> ConstraintTemplate::satisfying_tuples() const {
    std::vector<Tuple> out;
    for_each_rank(bits_, [&](std::size_t r) { out.push_back(unrank(r)); });
    return out;
}

std::vector<Tuple> ConstraintTemplate::forbidden_tuples() const {
    std::vector<Tuple> out;
    for (std::size_t r = 0; r < tuple_count_; ++r) {
        if (!contains_rank(r)) {
            out.push_back(unrank(r));
        }
    }
    return out;
}

ConstraintTemplate ConstraintTemplate::permuted(std::span<const int> order,
                                                std::span<const Value> value_map,
                                                std::string name) const {
    ConstraintTemplate c(std::move(name), t_, k_);
    Tuple image(static_cast<std::size_t>(k_));
    for_each_rank(bits_, [&](std::size_t r) {
        Tuple s = unrank(r);
        for (std::size_t p = 0; p < image.size(); ++p) {
            image[p] = value_map[s[static_cast<std::size_t>(order[p])]];
        }
        c.set_rank(c.rank(image));
    });
    return c;
}

ConstraintTemplate ConstraintTemplate::renamed(std::string name) const {
    ConstraintTemplate c = *this;
    c.name_ = std::move(name);
    return c;
}

bool implies(const ConstraintTemplate& c1, const ConstraintTemplate& c2) {
    if (c1.domain_size() != c2.domain_size() || c1.arity() != c2.arity()) {
        fail(ErrorCode::ShapeMismatch, "cannot compare '" + c1.name() + "' and '" + c2.name() +
                                           "': domain size or arity differ");
    }
    return kernels::active().subset(c1.words(), c2.words());
}

ConstraintTemplate unit_relation(int t, int k, std::size_t position, Value value) {
    return ConstraintTemplate::from_predicate(
        "unit", t, k, [&](std::span<const Value> s) { return s[position] == value; });
}

ConstraintTemplate disequality_relation(int t, int k, std::size_t i, std::size_t j) {
    return ConstraintTemplate::from_predicate(
        "neq", t, k, [&](std::span<const Value> s) { return s[i] != s[j]; });
}

ConstraintTemplate occurs_relation(int t, int k, Value value) {
    return ConstraintTemplate::from_predicate("occurs", t, k, [&](std::span<const Value> s) {
        return std::find(s.begin(), s.end(), value) != s.end();
    });
}

// ============================================================================
// BinaryRelation
// ============================================================================

bool BinaryRelation::empty() const {
    return std::all_of(matrix.rows.begin(), matrix.rows.end(), [](std::uint16_t r) { return r == 0; });
}

BinaryRelation BinaryRelation::transpose() const {
    BinaryRelation out{t, {}};
    for (int a = 0; a < t; ++a) {
        for (int b = 0; b < t; ++b) {
            if (contains(static_cast<Value>(a), static_cast<Value>(b))) {
                out.insert(static_cast<Value>(b), static_cast<Value>(a));
            }
        }
    }
    return out;
}

BinaryRelation projection_relation(const ConstraintTemplate& c, std::size_t i, std::size_t j,
                                   ValueSet allowed) {
    const auto k = static_cast<std::size_t>(c.arity());
    if (i >= k || j >= k || i == j) {
        fail(ErrorCode::BadPosition, "projection positions " + std::to_string(i + 1) + "," +
                                         std::to_string(j + 1) + " invalid for arity " + std::to_string(k));
    }
    BinaryRelation out{c.domain_size(), {}};
    if (allowed == 0) {
        return out;
    }
    for_each_rank(c.words(), [&](std::size_t r) {
        Tuple s = c.unrank(r);
        for (Value v : s) {
            if (((allowed >> v) & 1u) == 0) {
                return;
            }
        }
        out.insert(s[i], s[j]);
    });
    return out;
}

// ============================================================================
// ConstraintSet
// ============================================================================

Rational Rational::make(std::int64_t num, std::int64_t den) {
    if (den == 0) {
        fail(ErrorCode::SemanticError, "zero denominator in weight");
    }
    if (den < 0) {
        num = -num;
        den = -den;
    }
    std::int64_t g = std::gcd(num, den);
    if (g == 0) {
        g = 1;
    }
    return Rational{num / g, den / g};
}

ConstraintSet::ConstraintSet(std::string name, int t, int k, std::vector<ConstraintTemplate> templates,
                             std::optional<std::vector<Rational>> weights)
    : name_(std::move(name)), t_(t), k_(k), templates_(std::move(templates)), weights_(std::move(weights)) {
    tuple_space(t_, k_);
    if (templates_.empty()) {
        fail(ErrorCode::SemanticError, "constraint set '" + name_ + "' has no templates");
    }
    std::set<std::string, std::less<>> names;
    for (const auto& c : templates_) {
        if (c.domain_size() != t_ || c.arity() != k_) {
            fail(ErrorCode::ShapeMismatch, "template '" + c.name() + "' does not match domain " +
                                               std::to_string(t_) + " arity " + std::to_string(k_));
        }
        if (!names.insert(c.name()).second) {
            fail(ErrorCode::SemanticError, "duplicate template name '" + c.name() + "'");
        }
    }
    if (weights_) {
        if (weights_->size() != templates_.size()) {
            fail(ErrorCode::SemanticError, "weights must be given for every template or for none");
        }
        // exact sum; denominators in fixtures are tiny, __int128 keeps the
        // cross-multiplication safe for anything a text file can express
        __int128 num = 0;
        __int128 den = 1;
        for (const auto& w : *weights_) {
            if (w.num <= 0) {
                fail(ErrorCode::SemanticError, "weights must be positive");
            }
            num = num * w.den + static_cast<__int128>(w.num) * den;
            den *= w.den;
            __int128 a = num < 0 ? -num : num;
            __int128 b = den;
            while (b != 0) {
                __int128 tmp = a % b;
                a = b;
                b = tmp;
            }
            if (a > 1) {
                num /= a;
                den /= a;
            }
        }
        if (num != den) {
            fail(ErrorCode::SemanticError, "weights of '" + name_ + "' do not sum to 1");
        }
    }
}

double ConstraintSet::weight(std::size_t i) const {
    if (weights_) {
        return (*weights_)[i].to_double();
    }
    return 1.0 / static_cast<double>(templates_.size());
}

std::optional<std::size_t> ConstraintSet::index_of(std::string_view template_name) const {
    for (std::size_t i = 0; i < templates_.size(); ++i) {
        if (templates_[i].name() == template_name) {
            return i;
        }
    }
    return std::nullopt;
}

} // namespace cspt
