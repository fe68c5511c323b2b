// SPDX-License-Identifier: Apache-2.0
#include "cspt/boolean.hpp"

#include "cspt/error.hpp"

namespace cspt {
namespace {

void require_boolean(int t, const std::string& what) {
    if (t != 2) {
        fail(ErrorCode::NotBoolean, what + " has domain size " + std::to_string(t) + ", expected 2");
    }
}

} // namespace

std::optional<UnitImplicate> unit_implicate(const ConstraintTemplate& c) {
    require_boolean(c.domain_size(), "template '" + c.name() + "'");
    const auto k = static_cast<std::size_t>(c.arity());
    for (std::size_t i = 0; i < k; ++i) {
        for (Value b = 0; b < 2; ++b) {
            if (implies(c, unit_relation(2, c.arity(), i, b))) {
                return UnitImplicate{i, b};
            }
        }
    }
    return std::nullopt;
}

std::optional<XorImplicate> two_xor_implicate(const ConstraintTemplate& c) {
    require_boolean(c.domain_size(), "template '" + c.name() + "'");
    const auto k = static_cast<std::size_t>(c.arity());
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = i + 1; j < k; ++j) {
            if (implies(c, disequality_relation(2, c.arity(), i, j))) {
                return XorImplicate{i, j};
            }
        }
    }
    return std::nullopt;
}

std::optional<TrivialAssignment> is_trivially_valid(const ConstraintSet& cs) {
    require_boolean(cs.domain_size(), "constraint set '" + cs.name() + "'");
    const auto k = static_cast<std::size_t>(cs.arity());
    for (Value v = 0; v < 2; ++v) {
        const Tuple constant(k, v);
        bool all = true;
        for (const auto& c : cs.templates()) {
            all = all && c.contains(constant);
        }
        if (all) {
            return v == 0 ? TrivialAssignment::AllZeros : TrivialAssignment::AllOnes;
        }
    }
    return std::nullopt;
}

SatVerdict classify_sat(const ConstraintSet& cs) {
    SatVerdict verdict;
    if (auto trivial = is_trivially_valid(cs)) {
        verdict.outcome = SatVerdict::Outcome::Trivial;
        verdict.trivial = trivial;
        return verdict;
    }
    for (std::size_t c = 0; c < cs.size(); ++c) {
        if (auto unit = unit_implicate(cs[c])) {
            verdict.outcome = SatVerdict::Outcome::CoarseUnit;
            verdict.template_index = c;
            verdict.unit = unit;
            return verdict;
        }
    }
    for (std::size_t c = 0; c < cs.size(); ++c) {
        if (auto x = two_xor_implicate(cs[c])) {
            verdict.outcome = SatVerdict::Outcome::CoarseTwoXor;
            verdict.template_index = c;
            verdict.two_xor = x;
            return verdict;
        }
    }
    verdict.outcome = SatVerdict::Outcome::Sharp;
    return verdict;
}

std::string_view to_string(SatVerdict::Outcome outcome) {
    switch (outcome) {
    case SatVerdict::Outcome::Trivial: return "Trivial";
    case SatVerdict::Outcome::CoarseUnit: return "Coarse(Unit)";
    case SatVerdict::Outcome::CoarseTwoXor: return "Coarse(2-XOR)";
    case SatVerdict::Outcome::Sharp: return "Sharp";
    }
    return "Sharp";
}

std::string_view to_string(TrivialAssignment assignment) {
    return assignment == TrivialAssignment::AllZeros ? "all-zeros" : "all-ones";
}

std::string describe(const ConstraintSet& cs, const SatVerdict& verdict) {
    std::string out(to_string(verdict.outcome));
    switch (verdict.outcome) {
    case SatVerdict::Outcome::Trivial:
        out += ": satisfied by the ";
        out += to_string(*verdict.trivial);
        out += " assignment";
        break;
    case SatVerdict::Outcome::CoarseUnit:
        out += ": " + cs[*verdict.template_index].name() + " implies x" +
               std::to_string(verdict.unit->position + 1) + "=" + std::to_string(verdict.unit->value);
        break;
    case SatVerdict::Outcome::CoarseTwoXor:
        out += ": " + cs[*verdict.template_index].name() + " implies x" +
               std::to_string(verdict.two_xor->i + 1) + "!=x" + std::to_string(verdict.two_xor->j + 1);
        break;
    case SatVerdict::Outcome::Sharp:
        out += ": no template depends on a literal or a 2-XOR relation";
        break;
    }
    return out;
}

} // namespace cspt
