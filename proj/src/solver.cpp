// SPDX-License-Identifier: Apache-2.0
#include "cspt/solver.hpp"

#include <algorithm>
#include <bit>
#include <numeric>
#include <set>

#include "cspt/boolean.hpp"
#include "cspt/error.hpp"

namespace cspt {
namespace {

struct FlatTemplate {
    std::size_t k = 0;
    std::vector<Value> tuples;  // satisfying tuples, k values each
};

class Search {
public:
    Search(const ConstraintSet& cs, const Formula& f, ValueSet allowed, SolveStats* stats)
        : f_(f), stats_(stats) {
        const std::size_t n = f.variable_count();
        flat_.reserve(cs.size());
        for (const auto& c : cs.templates()) {
            FlatTemplate ft;
            ft.k = static_cast<std::size_t>(c.arity());
            for (const auto& s : c.satisfying_tuples()) {
                ft.tuples.insert(ft.tuples.end(), s.begin(), s.end());
            }
            flat_.push_back(std::move(ft));
        }
        domain_.assign(n, allowed);
        watch_.resize(n);
        for (std::size_t i = 0; i < f.size(); ++i) {
            for (Var x : f.instances()[i].vars) {
                watch_[x].push_back(static_cast<std::uint32_t>(i));
            }
        }
        for (Var x = 0; x < n; ++x) {
            if (!watch_[x].empty()) {
                order_.push_back(x);
            }
        }
        std::stable_sort(order_.begin(), order_.end(),
                         [&](Var a, Var b) { return watch_[a].size() > watch_[b].size(); });
        queued_.assign(f.size(), 0);
    }

    std::optional<Assignment> run() {
        const std::size_t n = f_.variable_count();
        if (n > 0 && domain_.front() == 0) {
            return std::nullopt;
        }
        for (std::uint32_t i = 0; i < f_.size(); ++i) {
            enqueue(i);
        }
        if (!propagate() || !branch(0)) {
            return std::nullopt;
        }
        Assignment a(n);
        for (Var x = 0; x < n; ++x) {
            a[x] = static_cast<Value>(std::countr_zero(domain_[x]));
        }
        return a;
    }

private:
    void enqueue(std::uint32_t i) {
        if (!queued_[i]) {
            queued_[i] = 1;
            queue_.push_back(i);
        }
    }

    void set_domain(Var x, ValueSet d) {
        trail_.emplace_back(x, domain_[x]);
        domain_[x] = d;
    }

    void undo(std::size_t mark) {
        while (trail_.size() > mark) {
            domain_[trail_.back().first] = trail_.back().second;
            trail_.pop_back();
        }
    }

    /// Narrows the scope of instance i to supported values. False on a wipe-out.
    bool revise(std::uint32_t i) {
        const Instance& inst = f_.instances()[i];
        const FlatTemplate& ft = flat_[inst.template_index];
        const std::size_t k = ft.k;
        ValueSet support[kMaxArity] = {};
        ValueSet dom[kMaxArity];
        for (std::size_t p = 0; p < k; ++p) {
            dom[p] = domain_[inst.vars[p]];
        }
        for (std::size_t base = 0; base < ft.tuples.size(); base += k) {
            const Value* s = &ft.tuples[base];
            bool ok = true;
            for (std::size_t p = 0; p < k && ok; ++p) {
                ok = (dom[p] >> s[p]) & 1u;
            }
            if (ok) {
                for (std::size_t p = 0; p < k; ++p) {
                    support[p] |= static_cast<ValueSet>(1u << s[p]);
                }
            }
        }
        if (stats_) {
            ++stats_->revisions;
        }
        for (std::size_t p = 0; p < k; ++p) {
            if (support[p] == 0) {
                return false;
            }
            if (support[p] != dom[p]) {
                const Var x = inst.vars[p];
                set_domain(x, support[p]);
                for (std::uint32_t j : watch_[x]) {
                    if (j != i) {
                        enqueue(j);
                    }
                }
            }
        }
        return true;
    }

    bool propagate() {
        std::size_t head = 0;
        bool ok = true;
        while (head < queue_.size()) {
            const std::uint32_t i = queue_[head++];
            queued_[i] = 0;
            if (ok && !revise(i)) {
                ok = false;
            }
        }
        queue_.clear();
        return ok;
    }

    bool branch(std::size_t pos) {
        while (pos < order_.size() && std::has_single_bit(domain_[order_[pos]])) {
            ++pos;
        }
        if (pos == order_.size()) {
            return true;
        }
        if (stats_) {
            ++stats_->nodes;
        }
        const Var x = order_[pos];
        ValueSet remaining = domain_[x];
        while (remaining != 0) {
            const ValueSet bit = remaining & static_cast<ValueSet>(-remaining);
            remaining = static_cast<ValueSet>(remaining & ~bit);
            const std::size_t mark = trail_.size();
            set_domain(x, bit);
            for (std::uint32_t j : watch_[x]) {
                enqueue(j);
            }
            if (propagate() && branch(pos + 1)) {
                return true;
            }
            undo(mark);
        }
        return false;
    }

    const Formula& f_;
    SolveStats* stats_;
    std::vector<FlatTemplate> flat_;
    std::vector<ValueSet> domain_;
    std::vector<std::vector<std::uint32_t>> watch_;
    std::vector<Var> order_;
    std::vector<std::pair<Var, ValueSet>> trail_;
    std::vector<std::uint32_t> queue_;
    std::vector<char> queued_;
};

} // namespace

std::optional<Assignment> solve(const ConstraintSet& cs, const Formula& f, std::optional<ValueSet> allowed,
                                SolveStats* stats) {
    if (f.arity() != cs.arity()) {
        fail(ErrorCode::ShapeMismatch, "formula arity differs from the constraint set");
    }
    for (const auto& inst : f.instances()) {
        if (inst.template_index >= cs.size()) {
            fail(ErrorCode::ShapeMismatch, "instance refers to a missing template");
        }
    }
    const ValueSet full = full_value_set(cs.domain_size());
    const ValueSet dom = allowed ? static_cast<ValueSet>(*allowed & full) : full;
    Search search(cs, f, dom, stats);
    return search.run();
}

bool is_satisfiable(const ConstraintSet& cs, const Formula& f, std::optional<ValueSet> allowed) {
    return solve(cs, f, allowed).has_value();
}

bool satisfies(const ConstraintSet& cs, const Formula& f, const Assignment& a) {
    Tuple s(static_cast<std::size_t>(cs.arity()));
    for (const auto& inst : f.instances()) {
        for (std::size_t p = 0; p < s.size(); ++p) {
            s[p] = a[inst.vars[p]];
        }
        if (!cs[inst.template_index].contains(s)) {
            return false;
        }
    }
    return true;
}

bool is_minimally_unsatisfiable(const ConstraintSet& cs, const Formula& f) {
    if (f.size() > kMaxMinimalityInstances) {
        fail(ErrorCode::TooLarge, "minimality check limited to " + std::to_string(kMaxMinimalityInstances) +
                                      " instances, got " + std::to_string(f.size()));
    }
    if (is_satisfiable(cs, f)) {
        return false;
    }
    for (std::size_t i = 0; i < f.size(); ++i) {
        if (!is_satisfiable(cs, f.without(i))) {
            return false;
        }
    }
    return true;
}

// ============================================================================
// MU enumeration
// ============================================================================

std::size_t MuBoundReport::violation_count() const {
    return static_cast<std::size_t>(
        std::count_if(formulas.begin(), formulas.end(), [](const MuFormula& m) { return m.violates; }));
}

namespace {

class MuEnumerator {
public:
    MuEnumerator(const ConstraintSet& cs, std::size_t max_instances, std::uint64_t budget, MuBoundReport& report)
        : cs_(cs), k_(static_cast<std::size_t>(cs.arity())), max_(max_instances), budget_(budget),
          report_(report) {
        for (const auto& c : cs.templates()) {
            const double frac = 1.0 - static_cast<double>(c.satisfying_count()) / static_cast<double>(c.tuple_count());
            forbidden_.push_back(frac);
            worst_ = std::max(worst_, frac);
        }
    }

    void run() {
        // A uniformly random assignment violates instance i with probability
        // forbidden_[i]; a total below 1 leaves some assignment satisfying.
        if (static_cast<double>(max_) * worst_ < 1.0) {
            return;
        }
        extend(0.0);
    }

private:
    void extend(double mass) {
        if (++report_.nodes > budget_) {
            fail(ErrorCode::BudgetExceeded, "enumeration budget of " + std::to_string(budget_) + " nodes exhausted");
        }
        if (!instances_.empty()) {
            const Formula f = current();
            if (!seen_.insert(canonical_key(cs_, f)).second) {
                return;
            }
            if (mass >= 1.0 && !is_satisfiable(cs_, f)) {
                if (is_minimally_unsatisfiable(cs_, f)) {
                    MuFormula mu;
                    mu.formula = f;
                    mu.variables = vars_;
                    mu.bound = static_cast<std::int64_t>((k_ - 1) * f.size()) - 1;
                    mu.violates = static_cast<std::int64_t>(vars_) > mu.bound;
                    report_.formulas.push_back(std::move(mu));
                }
                return;
            }
        }
        const std::size_t size = instances_.size();
        if (size == max_ || mass + static_cast<double>(max_ - size) * worst_ < 1.0) {
            return;
        }
        for (std::size_t c = 0; c < cs_.size(); ++c) {
            Instance inst{c, std::vector<Var>(k_)};
            place(inst, 0, vars_, false, mass + forbidden_[c]);
        }
    }

    void place(Instance& inst, std::size_t p, Var next_fresh, bool shares, double mass) {
        if (p == k_) {
            if (!instances_.empty() && !shares) {
                return;
            }
            if (std::find(instances_.begin(), instances_.end(), inst) != instances_.end()) {
                return;
            }
            const std::size_t saved = vars_;
            instances_.push_back(inst);
            vars_ = next_fresh;
            extend(mass);
            vars_ = saved;
            instances_.pop_back();
            return;
        }
        for (Var x = 0; x < vars_; ++x) {
            if (std::find(inst.vars.begin(), inst.vars.begin() + static_cast<std::ptrdiff_t>(p), x) !=
                inst.vars.begin() + static_cast<std::ptrdiff_t>(p)) {
                continue;
            }
            inst.vars[p] = x;
            place(inst, p + 1, next_fresh, true, mass);
        }
        inst.vars[p] = next_fresh;
        place(inst, p + 1, next_fresh + 1, shares, mass);
    }

    Formula current() const { return Formula(cs_.name(), cs_.arity(), vars_, instances_); }

    const ConstraintSet& cs_;
    std::size_t k_;
    std::size_t max_;
    std::uint64_t budget_;
    MuBoundReport& report_;
    std::vector<double> forbidden_;
    double worst_ = 0.0;
    std::vector<Instance> instances_;
    std::size_t vars_ = 0;
    std::set<std::vector<std::uint64_t>> seen_;
};

} // namespace

MuBoundReport check_mu_bound(const ConstraintSet& cs, std::size_t max_instances, std::uint64_t budget) {
    if (cs.domain_size() != 2) {
        fail(ErrorCode::NotBoolean, "constraint set '" + cs.name() + "' has domain size " +
                                        std::to_string(cs.domain_size()) + ", expected 2");
    }
    if (max_instances > kMaxMuInstances) {
        fail(ErrorCode::BudgetExceeded, "enumeration limited to " + std::to_string(kMaxMuInstances) +
                                            " instances, got " + std::to_string(max_instances));
    }
    MuBoundReport report;
    report.max_instances = max_instances;
    report.hypothesis_holds = classify_sat(cs).outcome == SatVerdict::Outcome::Sharp;
    MuEnumerator(cs, max_instances, budget, report).run();
    return report;
}

} // namespace cspt
