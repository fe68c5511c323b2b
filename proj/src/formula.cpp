// SPDX-License-Identifier: Apache-2.0
#include "cspt/formula.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include <json.hpp>

#include "cspt/error.hpp"

namespace cspt {

Formula::Formula(std::string set_name, int arity, std::size_t n, std::vector<Instance> instances)
    : set_name_(std::move(set_name)), k_(arity), n_(n) {
    instances_.reserve(instances.size());
    for (auto& inst : instances) {
        add(std::move(inst));
    }
}

void Formula::add(Instance inst) {
    if (inst.vars.size() != static_cast<std::size_t>(k_)) {
        fail(ErrorCode::BadEntry, "instance has " + std::to_string(inst.vars.size()) + " variables, expected " +
                                      std::to_string(k_));
    }
    for (std::size_t a = 0; a < inst.vars.size(); ++a) {
        if (inst.vars[a] >= n_) {
            fail(ErrorCode::BadEntry, "variable " + std::to_string(inst.vars[a]) + " outside [0, " +
                                          std::to_string(n_) + ")");
        }
        for (std::size_t b = 0; b < a; ++b) {
            if (inst.vars[a] == inst.vars[b]) {
                fail(ErrorCode::BadEntry, "variable " + std::to_string(inst.vars[a]) + " repeated in an instance");
            }
        }
    }
    instances_.push_back(std::move(inst));
}

Formula Formula::without(std::size_t index) const {
    Formula out = *this;
    out.instances_.erase(out.instances_.begin() + static_cast<std::ptrdiff_t>(index));
    return out;
}

// ============================================================================
// Hypergraph
// ============================================================================

std::string_view to_string(ComponentClass c) {
    switch (c) {
    case ComponentClass::TreeLike: return "tree-like";
    case ComponentClass::Unicyclic: return "unicyclic";
    case ComponentClass::Complex: return "complex";
    }
    return "complex";
}

Hypergraph formula_hypergraph(const Formula& f) {
    Hypergraph h;
    std::set<Var> seen;
    for (const auto& inst : f.instances()) {
        std::vector<Var> e = inst.vars;
        std::sort(e.begin(), e.end());
        seen.insert(e.begin(), e.end());
        h.edges.push_back(std::move(e));
    }
    h.vertices.assign(seen.begin(), seen.end());
    return h;
}

namespace {

struct UnionFind {
    std::vector<std::size_t> parent;
    explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    std::size_t find(std::size_t x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    }
    void unite(std::size_t a, std::size_t b) {
        a = find(a);
        b = find(b);
        if (a != b) {
            parent[std::max(a, b)] = std::min(a, b);
        }
    }
};

/// Edges over compact vertex ids 0..v-1.
struct LocalGraph {
    std::size_t vertex_count = 0;
    std::vector<std::vector<std::size_t>> edges;
};

LocalGraph compact(const std::vector<std::vector<Var>>& edges) {
    std::vector<Var> verts;
    for (const auto& e : edges) {
        verts.insert(verts.end(), e.begin(), e.end());
    }
    std::sort(verts.begin(), verts.end());
    verts.erase(std::unique(verts.begin(), verts.end()), verts.end());
    LocalGraph g;
    g.vertex_count = verts.size();
    for (const auto& e : edges) {
        std::vector<std::size_t> le;
        for (Var v : e) {
            le.push_back(static_cast<std::size_t>(std::lower_bound(verts.begin(), verts.end(), v) - verts.begin()));
        }
        g.edges.push_back(std::move(le));
    }
    return g;
}

/// Leaf removal; returns the surviving (core) edge indices.
std::vector<std::size_t> leaf_removal_core(const LocalGraph& g) {
    const std::size_t nv = g.vertex_count;
    const std::size_t ne = g.edges.size();
    std::vector<std::vector<std::size_t>> incident(nv);
    for (std::size_t e = 0; e < ne; ++e) {
        for (std::size_t v : g.edges[e]) {
            incident[v].push_back(e);
        }
    }
    std::vector<std::size_t> degree(nv);
    for (std::size_t v = 0; v < nv; ++v) {
        degree[v] = incident[v].size();
    }
    std::vector<std::size_t> remaining(ne);
    std::vector<bool> edge_alive(ne, true);
    std::vector<bool> vertex_alive(nv, true);
    for (std::size_t e = 0; e < ne; ++e) {
        remaining[e] = g.edges[e].size();
    }

    std::vector<std::size_t> vertex_queue;
    std::vector<std::size_t> edge_queue;
    for (std::size_t v = 0; v < nv; ++v) {
        if (degree[v] <= 1) {
            vertex_queue.push_back(v);
        }
    }
    for (std::size_t e = 0; e < ne; ++e) {
        if (remaining[e] <= 1) {
            edge_queue.push_back(e);
        }
    }
    while (!vertex_queue.empty() || !edge_queue.empty()) {
        if (!vertex_queue.empty()) {
            std::size_t v = vertex_queue.back();
            vertex_queue.pop_back();
            if (!vertex_alive[v] || degree[v] > 1) {
                continue;
            }
            vertex_alive[v] = false;
            for (std::size_t e : incident[v]) {
                if (edge_alive[e] && --remaining[e] <= 1) {
                    edge_queue.push_back(e);
                }
            }
            continue;
        }
        std::size_t e = edge_queue.back();
        edge_queue.pop_back();
        if (!edge_alive[e]) {
            continue;
        }
        edge_alive[e] = false;
        for (std::size_t v : g.edges[e]) {
            if (vertex_alive[v] && --degree[v] <= 1) {
                vertex_queue.push_back(v);
            }
        }
    }
    std::vector<std::size_t> core;
    for (std::size_t e = 0; e < ne; ++e) {
        if (edge_alive[e]) {
            core.push_back(e);
        }
    }
    return core;
}

bool connected(const LocalGraph& g) {
    if (g.edges.empty()) {
        return true;
    }
    UnionFind uf(g.vertex_count);
    for (const auto& e : g.edges) {
        for (std::size_t i = 1; i < e.size(); ++i) {
            uf.unite(e[0], e[i]);
        }
    }
    std::size_t root = uf.find(0);
    for (std::size_t v = 1; v < g.vertex_count; ++v) {
        if (uf.find(v) != root) {
            return false;
        }
    }
    return true;
}

bool tree_like(const std::vector<std::vector<Var>>& edges) {
    if (edges.empty()) {
        return false;
    }
    LocalGraph g = compact(edges);
    return connected(g) && leaf_removal_core(g).empty();
}

ComponentClass classify_component(const std::vector<std::vector<Var>>& edges) {
    LocalGraph g = compact(edges);
    std::vector<std::size_t> core = leaf_removal_core(g);
    if (core.empty()) {
        return ComponentClass::TreeLike;
    }
    // only edges on the core can break every cycle
    for (std::size_t e : core) {
        std::vector<std::vector<Var>> rest;
        rest.reserve(edges.size() - 1);
        for (std::size_t i = 0; i < edges.size(); ++i) {
            if (i != e) {
                rest.push_back(edges[i]);
            }
        }
        if (tree_like(rest)) {
            return ComponentClass::Unicyclic;
        }
    }
    return ComponentClass::Complex;
}

} // namespace

bool berge_acyclic(const std::vector<std::vector<Var>>& edges) {
    return leaf_removal_core(compact(edges)).empty();
}

StructureClass structure_class(const Formula& f) {
    StructureClass result;
    const Hypergraph h = formula_hypergraph(f);
    if (h.edges.empty()) {
        return result;
    }
    const LocalGraph g = compact(h.edges);
    UnionFind uf(g.vertex_count);
    for (const auto& e : g.edges) {
        for (std::size_t i = 1; i < e.size(); ++i) {
            uf.unite(e[0], e[i]);
        }
    }
    // union-find roots are the smallest member, so map order = smallest variable
    std::map<std::size_t, std::vector<std::vector<Var>>> groups;
    for (std::size_t e = 0; e < h.edges.size(); ++e) {
        groups[uf.find(g.edges[e][0])].push_back(h.edges[e]);
    }
    for (const auto& [root, edges] : groups) {
        ComponentClass c = classify_component(edges);
        result.components.push_back(c);
        result.overall = std::max(result.overall, c);
    }
    return result;
}

bool has_complex_subformula(const Formula& f, std::size_t max_edges) {
    const Hypergraph h = formula_hypergraph(f);
    const LocalGraph g = compact(h.edges);
    const std::vector<std::size_t> core = leaf_removal_core(g);
    if (core.empty()) {
        return false;
    }
    // Complex here means incidence-graph cyclomatic number >= 2; it is monotone
    // over connected sub-formulas, and minimal witnesses live in the core.
    std::vector<std::vector<std::size_t>> by_vertex(g.vertex_count);
    for (std::size_t e : core) {
        for (std::size_t v : g.edges[e]) {
            by_vertex[v].push_back(e);
        }
    }
    auto excess = [&](const std::vector<std::size_t>& sub) {
        std::set<std::size_t> verts;
        std::size_t incidences = 0;
        for (std::size_t e : sub) {
            incidences += g.edges[e].size();
            verts.insert(g.edges[e].begin(), g.edges[e].end());
        }
        return static_cast<long>(incidences) - static_cast<long>(verts.size() + sub.size()) + 1;
    };

    // grow connected edge subsets from each core edge, extending only with
    // edges of larger index than the seed so each subset is rooted once
    std::set<std::vector<std::size_t>> visited;
    std::uint64_t budget = 2'000'000;
    for (std::size_t seed : core) {
        std::vector<std::vector<std::size_t>> stack{{seed}};
        while (!stack.empty()) {
            std::vector<std::size_t> sub = std::move(stack.back());
            stack.pop_back();
            if (excess(sub) >= 2) {
                return true;
            }
            if (sub.size() >= max_edges) {
                continue;
            }
            std::set<std::size_t> frontier;
            for (std::size_t e : sub) {
                for (std::size_t v : g.edges[e]) {
                    for (std::size_t nb : by_vertex[v]) {
                        if (nb > seed && std::find(sub.begin(), sub.end(), nb) == sub.end()) {
                            frontier.insert(nb);
                        }
                    }
                }
            }
            for (std::size_t nb : frontier) {
                std::vector<std::size_t> grown = sub;
                grown.push_back(nb);
                std::sort(grown.begin(), grown.end());
                if (visited.insert(grown).second) {
                    if (--budget == 0) {
                        fail(ErrorCode::BudgetExceeded, "sub-formula enumeration budget exhausted");
                    }
                    stack.push_back(std::move(grown));
                }
            }
        }
    }
    return false;
}

// ============================================================================
// Canonical form
// ============================================================================

namespace {

struct VariantTable {
    std::size_t k = 0;
    std::vector<std::vector<int>> perms;
    // rel_id[c * perms.size() + p]
    std::vector<std::uint64_t> rel_id;
};

VariantTable build_variants(const ConstraintSet& cs) {
    VariantTable vt;
    vt.k = static_cast<std::size_t>(cs.arity());
    std::vector<int> perm(vt.k);
    std::iota(perm.begin(), perm.end(), 0);
    do {
        vt.perms.push_back(perm);
    } while (std::next_permutation(perm.begin(), perm.end()));

    std::vector<Value> identity(static_cast<std::size_t>(cs.domain_size()));
    std::iota(identity.begin(), identity.end(), Value{0});
    std::vector<std::vector<std::uint64_t>> bits;
    for (std::size_t c = 0; c < cs.size(); ++c) {
        for (const auto& p : vt.perms) {
            const ConstraintTemplate v = cs[c].permuted(p, identity, "");
            bits.emplace_back(v.words().begin(), v.words().end());
        }
    }
    std::vector<std::vector<std::uint64_t>> sorted = bits;
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
    for (const auto& b : bits) {
        vt.rel_id.push_back(
            static_cast<std::uint64_t>(std::lower_bound(sorted.begin(), sorted.end(), b) - sorted.begin()));
    }
    return vt;
}

class Canonicalizer {
public:
    Canonicalizer(const VariantTable& vt, const Formula& f) : vt_(vt), f_(f) {
        const std::size_t m = f.size();
        used_.assign(m, false);
        label_.assign(f.variable_count(), kUnlabelled);
    }

    std::vector<std::uint64_t> run() {
        current_.clear();
        search(0);
        return best_;
    }

private:
    static constexpr std::uint64_t kUnlabelled = ~std::uint64_t{0};

    // -1, 0, 1 comparing current_ with the same-length prefix of best_
    int compare_prefix() const {
        for (std::size_t x = 0; x < current_.size(); ++x) {
            if (current_[x] != best_[x]) {
                return current_[x] < best_[x] ? -1 : 1;
            }
        }
        return 0;
    }

    void search(std::size_t depth) {
        const std::size_t m = f_.size();
        if (depth == m) {
            if (!have_best_ || compare_prefix() < 0) {
                best_ = current_;
                have_best_ = true;
            }
            return;
        }
        for (std::size_t i = 0; i < m; ++i) {
            if (used_[i]) {
                continue;
            }
            const Instance& inst = f_.instances()[i];
            for (std::size_t p = 0; p < vt_.perms.size(); ++p) {
                const std::size_t base = current_.size();
                std::vector<Var> fresh;
                current_.push_back(vt_.rel_id[inst.template_index * vt_.perms.size() + p]);
                for (std::size_t pos = 0; pos < vt_.k; ++pos) {
                    Var v = inst.vars[static_cast<std::size_t>(vt_.perms[p][pos])];
                    if (label_[v] == kUnlabelled) {
                        label_[v] = next_label_++;
                        fresh.push_back(v);
                    }
                    current_.push_back(label_[v]);
                }
                if (!have_best_ || compare_prefix() <= 0) {
                    used_[i] = true;
                    search(depth + 1);
                    used_[i] = false;
                }
                for (Var v : fresh) {
                    label_[v] = kUnlabelled;
                    --next_label_;
                }
                current_.resize(base);
            }
        }
    }

    const VariantTable& vt_;
    const Formula& f_;
    std::vector<bool> used_;
    std::vector<std::uint64_t> label_;
    std::uint64_t next_label_ = 0;
    std::vector<std::uint64_t> current_;
    std::vector<std::uint64_t> best_;
    bool have_best_ = false;
};

} // namespace

std::vector<std::uint64_t> canonical_key(const ConstraintSet& cs, const Formula& f) {
    const VariantTable vt = build_variants(cs);
    return Canonicalizer(vt, f).run();
}

Formula cycle_to_formula(const ConstraintSet& cs, const Cycle& cycle) {
    const std::size_t m = cycle.size();
    const auto k = static_cast<std::size_t>(cs.arity());
    const std::size_t n = m + m * (k - 2);
    Formula f(cs.name(), cs.arity(), n);
    Var fresh = static_cast<Var>(m);
    for (std::size_t r = 0; r < m; ++r) {
        Instance inst{cycle[r].template_index, std::vector<Var>(k)};
        for (std::size_t p = 0; p < k; ++p) {
            if (p == cycle[r].entry) {
                inst.vars[p] = static_cast<Var>(r);
            } else if (p == cycle[r].exit) {
                inst.vars[p] = static_cast<Var>((r + 1) % m);
            } else {
                inst.vars[p] = fresh++;
            }
        }
        f.add(std::move(inst));
    }
    return f;
}

std::vector<Cycle> enumerate_cycles(const ConstraintSet& cs, int m, std::uint64_t budget) {
    if (m < 2 || m > 8) {
        fail(ErrorCode::BudgetExceeded, "cycle length must lie in [2, 8]");
    }
    const auto k = static_cast<std::size_t>(cs.arity());
    if (k < 2) {
        return {};
    }
    std::vector<CycleSlot> slots;
    for (std::size_t c = 0; c < cs.size(); ++c) {
        for (std::size_t i = 0; i < k; ++i) {
            for (std::size_t j = 0; j < k; ++j) {
                if (i != j) {
                    slots.push_back({c, i, j});
                }
            }
        }
    }
    const VariantTable vt = build_variants(cs);
    const auto len = static_cast<std::size_t>(m);
    std::vector<std::size_t> choice(len, 0);
    std::set<std::vector<std::uint64_t>> seen;
    std::vector<Cycle> out;
    std::uint64_t spent = 0;
    while (true) {
        spent += len;
        if (spent > budget) {
            fail(ErrorCode::BudgetExceeded, "cycle enumeration exceeded " + std::to_string(budget) + " slots");
        }
        Cycle cycle;
        for (std::size_t r = 0; r < len; ++r) {
            cycle.push_back(slots[choice[r]]);
        }
        const Formula f = cycle_to_formula(cs, cycle);
        if (seen.insert(Canonicalizer(vt, f).run()).second) {
            out.push_back(std::move(cycle));
        }
        std::size_t r = len;
        while (r > 0 && ++choice[r - 1] == slots.size()) {
            choice[r - 1] = 0;
            --r;
        }
        if (r == 0) {
            break;
        }
    }
    return out;
}

std::vector<Formula> enumerate_cycle_formulas(const ConstraintSet& cs, int m, std::uint64_t budget) {
    std::vector<Formula> out;
    for (const Cycle& c : enumerate_cycles(cs, m, budget)) {
        out.push_back(cycle_to_formula(cs, c));
    }
    return out;
}

// ============================================================================
// Formula files
// ============================================================================

std::string write_formula(const ConstraintSet& cs, const Formula& f) {
    std::ostringstream out;
    out << "csp-formula v1\n";
    out << "set " << f.set_name() << '\n';
    out << "vars " << f.variable_count() << '\n';
    for (const auto& inst : f.instances()) {
        out << cs[inst.template_index].name();
        for (Var v : inst.vars) {
            out << ' ' << v;
        }
        out << '\n';
    }
    return out.str();
}

std::string write_formula_json(const ConstraintSet& cs, const Formula& f) {
    nlohmann::ordered_json j;
    j["format"] = "csp-formula v1";
    j["set"] = f.set_name();
    j["vars"] = f.variable_count();
    auto& insts = j["instances"] = nlohmann::ordered_json::array();
    for (const auto& inst : f.instances()) {
        insts.push_back({{"template", cs[inst.template_index].name()}, {"vars", inst.vars}});
    }
    return j.dump(2) + "\n";
}

Formula parse_formula(std::string_view text, const ConstraintSet& cs) {
    std::istringstream in{std::string(text)};
    std::string line;
    int line_no = 0;
    std::optional<std::string> set_name;
    std::optional<std::size_t> n;
    bool header = false;
    std::optional<Formula> f;
    auto syntax = [&](const std::string& msg) {
        fail(ErrorCode::SyntaxError, std::to_string(line_no) + ":1: " + msg);
    };
    while (std::getline(in, line)) {
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string::npos) {
            line.resize(hash);
        }
        std::istringstream ls(line);
        std::string word;
        if (!(ls >> word)) {
            continue;
        }
        if (!header) {
            std::string version;
            if (word != "csp-formula" || !(ls >> version) || version != "v1") {
                syntax("expected 'csp-formula v1'");
            }
            header = true;
            continue;
        }
        if (word == "set" && !f) {
            std::string name;
            if (!(ls >> name)) {
                syntax("expected a set name");
            }
            if (name != cs.name()) {
                fail(ErrorCode::SemanticError, std::to_string(line_no) + ":1: formula was generated from set '" + name +
                                                   "', not '" + cs.name() + "'");
            }
            set_name = name;
            continue;
        }
        if (word == "vars" && !f) {
            long long value = -1;
            if (!(ls >> value) || value < 0) {
                syntax("expected a variable count");
            }
            n = static_cast<std::size_t>(value);
            continue;
        }
        if (!set_name || !n) {
            syntax("'set' and 'vars' must precede the instances");
        }
        if (!f) {
            f.emplace(*set_name, cs.arity(), *n);
        }
        auto idx = cs.index_of(word);
        if (!idx) {
            fail(ErrorCode::SemanticError, std::to_string(line_no) + ":1: unknown template '" + word + "'");
        }
        Instance inst{*idx, {}};
        long long v = 0;
        while (ls >> v) {
            if (v < 0) {
                syntax("negative variable index");
            }
            inst.vars.push_back(static_cast<Var>(v));
        }
        if (!ls.eof()) {
            syntax("expected variable indices");
        }
        try {
            f->add(std::move(inst));
        } catch (const Error& e) {
            fail(ErrorCode::SemanticError, std::to_string(line_no) + ":1: " + e.what());
        }
    }
    if (!header) {
        fail(ErrorCode::SyntaxError, "1:1: expected 'csp-formula v1'");
    }
    if (!f) {
        if (!set_name || !n) {
            fail(ErrorCode::SyntaxError, std::to_string(line_no) + ":1: missing 'set' or 'vars'");
        }
        f.emplace(*set_name, cs.arity(), *n);
    }
    return *f;
}

Formula load_formula(const std::string& path, const ConstraintSet& cs) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        fail(ErrorCode::IoError, "cannot open '" + path + "'");
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_formula(buf.str(), cs);
}

} // namespace cspt
