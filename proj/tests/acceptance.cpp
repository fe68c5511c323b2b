// SPDX-License-Identifier: Apache-2.0
// One PASS/FAIL line per acceptance criterion. Exit status 1 if any fails.
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include <json.hpp>

#include "cspt/boolean.hpp"
#include "cspt/cli.hpp"
#include "cspt/error.hpp"
#include "cspt/experiments.hpp"
#include "cspt/solver.hpp"
#include "cspt/structure.hpp"
#include "oracles.hpp"

using namespace cspt;
namespace fs = std::filesystem;

namespace {

const std::vector<std::string> kFixtures = {"ksat3",     "xor2",          "horn_like",
                                            "clause3_single", "molloy_example1", "molloy_example2"};

std::string fixture_path(const std::string& name) {
    return std::string(CSPT_FIXTURE_DIR) + "/" + name + ".csp";
}

ConstraintSet fixture(const std::string& name) {
    return load_constraint_set(fixture_path(name));
}

struct Outcome {
    bool pass = false;
    std::string detail;
};

struct CliRun {
    int code = 0;
    std::string out;
    std::string err;
    friend bool operator==(const CliRun&, const CliRun&) = default;
};

// Every CLI call is logged so reproducibility can replay it.
std::vector<std::vector<std::string>> g_invocations;

CliRun cli(const std::vector<std::string>& args, bool log = true) {
    if (log) {
        g_invocations.push_back(args);
    }
    std::ostringstream out, err;
    CliRun r;
    r.code = run_cli(args, out, err);
    r.out = out.str();
    r.err = err.str();
    return r;
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

std::string fmt(const char* f, double a) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

// ============================================================================
// 1. boolean trichotomy
// ============================================================================

Outcome structural_trichotomy() {
    const std::map<std::string, std::string> want = {
        {"ksat3", "Sharp"}, {"xor2", "Coarse(2-XOR)"}, {"horn_like", "Coarse(Unit)"}, {"clause3_single", "Trivial"}};
    Outcome o{true, ""};
    for (const auto& [name, verdict] : want) {
        const auto r = cli({"classify", fixture_path(name), "--json"});
        const auto doc = nlohmann::json::parse(r.out);
        const std::string got = doc.value("sat_verdict", "missing");
        const bool lib = std::string(to_string(classify_sat(fixture(name)).outcome)) == verdict;
        o.pass = o.pass && r.code == 0 && got == verdict && lib;
        o.detail += name + "=" + got + " ";
    }
    // the witnesses carry the named implicates
    const auto x = classify_sat(fixture("xor2"));
    const auto h = classify_sat(fixture("horn_like"));
    o.pass = o.pass && x.two_xor && h.unit;
    return o;
}

// ============================================================================
// 2. bad-value fixpoint against the unfolding oracle
// ============================================================================

bool same_levels(const ConstraintSet& cs) {
    const auto lib = bad_values(cs).levels;
    const auto want = oracle::bad_levels(cs);
    for (std::size_t v = 0; v < want.size(); ++v) {
        const int got = lib[v] ? *lib[v] : -1;
        if (got != want[v]) {
            return false;
        }
    }
    return true;
}

Outcome fixpoint_oracle() {
    std::size_t checked = 0, mismatches = 0;
    for (std::uint64_t mask = 1; mask < 16; ++mask) {
        const auto c = ConstraintTemplate::from_predicate("r", 2, 2, [&](std::span<const Value> s) {
            return ((mask >> (2 * s[0] + s[1])) & 1u) != 0;
        });
        mismatches += same_levels(ConstraintSet("single", 2, 2, {c})) ? 0 : 1;
        ++checked;
    }
    Rng rng(0);
    for (int i = 0; i < 1000; ++i) {
        const int t = 2 + static_cast<int>(rng.below(2));
        mismatches += same_levels(oracle::random_set(rng, t, 2, 1 + rng.below(3))) ? 0 : 1;
        ++checked;
    }
    return {mismatches == 0, std::to_string(checked) + " sets, " + std::to_string(mismatches) + " mismatches"};
}

// ============================================================================
// 3. cycle decision against bounded enumeration
// ============================================================================

Outcome cycle_oracle() {
    std::size_t checked = 0, mismatches = 0;
    auto compare = [&](const ConstraintSet& cs) {
        const bool closure = is_very_well_behaved(cs).holds;
        const bool brute = is_well_behaved(cs).holds && cycle_oracle_brute(cs, 6).holds;
        mismatches += closure == brute ? 0 : 1;
        ++checked;
    };
    for (const auto& name : kFixtures) {
        compare(fixture(name));
        const auto r = cli({"check", fixture_path(name), "--max-len", "6"});
        mismatches += r.out.find("\nagree\n") != std::string::npos ? 0 : 1;
    }
    Rng rng(0);
    for (int i = 0; i < 500; ++i) {
        const int t = 2 + static_cast<int>(rng.below(2));
        compare(oracle::random_set(rng, t, 2, 1 + rng.below(3)));
    }
    const bool molloy = is_very_well_behaved(fixture("molloy_example1")).holds;
    return {mismatches == 0 && molloy, std::to_string(checked) + " sets, " + std::to_string(mismatches) +
                                           " mismatches, molloy_example1 very-well-behaved=" +
                                           (molloy ? "true" : "false")};
}

// ============================================================================
// 4. extreme behavedness
// ============================================================================

Outcome extreme() {
    const auto ksat3 = fixture("ksat3");
    const auto e = is_extremely_well_behaved(ksat3);
    bool pass = e.holds && e.gamma && e.gamma->size() == 2 && (*e.gamma)[0].first == 0 &&
                ksat3[(*e.gamma)[0].second].forbidden_tuples() == std::vector<Tuple>{{1, 1, 1}} &&
                (*e.gamma)[1].first == 1 &&
                ksat3[(*e.gamma)[1].second].forbidden_tuples() == std::vector<Tuple>{{0, 0, 0}};
    const auto json = nlohmann::json::parse(cli({"classify", fixture_path("ksat3"), "--json"}).out);
    pass = pass && json["extremely_well_behaved"] == true;
    const auto m1 = fixture("molloy_example1");
    const auto m2 = fixture("molloy_example2");
    pass = pass && !is_extremely_well_behaved(m1).holds && !is_extremely_well_behaved(m2).holds;
    for (const auto& name : {"molloy_example1", "molloy_example2"}) {
        const auto doc = nlohmann::json::parse(cli({"classify", fixture_path(name), "--json"}).out);
        pass = pass && doc["extremely_well_behaved"] == false;
    }
    const bool same_bad = bad_values(m1).levels == bad_values(m2).levels;
    const bool same_very = is_very_well_behaved(m1).holds == is_very_well_behaved(m2).holds;
    return {pass && same_bad && same_very,
            std::string("ksat3 gamma 0->forbid(1,1,1) 1->forbid(0,0,0), molloy examples not extreme, ") +
                "examples agree on bad values=" + (same_bad ? "yes" : "no") +
                " very-well-behaved=" + (same_very ? "yes" : "no")};
}

// ============================================================================
// 5. tree-like and unicyclic formulas satisfiable on good values
// ============================================================================

Outcome tree_sat() {
    Rng rng(0);
    std::size_t checked = 0, failures = 0;
    std::string sets;
    for (const auto& name : kFixtures) {
        const auto cs = fixture(name);
        if (!is_very_well_behaved(cs).holds) {
            continue;
        }
        sets += name + " ";
        const ValueSet good = bad_values(cs).good_values();
        for (int i = 0; i < 500; ++i) {
            const auto tree = sample_tree_formula(cs, 1 + rng.below(12), rng.next());
            const auto uni = sample_unicyclic_formula(cs, 2 + rng.below(11), rng.next());
            for (const auto* f : {&tree, &uni}) {
                const auto a = solve(cs, *f, good);
                failures += a && satisfies(cs, *f, *a) ? 0 : 1;
                ++checked;
            }
        }
    }
    return {failures == 0 && checked == 3000,
            sets + "| " + std::to_string(checked) + " formulas, " + std::to_string(failures) + " failures"};
}

// ============================================================================
// 6. solver against exhaustive enumeration
// ============================================================================

Outcome solver_oracle() {
    Rng rng(0);
    std::size_t mismatches = 0, sat = 0;
    for (int i = 0; i < 2000; ++i) {
        const int t = 2 + static_cast<int>(rng.below(2));
        const int k = 2 + static_cast<int>(rng.below(2));
        const auto cs = oracle::random_set(rng, t, k, 1 + rng.below(3));
        const std::size_t n = static_cast<std::size_t>(k) + rng.below(9 - static_cast<std::uint64_t>(k));
        const auto f = oracle::random_formula(rng, cs, n, rng.below(3 * n));
        const auto got = solve(cs, f);
        const auto want = oracle::brute_solve(cs, f, full_value_set(t));
        mismatches += got.has_value() == want.has_value() && (!got || satisfies(cs, f, *got)) ? 0 : 1;
        sat += want ? 1 : 0;
    }
    return {mismatches == 0,
            "2000 formulas (" + std::to_string(sat) + " SAT), " + std::to_string(mismatches) + " mismatches"};
}

// ============================================================================
// 7. size bound for minimally unsatisfiable formulas
// ============================================================================

Outcome mu_bound() {
    const auto k = check_mu_bound(fixture("ksat3"), 4);
    const auto x = check_mu_bound(fixture("xor2"), 3);
    bool triangle = false;
    for (const auto& mu : x.formulas) {
        triangle = triangle || (mu.formula.size() == 3 && mu.variables == 3 && mu.violates);
    }
    const auto rk = cli({"mu-bound", fixture_path("ksat3"), "--max-instances", "4"});
    const auto rx = cli({"mu-bound", fixture_path("xor2"), "--max-instances", "3"});
    const bool pass = k.hypothesis_holds && k.violation_count() == 0 && !x.hypothesis_holds && triangle &&
                      rk.code == 0 && rx.code == 0;
    return {pass, "ksat3<=4: " + std::to_string(k.formulas.size()) + " MU classes, " +
                      std::to_string(k.violation_count()) + " violations; xor2 triangle witness=" +
                      (triangle ? "yes" : "no")};
}

// ============================================================================
// 8. window separation
// ============================================================================

struct WindowRow {
    std::string set;
    std::size_t n = 0;
    double W = 0, W_low = 0, W_high = 0;
    std::string status;
    std::string line;
};

std::vector<WindowRow> read_windows(const fs::path& csv) {
    std::vector<WindowRow> rows;
    std::istringstream in(slurp(csv));
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
        std::vector<std::string> f;
        std::stringstream ls(line);
        for (std::string cell; std::getline(ls, cell, ',');) {
            f.push_back(cell);
        }
        if (f.size() < 10) {
            f.resize(10);
        }
        WindowRow r;
        r.set = f[0];
        r.n = std::stoul(f[1]);
        r.status = f[9];
        r.line = line;
        if (r.status == "ok") {
            r.W = std::stod(f[6]);
            r.W_low = std::stod(f[7]);
            r.W_high = std::stod(f[8]);
        }
        rows.push_back(r);
    }
    return rows;
}

// Bracket rows of the first certified run.
const std::vector<std::string> kWindowSnapshot = {
    "ksat3,25,0.1,0.0008401268116,0.001032608696,0.001263586957,0.4100877193,0.3318965517,0.4910714286,ok",
    "ksat3,100,0.1,5.089156875e-05,5.514326943e-05,6.055452484e-05,0.1752336449,0.1574074074,0.1933962264,ok",
    "xor2,160,0.1,0.00231918239,0.003606525157,0.00463836478,0.6430517711,0.5210526316,0.7740112994,ok",
    "horn_like,160,0.1,0.0005527712264,0.001100628931,0.001700078616,1.042410714,0.8813559322,1.221698113,ok",
};

const fs::path kOut = fs::temp_directory_path() / "cspt_acceptance";

std::vector<std::string> sweep_args(const std::string& set, const std::string& ns, const std::string& workers) {
    return {"sweep", fixture_path(set), "--n", ns, "--eps", "0.1", "--trials", "400", "--seed", "7",
            "--workers", workers, "--out", (kOut / ("w" + workers) / set).string()};
}

Outcome window_separation() {
    std::vector<WindowRow> rows;
    std::string detail;
    bool ran = true;
    for (const auto& [set, ns] : std::vector<std::pair<std::string, std::string>>{
             {"ksat3", "25,100"}, {"xor2", "160"}, {"horn_like", "160"}}) {
        const auto r = cli(sweep_args(set, ns, "8"));
        ran = ran && r.code == 0;
        for (auto& row : read_windows(kOut / "w8" / set / "window.csv")) {
            rows.push_back(row);
        }
    }
    auto find = [&](const std::string& set, std::size_t n) -> const WindowRow* {
        for (const auto& r : rows) {
            if (r.set == set && r.n == n && r.status == "ok") {
                return &r;
            }
        }
        return nullptr;
    };
    const auto* k25 = find("ksat3", 25);
    const auto* k100 = find("ksat3", 100);
    const auto* x = find("xor2", 160);
    const auto* h = find("horn_like", 160);
    if (!ran || !k25 || !k100 || !x || !h) {
        return {false, "sweep did not produce all window rows"};
    }
    const bool a = k100->W < k25->W && k100->W_high < k25->W_low;
    const bool b = x->W >= 0.1 && x->W_low > 0.05 && h->W >= 0.1 && h->W_low > 0.05;
    bool frozen = kWindowSnapshot.size() == rows.size();
    for (std::size_t i = 0; frozen && i < rows.size(); ++i) {
        frozen = rows[i].line == kWindowSnapshot[i];
    }
    if (!frozen) {
        std::printf("window rows of this run:\n");
        for (const auto& r : rows) {
            std::printf("    \"%s\",\n", r.line.c_str());
        }
    }
    detail = "ksat3 W(25)=" + fmt("%.4f", k25->W) + " [" + fmt("%.4f", k25->W_low) + "," + fmt("%.4f", k25->W_high) +
             "] W(100)=" + fmt("%.4f", k100->W) + " [" + fmt("%.4f", k100->W_low) + "," +
             fmt("%.4f", k100->W_high) + "]; xor2 W(160)=" + fmt("%.4f", x->W) + " W_low=" + fmt("%.4f", x->W_low) +
             "; horn_like W(160)=" + fmt("%.4f", h->W) + " W_low=" + fmt("%.4f", h->W_low) +
             "; snapshot " + (frozen ? "matches" : "differs");
    return {a && b && frozen, detail};
}

// ============================================================================
// 9. reproducibility
// ============================================================================

Outcome reproducibility() {
    std::size_t replayed = 0, differing = 0;
    const auto logged = g_invocations;
    for (const auto& args : logged) {
        if (args[0] == "sweep") {
            continue;
        }
        differing += cli(args, false) == cli(args, false) ? 0 : 1;
        ++replayed;
    }
    std::size_t sweeps = 0;
    for (const auto& [set, ns] : std::vector<std::pair<std::string, std::string>>{
             {"ksat3", "25,100"}, {"xor2", "160"}, {"horn_like", "160"}}) {
        const auto one = cli(sweep_args(set, ns, "1"), false);
        const auto eight = cli(sweep_args(set, ns, "8"), false);
        for (const char* file : {"curve.csv", "window.csv"}) {
            const auto a = slurp(kOut / "w1" / set / file);
            const auto b = slurp(kOut / "w8" / set / file);
            differing += !a.empty() && a == b ? 0 : 1;
        }
        differing += one == eight ? 0 : 1;
        ++sweeps;
    }
    return {differing == 0 && replayed > 0, std::to_string(replayed) + " invocations replayed, " +
                                                std::to_string(sweeps) + " sweeps at workers 1 and 8, " +
                                                std::to_string(differing) + " differences"};
}

} // namespace

int main() {
    struct Criterion {
        int id;
        const char* name;
        double limit_s;
        std::function<Outcome()> run;
    };
    const std::vector<Criterion> criteria = {
        {1, "structural trichotomy", 1.0, structural_trichotomy},
        {2, "fixpoint oracle equivalence", 10.0, fixpoint_oracle},
        {3, "cycle-decision oracle equivalence", 300.0, cycle_oracle},
        {4, "extreme behavedness", 1.0, extreme},
        {5, "tree-like and unicyclic satisfiability", 60.0, tree_sat},
        {6, "solver oracle", 60.0, solver_oracle},
        {7, "minimally unsatisfiable size bound", 120.0, mu_bound},
        {8, "window separation", 1800.0, window_separation},
        {9, "reproducibility", 3600.0, reproducibility},
    };
    bool all = true;
    for (const auto& c : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        const bool in_time = secs <= c.limit_s;
        const bool pass = o.pass && in_time;
        all = all && pass;
        std::printf("%s [%d] %s: %s (%.2fs%s)\n", pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(), secs,
                    in_time ? "" : ", over time limit");
        std::fflush(stdout);
    }
    return all ? 0 : 1;
}
