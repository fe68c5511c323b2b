// SPDX-License-Identifier: Apache-2.0
#include "cspt/cli.hpp"

#include <algorithm>
#include <fstream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "cspt/boolean.hpp"
#include "cspt/experiments.hpp"
#include "cspt/formula.hpp"
#include "cspt/solver.hpp"
#include "cspt/structure.hpp"

namespace cspt {

int exit_code_for(ErrorCode code) {
    switch (code) {
    case ErrorCode::UsageError: return exit_code::usage;
    case ErrorCode::BudgetExceeded:
    case ErrorCode::Inconclusive:
    case ErrorCode::NoThreshold: return exit_code::budget;
    default: return exit_code::input;
    }
}

namespace {

using json = nlohmann::ordered_json;

std::string value_set_text(ValueSet s, int t) {
    std::string out = "{";
    bool first = true;
    for (int v = 0; v < t; ++v) {
        if ((s >> v) & 1u) {
            out += first ? "" : ",";
            out += std::to_string(v);
            first = false;
        }
    }
    return out + "}";
}

json value_set_json(ValueSet s, int t) {
    json arr = json::array();
    for (int v = 0; v < t; ++v) {
        if ((s >> v) & 1u) {
            arr.push_back(v);
        }
    }
    return arr;
}

void write_output(const std::string& text, const std::string& path, std::ostream& out) {
    if (path.empty() || path == "-") {
        out << text;
        return;
    }
    std::ofstream file(path, std::ios::binary | std::ios::trunc);
    file << text;
    if (!file) {
        fail(ErrorCode::IoError, "cannot write '" + path + "'");
    }
}

// ============================================================================
// classify
// ============================================================================

std::string classify_json(const ConstraintSet& cs, const StructureVerdict& v) {
    const int t = cs.domain_size();
    json j;
    j["good_values"] = value_set_json(v.good_values, t);
    json levels = json::array();
    for (const auto& level : v.badness.levels) {
        levels.push_back(level ? json(*level) : json(nullptr));
    }
    j["bad_levels"] = levels;
    j["well_behaved"] = v.well.holds;
    j["very_well_behaved"] = v.very.holds;
    j["extremely_well_behaved"] = v.extreme.holds;
    if (v.extreme.gamma) {
        json g = json::object();
        for (const auto& [value, c] : *v.extreme.gamma) {
            g[std::to_string(value)] = cs[c].name();
        }
        j["gamma"] = g;
    } else {
        j["gamma"] = nullptr;
    }
    j["verdict"] = std::string(to_string(v.outlook));
    if (v.very.counterexample) {
        json slots = json::array();
        for (const auto& slot : *v.very.counterexample) {
            slots.push_back({{"template", cs[slot.template_index].name()},
                             {"entry", slot.entry + 1},
                             {"exit", slot.exit + 1}});
        }
        j["counterexample"] = {{"cycle", format_cycle(cs, *v.very.counterexample)}, {"slots", slots}};
    } else {
        j["counterexample"] = nullptr;
    }
    if (t == 2) {
        j["sat_verdict"] = std::string(to_string(classify_sat(cs).outcome));
    }
    return j.dump(2) + "\n";
}

std::string classify_text(const ConstraintSet& cs, const StructureVerdict& v) {
    const int t = cs.domain_size();
    std::ostringstream out;
    out << "set " << cs.name() << ": domain " << t << ", arity " << cs.arity() << ", " << cs.size()
        << " templates\n";
    out << "good values: " << value_set_text(v.good_values, t) << '\n';
    for (const auto& w : v.badness.trace) {
        out << "bad value " << int(w.value) << ": level " << w.level << " via " << cs[w.template_index].name()
            << " at x" << w.position + 1;
        if (w.forcing_position) {
            out << ", forcing x" << *w.forcing_position + 1;
        }
        out << '\n';
    }
    out << "well-behaved: ";
    switch (v.well.failure) {
    case WellBehavedResult::Failure::None: out << "yes\n"; break;
    case WellBehavedResult::Failure::NoGoodValue: out << "no (no good value)\n"; break;
    case WellBehavedResult::Failure::ConstantSatisfied:
        out << "no (every template accepts the constant tuple of " << int(*v.well.value) << ")\n";
        break;
    }
    out << "very well-behaved: " << (v.very.holds ? "yes" : "no");
    if (v.very.counterexample) {
        out << " (cycle without a good assignment: " << format_cycle(cs, *v.very.counterexample) << ")";
    }
    out << '\n';
    out << "extremely well-behaved: " << (v.extreme.holds ? "yes" : "no");
    if (v.extreme.gamma) {
        out << " (gamma:";
        for (const auto& [value, c] : *v.extreme.gamma) {
            out << ' ' << int(value) << "->" << cs[c].name();
        }
        out << ')';
    }
    out << '\n';
    out << "verdict: " << describe(v.outlook) << '\n';
    if (t == 2) {
        out << "sat verdict: " << describe(cs, classify_sat(cs)) << '\n';
    }
    return out.str();
}

// ============================================================================
// check
// ============================================================================

int run_check(const ConstraintSet& cs, int max_len, std::ostream& out) {
    const auto closure = is_very_well_behaved(cs);
    const auto brute = cycle_oracle_brute(cs, max_len);
    out << "set " << cs.name() << ": parsed, " << cs.size() << " templates\n";
    out << "closure decision: " << (closure.holds ? "every cycle has a good assignment" : "failing cycle found") << '\n';
    out << "cycle enumeration up to length " << max_len << ": "
        << (brute.holds ? "no failing cycle" : "failing cycle " + format_cycle(cs, *brute.counterexample)) << '\n';
    const bool well = is_well_behaved(cs).holds;
    // the closure answer also folds in well-behavedness
    const bool agree = closure.holds == (well && brute.holds);
    out << (agree ? "agree\n" : "DISAGREE\n");
    return agree ? exit_code::ok : exit_code::input;
}

// ============================================================================
// solve / mu-bound
// ============================================================================

std::string assignment_text(const Assignment& a) {
    std::string out = "values";
    for (Value v : a) {
        out += ' ' + std::to_string(v);
    }
    return out + "\n";
}

std::string mu_report_text(const ConstraintSet& cs, const MuBoundReport& r) {
    std::ostringstream out;
    out << "set " << cs.name() << ": connected formulas with at most " << r.max_instances << " instances, "
        << r.nodes << " nodes\n";
    out << "bound hypothesis: " << (r.hypothesis_holds ? "holds" : "does not hold") << " ("
        << describe(cs, classify_sat(cs)) << ")\n";
    out << "minimally unsatisfiable classes: " << r.formulas.size() << '\n';
    for (const auto& mu : r.formulas) {
        out << "  |S|=" << mu.formula.size() << " |Var|=" << mu.variables << " bound=" << mu.bound
            << (mu.violates ? " exceeds" : " within") << ":";
        for (const auto& inst : mu.formula.instances()) {
            out << ' ' << cs[inst.template_index].name() << '(';
            for (std::size_t p = 0; p < inst.vars.size(); ++p) {
                out << (p ? "," : "") << 'x' << inst.vars[p] + 1;
            }
            out << ')';
        }
        out << '\n';
    }
    if (r.bound_refuted()) {
        out << "result: bound violated\n";
    } else if (r.violation_count() > 0) {
        out << "result: " << r.violation_count() << " class(es) exceed the bound, outside its hypothesis\n";
    } else {
        out << "result: bound respected\n";
    }
    return out.str();
}

std::vector<std::size_t> parse_n_list(const std::string& text) {
    std::vector<std::size_t> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            const long long v = std::stoll(item, &used);
            if (used != item.size() || v <= 0) {
                throw std::invalid_argument(item);
            }
            out.push_back(static_cast<std::size_t>(v));
        } catch (const std::exception&) {
            fail(ErrorCode::UsageError, "bad entry '" + item + "' in --n");
        }
    }
    return out;
}

} // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Structural classification and threshold experiments for random CSPs", "cspt"};
    app.set_version_flag("--version", "cspt " + std::string(kVersion) + " (csp-set v1, csp-formula v1)");
    app.require_subcommand(1);

    std::string set_path;
    std::string formula_path;
    std::string out_path;
    std::uint64_t seed = 0;

    auto* classify = app.add_subcommand("classify", "structural verdict for a constraint set");
    bool as_json = false;
    classify->add_option("set", set_path, "constraint set (.csp)")->required();
    classify->add_flag("--json", as_json, "emit JSON");

    auto* check = app.add_subcommand("check", "validate a set and cross-check the cycle decision");
    int max_len = 6;
    check->add_option("set", set_path, "constraint set (.csp)")->required();
    check->add_option("--max-len", max_len, "longest cycle enumerated")->check(CLI::Range(2, 8));

    auto* generate = app.add_subcommand("generate", "sample a random formula");
    std::size_t n = 0;
    std::optional<std::uint64_t> m;
    std::optional<double> p;
    std::string format = "text";
    generate->add_option("set", set_path, "constraint set (.csp)")->required();
    generate->add_option("-n", n, "number of variables")->required();
    auto* m_opt = generate->add_option("-m", m, "exact number of instances (counting model)");
    auto* p_opt = generate->add_option("-p", p, "inclusion probability (constant-probability model)");
    m_opt->excludes(p_opt);
    generate->add_option("--seed", seed, "random seed");
    generate->add_option("--format", format, "text or json")->check(CLI::IsMember({"text", "json"}));
    generate->add_option("-o,--output", out_path, "output file (default stdout)");

    auto* solve_cmd = app.add_subcommand("solve", "decide satisfiability of a formula");
    bool good_only = false;
    bool minimal = false;
    solve_cmd->add_option("formula", formula_path, "formula (.cspf)")->required();
    solve_cmd->add_option("set", set_path, "constraint set (.csp)")->required();
    solve_cmd->add_flag("--good-only", good_only, "use good values only");
    solve_cmd->add_flag("--minimal", minimal, "report minimal unsatisfiability instead");

    auto* mu = app.add_subcommand("mu-bound", "check the size bound on small minimally unsatisfiable formulas");
    std::size_t max_instances = 4;
    mu->add_option("set", set_path, "boolean constraint set (.csp)")->required();
    mu->add_option("--max-instances", max_instances, "largest formula enumerated")
        ->check(CLI::Range(std::size_t{1}, kMaxMuInstances));

    auto* sweep_cmd = app.add_subcommand("sweep", "estimate threshold windows over several n");
    std::string n_list = "25,50,100";
    double eps = 0.1;
    std::size_t trials = 400;
    std::string out_dir;
    bool coupled = false;
    std::string model = "p";
    unsigned workers = 1;
    double tol = 1e-2;
    std::uint64_t budget = 100'000;
    sweep_cmd->add_option("set", set_path, "constraint set (.csp)")->required();
    sweep_cmd->add_option("--n", n_list, "comma-separated ascending variable counts");
    sweep_cmd->add_option("--eps", eps, "window level")->check(CLI::Range(0.0, 0.5));
    sweep_cmd->add_option("--trials", trials, "formulas per point")->check(CLI::Range(std::size_t{30}, std::size_t{1'000'000}));
    sweep_cmd->add_option("--seed", seed, "master seed");
    sweep_cmd->add_option("--out", out_dir, "output directory")->required();
    sweep_cmd->add_flag("--coupled", coupled, "share one random source per trial across p");
    sweep_cmd->add_option("--model", model, "p or count")->check(CLI::IsMember({"p", "count"}));
    sweep_cmd->add_option("--workers", workers, "parallel workers")->check(CLI::Range(1u, 256u));
    sweep_cmd->add_option("--tol", tol, "relative bracket width")->check(CLI::Range(1e-6, 1.0));
    sweep_cmd->add_option("--budget", budget, "solver calls per n");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            app.exit(e, out, err);
            return exit_code::ok;
        }
        err << "error: " << to_string(ErrorCode::UsageError) << ": " << e.what() << '\n';
        return exit_code::usage;
    }

    try {
        if (*classify) {
            const auto cs = load_constraint_set(set_path);
            const auto verdict = classify_csp(cs);
            out << (as_json ? classify_json(cs, verdict) : classify_text(cs, verdict));
            return exit_code::ok;
        }
        if (*check) {
            return run_check(load_constraint_set(set_path), max_len, out);
        }
        if (*generate) {
            if (!m && !p) {
                fail(ErrorCode::UsageError, "generate needs -m or -p");
            }
            const auto cs = load_constraint_set(set_path);
            const Formula f = m ? sample_counting(cs, n, *m, seed) : sample_constant_probability(cs, n, *p, seed);
            write_output(format == "json" ? write_formula_json(cs, f) : write_formula(cs, f), out_path, out);
            return exit_code::ok;
        }
        if (*solve_cmd) {
            const auto cs = load_constraint_set(set_path);
            const Formula f = load_formula(formula_path, cs);
            if (minimal) {
                out << "minimally unsatisfiable: " << (is_minimally_unsatisfiable(cs, f) ? "yes" : "no") << '\n';
                return exit_code::ok;
            }
            std::optional<ValueSet> allowed;
            if (good_only) {
                allowed = bad_values(cs).good_values();
            }
            if (const auto a = solve(cs, f, allowed)) {
                out << "SAT\n" << assignment_text(*a);
                return exit_code::sat;
            }
            out << "UNSAT\n";
            return exit_code::unsat;
        }
        if (*mu) {
            const auto cs = load_constraint_set(set_path);
            out << mu_report_text(cs, check_mu_bound(cs, max_instances));
            return exit_code::ok;
        }
        if (*sweep_cmd) {
            const auto cs = load_constraint_set(set_path);
            SweepConfig config;
            config.n_list = parse_n_list(n_list);
            config.eps = eps;
            config.estimator.model = model == "count" ? Model::Counting : Model::Probability;
            config.estimator.coupled = coupled;
            config.estimator.trials = trials;
            config.estimator.seed = seed;
            config.estimator.workers = workers;
            config.estimator.tol = tol;
            config.estimator.budget = budget;
            const SweepResult result = sweep(cs, config);
            write_sweep(result, out_dir);
            int code = exit_code::ok;
            for (const auto& row : result.rows) {
                out << "n=" << row.n << ": " << row.status;
                if (row.curve) {
                    out << " W=" << format_double(row.curve->W) << " [" << format_double(row.curve->W_low) << ", "
                        << format_double(row.curve->W_high) << "]";
                }
                out << '\n';
                if (row.status == "Inconclusive" || row.status == "BudgetExceeded") {
                    code = exit_code::budget;
                }
            }
            return code;
        }
    } catch (const Error& e) {
        err << "error: " << to_string(e.code()) << ": " << e.what() << '\n';
        return exit_code_for(e.code());
    }
    return exit_code::usage;
}

} // namespace cspt
