// SPDX-License-Identifier: Apache-2.0
#include "cspt/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <limits>
#include <mutex>
#include <thread>

#include "cspt/error.hpp"
#include "cspt/formula.hpp"
#include "cspt/solver.hpp"

namespace cspt {

Interval wilson_interval(std::size_t successes, std::size_t trials, double z) {
    if (trials == 0) {
        return {0.0, 1.0};
    }
    const double n = static_cast<double>(trials);
    const double ph = static_cast<double>(successes) / n;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / n;
    const double center = (ph + z2 / (2.0 * n)) / denom;
    const double half = z / denom * std::sqrt(ph * (1.0 - ph) / n + z2 / (4.0 * n * n));
    Interval out{std::max(0.0, center - half), std::min(1.0, center + half)};
    out.low = std::min(out.low, ph);
    out.high = std::max(out.high, ph);
    return out;
}

std::string_view to_string(Model model) {
    return model == Model::Probability ? "p" : "count";
}

std::string format_double(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", x);
    return buf;
}

// ============================================================================
// Estimator
// ============================================================================

Estimator::Estimator(const ConstraintSet& cs, std::size_t n, EstimatorConfig config)
    : cs_(cs), n_(n), config_(config) {
    if (config_.trials == 0) {
        fail(ErrorCode::BadEntry, "at least one trial is required");
    }
    if (n < static_cast<std::size_t>(cs.arity())) {
        fail(ErrorCode::TooFewVariables, "need at least " + std::to_string(cs.arity()) + " variables, got " +
                                             std::to_string(n));
    }
    universe_ = ordered_tuple_count(n, cs.arity()) * cs.size();
    config_.workers = std::max(1u, config_.workers);
}

bool Estimator::trial(double p, std::size_t index) const {
    const std::uint64_t seed = config_.coupled
                                   ? derive_seed(config_.seed, {n_, index})
                                   : derive_seed(config_.seed, {n_, std::bit_cast<std::uint64_t>(p), index});
    if (config_.model == Model::Counting) {
        const auto m = static_cast<std::uint64_t>(std::llround(p * static_cast<double>(universe_)));
        return is_satisfiable(cs_, sample_counting(cs_, n_, m, seed));
    }
    return is_satisfiable(cs_, sample_constant_probability(cs_, n_, p, seed));
}

const ProbEstimate& Estimator::at(double p) {
    if (!(p >= 0.0 && p <= 1.0)) {
        fail(ErrorCode::BadProbability, "probability " + format_double(p) + " outside [0, 1]");
    }
    if (auto it = points_.find(p); it != points_.end()) {
        return it->second;
    }
    const std::size_t trials = config_.trials;
    const double per_template = static_cast<double>(universe_ / cs_.size());

    ProbEstimate e;
    e.p = p;
    e.trials = trials;
    bool deterministic = p == 0.0;
    if (config_.model == Model::Counting) {
        const double m = std::round(p * static_cast<double>(universe_));
        e.density = m / static_cast<double>(n_);
        deterministic = deterministic || m == 0.0 || m == static_cast<double>(universe_);
    } else {
        bool all_certain = true;
        for (std::size_t c = 0; c < cs_.size(); ++c) {
            const double q = inclusion_probability(cs_, c, p);
            e.density += q * per_template / static_cast<double>(n_);
            all_certain = all_certain && q >= 1.0;
        }
        deterministic = deterministic || all_certain;
    }

    if (deterministic) {
        e.successes = trial(p, 0) ? trials : 0;
        solver_calls_ += 1;
    } else {
        std::vector<char> outcome(trials, 0);
        std::atomic<std::size_t> next{0};
        std::exception_ptr error;
        std::mutex error_mutex;
        auto worker = [&] {
            for (std::size_t i = next++; i < trials; i = next++) {
                try {
                    outcome[i] = trial(p, i) ? 1 : 0;
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!error) {
                        error = std::current_exception();
                    }
                }
            }
        };
        const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(config_.workers, trials));
        if (workers <= 1) {
            worker();
        } else {
            std::vector<std::thread> pool;
            for (unsigned w = 0; w < workers; ++w) {
                pool.emplace_back(worker);
            }
            for (auto& t : pool) {
                t.join();
            }
        }
        if (error) {
            std::rethrow_exception(error);
        }
        e.successes = static_cast<std::size_t>(std::count(outcome.begin(), outcome.end(), 1));
        solver_calls_ += trials;
    }
    e.p_hat = static_cast<double>(e.successes) / static_cast<double>(trials);
    const Interval ci = wilson_interval(e.successes, trials);
    e.ci_low = ci.low;
    e.ci_high = ci.high;
    return points_.emplace(p, e).first->second;
}

ProbEstimate estimate_sat_probability(const ConstraintSet& cs, std::size_t n, double p, std::size_t trials,
                                      std::uint64_t seed, unsigned workers) {
    if (trials < 30) {
        fail(ErrorCode::BadEntry, "at least 30 trials are required, got " + std::to_string(trials));
    }
    EstimatorConfig config;
    config.trials = trials;
    config.seed = seed;
    config.workers = workers;
    Estimator est(cs, n, config);
    return est.at(p);
}

// ============================================================================
// Threshold search
// ============================================================================

namespace {

constexpr int kMaxSteps = 400;

void charge(const Estimator& est) {
    if (est.solver_calls() + est.config().trials > est.config().budget) {
        fail(ErrorCode::Inconclusive, "solver budget of " + std::to_string(est.config().budget) +
                                          " calls exhausted before the bracket closed");
    }
}

/// Upper end of the search: doubles p from one expected instance until the
/// estimate drops below `floor`; 1 if it never does.
double find_p_max(Estimator& est, double floor) {
    double p = std::min(1.0, 1.0 / static_cast<double>(est.universe()));
    while (true) {
        if (est.points().count(p) == 0) {
            charge(est);
        }
        const ProbEstimate& e = est.at(p);
        if (e.p_hat < floor || p >= 1.0) {
            return p;
        }
        p = std::min(1.0, 2.0 * p);
    }
}

void settle(const Estimator& est, Bracket& b, double p_max) {
    b.high = p_max;
    for (const auto& [p, e] : est.points()) {
        if (p <= p_max && e.ci_high < b.target) {
            b.high = p;
            break;
        }
    }
    b.low = 0.0;
    for (const auto& [p, e] : est.points()) {
        if (p >= b.high) {
            break;
        }
        if (e.ci_low > b.target) {
            b.low = p;
        }
    }
}

} // namespace

Bracket bracket_sat_level(Estimator& est, double target, double floor) {
    const double p_max = find_p_max(est, floor);
    const ProbEstimate& top = est.at(p_max);
    if (!(top.ci_high < target)) {
        fail(ErrorCode::NoThreshold, "Pr[SAT] stays at " + format_double(top.p_hat) + " up to p = " +
                                         format_double(p_max));
    }
    const double tol = est.config().tol;
    Bracket b;
    b.target = target;
    for (int step = 0; step < kMaxSteps; ++step) {
        settle(est, b, p_max);
        // every tested point strictly inside (low, high) straddles the target
        auto first = est.points().upper_bound(b.low);
        auto last = est.points().lower_bound(b.high);
        double probe = -1.0;
        if (first == last) {
            if (b.high - b.low > tol * b.high) {
                probe = 0.5 * (b.low + b.high);
            }
        } else {
            const double s_left = first->first;
            const double s_right = std::prev(last)->first;
            if (s_left - b.low > tol * b.high) {
                probe = 0.5 * (b.low + s_left);
            } else if (b.high - s_right > tol * b.high) {
                probe = 0.5 * (s_right + b.high);
            }
        }
        if (probe < 0.0 || est.points().count(probe) != 0) {
            return b;
        }
        charge(est);
        est.at(probe);
    }
    fail(ErrorCode::Inconclusive, "bracket did not close in " + std::to_string(kMaxSteps) + " steps");
}

Bracket estimate_p_epsilon(Estimator& est, double eps) {
    if (!(eps > 0.0 && eps < 0.5)) {
        fail(ErrorCode::BadProbability, "eps " + format_double(eps) + " outside (0, 1/2)");
    }
    return bracket_sat_level(est, 1.0 - eps, eps / 2.0);
}

ThresholdCurve sharpness_window(Estimator& est, double eps) {
    if (!(eps > 0.0 && eps < 0.5)) {
        fail(ErrorCode::BadProbability, "eps " + format_double(eps) + " outside (0, 1/2)");
    }
    ThresholdCurve curve;
    curve.n = est.variable_count();
    curve.eps = eps;
    curve.p_eps = bracket_sat_level(est, 1.0 - eps, eps / 2.0);
    curve.p_half = bracket_sat_level(est, 0.5, eps / 2.0);
    curve.p_one_minus_eps = bracket_sat_level(est, eps, eps / 2.0);
    const Bracket& a = curve.p_eps;
    const Bracket& h = curve.p_half;
    const Bracket& z = curve.p_one_minus_eps;
    curve.W = std::max(0.0, (z.estimate() - a.estimate()) / h.estimate());
    curve.W_low = std::max(0.0, (z.low - a.high) / h.high);
    curve.W_high = h.low > 0.0 ? std::max(0.0, (z.high - a.low) / h.low) : std::numeric_limits<double>::infinity();
    for (const auto& [p, e] : est.points()) {
        curve.points.push_back(e);
    }
    return curve;
}

// ============================================================================
// Sweep
// ============================================================================

SweepResult sweep(const ConstraintSet& cs, const SweepConfig& config) {
    if (config.n_list.empty()) {
        fail(ErrorCode::UsageError, "sweep needs at least one n");
    }
    if (!std::is_sorted(config.n_list.begin(), config.n_list.end())) {
        fail(ErrorCode::UsageError, "n list must be ascending");
    }
    SweepResult result;
    std::string curve = std::string(kCurveHeader) + "\n";
    std::string window = std::string(kWindowHeader) + "\n";
    const std::string eps = format_double(config.eps);
    for (std::size_t n : config.n_list) {
        SweepRow row;
        row.n = n;
        try {
            Estimator est(cs, n, config.estimator);
            try {
                row.curve = sharpness_window(est, config.eps);
                row.curve->set_name = cs.name();
                row.status = "ok";
            } catch (const Error& e) {
                row.status = std::string(to_string(e.code()));
            }
            for (const auto& [p, e] : est.points()) {
                row.points.push_back(e);
            }
        } catch (const Error& e) {
            row.status = std::string(to_string(e.code()));
        }
        for (const auto& e : row.points) {
            curve += cs.name() + "," + std::to_string(n) + "," + eps + "," + format_double(e.p) + "," +
                     format_double(e.density) + "," + std::to_string(e.trials) + "," + std::to_string(e.successes) +
                     "," + format_double(e.p_hat) + "," + format_double(e.ci_low) + "," + format_double(e.ci_high) +
                     ",ok\n";
        }
        window += cs.name() + "," + std::to_string(n) + "," + eps + ",";
        if (row.curve) {
            const ThresholdCurve& c = *row.curve;
            window += format_double(c.p_eps.estimate()) + "," + format_double(c.p_half.estimate()) + "," +
                      format_double(c.p_one_minus_eps.estimate()) + "," + format_double(c.W) + "," +
                      format_double(c.W_low) + "," + format_double(c.W_high) + ",ok\n";
        } else {
            window += ",,,,,," + row.status + "\n";
        }
        result.rows.push_back(std::move(row));
    }
    result.curve_csv = std::move(curve);
    result.window_csv = std::move(window);
    return result;
}

void write_sweep(const SweepResult& result, const std::string& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) {
        fail(ErrorCode::IoError, "cannot create directory '" + dir + "': " + ec.message());
    }
    for (const auto& [file, text] : {std::pair{"curve.csv", &result.curve_csv}, {"window.csv", &result.window_csv}}) {
        const auto path = std::filesystem::path(dir) / file;
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        out << *text;
        if (!out) {
            fail(ErrorCode::IoError, "cannot write '" + path.string() + "'");
        }
    }
}

} // namespace cspt
