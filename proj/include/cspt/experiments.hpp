// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cspt/templates.hpp"

namespace cspt {

inline constexpr double kWilsonZ95 = 1.959963984540054;

struct ProbEstimate {
    double p = 0.0;
    /// Expected instances per variable under the constant-probability model,
    /// exact instances per variable under the counting model.
    double density = 0.0;
    std::size_t trials = 0;
    std::size_t successes = 0;
    double p_hat = 0.0;
    double ci_low = 0.0;
    double ci_high = 1.0;
};

struct Interval {
    double low = 0.0;
    double high = 1.0;
};

/// 95% Wilson score interval, clipped to [0, 1].
Interval wilson_interval(std::size_t successes, std::size_t trials, double z = kWilsonZ95);

enum class Model { Probability, Counting };

std::string_view to_string(Model model);

struct EstimatorConfig {
    Model model = Model::Probability;
    /// One random source per trial index shared by every p, so the formulas
    /// of one trial are nested as p grows.
    bool coupled = false;
    std::size_t trials = 400;
    std::uint64_t seed = 0;
    unsigned workers = 1;
    double tol = 1e-2;
    /// Total solver calls allowed per estimator.
    std::uint64_t budget = 100'000;
};

/// Pr[SAT] estimates for one (set, n), cached by p. Trial seeds derive from
/// (seed, n, p, trial) or, coupled, from (seed, n, trial) only.
class Estimator {
public:
    Estimator(const ConstraintSet& cs, std::size_t n, EstimatorConfig config);

    const ProbEstimate& at(double p);

    const std::map<double, ProbEstimate>& points() const noexcept { return points_; }
    std::uint64_t solver_calls() const noexcept { return solver_calls_; }
    const EstimatorConfig& config() const noexcept { return config_; }
    std::size_t variable_count() const noexcept { return n_; }
    /// |C| * n!/(n-k)!
    std::uint64_t universe() const noexcept { return universe_; }

private:
    bool trial(double p, std::size_t index) const;

    ConstraintSet cs_;
    std::size_t n_;
    EstimatorConfig config_;
    std::uint64_t universe_ = 0;
    std::uint64_t solver_calls_ = 0;
    std::map<double, ProbEstimate> points_;
};

/// Independent trials at a single p (trials >= 30, BadEntry otherwise).
ProbEstimate estimate_sat_probability(const ConstraintSet& cs, std::size_t n, double p, std::size_t trials,
                                      std::uint64_t seed, unsigned workers = 1);

struct Bracket {
    double target = 0.0;     // level of Pr[SAT] sought
    double low = 0.0;        // largest tested p whose interval lies above target
    double high = 0.0;       // smallest tested p whose interval lies below target
    double estimate() const { return 0.5 * (low + high); }
};

/// p at which Pr[UNSAT] = eps, that is Pr[SAT] = 1 - eps. Throws
/// NoThreshold when Pr[SAT] stays high up to p = 1 and Inconclusive when the
/// solver budget runs out first.
Bracket estimate_p_epsilon(Estimator& est, double eps);

/// Generalisation used by the window: the p at which Pr[SAT] crosses `target`.
/// `floor` is the level below which the doubling search for an upper end stops.
Bracket bracket_sat_level(Estimator& est, double target, double floor);

struct ThresholdCurve {
    std::string set_name;
    std::size_t n = 0;
    double eps = 0.1;
    std::vector<ProbEstimate> points;   // ascending p
    Bracket p_eps;                      // Pr[SAT] = 1 - eps
    Bracket p_half;
    Bracket p_one_minus_eps;            // Pr[SAT] = eps
    double W = 0.0;
    double W_low = 0.0;
    double W_high = 0.0;
};

/// W = (p_{1-eps} - p_eps) / p_{1/2} from bracket midpoints, with the band
/// [W_low, W_high] from the bracket ends.
ThresholdCurve sharpness_window(Estimator& est, double eps);

struct SweepConfig {
    std::vector<std::size_t> n_list;
    double eps = 0.1;
    EstimatorConfig estimator;
};

struct SweepRow {
    std::size_t n = 0;
    std::string status;   // "ok" or an error code
    std::optional<ThresholdCurve> curve;
    std::vector<ProbEstimate> points;
};

struct SweepResult {
    std::vector<SweepRow> rows;
    std::string curve_csv;
    std::string window_csv;
};

inline constexpr std::string_view kCurveHeader = "set,n,eps,p,density,trials,sat,p_hat,ci_low,ci_high,status";
inline constexpr std::string_view kWindowHeader = "set,n,eps,p_eps,p_half,p_one_minus_eps,W,W_low,W_high,status";

/// Runs sharpness_window for each n; failures become rows with a non-ok
/// status and the sweep carries on.
SweepResult sweep(const ConstraintSet& cs, const SweepConfig& config);

/// Writes curve.csv and window.csv into `dir` (created if missing).
void write_sweep(const SweepResult& result, const std::string& dir);

/// %.10g rendering used in every CSV field.
std::string format_double(double x);

} // namespace cspt
