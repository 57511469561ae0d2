#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "nematic/dynamics.hpp"
#include "nematic/noise.hpp"

namespace nematic {

struct OptimizerSettings {
    int max_iterations = 60;
    double initial_step = 1.0;
    /// Stop when the gradient norm or the objective decrease falls below this.
    double tolerance = 1e-8;
    /// Central-difference step in w = log g.
    double fd_step = 1e-5;
    int threads = 1;
    /// Largest change of any log g per iteration.
    double max_log_step = 1.0;
};

/// Penalized relaxation of the rate function: minimize
///   L_T(g) + penalty * (|u(T) - u*|^2 + ||theta(T) - theta*||_{H1}^2)
/// over controls piecewise constant on `cells` time cells.
struct RateProblem {
    SpectralState init;
    SpectralState target;
    SolverConfig cfg;
    double penalty = 100.0;
    int cells = 1;
    OptimizerSettings optimizer;

    int dimension() const { return cells * cfg.noise.marks.size(); }
    Control unit_control() const { return Control(cfg.horizon, cells, cfg.noise.marks.size(), 1.0); }
    void validate() const;
};

struct ObjectiveTerms {
    double objective = 0.0;
    double cost = 0.0;
    double mismatch = 0.0;
};

struct RateIteration {
    int iteration = 0;
    double objective = 0.0;
    double cost = 0.0;
    double mismatch = 0.0;
};

struct RateSolution {
    Control g_star;
    double cost = 0.0;
    double mismatch = 0.0;
    double objective = 0.0;
    bool converged = false;
    std::vector<RateIteration> history;
};

/// |u - u*|^2 + ||theta - theta*||_{H1}^2
double terminal_mismatch(const SpectralState& end, const SpectralState& target);

/// All terms of the penalized objective. A diverged skeleton yields infinity.
ObjectiveTerms objective_terms(const Control& g, const RateProblem& prob);
double rate_objective(const Control& g, const RateProblem& prob);

/// Gradient descent in w = log g with central finite-difference gradients and
/// Armijo backtracking, started at g == 1.
RateSolution optimize_control(const RateProblem& prob);

/// Exhaustive search over `values`^dimension; dimension must be <= 2.
RateSolution brute_force_rate(const RateProblem& prob, std::span<const double> values);

/// Central-difference directional derivative of rate_objective in w = log g.
double directional_derivative(const Control& g, const std::vector<double>& direction, double h,
                              const RateProblem& prob);

// ---- Monte Carlo ----------------------------------------------------------------------

struct SmallNoiseRow {
    double epsilon = 0.0;
    double median = 0.0;
    double q25 = 0.0;
    double q75 = 0.0;
    int n_diverged = 0;
    int n_paths = 0;
};

struct SmallNoiseStudy {
    std::vector<SmallNoiseRow> rows;
    /// False when more than 1% of the paths at some epsilon diverged.
    bool ok = true;
};

/// For each epsilon, sup_t (|u_eps - u_phi| + ||theta_eps - theta_phi||_{H1}) over
/// n_paths controlled SDE paths against the phi-skeleton.
SmallNoiseStudy mc_small_noise_study(const SpectralState& init, std::span<const double> epsilons, int n_paths,
                                     const Control& phi, const SolverConfig& cfg, std::uint64_t seed,
                                     int threads = 1);

struct ConvolutionRow {
    double epsilon = 0.0;
    double mean_sup_squared = 0.0;
    double std_error = 0.0;
    int n_diverged = 0;
    int n_paths = 0;
};

/// Empirical E sup_t |xi_eps|^2 per epsilon.
std::vector<ConvolutionRow> convolution_study(const SpectralState& init, std::span<const double> epsilons,
                                              int n_paths, const Control& phi, const SolverConfig& cfg,
                                              std::uint64_t seed, int threads = 1);

using PathEvent = std::function<bool(const JumpSample&)>;

struct ImportanceEstimate {
    double estimate = 0.0;
    double std_error = 0.0;
    double mean_weight = 0.0;
    int n_paths = 0;
};

/// Estimates P(event) under the reference intensity theta / eps by sampling at
/// intensity phi theta / eps and weighting each path by dP/dQ.
ImportanceEstimate importance_weights(const PathEvent& event, const Control& phi, double epsilon, int n_paths,
                                      const MarkSpace& marks, std::uint64_t seed, int threads = 1);

// ---- tables ------------------------------------------------------------------------------

/// Columns epsilon,median,q25,q75,n_diverged.
void write_small_noise_csv(std::ostream& os, const SmallNoiseStudy& study);
/// Columns iteration,objective,cost,mismatch.
void write_rate_history_csv(std::ostream& os, const RateSolution& sol);

}  // namespace nematic
