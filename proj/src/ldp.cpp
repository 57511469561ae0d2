#include "nematic/ldp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include "nematic/parallel.hpp"
#include "nematic/rng.hpp"

namespace nematic {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Control control_from_log(const RateProblem& prob, const std::vector<double>& w) {
    std::vector<double> g(w.size());
    std::transform(w.begin(), w.end(), g.begin(), [](double x) { return std::exp(x); });
    return Control(prob.cfg.horizon, prob.cells, prob.cfg.noise.marks.size(), std::move(g));
}

double norm2(const std::vector<double>& v) { return std::inner_product(v.begin(), v.end(), v.begin(), 0.0); }

/// Linear-interpolation quantile of sorted data.
double quantile(const std::vector<double>& sorted, double p) {
    if (sorted.empty()) return std::numeric_limits<double>::quiet_NaN();
    const double pos = p * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

void require_epsilons(std::span<const double> eps, int n_paths, int min_paths) {
    if (eps.empty()) throw std::invalid_argument("epsilon list is empty");
    for (std::size_t i = 0; i < eps.size(); ++i) {
        if (!(eps[i] > 0.0)) throw std::invalid_argument("epsilon values must be positive");
        if (i > 0 && !(eps[i] < eps[i - 1])) throw std::invalid_argument("epsilon list must be decreasing");
    }
    if (n_paths < min_paths) throw std::invalid_argument("need at least " + std::to_string(min_paths) + " paths");
}

SolverConfig every_step(SolverConfig cfg) {
    cfg.stride = 1;
    return cfg;
}

}  // namespace

void RateProblem::validate() const {
    if (!(penalty > 0.0)) throw std::invalid_argument("penalty weight must be positive");
    if (cells < 1) throw std::invalid_argument("control needs at least one time cell");
    if (!(init.grid() == cfg.grid) || !(target.grid() == cfg.grid))
        throw std::invalid_argument("initial and target states must live on the solver grid");
    if (optimizer.max_iterations < 0 || !(optimizer.fd_step > 0.0) || !(optimizer.initial_step > 0.0) ||
        !(optimizer.max_log_step > 0.0))
        throw std::invalid_argument("invalid optimizer settings");
    cfg.validate();
}

double terminal_mismatch(const SpectralState& end, const SpectralState& target) {
    const double du = l2((end.u - target.u).field());
    const double dt = v_norm(end.theta - target.theta);
    return du * du + dt * dt;
}

ObjectiveTerms objective_terms(const Control& g, const RateProblem& prob) {
    ObjectiveTerms t;
    t.cost = cost_LT(g, prob.cfg.noise.marks);
    SolverConfig cfg = prob.cfg;
    cfg.stride = cfg.steps();
    const Trajectory traj = solve_skeleton(prob.init, g, cfg);
    if (!traj.ok()) {
        t.mismatch = kInf;
        t.objective = kInf;
        return t;
    }
    t.mismatch = terminal_mismatch(traj.final_state(), prob.target);
    t.objective = t.cost + prob.penalty * t.mismatch;
    return t;
}

double rate_objective(const Control& g, const RateProblem& prob) { return objective_terms(g, prob).objective; }

double directional_derivative(const Control& g, const std::vector<double>& direction, double h,
                              const RateProblem& prob) {
    if (direction.size() != g.values().size()) throw std::invalid_argument("direction has the wrong dimension");
    std::vector<double> w(g.values().size());
    for (std::size_t i = 0; i < w.size(); ++i) {
        if (!(g.values()[i] > 0.0)) throw std::domain_error("log-parametrization needs g > 0");
        w[i] = std::log(g.values()[i]);
    }
    std::vector<double> wp = w, wm = w;
    for (std::size_t i = 0; i < w.size(); ++i) {
        wp[i] += h * direction[i];
        wm[i] -= h * direction[i];
    }
    return (rate_objective(control_from_log(prob, wp), prob) - rate_objective(control_from_log(prob, wm), prob)) /
           (2.0 * h);
}

RateSolution optimize_control(const RateProblem& prob) {
    prob.validate();
    const auto& opt = prob.optimizer;
    const int d = prob.dimension();
    std::vector<double> w(static_cast<std::size_t>(d), 0.0);
    auto eval = [&](const std::vector<double>& x) { return objective_terms(control_from_log(prob, x), prob); };

    ObjectiveTerms cur = eval(w);
    if (!std::isfinite(cur.objective)) throw std::domain_error("objective is not finite at g == 1");
    RateSolution sol{control_from_log(prob, w), cur.cost, cur.mismatch, cur.objective, false, {}};
    sol.history.push_back({0, cur.objective, cur.cost, cur.mismatch});

    std::vector<double> grad(static_cast<std::size_t>(d)), prev_w, prev_grad;
    std::vector<double> fplus(static_cast<std::size_t>(d)), fminus(static_cast<std::size_t>(d));
    double step = opt.initial_step;
    for (int it = 1; it <= opt.max_iterations; ++it) {
        parallel_for(2 * d, opt.threads, [&](int j) {
            std::vector<double> x = w;
            const auto i = static_cast<std::size_t>(j / 2);
            x[i] += (j % 2 == 0 ? opt.fd_step : -opt.fd_step);
            (j % 2 == 0 ? fplus : fminus)[i] = eval(x).objective;
        });
        for (std::size_t i = 0; i < grad.size(); ++i) grad[i] = (fplus[i] - fminus[i]) / (2.0 * opt.fd_step);
        const double gg = norm2(grad);
        if (!std::isfinite(gg)) break;
        if (std::sqrt(gg) < opt.tolerance) {
            sol.converged = true;
            break;
        }
        // Barzilai-Borwein trial step after the first iteration.
        if (!prev_w.empty()) {
            double sy = 0.0, ss = 0.0;
            for (std::size_t i = 0; i < w.size(); ++i) {
                const double s = w[i] - prev_w[i];
                sy += s * (grad[i] - prev_grad[i]);
                ss += s * s;
            }
            if (sy > 0.0) step = ss / sy;
        }
        double gmax = 0.0;
        for (double gi : grad) gmax = std::max(gmax, std::abs(gi));
        if (gmax > 0.0) step = std::min(step, opt.max_log_step / gmax);
        bool accepted = false;
        ObjectiveTerms trial;
        std::vector<double> x(w.size());
        for (int k = 0; k < 50; ++k) {
            for (std::size_t i = 0; i < w.size(); ++i) x[i] = w[i] - step * grad[i];
            trial = eval(x);
            if (trial.objective <= cur.objective - 1e-4 * step * gg) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) {
            sol.converged = true;  // no descent at finite-difference resolution
            break;
        }
        const double decrease = cur.objective - trial.objective;
        prev_w = w;
        prev_grad = grad;
        w = x;
        cur = trial;
        sol.history.push_back({it, cur.objective, cur.cost, cur.mismatch});
        if (decrease < opt.tolerance * (1.0 + std::abs(cur.objective))) {
            sol.converged = true;
            break;
        }
    }
    sol.g_star = control_from_log(prob, w);
    sol.cost = cur.cost;
    sol.mismatch = cur.mismatch;
    sol.objective = cur.objective;
    return sol;
}

RateSolution brute_force_rate(const RateProblem& prob, std::span<const double> values) {
    prob.validate();
    const int d = prob.dimension();
    if (d > 2) throw std::invalid_argument("brute-force search supports at most 2 control values");
    if (values.empty()) throw std::invalid_argument("grid of control values is empty");
    for (double v : values)
        if (!(v >= 0.0) || !std::isfinite(v)) throw std::invalid_argument("grid values must be finite and >= 0");
    const std::size_t n = values.size();
    const std::size_t total = d == 1 ? n : n * n;
    std::vector<ObjectiveTerms> terms(total);
    auto control_at = [&](std::size_t idx) {
        std::vector<double> g{values[idx % n]};
        if (d == 2) g.push_back(values[idx / n]);
        return Control(prob.cfg.horizon, prob.cells, prob.cfg.noise.marks.size(), std::move(g));
    };
    parallel_for(static_cast<int>(total), prob.optimizer.threads,
                 [&](int i) { terms[static_cast<std::size_t>(i)] = objective_terms(control_at(static_cast<std::size_t>(i)), prob); });
    std::size_t best = 0;
    for (std::size_t i = 1; i < total; ++i)
        if (terms[i].objective < terms[best].objective) best = i;
    RateSolution sol{control_at(best), terms[best].cost, terms[best].mismatch, terms[best].objective, true, {}};
    for (std::size_t i = 0; i < total; ++i)
        sol.history.push_back({static_cast<int>(i), terms[i].objective, terms[i].cost, terms[i].mismatch});
    return sol;
}

// ---- Monte Carlo ---------------------------------------------------------------------------

SmallNoiseStudy mc_small_noise_study(const SpectralState& init, std::span<const double> epsilons, int n_paths,
                                     const Control& phi, const SolverConfig& cfg, std::uint64_t seed,
                                     int threads) {
    require_epsilons(epsilons, n_paths, 8);
    const SolverConfig full = every_step(cfg);
    const Trajectory skeleton = solve_skeleton(init, phi, full);
    if (!skeleton.ok()) throw std::domain_error("reference skeleton diverged");

    SmallNoiseStudy study;
    for (double eps : epsilons) {
        std::vector<double> dist(static_cast<std::size_t>(n_paths), 0.0);
        std::vector<char> diverged(static_cast<std::size_t>(n_paths), 0);
        parallel_for(n_paths, threads, [&](int p) {
            double sup = 0.0;
            auto track = [&](int n, const SpectralState& s) {
                sup = std::max(sup, state_distance(s, skeleton.snapshots[static_cast<std::size_t>(n)]));
                return true;
            };
            const auto path_seed = derive_seed(seed, Purpose::study, static_cast<std::uint64_t>(p));
            const Trajectory t = solve_small_noise_sde(init, eps, phi, full, path_seed, track);
            dist[static_cast<std::size_t>(p)] = sup;
            diverged[static_cast<std::size_t>(p)] = !t.ok();
        });
        SmallNoiseRow row{eps, 0.0, 0.0, 0.0, 0, n_paths};
        std::vector<double> kept;
        for (int p = 0; p < n_paths; ++p) {
            if (diverged[static_cast<std::size_t>(p)])
                ++row.n_diverged;
            else
                kept.push_back(dist[static_cast<std::size_t>(p)]);
        }
        std::sort(kept.begin(), kept.end());
        row.median = quantile(kept, 0.5);
        row.q25 = quantile(kept, 0.25);
        row.q75 = quantile(kept, 0.75);
        if (row.n_diverged > 0.01 * n_paths) study.ok = false;
        study.rows.push_back(row);
    }
    return study;
}

std::vector<ConvolutionRow> convolution_study(const SpectralState& init, std::span<const double> epsilons,
                                              int n_paths, const Control& phi, const SolverConfig& cfg,
                                              std::uint64_t seed, int threads) {
    require_epsilons(epsilons, n_paths, 2);
    std::vector<ConvolutionRow> rows;
    for (double eps : epsilons) {
        std::vector<double> sup(static_cast<std::size_t>(n_paths), 0.0);
        std::vector<char> diverged(static_cast<std::size_t>(n_paths), 0);
        parallel_for(n_paths, threads, [&](int p) {
            const auto path_seed = derive_seed(seed, Purpose::convolution, static_cast<std::uint64_t>(p));
            const ConvolutionPath c = solve_stochastic_convolution(init, eps, phi, cfg, path_seed);
            sup[static_cast<std::size_t>(p)] = c.sup_squared;
            diverged[static_cast<std::size_t>(p)] = c.status != SolveStatus::ok;
        });
        ConvolutionRow row{eps, 0.0, 0.0, 0, n_paths};
        double s = 0.0, s2 = 0.0;
        int kept = 0;
        for (int p = 0; p < n_paths; ++p) {
            if (diverged[static_cast<std::size_t>(p)]) {
                ++row.n_diverged;
                continue;
            }
            const double x = sup[static_cast<std::size_t>(p)];
            s += x;
            s2 += x * x;
            ++kept;
        }
        if (kept > 0) {
            row.mean_sup_squared = s / kept;
            const double var = kept > 1 ? std::max(0.0, (s2 - s * s / kept) / (kept - 1)) : 0.0;
            row.std_error = std::sqrt(var / kept);
        }
        rows.push_back(row);
    }
    return rows;
}

ImportanceEstimate importance_weights(const PathEvent& event, const Control& phi, double epsilon, int n_paths,
                                      const MarkSpace& marks, std::uint64_t seed, int threads) {
    if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
    if (n_paths < 2) throw std::invalid_argument("need at least 2 paths");
    for (double v : phi.values())
        if (!(v > 0.0)) throw std::domain_error("importance sampling needs a strictly positive control");
    std::vector<double> value(static_cast<std::size_t>(n_paths)), weight(static_cast<std::size_t>(n_paths));
    parallel_for(n_paths, threads, [&](int p) {
        const JumpSample s =
            thin_to_control(marks, phi, 1.0 / epsilon, derive_seed(seed, Purpose::importance, static_cast<std::uint64_t>(p)));
        const double w = std::exp(tilted_log_likelihood_ratio(phi, s, epsilon, marks));
        weight[static_cast<std::size_t>(p)] = w;
        value[static_cast<std::size_t>(p)] = event(s) ? w : 0.0;
    });
    ImportanceEstimate est;
    est.n_paths = n_paths;
    const double n = n_paths;
    const double mean = std::accumulate(value.begin(), value.end(), 0.0) / n;
    double var = 0.0;
    for (double v : value) var += (v - mean) * (v - mean);
    var /= (n - 1.0);
    est.estimate = mean;
    est.std_error = std::sqrt(var / n);
    est.mean_weight = std::accumulate(weight.begin(), weight.end(), 0.0) / n;
    return est;
}

// ---- tables ------------------------------------------------------------------------------

void write_small_noise_csv(std::ostream& os, const SmallNoiseStudy& study) {
    os << "epsilon,median,q25,q75,n_diverged\n";
    os.precision(12);
    for (const auto& r : study.rows)
        os << r.epsilon << ',' << r.median << ',' << r.q25 << ',' << r.q75 << ',' << r.n_diverged << '\n';
}

void write_rate_history_csv(std::ostream& os, const RateSolution& sol) {
    os << "iteration,objective,cost,mismatch\n";
    os.precision(15);
    for (const auto& h : sol.history) os << h.iteration << ',' << h.objective << ',' << h.cost << ',' << h.mismatch << '\n';
}

}  // namespace nematic
