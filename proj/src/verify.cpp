#include <cmath>
#include <cstdio>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "nematic/cli.hpp"
#include "nematic/random_fields.hpp"
#include "nematic/rng.hpp"

namespace nematic {

namespace {

std::string sci(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3e", v);
    return buf;
}

class Suite {
public:
    void add(const std::string& group, const std::string& name, bool pass, const std::string& detail) {
        results_.push_back({group, name, pass, detail});
    }
    /// Pass iff value <= bound.
    void bound(const std::string& group, const std::string& name, double value, double limit) {
        add(group, name, std::isfinite(value) && value <= limit, sci(value) + " <= " + sci(limit));
    }
    std::vector<CheckResult> take() { return std::move(results_); }

private:
    std::vector<CheckResult> results_;
};

void spectral_checks(Suite& s, const TorusGrid& grid, std::uint64_t seed) {
    double parseval = 0.0, roundtrip = 0.0, leray_div = 0.0, leray_idem = 0.0;
    for (int i = 0; i < 10; ++i) {
        const ScalarField f = random_scalar(grid, derive_seed(seed, Purpose::testing, i));
        const auto v = to_grid(f, grid.modes());
        double q = 0.0;
        for (double x : v) q += x * x;
        parseval = std::max(parseval, std::abs(std::sqrt(q * kArea / static_cast<double>(v.size())) - l2(f)));
        const ScalarField g = from_grid(grid, v, grid.modes());
        roundtrip = std::max(roundtrip, l2(g - f));
        const VectorField w = random_vector(grid, derive_seed(seed, Purpose::testing, 100 + i));
        const DivergenceFreeField p = leray_project(w);
        leray_div = std::max(leray_div, divergence_residual(p.field()));
        leray_idem = std::max(leray_idem, l2((leray_project(p.field()) - p).field()));
    }
    s.bound("spectral", "parseval_identity", parseval, 1e-12);
    s.bound("spectral", "transform_roundtrip", roundtrip, 1e-13);
    s.bound("spectral", "leray_divergence_free", leray_div, 1e-12);
    s.bound("spectral", "leray_idempotent", leray_idem, 1e-13);
}

void operator_checks(Suite& s, const TorusGrid& grid, const PolynomialNonlinearity& nl, std::uint64_t seed) {
    double b_uvv = 0.0, b_utt = 0.0, m_id = 0.0, cancel = 0.0, coerc = 0.0;
    // Director band small enough that f(theta) is exactly representable.
    const int director_band = std::max(1, grid.max_wavenumber() / (2 * nl.degree() + 1));
    const int fm = exact_quadrature_size(grid, 2 * nl.degree() + 2);
    for (int i = 0; i < 10; ++i) {
        const auto key = [&](int j) { return derive_seed(seed, Purpose::testing, 1000 + 10 * i + j); };
        const DivergenceFreeField u = random_divergence_free(grid, key(0));
        const VectorField v = random_vector(grid, key(1));
        const VectorField theta = random_vector(grid, key(2), director_band);
        b_uvv = std::max(b_uvv, std::abs(trilinear_b(u.field(), v, v)));
        b_utt = std::max(b_utt, std::abs(trilinear_b(u.field(), theta, theta)));
        const double m = trilinear_m(theta, theta, u.field());
        const double mi = inner(director_stress_M(theta, theta).field(), u.field());
        m_id = std::max(m_id, std::abs(m - mi) / std::max(1.0, std::abs(m)));
        VectorField h = laplacian(theta);
        h *= -1.0;
        h += polynomial_f(theta, nl, fm);
        const double a = inner(advection_Btilde(u, theta), h);
        const double scale = std::abs(a) + std::abs(mi);
        cancel = std::max(cancel, std::abs(a + mi) / std::max(scale, 1e-300));
        const CoercivityReport c = coercivity_check(theta, nl);
        coerc = std::max(coerc, -c.margin());
    }
    s.bound("operators", "convection_antisymmetry", b_uvv, 1e-10);
    s.bound("operators", "director_advection_antisymmetry", b_utt, 1e-10);
    s.bound("operators", "stress_duality", m_id, 1e-12);
    s.bound("operators", "advection_stress_cancellation", cancel, 1e-8);
    s.bound("operators", "coercivity", coerc, 0.0);
}

void noise_checks(Suite& s, const MarkSpace& ms, double horizon, std::uint64_t seed) {
    const double e = std::max({std::abs(entropy_l(0.0) - 1.0), std::abs(entropy_l(1.0)),
                               std::abs(entropy_l(2.0) - (2.0 * std::log(2.0) - 1.0))});
    s.bound("noise", "entropy_values", e, 1e-12);

    const int n = 2000;
    const double eps = 0.5;
    const double expected = ms.total_mass() * horizon / eps;
    double count = 0.0;
    for (int i = 0; i < n; ++i)
        count += static_cast<double>(sample_prm(ms, horizon, 1.0 / eps, derive_seed(seed, Purpose::testing, 5000 + i)).events.size());
    const double z = std::abs(count / n - expected) / std::sqrt(expected / n);
    s.bound("noise", "prm_mean_count_z", z, 4.0);

    const Control phi(horizon, 2, ms.size(), 1.5);
    double w = 0.0, w2 = 0.0;
    for (int i = 0; i < n; ++i) {
        const JumpSample js = sample_prm(ms, horizon, 1.0 / eps, derive_seed(seed, Purpose::testing, 9000 + i));
        const double x = std::exp(girsanov_log_density(phi, js, eps, ms));
        w += x;
        w2 += x * x;
    }
    const double mean = w / n;
    const double se = std::sqrt(std::max(0.0, w2 / n - mean * mean) / n);
    s.bound("noise", "girsanov_mean_one_z", std::abs(mean - 1.0) / se, 4.0);

    const Control dead(horizon, 1, ms.size(), 0.0);
    s.add("noise", "thinning_zero_control_empty", thin_to_control(ms, dead, 10.0, seed).events.empty(), "phi == 0");
}

void dynamics_checks(Suite& s, const ExperimentConfig& cfg, std::uint64_t seed) {
    SolverConfig sc = cfg.solver();
    sc.stride = 1;
    const SpectralState init = cfg.initial_state();
    const Control g = cfg.control();

    const Trajectory skel = solve_skeleton(init, g, sc);
    double div = 0.0;
    for (const auto& st : skel.snapshots) div = std::max(div, divergence_residual(st.u.field()));
    s.add("dynamics", "skeleton_finite", skel.ok(), skel.ok() ? "ok" : "diverged");
    s.bound("dynamics", "divergence_free_preservation", div, 1e-11);

    const auto a = solve_small_noise_sde(init, cfg.epsilon, g, sc, seed);
    const auto b = solve_small_noise_sde(init, cfg.epsilon, g, sc, seed);
    bool same = a.snapshots.size() == b.snapshots.size();
    for (std::size_t i = 0; same && i < a.snapshots.size(); ++i)
        same = l2((a.snapshots[i].u - b.snapshots[i].u).field()) == 0.0 &&
               l2(a.snapshots[i].theta - b.snapshots[i].theta) == 0.0;
    s.add("dynamics", "determinism", same, "two runs, same seed");

    SolverConfig quiet = sc;
    quiet.noise = NoiseModel{quiet.noise.marks,
                             JumpCoefficientSpec{std::vector<DivergenceFreeField>(static_cast<std::size_t>(quiet.noise.marks.size()),
                                                                                  DivergenceFreeField(sc.grid)),
                                                 std::vector<double>(static_cast<std::size_t>(quiet.noise.marks.size()), 0.0)}};
    const auto qs = solve_skeleton(init, g, quiet);
    const auto qn = solve_small_noise_sde(init, cfg.epsilon, g, quiet, seed);
    bool equal = qs.snapshots.size() == qn.snapshots.size();
    for (std::size_t i = 0; equal && i < qs.snapshots.size(); ++i)
        equal = l2((qs.snapshots[i].u - qn.snapshots[i].u).field()) == 0.0 &&
                l2(qs.snapshots[i].theta - qn.snapshots[i].theta) == 0.0;
    s.add("dynamics", "small_noise_consistency", equal, "zero noise: SDE == skeleton bitwise");

    SolverConfig coarse = sc;
    coarse.horizon = std::min(cfg.horizon, 0.5);
    coarse.dt = 2e-3;
    SolverConfig fine = coarse;
    fine.dt = 1e-3;
    const Control gl(coarse.horizon, 1, g.marks(), 1.0);
    const double r1 = energy_ledger(solve_skeleton(init, gl, coarse), gl, coarse).max_abs;
    const double r2 = energy_ledger(solve_skeleton(init, gl, fine), gl, fine).max_abs;
    s.add("dynamics", "energy_ledger_first_order", std::abs(r1 / r2 - 2.0) <= 0.3,
          "ratio " + sci(r1 / r2) + " (target 2 +- 15%)");

    SolverConfig longer = sc;
    longer.horizon = std::max(2.0, cfg.horizon);
    const Control gg(longer.horizon, 1, g.marks(), 1.0);
    const auto lt = solve_skeleton(init, gg, longer);
    const AprioriBound ab = apriori_bound(init, gg, longer);
    const double sup = sup_psi_plus_u2(lt);
    s.add("dynamics", "gronwall_ceiling", lt.ok() && sup < ab.ceiling, sci(sup) + " < " + sci(ab.ceiling));

    const SpectralState p = galerkin_project(init, sc.grid.max_wavenumber() / 2);
    s.add("dynamics", "galerkin_projection_contracts",
          l2(p.u.field()) <= l2(init.u.field()) && l2(p.theta) <= l2(init.theta), "norms non-increasing");

    SolverConfig cut = sc;
    cut.cutoff_level = 1e6;
    const auto ct = solve_skeleton(init, g, cut);
    const double cd = state_distance(ct.final_state(), skel.final_state());
    s.bound("dynamics", "inactive_cutoff_identity", cd, 0.0);
}

void ldp_checks(Suite& s, const ExperimentConfig& cfg, int threads, std::uint64_t seed) {
    ExperimentConfig c = cfg;
    c.rate_cells = 1;
    c.target_control = {1.0};
    c.max_iterations = 3;
    const RateProblem unit = c.rate_problem(threads);
    const double j0 = rate_objective(unit.unit_control(), unit);
    s.bound("ldp", "unit_control_zero_objective", std::abs(j0), 1e-20);

    c.target_control = {1.5};
    const RateProblem prob = c.rate_problem(threads);
    const RateSolution sol = optimize_control(prob);
    const double start = rate_objective(prob.unit_control(), prob);
    bool monotone = true;
    for (std::size_t i = 1; i < sol.history.size(); ++i)
        monotone = monotone && sol.history[i].objective <= sol.history[i - 1].objective;
    s.add("ldp", "optimizer_not_above_start", sol.objective <= start && monotone,
          sci(sol.objective) + " <= " + sci(start));

    const MarkSpace ms(cfg.mark_weights);
    const Control tilt = cfg.tilt_control();
    const auto est = importance_weights([](const JumpSample&) { return true; }, tilt, cfg.importance_epsilon, 2000, ms,
                                        derive_seed(seed, Purpose::importance), threads);
    s.bound("ldp", "importance_unit_mean_z", std::abs(est.estimate - 1.0) / est.std_error, 3.0);
}

}  // namespace

std::vector<CheckResult> run_verify(const ExperimentConfig& cfg, int threads) {
    cfg.validate();
    Suite s;
    const std::uint64_t seed = derive_seed(*cfg.seed, Purpose::testing);
    const TorusGrid grid = cfg.grid();
    spectral_checks(s, grid, seed);
    operator_checks(s, grid, cfg.nonlinearity(), seed);
    noise_checks(s, MarkSpace(cfg.mark_weights), cfg.horizon, seed);
    dynamics_checks(s, cfg, seed);
    ldp_checks(s, cfg, threads, seed);
    const ExperimentConfig back = parse_config_text(serialize_config(cfg), "roundtrip");
    s.add("cli", "config_roundtrip", back == cfg, "serialize then parse");
    return s.take();
}

void print_verify_table(std::ostream& os, const std::vector<CheckResult>& results) {
    for (const auto& r : results)
        os << std::left << std::setw(12) << r.group << std::setw(36) << r.name << (r.pass ? "PASS  " : "FAIL  ")
           << r.detail << '\n';
}

}  // namespace nematic
