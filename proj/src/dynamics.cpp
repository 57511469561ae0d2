#include "nematic/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "nematic/kernels.hpp"
#include "nematic/rng.hpp"
#include "operators_internal.hpp"

namespace nematic {

namespace {

constexpr double kBlowUp = 1e6;

const simd::KernelTable& K() { return simd::active_kernels(); }

std::vector<double> decay_table(const TorusGrid& grid, double dt) {
    const auto ksq = grid.k_squared();
    const auto mask = grid.retained();
    std::vector<double> d(grid.size());
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = mask[i] * std::exp(-ksq[i] * dt);
    return d;
}

void apply_decay(VectorField& v, const std::vector<double>& decay) {
    for (int c = 0; c < 2; ++c) K().scale_real(v[c].coefficients().data(), decay.data(), decay.size());
}

void require_horizon(const Control& g, const SolverConfig& cfg) {
    if (std::abs(g.horizon() - cfg.horizon) > 1e-9 * cfg.horizon)
        throw std::invalid_argument("control horizon does not match the solver horizon");
    if (g.marks() != cfg.noise.marks.size()) throw std::invalid_argument("control and mark space sizes differ");
}

/// Control lookup time for step n: the midpoint avoids rounding at cell edges.
double lookup_time(int step, double dt) { return (step + 0.5) * dt; }

struct UIncrement {
    DivergenceFreeField increment;  // added to u before the integrating factor
    double drift_power = 0.0;
};

using ForcingFn = std::function<UIncrement(int step, const SpectralState&)>;

bool blown_up(const SpectralState& s) {
    if (!s.is_finite()) return true;
    return l2(s.u.field()) > kBlowUp || v_norm(s.theta) > kBlowUp;
}

struct LevelTerms {
    detail::NonlinearTerms terms;
    double chi_u = 1.0;
    double chi_theta = 1.0;
};

LevelTerms nonlinear_at(const SpectralState& s, const SolverConfig& cfg) {
    LevelTerms lt{detail::evaluate_nonlinear(s.u, s.theta, cfg.nonlinearity, cfg.f_grid_size()), 1.0, 1.0};
    if (cfg.cutoff_level) {
        lt.chi_u = cutoff_chi(l2(s.u.field()), *cfg.cutoff_level);
        lt.chi_theta = cutoff_chi(l2(s.theta), *cfg.cutoff_level);
    }
    return lt;
}

StepDiagnostics diagnose(const SpectralState& s, const detail::NonlinearTerms& terms, const SolverConfig& cfg) {
    StepDiagnostics d;
    d.t = s.time;
    d.u_l2 = l2(s.u.field());
    d.u_h1 = h1_semi(s.u.field());
    d.theta_l2 = l2(s.theta);
    d.theta_h1 = h1_semi(s.theta);
    d.psi = 0.5 * d.theta_h1 * d.theta_h1 + potential_energy(s.theta, cfg.nonlinearity);
    VectorField r = laplacian(s.theta);
    r -= terms.f;
    const double rl2 = l2(r);
    d.dissipation = d.u_h1 * d.u_h1 + rl2 * rl2;
    return d;
}

double energy_of(const StepDiagnostics& d) { return d.psi + 0.5 * d.u_l2 * d.u_l2; }

Trajectory integrate(const SpectralState& init, const SolverConfig& cfg, const ForcingFn& forcing,
                     const StepObserver& observer) {
    cfg.validate();
    if (!(init.grid() == cfg.grid)) throw std::invalid_argument("initial state grid differs from the solver grid");
    if (!init.is_finite()) throw std::invalid_argument("initial state has non-finite coefficients");

    const int steps = cfg.steps();
    const int stride = cfg.effective_stride();
    const double dt = cfg.dt;
    const auto decay = decay_table(cfg.grid, dt);

    Trajectory traj;
    traj.dt = dt;
    traj.diagnostics.reserve(static_cast<std::size_t>(steps) + 1);

    SpectralState s = init;
    s.time = 0.0;
    if (cfg.freeze_velocity) s.u = DivergenceFreeField(cfg.grid);
    traj.snapshots.push_back(s);

    double prev_energy = 0.0, prev_budget = 0.0;
    for (int n = 0;; ++n) {
        LevelTerms lt = nonlinear_at(s, cfg);
        StepDiagnostics d = diagnose(s, lt.terms, cfg);
        const bool last = n == steps;
        UIncrement inc{DivergenceFreeField(cfg.grid), 0.0};
        if (!last && !cfg.freeze_velocity) inc = forcing(n, s);
        d.drift_power = inc.drift_power;
        const double e = energy_of(d);
        if (n > 0) d.energy_residual = (e - prev_energy) / dt + prev_budget;
        prev_energy = e;
        prev_budget = d.dissipation - d.drift_power;
        traj.diagnostics.push_back(d);

        if (observer && !observer(n, s)) {
            if (traj.snapshots.back().time != s.time) traj.snapshots.push_back(s);
            break;
        }
        if (last) break;

        VectorField theta = s.theta;
        theta.axpy(-dt * lt.chi_u, lt.terms.advection);
        theta.axpy(-dt, lt.terms.f);
        apply_decay(theta, decay);

        VectorField u = s.u.field();
        if (!cfg.freeze_velocity) {
            u.axpy(-dt * lt.chi_u, lt.terms.convection.field());
            u.axpy(-dt * lt.chi_theta, lt.terms.stress.field());
            u += inc.increment.field();
            apply_decay(u, decay);
        }

        s = SpectralState(DivergenceFreeField::unchecked(std::move(u)), std::move(theta), (n + 1) * dt);
        if (blown_up(s)) {
            traj.status = SolveStatus::diverged;
            break;
        }
        if ((n + 1) % stride == 0 || n + 1 == steps) traj.snapshots.push_back(s);
    }
    return traj;
}

/// counts[step * marks + mark]
std::vector<int> bucket_jumps(const JumpSample& sample, int steps, double dt, int marks) {
    std::vector<int> counts(static_cast<std::size_t>(steps) * marks, 0);
    for (const auto& e : sample.events) {
        const int n = std::clamp(static_cast<int>(std::floor(e.time / dt)), 0, steps - 1);
        ++counts[static_cast<std::size_t>(n) * marks + e.mark];
    }
    return counts;
}

/// eps * sum_jumps G(u) - dt * sum_i weight_i G(u), with weight_i = theta_i * w_i(step).
DivergenceFreeField jump_increment(const DivergenceFreeField& u, const int* counts, double epsilon, double dt,
                                   const std::vector<double>& weights, const JumpCoefficientSpec& spec) {
    DivergenceFreeField acc(u.grid());
    for (int i = 0; i < spec.size(); ++i) {
        const double a = epsilon * counts[i] - dt * weights[static_cast<std::size_t>(i)];
        if (a != 0.0) acc.axpy(a, eval_G(0.0, u, i, spec));
    }
    return acc;
}

JumpSample controlled_jumps(double epsilon, const Control& phi, const SolverConfig& cfg, std::uint64_t seed) {
    if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
    require_horizon(phi, cfg);
    check_compatible(cfg.noise.coefficient, cfg.noise.marks);
    return thin_to_control(cfg.noise.marks, phi, 1.0 / epsilon, derive_seed(seed, Purpose::sde_path));
}

}  // namespace

// ---- types ----------------------------------------------------------------------

SpectralState::SpectralState(DivergenceFreeField u_, VectorField theta_, double t)
    : u(std::move(u_)), theta(std::move(theta_)), time(t) {
    if (!(u.grid() == theta.grid())) throw std::invalid_argument("u and theta live on different grids");
}

NoiseModel NoiseModel::silent(const TorusGrid& grid) {
    return NoiseModel{MarkSpace({1.0}), JumpCoefficientSpec{{DivergenceFreeField(grid)}, {0.0}}};
}

SolverConfig::SolverConfig(TorusGrid grid_, double dt_, double horizon_)
    : grid(std::move(grid_)), dt(dt_), horizon(horizon_), noise(NoiseModel::silent(grid)) {}

int SolverConfig::steps() const { return static_cast<int>(std::llround(horizon / dt)); }

int SolverConfig::effective_stride() const {
    if (stride > 0) return stride;
    return horizon <= 2.0 ? 1 : 10;
}

int SolverConfig::f_grid_size() const {
    return f_grid.value_or(exact_quadrature_size(grid, 2 * nonlinearity.degree() + 2));
}

void SolverConfig::validate() const {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("dt must be positive");
    if (!(horizon > 0.0) || !std::isfinite(horizon)) throw std::invalid_argument("horizon must be positive");
    const double ratio = horizon / dt;
    if (std::abs(ratio - std::round(ratio)) > 1e-9 * std::max(1.0, ratio) || std::round(ratio) < 1.0)
        throw std::invalid_argument("horizon must be an integer multiple of dt");
    if (cutoff_level && !(*cutoff_level >= 1.0)) throw std::invalid_argument("cutoff level must be >= 1");
    if (stride < 0) throw std::invalid_argument("stride must be >= 0");
}

// ---- operations -------------------------------------------------------------------

double cutoff_chi(double norm_value, double n) {
    if (!(n >= 1.0)) throw std::invalid_argument("cutoff level must be >= 1");
    if (norm_value <= n) return 1.0;
    if (norm_value > n + 1.0) return 0.0;
    const double s = norm_value - n;
    return 1.0 - 3.0 * s * s + 2.0 * s * s * s;
}

StateRate skeleton_rhs(const SpectralState& state, const Control& g, const SolverConfig& cfg) {
    require_horizon(g, cfg);
    const LevelTerms lt = nonlinear_at(state, cfg);
    VectorField du = stokes_A1(state.u).field();
    du *= -1.0;
    du.axpy(-lt.chi_u, lt.terms.convection.field());
    du.axpy(-lt.chi_theta, lt.terms.stress.field());
    du += control_drift(state.time, state.u, g, cfg.noise.marks, cfg.noise.coefficient).field();
    VectorField dtheta = laplacian(state.theta);
    dtheta.axpy(-lt.chi_u, lt.terms.advection);
    dtheta -= lt.terms.f;
    return {DivergenceFreeField::unchecked(std::move(du)), std::move(dtheta)};
}

Trajectory solve_skeleton(const SpectralState& init, const Control& g, const SolverConfig& cfg,
                          const StepObserver& observer) {
    require_horizon(g, cfg);
    const double dt = cfg.dt;
    const auto& noise = cfg.noise;
    ForcingFn forcing = [&](int n, const SpectralState& s) {
        DivergenceFreeField drift = control_drift(lookup_time(n, dt), s.u, g, noise.marks, noise.coefficient);
        const double power = inner(drift.field(), s.u.field());
        drift *= dt;
        return UIncrement{std::move(drift), power};
    };
    return integrate(init, cfg, forcing, observer);
}

JumpSample sde_jumps(double epsilon, const Control& phi, const SolverConfig& cfg, std::uint64_t seed) {
    return controlled_jumps(epsilon, phi, cfg, seed);
}

Trajectory solve_with_jumps(const SpectralState& init, double epsilon, const JumpSample& jumps, const Control& phi,
                            const SolverConfig& cfg, const StepObserver& observer) {
    if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
    require_horizon(phi, cfg);
    check_compatible(cfg.noise.coefficient, cfg.noise.marks);
    const int marks = cfg.noise.marks.size();
    for (const auto& e : jumps.events)
        if (e.mark < 0 || e.mark >= marks) throw std::invalid_argument("jump mark outside the mark space");
    const auto counts = bucket_jumps(jumps, cfg.steps(), cfg.dt, marks);
    const double dt = cfg.dt;
    const auto& noise = cfg.noise;
    const std::vector<double> weights = noise.marks.weights();
    ForcingFn forcing = [&](int n, const SpectralState& s) {
        UIncrement inc{jump_increment(s.u, counts.data() + static_cast<std::size_t>(n) * marks, epsilon, dt, weights,
                                      noise.coefficient),
                       0.0};
        DivergenceFreeField drift = control_drift(lookup_time(n, dt), s.u, phi, noise.marks, noise.coefficient);
        inc.drift_power = inner(drift.field(), s.u.field());
        return inc;
    };
    return integrate(init, cfg, forcing, observer);
}

Trajectory solve_small_noise_sde(const SpectralState& init, double epsilon, const Control& phi, const SolverConfig& cfg,
                                 std::uint64_t seed, const StepObserver& observer) {
    return solve_with_jumps(init, epsilon, controlled_jumps(epsilon, phi, cfg, seed), phi, cfg, observer);
}

ConvolutionPath solve_stochastic_convolution(const SpectralState& init, double epsilon, const Control& phi,
                                             const SolverConfig& cfg, std::uint64_t seed) {
    const JumpSample jumps = controlled_jumps(epsilon, phi, cfg, seed);
    const int marks = cfg.noise.marks.size();
    const int steps = cfg.steps();
    const double dt = cfg.dt;
    const auto counts = bucket_jumps(jumps, steps, dt, marks);
    const auto decay = decay_table(cfg.grid, dt);
    const auto& ms = cfg.noise.marks;

    ConvolutionPath path;
    VectorField xi(cfg.grid);
    path.times.push_back(0.0);
    path.xi_l2.push_back(0.0);
    std::vector<double> weights(static_cast<std::size_t>(marks));

    StepObserver advance = [&](int n, const SpectralState& s) {
        if (n >= steps) return true;
        for (int i = 0; i < marks; ++i)
            weights[static_cast<std::size_t>(i)] = ms.weight(i) * phi.value(lookup_time(n, dt), i);
        xi += jump_increment(s.u, counts.data() + static_cast<std::size_t>(n) * marks, epsilon, dt, weights,
                             cfg.noise.coefficient)
                  .field();
        apply_decay(xi, decay);
        const double x = l2(xi);
        path.times.push_back((n + 1) * dt);
        path.xi_l2.push_back(x);
        path.sup_squared = std::max(path.sup_squared, x * x);
        return true;
    };
    const Trajectory u_path = solve_small_noise_sde(init, epsilon, phi, cfg, seed, advance);
    path.status = u_path.status;
    if (!xi.is_finite()) path.status = SolveStatus::diverged;
    return path;
}

SpectralState galerkin_project(const SpectralState& state, int max_k) {
    if (max_k > state.grid().max_wavenumber())
        throw std::invalid_argument("Galerkin level exceeds the retained band");
    if (max_k < 0) throw std::invalid_argument("Galerkin level must be >= 0");
    return SpectralState(DivergenceFreeField::unchecked(truncate_band(state.u.field(), max_k)),
                         truncate_band(state.theta, max_k), state.time);
}

double total_energy(const SpectralState& s, const PolynomialNonlinearity& nl) {
    const double g = h1_semi(s.theta);
    const double u = l2(s.u.field());
    return 0.5 * g * g + potential_energy(s.theta, nl) + 0.5 * u * u;
}

EnergyLedger energy_ledger(const Trajectory& traj, const Control& g, const SolverConfig& cfg) {
    require_horizon(g, cfg);
    if (traj.snapshots.size() < 2) return {};
    for (std::size_t k = 1; k < traj.snapshots.size(); ++k)
        if (std::abs(traj.snapshots[k].time - traj.snapshots[k - 1].time - traj.dt) > 1e-9 * traj.dt)
            throw std::invalid_argument("energy ledger needs a trajectory recorded at every step");
    EnergyLedger led;
    const auto& nl = cfg.nonlinearity;
    const int fm = cfg.f_grid_size();
    const double dt = traj.dt;
    double e_prev = total_energy(traj.snapshots[0], nl);
    for (std::size_t k = 0; k + 1 < traj.snapshots.size(); ++k) {
        const SpectralState& s = traj.snapshots[k];
        VectorField r = laplacian(s.theta);
        r -= polynomial_f(s.theta, nl, fm);
        const double uh = h1_semi(s.u.field());
        const double rl = l2(r);
        const DivergenceFreeField drift =
            control_drift(lookup_time(static_cast<int>(k), dt), s.u, g, cfg.noise.marks, cfg.noise.coefficient);
        const double w = inner(drift.field(), s.u.field());
        const double e_next = total_energy(traj.snapshots[k + 1], nl);
        const double res = (e_next - e_prev) / dt + uh * uh + rl * rl - w;
        led.residuals.push_back(res);
        led.max_abs = std::max(led.max_abs, std::abs(res));
        e_prev = e_next;
    }
    return led;
}

AprioriBound apriori_bound(const SpectralState& init, const Control& g, const SolverConfig& cfg) {
    require_horizon(g, cfg);
    const auto& ms = cfg.noise.marks;
    const auto& spec = cfg.noise.coefficient;
    check_compatible(spec, ms);
    AprioriBound b;
    for (int k = 0; k < g.cells(); ++k)
        for (int i = 0; i < g.marks(); ++i)
            b.c01 += spec.sup_norm0(i) * std::abs(g.at(k, i) - 1.0) * ms.weight(i) * g.cell_width();
    const double h = h1_semi(init.theta);
    const double u = l2(init.u.field());
    b.initial = 0.5 * h * h + potential_energy(init.theta, cfg.nonlinearity) + u * u;
    b.ceiling = (b.initial + b.c01) * cfg.horizon * std::exp(b.c01 * cfg.horizon);
    return b;
}

double sup_psi_plus_u2(const Trajectory& traj) {
    double m = 0.0;
    for (const auto& d : traj.diagnostics) m = std::max(m, d.psi + d.u_l2 * d.u_l2);
    return m;
}

double state_distance(const SpectralState& a, const SpectralState& b) {
    return l2((a.u - b.u).field()) + v_norm(a.theta - b.theta);
}

// ---- export ---------------------------------------------------------------------------

void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
    os << "t,u_l2,u_h1,theta_l2,theta_h1,psi,dissipation,energy_residual\n";
    std::ostringstream line;
    line.precision(12);
    for (const auto& d : traj.diagnostics) {
        line.str("");
        line << d.t << ',' << d.u_l2 << ',' << d.u_h1 << ',' << d.theta_l2 << ',' << d.theta_h1 << ',' << d.psi << ','
             << d.dissipation << ',' << d.energy_residual << '\n';
        os << line.str();
    }
}

namespace {

const char* const kComponents[4] = {"u1", "u2", "theta1", "theta2"};

const ScalarField& component(const SpectralState& s, int c) { return c < 2 ? s.u[c] : s.theta[c - 2]; }

}  // namespace

void write_checkpoint(std::ostream& os, const SpectralState& s) {
    const TorusGrid& g = s.grid();
    const int km = g.max_wavenumber();
    os.precision(17);
    os << "time " << s.time << '\n' << "modes " << g.modes() << '\n';
    for (int c = 0; c < 4; ++c) {
        os << "component " << kComponents[c] << '\n';
        const ScalarField& f = component(s, c);
        for (int k2 = -km; k2 <= km; ++k2)
            for (int k1 = -km; k1 <= km; ++k1) {
                const cplx z = f.coefficient(k1, k2);
                os << k1 << ' ' << k2 << ' ' << z.real() << ' ' << z.imag() << '\n';
            }
    }
}

SpectralState read_checkpoint(std::istream& is, const TorusGrid& grid) {
    std::string word;
    double time = 0.0;
    int modes = 0;
    if (!(is >> word >> time) || word != "time") throw std::invalid_argument("checkpoint: missing time line");
    if (!(is >> word >> modes) || word != "modes") throw std::invalid_argument("checkpoint: missing modes line");
    if (modes != grid.modes()) throw std::invalid_argument("checkpoint: mode count differs from the grid");
    std::array<ScalarField, 4> f{ScalarField(grid), ScalarField(grid), ScalarField(grid), ScalarField(grid)};
    const int km = grid.max_wavenumber();
    const int per = (2 * km + 1) * (2 * km + 1);
    for (int c = 0; c < 4; ++c) {
        if (!(is >> word) || word != "component" || !(is >> word) || word != kComponents[c])
            throw std::invalid_argument(std::string("checkpoint: expected component ") + kComponents[c]);
        for (int j = 0; j < per; ++j) {
            int k1 = 0, k2 = 0;
            double re = 0.0, im = 0.0;
            if (!(is >> k1 >> k2 >> re >> im)) throw std::invalid_argument("checkpoint: truncated coefficient table");
            if (std::abs(k1) > km || std::abs(k2) > km) throw std::invalid_argument("checkpoint: wave number out of band");
            f[static_cast<std::size_t>(c)].coefficients()[grid.flat_index(k1, k2)] = cplx(re, im);
        }
    }
    return SpectralState(DivergenceFreeField::checked(VectorField(f[0], f[1]), 1e-10), VectorField(f[2], f[3]), time);
}

}  // namespace nematic
