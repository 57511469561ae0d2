#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <vector>

#include "nematic/noise.hpp"
#include "nematic/operators.hpp"
#include "nematic/spectral.hpp"

namespace nematic {

/// Velocity and director at a time.
struct SpectralState {
    DivergenceFreeField u;
    VectorField theta;
    double time = 0.0;

    explicit SpectralState(const TorusGrid& grid) : u(grid), theta(grid) {}
    SpectralState(DivergenceFreeField u_, VectorField theta_, double t = 0.0);

    const TorusGrid& grid() const { return theta.grid(); }
    bool is_finite() const { return u.is_finite() && theta.is_finite(); }
};

/// Jump noise: marks with intensities and the affine coefficient G.
struct NoiseModel {
    MarkSpace marks;
    JumpCoefficientSpec coefficient;

    /// One mark of unit weight with G == 0.
    static NoiseModel silent(const TorusGrid& grid);
};

struct SolverConfig {
    SolverConfig(TorusGrid grid, double dt, double horizon);

    TorusGrid grid;
    double dt;
    double horizon;
    PolynomialNonlinearity nonlinearity = PolynomialNonlinearity::standard();
    NoiseModel noise;
    /// Cutoff level n; nullopt disables the cutoffs.
    std::optional<double> cutoff_level;
    /// Snapshot stride in steps. 0 selects every step for T <= 2, every 10th otherwise.
    int stride = 0;
    /// Physical grid for f(theta). Default resolves f exactly.
    std::optional<int> f_grid;
    /// Hold u at zero (director-only dynamics).
    bool freeze_velocity = false;

    int steps() const;
    int effective_stride() const;
    int f_grid_size() const;
    /// Throws std::invalid_argument on dt <= 0 or a horizon that is not a multiple of dt.
    void validate() const;
};

struct StepDiagnostics {
    double t = 0.0;
    double u_l2 = 0.0;
    double u_h1 = 0.0;       // |grad u|
    double theta_l2 = 0.0;
    double theta_h1 = 0.0;   // |grad theta|
    double psi = 0.0;
    double dissipation = 0.0;  // ||u||^2 + |Laplacian theta - f(theta)|^2
    /// ((E_k - E_{k-1}) / dt + D_{k-1} - W_{k-1}) with E = Psi + |u|^2 / 2; zero at k = 0.
    double energy_residual = 0.0;
    double drift_power = 0.0;  // <control drift, u>
};

enum class SolveStatus { ok, diverged };

struct Trajectory {
    std::vector<SpectralState> snapshots;
    std::vector<StepDiagnostics> diagnostics;  // one per time level, including t = 0
    SolveStatus status = SolveStatus::ok;
    double dt = 0.0;

    bool ok() const { return status == SolveStatus::ok; }
    const SpectralState& final_state() const { return snapshots.back(); }
};

/// Called with each new time level (before snapshot striding). Returning
/// false stops the solve early with status ok.
using StepObserver = std::function<bool(int step, const SpectralState&)>;

/// 1 on [0, n], 0 above n + 1, smoothstep 1 - 3s^2 + 2s^3 in between.
double cutoff_chi(double norm_value, double n);

struct StateRate {
    DivergenceFreeField du;
    VectorField dtheta;
};

StateRate skeleton_rhs(const SpectralState& state, const Control& g, const SolverConfig& cfg);

Trajectory solve_skeleton(const SpectralState& init, const Control& g, const SolverConfig& cfg,
                          const StepObserver& observer = {});

/// Controlled jump SDE with jumps at intensity phi / epsilon and amplitude epsilon.
/// A unit control phi == 1 gives the uncontrolled equation.
Trajectory solve_small_noise_sde(const SpectralState& init, double epsilon, const Control& phi, const SolverConfig& cfg,
                                 std::uint64_t seed, const StepObserver& observer = {});

/// Jumps used by solve_small_noise_sde for this (epsilon, phi, seed).
JumpSample sde_jumps(double epsilon, const Control& phi, const SolverConfig& cfg, std::uint64_t seed);

/// Same as solve_small_noise_sde with the jump configuration supplied.
Trajectory solve_with_jumps(const SpectralState& init, double epsilon, const JumpSample& jumps, const Control& phi,
                            const SolverConfig& cfg, const StepObserver& observer = {});

struct ConvolutionPath {
    std::vector<double> times;
    std::vector<double> xi_l2;  // |xi(t)|
    double sup_squared = 0.0;   // sup_t |xi(t)|^2
    SolveStatus status = SolveStatus::ok;
};

/// Linear jump-driven Ornstein-Uhlenbeck path
///   d xi = -A1 xi dt + eps int G(u(t-), v) (N^{phi/eps} - phi theta / eps)(dt dv),
/// with G evaluated along the concurrently solved controlled SDE.
ConvolutionPath solve_stochastic_convolution(const SpectralState& init, double epsilon, const Control& phi,
                                             const SolverConfig& cfg, std::uint64_t seed);

/// Zeroes coefficients with max(|k1|, |k2|) > max_k.
SpectralState galerkin_project(const SpectralState& state, int max_k);

struct EnergyLedger {
    std::vector<double> residuals;  // per step, normalized by dt
    double max_abs = 0.0;
};

/// Recomputes the per-step energy balance of a skeleton trajectory recorded at every step.
EnergyLedger energy_ledger(const Trajectory& traj, const Control& g, const SolverConfig& cfg);

/// E = Psi(theta) + |u|^2 / 2 with Psi using the elastic and potential terms.
double total_energy(const SpectralState& s, const PolynomialNonlinearity& nl);

struct AprioriBound {
    double c01 = 0.0;      // int |G|_0 |g - 1| d theta ds
    double initial = 0.0;  // Psi(theta0) + |u0|^2
    double ceiling = 0.0;  // (initial + c01) T e^{c01 T}
};

AprioriBound apriori_bound(const SpectralState& init, const Control& g, const SolverConfig& cfg);

/// sup_t [Psi + |u|^2] along a trajectory.
double sup_psi_plus_u2(const Trajectory& traj);

/// |u1 - u2| + ||theta1 - theta2||_{H1}
double state_distance(const SpectralState& a, const SpectralState& b);

// ---- export -------------------------------------------------------------------------

/// CSV with header t,u_l2,u_h1,theta_l2,theta_h1,psi,dissipation,energy_residual.
void write_trajectory_csv(std::ostream& os, const Trajectory& traj);

/// Text checkpoint: "time" line, then for component in (u1, u2, theta1, theta2)
/// one "k1 k2 re im" line per retained coefficient.
void write_checkpoint(std::ostream& os, const SpectralState& s);
SpectralState read_checkpoint(std::istream& is, const TorusGrid& grid);

}  // namespace nematic
