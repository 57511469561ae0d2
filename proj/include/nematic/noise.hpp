#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "nematic/spectral.hpp"

namespace nematic {

/// Finite mark space with intensity weights theta(v_i) > 0.
class MarkSpace {
public:
    explicit MarkSpace(std::vector<double> weights, std::vector<std::string> labels = {});

    int size() const { return static_cast<int>(weights_.size()); }
    double weight(int mark) const;
    const std::vector<double>& weights() const { return weights_; }
    const std::vector<std::string>& labels() const { return labels_; }
    double total_mass() const { return total_; }

private:
    std::vector<double> weights_;
    std::vector<std::string> labels_;
    double total_ = 0.0;
};

/// Nonnegative intensity tilt g(t, v), piecewise constant on a uniform
/// partition of [0, T] into K cells. Cell k covers [k dt, (k+1) dt); the last
/// cell also contains T.
class Control {
public:
    Control(double horizon, int cells, int marks, double fill = 1.0);
    /// Row-major K x m values. Throws on negative or non-finite entries.
    Control(double horizon, int cells, int marks, std::vector<double> values);

    double horizon() const { return horizon_; }
    int cells() const { return cells_; }
    int marks() const { return marks_; }
    double cell_width() const { return horizon_ / cells_; }

    double at(int cell, int mark) const { return values_[static_cast<std::size_t>(cell) * marks_ + mark]; }
    void set(int cell, int mark, double value);
    std::span<const double> values() const { return values_; }

    int cell_of(double t) const;
    double value(double t, int mark) const { return at(cell_of(t), mark); }
    double max_over_time(int mark) const;
    bool is_identity() const;

    bool operator==(const Control&) const = default;

private:
    double horizon_;
    int cells_;
    int marks_;
    std::vector<double> values_;
};

struct JumpEvent {
    double time;
    int mark;
    bool operator==(const JumpEvent&) const = default;
};

/// Realized Poisson point configuration on (0, T] x marks, time ordered.
struct JumpSample {
    std::vector<JumpEvent> events;
    double horizon = 0.0;
    double intensity_scale = 1.0;

    bool operator==(const JumpSample&) const = default;
};

/// Affine jump coefficient G(t, u, v) = shape_v + gain_v * u (constant in t).
struct JumpCoefficientSpec {
    std::vector<DivergenceFreeField> shapes;
    std::vector<double> gains;

    int size() const { return static_cast<int>(shapes.size()); }
    /// |G(t, v)|_{0,H} = sup_u |G(t,u,v)| / (1 + |u|) = max(|shape_v|, |gain_v|).
    double sup_norm0(int mark) const;
    /// |G(t, v)|_{1,H} = |gain_v|.
    double lipschitz1(int mark) const;
    /// L in  int |G(u1) - G(u2)|^2 d theta <= L |u1 - u2|^2.
    double lipschitz_constant(const MarkSpace& ms) const;
    /// C_p in  int |G(u)|^p d theta <= C_p (1 + |u|^p).
    double growth_constant(const MarkSpace& ms, double p) const;
    bool is_zero() const;
};

/// Validates that the spec and mark space agree in size and grid.
void check_compatible(const JumpCoefficientSpec& spec, const MarkSpace& ms);

// ---- sampling ------------------------------------------------------------------

/// Poisson random measure with intensity scale * theta x Lebesgue on (0, T].
JumpSample sample_prm(const MarkSpace& ms, double horizon, double intensity_scale, std::uint64_t seed);

/// Point process with intensity scale * phi(t, v) theta(dv) dt, by thinning a
/// per-mark dominating process at scale * theta_i * sup_t phi(t, v_i).
JumpSample thin_to_control(const MarkSpace& ms, const Control& phi, double intensity_scale, std::uint64_t seed);

// ---- entropy cost ----------------------------------------------------------------

/// l(r) = r log r - r + 1 with l(0) = 1. Throws on negative r.
double entropy_l(double r);
/// L_T(g) = sum_cells sum_marks l(g) dt theta_i.
double cost_LT(const Control& g, const MarkSpace& ms);
bool check_SM(const Control& g, const MarkSpace& ms, double level);

// ---- jump coefficient ----------------------------------------------------------

DivergenceFreeField eval_G(double t, const DivergenceFreeField& u, int mark, const JumpCoefficientSpec& spec);
/// sum_i theta_i G(t, u, v_i)
DivergenceFreeField compensator_integral(double t, const DivergenceFreeField& u, const MarkSpace& ms,
                                         const JumpCoefficientSpec& spec);
/// sum_i theta_i (g(t, v_i) - 1) G(t, u, v_i)
DivergenceFreeField control_drift(double t, const DivergenceFreeField& u, const Control& g, const MarkSpace& ms,
                                  const JumpCoefficientSpec& spec);

// ---- change of measure -----------------------------------------------------------

/// log of exp{ sum_events log(1/phi) + eps^-1 int (1 - 1/phi) d theta_T }.
/// Mean one for samples of the reference process at intensity eps^-1.
/// Throws std::domain_error if phi vanishes at an event.
double girsanov_log_density(const Control& phi, const JumpSample& sample, double epsilon, const MarkSpace& ms);

/// log dP/dQ for a sample drawn from the tilted law (intensity eps^-1 phi):
/// sum_events log(1/phi) + eps^-1 int (phi - 1) d theta_T. Mean one under the tilted law.
double tilted_log_likelihood_ratio(const Control& phi, const JumpSample& sample, double epsilon,
                                   const MarkSpace& ms);

// ---- text formats --------------------------------------------------------------------

/// "t mark_index" rows, preceded by a header line.
void write_jump_sample(std::ostream& os, const JumpSample& sample);
JumpSample read_jump_sample(std::istream& is, double horizon, double intensity_scale);

/// CSV: header "cell,t_start,m0,m1,...", one row per time cell.
void write_control_csv(std::ostream& os, const Control& g);
Control read_control_csv(std::istream& is, double horizon);

}  // namespace nematic
