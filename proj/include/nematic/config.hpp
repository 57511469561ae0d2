#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "nematic/dynamics.hpp"
#include "nematic/ldp.hpp"

namespace nematic {

/// Parse or validation failure. `line()` is 0 when the problem is not tied to a line.
class ConfigError : public std::invalid_argument {
public:
    ConfigError(const std::string& origin, int line, const std::string& message);
    int line() const { return line_; }

private:
    int line_;
};

/// One named analytic field, e.g. cellular(1, 2, 0.5).
///
/// Velocity vocabulary (stream-function based, so divergence-free):
///   shear_x(k, amp)        u = (amp sin(k x2), 0)
///   shear_y(k, amp)        u = (0, amp sin(k x1))
///   cellular(k1, k2, amp)  psi = amp sin(k1 x1) sin(k2 x2)
///   analytic(r, amp)       psi = amp Q_r(x1) Q_r(x2)
/// Director vocabulary:
///   constant(a, b)         theta = (a, b)
///   wave(k1, k2, a, b)     theta = (a cos(k.x), b sin(k.x))
///   analytic(r, amp)       theta = amp (Q_r(x1) P_r(x2), Q_r(x2))
/// with P_r(x) = (1 - r^2) / (1 - 2r cos x + r^2) and Q_r(x) = r sin x / (1 - 2r cos x + r^2).
struct ShapeTerm {
    std::string kind;
    std::vector<double> args;
    bool operator==(const ShapeTerm&) const = default;
};

using ShapeSum = std::vector<ShapeTerm>;

ShapeSum parse_shape_sum(const std::string& text);
std::string format_shape_sum(const ShapeSum& s);

DivergenceFreeField velocity_shape(const TorusGrid& grid, const ShapeSum& s);
VectorField director_shape(const TorusGrid& grid, const ShapeSum& s);

struct ExperimentConfig {
    std::optional<std::uint64_t> seed;

    // [grid]
    int modes = 16;
    Rational dealias{3, 2};
    // [nonlinearity]
    std::vector<double> b{1.0, 1.0};
    // [marks]
    std::vector<double> mark_weights{1.0, 0.5, 0.5, 0.25};
    std::vector<ShapeSum> mark_shapes{{{"cellular", {1, 1, 0.5}}},
                                      {{"shear_x", {2, 0.3}}},
                                      {{"shear_y", {1, 0.4}}},
                                      {{"cellular", {2, 1, 0.2}}}};
    std::vector<double> mark_gains{0.2, -0.1, 0.1, 0.0};
    // [solver]
    double dt = 0.005;
    double horizon = 1.0;
    int stride = 0;
    std::optional<double> cutoff;
    // [initial]
    ShapeSum init_u{{"cellular", {1, 2, 0.5}}};
    ShapeSum init_theta{{"wave", {1, 0, 0.4, 0.2}}, {"wave", {1, -1, 0.3, 0.3}}};
    // [control]  row-major cells x marks, or a single fill value
    int control_cells = 1;
    std::vector<double> control_values{1.0};
    // [experiment]
    std::vector<double> epsilons{0.4, 0.2, 0.1, 0.05};
    int paths = 32;
    double epsilon = 0.1;
    // [rate]
    double penalty = 100.0;
    int rate_cells = 1;
    std::vector<double> target_control{1.5};
    int max_iterations = 200;
    double initial_step = 1.0;
    double tolerance = 1e-8;
    double fd_step = 1e-5;
    std::vector<double> brute_grid;
    // [importance]
    double importance_epsilon = 0.25;
    int importance_paths = 10000;
    int tilt_cells = 1;
    std::vector<double> tilt{2.0};
    int event_threshold = 16;

    bool operator==(const ExperimentConfig&) const = default;

    /// Throws ConfigError describing the first violated rule.
    void validate(const std::string& origin = "config") const;

    TorusGrid grid() const;
    PolynomialNonlinearity nonlinearity() const;
    NoiseModel noise(const TorusGrid& grid) const;
    SolverConfig solver() const;
    SpectralState initial_state() const;
    Control control() const;
    Control tilt_control() const;
    /// Target is the skeleton endpoint under `target_control`.
    RateProblem rate_problem(int threads = 1) const;
};

/// Parses the key/value text format. `seed_override` replaces or supplies the seed.
ExperimentConfig parse_config_text(const std::string& text, const std::string& origin = "config",
                                   std::optional<std::uint64_t> seed_override = std::nullopt);
ExperimentConfig parse_config(const std::filesystem::path& path,
                              std::optional<std::uint64_t> seed_override = std::nullopt);
std::string serialize_config(const ExperimentConfig& cfg);

/// FNV-1a 64 of the serialized config.
std::uint64_t config_hash(const ExperimentConfig& cfg);
/// "# config_hash=<hex> seed=<seed>"
std::string provenance_header(const ExperimentConfig& cfg);

}  // namespace nematic
