#include "nematic/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace nematic {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream is(s);
    while (std::getline(is, cur, sep)) out.push_back(trim(cur));
    if (!s.empty() && s.back() == sep) out.emplace_back();
    return out;
}

double parse_double(const std::string& s) {
    const std::string t = trim(s);
    double v = 0.0;
    const auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || p != t.data() + t.size() || t.empty())
        throw std::invalid_argument("expected a number, got '" + t + "'");
    return v;
}

long long parse_integer(const std::string& s) {
    const std::string t = trim(s);
    long long v = 0;
    const auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || p != t.data() + t.size() || t.empty())
        throw std::invalid_argument("expected an integer, got '" + t + "'");
    return v;
}

std::uint64_t parse_u64(const std::string& s) {
    const std::string t = trim(s);
    std::uint64_t v = 0;
    const auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || p != t.data() + t.size() || t.empty())
        throw std::invalid_argument("expected an unsigned 64-bit integer, got '" + t + "'");
    return v;
}

std::vector<double> parse_list(const std::string& s) {
    std::vector<double> out;
    if (trim(s).empty()) return out;
    for (const auto& part : split(s, ',')) out.push_back(parse_double(part));
    return out;
}

/// Shortest decimal text that parses back to the same double.
std::string fmt(double v) {
    char buf[40];
    for (int prec = 15; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof buf, "%.*g", prec, v);
        if (std::strtod(buf, nullptr) == v) break;
    }
    return buf;
}

std::string fmt_list(const std::vector<double>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + fmt(v[i]);
    return s;
}

// ---- shapes ---------------------------------------------------------------------

double poisson_p(double r, double x) { return (1.0 - r * r) / (1.0 - 2.0 * r * std::cos(x) + r * r); }
double poisson_q(double r, double x) { return r * std::sin(x) / (1.0 - 2.0 * r * std::cos(x) + r * r); }

struct KindInfo {
    const char* name;
    std::size_t arity;
};

constexpr KindInfo kVelocityKinds[] = {{"shear_x", 2}, {"shear_y", 2}, {"cellular", 3}, {"analytic", 2}};
constexpr KindInfo kDirectorKinds[] = {{"constant", 2}, {"wave", 4}, {"analytic", 2}};

template <std::size_t N>
void check_kind(const ShapeTerm& t, const KindInfo (&kinds)[N], const char* what) {
    for (const auto& k : kinds)
        if (t.kind == k.name) {
            if (t.args.size() != k.arity)
                throw std::invalid_argument(std::string(what) + " shape " + t.kind + " takes " +
                                            std::to_string(k.arity) + " arguments");
            return;
        }
    throw std::invalid_argument(std::string("unknown ") + what + " shape '" + t.kind + "'");
}

int wave_number(const TorusGrid& grid, double k, bool allow_zero) {
    if (k != std::round(k)) throw std::invalid_argument("wave numbers must be integers");
    const int ki = static_cast<int>(k);
    if (std::abs(ki) > grid.max_wavenumber())
        throw std::invalid_argument("wave number " + std::to_string(ki) + " outside the retained band");
    if (!allow_zero && ki == 0) throw std::invalid_argument("wave number must be nonzero");
    return ki;
}

void check_radius(double r) {
    if (!(r > 0.0 && r < 1.0)) throw std::invalid_argument("analytic shape radius must lie in (0, 1)");
}

constexpr int kOversample = 4;

}  // namespace

ConfigError::ConfigError(const std::string& origin, int line, const std::string& message)
    : std::invalid_argument(origin + (line > 0 ? ":" + std::to_string(line) : std::string()) + ": " + message),
      line_(line) {}

ShapeSum parse_shape_sum(const std::string& text) {
    ShapeSum sum;
    if (trim(text).empty() || trim(text) == "zero") return sum;
    for (const auto& term : split(text, '+')) {
        const auto open = term.find('(');
        const auto close = term.rfind(')');
        if (open == std::string::npos || close == std::string::npos || close < open || trim(term.substr(close + 1)) != "")
            throw std::invalid_argument("malformed shape term '" + term + "', expected name(arg, ...)");
        ShapeTerm t{trim(term.substr(0, open)), parse_list(term.substr(open + 1, close - open - 1))};
        if (t.kind.empty()) throw std::invalid_argument("shape term without a name");
        sum.push_back(std::move(t));
    }
    return sum;
}

std::string format_shape_sum(const ShapeSum& s) {
    if (s.empty()) return "zero";
    std::string out;
    for (std::size_t i = 0; i < s.size(); ++i) {
        out += (i ? " + " : "") + s[i].kind + "(";
        for (std::size_t j = 0; j < s[i].args.size(); ++j) out += (j ? ", " : "") + fmt(s[i].args[j]);
        out += ")";
    }
    return out;
}

DivergenceFreeField velocity_shape(const TorusGrid& grid, const ShapeSum& s) {
    ScalarField psi(grid);
    for (const auto& t : s) {
        check_kind(t, kVelocityKinds, "velocity");
        const auto& a = t.args;
        std::function<double(double, double)> fn;
        if (t.kind == "shear_x") {
            const int k = wave_number(grid, a[0], false);
            const double amp = a[1];
            fn = [=](double, double y) { return -amp * std::cos(k * y) / k; };
        } else if (t.kind == "shear_y") {
            const int k = wave_number(grid, a[0], false);
            const double amp = a[1];
            fn = [=](double x, double) { return amp * std::cos(k * x) / k; };
        } else if (t.kind == "cellular") {
            const int k1 = wave_number(grid, a[0], true), k2 = wave_number(grid, a[1], true);
            const double amp = a[2];
            fn = [=](double x, double y) { return amp * std::sin(k1 * x) * std::sin(k2 * y); };
        } else {
            check_radius(a[0]);
            const double r = a[0], amp = a[1];
            fn = [=](double x, double y) { return amp * poisson_q(r, x) * poisson_q(r, y); };
        }
        psi += ScalarField::sample(grid, fn, kOversample);
    }
    return DivergenceFreeField::from_stream_function(psi);
}

VectorField director_shape(const TorusGrid& grid, const ShapeSum& s) {
    VectorField theta(grid);
    for (const auto& t : s) {
        check_kind(t, kDirectorKinds, "director");
        const auto& a = t.args;
        if (t.kind == "constant") {
            theta += VectorField::constant(grid, a[0], a[1]);
        } else if (t.kind == "wave") {
            const int k1 = wave_number(grid, a[0], true), k2 = wave_number(grid, a[1], true);
            const double ca = a[2], cb = a[3];
            theta += VectorField(
                ScalarField::sample(grid, [=](double x, double y) { return ca * std::cos(k1 * x + k2 * y); }, kOversample),
                ScalarField::sample(grid, [=](double x, double y) { return cb * std::sin(k1 * x + k2 * y); }, kOversample));
        } else {
            check_radius(a[0]);
            const double r = a[0], amp = a[1];
            theta += VectorField(
                ScalarField::sample(grid, [=](double x, double y) { return amp * poisson_q(r, x) * poisson_p(r, y); },
                                    kOversample),
                ScalarField::sample(grid, [=](double, double y) { return amp * poisson_q(r, y); }, kOversample));
        }
    }
    return theta;
}

// ---- parsing -------------------------------------------------------------------------

namespace {

using Setter = std::function<void(ExperimentConfig&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
    static const std::map<std::string, Setter> table = [] {
        std::map<std::string, Setter> m;
        auto integer = [](int ExperimentConfig::*field) {
            return [field](ExperimentConfig& c, const std::string& v) {
                const long long x = parse_integer(v);
                if (x < -(1LL << 31) || x > (1LL << 31) - 1) throw std::invalid_argument("integer out of range");
                c.*field = static_cast<int>(x);
            };
        };
        auto real = [](double ExperimentConfig::*field) {
            return [field](ExperimentConfig& c, const std::string& v) { c.*field = parse_double(v); };
        };
        auto list = [](std::vector<double> ExperimentConfig::*field) {
            return [field](ExperimentConfig& c, const std::string& v) { c.*field = parse_list(v); };
        };
        auto shapes = [](ShapeSum ExperimentConfig::*field) {
            return [field](ExperimentConfig& c, const std::string& v) { c.*field = parse_shape_sum(v); };
        };
        m["seed"] = [](ExperimentConfig& c, const std::string& v) { c.seed = parse_u64(v); };
        m["grid.modes"] = integer(&ExperimentConfig::modes);
        m["grid.dealias"] = [](ExperimentConfig& c, const std::string& v) {
            const auto parts = split(v, '/');
            if (parts.size() != 2) throw std::invalid_argument("dealias factor must be written num/den");
            c.dealias = {static_cast<int>(parse_integer(parts[0])), static_cast<int>(parse_integer(parts[1]))};
        };
        m["nonlinearity.b"] = list(&ExperimentConfig::b);
        m["marks.weights"] = list(&ExperimentConfig::mark_weights);
        m["marks.shapes"] = [](ExperimentConfig& c, const std::string& v) {
            c.mark_shapes.clear();
            for (const auto& part : split(v, ';')) c.mark_shapes.push_back(parse_shape_sum(part));
        };
        m["marks.gains"] = list(&ExperimentConfig::mark_gains);
        m["solver.dt"] = real(&ExperimentConfig::dt);
        m["solver.T"] = real(&ExperimentConfig::horizon);
        m["solver.stride"] = integer(&ExperimentConfig::stride);
        m["solver.cutoff"] = [](ExperimentConfig& c, const std::string& v) {
            if (trim(v) == "none")
                c.cutoff.reset();
            else
                c.cutoff = parse_double(v);
        };
        m["initial.u"] = shapes(&ExperimentConfig::init_u);
        m["initial.theta"] = shapes(&ExperimentConfig::init_theta);
        m["control.cells"] = integer(&ExperimentConfig::control_cells);
        m["control.values"] = list(&ExperimentConfig::control_values);
        m["experiment.epsilons"] = list(&ExperimentConfig::epsilons);
        m["experiment.paths"] = integer(&ExperimentConfig::paths);
        m["experiment.epsilon"] = real(&ExperimentConfig::epsilon);
        m["rate.penalty"] = real(&ExperimentConfig::penalty);
        m["rate.cells"] = integer(&ExperimentConfig::rate_cells);
        m["rate.target_control"] = list(&ExperimentConfig::target_control);
        m["rate.max_iterations"] = integer(&ExperimentConfig::max_iterations);
        m["rate.step"] = real(&ExperimentConfig::initial_step);
        m["rate.tolerance"] = real(&ExperimentConfig::tolerance);
        m["rate.fd_step"] = real(&ExperimentConfig::fd_step);
        m["rate.brute_grid"] = list(&ExperimentConfig::brute_grid);
        m["importance.epsilon"] = real(&ExperimentConfig::importance_epsilon);
        m["importance.paths"] = integer(&ExperimentConfig::importance_paths);
        m["importance.cells"] = integer(&ExperimentConfig::tilt_cells);
        m["importance.tilt"] = list(&ExperimentConfig::tilt);
        m["importance.threshold"] = integer(&ExperimentConfig::event_threshold);
        return m;
    }();
    return table;
}

using LineMap = std::map<std::string, int>;

void validate_impl(const ExperimentConfig& c, const std::string& origin, const LineMap& lines) {
    auto fail = [&](const std::string& key, const std::string& msg) {
        const auto it = lines.find(key);
        throw ConfigError(origin, it == lines.end() ? 0 : it->second, key + ": " + msg);
    };
    auto positive = [&](const std::string& key, double v) {
        if (!(v > 0.0) || !std::isfinite(v)) fail(key, "must be positive and finite");
    };
    auto cells_by_marks = [&](const std::string& key, const std::vector<double>& v, int cells, bool strict) {
        const auto marks = c.mark_weights.size();
        if (v.size() != 1 && v.size() != static_cast<std::size_t>(cells) * marks)
            fail(key, "needs one fill value or cells x marks = " + std::to_string(cells * marks) + " values");
        for (double x : v)
            if (!std::isfinite(x) || (strict ? !(x > 0.0) : !(x >= 0.0)))
                fail(key, strict ? "control values must be > 0" : "control values must be >= 0");
    };

    if (!c.seed) fail("seed", "missing seed (set it in the file or pass --seed)");
    if (c.modes < 8 || c.modes % 2 != 0) fail("grid.modes", "must be even and >= 8");
    if (c.dealias.den <= 0 || c.dealias.num < c.dealias.den) fail("grid.dealias", "must be a rational >= 1");
    if (c.b.empty()) fail("nonlinearity.b", "needs at least one coefficient");
    for (double b : c.b)
        if (!(b > 0.0) || !std::isfinite(b))
            fail("nonlinearity.b", "every coefficient b_j must be strictly positive (coercivity of f)");
    if (c.mark_weights.empty()) fail("marks.weights", "needs at least one mark");
    for (double w : c.mark_weights) positive("marks.weights", w);
    if (c.mark_shapes.size() != c.mark_weights.size()) fail("marks.shapes", "needs one shape per mark (';'-separated)");
    if (c.mark_gains.size() != c.mark_weights.size()) fail("marks.gains", "needs one gain per mark");
    for (double g : c.mark_gains)
        if (!std::isfinite(g)) fail("marks.gains", "must be finite");
    positive("solver.dt", c.dt);
    positive("solver.T", c.horizon);
    const double ratio = c.horizon / c.dt;
    if (std::abs(ratio - std::round(ratio)) > 1e-9 * std::max(1.0, ratio))
        fail("solver.T", "must be an integer multiple of solver.dt");
    if (c.stride < 0) fail("solver.stride", "must be >= 0");
    if (c.cutoff && !(*c.cutoff >= 1.0)) fail("solver.cutoff", "must be >= 1 or none");
    if (c.control_cells < 1) fail("control.cells", "must be >= 1");
    cells_by_marks("control.values", c.control_values, c.control_cells, false);
    if (c.epsilons.empty()) fail("experiment.epsilons", "needs at least one value");
    for (std::size_t i = 0; i < c.epsilons.size(); ++i) {
        positive("experiment.epsilons", c.epsilons[i]);
        if (i > 0 && !(c.epsilons[i] < c.epsilons[i - 1])) fail("experiment.epsilons", "must be strictly decreasing");
    }
    if (c.paths < 8) fail("experiment.paths", "must be >= 8");
    positive("experiment.epsilon", c.epsilon);
    positive("rate.penalty", c.penalty);
    if (c.rate_cells < 1) fail("rate.cells", "must be >= 1");
    if (c.rate_cells * c.mark_weights.size() > 32) fail("rate.cells", "cells x marks must be <= 32");
    cells_by_marks("rate.target_control", c.target_control, c.rate_cells, false);
    if (c.max_iterations < 0) fail("rate.max_iterations", "must be >= 0");
    positive("rate.step", c.initial_step);
    positive("rate.tolerance", c.tolerance);
    positive("rate.fd_step", c.fd_step);
    for (double v : c.brute_grid)
        if (!(v >= 0.0) || !std::isfinite(v)) fail("rate.brute_grid", "values must be >= 0");
    if (!c.brute_grid.empty() && c.rate_cells * c.mark_weights.size() > 2)
        fail("rate.brute_grid", "brute-force search needs cells x marks <= 2");
    positive("importance.epsilon", c.importance_epsilon);
    if (c.importance_paths < 2) fail("importance.paths", "must be >= 2");
    if (c.tilt_cells < 1) fail("importance.cells", "must be >= 1");
    cells_by_marks("importance.tilt", c.tilt, c.tilt_cells, true);
    if (c.event_threshold < 0) fail("importance.threshold", "must be >= 0");

    const TorusGrid grid(c.modes, c.dealias);
    auto shape_check = [&](const std::string& key, auto&& build) {
        try {
            build();
        } catch (const std::invalid_argument& e) {
            fail(key, e.what());
        }
    };
    for (const auto& s : c.mark_shapes) shape_check("marks.shapes", [&] { velocity_shape(grid, s); });
    shape_check("initial.u", [&] { velocity_shape(grid, c.init_u); });
    shape_check("initial.theta", [&] { director_shape(grid, c.init_theta); });
}

Control make_control(double horizon, int cells, int marks, const std::vector<double>& v) {
    if (v.size() == 1) return Control(horizon, cells, marks, v[0]);
    return Control(horizon, cells, marks, v);
}

}  // namespace

void ExperimentConfig::validate(const std::string& origin) const { validate_impl(*this, origin, {}); }

ExperimentConfig parse_config_text(const std::string& text, const std::string& origin,
                                   std::optional<std::uint64_t> seed_override) {
    ExperimentConfig cfg;
    LineMap lines;
    std::istringstream is(text);
    std::string raw, section;
    int line_no = 0;
    while (std::getline(is, raw)) {
        ++line_no;
        const auto hash = raw.find('#');
        const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError(origin, line_no, "malformed section header");
            section = trim(line.substr(1, line.size() - 2));
            static const char* const known[] = {"grid",  "nonlinearity", "marks", "solver",    "initial",
                                                "control", "experiment", "rate",  "importance"};
            if (std::find(std::begin(known), std::end(known), section) == std::end(known))
                throw ConfigError(origin, line_no, "unknown section [" + section + "]");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError(origin, line_no, "expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string full = section.empty() ? key : section + "." + key;
        const auto it = setters().find(full);
        if (it == setters().end()) throw ConfigError(origin, line_no, "unknown key '" + full + "'");
        if (lines.count(full)) throw ConfigError(origin, line_no, "duplicate key '" + full + "'");
        lines[full] = line_no;
        try {
            it->second(cfg, line.substr(eq + 1));
        } catch (const std::invalid_argument& e) {
            throw ConfigError(origin, line_no, full + ": " + e.what());
        }
    }
    if (seed_override) cfg.seed = seed_override;
    validate_impl(cfg, origin, lines);
    return cfg;
}

ExperimentConfig parse_config(const std::filesystem::path& path, std::optional<std::uint64_t> seed_override) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path.string(), 0, "cannot open config file");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str(), path.string(), seed_override);
}

std::string serialize_config(const ExperimentConfig& c) {
    std::ostringstream os;
    if (c.seed) os << "seed = " << *c.seed << "\n";
    os << "\n[grid]\nmodes = " << c.modes << "\ndealias = " << c.dealias.num << "/" << c.dealias.den << "\n";
    os << "\n[nonlinearity]\nb = " << fmt_list(c.b) << "\n";
    os << "\n[marks]\nweights = " << fmt_list(c.mark_weights) << "\nshapes = ";
    for (std::size_t i = 0; i < c.mark_shapes.size(); ++i) os << (i ? "; " : "") << format_shape_sum(c.mark_shapes[i]);
    os << "\ngains = " << fmt_list(c.mark_gains) << "\n";
    os << "\n[solver]\ndt = " << fmt(c.dt) << "\nT = " << fmt(c.horizon) << "\nstride = " << c.stride
       << "\ncutoff = " << (c.cutoff ? fmt(*c.cutoff) : "none") << "\n";
    os << "\n[initial]\nu = " << format_shape_sum(c.init_u) << "\ntheta = " << format_shape_sum(c.init_theta) << "\n";
    os << "\n[control]\ncells = " << c.control_cells << "\nvalues = " << fmt_list(c.control_values) << "\n";
    os << "\n[experiment]\nepsilons = " << fmt_list(c.epsilons) << "\npaths = " << c.paths
       << "\nepsilon = " << fmt(c.epsilon) << "\n";
    os << "\n[rate]\npenalty = " << fmt(c.penalty) << "\ncells = " << c.rate_cells
       << "\ntarget_control = " << fmt_list(c.target_control) << "\nmax_iterations = " << c.max_iterations
       << "\nstep = " << fmt(c.initial_step) << "\ntolerance = " << fmt(c.tolerance) << "\nfd_step = " << fmt(c.fd_step)
       << "\nbrute_grid = " << fmt_list(c.brute_grid) << "\n";
    os << "\n[importance]\nepsilon = " << fmt(c.importance_epsilon) << "\npaths = " << c.importance_paths
       << "\ncells = " << c.tilt_cells << "\ntilt = " << fmt_list(c.tilt) << "\nthreshold = " << c.event_threshold
       << "\n";
    return os.str();
}

std::uint64_t config_hash(const ExperimentConfig& cfg) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : serialize_config(cfg)) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string provenance_header(const ExperimentConfig& cfg) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "# config_hash=%016llx seed=%llu", static_cast<unsigned long long>(config_hash(cfg)),
                  static_cast<unsigned long long>(cfg.seed.value_or(0)));
    return buf;
}

// ---- domain objects ------------------------------------------------------------------------

TorusGrid ExperimentConfig::grid() const { return TorusGrid(modes, dealias); }

PolynomialNonlinearity ExperimentConfig::nonlinearity() const { return PolynomialNonlinearity(b); }

NoiseModel ExperimentConfig::noise(const TorusGrid& g) const {
    JumpCoefficientSpec spec;
    for (const auto& s : mark_shapes) spec.shapes.push_back(velocity_shape(g, s));
    spec.gains = mark_gains;
    return NoiseModel{MarkSpace(mark_weights), std::move(spec)};
}

SolverConfig ExperimentConfig::solver() const {
    SolverConfig s(grid(), dt, horizon);
    s.nonlinearity = nonlinearity();
    s.noise = noise(s.grid);
    s.cutoff_level = cutoff;
    s.stride = stride;
    return s;
}

SpectralState ExperimentConfig::initial_state() const {
    const TorusGrid g = grid();
    return SpectralState(velocity_shape(g, init_u), director_shape(g, init_theta));
}

Control ExperimentConfig::control() const {
    return make_control(horizon, control_cells, static_cast<int>(mark_weights.size()), control_values);
}

Control ExperimentConfig::tilt_control() const {
    return make_control(horizon, tilt_cells, static_cast<int>(mark_weights.size()), tilt);
}

RateProblem ExperimentConfig::rate_problem(int threads) const {
    SolverConfig cfg = solver();
    const SpectralState init = initial_state();
    SolverConfig last_only = cfg;
    last_only.stride = cfg.steps();
    const Control target_g = make_control(horizon, rate_cells, static_cast<int>(mark_weights.size()), target_control);
    const Trajectory t = solve_skeleton(init, target_g, last_only);
    if (!t.ok()) throw std::domain_error("skeleton for the rate target diverged");
    OptimizerSettings opt{max_iterations, initial_step, tolerance, fd_step, threads};
    return RateProblem{init, t.final_state(), std::move(cfg), penalty, rate_cells, opt};
}

}  // namespace nematic
