#include "nematic/noise.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>

#include "nematic/rng.hpp"

namespace nematic {

// ---- MarkSpace ----------------------------------------------------------------

MarkSpace::MarkSpace(std::vector<double> weights, std::vector<std::string> labels)
    : weights_(std::move(weights)), labels_(std::move(labels)) {
    if (weights_.empty()) throw std::invalid_argument("mark space needs at least one mark");
    for (double w : weights_)
        if (!(w > 0.0) || !std::isfinite(w)) throw std::invalid_argument("mark weights must be positive and finite");
    if (labels_.empty())
        for (std::size_t i = 0; i < weights_.size(); ++i) labels_.push_back("v" + std::to_string(i + 1));
    if (labels_.size() != weights_.size()) throw std::invalid_argument("one label per mark required");
    total_ = std::accumulate(weights_.begin(), weights_.end(), 0.0);
}

double MarkSpace::weight(int mark) const {
    if (mark < 0 || mark >= size()) throw std::out_of_range("unknown mark " + std::to_string(mark));
    return weights_[static_cast<std::size_t>(mark)];
}

// ---- Control ----------------------------------------------------------------------

Control::Control(double horizon, int cells, int marks, double fill)
    : Control(horizon, cells, marks, std::vector<double>(static_cast<std::size_t>(std::max(cells, 0) * std::max(marks, 0)), fill)) {}

Control::Control(double horizon, int cells, int marks, std::vector<double> values)
    : horizon_(horizon), cells_(cells), marks_(marks), values_(std::move(values)) {
    if (!(horizon > 0.0)) throw std::invalid_argument("control horizon must be positive");
    if (cells < 1 || marks < 1) throw std::invalid_argument("control needs at least one cell and one mark");
    if (values_.size() != static_cast<std::size_t>(cells) * marks)
        throw std::invalid_argument("control value count does not match cells x marks");
    for (double v : values_)
        if (!(v >= 0.0) || !std::isfinite(v)) throw std::invalid_argument("control values must be finite and >= 0");
}

void Control::set(int cell, int mark, double value) {
    if (!(value >= 0.0) || !std::isfinite(value)) throw std::invalid_argument("control values must be finite and >= 0");
    values_.at(static_cast<std::size_t>(cell) * marks_ + mark) = value;
}

int Control::cell_of(double t) const {
    const int c = static_cast<int>(std::floor(t / cell_width()));
    return std::clamp(c, 0, cells_ - 1);
}

double Control::max_over_time(int mark) const {
    double m = 0.0;
    for (int c = 0; c < cells_; ++c) m = std::max(m, at(c, mark));
    return m;
}

bool Control::is_identity() const {
    return std::all_of(values_.begin(), values_.end(), [](double v) { return v == 1.0; });
}

// ---- JumpCoefficientSpec -------------------------------------------------------

double JumpCoefficientSpec::sup_norm0(int mark) const {
    return std::max(l2(shapes.at(static_cast<std::size_t>(mark)).field()), std::abs(gains.at(static_cast<std::size_t>(mark))));
}

double JumpCoefficientSpec::lipschitz1(int mark) const { return std::abs(gains.at(static_cast<std::size_t>(mark))); }

double JumpCoefficientSpec::lipschitz_constant(const MarkSpace& ms) const {
    double L = 0.0;
    for (int i = 0; i < size(); ++i) L += ms.weight(i) * gains[static_cast<std::size_t>(i)] * gains[static_cast<std::size_t>(i)];
    return L;
}

double JumpCoefficientSpec::growth_constant(const MarkSpace& ms, double p) const {
    // (|g| + |c||u|)^p <= 2^{p-1} (|g|^p + |c|^p |u|^p)
    double c = 0.0;
    for (int i = 0; i < size(); ++i) {
        const double a = std::pow(l2(shapes[static_cast<std::size_t>(i)].field()), p);
        const double b = std::pow(std::abs(gains[static_cast<std::size_t>(i)]), p);
        c += ms.weight(i) * std::max(a, b);
    }
    return std::pow(2.0, std::max(p - 1.0, 0.0)) * c;
}

bool JumpCoefficientSpec::is_zero() const {
    for (int i = 0; i < size(); ++i)
        if (gains[static_cast<std::size_t>(i)] != 0.0 || l2(shapes[static_cast<std::size_t>(i)].field()) != 0.0) return false;
    return true;
}

void check_compatible(const JumpCoefficientSpec& spec, const MarkSpace& ms) {
    if (spec.shapes.size() != spec.gains.size()) throw std::invalid_argument("one gain per jump shape required");
    if (spec.size() != ms.size()) throw std::invalid_argument("jump coefficient and mark space sizes differ");
}

// ---- sampling --------------------------------------------------------------------

namespace {

void sort_events(JumpSample& s) {
    std::sort(s.events.begin(), s.events.end(),
              [](const JumpEvent& a, const JumpEvent& b) { return a.time < b.time || (a.time == b.time && a.mark < b.mark); });
}

// Uniform on (0, T].
double event_time(CounterRng& rng, double horizon) { return horizon * (1.0 - rng.uniform()); }

}  // namespace

JumpSample sample_prm(const MarkSpace& ms, double horizon, double intensity_scale, std::uint64_t seed) {
    if (!(horizon > 0.0)) throw std::invalid_argument("horizon must be positive");
    if (!(intensity_scale > 0.0)) throw std::invalid_argument("intensity scale must be positive");
    CounterRng rng(derive_seed(seed, Purpose::jump_sample));
    std::poisson_distribution<long long> count(intensity_scale * ms.total_mass() * horizon);
    std::discrete_distribution<int> pick(ms.weights().begin(), ms.weights().end());
    JumpSample s{{}, horizon, intensity_scale};
    const long long n = count(rng);
    s.events.reserve(static_cast<std::size_t>(n));
    for (long long i = 0; i < n; ++i) {
        const double t = event_time(rng, horizon);
        s.events.push_back({t, pick(rng)});
    }
    sort_events(s);
    return s;
}

JumpSample thin_to_control(const MarkSpace& ms, const Control& phi, double intensity_scale, std::uint64_t seed) {
    if (!(intensity_scale > 0.0)) throw std::invalid_argument("intensity scale must be positive");
    if (phi.marks() != ms.size()) throw std::invalid_argument("control and mark space sizes differ");
    CounterRng rng(derive_seed(seed, Purpose::thinning));
    const double horizon = phi.horizon();
    JumpSample s{{}, horizon, intensity_scale};
    for (int i = 0; i < ms.size(); ++i) {
        const double top = phi.max_over_time(i);
        if (top <= 0.0) continue;
        std::poisson_distribution<long long> count(intensity_scale * ms.weight(i) * top * horizon);
        const long long n = count(rng);
        for (long long j = 0; j < n; ++j) {
            const double t = event_time(rng, horizon);
            const double accept = rng.uniform();
            if (accept * top < phi.value(t, i)) s.events.push_back({t, i});
        }
    }
    sort_events(s);
    return s;
}

// ---- entropy -------------------------------------------------------------------------

double entropy_l(double r) {
    if (!(r >= 0.0)) throw std::domain_error("entropy l(r) needs r >= 0");
    if (r == 0.0) return 1.0;
    return r * std::log(r) - r + 1.0;
}

double cost_LT(const Control& g, const MarkSpace& ms) {
    if (g.marks() != ms.size()) throw std::invalid_argument("control and mark space sizes differ");
    double c = 0.0;
    for (int k = 0; k < g.cells(); ++k)
        for (int i = 0; i < g.marks(); ++i) c += entropy_l(g.at(k, i)) * ms.weight(i);
    return c * g.cell_width();
}

bool check_SM(const Control& g, const MarkSpace& ms, double level) { return cost_LT(g, ms) <= level; }

// ---- jump coefficient -------------------------------------------------------------

DivergenceFreeField eval_G(double /*t*/, const DivergenceFreeField& u, int mark, const JumpCoefficientSpec& spec) {
    if (mark < 0 || mark >= spec.size()) throw std::out_of_range("unknown mark " + std::to_string(mark));
    DivergenceFreeField g = spec.shapes[static_cast<std::size_t>(mark)];
    const double c = spec.gains[static_cast<std::size_t>(mark)];
    if (c != 0.0) g.axpy(c, u);
    return g;
}

DivergenceFreeField compensator_integral(double t, const DivergenceFreeField& u, const MarkSpace& ms,
                                         const JumpCoefficientSpec& spec) {
    check_compatible(spec, ms);
    DivergenceFreeField acc(u.grid());
    for (int i = 0; i < ms.size(); ++i) acc.axpy(ms.weight(i), eval_G(t, u, i, spec));
    return acc;
}

DivergenceFreeField control_drift(double t, const DivergenceFreeField& u, const Control& g, const MarkSpace& ms,
                                  const JumpCoefficientSpec& spec) {
    check_compatible(spec, ms);
    DivergenceFreeField acc(u.grid());
    for (int i = 0; i < ms.size(); ++i) {
        const double w = ms.weight(i) * (g.value(t, i) - 1.0);
        if (w != 0.0) acc.axpy(w, eval_G(t, u, i, spec));
    }
    return acc;
}

// ---- change of measure --------------------------------------------------------------

namespace {

double event_log_sum(const Control& phi, const JumpSample& sample) {
    double s = 0.0;
    for (const auto& e : sample.events) {
        const double p = phi.value(e.time, e.mark);
        if (!(p > 0.0)) throw std::domain_error("invalid change of measure: control vanishes at an event");
        s -= std::log(p);
    }
    return s;
}

void check_sample(const Control& phi, const JumpSample& sample, double epsilon, const MarkSpace& ms) {
    if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
    if (phi.marks() != ms.size()) throw std::invalid_argument("control and mark space sizes differ");
    if (std::abs(sample.horizon - phi.horizon()) > 1e-12 * phi.horizon())
        throw std::invalid_argument("sample and control horizons differ");
}

}  // namespace

double girsanov_log_density(const Control& phi, const JumpSample& sample, double epsilon, const MarkSpace& ms) {
    check_sample(phi, sample, epsilon, ms);
    const double events = event_log_sum(phi, sample);
    double comp = 0.0;
    for (int k = 0; k < phi.cells(); ++k)
        for (int i = 0; i < phi.marks(); ++i) {
            const double p = phi.at(k, i);
            if (p == 0.0) return -std::numeric_limits<double>::infinity();
            comp += (1.0 - 1.0 / p) * ms.weight(i);
        }
    return events + comp * phi.cell_width() / epsilon;
}

double tilted_log_likelihood_ratio(const Control& phi, const JumpSample& sample, double epsilon, const MarkSpace& ms) {
    check_sample(phi, sample, epsilon, ms);
    const double events = event_log_sum(phi, sample);
    double comp = 0.0;
    for (int k = 0; k < phi.cells(); ++k)
        for (int i = 0; i < phi.marks(); ++i) comp += (phi.at(k, i) - 1.0) * ms.weight(i);
    return events + comp * phi.cell_width() / epsilon;
}

// ---- text formats ------------------------------------------------------------------------

void write_jump_sample(std::ostream& os, const JumpSample& sample) {
    os << "t mark_index\n";
    os.precision(17);
    for (const auto& e : sample.events) os << e.time << ' ' << e.mark << '\n';
}

JumpSample read_jump_sample(std::istream& is, double horizon, double intensity_scale) {
    JumpSample s{{}, horizon, intensity_scale};
    std::string line;
    if (!std::getline(is, line) || line.rfind("t mark_index", 0) != 0)
        throw std::invalid_argument("jump sample table must start with 't mark_index'");
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream row(line);
        JumpEvent e{};
        if (!(row >> e.time >> e.mark)) throw std::invalid_argument("malformed jump sample row: " + line);
        s.events.push_back(e);
    }
    return s;
}

void write_control_csv(std::ostream& os, const Control& g) {
    os << "cell,t_start";
    for (int i = 0; i < g.marks(); ++i) os << ",m" << i;
    os << '\n';
    os.precision(17);
    for (int k = 0; k < g.cells(); ++k) {
        os << k << ',' << k * g.cell_width();
        for (int i = 0; i < g.marks(); ++i) os << ',' << g.at(k, i);
        os << '\n';
    }
}

Control read_control_csv(std::istream& is, double horizon) {
    std::string line;
    int marks = -1;
    std::vector<double> values;
    int cells = 0;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (marks < 0) {
            if (line.rfind("cell,t_start", 0) != 0) throw std::invalid_argument("control CSV header missing");
            marks = static_cast<int>(std::count(line.begin(), line.end(), ',')) - 1;
            continue;
        }
        std::istringstream row(line);
        std::string cell;
        std::vector<std::string> parts;
        while (std::getline(row, cell, ',')) parts.push_back(cell);
        if (static_cast<int>(parts.size()) != marks + 2) throw std::invalid_argument("control CSV row has wrong width: " + line);
        for (int i = 0; i < marks; ++i) values.push_back(std::stod(parts[static_cast<std::size_t>(i) + 2]));
        ++cells;
    }
    if (marks < 1 || cells < 1) throw std::invalid_argument("control CSV is empty");
    return Control(horizon, cells, marks, std::move(values));
}

}  // namespace nematic
