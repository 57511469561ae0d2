#include "nematic/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "fft.hpp"
#include "nematic/kernels.hpp"

namespace nematic {

namespace {

const simd::KernelTable& K() { return simd::active_kernels(); }

int round_up_even(int m) { return m % 2 == 0 ? m : m + 1; }

void require_same_grid(const TorusGrid& a, const TorusGrid& b) {
    if (!(a == b)) throw std::invalid_argument("fields live on different grids");
}

}  // namespace

// ---- TorusGrid -----------------------------------------------------------

TorusGrid::TorusGrid(int modes, Rational dealias) : n_(modes), dealias_(dealias) {
    if (modes < 8 || modes % 2 != 0)
        throw std::invalid_argument("modes_per_dim must be even and >= 8, got " + std::to_string(modes));
    if (dealias.den <= 0 || dealias.num < dealias.den)
        throw std::invalid_argument("dealias factor must be a rational >= 1");
    padded_ = round_up_even((n_ * dealias.num + dealias.den - 1) / dealias.den);

    auto t = std::make_shared<Tables>();
    const std::size_t total = size();
    t->k1.resize(total);
    t->k2.resize(total);
    t->k_sq.resize(total);
    t->inv_k_sq.resize(total);
    t->mask.resize(total);
    t->area_mask.resize(total);
    t->grad_weights.resize(total);
    for (int j2 = 0; j2 < n_; ++j2) {
        for (int j1 = 0; j1 < n_; ++j1) {
            const std::size_t i = static_cast<std::size_t>(j2) * n_ + j1;
            const int a = wavenumber(j1);
            const int b = wavenumber(j2);
            const bool keep = a != -n_ / 2 && b != -n_ / 2;
            const double ksq = static_cast<double>(a * a + b * b);
            t->k1[i] = keep ? a : 0.0;
            t->k2[i] = keep ? b : 0.0;
            t->k_sq[i] = keep ? ksq : 0.0;
            t->inv_k_sq[i] = (keep && ksq > 0) ? 1.0 / ksq : 0.0;
            t->mask[i] = keep ? 1.0 : 0.0;
            t->area_mask[i] = keep ? kArea : 0.0;
            t->grad_weights[i] = keep ? kArea * ksq : 0.0;
        }
    }
    tables_ = std::move(t);
}

int exact_quadrature_size(const TorusGrid& grid, int degree) {
    const int m = round_up_even(std::max(1, degree) * grid.max_wavenumber() + 1);
    return std::max(m, grid.modes());
}

// ---- transforms ----------------------------------------------------------

void to_grid(const ScalarField& f, int m, std::span<double> out) {
    const TorusGrid& g = f.grid();
    const int n = g.modes();
    if (m < n) throw std::invalid_argument("physical grid smaller than the spectral grid");
    const std::size_t total = static_cast<std::size_t>(m) * m;
    if (out.size() < total) throw std::invalid_argument("output buffer too small");
    auto& s = detail::thread_scratch(total);
    std::fill(s.a.begin(), s.a.begin() + total, cplx{});
    const auto c = f.coefficients();
    const int kmax = g.max_wavenumber();
    for (int j2 = 0; j2 < n; ++j2) {
        const int b = g.wavenumber(j2);
        if (b < -kmax) continue;
        const std::size_t row = static_cast<std::size_t>(b >= 0 ? b : b + m) * m;
        for (int j1 = 0; j1 < n; ++j1) {
            const int a = g.wavenumber(j1);
            if (a < -kmax) continue;
            s.a[row + (a >= 0 ? a : a + m)] = c[static_cast<std::size_t>(j2) * n + j1];
        }
    }
    detail::Fft2d::of_size(m).backward(s.a.data(), s.b.data());
    for (std::size_t i = 0; i < total; ++i) out[i] = s.b[i].real();
}

std::vector<double> to_grid(const ScalarField& f, int m) {
    std::vector<double> out(static_cast<std::size_t>(m) * m);
    to_grid(f, m, out);
    return out;
}

ScalarField from_grid(const TorusGrid& grid, std::span<const double> values, int m) {
    const int n = grid.modes();
    if (m < n) throw std::invalid_argument("physical grid smaller than the spectral grid");
    const std::size_t total = static_cast<std::size_t>(m) * m;
    if (values.size() < total) throw std::invalid_argument("input buffer too small");
    auto& s = detail::thread_scratch(total);
    for (std::size_t i = 0; i < total; ++i) s.a[i] = cplx(values[i], 0.0);
    detail::Fft2d::of_size(m).forward(s.a.data(), s.b.data());
    const double scale = 1.0 / static_cast<double>(total);
    ScalarField f(grid);
    auto c = f.coefficients();
    const int kmax = grid.max_wavenumber();
    for (int j2 = 0; j2 < n; ++j2) {
        const int b = grid.wavenumber(j2);
        if (b < -kmax) continue;
        const std::size_t row = static_cast<std::size_t>(b >= 0 ? b : b + m) * m;
        for (int j1 = 0; j1 < n; ++j1) {
            const int a = grid.wavenumber(j1);
            if (a < -kmax) continue;
            c[static_cast<std::size_t>(j2) * n + j1] = s.b[row + (a >= 0 ? a : a + m)] * scale;
        }
    }
    return f;
}

ScalarField resample(const ScalarField& f, const TorusGrid& target) {
    ScalarField out(target);
    const int kmax = std::min(f.grid().max_wavenumber(), target.max_wavenumber());
    for (int b = -kmax; b <= kmax; ++b)
        for (int a = -kmax; a <= kmax; ++a)
            out.coefficients()[target.flat_index(a, b)] = f.coefficient(a, b);
    return out;
}

VectorField resample(const VectorField& f, const TorusGrid& target) {
    return VectorField(resample(f[0], target), resample(f[1], target));
}

ScalarField truncate_band(const ScalarField& f, int max_k) {
    ScalarField out = f;
    const TorusGrid& g = f.grid();
    auto c = out.coefficients();
    for (std::size_t i = 0; i < c.size(); ++i) {
        const int a = g.wavenumber(static_cast<int>(i % g.modes()));
        const int b = g.wavenumber(static_cast<int>(i / g.modes()));
        if (std::max(std::abs(a), std::abs(b)) > max_k) c[i] = 0.0;
    }
    return out;
}

VectorField truncate_band(const VectorField& f, int max_k) {
    return VectorField(truncate_band(f[0], max_k), truncate_band(f[1], max_k));
}

// ---- ScalarField -----------------------------------------------------------

ScalarField::ScalarField(TorusGrid grid) : grid_(std::move(grid)), coeffs_(grid_.size()) {}

ScalarField ScalarField::sample(const TorusGrid& grid, const std::function<double(double, double)>& fn,
                                int oversample) {
    const int m = grid.modes() * std::max(1, oversample);
    std::vector<double> v(static_cast<std::size_t>(m) * m);
    const double h = kSide / m;
    for (int j = 0; j < m; ++j)
        for (int i = 0; i < m; ++i) v[static_cast<std::size_t>(j) * m + i] = fn(i * h, j * h);
    return from_grid(grid, v, m);
}

ScalarField ScalarField::constant(const TorusGrid& grid, double value) {
    ScalarField f(grid);
    f.coeffs_[0] = value;
    return f;
}

void ScalarField::set_mode(int k1, int k2, cplx value) {
    const int kmax = grid_.max_wavenumber();
    if (std::abs(k1) > kmax || std::abs(k2) > kmax)
        throw std::out_of_range("wave number outside the retained band");
    if (k1 == 0 && k2 == 0) {
        coeffs_[0] = value.real();
        return;
    }
    coeffs_[grid_.flat_index(k1, k2)] = value;
    coeffs_[grid_.flat_index(-k1, -k2)] = std::conj(value);
}

std::vector<double> ScalarField::values(int grid_size) const {
    return to_grid(*this, grid_size > 0 ? grid_size : grid_.modes());
}

bool ScalarField::is_finite() const {
    return std::all_of(coeffs_.begin(), coeffs_.end(),
                       [](const cplx& c) { return std::isfinite(c.real()) && std::isfinite(c.imag()); });
}

double ScalarField::conjugate_symmetry_defect() const {
    double worst = 0.0;
    const int kmax = grid_.max_wavenumber();
    for (int b = -kmax; b <= kmax; ++b)
        for (int a = -kmax; a <= kmax; ++a)
            worst = std::max(worst, std::abs(coefficient(a, b) - std::conj(coefficient(-a, -b))));
    return worst;
}

ScalarField& ScalarField::operator+=(const ScalarField& other) {
    require_same_grid(grid_, other.grid_);
    for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] += other.coeffs_[i];
    return *this;
}

ScalarField& ScalarField::operator-=(const ScalarField& other) {
    require_same_grid(grid_, other.grid_);
    for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] -= other.coeffs_[i];
    return *this;
}

ScalarField& ScalarField::operator*=(double s) {
    for (auto& c : coeffs_) c *= s;
    return *this;
}

ScalarField& ScalarField::axpy(double s, const ScalarField& other) {
    require_same_grid(grid_, other.grid_);
    for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] += s * other.coeffs_[i];
    return *this;
}

// ---- VectorField -----------------------------------------------------------

VectorField::VectorField(ScalarField first, ScalarField second)
    : c_{std::move(first), std::move(second)} {
    require_same_grid(c_[0].grid(), c_[1].grid());
}

VectorField VectorField::constant(const TorusGrid& grid, double a, double b) {
    return VectorField(ScalarField::constant(grid, a), ScalarField::constant(grid, b));
}

VectorField& VectorField::operator+=(const VectorField& o) {
    c_[0] += o.c_[0];
    c_[1] += o.c_[1];
    return *this;
}

VectorField& VectorField::operator-=(const VectorField& o) {
    c_[0] -= o.c_[0];
    c_[1] -= o.c_[1];
    return *this;
}

VectorField& VectorField::operator*=(double s) {
    c_[0] *= s;
    c_[1] *= s;
    return *this;
}

VectorField& VectorField::axpy(double s, const VectorField& o) {
    c_[0].axpy(s, o.c_[0]);
    c_[1].axpy(s, o.c_[1]);
    return *this;
}

// ---- DivergenceFreeField ----------------------------------------------------

DivergenceFreeField DivergenceFreeField::from_stream_function(const ScalarField& psi) {
    ScalarField u1 = derivative(psi, 1);
    ScalarField u2 = derivative(psi, 0);
    u2 *= -1.0;
    return DivergenceFreeField(VectorField(std::move(u1), std::move(u2)));
}

DivergenceFreeField DivergenceFreeField::checked(VectorField v, double tolerance) {
    const double scale = l2(v) / std::sqrt(kArea);
    const double mean = std::hypot(std::abs(v[0].coefficients()[0]), std::abs(v[1].coefficients()[0]));
    if (divergence_residual(v) > tolerance || mean > tolerance * std::max(scale, 1e-300))
        throw std::invalid_argument("field is not divergence-free with zero mean");
    return DivergenceFreeField(std::move(v));
}

// ---- differential operators ------------------------------------------------

ScalarField derivative(const ScalarField& f, int axis) {
    ScalarField out(f.grid());
    const auto k = axis == 0 ? f.grid().k1() : f.grid().k2();
    K().mul_ik(out.coefficients().data(), f.coefficients().data(), k.data(), k.size());
    return out;
}

ScalarField laplacian(const ScalarField& f) {
    ScalarField out = f;
    const auto ksq = f.grid().k_squared();
    K().scale_real(out.coefficients().data(), ksq.data(), ksq.size());
    out *= -1.0;
    return out;
}

VectorField laplacian(const VectorField& f) { return VectorField(laplacian(f[0]), laplacian(f[1])); }

ScalarField divergence(const VectorField& w) {
    ScalarField d = derivative(w[0], 0);
    d += derivative(w[1], 1);
    return d;
}

DivergenceFreeField leray_project(const VectorField& w) {
    VectorField p = w;
    const TorusGrid& g = w.grid();
    K().leray(p[0].coefficients().data(), p[1].coefficients().data(), g.k1().data(), g.k2().data(),
              g.inv_k_squared().data(), g.size());
    p[0].coefficients()[0] = 0.0;
    p[1].coefficients()[0] = 0.0;
    return DivergenceFreeField::unchecked(std::move(p));
}

double divergence_residual(const VectorField& w) {
    const double d = l2(divergence(w));
    const double s = h1_semi(w);
    return s > 0.0 ? d / s : d;
}

// ---- products -------------------------------------------------------------------

ScalarField dealias_product(std::span<const ScalarField* const> factors) {
    if (factors.empty()) throw std::invalid_argument("dealias_product needs at least one factor");
    const TorusGrid& g = factors[0]->grid();
    const int m = g.padded_size();
    const std::size_t total = static_cast<std::size_t>(m) * m;
    std::vector<double> acc = to_grid(*factors[0], m);
    std::vector<double> tmp(total);
    for (std::size_t i = 1; i < factors.size(); ++i) {
        require_same_grid(g, factors[i]->grid());
        to_grid(*factors[i], m, tmp);
        K().multiply(acc.data(), acc.data(), tmp.data(), total);
    }
    return from_grid(g, acc, m);
}

ScalarField dealias_product(const ScalarField& a, const ScalarField& b) {
    const ScalarField* f[] = {&a, &b};
    return dealias_product(f);
}

// ---- norms -------------------------------------------------------------------------

double inner(const ScalarField& a, const ScalarField& b) {
    require_same_grid(a.grid(), b.grid());
    const auto w = a.grid().area_weights();
    return K().weighted_inner(a.coefficients().data(), b.coefficients().data(), w.data(), w.size());
}

double inner(const VectorField& a, const VectorField& b) { return inner(a[0], b[0]) + inner(a[1], b[1]); }

namespace {
double weighted(const ScalarField& f, std::span<const double> w) {
    return K().weighted_norm2(f.coefficients().data(), w.data(), w.size());
}
}  // namespace

double l2(const ScalarField& f) { return std::sqrt(weighted(f, f.grid().area_weights())); }

double l2(const VectorField& f) {
    const auto w = f.grid().area_weights();
    return std::sqrt(weighted(f[0], w) + weighted(f[1], w));
}

double h1_semi(const ScalarField& f) { return std::sqrt(weighted(f, f.grid().gradient_weights())); }

double h1_semi(const VectorField& f) {
    const auto w = f.grid().gradient_weights();
    return std::sqrt(weighted(f[0], w) + weighted(f[1], w));
}

double v_norm(const ScalarField& f) { return std::hypot(l2(f), h1_semi(f)); }
double v_norm(const VectorField& f) { return std::hypot(l2(f), h1_semi(f)); }

namespace {
void require_even_q(int q) {
    if (q < 2 || q % 2 != 0) throw std::invalid_argument("L^q norm needs an even q >= 2, got " + std::to_string(q));
}
}  // namespace

double lq(const ScalarField& f, int q) {
    require_even_q(q);
    const int m = exact_quadrature_size(f.grid(), q);
    const auto v = to_grid(f, m);
    double acc = 0.0;
    for (double x : v) acc += std::pow(x * x, q / 2);
    return std::pow(kArea * acc / static_cast<double>(v.size()), 1.0 / q);
}

double lq(const VectorField& f, int q) {
    require_even_q(q);
    const int m = exact_quadrature_size(f.grid(), q);
    const auto a = to_grid(f[0], m);
    const auto b = to_grid(f[1], m);
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += std::pow(a[i] * a[i] + b[i] * b[i], q / 2);
    return std::pow(kArea * acc / static_cast<double>(a.size()), 1.0 / q);
}

double dual_norm(const VectorField& w) {
    const TorusGrid& g = w.grid();
    double acc = 0.0;
    const auto mask = g.retained();
    const auto ksq = g.k_squared();
    for (int c = 0; c < 2; ++c) {
        const auto coeffs = w[c].coefficients();
        for (std::size_t i = 0; i < coeffs.size(); ++i) acc += mask[i] * std::norm(coeffs[i]) / (1.0 + ksq[i]);
    }
    return std::sqrt(kArea * acc);
}

Norms norms(const ScalarField& f) {
    const double a = l2(f);
    const double b = h1_semi(f);
    return {a, b, std::hypot(a, b)};
}

Norms norms(const VectorField& f) {
    const double a = l2(f);
    const double b = h1_semi(f);
    return {a, b, std::hypot(a, b)};
}

}  // namespace nematic
