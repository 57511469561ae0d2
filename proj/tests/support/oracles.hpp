#pragma once

// Reference evaluations that bypass the FFT path: direct Fourier sums and
// plain trapezoid quadrature on uniform grids.

#include <cmath>
#include <functional>
#include <vector>

#include "nematic/spectral.hpp"

namespace oracle {

using nematic::cplx;
using nematic::kArea;
using nematic::kSide;
using nematic::ScalarField;
using nematic::TorusGrid;
using nematic::VectorField;

using Fn = std::function<double(double, double)>;

/// f(x) = sum_k c_k e^{ik.x}, summed term by term.
inline double point_value(const ScalarField& f, double x1, double x2) {
    const TorusGrid& g = f.grid();
    const int km = g.max_wavenumber();
    double s = 0.0;
    for (int k2 = -km; k2 <= km; ++k2)
        for (int k1 = -km; k1 <= km; ++k1) s += (f.coefficient(k1, k2) * std::polar(1.0, k1 * x1 + k2 * x2)).real();
    return s;
}

inline Fn as_function(const ScalarField& f) {
    return [f](double x, double y) { return point_value(f, x, y); };
}

/// Mean-weighted trapezoid rule on an m x m grid; exact for trigonometric
/// polynomials of degree < m per direction.
inline double integrate(const Fn& fn, int m) {
    double s = 0.0;
    const double h = kSide / m;
    for (int j = 0; j < m; ++j)
        for (int i = 0; i < m; ++i) s += fn(i * h, j * h);
    return s * kArea / (static_cast<double>(m) * m);
}

/// c_k = (1/area) int fn e^{-ik.x}, by quadrature on an m x m grid.
inline cplx coefficient(const Fn& fn, int k1, int k2, int m) {
    const double h = kSide / m;
    cplx s = 0.0;
    for (int j = 0; j < m; ++j)
        for (int i = 0; i < m; ++i) s += fn(i * h, j * h) * std::polar(1.0, -(k1 * i * h + k2 * j * h));
    return s / (static_cast<double>(m) * m);
}

/// Projection of fn onto the retained band of `grid` by direct quadrature.
inline ScalarField project(const TorusGrid& grid, const Fn& fn, int m) {
    const int km = grid.max_wavenumber();
    const double h = kSide / m;
    std::vector<double> samples(static_cast<std::size_t>(m) * m);
    for (int j = 0; j < m; ++j)
        for (int i = 0; i < m; ++i) samples[static_cast<std::size_t>(j) * m + i] = fn(i * h, j * h);
    ScalarField out(grid);
    for (int k2 = -km; k2 <= km; ++k2)
        for (int k1 = -km; k1 <= km; ++k1) {
            cplx s = 0.0;
            for (int j = 0; j < m; ++j)
                for (int i = 0; i < m; ++i)
                    s += samples[static_cast<std::size_t>(j) * m + i] * std::polar(1.0, -(k1 * i * h + k2 * j * h));
            out.coefficients()[grid.flat_index(k1, k2)] = s / (static_cast<double>(m) * m);
        }
    return out;
}

/// Partial derivative by differentiating the Fourier sum term by term.
inline Fn partial(const ScalarField& f, int axis) {
    return [f, axis](double x1, double x2) {
        const TorusGrid& g = f.grid();
        const int km = g.max_wavenumber();
        double s = 0.0;
        for (int k2 = -km; k2 <= km; ++k2)
            for (int k1 = -km; k1 <= km; ++k1) {
                const double k = axis == 0 ? k1 : k2;
                s += (cplx(0.0, k) * f.coefficient(k1, k2) * std::polar(1.0, k1 * x1 + k2 * x2)).real();
            }
        return s;
    };
}

/// Tabulated field values and first derivatives on an m x m grid, for cheap
/// repeated quadrature.
struct Table {
    int m;
    std::vector<double> v, d1, d2;
};

inline Table tabulate(const ScalarField& f, int m) {
    Table t{m, {}, {}, {}};
    const double h = kSide / m;
    const Fn dx = partial(f, 0), dy = partial(f, 1);
    for (int j = 0; j < m; ++j)
        for (int i = 0; i < m; ++i) {
            t.v.push_back(point_value(f, i * h, j * h));
            t.d1.push_back(dx(i * h, j * h));
            t.d2.push_back(dy(i * h, j * h));
        }
    return t;
}

/// b(u, v, w) = sum_ij int u_i d_i v_j w_j by quadrature of direct sums.
inline double trilinear_b(const VectorField& u, const VectorField& v, const VectorField& w, int m) {
    const Table u1 = tabulate(u[0], m), u2 = tabulate(u[1], m);
    const Table v1 = tabulate(v[0], m), v2 = tabulate(v[1], m);
    const Table w1 = tabulate(w[0], m), w2 = tabulate(w[1], m);
    double s = 0.0;
    for (std::size_t p = 0; p < u1.v.size(); ++p) {
        s += (u1.v[p] * v1.d1[p] + u2.v[p] * v1.d2[p]) * w1.v[p];
        s += (u1.v[p] * v2.d1[p] + u2.v[p] * v2.d2[p]) * w2.v[p];
    }
    return s * kArea / (static_cast<double>(m) * m);
}

/// m(t1, t2, u) = -sum_ijk int d_i t1^k d_j t2^k d_j u_i.
inline double trilinear_m(const VectorField& t1, const VectorField& t2, const VectorField& u, int m) {
    const Table a1 = tabulate(t1[0], m), a2 = tabulate(t1[1], m);
    const Table b1 = tabulate(t2[0], m), b2 = tabulate(t2[1], m);
    const Table u1 = tabulate(u[0], m), u2 = tabulate(u[1], m);
    auto d = [](const Table& t, int i, std::size_t p) { return i == 0 ? t.d1[p] : t.d2[p]; };
    double s = 0.0;
    for (std::size_t p = 0; p < a1.v.size(); ++p)
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) {
                const double sij = d(a1, i, p) * d(b1, j, p) + d(a2, i, p) * d(b2, j, p);
                s += sij * d(i == 0 ? u1 : u2, j, p);
            }
    return -s * kArea / (static_cast<double>(m) * m);
}

}  // namespace oracle
