#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <functional>
#include <memory>
#include <numbers>
#include <span>
#include <vector>

namespace nematic {

using cplx = std::complex<double>;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kSide = 2.0 * kPi;
inline constexpr double kArea = kSide * kSide;

/// Grid padding factor num/den used for products on the physical grid.
struct Rational {
    int num = 3;
    int den = 2;
    double value() const { return static_cast<double>(num) / den; }
    bool operator==(const Rational&) const = default;
};

/// Periodic torus [0, 2pi)^2 with N Fourier modes per dimension.
///
/// Wave numbers run over -N/2 .. N/2-1. The Nyquist row/column (k = -N/2)
/// has no real-valued partner and is never populated, so the retained band
/// is |k_i| <= N/2 - 1. Coefficients are stored row-major with the x1 wave
/// number contiguous: index = j2 * N + j1.
class TorusGrid {
public:
    explicit TorusGrid(int modes, Rational dealias = {3, 2});

    int modes() const { return n_; }
    Rational dealias() const { return dealias_; }
    /// Physical grid size used for dealiased products (even, >= modes).
    int padded_size() const { return padded_; }
    std::size_t size() const { return static_cast<std::size_t>(n_) * n_; }
    int max_wavenumber() const { return n_ / 2 - 1; }

    int wavenumber(int index) const { return index < n_ / 2 ? index : index - n_; }
    /// Storage index of wave number k (|k| <= N/2 - 1 or k = -N/2).
    int index_of(int k) const { return k >= 0 ? k : k + n_; }
    std::size_t flat_index(int k1, int k2) const {
        return static_cast<std::size_t>(index_of(k2)) * n_ + index_of(k1);
    }

    std::span<const double> k1() const { return tables_->k1; }
    std::span<const double> k2() const { return tables_->k2; }
    std::span<const double> k_squared() const { return tables_->k_sq; }
    /// 1/|k|^2, zero on the mean mode.
    std::span<const double> inv_k_squared() const { return tables_->inv_k_sq; }
    /// 1 on retained modes, 0 on the Nyquist row/column.
    std::span<const double> retained() const { return tables_->mask; }
    /// Area-weighted mask (Parseval weights).
    std::span<const double> area_weights() const { return tables_->area_mask; }
    /// Area * |k|^2 on retained modes.
    std::span<const double> gradient_weights() const { return tables_->grad_weights; }

    bool operator==(const TorusGrid& other) const {
        return n_ == other.n_ && dealias_ == other.dealias_;
    }

private:
    struct Tables {
        std::vector<double> k1, k2, k_sq, inv_k_sq, mask, area_mask, grad_weights;
    };
    int n_;
    Rational dealias_;
    int padded_;
    std::shared_ptr<const Tables> tables_;
};

/// Smallest even grid size that integrates a degree-`degree` polynomial in
/// band-limited fields on `grid` exactly.
int exact_quadrature_size(const TorusGrid& grid, int degree);

/// Real scalar field held by its Fourier coefficients, f(x) = sum_k c_k e^{ik.x}.
class ScalarField {
public:
    explicit ScalarField(TorusGrid grid);

    /// Samples `fn(x1, x2)` on an `oversample`-times finer grid and truncates.
    static ScalarField sample(const TorusGrid& grid, const std::function<double(double, double)>& fn,
                              int oversample = 1);
    static ScalarField constant(const TorusGrid& grid, double value);

    const TorusGrid& grid() const { return grid_; }
    std::span<cplx> coefficients() { return coeffs_; }
    std::span<const cplx> coefficients() const { return coeffs_; }

    cplx coefficient(int k1, int k2) const { return coeffs_[grid_.flat_index(k1, k2)]; }
    /// Sets the (k1, k2) coefficient and its conjugate partner.
    void set_mode(int k1, int k2, cplx value);

    /// Physical samples on a grid_size x grid_size grid (default: modes()).
    std::vector<double> values(int grid_size = 0) const;

    bool is_finite() const;
    /// max |c_k - conj(c_{-k})| over retained modes.
    double conjugate_symmetry_defect() const;

    ScalarField& operator+=(const ScalarField& other);
    ScalarField& operator-=(const ScalarField& other);
    ScalarField& operator*=(double s);
    /// this += s * other
    ScalarField& axpy(double s, const ScalarField& other);

    friend ScalarField operator+(ScalarField a, const ScalarField& b) { return a += b; }
    friend ScalarField operator-(ScalarField a, const ScalarField& b) { return a -= b; }
    friend ScalarField operator*(double s, ScalarField a) { return a *= s; }

private:
    TorusGrid grid_;
    std::vector<cplx> coeffs_;
};

/// R^2-valued field; both components share a grid.
class VectorField {
public:
    explicit VectorField(const TorusGrid& grid) : c_{ScalarField(grid), ScalarField(grid)} {}
    VectorField(ScalarField first, ScalarField second);

    static VectorField constant(const TorusGrid& grid, double a, double b);

    const TorusGrid& grid() const { return c_[0].grid(); }
    ScalarField& operator[](int i) { return c_[i]; }
    const ScalarField& operator[](int i) const { return c_[i]; }

    bool is_finite() const { return c_[0].is_finite() && c_[1].is_finite(); }

    VectorField& operator+=(const VectorField& o);
    VectorField& operator-=(const VectorField& o);
    VectorField& operator*=(double s);
    VectorField& axpy(double s, const VectorField& o);

    friend VectorField operator+(VectorField a, const VectorField& b) { return a += b; }
    friend VectorField operator-(VectorField a, const VectorField& b) { return a -= b; }
    friend VectorField operator*(double s, VectorField a) { return a *= s; }

private:
    std::array<ScalarField, 2> c_;
};

/// Divergence-free, zero-mean vector field (an element of the space H).
///
/// Obtained from `leray_project`, from a stream function, or through the
/// closed arithmetic below.
class DivergenceFreeField {
public:
    explicit DivergenceFreeField(const TorusGrid& grid) : v_(grid) {}

    static DivergenceFreeField from_stream_function(const ScalarField& psi);
    /// Wraps `v`, throwing std::invalid_argument if its relative divergence
    /// or mean exceeds `tolerance`.
    static DivergenceFreeField checked(VectorField v, double tolerance = 1e-12);
    /// Wraps `v` without checking. For operations known to preserve the constraint.
    static DivergenceFreeField unchecked(VectorField v) { return DivergenceFreeField(std::move(v)); }

    const VectorField& field() const { return v_; }
    const ScalarField& operator[](int i) const { return v_[i]; }
    const TorusGrid& grid() const { return v_.grid(); }
    bool is_finite() const { return v_.is_finite(); }

    DivergenceFreeField& operator+=(const DivergenceFreeField& o) { v_ += o.v_; return *this; }
    DivergenceFreeField& operator-=(const DivergenceFreeField& o) { v_ -= o.v_; return *this; }
    DivergenceFreeField& operator*=(double s) { v_ *= s; return *this; }
    DivergenceFreeField& axpy(double s, const DivergenceFreeField& o) { v_.axpy(s, o.v_); return *this; }

    friend DivergenceFreeField operator+(DivergenceFreeField a, const DivergenceFreeField& b) { return a += b; }
    friend DivergenceFreeField operator-(DivergenceFreeField a, const DivergenceFreeField& b) { return a -= b; }
    friend DivergenceFreeField operator*(double s, DivergenceFreeField a) { return a *= s; }

private:
    explicit DivergenceFreeField(VectorField v) : v_(std::move(v)) {}
    VectorField v_;
};

// ---- transforms ---------------------------------------------------------

/// Inverse transform onto an m x m physical grid (m >= modes). Writes m*m values.
void to_grid(const ScalarField& f, int m, std::span<double> out);
std::vector<double> to_grid(const ScalarField& f, int m);

/// Forward transform of m x m physical samples, truncated to the retained band.
ScalarField from_grid(const TorusGrid& grid, std::span<const double> values, int m);

/// Same field on another resolution (truncating or zero-padding the spectrum).
ScalarField resample(const ScalarField& f, const TorusGrid& target);
VectorField resample(const VectorField& f, const TorusGrid& target);

/// Zeroes every coefficient with max(|k1|, |k2|) > max_k.
ScalarField truncate_band(const ScalarField& f, int max_k);
VectorField truncate_band(const VectorField& f, int max_k);

// ---- differential operators --------------------------------------------

ScalarField derivative(const ScalarField& f, int axis);
ScalarField laplacian(const ScalarField& f);
VectorField laplacian(const VectorField& f);
ScalarField divergence(const VectorField& w);
DivergenceFreeField leray_project(const VectorField& w);

/// |div w|_{L2} / max(||w||, tiny): relative divergence residual.
double divergence_residual(const VectorField& w);

// ---- products -----------------------------------------------------------

/// Pointwise product of all factors on the padded grid, truncated back.
ScalarField dealias_product(std::span<const ScalarField* const> factors);
ScalarField dealias_product(const ScalarField& a, const ScalarField& b);

// ---- norms and inner products ------------------------------------------

double inner(const ScalarField& a, const ScalarField& b);
double inner(const VectorField& a, const VectorField& b);
double l2(const ScalarField& f);
double l2(const VectorField& f);
/// |grad f|_{L2}
double h1_semi(const ScalarField& f);
double h1_semi(const VectorField& f);
/// sqrt(|f|^2 + ||f||^2)
double v_norm(const ScalarField& f);
double v_norm(const VectorField& f);
/// |f|_{L^q} for even q >= 2, by exact quadrature. Throws on odd or non-positive q.
double lq(const ScalarField& f, int q);
double lq(const VectorField& f, int q);
/// Discrete dual norm sqrt(area * sum |w_k|^2 / (1 + |k|^2)).
double dual_norm(const VectorField& w);

struct Norms {
    double l2;
    double h1_semi;
    double v_norm;
};
Norms norms(const ScalarField& f);
Norms norms(const VectorField& f);

}  // namespace nematic
