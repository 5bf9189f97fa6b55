#ifndef TORUSFLOW_GRID_HPP
#define TORUSFLOW_GRID_HPP

#include <complex>
#include <functional>
#include <memory>
#include <span>
#include <vector>

namespace torusflow {

/// Discrete flat torus R^2/(aZ x bZ) on an nx-by-ny uniform grid with exact
/// spectral calculus. Immutable after construction; safe to share across
/// threads. Node (ix, iy) sits at (ix*a/nx, iy*b/ny), values stored row-major
/// with y as the slow index.
///
/// Spectral layout follows the real-to-complex convention: x frequencies
/// m = 0..nx/2 (conjugate half), y frequencies n = i <= ny/2 ? i : i-ny.
/// The Laplacian symbol is exactly -|xi|^2 = -4*pi^2*(m^2/a^2 + n^2/b^2) for
/// every retained mode, Nyquist included.
class TorusGrid {
public:
    TorusGrid(double a, double b, int nx, int ny);
    ~TorusGrid();

    TorusGrid(const TorusGrid&) = delete;
    TorusGrid& operator=(const TorusGrid&) = delete;

    double a() const { return a_; }
    double b() const { return b_; }
    int nx() const { return nx_; }
    int ny() const { return ny_; }
    int size() const { return nx_ * ny_; }
    double area() const { return a_ * b_; }
    double cell_area() const { return cell_area_; }
    double hx() const { return a_ / nx_; }
    double hy() const { return b_ / ny_; }
    double min_spacing() const { return hx() < hy() ? hx() : hy(); }

    int spectral_size() const { return ny_ * (nx_ / 2 + 1); }
    /// |xi|^2 per r2c mode.
    std::span<const double> xi_sq() const { return xi_sq_; }
    /// Parseval weight per r2c mode (2 for duplicated columns, else 1).
    std::span<const double> mode_weight() const { return weight_; }

    double x(int ix) const { return ix * hx(); }
    double y(int iy) const { return iy * hy(); }

    /// Forward transform to normalized coefficients c_k = F_k/(nx*ny), so
    /// that f(x) = sum_k c_k exp(i xi_k . x). Thread-safe.
    void to_spectral(std::span<const double> phys,
                     std::span<std::complex<double>> spec) const;
    /// Inverse of to_spectral. The spectral input is left untouched.
    void to_physical(std::span<const std::complex<double>> spec,
                     std::span<double> phys) const;

private:
    double a_, b_;
    int nx_, ny_;
    double cell_area_;
    std::vector<double> xi_sq_;
    std::vector<double> weight_;

    struct Plans;
    std::unique_ptr<Plans> plans_;
};

/// Real scalar function sampled on a TorusGrid. Value semantics; the grid is
/// shared and immutable.
class Field {
public:
    Field() = default;
    explicit Field(std::shared_ptr<const TorusGrid> grid, double fill = 0.0);

    static Field from_function(std::shared_ptr<const TorusGrid> grid,
                               const std::function<double(double, double)>& f);

    const TorusGrid& grid() const { return *grid_; }
    const std::shared_ptr<const TorusGrid>& grid_ptr() const { return grid_; }

    int size() const { return static_cast<int>(values_.size()); }
    double operator[](int i) const { return values_[i]; }
    double& operator[](int i) { return values_[i]; }
    double at(int ix, int iy) const { return values_[iy * grid_->nx() + ix]; }
    double& at(int ix, int iy) { return values_[iy * grid_->nx() + ix]; }

    std::span<const double> values() const { return values_; }
    std::span<double> values() { return values_; }

    bool all_finite() const;

private:
    std::shared_ptr<const TorusGrid> grid_;
    std::vector<double> values_;
};

// ---- quadrature and norms -------------------------------------------------

/// Discrete integral over the torus; exact for trigonometric polynomials
/// below Nyquist. Compensated summation keeps the 1e-12 relative contract.
double integral(const Field& f);
double mean(const Field& f);
/// L^2 inner product integral(f*g).
double dot(const Field& f, const Field& g);
double norm_l2(const Field& f);
/// H^1 norm (||f||_2^2 + ||grad f||_2^2)^{1/2}, gradient evaluated spectrally.
double norm_V(const Field& f);
/// Dual norm via the multiplier 1/(1+|xi|^2) (Riesz map of (I-Laplacian)^-1).
double norm_Vstar(const Field& f);
double grad_norm_sq(const Field& f);

// ---- spectral operators ---------------------------------------------------

Field laplacian(const Field& f);
/// Zero-mean g with -laplacian(g) = f - mean(f).
Field inv_laplacian_zero_mean(const Field& f);
/// g with (alpha - beta*laplacian) g = f; requires alpha > 0.
Field solve_helmholtz(const Field& f, double alpha, double beta);
/// 2/3-rule low-pass: zero modes with m > nx/3 or |n| > ny/3.
Field dealias(const Field& f);

// ---- pointwise algebra ----------------------------------------------------

Field operator+(const Field& f, const Field& g);
Field operator-(const Field& f, const Field& g);
Field operator*(const Field& f, const Field& g);  // pointwise
Field operator*(double s, const Field& f);
Field operator+(const Field& f, double c);
Field operator-(const Field& f, double c);

Field exp(const Field& f);
Field log(const Field& f);

/// y + alpha*x
Field axpy(double alpha, const Field& x, const Field& y);

double min_value(const Field& f);
double max_value(const Field& f);

}  // namespace torusflow

#endif
