#include "torusflow/grid.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>

#include "torusflow/errors.hpp"

namespace torusflow {

namespace {

// FFTW's planner is not thread-safe; execution with distinct arrays is.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

double kahan_sum(std::span<const double> v) {
    double sum = 0.0, comp = 0.0;
    for (double x : v) {
        double y = x - comp;
        double t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    return sum;
}

}  // namespace

struct TorusGrid::Plans {
    fftw_plan r2c = nullptr;
    fftw_plan c2r = nullptr;

    ~Plans() {
        std::lock_guard<std::mutex> lock(planner_mutex());
        if (r2c) fftw_destroy_plan(r2c);
        if (c2r) fftw_destroy_plan(c2r);
    }
};

TorusGrid::TorusGrid(double a, double b, int nx, int ny)
    : a_(a), b_(b), nx_(nx), ny_(ny), plans_(std::make_unique<Plans>()) {
    if (!(a > 0.0) || !(b > 0.0)) {
        throw InvalidGrid("torus side lengths must be positive");
    }
    if (nx < 4 || ny < 4 || nx % 2 != 0 || ny % 2 != 0) {
        throw InvalidGrid("grid resolutions must be even and >= 4");
    }
    cell_area_ = (a_ / nx_) * (b_ / ny_);

    const double two_pi = 2.0 * std::numbers::pi;
    const int nxc = nx_ / 2 + 1;
    xi_sq_.resize(spectral_size());
    weight_.resize(spectral_size());
    for (int iy = 0; iy < ny_; ++iy) {
        const int n = iy <= ny_ / 2 ? iy : iy - ny_;
        const double ky = two_pi * n / b_;
        for (int jx = 0; jx < nxc; ++jx) {
            const double kx = two_pi * jx / a_;
            const int idx = iy * nxc + jx;
            xi_sq_[idx] = kx * kx + ky * ky;
            weight_[idx] = (jx == 0 || jx == nx_ / 2) ? 1.0 : 2.0;
        }
    }

    std::vector<double> phys(static_cast<size_t>(size()));
    std::vector<std::complex<double>> spec(static_cast<size_t>(spectral_size()));
    std::lock_guard<std::mutex> lock(planner_mutex());
    // FFTW_UNALIGNED so the new-array execute interface accepts any buffer.
    plans_->r2c = fftw_plan_dft_r2c_2d(
        ny_, nx_, phys.data(), reinterpret_cast<fftw_complex*>(spec.data()),
        FFTW_ESTIMATE | FFTW_UNALIGNED);
    plans_->c2r = fftw_plan_dft_c2r_2d(
        ny_, nx_, reinterpret_cast<fftw_complex*>(spec.data()), phys.data(),
        FFTW_ESTIMATE | FFTW_UNALIGNED);
    if (!plans_->r2c || !plans_->c2r) {
        throw InvalidGrid("fftw plan creation failed");
    }
}

TorusGrid::~TorusGrid() = default;

void TorusGrid::to_spectral(std::span<const double> phys,
                            std::span<std::complex<double>> spec) const {
    // Out-of-place r2c leaves the input untouched; shed const for the C API.
    fftw_execute_dft_r2c(plans_->r2c, const_cast<double*>(phys.data()),
                         reinterpret_cast<fftw_complex*>(spec.data()));
    const double scale = 1.0 / size();
    for (auto& c : spec) c *= scale;
}

void TorusGrid::to_physical(std::span<const std::complex<double>> spec,
                            std::span<double> phys) const {
    // Multidimensional c2r destroys its input; work on a copy.
    std::vector<std::complex<double>> tmp(spec.begin(), spec.end());
    fftw_execute_dft_c2r(plans_->c2r,
                         reinterpret_cast<fftw_complex*>(tmp.data()),
                         phys.data());
}

Field::Field(std::shared_ptr<const TorusGrid> grid, double fill)
    : grid_(std::move(grid)),
      values_(static_cast<size_t>(grid_->size()), fill) {}

Field Field::from_function(std::shared_ptr<const TorusGrid> grid,
                           const std::function<double(double, double)>& f) {
    Field out(grid);
    const TorusGrid& g = *grid;
    for (int iy = 0; iy < g.ny(); ++iy) {
        for (int ix = 0; ix < g.nx(); ++ix) {
            out.at(ix, iy) = f(g.x(ix), g.y(iy));
        }
    }
    return out;
}

bool Field::all_finite() const {
    return std::all_of(values_.begin(), values_.end(),
                       [](double v) { return std::isfinite(v); });
}

double integral(const Field& f) {
    return kahan_sum(f.values()) * f.grid().cell_area();
}

double mean(const Field& f) { return integral(f) / f.grid().area(); }

double dot(const Field& f, const Field& g) {
    double sum = 0.0, comp = 0.0;
    auto fv = f.values();
    auto gv = g.values();
    for (size_t i = 0; i < fv.size(); ++i) {
        double y = fv[i] * gv[i] - comp;
        double t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    return sum * f.grid().cell_area();
}

double norm_l2(const Field& f) { return std::sqrt(std::max(0.0, dot(f, f))); }

namespace {

// sum over modes of weight * |c|^2 * mult(|xi|^2), times |Omega|
double spectral_quadratic(const Field& f,
                          const std::function<double(double)>& mult) {
    const TorusGrid& g = f.grid();
    std::vector<std::complex<double>> spec(g.spectral_size());
    g.to_spectral(f.values(), spec);
    auto xi2 = g.xi_sq();
    auto w = g.mode_weight();
    double sum = 0.0, comp = 0.0;
    for (int k = 0; k < g.spectral_size(); ++k) {
        double x = w[k] * std::norm(spec[k]) * mult(xi2[k]) - comp;
        double t = sum + x;
        comp = (t - sum) - x;
        sum = t;
    }
    return sum * g.area();
}

}  // namespace

double grad_norm_sq(const Field& f) {
    return spectral_quadratic(f, [](double xi2) { return xi2; });
}

double norm_V(const Field& f) {
    return std::sqrt(std::max(
        0.0, spectral_quadratic(f, [](double xi2) { return 1.0 + xi2; })));
}

double norm_Vstar(const Field& f) {
    return std::sqrt(std::max(
        0.0,
        spectral_quadratic(f, [](double xi2) { return 1.0 / (1.0 + xi2); })));
}

namespace {

Field spectral_map(const Field& f,
                   const std::function<std::complex<double>(
                       std::complex<double>, double)>& op) {
    const TorusGrid& g = f.grid();
    std::vector<std::complex<double>> spec(g.spectral_size());
    g.to_spectral(f.values(), spec);
    auto xi2 = g.xi_sq();
    for (int k = 0; k < g.spectral_size(); ++k) {
        spec[k] = op(spec[k], xi2[k]);
    }
    Field out(f.grid_ptr());
    g.to_physical(spec, out.values());
    return out;
}

}  // namespace

Field laplacian(const Field& f) {
    return spectral_map(
        f, [](std::complex<double> c, double xi2) { return -xi2 * c; });
}

Field inv_laplacian_zero_mean(const Field& f) {
    return spectral_map(f, [](std::complex<double> c, double xi2) {
        return xi2 > 0.0 ? c / xi2 : std::complex<double>(0.0);
    });
}

Field solve_helmholtz(const Field& f, double alpha, double beta) {
    if (!(alpha > 0.0)) throw Error("solve_helmholtz requires alpha > 0");
    return spectral_map(f, [alpha, beta](std::complex<double> c, double xi2) {
        return c / (alpha + beta * xi2);
    });
}

Field dealias(const Field& f) {
    const TorusGrid& g = f.grid();
    std::vector<std::complex<double>> spec(g.spectral_size());
    g.to_spectral(f.values(), spec);
    const int nxc = g.nx() / 2 + 1;
    const int mx = g.nx() / 3;
    const int my = g.ny() / 3;
    for (int iy = 0; iy < g.ny(); ++iy) {
        const int n = iy <= g.ny() / 2 ? iy : iy - g.ny();
        for (int jx = 0; jx < nxc; ++jx) {
            if (jx > mx || std::abs(n) > my) spec[iy * nxc + jx] = 0.0;
        }
    }
    Field out(f.grid_ptr());
    g.to_physical(spec, out.values());
    return out;
}

namespace {

template <typename Op>
Field zip(const Field& f, const Field& g, Op op) {
    Field out(f.grid_ptr());
    auto fv = f.values();
    auto gv = g.values();
    auto ov = out.values();
    for (size_t i = 0; i < fv.size(); ++i) ov[i] = op(fv[i], gv[i]);
    return out;
}

template <typename Op>
Field map(const Field& f, Op op) {
    Field out(f.grid_ptr());
    auto fv = f.values();
    auto ov = out.values();
    for (size_t i = 0; i < fv.size(); ++i) ov[i] = op(fv[i]);
    return out;
}

}  // namespace

Field operator+(const Field& f, const Field& g) {
    return zip(f, g, [](double x, double y) { return x + y; });
}

Field operator-(const Field& f, const Field& g) {
    return zip(f, g, [](double x, double y) { return x - y; });
}

Field operator*(const Field& f, const Field& g) {
    return zip(f, g, [](double x, double y) { return x * y; });
}

Field operator*(double s, const Field& f) {
    return map(f, [s](double x) { return s * x; });
}

Field operator+(const Field& f, double c) {
    return map(f, [c](double x) { return x + c; });
}

Field operator-(const Field& f, double c) {
    return map(f, [c](double x) { return x - c; });
}

Field exp(const Field& f) {
    return map(f, [](double x) { return std::exp(x); });
}

Field log(const Field& f) {
    return map(f, [](double x) { return std::log(x); });
}

Field axpy(double alpha, const Field& x, const Field& y) {
    return zip(x, y, [alpha](double xv, double yv) { return yv + alpha * xv; });
}

double min_value(const Field& f) {
    return *std::min_element(f.values().begin(), f.values().end());
}

double max_value(const Field& f) {
    return *std::max_element(f.values().begin(), f.values().end());
}

}  // namespace torusflow
