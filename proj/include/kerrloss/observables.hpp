// observables.hpp: phase-space and entanglement observables.
//
// Wigner convention: W(alpha) = (2/pi) Tr[rho D(alpha) P D(alpha)^dagger] with
// parity P = (-1)^n, so the vacuum peaks at 2/pi and the integral over the
// complex plane (d Re d Im) is 1. Quadratures use x = (a + a^dagger)/sqrt(2).

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "kerrloss/error.hpp"
#include "kerrloss/fock.hpp"
#include "kerrloss/parallel.hpp"

namespace kerrloss {

struct PhaseSpaceGrid {
    double re_min = -1.0, re_max = 1.0;
    double im_min = -1.0, im_max = 1.0;
    int n_re = 2, n_im = 2;

    // Square grid [-half, half]^2 with n points per axis.
    static PhaseSpaceGrid square(double half, int n) { return PhaseSpaceGrid{-half, half, -half, half, n, n}; }

    void check() const {
        if (!(re_max > re_min) || !(im_max > im_min))
            throw InvalidArgument("PhaseSpaceGrid: bounds must satisfy max > min");
        if (n_re < 2 || n_im < 2) throw InvalidArgument("PhaseSpaceGrid: need at least 2 points per axis");
    }
    double d_re() const { return (re_max - re_min) / (n_re - 1); }
    double d_im() const { return (im_max - im_min) / (n_im - 1); }
    double re(int i) const { return re_min + i * d_re(); }
    double im(int j) const { return im_min + j * d_im(); }
    cplx point(int i, int j) const { return {re(i), im(j)}; }
    double cell_area() const { return d_re() * d_im(); }
    int size() const { return n_re * n_im; }
};

struct FieldMinimum {
    double value;
    cplx location;
};

// Real field over a grid, row-major with Re as the outer index.
class ScalarField {
public:
    explicit ScalarField(PhaseSpaceGrid grid) : grid_(grid), values_(static_cast<std::size_t>(grid.size()), 0.0) {
        grid_.check();
    }

    const PhaseSpaceGrid& grid() const noexcept { return grid_; }
    const std::vector<double>& values() const noexcept { return values_; }
    double& at(int i, int j) { return values_[static_cast<std::size_t>(i * grid_.n_im + j)]; }
    double at(int i, int j) const { return values_[static_cast<std::size_t>(i * grid_.n_im + j)]; }

    FieldMinimum min() const {
        const auto it = std::min_element(values_.begin(), values_.end());
        const int flat = static_cast<int>(it - values_.begin());
        return {*it, grid_.point(flat / grid_.n_im, flat % grid_.n_im)};
    }
    double max() const { return *std::max_element(values_.begin(), values_.end()); }

    double riemann_sum() const {
        double s = 0.0;
        for (double v : values_) s += v;
        return s * grid_.cell_area();
    }

private:
    PhaseSpaceGrid grid_;
    std::vector<double> values_;
};

struct TimeSeries {
    std::vector<double> t;
    std::vector<double> values;
};

// <m|D(beta)|n> for m, n < dim, exact infinite-space matrix elements.
inline Matrix displacement_matrix(cplx beta, int dim) {
    Matrix d(dim, dim);
    d(0, 0) = std::exp(-0.5 * std::norm(beta));
    for (int m = 1; m < dim; ++m) d(m, 0) = d(m - 1, 0) * beta / std::sqrt(double(m));
    const cplx bc = std::conj(beta);
    for (int n = 0; n + 1 < dim; ++n) {
        const double inv = 1.0 / std::sqrt(double(n + 1));
        d(0, n + 1) = -bc * d(0, n) * inv;
        for (int m = 1; m < dim; ++m) d(m, n + 1) = (std::sqrt(double(m)) * d(m - 1, n) - bc * d(m, n)) * inv;
    }
    return d;
}

inline double wigner_at(const Matrix& rho, cplx alpha) {
    const int dim = static_cast<int>(rho.rows());
    const Matrix d = displacement_matrix(2.0 * alpha, dim);
    cplx acc = 0.0;
    for (int n = 0; n < dim; ++n) {
        cplx row = 0.0;
        for (int m = 0; m < dim; ++m) row += rho(n, m) * d(m, n);
        acc += (n % 2 == 0) ? row : -row;
    }
    return 2.0 / std::numbers::pi * acc.real();
}

inline double q_at(const Matrix& rho, cplx alpha) {
    const Vector c = coherent_amplitudes(alpha, static_cast<int>(rho.rows()));
    return (c.adjoint() * rho * c)(0, 0).real() / std::numbers::pi;
}

namespace detail {

template <typename Fn>
ScalarField fill_field(const PhaseSpaceGrid& grid, Fn&& fn) {
    ScalarField field(grid);
    parallel_for(grid.size(), [&](int flat) {
        const int i = flat / grid.n_im, j = flat % grid.n_im;
        field.at(i, j) = fn(grid.point(i, j));
    });
    return field;
}

}  // namespace detail

inline ScalarField wigner(const SingleModeDensity& rho, const PhaseSpaceGrid& grid) {
    return detail::fill_field(grid, [&](cplx a) { return wigner_at(rho.matrix(), a); });
}

inline ScalarField q_function(const SingleModeDensity& rho, const PhaseSpaceGrid& grid) {
    return detail::fill_field(grid, [&](cplx a) { return q_at(rho.matrix(), a); });
}

// Wigner function after a balanced beam splitter with vacuum in the other port:
// W_out(alpha) = 2 Q_in(sqrt(2) alpha).
inline ScalarField bs_half_loss_wigner(const SingleModeDensity& rho, const PhaseSpaceGrid& grid) {
    return detail::fill_field(grid, [&](cplx a) { return 2.0 * q_at(rho.matrix(), std::sqrt(2.0) * a); });
}

// Normalized Hermite functions <x|n>, n < dim.
inline std::vector<double> hermite_functions(double x, int dim) {
    std::vector<double> psi(static_cast<std::size_t>(dim), 0.0);
    if (dim == 0) return psi;
    psi[0] = std::pow(std::numbers::pi, -0.25) * std::exp(-0.5 * x * x);
    if (dim > 1) psi[1] = std::sqrt(2.0) * x * psi[0];
    for (int n = 1; n + 1 < dim; ++n)
        psi[n + 1] = std::sqrt(2.0 / (n + 1)) * x * psi[n] - std::sqrt(double(n) / (n + 1)) * psi[n - 1];
    return psi;
}

struct QuadratureProjection {
    SingleModeDensity state;  // unnormalized; trace = probability_density
    double probability_density;
};

// Projects `mode` onto the quadrature eigenstate |x> and returns the other mode.
inline QuadratureProjection project_quadrature(const TwoModeDensity& rho, Mode mode, double x) {
    check_mode(mode);
    const int d = rho.cutoff().dim();
    const std::vector<double> psi = hermite_functions(x, d);
    Matrix out = Matrix::Zero(d, d);
    for (int k = 0; k < d; ++k)
        for (int l = 0; l < d; ++l) {
            cplx acc = 0.0;
            for (int m = 0; m < d; ++m)
                for (int n = 0; n < d; ++n) {
                    const double w = psi[m] * psi[n];
                    acc += w * (mode == Mode::Two ? rho(k, l, m, n) : rho(m, n, k, l));
                }
            out(k, l) = acc;
        }
    const double p = out.trace().real();
    return {SingleModeDensity(std::move(out), rho.cutoff(), false), p};
}

inline Matrix partial_transpose_mode1(const Matrix& rho, int d) {
    Matrix sigma(rho.rows(), rho.cols());
    for (int k = 0; k < d; ++k)
        for (int l = 0; l < d; ++l)
            for (int m = 0; m < d; ++m)
                for (int n = 0; n < d; ++n) sigma(k * d + m, l * d + n) = rho(l * d + m, k * d + n);
    return sigma;
}

// Sum of |negative eigenvalues| of the mode-1 partial transpose.
inline double negativity(const TwoModeDensity& rho) {
    const Matrix sigma = partial_transpose_mode1(rho.matrix(), rho.cutoff().dim());
    const double herm = (sigma - sigma.adjoint()).cwiseAbs().maxCoeff();
    if (herm > 1e-10) throw InvalidArgument("negativity: partial transpose is not Hermitian (input not Hermitian)");
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (sigma + sigma.adjoint()), Eigen::EigenvaluesOnly);
    double neg = 0.0;
    for (int i = 0; i < es.eigenvalues().size(); ++i)
        if (es.eigenvalues()(i) < 0.0) neg -= es.eigenvalues()(i);
    return neg;
}

inline constexpr double kCoverageTol = 1e-3;

struct WignerMinimum {
    double value;
    cplx location;
    double normalization_defect;  // |riemann_sum - 1| on the coarse grid
};

// Coarse grid minimum, then one 4x refinement over the neighbouring cells.
inline WignerMinimum min_wigner(const SingleModeDensity& rho, const PhaseSpaceGrid& grid) {
    const SingleModeDensity r = rho.normalized() ? rho : rho.normalized_copy();
    const ScalarField w = wigner(r, grid);
    const double defect = std::abs(w.riemann_sum() - 1.0);
    if (defect > kCoverageTol)
        throw GridCoverageError("min_wigner: Wigner normalization defect " + std::to_string(defect) +
                                " exceeds coverage tolerance");
    const FieldMinimum coarse = w.min();
    const PhaseSpaceGrid fine{coarse.location.real() - grid.d_re(), coarse.location.real() + grid.d_re(),
                              coarse.location.imag() - grid.d_im(), coarse.location.imag() + grid.d_im(), 9, 9};
    const FieldMinimum refined = wigner(r, fine).min();
    const FieldMinimum best = refined.value < coarse.value ? refined : coarse;
    return {best.value, best.location, defect};
}

}  // namespace kerrloss
