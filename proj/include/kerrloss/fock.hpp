// fock.hpp: truncated Fock-space algebra for one and two bosonic modes.
//
// Density matrices are stored densely. A two-mode state is a matrix over the
// product basis |k>|m>, with row index k*(n_max+1)+m, so the element
// rho[k,l;m,n] = <k|<m| rho |l>|n> lives at (k*d+m, l*d+n).

#pragma once

#include <Eigen/Dense>
#include <unsupported/Eigen/KroneckerProduct>

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include "kerrloss/error.hpp"

namespace kerrloss {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

inline constexpr double kPositivityTol = 1e-8;

class FockCutoff {
public:
    explicit FockCutoff(int n_max) : n_max_(n_max) {
        if (n_max < 1) throw InvalidArgument("FockCutoff: n_max must be >= 1");
    }

    int n_max() const noexcept { return n_max_; }
    // Dimension of a single mode.
    int dim() const noexcept { return n_max_ + 1; }
    // Dimension of the two-mode product space.
    int dim2() const noexcept { return dim() * dim(); }

    friend bool operator==(FockCutoff a, FockCutoff b) noexcept { return a.n_max_ == b.n_max_; }

private:
    int n_max_;
};

enum class Mode : int { One = 1, Two = 2 };

inline void check_mode(Mode mode) {
    if (mode != Mode::One && mode != Mode::Two)
        throw InvalidArgument("mode index must be 1 or 2");
}

// Smallest cutoff the adequacy rule |a|^2 + 6|a| + 4 <= n_max accepts.
inline int required_cutoff(cplx alpha) {
    const double r = std::abs(alpha);
    return static_cast<int>(std::ceil(r * r + 6.0 * r + 4.0 - 1e-12));
}

inline bool truncation_adequate(cplx alpha, FockCutoff cutoff) {
    return required_cutoff(alpha) <= cutoff.n_max();
}

inline void require_adequate(cplx alpha, FockCutoff cutoff, const char* where) {
    if (!truncation_adequate(alpha, cutoff)) {
        throw TruncationError(std::string(where) + ": |alpha|=" + std::to_string(std::abs(alpha)) +
                              " needs n_max >= " + std::to_string(required_cutoff(alpha)) +
                              ", got " + std::to_string(cutoff.n_max()));
    }
}

class SingleModeDensity {
public:
    SingleModeDensity(Matrix matrix, FockCutoff cutoff, bool normalized = true)
        : matrix_(std::move(matrix)), cutoff_(cutoff), normalized_(normalized) {
        if (matrix_.rows() != cutoff_.dim() || matrix_.cols() != cutoff_.dim())
            throw DimensionMismatch("SingleModeDensity: matrix dimension does not match cutoff");
    }

    const Matrix& matrix() const noexcept { return matrix_; }
    FockCutoff cutoff() const noexcept { return cutoff_; }
    bool normalized() const noexcept { return normalized_; }
    int dim() const noexcept { return cutoff_.dim(); }

    cplx operator()(int k, int l) const { return matrix_(k, l); }
    double trace() const { return matrix_.trace().real(); }

    // Returns a copy scaled to unit trace.
    SingleModeDensity normalized_copy() const {
        const double tr = trace();
        if (!(tr > 0.0)) throw InvalidArgument("cannot normalize a state with non-positive trace");
        return SingleModeDensity(matrix_ / tr, cutoff_, true);
    }

private:
    Matrix matrix_;
    FockCutoff cutoff_;
    bool normalized_;
};

class TwoModeDensity {
public:
    TwoModeDensity(Matrix matrix, FockCutoff cutoff, bool normalized = true)
        : matrix_(std::move(matrix)), cutoff_(cutoff), normalized_(normalized) {
        if (matrix_.rows() != cutoff_.dim2() || matrix_.cols() != cutoff_.dim2())
            throw DimensionMismatch("TwoModeDensity: matrix dimension does not match cutoff");
    }

    // |psi><psi| for a product-basis vector psi[k*d+m].
    static TwoModeDensity from_pure(const Vector& psi, FockCutoff cutoff, bool normalize = true) {
        if (psi.size() != cutoff.dim2())
            throw DimensionMismatch("TwoModeDensity::from_pure: vector dimension does not match cutoff");
        Matrix m = psi * psi.adjoint();
        if (normalize) {
            const double tr = m.trace().real();
            if (!(tr > 0.0)) throw InvalidArgument("from_pure: zero vector");
            m /= tr;
        }
        return TwoModeDensity(std::move(m), cutoff, normalize);
    }

    const Matrix& matrix() const noexcept { return matrix_; }
    FockCutoff cutoff() const noexcept { return cutoff_; }
    bool normalized() const noexcept { return normalized_; }
    int dim() const noexcept { return cutoff_.dim2(); }

    int index(int k, int m) const noexcept { return k * cutoff_.dim() + m; }

    // rho[k,l;m,n]: k,l index mode 1 (ket, bra); m,n index mode 2.
    cplx operator()(int k, int l, int m, int n) const { return matrix_(index(k, m), index(l, n)); }
    double trace() const { return matrix_.trace().real(); }

    TwoModeDensity normalized_copy() const {
        const double tr = trace();
        if (!(tr > 0.0)) throw InvalidArgument("cannot normalize a state with non-positive trace");
        return TwoModeDensity(matrix_ / tr, cutoff_, true);
    }

private:
    Matrix matrix_;
    FockCutoff cutoff_;
    bool normalized_;
};

// Truncated coherent-state coefficients e^{-|a|^2/2} a^n / sqrt(n!), n <= n_max.
// Not renormalized: these are the exact projections onto the kept subspace.
inline Vector coherent_amplitudes(cplx alpha, int dim) {
    Vector c(dim);
    c(0) = std::exp(-0.5 * std::norm(alpha));
    for (int n = 1; n < dim; ++n) c(n) = c(n - 1) * alpha / std::sqrt(static_cast<double>(n));
    return c;
}

inline Vector coherent_vector(cplx alpha, FockCutoff cutoff) {
    Vector c = coherent_amplitudes(alpha, cutoff.dim());
    return c / c.norm();
}

inline SingleModeDensity coherent_density(cplx alpha, FockCutoff cutoff) {
    require_adequate(alpha, cutoff, "coherent_density");
    const Vector c = coherent_vector(alpha, cutoff);
    return SingleModeDensity(c * c.adjoint(), cutoff, true);
}

inline SingleModeDensity fock_density(int n, FockCutoff cutoff) {
    if (n < 0 || n > cutoff.n_max()) throw InvalidArgument("fock_density: photon number outside cutoff");
    Matrix m = Matrix::Zero(cutoff.dim(), cutoff.dim());
    m(n, n) = 1.0;
    return SingleModeDensity(std::move(m), cutoff, true);
}

// Product-basis vector of |a1>|a2> (each factor truncated and renormalized).
inline Vector coherent_product_vector(cplx alpha1, cplx alpha2, FockCutoff cutoff) {
    const Vector c1 = coherent_vector(alpha1, cutoff);
    const Vector c2 = coherent_vector(alpha2, cutoff);
    return Eigen::kroneckerProduct(c1, c2).eval();
}

inline TwoModeDensity tensor_product(const SingleModeDensity& rho1, const SingleModeDensity& rho2) {
    if (!(rho1.cutoff() == rho2.cutoff()))
        throw DimensionMismatch("tensor_product: cutoffs differ");
    const int d = rho1.dim();
    Matrix out(d * d, d * d);
    for (int k = 0; k < d; ++k)
        for (int l = 0; l < d; ++l)
            out.block(k * d, l * d, d, d) = rho1(k, l) * rho2.matrix();
    return TwoModeDensity(std::move(out), rho1.cutoff(), rho1.normalized() && rho2.normalized());
}

inline SingleModeDensity partial_trace(const TwoModeDensity& rho, Mode keep) {
    check_mode(keep);
    const int d = rho.cutoff().dim();
    Matrix out = Matrix::Zero(d, d);
    if (keep == Mode::One) {
        for (int k = 0; k < d; ++k)
            for (int l = 0; l < d; ++l) {
                cplx s = 0.0;
                for (int m = 0; m < d; ++m) s += rho(k, l, m, m);
                out(k, l) = s;
            }
    } else {
        for (int m = 0; m < d; ++m)
            for (int n = 0; n < d; ++n) {
                cplx s = 0.0;
                for (int k = 0; k < d; ++k) s += rho(k, k, m, n);
                out(m, n) = s;
            }
    }
    return SingleModeDensity(std::move(out), rho.cutoff(), rho.normalized());
}

// Tr(rho^2) = sum |rho_ij|^2 for Hermitian rho.
inline double purity(const Matrix& rho) { return rho.cwiseAbs2().sum(); }
inline double purity(const SingleModeDensity& rho) { return purity(rho.matrix()); }
inline double purity(const TwoModeDensity& rho) { return purity(rho.matrix()); }

struct Diagnostics {
    double hermiticity_defect = 0.0;  // max |rho - rho^dagger| element
    double trace = 0.0;
    double trace_defect = 0.0;        // |Tr rho - 1|, zero for states not declared normalized
    double min_eigenvalue = 0.0;      // of the Hermitian part

    bool positive(double tol = kPositivityTol) const { return min_eigenvalue >= -tol; }
};

inline Diagnostics validate(const Matrix& rho, bool normalized) {
    Diagnostics d;
    d.hermiticity_defect = (rho - rho.adjoint()).cwiseAbs().maxCoeff();
    d.trace = rho.trace().real();
    d.trace_defect = normalized ? std::abs(d.trace - 1.0) : 0.0;
    const Matrix herm = 0.5 * (rho + rho.adjoint());
    Eigen::SelfAdjointEigenSolver<Matrix> es(herm, Eigen::EigenvaluesOnly);
    d.min_eigenvalue = es.eigenvalues().minCoeff();
    return d;
}
inline Diagnostics validate(const SingleModeDensity& rho) { return validate(rho.matrix(), rho.normalized()); }
inline Diagnostics validate(const TwoModeDensity& rho) { return validate(rho.matrix(), rho.normalized()); }

// <psi|rho|psi> for a normalized pure reference state.
inline double fidelity(const Vector& psi, const Matrix& rho) {
    if (psi.size() != rho.rows()) throw DimensionMismatch("fidelity: dimension mismatch");
    return (psi.adjoint() * rho * psi)(0, 0).real() / psi.squaredNorm();
}
inline double fidelity(const Vector& psi, const TwoModeDensity& rho) { return fidelity(psi, rho.matrix()); }
inline double fidelity(const Vector& psi, const SingleModeDensity& rho) { return fidelity(psi, rho.matrix()); }

// Uhlmann fidelity (Tr sqrt(sqrt(a) b sqrt(a)))^2 between two density matrices.
inline double fidelity(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows()) throw DimensionMismatch("fidelity: dimension mismatch");
    Eigen::SelfAdjointEigenSolver<Matrix> ea(0.5 * (a + a.adjoint()));
    const Eigen::VectorXd w = ea.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    const Matrix sqrt_a = ea.eigenvectors() * w.asDiagonal() * ea.eigenvectors().adjoint();
    const Matrix inner = sqrt_a * b * sqrt_a;
    Eigen::SelfAdjointEigenSolver<Matrix> ei(0.5 * (inner + inner.adjoint()), Eigen::EigenvaluesOnly);
    const double s = ei.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();
    return s * s;
}

// Single-mode ladder and number operators on a d-dimensional truncated space.
inline Matrix annihilation(int dim) {
    Matrix a = Matrix::Zero(dim, dim);
    for (int n = 1; n < dim; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
    return a;
}

inline Matrix number(int dim) {
    Matrix n = Matrix::Zero(dim, dim);
    for (int k = 0; k < dim; ++k) n(k, k) = static_cast<double>(k);
    return n;
}

// Lifts a single-mode operator onto the chosen mode of the product space.
inline Matrix lift(const Matrix& op, Mode mode) {
    check_mode(mode);
    const Matrix id = Matrix::Identity(op.rows(), op.cols());
    return mode == Mode::One ? Matrix(Eigen::kroneckerProduct(op, id)) : Matrix(Eigen::kroneckerProduct(id, op));
}

// Applies exp(i*theta*n) on one mode: rho -> U rho U^dagger.
inline TwoModeDensity phase_rotate(const TwoModeDensity& rho, Mode mode, double theta) {
    check_mode(mode);
    const int d = rho.cutoff().dim();
    Vector u(rho.dim());
    for (int k = 0; k < d; ++k)
        for (int m = 0; m < d; ++m) u(k * d + m) = std::polar(1.0, theta * (mode == Mode::One ? k : m));
    Matrix out = u.asDiagonal() * rho.matrix() * u.conjugate().asDiagonal();
    return TwoModeDensity(std::move(out), rho.cutoff(), rho.normalized());
}

}  // namespace kerrloss
