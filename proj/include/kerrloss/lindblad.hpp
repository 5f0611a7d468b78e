// lindblad.hpp: brute-force Markovian master-equation integrator on the
// truncated two-mode space.
//
// A generator holds a Hamiltonian and a list of jump terms. A jump term with
// rate r and operator b contributes (r/2) L(b) rho with
//   L(b) rho = 2 b rho b^dagger - b^dagger b rho - rho b^dagger b,
// so d rho/dt = K rho + rho K^dagger + sum_j r_j b_j rho b_j^dagger with
// K = -i H - (1/2) sum_j r_j b_j^dagger b_j.

#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <unsupported/Eigen/KroneckerProduct>

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "kerrloss/analytic.hpp"
#include "kerrloss/error.hpp"
#include "kerrloss/fock.hpp"

namespace kerrloss {

using SparseMatrix = Eigen::SparseMatrix<cplx>;

struct JumpTerm {
    double rate;
    SparseMatrix op;
    std::string label;
};

class LindbladGenerator {
public:
    LindbladGenerator(const Matrix& hamiltonian, std::vector<JumpTerm> jumps, FockCutoff cutoff)
        : hamiltonian_(hamiltonian.sparseView()), jumps_(std::move(jumps)), cutoff_(cutoff) {
        const int dim = cutoff_.dim2();
        if (hamiltonian.rows() != dim || hamiltonian.cols() != dim)
            throw DimensionMismatch("LindbladGenerator: Hamiltonian dimension does not match cutoff");
        const double herm = hamiltonian.size() ? (hamiltonian - hamiltonian.adjoint()).cwiseAbs().maxCoeff() : 0.0;
        if (herm > 1e-12) throw InvalidArgument("LindbladGenerator: Hamiltonian is not Hermitian");
        effective_ = cplx(0.0, -1.0) * hamiltonian_;
        for (const auto& j : jumps_) {
            if (!(j.rate >= 0.0)) throw InvalidArgument("LindbladGenerator: jump rates must be non-negative");
            if (j.op.rows() != dim || j.op.cols() != dim)
                throw DimensionMismatch("LindbladGenerator: jump operator dimension does not match cutoff");
            effective_ -= (0.5 * j.rate) * SparseMatrix(j.op.adjoint() * j.op);
        }
        effective_.makeCompressed();
        assemble_superoperator();
    }

    const SparseMatrix& hamiltonian() const noexcept { return hamiltonian_; }
    const std::vector<JumpTerm>& jumps() const noexcept { return jumps_; }
    FockCutoff cutoff() const noexcept { return cutoff_; }

    // d rho / dt.
    Matrix apply(const Matrix& rho) const {
        Matrix out(rho.rows(), rho.cols());
        apply_into(rho, out);
        return out;
    }

    // Allocation-free form of apply; out must already have the state's shape.
    void apply_into(const Matrix& rho, Matrix& out) const {
        const Eigen::Index n = rho.size();
        Eigen::Map<Vector>(out.data(), n).noalias() = super_ * Eigen::Map<const Vector>(rho.data(), n);
    }

private:
    SparseMatrix hamiltonian_;
    std::vector<JumpTerm> jumps_;
    FockCutoff cutoff_;
    SparseMatrix effective_;
    Eigen::SparseMatrix<cplx, Eigen::RowMajor> super_;

    // Column-major vec: vec(A X B) = (B^T kron A) vec(X).
    void assemble_superoperator() {
        const int dim = cutoff_.dim2();
        SparseMatrix id(dim, dim);
        id.setIdentity();
        SparseMatrix l = Eigen::kroneckerProduct(id, effective_).eval();
        l += Eigen::kroneckerProduct(SparseMatrix(effective_.conjugate()), id).eval();
        for (const auto& j : jumps_) {
            if (j.rate == 0.0) continue;
            l += j.rate * Eigen::kroneckerProduct(SparseMatrix(j.op.conjugate()), j.op).eval();
        }
        l.prune(cplx(0.0, 0.0), 0.0);
        super_ = l;
        super_.makeCompressed();
    }
};

namespace detail {

inline SparseMatrix sparse(const Matrix& m) {
    SparseMatrix s = m.sparseView(1.0, 1e-300);
    s.makeCompressed();
    return s;
}

inline double clamp_rate(double r, double scale, const std::string& name) {
    if (r < -1e-12 * std::max(1.0, scale))
        throw RateDecompositionError("derived rate " + name + " = " + std::to_string(r) + " is negative");
    return std::max(r, 0.0);
}

}  // namespace detail

// Generator of the Kerr model with correlated loss and dephasing: jumps
// a1 (g1-g12), a2 (g2-g12), a1+a2 (g12), n1 (d1-d12), n2 (d2-d12), n1+n2 (d12).
inline LindbladGenerator build_cross_kerr_generator(const KerrLossParams& p, FockCutoff cutoff) {
    p.check();
    if (p.gamma12 < 0.0 || p.d12 < 0.0)
        throw RateDecompositionError("cross rates must be non-negative for the jump decomposition");
    const double gscale = std::max(p.gamma1, p.gamma2);
    const double dscale = std::max(p.d1, p.d2);
    const double r_a1 = detail::clamp_rate(p.gamma1 - p.gamma12, gscale, "gamma1-gamma12");
    const double r_a2 = detail::clamp_rate(p.gamma2 - p.gamma12, gscale, "gamma2-gamma12");
    const double r_n1 = detail::clamp_rate(p.d1 - p.d12, dscale, "d1-d12");
    const double r_n2 = detail::clamp_rate(p.d2 - p.d12, dscale, "d2-d12");

    const int d = cutoff.dim();
    const Matrix a1 = lift(annihilation(d), Mode::One);
    const Matrix a2 = lift(annihilation(d), Mode::Two);
    const Matrix n1 = lift(number(d), Mode::One);
    const Matrix n2 = lift(number(d), Mode::Two);

    const KerrMatrix x = p.kerr_matrix();
    Matrix h = Matrix::Zero(cutoff.dim2(), cutoff.dim2());
    for (int k = 0; k < d; ++k)
        for (int m = 0; m < d; ++m) h(k * d + m, k * d + m) = -detail::kerr_form(x, k, m);

    std::vector<JumpTerm> jumps;
    auto add = [&](double rate, const Matrix& op, const char* label) {
        if (rate > 0.0) jumps.push_back({rate, detail::sparse(op), label});
    };
    add(r_a1, a1, "a1");
    add(r_a2, a2, "a2");
    add(p.gamma12, a1 + a2, "a1+a2");
    add(r_n1, n1, "n1");
    add(r_n2, n2, "n2");
    add(p.d12, n1 + n2, "n1+n2");
    return LindbladGenerator(h, std::move(jumps), cutoff);
}

// Loss on the two rotated modes b1, b2 only (the diagonal form of correlated
// loss), with the same Kerr Hamiltonian written in the b basis.
inline LindbladGenerator build_diagonal_loss_generator(const KerrMatrix& x, double rate_b1, double rate_b2,
                                                       FockCutoff cutoff) {
    KerrLossParams p;
    p.chi_matrix = x;
    p.gamma1 = rate_b1;
    p.gamma2 = rate_b2;
    return build_cross_kerr_generator(p, cutoff);
}

// Collective mode C = (g1 a1 + g2 a2)/G. Generator
//   -i[dw C'C + chi_c (C'C)^2, rho] + gamma_bar L(C) rho + d_bar L(C'C) rho,
// stored as jump rates 2 gamma_bar and 2 d_bar under the r/2 convention.
inline LindbladGenerator build_collective_generator(double g1, double g2, double delta_w, double chi_c,
                                                    double gamma_bar, double d_bar, FockCutoff cutoff) {
    if (g1 == 0.0 && g2 == 0.0) throw ZeroCoupling("build_collective_generator: g1 = g2 = 0");
    if (gamma_bar < 0.0 || d_bar < 0.0)
        throw InvalidArgument("build_collective_generator: rates must be non-negative");
    const double G = std::hypot(g1, g2);
    const int d = cutoff.dim();
    const Matrix c = (g1 * lift(annihilation(d), Mode::One) + g2 * lift(annihilation(d), Mode::Two)) / G;
    const Matrix ctc = c.adjoint() * c;
    Matrix h = delta_w * ctc + chi_c * ctc * ctc;
    h = 0.5 * (h + h.adjoint()).eval();

    std::vector<JumpTerm> jumps;
    if (gamma_bar > 0.0) jumps.push_back({2.0 * gamma_bar, detail::sparse(c), "C"});
    if (d_bar > 0.0) jumps.push_back({2.0 * d_bar, detail::sparse(ctc), "C'C"});
    return LindbladGenerator(h, std::move(jumps), cutoff);
}

struct IntegratorStats {
    int accepted = 0;
    int rejected = 0;
    double last_step = 0.0;
};

struct Integration {
    TwoModeDensity state;
    IntegratorStats stats;
};

inline constexpr double kDefaultIntegratorTol = 1e-9;

namespace detail {

// Dormand-Prince 5(4) tableau.
struct Dopri5 {
    static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                            a65 = -5103.0 / 18656;
    static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                            b6 = 11.0 / 84;
    // b - b_hat (error weights), stage 7 is the FSAL stage.
    static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                            e6 = 22.0 / 525, e7 = -1.0 / 40;
};

}  // namespace detail

// Adaptive embedded Runge-Kutta integration of d rho/dt = L rho over [0, t].
// Each accepted step keeps max |local error| <= tol and is followed by a
// Hermitian symmetrization.
inline Integration integrate_with_stats(const TwoModeDensity& rho0, const LindbladGenerator& gen, double t,
                                        double tol = kDefaultIntegratorTol) {
    if (!(rho0.cutoff() == gen.cutoff())) throw DimensionMismatch("integrate: state and generator cutoffs differ");
    if (t < 0.0) throw InvalidArgument("integrate: t must be non-negative");
    if (!(tol > 0.0)) throw InvalidArgument("integrate: tol must be positive");

    using T = detail::Dopri5;
    IntegratorStats stats;
    if (t == 0.0 || (gen.jumps().empty() && gen.hamiltonian().nonZeros() == 0)) return Integration{rho0, stats};

    const Eigen::Index n = rho0.dim();
    Matrix y = rho0.matrix();
    Matrix k1(n, n), k2(n, n), k3(n, n), k4(n, n), k5(n, n), k6(n, n), k7(n, n);
    Matrix stage(n, n), y_new(n, n);
    gen.apply_into(y, k1);
    const double f0 = k1.cwiseAbs().maxCoeff();
    double h = f0 > 0.0 ? std::min(t, 0.1 * std::pow(tol, 0.2) / f0) : t;
    h = std::max(h, 1e-6 * t);
    const double h_min = 1e-12 * t;
    double time = 0.0;

    while (time < t) {
        if (time + h > t) h = t - time;
        stage = y + (h * T::a21) * k1;
        gen.apply_into(stage, k2);
        stage = y + h * (T::a31 * k1 + T::a32 * k2);
        gen.apply_into(stage, k3);
        stage = y + h * (T::a41 * k1 + T::a42 * k2 + T::a43 * k3);
        gen.apply_into(stage, k4);
        stage = y + h * (T::a51 * k1 + T::a52 * k2 + T::a53 * k3 + T::a54 * k4);
        gen.apply_into(stage, k5);
        stage = y + h * (T::a61 * k1 + T::a62 * k2 + T::a63 * k3 + T::a64 * k4 + T::a65 * k5);
        gen.apply_into(stage, k6);
        y_new = y + h * (T::b1 * k1 + T::b3 * k3 + T::b4 * k4 + T::b5 * k5 + T::b6 * k6);
        gen.apply_into(y_new, k7);
        stage = h * (T::e1 * k1 + T::e3 * k3 + T::e4 * k4 + T::e5 * k5 + T::e6 * k6 + T::e7 * k7);
        const double err_norm = stage.cwiseAbs().maxCoeff() / tol;

        if (err_norm <= 1.0) {
            time = (t - time - h) <= 1e-15 * t ? t : time + h;
            stage = y_new.adjoint();
            y = 0.5 * (y_new + stage);
            gen.apply_into(y, k1);
            ++stats.accepted;
            stats.last_step = h;
        } else {
            ++stats.rejected;
        }
        const double factor =
            err_norm == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err_norm, -0.2), 0.2, err_norm <= 1.0 ? 5.0 : 1.0);
        h *= factor;
        if (time < t && h < h_min) throw StepSizeUnderflow("integrate: adaptive step fell below 1e-12 * t");
    }
    return Integration{TwoModeDensity(std::move(y), rho0.cutoff(), rho0.normalized()), stats};
}

inline TwoModeDensity integrate(const TwoModeDensity& rho0, const LindbladGenerator& gen, double t,
                                double tol = kDefaultIntegratorTol) {
    return integrate_with_stats(rho0, gen, t, tol).state;
}

struct SteadyStateProbe {
    TwoModeDensity state;
    bool converged;
    double time;       // time at which the probe stopped
    double residual;   // max |L rho| at that time
};

inline constexpr double kDefaultSettleTol = 1e-10;

// Integrates in windows until max |L rho| drops below settle_tol or the
// horizon is reached.
inline SteadyStateProbe steady_state_probe(const TwoModeDensity& rho0, const LindbladGenerator& gen, double horizon,
                                           double settle_tol = kDefaultSettleTol,
                                           double tol = 1e-3 * kDefaultSettleTol) {
    if (!(horizon > 0.0)) throw InvalidArgument("steady_state_probe: horizon must be positive");
    TwoModeDensity rho = rho0;
    double time = 0.0;
    double residual = gen.apply(rho.matrix()).cwiseAbs().maxCoeff();
    double window = horizon / 256.0;
    while (residual >= settle_tol && time < horizon) {
        const double step = std::min(window, horizon - time);
        rho = integrate(rho, gen, step, tol);
        time += step;
        residual = gen.apply(rho.matrix()).cwiseAbs().maxCoeff();
        window *= 1.25;
    }
    return SteadyStateProbe{rho, residual < settle_tol, time, residual};
}

}  // namespace kerrloss
