// correlated.hpp: correlated reservoirs: mode rotation, cat generation under
// common loss, detector-conditioned states, and collective-decay dynamics in
// the single-excitation sector.
//
// Rotation convention: a1 = c b1 + s b2, a2 = -s b1 + c b2 with c = cos(phi),
// s = sin(phi). Amplitudes map as b1 = c a1 - s a2, b2 = s a1 + c a2.

#pragma once

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "kerrloss/analytic.hpp"
#include "kerrloss/error.hpp"
#include "kerrloss/fock.hpp"
#include "kerrloss/lindblad.hpp"
#include "kerrloss/observables.hpp"

namespace kerrloss {

struct RotationFrame {
    double phi;
    double gamma_bar_1, gamma_bar_2;
    cplx alpha_bar_1, alpha_bar_2;
};

// Rotation angle in (-pi/4, pi/4] diagonalizing the loss matrix.
inline double rotation_angle(double gamma1, double gamma2, double gamma12) {
    if (gamma12 == 0.0) return 0.0;
    if (gamma1 == gamma2) return std::numbers::pi / 4.0;
    return 0.5 * std::atan(2.0 * gamma12 / (gamma2 - gamma1));
}

inline RotationFrame frame_at(double phi, const KerrLossParams& p, cplx alpha1, cplx alpha2) {
    const double c = std::cos(phi), s = std::sin(phi);
    RotationFrame f;
    f.phi = phi;
    f.gamma_bar_1 = p.gamma1 * c * c + p.gamma2 * s * s - p.gamma12 * std::sin(2.0 * phi);
    f.gamma_bar_2 = p.gamma2 * c * c + p.gamma1 * s * s + p.gamma12 * std::sin(2.0 * phi);
    // Clip round-off below zero (fully correlated case lands on exactly 0).
    const double scale = std::max(1.0, p.gamma1 + p.gamma2);
    if (std::abs(f.gamma_bar_1) < 1e-13 * scale) f.gamma_bar_1 = 0.0;
    if (std::abs(f.gamma_bar_2) < 1e-13 * scale) f.gamma_bar_2 = 0.0;
    f.alpha_bar_1 = alpha1 * c - alpha2 * s;
    f.alpha_bar_2 = alpha2 * c + alpha1 * s;
    return f;
}

inline RotationFrame rotation_frame(const KerrLossParams& p, cplx alpha1 = 0.0, cplx alpha2 = 0.0) {
    if (p.d1 != 0.0 || p.d2 != 0.0 || p.d12 != 0.0)
        throw DephasingUnsupported("rotation_frame: dephasing rates must be zero");
    p.check();
    return frame_at(rotation_angle(p.gamma1, p.gamma2, p.gamma12), p, alpha1, alpha2);
}

// Maps product-basis coefficients in the a modes to coefficients in the b
// modes. Built block by block in total photon number N; blocks with N > n_max
// are cut by the box truncation, so the map is unitary only on N <= n_max.
inline Matrix mode_rotation_unitary(double phi, FockCutoff cutoff) {
    const int d = cutoff.dim();
    const long double c = std::cos(static_cast<long double>(phi));
    const long double s = std::sin(static_cast<long double>(phi));
    std::vector<long double> fact(static_cast<std::size_t>(2 * d + 1), 1.0L);
    for (std::size_t i = 1; i < fact.size(); ++i) fact[i] = fact[i - 1] * static_cast<long double>(i);
    auto binom = [&](int n, int r) { return fact[n] / (fact[r] * fact[n - r]); };

    Matrix v = Matrix::Zero(cutoff.dim2(), cutoff.dim2());
    // (a1^dag)^k (a2^dag)^m = (c x + s y)^k (-s x + c y)^m with x = b1^dag, y = b2^dag.
    for (int k = 0; k < d; ++k)
        for (int m = 0; m < d; ++m) {
            const int n_tot = k + m;
            std::vector<long double> poly(static_cast<std::size_t>(n_tot + 1), 0.0L);  // coefficient of x^j y^{N-j}
            for (int i = 0; i <= k; ++i) {
                const long double ti = binom(k, i) * std::pow(c, i) * std::pow(s, k - i);  // x^i y^{k-i}
                for (int r = 0; r <= m; ++r) {
                    const long double tr = binom(m, r) * std::pow(-s, r) * std::pow(c, m - r);  // x^r y^{m-r}
                    poly[static_cast<std::size_t>(i + r)] += ti * tr;
                }
            }
            for (int j = 0; j <= n_tot; ++j) {
                const int jb = n_tot - j;
                if (j >= d || jb >= d) continue;
                const long double norm = std::sqrt(fact[j] * fact[jb] / (fact[k] * fact[m]));
                v(j * d + jb, k * d + m) = static_cast<double>(poly[static_cast<std::size_t>(j)] * norm);
            }
        }
    return v;
}

// Zeroes product-basis amplitudes with k + m > n_max. The kept subspace is
// closed under the rotation, photon loss and functions of n1 + n2.
inline Vector restrict_total_number(const Vector& psi, FockCutoff cutoff) {
    if (psi.size() != cutoff.dim2()) throw DimensionMismatch("restrict_total_number: vector dimension");
    Vector out = psi;
    const int d = cutoff.dim();
    for (int k = 0; k < d; ++k)
        for (int m = 0; m < d; ++m)
            if (k + m > cutoff.n_max()) out(k * d + m) = 0.0;
    return out;
}

// a-basis density matrix -> b-basis density matrix.
inline TwoModeDensity rotate_state(const TwoModeDensity& rho, double phi) {
    const Matrix v = mode_rotation_unitary(phi, rho.cutoff());
    Matrix out = v * rho.matrix() * v.adjoint();
    return TwoModeDensity(std::move(out), rho.cutoff(), rho.normalized());
}

namespace detail {

inline void require_collective_kerr(const KerrLossParams& p, const char* where) {
    const KerrMatrix x = p.kerr_matrix();
    if (x[0][0] != x[0][1] || x[1][1] != x[0][1] || x[1][0] != x[0][1])
        throw InvalidArgument(std::string(where) + ": requires the rotation-invariant Hamiltonian chi (n1+n2)^2");
}

}  // namespace detail

// Correlated-loss evolution done in the rotated frame: rotate, evolve with
// diagonal rates (gamma_bar_1, gamma_bar_2), rotate back. The Hamiltonian must
// be a function of n1 + n2.
inline TwoModeDensity evolve_rotated_frame(const TwoModeDensity& rho0, const KerrLossParams& p, double t,
                                           double tol = kDefaultIntegratorTol) {
    detail::require_collective_kerr(p, "evolve_rotated_frame");
    const RotationFrame f = rotation_frame(p);
    const TwoModeDensity rb = rotate_state(rho0, f.phi);
    const LindbladGenerator gen =
        build_diagonal_loss_generator(p.kerr_matrix(), f.gamma_bar_1, f.gamma_bar_2, rho0.cutoff());
    const TwoModeDensity evolved = integrate(rb, gen, t, tol);
    return rotate_state(evolved, -f.phi);
}

// Superposition of two-mode coherent product states, kept as amplitudes so
// normalization includes the exact overlaps.
struct CatComponent {
    cplx weight;
    cplx alpha1, alpha2;
};

inline cplx coherent_overlap(cplx a, cplx b) {
    return std::exp(-0.5 * std::norm(a) - 0.5 * std::norm(b) + std::conj(a) * b);
}

class CatReference {
public:
    CatReference(std::vector<CatComponent> components, std::string tag)
        : components_(std::move(components)), tag_(std::move(tag)) {
        double n2 = 0.0;
        for (const auto& a : components_)
            for (const auto& b : components_)
                n2 += (std::conj(a.weight) * b.weight * coherent_overlap(a.alpha1, b.alpha1) *
                       coherent_overlap(a.alpha2, b.alpha2))
                          .real();
        if (!(n2 > 0.0)) throw InvalidArgument("CatReference: superposition has zero norm");
        const double inv = 1.0 / std::sqrt(n2);
        for (auto& c : components_) c.weight *= inv;
    }

    const std::vector<CatComponent>& components() const noexcept { return components_; }
    const std::string& tag() const noexcept { return tag_; }

    // Product-basis vector in the box, renormalized after truncation.
    Vector vector(FockCutoff cutoff) const {
        const int d = cutoff.dim();
        Vector psi = Vector::Zero(cutoff.dim2());
        for (const auto& c : components_) {
            const Vector v1 = coherent_amplitudes(c.alpha1, d), v2 = coherent_amplitudes(c.alpha2, d);
            psi += c.weight * Eigen::kroneckerProduct(v1, v2).eval();
        }
        return psi / psi.norm();
    }
    TwoModeDensity density(FockCutoff cutoff) const { return TwoModeDensity::from_pure(vector(cutoff), cutoff, true); }

private:
    std::vector<CatComponent> components_;
    std::string tag_;
};

// (i |a1>|a2> + |-a1>|-a2>) / sqrt(2), overlap-normalized.
inline CatReference lossless_cat_reference(cplx alpha1, cplx alpha2) {
    const double w = 1.0 / std::sqrt(2.0);
    return CatReference({{cplx(0.0, w), alpha1, alpha2}, {cplx(w, 0.0), -alpha1, -alpha2}}, "lossless-cat");
}

struct AsymptoticCat {
    CatReference cat;
    RotationFrame frame;  // b1 is the loss-free mode
    ValidityReport report;
};

// Cat left behind by completely correlated loss once the lossy rotated mode
// has emptied: amplitudes a1 = c^2 a1 - c s a2, a2 = s^2 a2 - c s a1.
inline AsymptoticCat correlated_cat_asymptotic(cplx alpha1, cplx alpha2, const KerrLossParams& p) {
    const double prod = p.gamma1 * p.gamma2;
    if (std::abs(prod - p.gamma12 * p.gamma12) > 1e-12 * prod || prod == 0.0)
        throw NotFullyCorrelated("correlated_cat_asymptotic: requires gamma1 gamma2 = gamma12^2 > 0");
    RotationFrame f = rotation_frame(p, alpha1, alpha2);
    if (f.gamma_bar_1 > f.gamma_bar_2) f = frame_at(f.phi + std::numbers::pi / 2.0, p, alpha1, alpha2);
    const double c = std::cos(f.phi), s = std::sin(f.phi);
    const cplx t1 = alpha1 * c * c - alpha2 * c * s;
    const cplx t2 = alpha2 * s * s - alpha1 * c * s;

    ValidityReport report;
    const double lhs = 2.0 * std::abs(p.chi) * std::norm(f.alpha_bar_1);
    report.conditions.push_back({"strong_collective_loss", f.gamma_bar_2 >= kMuchGreaterFactor * lhs,
                                 lhs > 0.0 ? std::log10(f.gamma_bar_2 / lhs) - 1.0 : INFINITY});
    return {lossless_cat_reference(t1, t2), f, report};
}

struct ConditionedCat {
    SingleModeDensity state;  // normalized state of rotated mode b1
    double success_probability;
    RotationFrame frame;
};

// State of rotated mode b1 given that rotated mode b2 is found in vacuum, for
// the Hamiltonian chi (n1+n2)^2 and loss diagonal in the rotated frame.
inline ConditionedCat conditioned_cat(cplx alpha1, cplx alpha2, double t, const KerrLossParams& p,
                                      FockCutoff cutoff) {
    if (t < 0.0) throw InvalidArgument("conditioned_cat: t must be non-negative");
    detail::require_collective_kerr(p, "conditioned_cat");
    const RotationFrame f = rotation_frame(p, alpha1, alpha2);
    require_adequate(f.alpha_bar_1, cutoff, "conditioned_cat");
    const double chi = p.kerr_matrix()[0][0];
    const double n1 = std::norm(f.alpha_bar_1), n2 = std::norm(f.alpha_bar_2);
    const int d = cutoff.dim();
    const Vector c = coherent_amplitudes(f.alpha_bar_1, d);
    const double pref = std::exp(-n2);
    Matrix rho(d, d);
    for (int k = 0; k < d; ++k)
        for (int l = 0; l < d; ++l) {
            const double freq = 2.0 * chi * (k - l);
            const cplx expo = cplx(-0.5 * f.gamma_bar_1 * t * (k + l), chi * t * double(k * k - l * l)) +
                              loss_feed(f.gamma_bar_1, freq, n1, t) + loss_feed(f.gamma_bar_2, freq, n2, t);
            rho(k, l) = pref * c(k) * std::conj(c(l)) * std::exp(expo);
        }
    rho = 0.5 * (rho + rho.adjoint()).eval();
    const double p_success = rho.trace().real();
    return {SingleModeDensity(rho / p_success, cutoff, true), p_success, f};
}

// Collective-decay dynamics from a state in span{|00>, |10>, |01>}, solved in
// the basis psi_+ = (g1|10> + g2|01>)/G, psi_- = (g2|10> - g1|01>)/G, v = |00>.
inline TwoModeDensity beamsplit_decoherence_evolve(double g1, double g2, double delta_w, double chi_c,
                                                   double gamma_bar, double t, const TwoModeDensity& rho0) {
    if (g1 == 0.0 && g2 == 0.0) throw ZeroCoupling("beamsplit_decoherence_evolve: g1 = g2 = 0");
    if (gamma_bar < 0.0 || t < 0.0) throw InvalidArgument("beamsplit_decoherence_evolve: negative rate or time");
    const FockCutoff cutoff = rho0.cutoff();
    const int i00 = rho0.index(0, 0), i10 = rho0.index(1, 0), i01 = rho0.index(0, 1);
    double outside = 0.0;
    for (int i = 0; i < rho0.dim(); ++i)
        if (i != i00 && i != i10 && i != i01) outside += std::abs(rho0.matrix()(i, i).real());
    if (outside > 1e-12)
        throw SubspaceViolation("beamsplit_decoherence_evolve: population " + std::to_string(outside) +
                                " outside the zero/one-photon subspace");

    const double G = std::hypot(g1, g2);
    Matrix basis = Matrix::Zero(3, rho0.dim());  // rows: <psi_+|, <psi_-|, <v|
    basis(0, i10) = g1 / G;
    basis(0, i01) = g2 / G;
    basis(1, i10) = g2 / G;
    basis(1, i01) = -g1 / G;
    basis(2, i00) = 1.0;

    const Matrix r0 = basis * rho0.matrix() * basis.adjoint();
    Matrix r = r0;
    const double decay = std::exp(-2.0 * gamma_bar * t);
    const cplx coh = std::exp(-cplx(gamma_bar, delta_w + chi_c) * t);
    r(0, 0) = r0(0, 0) * decay;
    r(2, 2) = r0(2, 2) + r0(0, 0) * (1.0 - decay);
    r(0, 1) = r0(0, 1) * coh;
    r(0, 2) = r0(0, 2) * coh;
    r(1, 0) = std::conj(r(0, 1));
    r(2, 0) = std::conj(r(0, 2));
    Matrix out = basis.adjoint() * r * basis;
    return TwoModeDensity(std::move(out), cutoff, rho0.normalized());
}

// Negativity versus time from |10><10| under collective decay.
inline TimeSeries negativity_trace(double g1, double g2, double delta_w, double chi_c, double gamma_bar,
                                   const std::vector<double>& t_samples) {
    if (t_samples.empty()) throw InvalidArgument("negativity_trace: no time samples");
    for (std::size_t i = 1; i < t_samples.size(); ++i)
        if (!(t_samples[i] > t_samples[i - 1])) throw InvalidArgument("negativity_trace: samples must ascend");
    const FockCutoff cutoff(1);
    Matrix m = Matrix::Zero(cutoff.dim2(), cutoff.dim2());
    m(1 * cutoff.dim() + 0, 1 * cutoff.dim() + 0) = 1.0;
    const TwoModeDensity rho0(m, cutoff, true);
    TimeSeries ts;
    for (double t : t_samples) {
        ts.t.push_back(t);
        ts.values.push_back(negativity(beamsplit_decoherence_evolve(g1, g2, delta_w, chi_c, gamma_bar, t, rho0)));
    }
    return ts;
}

}  // namespace kerrloss
