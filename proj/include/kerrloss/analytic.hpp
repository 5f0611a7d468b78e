// analytic.hpp: closed-form evolution of two Kerr-coupled modes under
// uncorrelated photon loss and dephasing, starting from coherent states.
//
// Phase convention: a number-basis coherence |k,m><l,n| picks up
//   exp{ i t [chi_11 (k^2-l^2) + 2 chi_12 (km - ln) + chi_22 (m^2-n^2)] },
// i.e. the master-equation Hamiltonian is H = -sum_kl chi_kl n_k n_l. With the
// pure cross-Kerr choice chi_kl = (1 - delta_kl) chi / 2 this is the familiar
// exp{i chi t (km - ln)} factor. lindblad.hpp builds its generators with the
// same convention, so closed forms and integrations can be compared directly.

#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <optional>
#include <string>
#include <vector>

#include "kerrloss/error.hpp"
#include "kerrloss/fock.hpp"
#include "kerrloss/parallel.hpp"

namespace kerrloss {

using KerrMatrix = std::array<std::array<double, 2>, 2>;

struct KerrLossParams {
    double chi = 0.0;                       // cross-Kerr rate, used when chi_matrix is empty
    std::optional<KerrMatrix> chi_matrix;   // general symmetric chi_kl
    double gamma1 = 0.0, gamma2 = 0.0, gamma12 = 0.0;
    double d1 = 0.0, d2 = 0.0, d12 = 0.0;

    // chi_kl = chi for all k,l: the Hamiltonian -chi (n1 + n2)^2, invariant
    // under mode rotations.
    static KerrLossParams symmetric(double chi) {
        KerrLossParams p;
        p.chi = chi;
        p.chi_matrix = KerrMatrix{{{chi, chi}, {chi, chi}}};
        return p;
    }

    KerrMatrix kerr_matrix() const {
        if (chi_matrix) return *chi_matrix;
        return KerrMatrix{{{0.0, 0.5 * chi}, {0.5 * chi, 0.0}}};
    }

    // Every violated invariant, empty when the parameters are usable.
    std::vector<std::string> violations() const {
        std::vector<std::string> out;
        auto finite = [](double x) { return std::isfinite(x); };
        for (double v : {chi, gamma1, gamma2, gamma12, d1, d2, d12})
            if (!finite(v)) {
                out.emplace_back("all rates must be finite");
                break;
            }
        if (gamma1 < 0.0) out.emplace_back("gamma1 >= 0 failed");
        if (gamma2 < 0.0) out.emplace_back("gamma2 >= 0 failed");
        if (d1 < 0.0) out.emplace_back("d1 >= 0 failed");
        if (d2 < 0.0) out.emplace_back("d2 >= 0 failed");
        const double gslack = 1e-12 * std::max(1.0, gamma1 * gamma2);
        if (gamma1 * gamma2 - gamma12 * gamma12 < -gslack) out.emplace_back("gamma1*gamma2 >= gamma12^2 failed");
        const double dslack = 1e-12 * std::max(1.0, d1 * d2);
        if (d1 * d2 - d12 * d12 < -dslack) out.emplace_back("d1*d2 >= d12^2 failed");
        if (chi_matrix) {
            const auto& m = *chi_matrix;
            if (m[0][1] != m[1][0]) out.emplace_back("chi_matrix must be symmetric");
        }
        return out;
    }

    void check() const {
        auto v = violations();
        if (!v.empty()) throw InvalidArgument("KerrLossParams: " + v.front());
    }
};

// A named inequality evaluated by an approximant. margin > 0 means it holds;
// it is the log10 ratio of the two sides for "much greater" conditions and the
// plain difference for strict ones.
struct Condition {
    std::string name;
    bool holds = false;
    double margin = 0.0;
};

struct ValidityReport {
    std::vector<Condition> conditions;

    bool all_hold() const {
        for (const auto& c : conditions)
            if (!c.holds) return false;
        return true;
    }
};

// "a >> b" is read as a >= 10 b.
inline constexpr double kMuchGreaterFactor = 10.0;

namespace detail {

// (e^w - 1) without cancellation for small |w|.
inline cplx expm1(cplx w) {
    const double x = w.real();
    const double y = w.imag();
    const double s = std::sin(0.5 * y);
    const cplx eiy_minus_1(-2.0 * s * s, std::sin(y));
    return std::expm1(x) * std::polar(1.0, y) + eiy_minus_1;
}

// rate * alpha_sq * (e^{z t} - 1) / z with z = i*freq - rate: direct branch.
inline cplx feed_direct(double rate, double freq, double alpha_sq, double t) {
    const cplx z(-rate, freq);
    return rate * alpha_sq * detail::expm1(z * t) / z;
}

// Six-term Taylor series of the same quantity; exact at z = 0.
inline cplx feed_series(double rate, double freq, double alpha_sq, double t) {
    const cplx w = cplx(-rate, freq) * t;
    const cplx poly = 1.0 + w / 2.0 * (1.0 + w / 3.0 * (1.0 + w / 4.0 * (1.0 + w / 5.0 * (1.0 + w / 6.0))));
    return rate * alpha_sq * t * poly;
}

inline constexpr double kSeriesThreshold = 1e-6;

}  // namespace detail

// Accumulated amplitude fed back by photon loss while the other mode keeps
// imprinting a phase at angular frequency freq.
inline cplx loss_feed(double rate, double freq, double alpha_sq, double t) {
    if (std::abs(cplx(-rate, freq) * t) < detail::kSeriesThreshold)
        return detail::feed_series(rate, freq, alpha_sq, t);
    return detail::feed_direct(rate, freq, alpha_sq, t);
}

// f(t) = rate (e^{(i chi index - rate) t} - 1) / (i chi index - rate) * alpha_sq.
inline cplx f_function(double rate, int detuning_index, double chi, double alpha_sq, double t) {
    if (rate < 0.0 || t < 0.0) throw InvalidArgument("f_function: rate and t must be non-negative");
    return loss_feed(rate, chi * static_cast<double>(detuning_index), alpha_sq, t);
}

namespace detail {

inline void require_uncorrelated(const KerrLossParams& p, const char* where) {
    if (p.gamma12 != 0.0 || p.d12 != 0.0)
        throw UncorrelatedOnlyError(std::string(where) + ": requires gamma12 = d12 = 0");
}

// Quadratic phase rate q(k,m) = chi11 k^2 + 2 chi12 k m + chi22 m^2.
inline double kerr_form(const KerrMatrix& x, int k, int m) {
    return x[0][0] * k * k + 2.0 * x[0][1] * k * m + x[1][1] * m * m;
}

// Phase frequencies seen by loss in mode 1 and mode 2 for coherence
// differences dk = k-l and dm = m-n.
inline double feed_freq_mode1(const KerrMatrix& x, int dk, int dm) { return 2.0 * (x[0][0] * dk + x[0][1] * dm); }
inline double feed_freq_mode2(const KerrMatrix& x, int dk, int dm) { return 2.0 * (x[1][1] * dm + x[0][1] * dk); }

}  // namespace detail

struct ExactSolution {
    TwoModeDensity state;   // renormalized
    double raw_trace;       // trace of the truncated closed form before renormalization
};

// Number-basis solution for coherent inputs and uncorrelated reservoirs.
inline ExactSolution evolve_exact_with_diagnostics(cplx alpha1, cplx alpha2, double t, const KerrLossParams& p,
                                                   FockCutoff cutoff) {
    p.check();
    detail::require_uncorrelated(p, "evolve_exact");
    if (t < 0.0) throw InvalidArgument("evolve_exact: t must be non-negative");
    require_adequate(alpha1, cutoff, "evolve_exact");
    require_adequate(alpha2, cutoff, "evolve_exact");

    const KerrMatrix x = p.kerr_matrix();
    const int d = cutoff.dim();
    const Vector c1 = coherent_amplitudes(alpha1, d);
    const Vector c2 = coherent_amplitudes(alpha2, d);
    const double n1 = std::norm(alpha1);
    const double n2 = std::norm(alpha2);

    // Everything except the amplitude prefactors depends on (k,l,m,n) only
    // through the phase form and the differences, so tabulate the
    // difference-dependent factor once.
    const int span = 2 * d - 1;
    std::vector<cplx> diff_factor(static_cast<std::size_t>(span * span));
    for (int dk = -(d - 1); dk <= d - 1; ++dk)
        for (int dm = -(d - 1); dm <= d - 1; ++dm) {
            const cplx f1 = loss_feed(p.gamma1, detail::feed_freq_mode1(x, dk, dm), n1, t);
            const cplx f2 = loss_feed(p.gamma2, detail::feed_freq_mode2(x, dk, dm), n2, t);
            const double deph = -0.5 * (p.d1 * dk * dk + p.d2 * dm * dm) * t;
            diff_factor[static_cast<std::size_t>((dk + d - 1) * span + (dm + d - 1))] = std::exp(f1 + f2 + deph);
        }

    Matrix rho(cutoff.dim2(), cutoff.dim2());
    parallel_for(cutoff.dim2(), [&](int row) {
        const int k = row / d;
        const int m = row % d;
        const double qkm = detail::kerr_form(x, k, m);
        for (int l = 0; l < d; ++l)
            for (int n = 0; n < d; ++n) {
                const double phase = t * (qkm - detail::kerr_form(x, l, n));
                const double decay = -0.5 * t * (p.gamma1 * (k + l) + p.gamma2 * (m + n));
                const cplx df = diff_factor[static_cast<std::size_t>((k - l + d - 1) * span + (m - n + d - 1))];
                rho(row, l * d + n) =
                    c1(k) * std::conj(c1(l)) * c2(m) * std::conj(c2(n)) * std::exp(cplx(decay, phase)) * df;
            }
    });
    const double raw = rho.trace().real();
    rho /= raw;
    return ExactSolution{TwoModeDensity(std::move(rho), cutoff, true), raw};
}

inline TwoModeDensity evolve_exact(cplx alpha1, cplx alpha2, double t, const KerrLossParams& p, FockCutoff cutoff) {
    return evolve_exact_with_diagnostics(alpha1, alpha2, t, p, cutoff).state;
}

// Default summation window for purity_exact.
inline FockCutoff purity_window(cplx alpha1, cplx alpha2) {
    return FockCutoff(std::max(required_cutoff(alpha1), required_cutoff(alpha2)) + 16);
}

inline constexpr double kPurityTermThreshold = 1e-14;

// Tr rho(t)^2 for the exact solution without dephasing, as the quadruple sum
// over photon numbers. Terms are dropped once the Poisson envelope of an index
// falls below the term threshold past its peak.
inline double purity_exact(cplx alpha1, cplx alpha2, double t, const KerrLossParams& p,
                           std::optional<FockCutoff> window = std::nullopt) {
    p.check();
    detail::require_uncorrelated(p, "purity_exact");
    if (p.d1 != 0.0 || p.d2 != 0.0) throw InvalidArgument("purity_exact: requires d1 = d2 = 0");
    if (t < 0.0) throw InvalidArgument("purity_exact: t must be non-negative");
    const FockCutoff cut = window.value_or(purity_window(alpha1, alpha2));

    const KerrMatrix x = p.kerr_matrix();
    const double n1 = std::norm(alpha1);
    const double n2 = std::norm(alpha2);

    // w_j(n) = e^{-2|a|^2} |a|^{4n}/(n!)^2 ... written per index as
    // e^{-|a|^2} |a|^{2n}/n! e^{-gamma t n}, squared pairs come from k and l.
    auto envelope = [&](double nbar, double rate) {
        std::vector<double> w;
        double logw = -nbar;
        for (int n = 0; n <= cut.n_max(); ++n) {
            if (n > 0) logw += std::log(nbar) - std::log(static_cast<double>(n));
            const double v = nbar > 0.0 || n == 0 ? std::exp(logw - rate * t * n) : 0.0;
            if (v < kPurityTermThreshold && static_cast<double>(n) > nbar) break;
            w.push_back(v);
        }
        return w;
    };
    const std::vector<double> w1 = envelope(n1, p.gamma1);
    const std::vector<double> w2 = envelope(n2, p.gamma2);
    const int K = static_cast<int>(w1.size());
    const int M = static_cast<int>(w2.size());

    double total = 0.0;
    for (int k = 0; k < K; ++k)
        for (int l = 0; l < K; ++l) {
            const double wkl = w1[k] * w1[l];
            if (wkl < kPurityTermThreshold) continue;
            for (int m = 0; m < M; ++m)
                for (int n = 0; n < M; ++n) {
                    const double base = wkl * w2[m] * w2[n];
                    if (base < kPurityTermThreshold * kPurityTermThreshold) continue;
                    const cplx f1 = loss_feed(p.gamma1, detail::feed_freq_mode1(x, k - l, m - n), n1, t);
                    const cplx f2 = loss_feed(p.gamma2, detail::feed_freq_mode2(x, k - l, m - n), n2, t);
                    total += base * std::exp(2.0 * (f1.real() + f2.real()));
                }
        }
    return total;
}

struct ApproximateState {
    TwoModeDensity state;
    ValidityReport report;
};

namespace detail {

// Photon numbers carrying Poisson weight above 1e-6: [lo, hi].
inline std::pair<int, int> photon_window(double nbar) {
    int lo = -1, hi = 0;
    double logw = -nbar;
    const int limit = static_cast<int>(nbar + 20.0 * std::sqrt(nbar + 1.0) + 30.0);
    for (int n = 0; n <= limit; ++n) {
        if (n > 0) logw += (nbar > 0.0 ? std::log(nbar) : -INFINITY) - std::log(static_cast<double>(n));
        if (std::exp(logw) > 1e-6) {
            if (lo < 0) lo = n;
            hi = n;
        }
    }
    if (lo < 0) lo = 0;
    return {lo, hi};
}

inline double pure_cross_chi(const KerrLossParams& p, const char* where) {
    const KerrMatrix x = p.kerr_matrix();
    if (x[0][0] != 0.0 || x[1][1] != 0.0)
        throw InvalidArgument(std::string(where) + ": approximants cover the pure cross-Kerr Hamiltonian only");
    return 2.0 * x[0][1];
}

// Pure state sum_k c1_k |k> |a2 e^{i chi k t}>, rendered on the cutoff.
inline TwoModeDensity cross_kerr_pure_state(cplx a1t, cplx a2t, double chi, double t, FockCutoff cutoff) {
    const int d = cutoff.dim();
    const Vector c1 = coherent_amplitudes(a1t, d);
    Vector psi(cutoff.dim2());
    for (int k = 0; k < d; ++k) {
        const Vector c2 = coherent_amplitudes(a2t * std::polar(1.0, chi * k * t), d);
        psi.segment(k * d, d) = c1(k) * c2;
    }
    return TwoModeDensity::from_pure(psi, cutoff, true);
}

// t e^{-g t} - (1 - e^{-g t}) / g, continuous at g = 0.
inline double long_time_phase_integral(double g, double t) {
    if (g == 0.0) return 0.0;
    return t * std::exp(-g * t) + std::expm1(-g * t) / g;
}

// (t^2/2 + t/g + 1/g^2) e^{-g t} - 1/g^2; tends to -g t^3 / 6 as g t -> 0.
inline double long_time_quadratic(double g, double t) {
    if (g * t < 1e-4) return -g * t * t * t / 6.0;
    const double e = std::exp(-g * t);
    return (0.5 * t * t + t / g) * e + std::expm1(-g * t) / (g * g);
}

}  // namespace detail

// Short-time pure-state approximant: loss only rescales and rotates the
// amplitudes, the lossless cross-Kerr structure is kept.
inline ApproximateState short_time_state(cplx alpha1, cplx alpha2, double t, const KerrLossParams& p,
                                         FockCutoff cutoff) {
    p.check();
    const double chi = detail::pure_cross_chi(p, "short_time_state");
    const double n1 = std::norm(alpha1);
    const double n2 = std::norm(alpha2);
    const cplx a1t = alpha1 * std::exp(cplx(-0.5 * p.gamma1 * t, 0.5 * p.gamma2 * chi * n2 * t * t));
    const cplx a2t = alpha2 * std::exp(cplx(-0.5 * p.gamma2 * t, 0.5 * p.gamma1 * chi * n1 * t * t));

    const auto [lo1, hi1] = detail::photon_window(n1);
    const auto [lo2, hi2] = detail::photon_window(n2);
    const int span1 = hi1 - lo1;
    const int span2 = hi2 - lo2;

    ValidityReport rep;
    auto small_time = [&](const char* name, double rate, int span) {
        // |i chi t D - rate t| < 1 for every difference D in the window.
        const double worst = std::abs(cplx(-rate * t, chi * t * span));
        rep.conditions.push_back({name, worst < 1.0, 1.0 - worst});
    };
    small_time("small_time_loss_mode1", p.gamma1, span2);
    small_time("small_time_loss_mode2", p.gamma2, span1);

    auto expansion = [&](const char* name, double rate, int span) {
        double worst_rhs = 0.0;
        for (int D = 0; D <= span; ++D)
            worst_rhs = std::max(worst_rhs, std::abs(rate * rate * t * t - chi * chi * t * t * D * D) / 6.0);
        const double lhs = 1.0 - 0.5 * rate * t;
        const bool holds = lhs > 0.0 && lhs >= kMuchGreaterFactor * worst_rhs;
        const double margin = worst_rhs > 0.0 ? std::log10(std::max(lhs, 1e-300) / worst_rhs) - 1.0
                                               : (lhs > 0.0 ? INFINITY : -INFINITY);
        rep.conditions.push_back({name, holds, margin});
    };
    expansion("expansion_mode1", p.gamma1, span2);
    expansion("expansion_mode2", p.gamma2, span1);

    return ApproximateState{detail::cross_kerr_pure_state(a1t, a2t, chi, t, cutoff), std::move(rep)};
}

// Long-time (strong loss) pure-state approximant.
inline ApproximateState long_time_state(cplx alpha1, cplx alpha2, double t, const KerrLossParams& p,
                                        FockCutoff cutoff) {
    p.check();
    const double chi = detail::pure_cross_chi(p, "long_time_state");
    const double n1 = std::norm(alpha1);
    const double n2 = std::norm(alpha2);
    const double ph1 = -chi * n2 * detail::long_time_phase_integral(p.gamma2, t);
    const double ph2 = -chi * n1 * detail::long_time_phase_integral(p.gamma1, t);
    const cplx a1t = alpha1 * std::exp(cplx(-0.5 * p.gamma1 * t, ph1));
    const cplx a2t = alpha2 * std::exp(cplx(-0.5 * p.gamma2 * t, ph2));

    const auto [lo1, hi1] = detail::photon_window(n1);
    const auto [lo2, hi2] = detail::photon_window(n2);

    ValidityReport rep;
    auto long_time = [&](const char* name, double rate, int span) {
        const double lhs = -std::expm1(-rate * t);
        const double rhs = chi * chi * span * span * std::abs(detail::long_time_quadratic(rate, t));
        const bool holds = lhs > 0.0 && lhs >= kMuchGreaterFactor * rhs;
        const double margin = rhs > 0.0 ? std::log10(std::max(lhs, 1e-300) / rhs) - 1.0
                                        : (lhs > 0.0 ? INFINITY : -INFINITY);
        rep.conditions.push_back({name, holds, margin});
    };
    long_time("long_time_loss_mode2", p.gamma2, hi1 - lo1);
    long_time("long_time_loss_mode1", p.gamma1, hi2 - lo2);

    return ApproximateState{detail::cross_kerr_pure_state(a1t, a2t, chi, t, cutoff), std::move(rep)};
}

// Pure loss on a single coherent mode keeps it coherent with amplitude a e^{-gamma t/2}.
inline SingleModeDensity single_mode_decay(cplx alpha, double gamma, double t, FockCutoff cutoff) {
    if (gamma < 0.0 || t < 0.0) throw InvalidArgument("single_mode_decay: gamma and t must be non-negative");
    return coherent_density(alpha * std::exp(-0.5 * gamma * t), cutoff);
}

struct LambdaRates {
    KerrMatrix chi_matrix;
    double gamma1, gamma2, gamma12;

    KerrLossParams params() const {
        KerrLossParams p;
        p.chi_matrix = chi_matrix;
        p.gamma1 = gamma1;
        p.gamma2 = gamma2;
        p.gamma12 = gamma12;
        return p;
    }
};

// Effective Kerr matrix and correlated loss rates of two modes dispersively
// coupled to one driven Lambda emitter. The generator Hamiltonian is
// (delta2 / 2 Omega^2) (u1 n1 + u2 n2)^2 with u1 = g1^2/(delta1 - det),
// u2 = g2^2/(delta1 + det); in the chi_kl convention above chi_kl = -(delta2/2 Omega^2) u_k u_l.
inline LambdaRates lambda_system_rates(double g1, double g2, double delta1, double delta2, double det,
                                       double omega, double gamma_atom) {
    if (omega == 0.0) throw InvalidArgument("lambda_system_rates: Omega must be non-zero");
    if (gamma_atom < 0.0) throw InvalidArgument("lambda_system_rates: emitter decay rate must be non-negative");
    const double dm = delta1 - det;
    const double dp = delta1 + det;
    if (dm == 0.0 || dp == 0.0) throw DegenerateDetuning("lambda_system_rates: delta1 = +-delta");

    const double u1 = g1 * g1 / dm;
    const double u2 = g2 * g2 / dp;
    const double scale = delta2 / (2.0 * omega * omega);

    // gamma_k = s_k^2 and gamma12 = s1 s2 with s_k = sqrt(gamma) g_k / (delta1 -+ det),
    // so gamma1 gamma2 = gamma12^2 holds by construction.
    const double root = std::sqrt(gamma_atom);
    const double s1 = root * g1 / dm;
    const double s2 = root * g2 / dp;

    LambdaRates r;
    r.chi_matrix = KerrMatrix{{{-scale * u1 * u1, -scale * u1 * u2}, {-scale * u1 * u2, -scale * u2 * u2}}};
    r.gamma1 = s1 * s1;
    r.gamma2 = s2 * s2;
    r.gamma12 = s1 * s2;
    return r;
}

}  // namespace kerrloss
