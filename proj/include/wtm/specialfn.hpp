#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <string>

#include "wtm/errors.hpp"

namespace wtm {

using cplx = std::complex<double>;
using lcplx = std::complex<long double>;
inline constexpr double pi = std::numbers::pi;
inline constexpr cplx I{0.0, 1.0};

// A function value together with its x-derivative.
struct ValueDeriv {
    cplx value;
    cplx deriv;
};

// Gamma on the real line. Backed by std::tgamma; poles become errors.
inline double gamma_real(double x) {
    if (x <= 0.0 && x == std::nearbyint(x))
        throw DomainError("gamma_real: pole at nonpositive integer " + std::to_string(x));
    return std::tgamma(x);
}

// 1/Gamma, zero at the poles.
inline double rgamma(double x) {
    if (x <= 0.0 && x == std::nearbyint(x)) return 0.0;
    if (x > 171.0) return 0.0;
    return 1.0 / std::tgamma(x);
}

// Argument taken in [0, 2pi). The upper rim of the positive axis has arg 0.
inline double cut_arg(cplx z) {
    double t = std::atan2(z.imag(), z.real());
    if (t < 0.0) t += 2.0 * pi;
    return t;
}

struct CutComplex {
    enum class Branch { ArgInZeroTwoPi };
    cplx value;
    Branch branch = Branch::ArgInZeroTwoPi;
};

inline CutComplex cut_power(cplx z, double gamma) {
    if (z == cplx(0.0)) {
        if (gamma < 0.0) throw DomainError("cut_power: zero raised to a negative power");
        return {gamma == 0.0 ? cplx(1.0) : cplx(0.0)};
    }
    return {std::polar(std::pow(std::abs(z), gamma), gamma * cut_arg(z))};
}

inline CutComplex cut_log(cplx z) {
    if (z == cplx(0.0)) throw DomainError("cut_log: logarithm of zero");
    return {cplx(std::log(std::abs(z)), cut_arg(z))};
}

// Square root with Im >= 0; same branch as cut_power(z, 1/2).
inline cplx sqrt_upper(cplx z) {
    cplx s = std::sqrt(z);
    if (s.imag() < 0.0) s = -s;
    return s;
}

struct BesselOrder {
    enum class Kind { NonInteger, Integer };
    double gamma;
    Kind kind;

    static BesselOrder make(double g) {
        if (!(g >= 1.0) || !std::isfinite(g))
            throw ModelError("BesselOrder: gamma must be finite and >= 1");
        const double n = std::nearbyint(g);
        if (std::abs(g - n) < 1e-9) return {n, Kind::Integer};
        return {g, Kind::NonInteger};
    }
    bool is_integer() const { return kind == Kind::Integer; }
    int n() const { return static_cast<int>(gamma); }
};

namespace detail {

// |sqrt(z) x| above which the asymptotic expansions take over.
inline constexpr double kSeriesSwitch = 15.0;
inline constexpr double kCancellationLimit = 1e12;
inline constexpr double kMaxImagArgument = 600.0;
inline constexpr double kEulerGamma = 0.57721566490153286061;

// 2^{-nu} x^{1/2+nu} sum_k (-z x^2/4)^k / (k! Gamma(k+1+nu)), which equals
// z^{-nu/2} x^{1/2} J_nu(z^{1/2} x) and is entire in z.
// Accumulated in long double: the alternating terms grow like e^{|w|}.
inline ValueDeriv entire_series(double nu, cplx z, double x) {
    const lcplx q = -lcplx(z) * static_cast<long double>(x * x / 4.0);
    int k0 = 0;
    if (nu < 0.0 && nu == std::nearbyint(nu)) k0 = static_cast<int>(-nu);
    long double c = static_cast<long double>(rgamma(k0 + 1.0)) * rgamma(k0 + 1.0 + nu);
    lcplx qk = 1.0L;
    for (int j = 0; j < k0; ++j) qk *= q;

    lcplx s = 0.0L, s2 = 0.0L;
    long double tmax = 0.0L;
    int small = 0;
    for (int k = k0;; ++k) {
        if (k > k0) {
            c /= k * (k + static_cast<long double>(nu));
            qk *= q;
        }
        const lcplx t = c * qk;
        s += t;
        s2 += t * static_cast<long double>(2.0 * k + 0.5 + nu);
        tmax = std::max(tmax, std::abs(t));
        if (std::abs(t) <= 1e-19L * std::abs(s)) {
            if (++small == 3) break;
        } else {
            small = 0;
        }
        if (k > k0 + 800) throw ConvergenceError("entire_series: no convergence", static_cast<double>(std::abs(t)));
    }
    if (tmax > 0.0L && tmax > kCancellationLimit * std::abs(s))
        throw PrecisionLoss("entire_series: cancellation exceeds 1e12", static_cast<double>(tmax / std::abs(s)));
    const double p2 = std::pow(2.0, -nu);
    return {p2 * std::pow(x, 0.5 + nu) * cplx(s), p2 * std::pow(x, nu - 0.5) * cplx(s2)};
}

// sum_k (sign i)^k a_k(nu) / w^k of the Hankel expansions, stopped at the smallest term.
inline cplx hankel_tail(double nu, cplx w, double sign) {
    const double mu = 4.0 * nu * nu;
    const double aw = std::abs(w);
    cplx s = 1.0, t = 1.0;
    for (int k = 1; k < 200; ++k) {
        const double odd = 2.0 * k - 1.0;
        const double ratio = std::abs(mu - odd * odd) / (8.0 * k * aw);
        if (ratio >= 1.0 && odd * odd > mu) break;
        t *= ((mu - odd * odd) / (8.0 * k)) * cplx(0.0, sign) / w;
        s += t;
        if (std::abs(t) <= 1e-17 * std::abs(s)) break;
    }
    return s;
}

inline void check_imag(cplx w) {
    if (std::abs(w.imag()) > kMaxImagArgument)
        throw DomainError("asymptotic Bessel evaluation: |Im w| too large (unsupported regime)");
}

inline cplx hankel1_asym(double nu, cplx w) {
    check_imag(w);
    const cplx chi = w - nu * pi / 2.0 - pi / 4.0;
    return std::sqrt(2.0 / (pi * w)) * std::exp(I * chi) * hankel_tail(nu, w, 1.0);
}

inline cplx hankel2_asym(double nu, cplx w) {
    check_imag(w);
    const cplx chi = w - nu * pi / 2.0 - pi / 4.0;
    return std::sqrt(2.0 / (pi * w)) * std::exp(-I * chi) * hankel_tail(nu, w, -1.0);
}

inline cplx bessel_j_asym(double nu, cplx w) {
    return 0.5 * (hankel1_asym(nu, w) + hankel2_asym(nu, w));
}

inline cplx bessel_y_asym(double nu, cplx w) {
    return (hankel1_asym(nu, w) - hankel2_asym(nu, w)) / (2.0 * I);
}

// Principal-branch J_nu(w) by power series.
inline cplx bessel_j_series(double nu, cplx w) {
    const lcplx h = lcplx(w) / 2.0L;
    const lcplx q = -h * h;
    int k0 = 0;
    if (nu < 0.0 && nu == std::nearbyint(nu)) k0 = static_cast<int>(-nu);
    long double c = static_cast<long double>(rgamma(k0 + 1.0)) * rgamma(k0 + 1.0 + nu);
    lcplx qk = 1.0L;
    for (int j = 0; j < k0; ++j) qk *= q;
    lcplx s = 0.0L;
    int small = 0;
    for (int k = k0; k < k0 + 800; ++k) {
        if (k > k0) {
            c /= k * (k + static_cast<long double>(nu));
            qk *= q;
        }
        const lcplx t = c * qk;
        s += t;
        if (std::abs(t) <= 1e-19L * std::abs(s)) {
            if (++small == 3) break;
        } else {
            small = 0;
        }
    }
    if (nu == std::nearbyint(nu)) {
        lcplx hp = 1.0L;
        for (int j = 0; j < std::abs(static_cast<int>(nu)); ++j) hp *= (nu >= 0 ? h : 1.0L / h);
        return cplx(hp * s);
    }
    return std::exp(nu * std::log(w / 2.0)) * cplx(s);
}

// Y_n(w), n >= 0, principal branch, by the logarithmic series.
inline cplx bessel_y_series(int n, cplx w) {
    const lcplx h = lcplx(w) / 2.0L;
    const lcplx q = -h * h;
    lcplx hn = 1.0L;
    for (int j = 0; j < n; ++j) hn *= h;

    // finite part: sum_{k<n} (n-k-1)!/k! h^{2k-n}
    lcplx fin = 0.0L;
    if (n > 0) {
        const lcplx hinv = 1.0L / h;
        lcplx hp = 1.0L;
        for (int j = 0; j < n; ++j) hp *= hinv;
        long double coef = std::tgamma(static_cast<long double>(n));
        for (int k = 0; k < n; ++k) {
            fin += coef * hp;
            hp *= h * h;
            if (k + 1 < n) coef /= (n - k - 1.0L) * (k + 1.0L);
        }
    }

    long double c = 1.0L / std::tgamma(n + 1.0L);
    long double psi1 = -kEulerGamma;
    long double psi2 = -kEulerGamma;
    for (int j = 1; j <= n; ++j) psi2 += 1.0L / j;
    lcplx qk = 1.0L, sj = 0.0L, sp = 0.0L;
    int small = 0;
    for (int k = 0; k < 800; ++k) {
        if (k > 0) {
            c /= k * (k + static_cast<long double>(n));
            qk *= q;
            psi1 += 1.0L / k;
            psi2 += 1.0L / (n + k);
        }
        const lcplx t = c * qk;
        sj += t;
        sp += (psi1 + psi2) * t;
        if (std::abs(t) * (1.0L + std::abs(psi1 + psi2)) <= 1e-19L * std::abs(sp) + 1e-300L) {
            if (++small == 3) break;
        } else {
            small = 0;
        }
    }
    const lcplx jn = hn * sj;
    const lcplx lg = std::log(h);
    const long double lpi = std::numbers::pi_v<long double>;
    return cplx((2.0L / lpi) * jn * lg - fin / lpi - hn * sp / lpi);
}

}  // namespace detail

// Complex-argument J_nu on the principal branch.
inline cplx bessel_j(double nu, cplx w) {
    if (std::abs(w) <= detail::kSeriesSwitch) return detail::bessel_j_series(nu, w);
    return detail::bessel_j_asym(nu, w);
}

inline cplx bessel_y_integer(int n, cplx w) {
    if (n < 0) throw DomainError("bessel_y_integer: order must be nonnegative");
    if (w == cplx(0.0)) throw DomainError("bessel_y_integer: logarithmic singularity at w = 0");
    if (std::abs(w) <= detail::kSeriesSwitch) return detail::bessel_y_series(n, w);
    return detail::bessel_y_asym(n, w);
}

// z^{-+gamma/2} x^{1/2} J_{+-gamma}(z^{1/2} x) as an entire function of z, with x-derivative.
inline ValueDeriv entire_bessel_frame(int sign, const BesselOrder& order, cplx z, double x) {
    if (!(x > 0.0)) throw DomainError("entire_bessel: x must be positive");
    const double nu = (sign >= 0 ? 1.0 : -1.0) * order.gamma;
    const double aw = std::sqrt(std::abs(z)) * x;
    if (aw <= detail::kSeriesSwitch) return detail::entire_series(nu, z, x);

    // Large argument: evaluate in the closed upper half plane, reflect the rest.
    const bool flip = z.imag() < 0.0;
    const cplx zz = flip ? std::conj(z) : z;
    const cplx r = sqrt_upper(zz);
    const cplx w = r * x;
    const cplx pf = cut_power(zz, -nu / 2.0).value;
    const cplx j = detail::bessel_j_asym(nu, w);
    const cplx dj = 0.5 * (detail::bessel_j_asym(nu - 1.0, w) - detail::bessel_j_asym(nu + 1.0, w));
    const double sx = std::sqrt(x);
    ValueDeriv out{pf * sx * j, pf * (j / (2.0 * sx) + sx * r * dj)};
    if (flip) out = {std::conj(out.value), std::conj(out.deriv)};
    if (z.imag() == 0.0) out = {out.value.real(), out.deriv.real()};
    return out;
}

inline cplx entire_bessel(int sign, const BesselOrder& order, cplx z, double x) {
    return entire_bessel_frame(sign, order, z, x).value;
}

namespace detail {

// x^{1/2} H^{(1)}_gamma(z^{1/2} x) without the cut check.
inline ValueDeriv hankel_frame(const BesselOrder& order, cplx z, double x) {
    const double g = order.gamma;
    const cplx r = sqrt_upper(z);
    const cplx w = r * x;
    const double sx = std::sqrt(x);
    if (std::abs(w) > kSeriesSwitch) {
        const cplx h = hankel1_asym(g, w);
        const cplx dh = 0.5 * (hankel1_asym(g - 1.0, w) - hankel1_asym(g + 1.0, w));
        return {sx * h, h / (2.0 * sx) + sx * r * dh};
    }
    const ValueDeriv ep = entire_series(g, z, x);
    const cplx zp = cut_power(z, g / 2.0).value;
    if (!order.is_integer()) {
        const ValueDeriv em = entire_series(-g, z, x);
        const cplx zm = cut_power(z, -g / 2.0).value;
        const cplx pre = I / std::sin(pi * g);
        const cplx e = std::exp(-I * pi * g);
        return {pre * (e * zp * ep.value - zm * em.value), pre * (e * zp * ep.deriv - zm * em.deriv)};
    }
    const int n = order.n();
    const cplx y = bessel_y_series(n, w);
    const cplx ym = bessel_y_series(n - 1, w);
    const cplx dy = ym - (static_cast<double>(n) / w) * y;
    return {zp * ep.value + I * sx * y, zp * ep.deriv + I * (y / (2.0 * sx) + sx * r * dy)};
}

}  // namespace detail

// x^{1/2} H^{(1)}_gamma(z^{1/2} x) for z off [0, inf), with x-derivative.
inline ValueDeriv hankel_combination_frame(const BesselOrder& order, cplx z, double x) {
    if (z.imag() == 0.0 && z.real() >= 0.0)
        throw DomainError("hankel_combination: z lies on the cut [0, inf)");
    if (!(x > 0.0)) throw DomainError("hankel_combination: x must be positive");
    return detail::hankel_frame(order, z, x);
}

inline cplx hankel_combination(const BesselOrder& order, cplx z, double x) {
    return hankel_combination_frame(order, z, x).value;
}

// z^{n/2} x^{1/2} [ -Y_n(z^{1/2}x) + ln(z) J_n(z^{1/2}x) / pi ], entire in z.
inline ValueDeriv theta_integer_entire(int n, cplx z, double x) {
    if (n < 1) throw DomainError("theta_integer_entire: n must be positive");
    if (!(x > 0.0)) throw DomainError("theta_integer_entire: x must be positive");
    const double sx = std::sqrt(x);
    const double aw = std::sqrt(std::abs(z)) * x;
    if (aw > detail::kSeriesSwitch) {
        const bool flip = z.imag() < 0.0;
        const cplx zz = flip ? std::conj(z) : z;
        const cplx r = sqrt_upper(zz);
        const cplx w = r * x;
        const cplx pf = cut_power(zz, n / 2.0).value;
        const cplx lz = cut_log(zz).value / pi;
        const cplx y = detail::bessel_y_asym(n, w);
        const cplx j = detail::bessel_j_asym(n, w);
        const cplx dy = 0.5 * (detail::bessel_y_asym(n - 1, w) - detail::bessel_y_asym(n + 1, w));
        const cplx dj = 0.5 * (detail::bessel_j_asym(n - 1, w) - detail::bessel_j_asym(n + 1, w));
        const cplx t = -y + lz * j;
        const cplx dt = r * (-dy + lz * dj);
        ValueDeriv out{pf * sx * t, pf * (t / (2.0 * sx) + sx * dt)};
        if (flip) out = {std::conj(out.value), std::conj(out.deriv)};
        if (z.imag() == 0.0) out = {out.value.real(), out.deriv.real()};
        return out;
    }

    const long double h = x / 2.0L;
    const lcplx lz(z);
    const lcplx q = -lz * static_cast<long double>(x * x / 4.0);
    lcplx zn = 1.0L;
    for (int j = 0; j < n; ++j) zn *= lz;
    const long double hn = std::pow(h, n);

    // A = sum c_k q^k, B = sum c_k (psi(k+1)+psi(n+k+1)) q^k, with x-derivative parts A1, B1.
    long double c = 1.0L / std::tgamma(n + 1.0L);
    long double psi1 = -detail::kEulerGamma, psi2 = -detail::kEulerGamma;
    for (int j = 1; j <= n; ++j) psi2 += 1.0L / j;
    lcplx qk = 1.0L, a = 0.0L, a1 = 0.0L, b = 0.0L, b1 = 0.0L;
    int small = 0;
    for (int k = 0; k < 800; ++k) {
        if (k > 0) {
            c /= k * (k + static_cast<long double>(n));
            qk *= q;
            psi1 += 1.0L / k;
            psi2 += 1.0L / (n + k);
        }
        const lcplx t = c * qk;
        a += t;
        a1 += (2.0L * k) * t;
        b += (psi1 + psi2) * t;
        b1 += (2.0L * k) * (psi1 + psi2) * t;
        if (std::abs(t) * (1.0L + 2.0L * k) * (1.0L + std::abs(psi1 + psi2)) <= 1e-19L * std::abs(a)) {
            if (++small == 3) break;
        } else {
            small = 0;
        }
    }
    lcplx p = 0.0L, p1 = 0.0L;
    {
        long double coef = std::tgamma(static_cast<long double>(n));
        lcplx zk = 1.0L;
        for (int k = 0; k < n; ++k) {
            const int e = 2 * k - n;
            const lcplx term = coef * zk * std::pow(h, e);
            p += term;
            p1 += static_cast<long double>(e) * term;
            zk *= lz;
            if (k + 1 < n) coef /= (n - k - 1.0L) * (k + 1.0L);
        }
    }
    const long double lh = std::log(h);
    const long double lpi = std::numbers::pi_v<long double>;
    const lcplx g = zn * hn * a;
    const lcplx g1 = zn * hn * (static_cast<long double>(n) * a + a1);  // x * dG/dx
    const lcplx bb = zn * hn * b;
    const lcplx bb1 = zn * hn * (static_cast<long double>(n) * b + b1);
    const cplx t((-2.0L * lh * g + p + bb) / lpi);
    const cplx xt1((-2.0L * (g + lh * g1) + p1 + bb1) / lpi);  // x * dT/dx
    return {sx * t, t / (2.0 * sx) + xt1 / sx};
}

}  // namespace wtm
