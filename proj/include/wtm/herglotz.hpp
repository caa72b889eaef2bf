#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <vector>

#include "wtm/errors.hpp"
#include "wtm/quadrature.hpp"
#include "wtm/specialfn.hpp"

namespace wtm {

using Sampler = std::function<cplx(cplx)>;

inline const std::vector<double>& default_schedule() {
    static const std::vector<double> s{1e-2, 5e-3, 2.5e-3, 1.25e-3};
    return s;
}

struct Atom {
    double location;
    double mass;
};

struct SpectralMeasure {
    std::vector<double> grid;
    std::vector<double> density;
    std::vector<double> weights;  // optional quadrature weights in lambda; trapezoid when empty
    std::vector<Atom> atoms;
    std::vector<std::array<double, 3>> matrix_density;  // (w00, w01, w11) per grid point, optional
};

struct HerglotzRepresentation {
    double c = 0.0;
    double d = 0.0;
    SpectralMeasure measure;
};

struct Extrapolated {
    double value = 0.0;
    double err = 0.0;
    bool converged = true;
    std::vector<double> raw;  // one per epsilon
};

// Neville extrapolation of samples F(eps_i) to eps = 0; err compares the full tableau with the one
// that drops the coarsest eps, i.e. the two finest diagonals.
inline Extrapolated richardson(const std::vector<double>& eps, const std::vector<double>& vals) {
    const std::size_t n = eps.size();
    if (n == 0 || vals.size() != n) throw ModelError("richardson: schedule and samples differ in length");
    auto neville = [&](std::size_t from) {
        std::vector<double> p(vals.begin() + from, vals.end());
        const std::size_t k = p.size();
        for (std::size_t m = 1; m < k; ++m)
            for (std::size_t i = 0; i + m < k; ++i) {
                const double a = eps[from + i], b = eps[from + i + m];
                p[i] = (b * p[i] - a * p[i + 1]) / (b - a);
            }
        return p[0];
    };
    Extrapolated r;
    r.raw = vals;
    r.value = neville(0);
    r.err = n > 1 ? std::abs(r.value - neville(1)) : std::abs(r.value);
    // estimates should approach their limit without sign flips of growing size
    for (std::size_t i = 2; i < n; ++i) {
        const double d1 = vals[i - 1] - vals[i - 2], d2 = vals[i] - vals[i - 1];
        if (d1 * d2 < 0.0 && std::abs(d2) > std::abs(d1) && std::abs(d2) > 1e-9 * std::max(1.0, std::abs(vals[i]))) r.converged = false;
    }
    return r;
}

struct InversionOptions {
    std::vector<double> schedule = default_schedule();
    double rel_tol = 1e-9;
    bool smooth = false;  // skip the atom-resolving initial subdivision
};

namespace detail {

inline void check_schedule(const std::vector<double>& s) {
    if (s.empty()) throw ModelError("epsilon schedule is empty");
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (!(s[i] > 0.0)) throw ModelError("epsilon schedule must be positive");
        if (i && !(s[i] < s[i - 1])) throw ModelError("epsilon schedule must decrease");
    }
}

// pi^{-1} int_{l1}^{l2} Im m(l + i eps) dl
inline double strip_integral(const Sampler& m, double l1, double l2, double eps, const InversionOptions& o) {
    auto f = [&](double l) { return m(cplx(l, eps)).imag() / pi; };
    const double width = l2 - l1;
    const int pieces = o.smooth ? 1 : std::clamp(static_cast<int>(width / (50.0 * eps)), 1, 64);
    double s = 0.0;
    for (int i = 0; i < pieces; ++i) {
        const double a = l1 + width * i / pieces, b = l1 + width * (i + 1) / pieces;
        s += integrate_adaptive(f, a, b, o.rel_tol);
    }
    return s;
}

}  // namespace detail

struct PointMass {
    double mass = 0.0;
    double err = 0.0;
    double eps_re_limit = 0.0;  // extrapolated eps Re m, should vanish
    Extrapolated im, re;
};

// omega({lambda}) = lim eps Im m(lambda + i eps)
inline PointMass point_mass(const Sampler& m, double lambda, const std::vector<double>& schedule = default_schedule()) {
    detail::check_schedule(schedule);
    std::vector<double> im, re;
    for (double e : schedule) {
        const cplx v = m(cplx(lambda, e));
        im.push_back(e * v.imag());
        re.push_back(e * v.real());
    }
    PointMass p;
    p.im = richardson(schedule, im);
    p.re = richardson(schedule, re);
    p.mass = p.im.value;
    p.err = p.im.err;
    p.eps_re_limit = p.re.value;
    // continuity point: the extrapolant sits at rounding level around zero
    if (std::abs(p.mass) <= std::max(1e-10, 10.0 * p.err)) p.mass = std::max(p.mass, 0.0);
    return p;
}

struct StieltjesResult {
    double value = 0.0;
    double err = 0.0;
    bool converged = true;
    bool nudged = false;  // an endpoint atom forced the delta shift
    std::vector<double> raw;
};

// rho((l1, l2]) = pi^{-1} lim_delta lim_eps int_{l1+delta}^{l2+delta} Im m(l + i eps) dl
inline StieltjesResult stieltjes_inversion(const Sampler& m, double l1, double l2, const InversionOptions& o = {}) {
    if (!(l2 > l1)) throw ModelError("stieltjes_inversion: need lambda1 < lambda2");
    detail::check_schedule(o.schedule);
    auto at_eps = [&](double a, double b, const std::vector<double>& sched) {
        std::vector<double> v;
        for (double e : sched) v.push_back(detail::strip_integral(m, a, b, e, o));
        return richardson(sched, v);
    };
    auto endpoint_atom = [&](double l) {
        const auto p = point_mass(m, l, o.schedule);
        return p.mass > std::max(1e-8, 10.0 * p.err);
    };
    StieltjesResult r;
    if (!endpoint_atom(l1) && !endpoint_atom(l2)) {
        const auto e = at_eps(l1, l2, o.schedule);
        r.value = e.value;
        r.err = e.err;
        r.converged = e.converged;
        r.raw = e.raw;
        return r;
    }
    // linear extrapolation in delta from {1e-3, 5e-4}. The eps limit comes first, so the
    // schedule is rescaled to sit a decade below delta; otherwise the atom's Lorentzian straddles the end.
    auto scaled = [&](double delta) {
        std::vector<double> s;
        for (double e : o.schedule) s.push_back(e * 0.1 * delta / o.schedule.front());
        return s;
    };
    const auto a = at_eps(l1 + 1e-3, l2 + 1e-3, scaled(1e-3)), b = at_eps(l1 + 5e-4, l2 + 5e-4, scaled(5e-4));
    r.value = 2.0 * b.value - a.value;
    r.err = std::abs(b.value - a.value) + a.err + b.err;
    r.converged = a.converged && b.converged;
    r.nudged = true;
    r.raw = b.raw;
    return r;
}

struct DensityResult {
    double value = 0.0;
    double err = 0.0;
    bool converged = true;
    std::vector<double> raw;
};

// pi^{-1} Im m(lambda + i0); a 1/eps blow-up means an atom sits at lambda (PoleSignal).
inline DensityResult ac_density(const Sampler& m, double lambda, const std::vector<double>& schedule = default_schedule()) {
    detail::check_schedule(schedule);
    std::vector<double> v;
    for (double e : schedule) v.push_back(m(cplx(lambda, e)).imag() / pi);
    const double e0 = schedule.front(), e1 = schedule.back();
    if (schedule.size() > 1 && std::abs(v.back()) > 2.0 * std::abs(v.front()) && std::abs(v.back()) * e1 > 0.5 * std::abs(v.front()) * e0)
        throw PoleSignal("ac_density: Im m grows like 1/eps; a point mass sits here", lambda);
    const auto r = richardson(schedule, v);
    DensityResult d{r.value, r.err, r.converged, r.raw};
    if (d.value < 0.0) {
        if (d.value < -std::max(1e-10, 10.0 * d.err)) throw ConvergenceError("ac_density: extrapolated density is negative", d.value);
        d.value = 0.0;
    }
    return d;
}

// ---------------------------------------------------------------- representation residual

struct ResidualReport {
    double max_residual = 0.0;
    bool tail_dominated = false;
    double tail_bound = 0.0;
    std::vector<cplx> residuals;
};

namespace detail {

// int_L^inf A l^beta [1/(l - z) - l/(1 + l^2)] dl, expanded in 1/l (needs L > |z|, L > 1).
inline cplx power_tail(double A, double beta, double L, cplx z, double* bound) {
    cplx s = 0.0;
    cplx zp = z;  // z^{n-1}
    double last = 0.0;
    for (int n = 2; n < 400; ++n) {
        if (!(n - 1 - beta > 0.0)) {
            zp *= z;
            continue;
        }
        cplx coef = zp;
        if (n % 2 == 1) coef -= ((n - 1) / 2) % 2 == 0 ? 1.0 : -1.0;
        const cplx term = coef * A * std::pow(L, beta - n + 1) / (n - 1 - beta);
        s += term;
        last = std::abs(term);
        zp *= z;
        if (last < 1e-17 * std::max(1.0, std::abs(s))) break;
    }
    if (bound) *bound = last;
    return s;
}

}  // namespace detail

// rep(z) = c + d z + sum atoms + int density [1/(l - z) - l/(1 + l^2)] + power-law tail beyond the last grid point.
inline ResidualReport representation_residual(const Sampler& m, const HerglotzRepresentation& rep, const std::vector<cplx>& test_z) {
    if (rep.d < 0.0) throw ModelError("representation: d must be nonnegative");
    const auto& g = rep.measure.grid;
    const auto& w = rep.measure.density;
    if (g.size() != w.size()) throw ModelError("representation: grid and density differ in length");
    for (std::size_t i = 1; i < g.size(); ++i)
        if (!(g[i] > g[i - 1])) throw ModelError("representation: grid must increase");
    for (double v : w)
        if (v < -1e-10) throw ModelError("representation: negative density");
    for (const auto& a : rep.measure.atoms)
        if (a.mass < 0.0) throw ModelError("representation: negative atom");
    ResidualReport out;
    const auto& R = gauss_legendre(16);
    for (cplx z : test_z) {
        cplx v = rep.c + rep.d * z;
        for (const auto& a : rep.measure.atoms) v += a.mass * (1.0 / (a.location - z) - a.location / (1.0 + a.location * a.location));
        if (g.size() >= 2) {
            // linear density between grid points, Gauss per cell
            for (std::size_t i = 0; i + 1 < g.size(); ++i) {
                const double hw = 0.5 * (g[i + 1] - g[i]);
                for (std::size_t k = 0; k < R.x.size(); ++k) {
                    const double t = 0.5 * (R.x[k] + 1.0);
                    const double l = g[i] + 2.0 * hw * t;
                    const double dens = (1.0 - t) * w[i] + t * w[i + 1];
                    v += R.w[k] * hw * dens * (1.0 / (l - z) - l / (1.0 + l * l));
                }
            }
            // power law through the last two samples
            const std::size_t n = g.size();
            if (w[n - 1] > 0.0 && w[n - 2] > 0.0 && g[n - 2] > 0.0) {
                const double beta = std::log(w[n - 1] / w[n - 2]) / std::log(g[n - 1] / g[n - 2]);
                const double A = w[n - 1] / std::pow(g[n - 1], beta);
                const double L = g.back();
                if (!(L > 2.0 * std::abs(z)) || !(L > 1.0)) out.tail_dominated = true;
                double bound = 0.0;
                if (!out.tail_dominated) v += detail::power_tail(A, beta, L, z, &bound);
                out.tail_bound = std::max(out.tail_bound, bound);
            }
        }
        const cplx r = m(z) - v;
        out.residuals.push_back(r);
        out.max_residual = std::max(out.max_residual, std::abs(r));
    }
    return out;
}

// ---------------------------------------------------------------- property report

enum class SignProfile { Herglotz, AntiHerglotz, Neither };

struct PropertyReport {
    double conjugate_symmetry = 0.0;  // max |m(conj z) - conj m(z)|
    double max_eps_abs_m = 0.0;
    double max_eps_re_limit = 0.0;    // max over lambda of |extrapolated eps Re m|
    double min_eps_re_order = 0.0;    // observed order of eps Re m -> 0 (1 means O(eps))
    double min_eps_im_limit = 0.0;
    std::vector<double> accumulated;  // measure of (l1, l1 + k h], k = 1..n
    bool measure_nondecreasing = true;
    SignProfile profile = SignProfile::Neither;
    int upper_half_plane_violations = 0;  // samples in C_+ with Im m < 0 (informational)
};

struct PropertyOptions {
    InversionOptions inversion{};
    int lambda_points = 20;
    int subintervals = 20;
};

inline PropertyReport property_report(const Sampler& m, double l1, double l2, const PropertyOptions& o = {}) {
    if (!(l2 > l1)) throw ModelError("property_report: empty window");
    const auto& sched = o.inversion.schedule;
    detail::check_schedule(sched);
    PropertyReport r;
    r.min_eps_re_order = std::numeric_limits<double>::infinity();
    r.min_eps_im_limit = std::numeric_limits<double>::infinity();
    for (int i = 0; i < o.lambda_points; ++i) {
        const double l = l1 + (l2 - l1) * (i + 0.5) / o.lambda_points;
        std::vector<double> re;
        for (double e : sched) {
            const cplx a = m(cplx(l, e)), b = m(cplx(l, -e));
            r.conjugate_symmetry = std::max(r.conjugate_symmetry, std::abs(b - std::conj(a)));
            r.max_eps_abs_m = std::max(r.max_eps_abs_m, e * std::abs(a));
            re.push_back(e * a.real());
        }
        const auto pm = point_mass(m, l, sched);
        r.max_eps_re_limit = std::max(r.max_eps_re_limit, std::abs(pm.eps_re_limit));
        r.min_eps_im_limit = std::min(r.min_eps_im_limit, pm.mass);
        if (std::abs(re.front()) > 0.0 && std::abs(re.back()) > 0.0) {
            const double order = std::log(std::abs(re.front()) / std::abs(re.back())) / std::log(sched.front() / sched.back());
            r.min_eps_re_order = std::min(r.min_eps_re_order, order);
        }
    }
    double acc = 0.0;
    const double h = (l2 - l1) / o.subintervals;
    for (int k = 0; k < o.subintervals; ++k) {
        const auto s = stieltjes_inversion(m, l1 + k * h, l1 + (k + 1) * h, o.inversion);
        if (s.value < -std::max(1e-10, 10.0 * s.err)) r.measure_nondecreasing = false;
        acc += s.value;
        r.accumulated.push_back(acc);
    }
    // sign profile on z = r e^{i theta}
    int pos = 0, neg = 0;
    for (double rad : {0.5, 1.0, 2.0, 4.0})
        for (int k = 1; k < 12; ++k) {
            const double th = pi * k / 12.0;
            const double im = m(std::polar(rad, th)).imag();
            (im >= 0.0 ? pos : neg)++;
        }
    r.upper_half_plane_violations = neg;
    r.profile = neg == 0 ? SignProfile::Herglotz : (pos == 0 ? SignProfile::AntiHerglotz : SignProfile::Neither);
    return r;
}

// 2x2 increments of a matrix measure from its entry samplers; PSD check within tolerance.
inline std::array<double, 3> matrix_stieltjes(const std::array<Sampler, 3>& entries, double l1, double l2, const InversionOptions& o = {}) {
    std::array<double, 3> w{};
    for (int k = 0; k < 3; ++k) w[k] = stieltjes_inversion(entries[k], l1, l2, o).value;
    return w;
}

inline bool is_psd(const std::array<double, 3>& w, double tol = 1e-10) {
    const double scale = std::max({std::abs(w[0]), std::abs(w[2]), 1e-300});
    return w[0] >= -tol * scale && w[2] >= -tol * scale && w[0] * w[2] - w[1] * w[1] >= -tol * scale * scale;
}

}  // namespace wtm
