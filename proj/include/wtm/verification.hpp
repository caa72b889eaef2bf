#pragma once

// Acceptance checks shared by the acceptance binary and `wtm_cli verify`.
// Reference values are computed here from elementary formulas or Boost, not from the model oracles.

#include <chrono>
#include <cmath>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include <boost/math/special_functions/bessel.hpp>
#include <boost/math/special_functions/bessel_prime.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "wtm/herglotz.hpp"
#include "wtm/mfunctions.hpp"
#include "wtm/models.hpp"
#include "wtm/singular.hpp"
#include "wtm/transform.hpp"

namespace wtm::verify {

struct CheckLine {
    std::string id;
    std::string name;
    double measured = 0.0;
    double expected = 0.0;
    double tolerance = 0.0;
    double seconds = 0.0;
    double budget = 0.0;
    bool pass = false;
    std::string detail;
};

struct Check {
    std::string id;
    std::string suite;
    std::function<CheckLine()> run;
};

namespace ref {

inline double arg_cut(cplx z) {
    double a = std::atan2(z.imag(), z.real());
    if (a <= 0.0) a += 2.0 * pi;
    return a;
}
inline cplx pow_cut(cplx z, double g) { return std::pow(std::abs(z), g) * std::exp(I * g * arg_cut(z)); }
inline cplx sqrt_principal(cplx z) { return std::sqrt(std::abs(z)) * std::exp(0.5 * I * std::atan2(z.imag(), z.real())); }

// Weyl coefficient of the Bessel operator, C = 1 canonical pair
inline cplx m_tilde(cplx z, double g, double C = 1.0) {
    const double n = std::round(g);
    if (std::abs(g - n) < 1e-12) {
        const cplx lz = std::log(std::abs(z)) + I * arg_cut(z);
        return C * C * (2.0 / pi) * pow_cut(z, n) * (I - lz / pi);
    }
    return -C * C * (2.0 / pi) * std::sin(pi * g) * std::exp(-I * pi * g) * pow_cut(z, g);
}

inline double m_tilde_density(double l, double g, double C = 1.0) {
    if (l <= 0.0) return 0.0;
    const double n = std::round(g);
    const double s = std::abs(g - n) < 1e-12 ? 1.0 : std::pow(std::sin(pi * g), 2);
    return C * C * std::pow(l, g) * (2.0 / (pi * pi)) * s;
}

// (w00, w01, w11) for the Bessel operator at x0
inline std::array<double, 3> omega_density(double l, double x0, double g) {
    const double r = std::sqrt(l), j = boost::math::cyl_bessel_j(g, r * x0), dj = boost::math::cyl_bessel_j_prime(g, r * x0);
    const double b = j + 2.0 * x0 * r * dj;
    return {0.5 * x0 * j * j, 0.25 * (j * j + 2.0 * x0 * r * j * dj), b * b / (8.0 * x0)};
}

inline double bump(double x, double c, double r) {
    const double t = (x - c) / r;
    return std::abs(t) < 1.0 ? std::exp(-1.0 / (1.0 - t * t)) : 0.0;
}

}  // namespace ref

namespace detail {

inline double rel(cplx a, cplx b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

template <class F>
CheckLine timed(const std::string& id, const std::string& name, double budget, F body) {
    CheckLine c;
    c.id = id;
    c.name = name;
    c.budget = budget;
    const auto t0 = std::chrono::steady_clock::now();
    try {
        body(c);
    } catch (const std::exception& e) {
        c.pass = false;
        c.detail = std::string("exception: ") + e.what();
    }
    c.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (c.seconds > budget) {
        c.pass = false;
        c.detail += (c.detail.empty() ? "" : "; ") + std::string("over time budget");
    }
    return c;
}

inline std::string fmt(double v) {
    std::ostringstream s;
    s.precision(3);
    s << std::scientific << v;
    return s.str();
}

inline const std::vector<cplx>& ac5_grid() {
    static const std::vector<cplx> g{{-2, 0.05}, {-0.5, 0.3}, {0.5, 0.05}, {1, 1},     {2, -0.5},  {3, 0.1},
                                     {5, -1},    {0.2, -0.05}, {8, 0.5},  {-5, -0.2}, {1.5, -0.05}, {4, 0.7}};
    return g;
}

// || phi_alpha(lambda, .) ||^{-2} for the free half-line by Gauss panels on [0, 15]
inline double free_inverse_norm(double alpha, double lambda) {
    const auto m = catalog("free_halfline");
    const auto R = gauss_legendre(16);
    std::vector<double> xs, ws;
    for (int j = 0; j < 60; ++j) {
        const double a = 0.25 * j, hw = 0.125;
        for (std::size_t k = 0; k < R.x.size(); ++k) {
            xs.push_back(a + hw * (R.x[k] + 1.0));
            ws.push_back(hw * R.w[k]);
        }
    }
    const auto ph = fundamental_system_regular(m, alpha, lambda, xs).second;
    double s = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) s += ws[i] * std::norm(ph[i].psi);
    return 1.0 / s;
}

inline Sampler m_tilde_sampler(const PotentialModel& m, ThetaGauge gauge = ThetaGauge::Constructed) {
    return [&m, gauge](cplx z) { return singular_m_tilde(m, z, {0.5, 1.0, 2.0}, {.gauge = gauge}).value; };
}

inline std::array<double, 3> numeric_omega(const PotentialModel& m, double x0, double l, const std::vector<double>& sched) {
    std::array<std::vector<double>, 3> v;
    for (double e : sched) {
        const auto M = matrix_m(m, x0, cplx(l, e));
        v[0].push_back(M(0, 0).imag() / pi);
        v[1].push_back(M(0, 1).imag() / pi);
        v[2].push_back(M(1, 1).imag() / pi);
    }
    return {richardson(sched, v[0]).value, richardson(sched, v[1]).value, richardson(sched, v[2]).value};
}

}  // namespace detail

// ---------------------------------------------------------------- individual criteria

inline CheckLine ac1() {
    return detail::timed("1", "free half-line m vs i sqrt(z)", 1.0, [](CheckLine& c) {
        const auto m = catalog("free_halfline");
        double worst = 0.0;
        for (cplx z : {cplx(0, 1), cplx(1, 1), cplx(4, 0.5), cplx(-1, 0.2)})
            worst = std::max(worst, detail::rel(halfline_m(m, 0.0, z).value, I * ref::sqrt_principal(z)));
        c.measured = worst;
        c.tolerance = 1e-6;
        c.pass = worst <= c.tolerance;
    });
}

inline CheckLine ac2() {
    return detail::timed("2", "rotation identity between boundary angles", 1.0, [](CheckLine& c) {
        std::vector<PotentialModel> models{catalog("free_halfline"), catalog("tabulated", {.table_x = {0, 0.5, 1, 1.5, 2, 3}, .table_v = {1, -2, 0.5, 3, 0.2, 0}})};
        const std::vector<double> alphas{0.0, pi / 6, pi / 3, 3 * pi / 4};
        double worst = 0.0;
        for (const auto& m : models)
            for (cplx z : {cplx(0, 1), cplx(2, 0.5)}) {
                std::vector<cplx> direct;
                for (double a : alphas) direct.push_back(halfline_m(m, a, z).value);
                for (std::size_t i = 0; i < alphas.size(); ++i)
                    for (std::size_t j = 0; j < alphas.size(); ++j) {
                        if (i == j) continue;
                        const cplx r = rotate_m(direct[j], alphas[i], alphas[j]);
                        worst = std::max(worst, std::abs(r - direct[i]) / std::max(1.0, std::abs(direct[i])));
                    }
            }
        c.measured = worst;
        c.tolerance = 1e-8;
        c.pass = worst <= c.tolerance;
    });
}

inline CheckLine ac3() {
    return detail::timed("3", "Weyl identity: int |psi_+|^2 vs Im m / Im z", 5.0, [](CheckLine& c) {
        const auto a = weyl_identity(catalog("free_halfline"), I, 0.0);
        const auto b = weyl_identity(catalog("perturbed_bessel", {.gamma = 1.5, .vtilde = "exp(-x)"}), I, 1.0);
        const double ea = std::abs(a.integral - a.ratio) / a.ratio, eb = std::abs(b.integral - b.ratio) / b.ratio;
        c.measured = std::max(ea, eb);
        c.tolerance = 1e-4;
        c.pass = c.measured <= c.tolerance;
        c.detail = "free " + detail::fmt(ea) + ", perturbed bessel " + detail::fmt(eb);
    });
}

// alpha = pi/4 is where the free half-line has its eigenvalue at -1 (phi = -e^{-x}/sqrt 2).
inline CheckLine ac4_at(double alpha, const std::string& id, const std::string& label) {
    return detail::timed(id, label, 5.0, [alpha](CheckLine& c) {
        const auto m = catalog("free_halfline");
        const auto pm = point_mass([&](cplx z) { return halfline_m(m, alpha, z).value; }, -1.0);
        const double inv_norm = detail::free_inverse_norm(alpha, -1.0);
        c.measured = pm.mass;
        c.expected = inv_norm;
        c.tolerance = 1e-3;
        const bool eigen = pm.mass > 1e-6;
        c.pass = eigen && std::abs(pm.mass - inv_norm) <= c.tolerance * inv_norm && std::abs(pm.eps_re_limit) < 1e-6;
        c.detail = "eps Re m -> " + detail::fmt(pm.eps_re_limit) + (eigen ? "" : "; no point mass at -1");
    });
}
inline CheckLine ac4() { return ac4_at(pi / 4, "4", "point mass at -1 (alpha = pi/4) vs inverse squared norm"); }
inline CheckLine ac4_as_stated() { return ac4_at(3 * pi / 4, "4-as-stated", "point mass at -1 (alpha = 3pi/4 as stated) vs inverse squared norm"); }

inline CheckLine ac5_gauge(ThetaGauge gauge, const std::string& id, const std::string& label) {
    return detail::timed(id, label, 30.0, [gauge](CheckLine& c) {
        double worst = 0.0, wr = 0.0;
        for (double g : {1.5, 2.5}) {
            const auto m = catalog("bessel", {.gamma = g});
            for (cplx z : detail::ac5_grid()) {
                const auto d = singular_m_tilde_detail(m, z, {0.5, 1.0, 2.0}, {.gauge = gauge});
                worst = std::max(worst, detail::rel(d.sample.value, ref::m_tilde(z, g)));
                // the constructed theta~ must still be Wronskian-normalized
                const auto th = theta_tilde_frames(m, z, m.length_scale, {1.0});
                wr = std::max(wr, std::abs(wronskian(th[0], phi_tilde_frame(m, z, 1.0)) - 1.0));
            }
        }
        c.measured = worst;
        c.tolerance = 1e-5;
        c.pass = worst <= c.tolerance && wr <= 1e-8;
        c.detail = "constructed W(theta~, phi~) - 1 = " + detail::fmt(wr);
    });
}
inline CheckLine ac5() { return ac5_gauge(ThetaGauge::Reference, "5", "singular m~ (series phi~, Riccati m_+) vs closed form, gamma 1.5/2.5"); }
inline CheckLine ac5_as_stated() {
    return ac5_gauge(ThetaGauge::Constructed, "5-as-stated", "singular m~ with theta~ built from phi~ at x0 vs closed form");
}

inline CheckLine ac6_gauge(ThetaGauge gauge, const std::string& id, const std::string& label) {
    return detail::timed(id, label, 30.0, [gauge](CheckLine& c) {
        const auto m = catalog("bessel", {.gamma = 2.0});
        double worst = 0.0;
        for (cplx z : detail::ac5_grid()) worst = std::max(worst, detail::rel(singular_m_tilde(m, z, {0.5, 1.0, 2.0}, {.gauge = gauge}).value, ref::m_tilde(z, 2.0)));
        c.measured = worst;
        c.tolerance = 1e-4;
        c.pass = worst <= c.tolerance;
    });
}
inline CheckLine ac6() { return ac6_gauge(ThetaGauge::Reference, "6", "integer order gamma = 2 m~ vs closed form, arg in (0, 2pi)"); }
inline CheckLine ac6_as_stated() { return ac6_gauge(ThetaGauge::Constructed, "6-as-stated", "integer order m~ with constructed theta~ vs closed form"); }

inline CheckLine ac7() {
    return detail::timed("7", "Stieltjes inversion of numeric m~ vs closed density on [0.5, 5]", 30.0, [](CheckLine& c) {
        const auto m = catalog("bessel");
        const auto s = detail::m_tilde_sampler(m);
        InversionOptions o;
        o.smooth = true;
        o.rel_tol = 1e-8;
        double worst = 0.0;
        for (int k = 0; k < 9; ++k) {
            const double a = 0.5 + 0.5 * k, b = a + 0.5;
            const double expect = (2.0 / (pi * pi)) * (std::pow(b, 2.5) - std::pow(a, 2.5)) / 2.5;
            worst = std::max(worst, std::abs(stieltjes_inversion(s, a, b, o).value - expect) / expect);
        }
        c.measured = worst;
        c.tolerance = 1e-3;
        c.pass = worst <= c.tolerance;
    });
}

inline CheckLine ac8() {
    return detail::timed("8", "matrix spectral densities at x0 = 1 vs Bessel closed forms; rank one", 10.0, [](CheckLine& c) {
        const auto m = catalog("bessel");
        double worst = 0.0, rank = 0.0;
        for (double l : {0.5, 1.0, 2.0, 4.0}) {
            const auto w = detail::numeric_omega(m, 1.0, l, default_schedule());
            const auto r = ref::omega_density(l, 1.0, 1.5);
            const double norm = std::max({std::abs(r[0]), std::abs(r[1]), std::abs(r[2])});
            for (int k = 0; k < 3; ++k) worst = std::max(worst, std::abs(w[k] - r[k]) / norm);
            const double wn = std::max({std::abs(w[0]), std::abs(w[1]), std::abs(w[2])});
            rank = std::max(rank, std::abs(w[0] * w[2] - w[1] * w[1]) / (wn * wn));
        }
        c.measured = worst;
        c.tolerance = 1e-3;
        c.pass = worst <= c.tolerance && rank <= 1e-8;
        c.detail = "|det|/|W|^2 = " + detail::fmt(rank) + " (limit 1e-8); entry error relative to the largest entry";
    });
}

inline CheckLine ac9() {
    return detail::timed("9", "scalar density from the matrix measure = lambda^gamma / 2; two formulas agree", 10.0, [](CheckLine& c) {
        const auto m = catalog("bessel");
        const double x0 = 1.0, g = 1.5;
        const double s = 1.0 / (m.bessel->phi_scale * std::pow(2.0, g) * boost::math::tgamma(1.0 + g));  // to z^{-g/2} x^{1/2} J
        const std::vector<double> grid{0.5, 1.0, 2.0, 3.0, 4.0};
        SpectralMeasure omega;
        omega.grid = grid;
        TransformVector vec;
        vec.grid = grid;
        vec.basis = Basis::theta_phi(x0);
        std::vector<ValueDeriv> ph, th;
        for (double l : grid) {
            omega.matrix_density.push_back(detail::numeric_omega(m, x0, l, default_schedule()));
            const auto f = phi_tilde_frame(m, l, x0);
            ph.push_back({s * f.psi, s * f.dpsi});
            const auto t = m.oracle.theta_closed(l, x0);
            th.push_back({t.value / s, t.deriv / s});
            vec.comp0.push_back(0.0);
            vec.comp1.push_back(0.0);
        }
        const auto out = scalar_from_matrix(vec, ph, omega, th);
        double worst = 0.0;
        for (std::size_t k = 0; k < grid.size(); ++k)
            worst = std::max(worst, std::abs(out.measure.density[k] - 0.5 * std::pow(grid[k], g)) / (0.5 * std::pow(grid[k], g)));
        c.measured = worst;
        c.tolerance = 1e-3;
        c.pass = worst <= c.tolerance && out.max_route_gap <= 1e-8 && out.excluded.empty();
        c.detail = "route gap " + detail::fmt(out.max_route_gap) + " (limit 1e-8)";
    });
}

inline CheckLine ac10() {
    return detail::timed("10", "Hankel-type Parseval for the Weber pair, gamma = 1.5; round trip", 20.0, [](CheckLine& c) {
        const auto m = catalog("bessel");
        const double g = 1.5;
        auto h = [g](double x) { return std::pow(x, g + 0.5) * std::exp(-0.5 * x * x); };
        const auto [grid, w] = spectral_grid(0.0, 80.0, 4);
        SpectralMeasure mu;
        mu.grid = grid;
        mu.weights = w;
        for (double l : grid) mu.density.push_back(ref::m_tilde_density(l, g));
        const auto rep = parseval_check(m, [&](double x) { return cplx(h(x)); }, 0.0, 12.0, Basis::phi_tilde(), mu);
        const double target = boost::math::tgamma(g + 1.0) / 2.0;
        const auto t = forward_transform(m, [&](double x) { return cplx(h(x)); }, 0.0, 12.0, grid, Basis::phi_tilde());
        std::vector<double> xs;
        for (int i = 1; i <= 160; ++i) xs.push_back(0.05 * i);
        const auto inv = inverse_transform(m, t, mu, xs);
        double num = 0.0, den = 0.0;
        for (std::size_t k = 0; k < xs.size(); ++k) {
            num += std::norm(inv.values[k] - h(xs[k]));
            den += h(xs[k]) * h(xs[k]);
        }
        const double rt = std::sqrt(num / den);
        const double e1 = std::abs(rep.norm_h2 - target) / target, e2 = std::abs(rep.norm_hat2 - target) / target;
        c.measured = std::max(e1, e2);
        c.expected = target;
        c.tolerance = 1e-3;
        c.pass = e1 <= 1e-3 && e2 <= 1e-3 && rt <= 1e-3;
        c.detail = "|h|^2 = " + detail::fmt(rep.norm_h2) + ", |h^|^2 = " + detail::fmt(rep.norm_hat2) + ", round trip L2 " + detail::fmt(rt);
    });
}

inline CheckLine ac11() {
    return detail::timed("11", "Volterra envelope, Wronskian and probe spread for V~ = e^{-x}", 30.0, [](CheckLine& c) {
        const double g = 1.5;
        const RealFn vt = [](double x) { return std::exp(-x); };
        const auto m = catalog("perturbed_bessel", {.gamma = g, .vtilde = "exp(-x)"});
        double env = 0.0, qerr = 0.0, wr = 0.0, spread = 0.0;
        for (cplx z : {cplx(1, 0.4), cplx(-2, 0.1), cplx(5, -1)}) {
            const std::vector<double> xs{0.25, 0.5, 1.0, 1.5};
            const auto sol = volterra_phi_tilde(g, vt, z, xs);
            for (std::size_t t = 0; t < xs.size(); ++t) {
                const double x = xs[t];
                const double Q = integrate_adaptive([&](double s) { return s * std::abs(vt(s) - z) / g; }, 0.0, x, 1e-13);
                qerr = std::max(qerr, std::abs(Q - sol.series.envelope_q[t]) / Q);
                double fact = 1.0;
                for (std::size_t k = 0; k < sol.series.term_abs[t].size(); ++k) {
                    if (k) fact *= static_cast<double>(k);
                    env = std::max(env, sol.series.term_abs[t][k] / (std::pow(x, 0.5 + g) * std::pow(Q, k) / fact));
                }
            }
            const auto d = singular_m_tilde_detail(m, z, {0.5, 1.0, 2.0});
            for (const auto& p : d.probes) wr = std::max(wr, std::abs(p.w_theta_phi - 1.0));
            spread = std::max(spread, d.sample.err_estimate);
        }
        c.measured = spread;
        c.tolerance = 1e-6;
        c.pass = env <= 1.0 + 1e-10 && qerr <= 1e-10 && wr <= 1e-8 && spread <= 1e-6;
        c.detail = "max term/envelope " + detail::fmt(env) + ", W - 1 " + detail::fmt(wr) + ", Q mismatch " + detail::fmt(qerr);
    });
}

inline CheckLine ac12() {
    return detail::timed("12", "Stone formula: resolvent route vs transform route", 60.0, [](CheckLine& c) {
        auto f = [](double x) { return ref::bump(x, 1.5, 1.0); };
        auto g = [](double x) { return ref::bump(x, 1.8, 0.9); };
        double worst = 0.0;
        bool flagged = false;
        for (const char* name : {"free_halfline", "bessel"}) {
            const auto m = catalog(name);
            for (int fi = 0; fi < 2; ++fi)
                for (auto [a, b] : {std::pair{0.0, 1.0}, {1.0, 4.0}}) {
                    const std::function<double(double)> F = fi ? std::function<double(double)>([](double l) { return l; })
                                                               : std::function<double(double)>([](double) { return 1.0; });
                    const auto r = stone_crosscheck(m, f, g, 0.5, 2.7, F, a, b);
                    worst = std::max(worst, std::abs(r.resolvent.value - r.transform.value) / std::abs(r.transform.value));
                    flagged = flagged || r.discrepancy;
                }
        }
        c.measured = worst;
        c.tolerance = 1e-3;
        c.pass = worst <= c.tolerance && !flagged;
    });
}

inline CheckLine ac13() {
    return detail::timed("13", "boundary-limit properties of numeric m~ on [0.5, 2]", 30.0, [](CheckLine& c) {
        const auto m = catalog("bessel");
        PropertyOptions o;
        o.inversion.smooth = true;
        o.inversion.rel_tol = 1e-8;
        const auto r = property_report(detail::m_tilde_sampler(m), 0.5, 2.0, o);
        c.measured = r.conjugate_symmetry;
        c.tolerance = 1e-10;
        c.pass = r.conjugate_symmetry <= 1e-10 && r.max_eps_re_limit <= 1e-6 && r.min_eps_re_order >= 0.9 && r.measure_nondecreasing &&
                 r.accumulated.size() == 20;
        c.detail = "eps Re m limit " + detail::fmt(r.max_eps_re_limit) + ", observed order " + detail::fmt(r.min_eps_re_order) +
                   (r.measure_nondecreasing ? ", measure nondecreasing" : ", measure DECREASES") +
                   (r.profile == SignProfile::Herglotz ? "" : ", not Herglotz (informational)");
    });
}

inline CheckLine ac14() {
    return detail::timed("14", "normalization covariance: C = 2 gives 4x m~ and density", 1.0, [](CheckLine& c) {
        const auto m1 = catalog("bessel", {.gamma = 1.5, .C = 1.0});
        const auto m2 = catalog("bessel", {.gamma = 1.5, .C = 2.0});
        double worst = 0.0;
        for (cplx z : {cplx(1, 0.5), cplx(-2, 0.1), cplx(3, -0.7)})
            worst = std::max(worst, detail::rel(singular_m_tilde(m2, z).value, 4.0 * singular_m_tilde(m1, z).value));
        const double d1 = ac_density(detail::m_tilde_sampler(m1), 1.0).value, d2 = ac_density(detail::m_tilde_sampler(m2), 1.0).value;
        worst = std::max(worst, std::abs(d2 - 4.0 * d1) / (4.0 * d1));
        c.measured = worst;
        c.tolerance = 1e-12;
        c.pass = worst <= c.tolerance;
    });
}

// ---------------------------------------------------------------- registry

inline const std::vector<Check>& registry() {
    static const std::vector<Check> r{
        {"1", "regular", ac1},         {"2", "regular", ac2},           {"3", "regular", ac3},
        {"4", "herglotz", ac4},        {"5", "singular", ac5},          {"6", "singular", ac6},
        {"7", "herglotz", ac7},        {"8", "transforms", ac8},        {"9", "transforms", ac9},
        {"10", "transforms", ac10},    {"11", "singular", ac11},        {"12", "transforms", ac12},
        {"13", "singular", ac13},      {"14", "singular", ac14},
        {"4-as-stated", "as-stated", ac4_as_stated},
        {"5-as-stated", "as-stated", ac5_as_stated},
        {"6-as-stated", "as-stated", ac6_as_stated},
    };
    return r;
}

inline bool known_suite(const std::string& s) {
    return s == "regular" || s == "singular" || s == "transforms" || s == "herglotz" || s == "all" || s == "as-stated";
}

// "all" runs the fourteen criteria; as-stated variants only on request.
inline std::vector<CheckLine> run_suite(const std::string& suite) {
    if (!known_suite(suite)) throw ModelError("unknown suite '" + suite + "'");
    std::vector<CheckLine> out;
    for (const auto& c : registry())
        if (c.suite == suite || (suite == "all" && c.suite != "as-stated")) out.push_back(c.run());
    return out;
}

inline std::vector<CheckLine> run_ids(const std::vector<std::string>& ids) {
    std::vector<CheckLine> out;
    for (const auto& id : ids) {
        bool found = false;
        for (const auto& c : registry())
            if (c.id == id) {
                out.push_back(c.run());
                found = true;
            }
        if (!found) throw ModelError("unknown check '" + id + "'");
    }
    return out;
}

}  // namespace wtm::verify
