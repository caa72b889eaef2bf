#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <optional>
#include <vector>

#include "wtm/errors.hpp"
#include "wtm/herglotz.hpp"
#include "wtm/ivp.hpp"
#include "wtm/mfunctions.hpp"
#include "wtm/quadrature.hpp"
#include "wtm/singular.hpp"

namespace wtm {

using ComplexFn = std::function<cplx(double)>;

enum class BasisKind { PhiAlpha, PhiTilde, ThetaPhiAtX0 };

struct Basis {
    BasisKind kind = BasisKind::PhiAlpha;
    double alpha = 0.0;
    double x0 = 1.0;
    double scale = 1.0;  // multiplies every basis function (renormalization hook)
    int components() const { return kind == BasisKind::ThetaPhiAtX0 ? 2 : 1; }

    static Basis phi_alpha(double a) { return {BasisKind::PhiAlpha, a, 1.0, 1.0}; }
    static Basis phi_tilde(double s = 1.0) { return {BasisKind::PhiTilde, 0.0, 1.0, s}; }
    static Basis theta_phi(double x0) { return {BasisKind::ThetaPhiAtX0, 0.0, x0, 1.0}; }
};

struct TransformVector {
    std::vector<double> grid;
    std::vector<cplx> comp0, comp1;  // comp1 only for the two-component basis
    std::vector<double> atom_locations;
    std::vector<cplx> atom0, atom1;
    Basis basis;
};

struct SpectralSlice {
    double lambda1 = 0.0, lambda2 = 0.0;
    cplx value = 0.0;
};

// Gauss nodes in p = sqrt(lambda) on [sqrt mu1, sqrt mu2]; weights already carry d lambda = 2 p dp.
inline std::pair<std::vector<double>, std::vector<double>> spectral_grid(double mu1, double mu2, int panels, int nodes = 16) {
    if (!(mu1 >= 0.0) || !(mu2 > mu1) || panels < 1) throw ModelError("spectral_grid: need 0 <= mu1 < mu2 and panels >= 1");
    const auto R = gauss_legendre(nodes);
    const double p1 = std::sqrt(mu1), p2 = std::sqrt(mu2);
    std::vector<double> g, w;
    for (int j = 0; j < panels; ++j) {
        const double a = p1 + (p2 - p1) * j / panels, b = p1 + (p2 - p1) * (j + 1) / panels, hw = 0.5 * (b - a);
        for (std::size_t k = 0; k < R.x.size(); ++k) {
            const double p = a + hw * (R.x[k] + 1.0);
            g.push_back(p * p);
            w.push_back(2.0 * p * hw * R.w[k]);
        }
    }
    return {g, w};
}

struct TransformOptions {
    bool prefer_oracle = false;  // closed-form basis when the model carries one
    double max_panel = 0.25;
    int max_panels = 20000;
    IntegratorConfig cfg{};
};

namespace detail {

inline void check_support(const PotentialModel& m, double lo, double hi) {
    if (!(hi > lo)) throw ModelError("transform: empty support");
    if (!m.full_line() && (lo < m.a || (m.singular_left() && lo < 0.0)))
        throw DomainError("transform: support leaves the domain");
}

// Basis functions at real lambda on ascending xs: (comp0, comp1).
inline std::pair<std::vector<cplx>, std::vector<cplx>> basis_values(const PotentialModel& m, const Basis& b, double lambda,
                                                                     const std::vector<double>& xs, const TransformOptions& o) {
    std::vector<cplx> c0, c1;
    const cplx z(lambda, 0.0);
    switch (b.kind) {
        case BasisKind::PhiAlpha:
            if (o.prefer_oracle && b.alpha == 0.0 && m.oracle.phi_closed && !m.singular_left()) {
                for (double x : xs) c0.push_back(b.scale * m.oracle.phi_closed(z, x).value);
            } else {
                for (const auto& f : fundamental_system_regular(m, b.alpha, z, xs, o.cfg).second) c0.push_back(b.scale * f.psi);
            }
            break;
        case BasisKind::PhiTilde:
            if (o.prefer_oracle && m.oracle.phi_closed && m.singular_left()) {
                for (double x : xs) c0.push_back(b.scale * m.oracle.phi_closed(z, x).value);
            } else {
                for (const auto& f : phi_tilde_frames(m, z, xs, o.cfg)) c0.push_back(b.scale * f.psi);
            }
            break;
        case BasisKind::ThetaPhiAtX0: {
            const auto [th, ph] = fundamental_system_interior(m, b.x0, z, xs, o.cfg);
            for (std::size_t i = 0; i < xs.size(); ++i) {
                c0.push_back(b.scale * th[i].psi);
                c1.push_back(b.scale * ph[i].psi);
            }
            break;
        }
    }
    return {c0, c1};
}

// Gauss panels on [lo, hi] no wider than a quarter wavelength at lambda.
inline std::pair<std::vector<double>, std::vector<double>> x_rule(double lo, double hi, double lambda, const TransformOptions& o) {
    const double width = std::min(o.max_panel, lambda > 0.0 ? pi / (2.0 * std::sqrt(lambda)) : o.max_panel);
    const double np = std::ceil((hi - lo) / width);
    if (np > o.max_panels)
        throw ConvergenceError("transform: lambda too large for the panel budget; refine the x grid or raise max_panels", lambda);
    const int n = std::max(1, static_cast<int>(np));
    const auto& R = panel_rule();
    std::vector<double> x, w;
    for (int j = 0; j < n; ++j) {
        const double a = lo + (hi - lo) * j / n, hw = 0.5 * (hi - lo) / n;
        for (std::size_t k = 0; k < R.x.size(); ++k) {
            x.push_back(a + hw * (R.x[k] + 1.0));
            w.push_back(hw * R.w[k]);
        }
    }
    return {x, w};
}

inline std::pair<cplx, cplx> transform_at(const PotentialModel& m, const ComplexFn& h, double lo, double hi, double lambda,
                                          const Basis& b, const TransformOptions& o) {
    const auto [x, w] = x_rule(lo, hi, lambda, o);
    const auto [c0, c1] = basis_values(m, b, lambda, x, o);
    cplx s0 = 0.0, s1 = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const cplx hv = h(x[i]);
        s0 += w[i] * c0[i] * hv;
        if (!c1.empty()) s1 += w[i] * c1[i] * hv;
    }
    return {s0, s1};
}

}  // namespace detail

// h^(lambda) = int basis(lambda, x) h(x) dx over the support [s_lo, s_hi].
inline TransformVector forward_transform(const PotentialModel& m, const ComplexFn& h, double s_lo, double s_hi, const std::vector<double>& grid,
                                         const Basis& basis, const TransformOptions& o = {}, const std::vector<double>& atom_locations = {}) {
    detail::check_support(m, s_lo, s_hi);
    if (basis.kind == BasisKind::PhiTilde && !m.singular_left()) throw ModelError(m.name + ": phi~ basis needs a singular endpoint");
    if (basis.kind == BasisKind::PhiAlpha && m.singular_left()) throw SingularEndpointError(m.name + ": phi_alpha basis needs a regular endpoint");
    TransformVector t;
    t.grid = grid;
    t.basis = basis;
    t.atom_locations = atom_locations;
    const bool two = basis.components() == 2;
    for (double l : grid) {
        const auto [a, b] = detail::transform_at(m, h, s_lo, s_hi, l, basis, o);
        t.comp0.push_back(a);
        if (two) t.comp1.push_back(b);
    }
    for (double l : atom_locations) {
        const auto [a, b] = detail::transform_at(m, h, s_lo, s_hi, l, basis, o);
        t.atom0.push_back(a);
        if (two) t.atom1.push_back(b);
    }
    return t;
}

namespace detail {

inline std::vector<double> measure_weights(const SpectralMeasure& mu) {
    if (!mu.weights.empty()) {
        if (mu.weights.size() != mu.grid.size()) throw ModelError("measure: weights and grid differ in length");
        return mu.weights;
    }
    std::vector<double> w(mu.grid.size(), 0.0);
    for (std::size_t i = 0; i + 1 < mu.grid.size(); ++i) {
        const double h = 0.5 * (mu.grid[i + 1] - mu.grid[i]);
        w[i] += h;
        w[i + 1] += h;
    }
    return w;
}

inline void check_pairing(const TransformVector& t, const SpectralMeasure& mu) {
    if (t.grid.size() != mu.grid.size()) throw ModelError("transform and measure grids differ");
    for (std::size_t i = 0; i < t.grid.size(); ++i)
        if (std::abs(t.grid[i] - mu.grid[i]) > 1e-12 * std::max(1.0, std::abs(mu.grid[i]))) throw ModelError("transform and measure grids differ");
    const bool two = t.basis.components() == 2;
    if (two && mu.matrix_density.size() != mu.grid.size()) throw ModelError("two-component transform needs a matrix measure");
    if (!two && mu.density.size() != mu.grid.size()) throw ModelError("scalar transform needs a scalar density");
    if (mu.atoms.size() != t.atom_locations.size()) throw ModelError("measure atoms and transform atom samples differ");
    for (std::size_t i = 0; i < mu.atoms.size(); ++i)
        if (std::abs(mu.atoms[i].location - t.atom_locations[i]) > 1e-12) throw ModelError("measure atoms and transform atom samples differ");
    if (two && !mu.atoms.empty()) throw ModelError("matrix atoms are not supported");
}

// sum of conj(a) dmu b over the grid plus atoms
inline cplx pairing(const TransformVector& a, const TransformVector& b, const SpectralMeasure& mu, double lo = -1e300, double hi = 1e300) {
    const auto w = measure_weights(mu);
    cplx s = 0.0;
    const bool two = a.basis.components() == 2;
    for (std::size_t i = 0; i < mu.grid.size(); ++i) {
        if (!(mu.grid[i] > lo && mu.grid[i] <= hi)) continue;
        if (two) {
            const auto& d = mu.matrix_density[i];
            s += w[i] * (std::conj(a.comp0[i]) * (d[0] * b.comp0[i] + d[1] * b.comp1[i]) +
                         std::conj(a.comp1[i]) * (d[1] * b.comp0[i] + d[2] * b.comp1[i]));
        } else {
            s += w[i] * mu.density[i] * std::conj(a.comp0[i]) * b.comp0[i];
        }
    }
    for (std::size_t i = 0; i < mu.atoms.size(); ++i)
        if (mu.atoms[i].location > lo && mu.atoms[i].location <= hi) s += mu.atoms[i].mass * std::conj(a.atom0[i]) * b.atom0[i];
    return s;
}

}  // namespace detail

struct InverseOptions {
    TransformOptions transform{};
    bool parseval_guard = true;  // window energy of the output may not exceed the spectral energy
    double guard_slack = 0.1;
};

struct InverseResult {
    std::vector<double> xs;
    std::vector<cplx> values;
    double spectral_energy = 0.0;  // int |h^|^2 d mu
    double tail_fraction = 0.0;    // share of that energy in the top tenth of the lambda window
};

// h(x) = int d mu(lambda) basis(lambda, x) h^(lambda); two-component: basis_i dOmega_ij h^_j.
inline InverseResult inverse_transform(const PotentialModel& m, const TransformVector& t, const SpectralMeasure& mu, const std::vector<double>& xs,
                                       const InverseOptions& o = {}) {
    detail::check_pairing(t, mu);
    for (std::size_t i = 1; i < xs.size(); ++i)
        if (!(xs[i] > xs[i - 1])) throw ModelError("inverse_transform: xs must be strictly ascending");
    const auto w = detail::measure_weights(mu);
    const bool two = t.basis.components() == 2;
    InverseResult r;
    r.xs = xs;
    r.values.assign(xs.size(), 0.0);
    if (xs.empty()) return r;
    auto accumulate = [&](double l, double weight, cplx h0, cplx h1, const std::array<double, 3>& d) {
        const auto [b0, b1] = detail::basis_values(m, t.basis, l, xs, o.transform);
        for (std::size_t k = 0; k < xs.size(); ++k) {
            if (two)
                r.values[k] += weight * (b0[k] * (d[0] * h0 + d[1] * h1) + b1[k] * (d[1] * h0 + d[2] * h1));
            else
                r.values[k] += weight * d[0] * b0[k] * h0;
        }
    };
    for (std::size_t i = 0; i < mu.grid.size(); ++i) {
        const std::array<double, 3> d = two ? mu.matrix_density[i] : std::array<double, 3>{mu.density[i], 0.0, 0.0};
        if (d[0] == 0.0 && d[1] == 0.0 && d[2] == 0.0) continue;
        accumulate(mu.grid[i], w[i], t.comp0[i], two ? t.comp1[i] : 0.0, d);
    }
    for (std::size_t i = 0; i < mu.atoms.size(); ++i) accumulate(mu.atoms[i].location, mu.atoms[i].mass, t.atom0[i], 0.0, {1.0, 0.0, 0.0});

    r.spectral_energy = detail::pairing(t, t, mu).real();
    if (!mu.grid.empty() && r.spectral_energy > 0.0) {
        const double top = mu.grid.back() - 0.1 * (mu.grid.back() - mu.grid.front());
        r.tail_fraction = detail::pairing(t, t, mu, top).real() / r.spectral_energy;
    }
    if (o.parseval_guard && xs.size() > 1 && r.spectral_energy > 0.0) {
        double e = 0.0;
        for (std::size_t k = 0; k + 1 < xs.size(); ++k)
            e += 0.5 * (xs[k + 1] - xs[k]) * (std::norm(r.values[k]) + std::norm(r.values[k + 1]));
        if (e > (1.0 + o.guard_slack) * r.spectral_energy)
            throw ParsevalViolation("inverse_transform: output energy exceeds the spectral energy; measure and basis normalizations disagree",
                                    e / r.spectral_energy);
    }
    return r;
}

struct ParsevalReport {
    double norm_h2 = 0.0;
    double norm_hat2 = 0.0;
    double defect = 0.0;
};

inline ParsevalReport parseval_check(const PotentialModel& m, const ComplexFn& h, double s_lo, double s_hi, const Basis& basis,
                                     const SpectralMeasure& mu, const TransformOptions& o = {}) {
    std::vector<double> locs;
    for (const auto& a : mu.atoms) locs.push_back(a.location);
    const auto t = forward_transform(m, h, s_lo, s_hi, mu.grid, basis, o, locs);
    ParsevalReport r;
    const auto [x, w] = detail::x_rule(s_lo, s_hi, 0.0, o);
    for (std::size_t i = 0; i < x.size(); ++i) r.norm_h2 += w[i] * std::norm(h(x[i]));
    r.norm_hat2 = detail::pairing(t, t, mu).real();
    r.defect = r.norm_h2 == 0.0 ? std::abs(r.norm_hat2) : std::abs(r.norm_h2 - r.norm_hat2) / r.norm_h2;
    return r;
}

// ---------------------------------------------------------------- Stone's formula cross-check

struct StoneOptions {
    std::vector<double> schedule = default_schedule();
    int lambda_nodes = 20;              // Gauss nodes in sqrt(lambda) per route
    std::function<double(double)> density;  // scalar d rho/d lambda; default: model oracle, else numeric
    std::function<std::array<double, 3>(double)> omega_density;  // two-component basis
    Basis basis{};
    bool basis_from_model = true;  // phi_0 (regular), phi~ (singular) or theta/phi at x0 (full line)
    double x0 = 0.0;               // full line reference point
    TransformOptions transform{};
    ResolventOptions resolvent{};
};

struct StoneResult {
    SpectralSlice resolvent, transform;
    double resolvent_err = 0.0;
    double transform_err = 0.0;
    bool discrepancy = false;
};

// (f, F(H) E((l1, l2]) g) two ways, for real f, g supported on [s_lo, s_hi].
inline StoneResult stone_crosscheck(const PotentialModel& m, const RealFn& f, const RealFn& g, double s_lo, double s_hi,
                                    const std::function<double(double)>& F, double l1, double l2, const StoneOptions& o = {}) {
    StoneResult r;
    r.resolvent = r.transform = {l1, l2, 0.0};
    if (!(l2 > l1)) return r;  // empty half-open interval
    if (l1 < 0.0) throw DomainError("stone_crosscheck: intervals must lie in [0, inf) (no eigenvalue handling below)");
    detail::check_schedule(o.schedule);

    // Gauss in p = sqrt(lambda); a second, coarser rule gives the error estimate
    auto rule = [&](int n) { return spectral_grid(l1, l2, 1, n); };
    const auto [lg, lw] = rule(o.lambda_nodes);
    const auto [lg2, lw2] = rule(std::max(4, o.lambda_nodes / 2 + 2));

    // resolvent route: pi^{-1} int F Im (f, R(lambda + i eps) g) d lambda, extrapolated in eps
    auto form = [&](cplx z) {
        return resolvent_form(m, z, [&](double x) { return cplx(f(x)); }, [&](double x) { return cplx(g(x)); }, s_lo, s_hi, o.resolvent);
    };
    std::vector<double> per_eps;
    for (double e : o.schedule) {
        double s = 0.0;
        for (std::size_t k = 0; k < lg.size(); ++k) s += lw[k] * F(lg[k]) * form(cplx(lg[k], e)).imag() / pi;
        per_eps.push_back(s);
    }
    const auto ex = richardson(o.schedule, per_eps);
    r.resolvent.value = ex.value;
    r.resolvent_err = ex.err;

    // transform route
    Basis b = o.basis;
    if (o.basis_from_model) {
        if (m.full_line())
            b = Basis::theta_phi(o.x0);
        else
            b = m.singular_left() ? Basis::phi_tilde() : Basis::phi_alpha(0.0);
    }
    auto hf = [&](double x) { return cplx(f(x)); };
    auto hg = [&](double x) { return cplx(g(x)); };
    auto scalar_density = [&](double l) -> double {
        if (o.density) return o.density(l);
        if (m.oracle.density_closed && b.scale == 1.0 && (b.kind == BasisKind::PhiTilde || b.alpha == 0.0)) return m.oracle.density_closed(l);
        Sampler s = m.singular_left() ? Sampler([&](cplx z) { return singular_m_tilde(m, z).value; })
                                      : Sampler([&](cplx z) { return halfline_m(m, b.alpha, z).value; });
        return ac_density(s, l, o.schedule).value / (b.scale * b.scale);
    };
    auto matrix_density = [&](double l) -> std::array<double, 3> {
        if (o.omega_density) return o.omega_density(l);
        if (m.oracle.omega_density_closed && b.scale == 1.0) return m.oracle.omega_density_closed(l, b.x0);
        std::array<Sampler, 3> ent{[&](cplx z) { return matrix_m(m, b.x0, z)(0, 0); }, [&](cplx z) { return matrix_m(m, b.x0, z)(0, 1); },
                                   [&](cplx z) { return matrix_m(m, b.x0, z)(1, 1); }};
        std::array<double, 3> d{};
        for (int k = 0; k < 3; ++k) {
            std::vector<double> v;
            for (double e : o.schedule) v.push_back(ent[k](cplx(l, e)).imag() / pi);
            d[k] = richardson(o.schedule, v).value;
        }
        return d;
    };
    auto route = [&](const std::vector<double>& grid, const std::vector<double>& wts) {
        SpectralMeasure mu;
        mu.grid = grid;
        mu.weights = wts;
        for (double l : grid) {
            if (b.components() == 2) {
                auto d = matrix_density(l);
                const double fl = F(l);
                mu.matrix_density.push_back({fl * d[0], fl * d[1], fl * d[2]});
            } else {
                mu.density.push_back(F(l) * scalar_density(l));
            }
        }
        const auto tf = forward_transform(m, hf, s_lo, s_hi, grid, b, o.transform);
        const auto tg = forward_transform(m, hg, s_lo, s_hi, grid, b, o.transform);
        return detail::pairing(tf, tg, mu);
    };
    r.transform.value = route(lg, lw);
    r.transform_err = std::abs(r.transform.value - route(lg2, lw2));
    const double scale = std::max(std::abs(r.transform.value), std::abs(r.resolvent.value));
    const double combined = r.resolvent_err + r.transform_err + 1e-9 * scale;
    r.discrepancy = std::abs(r.transform.value - r.resolvent.value) > 3.0 * combined && std::abs(r.transform.value - r.resolvent.value) > 1e-3 * scale;
    return r;
}

// ---------------------------------------------------------------- two-component -> scalar bridge

struct ScalarBridge {
    TransformVector scalar;
    SpectralMeasure measure;        // density by the phi~-only formula
    std::vector<double> theta_route;  // theta~ formula, NaN where excluded
    std::vector<std::size_t> excluded;
    double max_route_gap = 0.0;      // relative, over points where both are defined
};

// phi_x0[k] = (phi~(lambda_k, x0), phi~'(lambda_k, x0)); theta_x0 optional, default W(theta~, phi~) = 1 completion.
inline ScalarBridge scalar_from_matrix(const TransformVector& vec, const std::vector<ValueDeriv>& phi_x0, const SpectralMeasure& omega,
                                       const std::vector<ValueDeriv>& theta_x0 = {}, double exclusion = 1e-8) {
    if (vec.basis.kind != BasisKind::ThetaPhiAtX0) throw ModelError("scalar_from_matrix: needs a theta/phi transform");
    const std::size_t n = vec.grid.size();
    if (phi_x0.size() != n || omega.matrix_density.size() != n || omega.grid.size() != n) throw ModelError("scalar_from_matrix: size mismatch");
    if (!theta_x0.empty() && theta_x0.size() != n) throw ModelError("scalar_from_matrix: size mismatch");
    ScalarBridge out;
    out.scalar.grid = vec.grid;
    out.scalar.basis = Basis::phi_tilde();
    out.measure.grid = omega.grid;
    out.measure.weights = omega.weights;
    for (std::size_t k = 0; k < n; ++k) {
        const double p = phi_x0[k].value.real(), dp = phi_x0[k].deriv.real();
        const double D = p * p + dp * dp;
        out.scalar.comp0.push_back(phi_x0[k].value * vec.comp0[k] + phi_x0[k].deriv * vec.comp1[k]);
        const auto& w = omega.matrix_density[k];
        const bool bad = std::abs(p) <= exclusion * std::sqrt(D) || D == 0.0;
        if (bad) {
            out.excluded.push_back(k);
            out.measure.density.push_back(0.0);
            out.theta_route.push_back(std::nan(""));
            continue;
        }
        double d452 = (dp / p) * w[1] / D + w[0] / D;
        const double th = theta_x0.empty() ? dp / D : theta_x0[k].value.real();
        const double dth = theta_x0.empty() ? -p / D : theta_x0[k].deriv.real();
        const double d451 = th / p * w[1] - dth / p * w[0];
        const double scale = std::max({std::abs(d451), std::abs(d452), 1e-300});
        out.max_route_gap = std::max(out.max_route_gap, std::abs(d451 - d452) / scale);
        if (d452 < 0.0 && d452 > -1e-10 * std::max(1.0, std::abs(w[0]) / D)) d452 = 0.0;
        out.measure.density.push_back(d452);
        out.theta_route.push_back(d451);
    }
    return out;
}

}  // namespace wtm
