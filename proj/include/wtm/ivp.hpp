#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <utility>
#include <vector>

#include <boost/numeric/odeint.hpp>

#include "wtm/potential.hpp"
#include "wtm/specialfn.hpp"

namespace wtm {

struct IntegratorConfig {
    double rel_tol = 1e-11;
    double abs_tol = 1e-13;
    double max_step = 0.0;  // 0: no cap
    double min_step = 1e-13;

    void validate() const {
        auto inside = [](double t) { return t > 1e-14 && t < 1e-2; };
        if (!inside(rel_tol) || !inside(abs_tol))
            throw ModelError("IntegratorConfig: tolerances must lie in (1e-14, 1e-2)");
        if (!(min_step > 0.0)) throw ModelError("IntegratorConfig: min_step must be positive");
        if (max_step < 0.0) throw ModelError("IntegratorConfig: max_step must be nonnegative");
    }
};

enum class FrameTag { PhiAlpha, ThetaAlpha, PhiX0, ThetaX0, WeylPlus, WeylMinus, PhiTilde, ThetaTilde };

struct SolutionFrame {
    double x = 0.0;
    cplx psi, dpsi;
    cplx z;
    FrameTag tag = FrameTag::PhiAlpha;
};

using OdeState = std::array<cplx, 2>;

inline cplx wronskian(cplx f, cplx df, cplx g, cplx dg) { return f * dg - df * g; }
inline cplx wronskian(const SolutionFrame& f, const SolutionFrame& g) { return wronskian(f.psi, f.dpsi, g.psi, g.dpsi); }

namespace detail {

struct SchrodingerRhs {
    const RealFn* V;
    cplx z;
    void operator()(const OdeState& y, OdeState& dy, double x) const {
        dy[0] = y[1];
        dy[1] = ((*V)(x) - z) * y[0];
    }
};

using Dopri = boost::numeric::odeint::runge_kutta_dopri5<OdeState, double, OdeState, double>;

}  // namespace detail

// Integrates -psi'' + V psi = z psi from (x_from, y0) to every point of xs.
// xs must be monotone and on one side of x_from (the direction is read from xs).
inline std::vector<OdeState> propagate(const RealFn& V, cplx z, double x_from, OdeState y0,
                                       const std::vector<double>& xs, const IntegratorConfig& cfg = {}) {
    namespace ode = boost::numeric::odeint;
    cfg.validate();
    std::vector<OdeState> out;
    if (xs.empty()) return out;
    std::vector<double> times;
    times.reserve(xs.size() + 1);
    times.push_back(x_from);
    for (double x : xs) times.push_back(x);
    const double dir = (times.back() >= x_from) ? 1.0 : -1.0;
    for (std::size_t i = 1; i < times.size(); ++i)
        if (dir * (times[i] - times[i - 1]) < 0.0) throw ModelError("propagate: grid not monotone away from the start point");
    for (double x : xs)
        if (!std::isfinite(V(x))) throw ModelError("propagate: V is not finite on the grid");

    detail::SchrodingerRhs rhs{&V, z};
    auto stepper = ode::make_dense_output(cfg.abs_tol, cfg.rel_tol, cfg.max_step, detail::Dopri());
    const double span = std::abs(times.back() - x_from);
    const double dt0 = dir * std::max(cfg.min_step, std::min(1e-3, 1e-2 * std::max(span, 1e-3)));
    stepper.initialize(y0, x_from, dt0);
    long steps = 0;
    try {
        for (double x : xs) {
            if (x == x_from) {
                out.push_back(y0);
                continue;
            }
            while (dir * (stepper.current_time() - x) < 0.0) {
                stepper.do_step(rhs);
                if (++steps > 5000000) throw ConvergenceError("propagate: too many steps");
                if (!std::isfinite(std::abs(stepper.current_state()[0]))) throw ConvergenceError("propagate: solution overflowed");
            }
            OdeState y;
            stepper.calc_state(x, y);
            out.push_back(y);
        }
    } catch (const ode::step_adjustment_error& e) {
        throw ConvergenceError(std::string("propagate: step size adjustment failed: ") + e.what());
    }
    for (const auto& y : out)
        if (!std::isfinite(std::abs(y[0])) || !std::isfinite(std::abs(y[1])))
            throw ConvergenceError("propagate: solution overflowed");
    return out;
}

using FramePair = std::pair<std::vector<SolutionFrame>, std::vector<SolutionFrame>>;  // (theta, phi)

// theta_alpha, phi_alpha with theta(a) = cos a, theta'(a) = sin a, phi(a) = -sin a, phi'(a) = cos a.
inline FramePair fundamental_system_regular(const PotentialModel& m, double alpha, cplx z,
                                            const std::vector<double>& xs, const IntegratorConfig& cfg = {}) {
    if (m.singular_left()) throw SingularEndpointError(m.name + ": left endpoint is not regular");
    if (m.full_line()) throw ModelError(m.name + ": regular half-line system needs a finite endpoint");
    if (!(alpha >= 0.0 && alpha < pi)) throw DomainError("alpha must lie in [0, pi)");
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (xs[i] < m.a) throw DomainError("grid point left of the endpoint a");
        if (i && xs[i] < xs[i - 1]) throw ModelError("grid must be ascending");
    }
    const double ca = std::cos(alpha), sa = std::sin(alpha);
    const auto th = propagate(m.V, z, m.a, {ca, sa}, xs, cfg);
    const auto ph = propagate(m.V, z, m.a, {-sa, ca}, xs, cfg);
    FramePair r;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        r.first.push_back({xs[i], th[i][0], th[i][1], z, FrameTag::ThetaAlpha});
        r.second.push_back({xs[i], ph[i][0], ph[i][1], z, FrameTag::PhiAlpha});
    }
    return r;
}

// theta(x0) = phi'(x0) = 1, theta'(x0) = phi(x0) = 0; xs in any order.
inline FramePair fundamental_system_interior(const PotentialModel& m, double x0, cplx z, const std::vector<double>& xs,
                                             const IntegratorConfig& cfg = {}) {
    auto check = [&](double x) {
        if (m.full_line()) return;
        if (m.singular_left() && x <= m.a)
            throw SingularEndpointError("grid touches the singular endpoint; use the singular-solutions module");
        if (x < m.a) throw DomainError("grid point left of the endpoint a");
    };
    check(x0);
    if (!m.full_line() && x0 == m.a && m.singular_left()) throw SingularEndpointError("x0 at the singular endpoint");
    std::vector<std::size_t> left, right;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        check(xs[i]);
        (xs[i] < x0 ? left : right).push_back(i);
    }
    std::sort(left.begin(), left.end(), [&](auto a, auto b) { return xs[a] > xs[b]; });
    std::sort(right.begin(), right.end(), [&](auto a, auto b) { return xs[a] < xs[b]; });
    FramePair r;
    r.first.resize(xs.size());
    r.second.resize(xs.size());
    for (const auto* side : {&left, &right}) {
        std::vector<double> g;
        for (auto i : *side) g.push_back(xs[i]);
        const auto th = propagate(m.V, z, x0, {1.0, 0.0}, g, cfg);
        const auto ph = propagate(m.V, z, x0, {0.0, 1.0}, g, cfg);
        for (std::size_t k = 0; k < side->size(); ++k) {
            const auto i = (*side)[k];
            r.first[i] = {xs[i], th[k][0], th[k][1], z, FrameTag::ThetaX0};
            r.second[i] = {xs[i], ph[k][0], ph[k][1], z, FrameTag::PhiX0};
        }
    }
    return r;
}

// ---------------------------------------------------------------- Riccati

struct RiccatiOptions {
    double b = 0.0;  // 0: automatic start point
    IntegratorConfig cfg{};
};

struct RiccatiResult {
    cplx m;
    double b;
};

namespace detail {

// Log-derivative of x^{1/2} H^{(1)}_nu(z^{1/2} x): the decaying solution of the c/x^2 tail.
inline cplx tail_logderivative(double c, cplx z, double b) {
    const cplx r = sqrt_upper(z);
    if (c == 0.0) return I * r;
    const double nu = std::sqrt(std::max(c + 0.25, 0.0));
    const cplx w = r * b;
    const cplx h = hankel1_asym(nu, w);
    const cplx dh = 0.5 * (hankel1_asym(nu - 1.0, w) - hankel1_asym(nu + 1.0, w));
    return 1.0 / (2.0 * b) + r * dh / h;
}

inline double riccati_start(const PotentialModel& m, cplx z, double x_target, double user_b) {
    if (user_b > 0.0) {
        if (!(user_b > x_target)) throw ModelError("riccati: start point b must exceed the target");
        return user_b;
    }
    const cplx r = sqrt_upper(z);
    const double ar = std::abs(r);
    double b = std::max({x_target + 20.0 * m.length_scale, m.tail.start, 16.0 / ar});
    if (r.imag() * b > 400.0) b = std::max(x_target + 300.0 / r.imag(), x_target + 16.0 / ar);
    return b;
}

// Integrates m' = V - z - m^2 from (b, mb) backward to each target (descending), swapping to u = 1/m near poles.
inline std::vector<cplx> riccati_integrate(const RealFn& V, cplx z, double b, cplx mb, const std::vector<double>& targets,
                                           const IntegratorConfig& cfg) {
    namespace ode = boost::numeric::odeint;
    using S = std::array<cplx, 1>;
    auto stepper = ode::make_controlled(cfg.abs_tol, cfg.rel_tol, ode::runge_kutta_dopri5<S, double, S, double>());
    bool inverted = false;
    auto rhs = [&](const S& y, S& dy, double x) {
        const cplx q = V(x) - z;
        if (!inverted) dy[0] = q - y[0] * y[0];
        else dy[0] = 1.0 - q * y[0] * y[0];
    };
    S y{mb};
    double x = b;
    double dt = -std::min(0.05, 0.1 / std::max(1.0, std::abs(std::sqrt(z))));
    std::vector<cplx> out;
    // keeps |m dt| inside the dopri stability region; the controller alone lets the step grow on the fixed point
    const double cap = 1.0 / std::max(1.0, std::abs(std::sqrt(z)));
    long steps = 0;
    for (double t : targets) {
        if (t > x) throw ModelError("riccati: targets must be descending and below b");
        while (x > t) {
            if (cfg.max_step > 0.0) dt = std::max(dt, -cfg.max_step);
            dt = std::max(dt, -cap);
            if (x + dt < t) dt = t - x;
            const double x_before = x;
            const auto res = stepper.try_step(rhs, y, x, dt);
            if (res == ode::fail) {
                if (std::abs(dt) < cfg.min_step)
                    throw PoleSignal("riccati: step collapse, the Weyl solution appears to vanish near x", x);
                continue;
            }
            if (++steps > 20000000) throw ConvergenceError("riccati: too many steps");
            if (x == x_before) throw ConvergenceError("riccati: no progress");
            if (std::abs(y[0]) > 4.0) {
                y[0] = 1.0 / y[0];
                inverted = !inverted;
                stepper.reset();  // cached FSAL derivative belongs to the old chart
            }
            if (!std::isfinite(std::abs(y[0]))) throw PoleSignal("riccati: blow-up near x", x);
        }
        x = t;
        out.push_back(inverted ? 1.0 / y[0] : y[0]);
    }
    return out;
}

}  // namespace detail

// m_+(z, x) = psi_+'/psi_+ at each x (any order), for the solution decaying at +infinity.
inline std::vector<cplx> riccati_path(const PotentialModel& m, cplx z, const std::vector<double>& xs,
                                      const RiccatiOptions& opt = {}, double* b_used = nullptr) {
    opt.cfg.validate();
    // real z is fine below the essential spectrum [0, inf) shared by every model here
    if (z.imag() == 0.0 && !(z.real() < 0.0)) throw DomainError("riccati: z must be off [0, inf)");
    if (xs.empty()) return {};
    // Work in the upper half plane; m(conj z) = conj m(z) for real V.
    const bool flip = z.imag() < 0.0;
    const cplx zz = flip ? std::conj(z) : z;
    std::vector<std::size_t> idx(xs.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return xs[a] > xs[b]; });
    std::vector<double> sorted;
    for (auto i : idx) {
        if (!m.full_line() && xs[i] <= m.a && m.singular_left())
            throw SingularEndpointError("riccati: target at the singular endpoint");
        sorted.push_back(xs[i]);
    }
    const double b = detail::riccati_start(m, zz, sorted.front(), opt.b);
    if (b_used) *b_used = b;
    const cplx mb = detail::tail_logderivative(m.tail.inverse_square, zz, b);
    const auto vals = detail::riccati_integrate(m.V, zz, b, mb, sorted, opt.cfg);
    std::vector<cplx> out(xs.size());
    for (std::size_t k = 0; k < idx.size(); ++k) out[idx[k]] = flip ? std::conj(vals[k]) : vals[k];
    return out;
}

inline RiccatiResult riccati_logderivative(const PotentialModel& m, cplx z, double x_target, const RiccatiOptions& opt = {}) {
    double b = 0.0;
    const cplx v = riccati_path(m, z, {x_target}, opt, &b)[0];
    return {v, b};
}

// Left Weyl coefficient on the full line: psi_-'/psi_- for the solution decaying at -infinity.
inline std::vector<cplx> riccati_path_left(const PotentialModel& m, cplx z, const std::vector<double>& xs,
                                           const RiccatiOptions& opt = {}) {
    if (!m.full_line()) throw ModelError("riccati_path_left: only for full-line models");
    PotentialModel r = m;
    const RealFn V = m.V;
    r.V = [V](double x) { return V(-x); };
    std::vector<double> ys;
    for (double x : xs) ys.push_back(-x);
    auto vals = riccati_path(r, z, ys, opt);
    for (auto& v : vals) v = -v;
    return vals;
}

// psi_+ at each (ascending) x, normalized to psi_+(xs.front()) = 1.
inline std::vector<SolutionFrame> weyl_plus_frames(const PotentialModel& m, cplx z, const std::vector<double>& xs,
                                                   const RiccatiOptions& opt = {}) {
    if (xs.empty()) return {};
    for (std::size_t i = 1; i < xs.size(); ++i)
        if (xs[i] < xs[i - 1]) throw ModelError("weyl_plus_frames: grid must be ascending");
    const double top = xs.back();
    const cplx mt = riccati_path(m, z, {top}, opt)[0];
    std::vector<double> down(xs.rbegin(), xs.rend());
    const auto ys = propagate(m.V, z, top, {1.0, mt}, down, opt.cfg);
    const cplx norm = ys.back()[0];
    if (norm == cplx(0.0)) throw PoleSignal("weyl_plus_frames: psi_+ vanishes at the normalization point", xs.front());
    std::vector<SolutionFrame> out(xs.size());
    for (std::size_t k = 0; k < ys.size(); ++k) {
        const std::size_t i = xs.size() - 1 - k;
        out[i] = {xs[i], ys[k][0] / norm, ys[k][1] / norm, z, FrameTag::WeylPlus};
    }
    return out;
}

}  // namespace wtm
