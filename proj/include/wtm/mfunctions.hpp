#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <vector>

#include "wtm/ivp.hpp"
#include "wtm/quadrature.hpp"
#include "wtm/singular.hpp"

namespace wtm {

enum class SampleKind { HalfLineAlpha, InteriorPlus, InteriorMinus, SingularTilde, MatrixEntry };

struct BoundaryFunctionSample {
    cplx z;
    cplx value;
    SampleKind kind = SampleKind::HalfLineAlpha;
    double alpha = 0.0;  // HalfLineAlpha
    double x0 = 0.0;     // Interior*, SingularTilde reference point
    int i = 0, j = 0;    // MatrixEntry
    double err_estimate = 0.0;
    double truncation = 0.0;  // Riccati start point b
};

// ---------------------------------------------------------------- rotation

// m_{alpha1} from m_{alpha2}; a vanishing denominator is a genuine pole (eigenvalue), reported as PoleSignal.
inline cplx rotate_m(cplx m, double alpha1, double alpha2) {
    const double d = alpha1 - alpha2;
    const double c = std::cos(d), s = std::sin(d);
    const cplx den = c + s * m;
    if (std::abs(den) <= 1e-14 * (1.0 + std::abs(m))) throw PoleSignal("rotate_m: cos + sin m vanishes; the rotated m has a pole", d);
    return (-s + c * m) / den;
}

// ---------------------------------------------------------------- half-line

struct HalfLineOptions {
    RiccatiOptions riccati{};
};

// m_{+,alpha}(z) for a regular left endpoint; err_estimate = |m_b - m_2b|.
inline BoundaryFunctionSample halfline_m(const PotentialModel& m, double alpha, cplx z, const HalfLineOptions& opt = {}) {
    if (m.singular_left()) throw SingularEndpointError(m.name + ": halfline_m needs a regular endpoint; use singular_m_tilde");
    if (m.full_line()) throw ModelError(m.name + ": halfline_m needs a finite endpoint");
    if (!(alpha >= 0.0 && alpha < pi)) throw DomainError("alpha must lie in [0, pi)");
    const auto r1 = riccati_logderivative(m, z, m.a, opt.riccati);
    RiccatiOptions o2 = opt.riccati;
    o2.b = 2.0 * r1.b;
    const auto r2 = riccati_logderivative(m, z, m.a, o2);
    const double diff = std::abs(r1.m - r2.m);
    if (diff > std::max(1e-8, 1e-6 * std::abs(r1.m)))
        throw ConvergenceError("halfline_m: limit-point approximation did not settle between b and 2b", diff);
    BoundaryFunctionSample s;
    s.z = z;
    s.value = rotate_m(r1.m, alpha, 0.0);
    s.kind = SampleKind::HalfLineAlpha;
    s.alpha = alpha;
    s.x0 = m.a;
    s.err_estimate = diff;
    s.truncation = r1.b;
    return s;
}

// ---------------------------------------------------------------- interior m_-, m_+

struct InteriorOptions {
    double alpha = 0.0;  // boundary condition at a regular left endpoint
    RiccatiOptions riccati{};
};

// m_-(z, x0) (anti-Herglotz) and m_+(z, x0) (Herglotz).
inline std::pair<BoundaryFunctionSample, BoundaryFunctionSample> interior_m_pm(const PotentialModel& m, double x0, cplx z,
                                                                                const InteriorOptions& opt = {}) {
    if (z.imag() == 0.0 && !(z.real() < 0.0)) throw DomainError("interior_m_pm: z must be off [0, inf)");
    if (!m.full_line() && !(x0 > m.a)) throw DomainError("interior_m_pm: x0 must be interior");
    double b = 0.0;
    const cplx mp = riccati_path(m, z, {x0}, opt.riccati, &b)[0];
    cplx mm;
    if (m.full_line()) {
        mm = riccati_path_left(m, z, {x0}, opt.riccati)[0];
    } else if (m.singular_left()) {
        const auto f = phi_tilde_frame(m, z, x0, opt.riccati.cfg);
        if (f.psi == cplx(0.0)) throw PoleSignal("interior_m_pm: phi~ vanishes at x0, m_- has a pole", x0);
        mm = f.dpsi / f.psi;
    } else {
        const auto [th, ph] = fundamental_system_regular(m, opt.alpha, z, {x0}, opt.riccati.cfg);
        if (ph[0].psi == cplx(0.0)) throw PoleSignal("interior_m_pm: phi_alpha vanishes at x0, m_- has a pole", x0);
        mm = ph[0].dpsi / ph[0].psi;
    }
    BoundaryFunctionSample lo{z, mm, SampleKind::InteriorMinus, opt.alpha, x0, 0, 0, 0.0, b};
    BoundaryFunctionSample hi{z, mp, SampleKind::InteriorPlus, opt.alpha, x0, 0, 0, 0.0, b};
    return {lo, hi};
}

// ---------------------------------------------------------------- singular m~_+

// Constructed: theta~ assembled from phi~ at x0 (the general construction).
// Reference: the model's closed-form theta (fixes the gauge of the closed-form m~_+); needs an oracle.
enum class ThetaGauge { Constructed, Reference };

struct MTildeOptions {
    ThetaGauge gauge = ThetaGauge::Constructed;
    double x0 = 0.0;  // 0: the model's length scale
    double spread_tol = 1e-6;
    RiccatiOptions riccati{};
};

struct MTildeProbe {
    double x;
    cplx wronskian_form;  // (theta~ m_+ - theta~') / (phi~' - phi~ m_+)
    cplx ratio_form;      // theta~/phi~ m_+/(m_- - m_+) - theta~'/phi~ /(m_- - m_+)
    cplx w_theta_phi;     // W(theta~, phi~), should be 1
};

struct MTildeResult {
    BoundaryFunctionSample sample;
    std::vector<MTildeProbe> probes;
};

inline MTildeResult singular_m_tilde_detail(const PotentialModel& m, cplx z, std::vector<double> probes, const MTildeOptions& opt = {}) {
    if (!m.singular_left()) throw ModelError(m.name + ": m~_+ needs a strongly singular left endpoint");
    if (z.imag() == 0.0 && !(z.real() < 0.0)) throw DomainError("singular_m_tilde: z must be off [0, inf)");
    if (probes.empty()) throw ModelError("singular_m_tilde: need at least one probe point");
    std::sort(probes.begin(), probes.end());
    const double x0 = opt.x0 > 0.0 ? opt.x0 : m.length_scale;
    const auto& cfg = opt.riccati.cfg;
    const auto ph = phi_tilde_frames(m, z, probes, cfg);
    std::vector<SolutionFrame> th;
    if (opt.gauge == ThetaGauge::Constructed) {
        th = theta_tilde_frames(m, z, x0, probes, cfg);
    } else {
        if (!m.oracle.theta_closed) throw ModelError(m.name + ": reference gauge needs a closed-form theta");
        for (double x : probes) {
            const auto t = m.oracle.theta_closed(z, x);
            th.push_back({x, t.value, t.deriv, z, FrameTag::ThetaTilde});
        }
    }
    double b = 0.0;
    const auto mp = riccati_path(m, z, probes, opt.riccati, &b);
    MTildeResult res;
    double scale = 0.0;  // size of the terms whose difference is m~; keeps the spread meaningful near a zero of m~
    for (std::size_t i = 0; i < probes.size(); ++i) {
        const cplx den = ph[i].dpsi - ph[i].psi * mp[i];
        if (den == cplx(0.0)) throw DegeneracyError("singular_m_tilde: W(psi_+, phi~) vanishes");
        const cplx wf = (th[i].psi * mp[i] - th[i].dpsi) / den;
        scale = std::max({scale, std::abs(th[i].psi * mp[i] / den), std::abs(th[i].dpsi / den)});
        const cplx mm = ph[i].dpsi / ph[i].psi;
        const cplx d = mm - mp[i];
        const cplx rf = th[i].psi / ph[i].psi * mp[i] / d - th[i].dpsi / ph[i].psi / d;
        res.probes.push_back({probes[i], wf, rf, wronskian(th[i], ph[i])});
    }
    const cplx v = res.probes[probes.size() / 2].wronskian_form;
    double spread = 0.0;
    for (const auto& p : res.probes) spread = std::max(spread, std::abs(p.wronskian_form - v) / std::max(std::abs(v), scale));
    res.sample = {z, v, SampleKind::SingularTilde, 0.0, x0, 0, 0, spread, b};
    if (spread > opt.spread_tol)
        throw InconsistencyError("singular_m_tilde: probe spread " + std::to_string(spread) + " exceeds tolerance", spread);
    return res;
}

inline BoundaryFunctionSample singular_m_tilde(const PotentialModel& m, cplx z, const std::vector<double>& probes = {0.5, 1.0, 2.0},
                                               const MTildeOptions& opt = {}) {
    return singular_m_tilde_detail(m, z, probes, opt).sample;
}

// ---------------------------------------------------------------- matrix M

struct MatrixM {
    std::array<std::array<cplx, 2>, 2> entries{};
    cplx z;
    double x0 = 0.0;
    cplx operator()(int i, int j) const { return entries[i][j]; }
};

inline MatrixM matrix_m(cplx m_minus, cplx m_plus, cplx z = 0.0, double x0 = 0.0) {
    const cplx d = m_minus - m_plus;
    if (std::abs(d) <= 1e-14 * (std::abs(m_minus) + std::abs(m_plus)) || d == cplx(0.0))
        throw DegeneracyError("matrix_m: m_- = m_+ (vanishing Wronskian)");
    MatrixM M;
    M.z = z;
    M.x0 = x0;
    M.entries[0][0] = 1.0 / d;
    M.entries[0][1] = M.entries[1][0] = 0.5 * (m_minus + m_plus) / d;
    M.entries[1][1] = m_minus * m_plus / d;
    return M;
}

inline MatrixM matrix_m(const PotentialModel& m, double x0, cplx z, const InteriorOptions& opt = {}) {
    const auto [lo, hi] = interior_m_pm(m, x0, z, opt);
    return matrix_m(lo.value, hi.value, z, x0);
}

// ---------------------------------------------------------------- Green's function and resolvent

struct GreenOptions {
    double alpha = 0.0;
    RiccatiOptions riccati{};
};

namespace detail {

// Left solution (boundary condition, L^2 at a singular end, or decay at -inf) at ascending xs, any normalization.
inline std::vector<SolutionFrame> left_solution(const PotentialModel& m, cplx z, const std::vector<double>& xs, const GreenOptions& opt) {
    const auto& cfg = opt.riccati.cfg;
    if (m.full_line()) {
        const double bottom = xs.front();
        const cplx ml = riccati_path_left(m, z, {bottom}, opt.riccati)[0];
        const auto ys = propagate(m.V, z, bottom, {1.0, ml}, xs, cfg);
        std::vector<SolutionFrame> out;
        for (std::size_t i = 0; i < xs.size(); ++i) out.push_back({xs[i], ys[i][0], ys[i][1], z, FrameTag::WeylMinus});
        return out;
    }
    if (m.singular_left()) return phi_tilde_frames(m, z, xs, cfg);
    return fundamental_system_regular(m, opt.alpha, z, xs, cfg).second;
}

}  // namespace detail

// G(z, x, x') = u_L(x<) u_R(x>) / W(u_R, u_L).
inline cplx greens_function(const PotentialModel& m, cplx z, double x, double xp, const GreenOptions& opt = {}) {
    if (z.imag() == 0.0 && !(z.real() < 0.0)) throw DomainError("greens_function: z must be off [0, inf)");
    const double lo = std::min(x, xp), hi = std::max(x, xp);
    if (!m.full_line() && (lo < m.a || (m.singular_left() && lo <= m.a))) throw DomainError("greens_function: point outside the domain");
    const cplx mp = riccati_path(m, z, {hi}, opt.riccati)[0];  // u_R(hi) = 1, u_R'(hi) = m_+
    const auto uL = detail::left_solution(m, z, lo == hi ? std::vector<double>{lo} : std::vector<double>{lo, hi}, opt);
    const auto& top = uL.back();
    const cplx w = top.dpsi - mp * top.psi;  // W(u_R, u_L) at hi
    if (w == cplx(0.0)) throw PoleSignal("greens_function: Wronskian vanishes (eigenvalue)", z.real());
    return uL.front().psi / w;
}

struct ResolventOptions {
    double alpha = 0.0;
    RiccatiOptions riccati{};
};

// g = (H - z)^{-1} f at ascending xs, f supported on [s_lo, s_hi]:
//   g(x) = [u_R(x) int_{s_lo}^{x} u_L f + u_L(x) int_x^{s_hi} u_R f] / W(u_R, u_L).
inline std::vector<cplx> resolvent_apply(const PotentialModel& m, cplx z, const std::function<cplx(double)>& f, double s_lo, double s_hi,
                                         const std::vector<double>& xs, const ResolventOptions& opt = {}) {
    if (z.imag() == 0.0 && !(z.real() < 0.0)) throw DomainError("resolvent_apply: z must be off [0, inf)");
    if (!(s_hi > s_lo)) throw ModelError("resolvent_apply: empty support");
    if (!m.full_line() && (s_lo < m.a || (m.singular_left() && s_lo <= m.a)))
        throw DomainError("resolvent_apply: support must lie inside the domain (away from a singular endpoint)");
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (i && xs[i] < xs[i - 1]) throw ModelError("resolvent_apply: xs must be ascending");
        if (!m.full_line() && (xs[i] < m.a || (m.singular_left() && xs[i] <= m.a))) throw DomainError("resolvent_apply: point outside the domain");
    }
    if (xs.empty()) return {};
    const auto& R = detail::panel_rule();
    const std::size_t n = R.x.size();
    // breakpoints: support ends plus grid points inside, panels narrower than the local wavelength
    std::vector<double> cuts{s_lo, s_hi};
    for (double x : xs)
        if (x > s_lo && x < s_hi) cuts.push_back(x);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    const double width = std::min(0.25, 1.0 / std::max(1.0, std::sqrt(std::abs(z))));
    std::vector<double> br{cuts.front()};
    for (std::size_t k = 1; k < cuts.size(); ++k) {
        const int pieces = std::max(1, static_cast<int>(std::ceil((cuts[k] - cuts[k - 1]) / width)));
        for (int p = 1; p <= pieces; ++p) br.push_back(p == pieces ? cuts[k] : cuts[k - 1] + (cuts[k] - cuts[k - 1]) * p / pieces);
    }
    // every evaluation point, ascending: quadrature nodes, breakpoints, grid
    std::vector<double> pts(br.begin(), br.end());
    for (std::size_t j = 0; j + 1 < br.size(); ++j) {
        const double hw = 0.5 * (br[j + 1] - br[j]);
        for (std::size_t i = 0; i < n; ++i) pts.push_back(br[j] + hw * (R.x[i] + 1.0));
    }
    pts.insert(pts.end(), xs.begin(), xs.end());
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    auto at = [&](double x) { return static_cast<std::size_t>(std::lower_bound(pts.begin(), pts.end(), x) - pts.begin()); };

    GreenOptions go{opt.alpha, opt.riccati};
    const auto uL = detail::left_solution(m, z, pts, go);
    const auto uR = weyl_plus_frames(m, z, pts, opt.riccati);
    const cplx w = wronskian(uR[0], uL[0]);
    if (w == cplx(0.0)) throw PoleSignal("resolvent_apply: Wronskian vanishes (eigenvalue)", z.real());

    // cumulative integrals at breakpoints
    const std::size_t nb = br.size();
    std::vector<cplx> IL(nb, 0.0), IR(nb, 0.0);  // int_{s_lo}^{br_k} u_L f, int_{br_k}^{s_hi} u_R f
    for (std::size_t j = 0; j + 1 < nb; ++j) {
        const double hw = 0.5 * (br[j + 1] - br[j]);
        cplx sl = 0.0, sr = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double t = br[j] + hw * (R.x[i] + 1.0);
            const std::size_t k = at(t);
            const cplx ft = f(t);
            sl += R.w[i] * hw * uL[k].psi * ft;
            sr += R.w[i] * hw * uR[k].psi * ft;
        }
        IL[j + 1] = IL[j] + sl;
        IR[j] = sr;  // panel piece for now, summed from the top below
    }
    IR[nb - 1] = 0.0;
    for (std::size_t j = nb - 1; j-- > 0;) IR[j] += IR[j + 1];
    std::vector<cplx> out;
    for (double x : xs) {
        cplx left, right;
        if (x <= s_lo) {
            left = 0.0;
            right = IR[0];
        } else if (x >= s_hi) {
            left = IL[nb - 1];
            right = 0.0;
        } else {
            const std::size_t k = static_cast<std::size_t>(std::lower_bound(br.begin(), br.end(), x) - br.begin());
            left = IL[k];
            right = IR[k];
        }
        const std::size_t p = at(x);
        out.push_back((uR[p].psi * left + uL[p].psi * right) / w);
    }
    return out;
}

// (f, (H - z)^{-1} g) = int int f(x) G(z, x, y) g(y), both supported on [s_lo, s_hi]; no conjugation of f.
inline cplx resolvent_form(const PotentialModel& m, cplx z, const std::function<cplx(double)>& f, const std::function<cplx(double)>& g,
                           double s_lo, double s_hi, const ResolventOptions& opt = {}) {
    if (z.imag() == 0.0 && !(z.real() < 0.0)) throw DomainError("resolvent_form: z must be off [0, inf)");
    if (!(s_hi > s_lo)) throw ModelError("resolvent_form: empty support");
    if (!m.full_line() && (s_lo < m.a || (m.singular_left() && s_lo <= m.a)))
        throw DomainError("resolvent_form: support must lie inside the domain (away from a singular endpoint)");
    const auto& R = detail::panel_rule();
    static const auto S = cumulative_matrix(detail::panel_rule());
    const std::size_t n = R.x.size();
    const double width = std::min(0.25, 1.0 / std::max(1.0, std::sqrt(std::abs(z))));
    const int panels = std::max(1, static_cast<int>(std::ceil((s_hi - s_lo) / width)));
    std::vector<double> pts;
    for (int j = 0; j < panels; ++j) {
        const double a = s_lo + (s_hi - s_lo) * j / panels, hw = 0.5 * (s_hi - s_lo) / panels;
        for (std::size_t i = 0; i < n; ++i) pts.push_back(a + hw * (R.x[i] + 1.0));
    }
    const double hw = 0.5 * (s_hi - s_lo) / panels;
    GreenOptions go{opt.alpha, opt.riccati};
    const auto uL = detail::left_solution(m, z, pts, go);
    const auto uR = weyl_plus_frames(m, z, pts, opt.riccati);
    const cplx w = wronskian(uR[0], uL[0]);
    if (w == cplx(0.0)) throw PoleSignal("resolvent_form: Wronskian vanishes (eigenvalue)", z.real());
    std::vector<cplx> fv(pts.size()), lg(pts.size()), rg(pts.size());
    for (std::size_t k = 0; k < pts.size(); ++k) {
        const cplx gv = g(pts[k]);
        fv[k] = f(pts[k]);
        lg[k] = uL[k].psi * gv;
        rg[k] = uR[k].psi * gv;
    }
    // running integrals of u_L g from s_lo and u_R g from s_hi, at every node
    std::vector<cplx> below(pts.size()), above(pts.size()), tot_r(panels, 0.0);
    cplx acc = 0.0;
    for (int j = 0; j < panels; ++j) {
        const std::size_t o = j * n;
        cplx pl = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            cplx sl = 0.0;
            for (std::size_t k = 0; k < n; ++k) sl += S[i][k] * lg[o + k];
            below[o + i] = acc + hw * sl;
            pl += R.w[i] * lg[o + i];
            tot_r[j] += hw * R.w[i] * rg[o + i];
        }
        acc += hw * pl;
    }
    cplx top = 0.0;  // int over panels above the current one
    for (int j = panels; j-- > 0;) {
        const std::size_t o = j * n;
        for (std::size_t i = 0; i < n; ++i) {
            cplx sr = 0.0;
            for (std::size_t k = 0; k < n; ++k) sr += S[i][k] * rg[o + k];
            above[o + i] = top + tot_r[j] - hw * sr;
        }
        top += tot_r[j];
    }
    cplx s = 0.0;
    for (int j = 0; j < panels; ++j)
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t k = j * n + i;
            s += hw * R.w[i] * fv[k] * (uR[k].psi * below[k] + uL[k].psi * above[k]);
        }
    return s / w;
}

// ---------------------------------------------------------------- Weyl identity

struct WeylIdentity {
    double integral;  // int_{x0}^inf |psi_+|^2 with psi_+(x0) = 1
    double ratio;     // Im m_+(z, x0) / Im z
};

// The x0 = a case on a regular half-line is the alpha = 0 identity for m_{+,0}.
inline WeylIdentity weyl_identity(const PotentialModel& m, cplx z, double x0, const RiccatiOptions& opt = {}) {
    if (z.imag() == 0.0) throw DomainError("weyl_identity: Im z must be nonzero");
    const double decay = std::abs(sqrt_upper(z).imag());
    const double top = x0 + 40.0 / decay;  // e^{-80} remainder
    const auto& R = detail::panel_rule();
    std::vector<double> br{x0};
    while (br.back() < top) br.push_back(std::min(top, br.back() + std::min(0.5, 1.0 / std::max(1.0, std::sqrt(std::abs(z))))));
    std::vector<double> pts{x0};
    for (std::size_t j = 0; j + 1 < br.size(); ++j) {
        const double hw = 0.5 * (br[j + 1] - br[j]);
        for (std::size_t i = 0; i < R.x.size(); ++i) pts.push_back(br[j] + hw * (R.x[i] + 1.0));
    }
    const auto fr = weyl_plus_frames(m, z, pts, opt);
    double s = 0.0;
    std::size_t k = 1;
    for (std::size_t j = 0; j + 1 < br.size(); ++j) {
        const double hw = 0.5 * (br[j + 1] - br[j]);
        for (std::size_t i = 0; i < R.x.size(); ++i) s += R.w[i] * hw * std::norm(fr[k++].psi);
    }
    const cplx mp = riccati_path(m, z, {x0}, opt)[0];
    return {s, mp.imag() / z.imag()};
}

}  // namespace wtm
