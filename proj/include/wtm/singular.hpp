#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "wtm/ivp.hpp"
#include "wtm/quadrature.hpp"

namespace wtm {

// Bookkeeping for one Volterra solve. term_abs[i][k] = |phi~_k| at target i, envelope_q[i] = Q(x_i) so that the
// a priori bound on term k is x^{1/2+gamma} Q^k / k! (Bessel) or |eta_-| Q^k / k! (factorized).
struct VolterraSeries {
    double gamma = 0.0;
    cplx z;
    int terms_used = 0;
    double bound_value = 0.0;  // last envelope term relative to the partial sum
    std::vector<std::vector<double>> term_abs;
    std::vector<double> envelope_q;
};

struct SingularSolution {
    std::vector<ValueDeriv> values;
    VolterraSeries series;
};

namespace detail {

inline constexpr int kPanelNodes = 16;
inline constexpr int kMaxTerms = 40;
inline constexpr double kTermTol = 1e-14;
inline constexpr double kEnvelopeSwitch = 5.0;

inline const GaussRule& panel_rule() {
    static const GaussRule r = gauss_legendre(kPanelNodes);
    return r;
}

inline const GaussRule& fine_rule() {
    static const GaussRule r = gauss_legendre(40);
    return r;
}

// Barycentric weights turning nodal values on [lo, hi] into the value at t.
inline std::vector<double> bary_row(const GaussRule& r, double lo, double hi, double t) {
    const double u = (2.0 * t - lo - hi) / (hi - lo);
    std::vector<double> c(r.x.size(), 0.0);
    double den = 0.0;
    for (std::size_t j = 0; j < r.x.size(); ++j) {
        const double d = u - r.x[j];
        if (d == 0.0) {
            std::fill(c.begin(), c.end(), 0.0);
            c[j] = 1.0;
            return c;
        }
        c[j] = r.bary[j] / d;
        den += c[j];
    }
    for (auto& v : c) v /= den;
    return c;
}

inline void check_targets(const std::vector<double>& xs, const char* who) {
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (!(xs[i] > 0.0) || !std::isfinite(xs[i])) throw DomainError(std::string(who) + ": x must be positive and finite");
        if (i && xs[i] < xs[i - 1]) throw ModelError(std::string(who) + ": targets must be ascending");
    }
}

// Breakpoints from `start` through every target; panels no wider than `width` and (above 0) no longer than ratio 2.
inline std::vector<double> panel_breaks(double start, const std::vector<double>& xs, double width) {
    std::vector<double> b{start};
    for (double x : xs) {
        if (x <= b.back()) continue;
        while (b.back() < x) {
            double step = width;
            if (b.back() > 0.0) step = std::min(step, b.back());
            const double nxt = b.back() + step;
            b.push_back(nxt >= x * (1.0 - 1e-12) ? x : nxt);
        }
    }
    return b;
}

inline double oscillation_width(cplx z) { return std::min(0.5, 2.0 / std::sqrt(std::max(1.0, std::abs(z)))); }

}  // namespace detail

// ---------------------------------------------------------------- Bessel-type Volterra series

// phi~ = x^{1/2+gamma} + (1/2gamma) int_0^x [x^{1/2+gamma} t^{1/2-gamma} - t^{1/2+gamma} x^{1/2-gamma}] U phi~ dt,
// U = vtilde - z. Raw normalization (leading term x^{1/2+gamma}). Targets ascending.
inline SingularSolution volterra_phi_tilde(double gamma, const RealFn& vtilde, cplx z, const std::vector<double>& xs) {
    if (!(gamma >= 1.0)) throw ModelError("volterra: gamma must be >= 1");
    if (!vtilde) throw ModelError("volterra: vtilde missing");
    detail::check_targets(xs, "volterra");
    SingularSolution out;
    out.series.gamma = gamma;
    out.series.z = z;
    if (xs.empty()) return out;

    // write phi~_k = x^{1/2+gamma} g_k, h = U g_{k-1}:
    //   g_k = (A - Bh) / 2gamma,  A = int_0^x t h,  Bh = x^{-2gamma} int_0^x t^{1+2gamma} h,  g_k' = Bh / x
    const auto& R = detail::panel_rule();
    const auto& F = detail::fine_rule();
    const std::size_t n = R.x.size();
    const auto br = detail::panel_breaks(0.0, xs, detail::oscillation_width(z));
    const std::size_t np = br.size() - 1;
    const double g2 = 2.0 * gamma;

    // per panel: n interior nodes then the right endpoint
    std::vector<std::vector<double>> nodes(np);
    std::vector<std::vector<std::vector<double>>> WA(np), WB(np);
    std::vector<std::vector<cplx>> U(np);
    for (std::size_t j = 0; j < np; ++j) {
        const double lo = br[j], hi = br[j + 1], hw = 0.5 * (hi - lo);
        for (std::size_t i = 0; i < n; ++i) nodes[j].push_back(lo + hw * (R.x[i] + 1.0));
        nodes[j].push_back(hi);
        for (double x : nodes[j]) {
            std::vector<double> ra(n, 0.0), rb(n, 0.0);
            const double h2 = 0.5 * (x - lo);
            for (std::size_t q = 0; q < F.x.size(); ++q) {
                const double t = lo + h2 * (F.x[q] + 1.0);
                const auto c = detail::bary_row(R, lo, hi, t);
                const double wa = F.w[q] * h2 * t;
                const double wb = wa * std::pow(t / x, g2);
                for (std::size_t l = 0; l < n; ++l) {
                    ra[l] += wa * c[l];
                    rb[l] += wb * c[l];
                }
            }
            WA[j].push_back(ra);
            WB[j].push_back(rb);
        }
        for (std::size_t i = 0; i < n; ++i) U[j].push_back(vtilde(nodes[j][i]) - z);
    }

    // Q(x) = gamma^{-1} int_0^x t |U| at panel ends
    std::vector<double> Qend(np);
    {
        double acc = 0.0;
        for (std::size_t j = 0; j < np; ++j) {
            const double hw = 0.5 * (br[j + 1] - br[j]);
            for (std::size_t i = 0; i < n; ++i) acc += R.w[i] * hw * nodes[j][i] * std::abs(U[j][i]);
            Qend[j] = acc / gamma;
        }
    }
    // each target is some panel's right end
    std::vector<std::size_t> tpanel;
    for (double x : xs) {
        const auto it = std::lower_bound(br.begin() + 1, br.end(), x * (1.0 - 1e-12));
        tpanel.push_back(static_cast<std::size_t>(it - br.begin()) - 1);
    }

    std::vector<std::vector<cplx>> g(np, std::vector<cplx>(n + 1, 1.0));
    std::vector<cplx> gsum(xs.size(), 1.0), dgsum(xs.size(), 0.0);
    out.series.term_abs.assign(xs.size(), {});
    for (std::size_t t = 0; t < xs.size(); ++t) {
        out.series.term_abs[t].push_back(std::pow(xs[t], 0.5 + gamma));
        out.series.envelope_q.push_back(Qend[tpanel[t]]);
    }

    int k = 0;
    double ratio = 0.0;
    double fact = 1.0;
    for (k = 1; k <= detail::kMaxTerms; ++k) {
        fact *= k;
        std::vector<std::vector<cplx>> gn(np, std::vector<cplx>(n + 1));
        std::vector<std::vector<cplx>> bh(np, std::vector<cplx>(n + 1));
        cplx A = 0.0, B = 0.0;
        for (std::size_t j = 0; j < np; ++j) {
            std::vector<cplx> h(n);
            for (std::size_t l = 0; l < n; ++l) h[l] = U[j][l] * g[j][l];
            const double p = br[j];
            for (std::size_t i = 0; i <= n; ++i) {
                const double x = nodes[j][i];
                cplx a = A, b = (p > 0.0) ? B * std::pow(p / x, g2) : cplx(0.0);
                for (std::size_t l = 0; l < n; ++l) {
                    a += WA[j][i][l] * h[l];
                    b += WB[j][i][l] * h[l];
                }
                gn[j][i] = (a - b) / g2;
                bh[j][i] = b;
            }
            A = A + [&] {
                cplx s = 0.0;
                for (std::size_t l = 0; l < n; ++l) s += WA[j][n][l] * h[l];
                return s;
            }();
            B = bh[j][n];
        }
        g.swap(gn);
        ratio = 0.0;
        for (std::size_t t = 0; t < xs.size(); ++t) {
            const std::size_t j = tpanel[t];
            const double x = xs[t];
            gsum[t] += g[j][n];
            dgsum[t] += bh[j][n] / x;
            const double lead = std::pow(x, 0.5 + gamma);
            out.series.term_abs[t].push_back(lead * std::abs(g[j][n]));
            const double env = std::pow(Qend[j], k) / fact;
            const double scale = std::max(std::abs(gsum[t]), std::abs(x * dgsum[t]));
            ratio = std::max(ratio, env / std::max(scale, std::numeric_limits<double>::min()));
        }
        if (ratio <= detail::kTermTol) break;
    }
    out.series.terms_used = std::min(k, detail::kMaxTerms);
    out.series.bound_value = ratio;
    if (ratio > detail::kTermTol)
        throw ConvergenceError("volterra: envelope still above tolerance after 40 terms (achieved " + std::to_string(ratio) + ")",
                               ratio);
    for (std::size_t t = 0; t < xs.size(); ++t) {
        const double x = xs[t];
        const double lead = std::pow(x, 0.5 + gamma);
        out.values.push_back({lead * gsum[t], (0.5 + gamma) * lead / x * gsum[t] + lead * dgsum[t]});
    }
    return out;
}

inline ValueDeriv volterra_phi_tilde(double gamma, const RealFn& vtilde, cplx z, double x) {
    return volterra_phi_tilde(gamma, vtilde, z, std::vector<double>{x}).values[0];
}

// Largest x <= x_max with Q(x) <= limit, where Q(x) = scale * int_0^x weight(t) |U(t)| dt (Q increasing).
// One cumulative Gauss sweep: geometric panels from 1e-12 x_max, then width <= 1/4; bisection inside the crossing panel.
template <class W>
double envelope_switch(W weight, const RealFn& vtilde, cplx z, double x_max, double scale, double limit) {
    const auto& R = detail::panel_rule();
    auto piece = [&](double lo, double hi) {
        const double hw = 0.5 * (hi - lo);
        double s = 0.0;
        for (std::size_t i = 0; i < R.x.size(); ++i) {
            const double t = lo + hw * (R.x[i] + 1.0);
            s += R.w[i] * hw * weight(t) * std::abs(vtilde(t) - z);
        }
        return scale * s;
    };
    double lo = 1e-12 * x_max, acc = 0.0;
    while (lo < x_max) {
        const double hi = std::min({x_max, 2.0 * lo, lo + 0.25});
        const double p = piece(lo, hi);
        if (acc + p > limit) {
            double a = lo, b = hi;
            for (int i = 0; i < 50; ++i) {
                const double mid = 0.5 * (a + b);
                (acc + piece(lo, mid) <= limit ? a : b) = mid;
            }
            if (a <= 1e-12 * x_max) throw ConvergenceError("volterra: envelope exceeds its limit arbitrarily close to the endpoint");
            return a;
        }
        acc += p;
        lo = hi;
    }
    return x_max;
}

// ---------------------------------------------------------------- eta pair

struct EtaPair {
    ValueDeriv plus, minus;
    double ihat;  // int_x^{x0} f^{-2}
};

namespace detail {

inline double ihat(const FactorizedPotential& fp, double x) {
    if (fp.inv_f2) return fp.inv_f2(x);
    auto w = [&](double t) {
        const double f = fp.f(t);
        return 1.0 / (f * f);
    };
    const double lo = std::min(x, fp.x0), hi = std::max(x, fp.x0);
    double s = 0.0;
    // geometric panels toward the small end
    for (double a = hi; a > lo;) {
        const double b = std::max(lo, std::min(a - 1.0, 0.5 * a));
        s += integrate_adaptive(w, b, a, 1e-13);
        a = b;
    }
    return x <= fp.x0 ? s : -s;
}

}  // namespace detail

// eta_{+-} = 2^{-1/2} f exp(+- int_x^{x0} f^{-2}); W(eta_+, eta_-) = 1.
inline EtaPair eta_pair(const FactorizedPotential& fp, double x) {
    if (!(x > 0.0)) throw DomainError("eta_pair: x must be positive");
    const double f = fp.f(x), df = fp.df(x);
    if (f == 0.0 || !std::isfinite(f)) throw ModelError("eta_pair: f vanishes or is not finite");
    const double I0 = detail::ihat(fp, x);
    if (!std::isfinite(I0) || std::abs(I0) > 700.0)
        throw ConvergenceError("eta_pair: int f^{-2} too large for raw exponentials; use ratios", std::abs(I0));
    const double ep = std::exp(I0), em = std::exp(-I0), s = std::sqrt(0.5);
    return {{s * f * ep, s * (df - 1.0 / f) * ep}, {s * f * em, s * (df + 1.0 / f) * em}, I0};
}

// ---------------------------------------------------------------- factorized Volterra

// phi~ = eta_- + int_0^x [eta_+(t) eta_-(x) - eta_+(x) eta_-(t)] U phi~, solved in the ratio form phi~ = eta_- q:
//   q_k(x) = P(x) - B(x),  P = int_0^x (f^2/2) U q_{k-1},  B = int_0^x (f^2/2) e^{-2J} U q_{k-1},
//   J(t, x) = ihat(t) - ihat(x) >= 0,  q' = 2B / f(x)^2.
// B is integrated in s = 2J, which flattens the boundary layer at t = x.
inline SingularSolution factorized_phi_tilde(const FactorizedPotential& fp, cplx z, const std::vector<double>& xs) {
    if (!fp.f || !fp.df || !fp.vtilde) throw ModelError("factorized_volterra: factorized data incomplete");
    detail::check_targets(xs, "factorized_volterra");
    SingularSolution out;
    out.series.z = z;
    if (xs.empty()) return out;
    const auto& R = detail::panel_rule();
    const std::size_t n = R.x.size();
    const double t_min = 1e-12 * xs.back();

    std::vector<double> br{t_min};
    while (br.back() * 2.0 < xs.front()) br.push_back(br.back() * 2.0);
    {
        const auto rest = detail::panel_breaks(br.back(), xs, detail::oscillation_width(z));
        br.insert(br.end(), rest.begin() + 1, rest.end());
    }
    const std::size_t np = br.size() - 1;

    // ihat, f and vtilde at every point (n nodes + right end per panel)
    struct Pt {
        double x, f, ih, vt;
    };
    std::vector<std::vector<Pt>> pts(np);
    // ihat at panel ends by quadrature of f^{-2} from the top, unless closed form is given
    std::vector<double> ih_end(np + 1);
    ih_end[np] = detail::ihat(fp, br[np]);
    auto inv2 = [&](double t) {
        const double f = fp.f(t);
        return 1.0 / (f * f);
    };
    for (std::size_t j = np; j-- > 0;) {
        if (fp.inv_f2) {
            ih_end[j] = fp.inv_f2(br[j]);
            continue;
        }
        const double hw = 0.5 * (br[j + 1] - br[j]);
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += R.w[i] * hw * inv2(br[j] + hw * (R.x[i] + 1.0));
        ih_end[j] = ih_end[j + 1] + s;
    }
    const auto& S = [] () -> const std::vector<std::vector<double>>& {
        static const auto s = cumulative_matrix(detail::panel_rule());
        return s;
    }();
    for (std::size_t j = 0; j < np; ++j) {
        const double lo = br[j], hw = 0.5 * (br[j + 1] - br[j]);
        for (std::size_t i = 0; i <= n; ++i) {
            const double x = (i < n) ? lo + hw * (R.x[i] + 1.0) : br[j + 1];
            double ih;
            if (fp.inv_f2) ih = fp.inv_f2(x);
            else if (i == n) ih = ih_end[j + 1];
            else {
                double s = 0.0;
                for (std::size_t l = 0; l < n; ++l) s += S[i][l] * hw * inv2(lo + hw * (R.x[l] + 1.0));
                ih = ih_end[j] - s;
            }
            const double f = fp.f(x);
            if (!(f != 0.0) || !std::isfinite(f)) throw ModelError("factorized_volterra: f vanishes or is not finite");
            pts[j].push_back({x, f, ih, fp.vtilde(x)});
        }
    }
    auto ihat_at = [&](std::size_t j, double t) {
        if (fp.inv_f2) return fp.inv_f2(t);
        std::vector<double> v(n);
        for (std::size_t l = 0; l < n; ++l) v[l] = pts[j][l].ih;
        return bary_eval(R, v, (2.0 * t - br[j] - br[j + 1]) / (br[j + 1] - br[j]));
    };

    // s-rule for B: panels in s = 2J over [0, 40]
    static const std::vector<double> s_breaks{0.0, 1.0, 3.0, 7.0, 15.0, 40.0};
    struct SNode {
        std::size_t panel;  // np: below t_min
        std::vector<double> row;
        double weight;  // ds weight * e^{-s} * f^4/4
        double vt;
    };
    // for each point: the s-nodes that land inside [t_min, x]
    std::vector<std::vector<std::vector<SNode>>> snodes(np, std::vector<std::vector<SNode>>(n + 1));
    for (std::size_t j = 0; j < np; ++j) {
        for (std::size_t i = 0; i <= n; ++i) {
            const Pt& P0 = pts[j][i];
            const double s_cap = 2.0 * (ih_end[0] - P0.ih);
            auto& list = snodes[j][i];
            std::size_t pj = j;  // search downward from the point's own panel
            for (std::size_t a = 0; a + 1 < s_breaks.size(); ++a) {
                const double s0 = s_breaks[a], s1 = std::min(s_breaks[a + 1], s_cap);
                if (s1 <= s0) break;
                const double hw = 0.5 * (s1 - s0);
                for (std::size_t q = 0; q < n; ++q) {
                    const double s = s0 + hw * (R.x[q] + 1.0);
                    const double target = P0.ih + 0.5 * s;  // ihat(t) = ihat(x) + s/2
                    while (pj > 0 && ih_end[pj] < target) --pj;
                    if (ih_end[pj] < target) continue;  // below t_min
                    // safeguarded Newton inside [br[pj], min(br[pj+1], x)]
                    double lo = br[pj], hi = std::min(br[pj + 1], P0.x);
                    double t = 0.5 * (lo + hi);
                    for (int it = 0; it < 100; ++it) {
                        const double r = ihat_at(pj, t) - target;  // decreasing in t
                        if (r > 0.0) lo = t;
                        else hi = t;
                        const double f = fp.f(t);
                        double tn = t + r * f * f;
                        if (!(tn > lo && tn < hi)) tn = 0.5 * (lo + hi);
                        if (std::abs(tn - t) <= 1e-15 * std::max(t, 1e-300) || hi - lo <= 1e-15 * hi) {
                            t = tn;
                            break;
                        }
                        t = tn;
                    }
                    const double f = fp.f(t);
                    list.push_back({pj, detail::bary_row(R, br[pj], br[pj + 1], t), R.w[q] * hw * std::exp(-s) * 0.25 * f * f * f * f,
                                    fp.vtilde(t)});
                }
            }
        }
    }

    // envelope Q = int_0^x f^2 |U| at panel ends, with the [0, t_min] piece extrapolated
    auto powerlaw_head = [&](const std::vector<Pt>& first, const std::vector<cplx>& G) -> cplx {
        if (std::abs(G[0]) == 0.0) return 0.0;
        const double beta = std::log(std::abs(G[1]) / std::abs(G[0])) / std::log(first[1].x / first[0].x);
        if (!(beta > -1.0) || !std::isfinite(beta))
            throw ConvergenceError("factorized_volterra: integrable-singularity check failed near 0 (exponent " + std::to_string(beta) + ")");
        return G[0] * std::pow(t_min / first[0].x, beta) * t_min / (beta + 1.0);
    };
    std::vector<double> Qend(np);
    {
        std::vector<cplx> G0(n);
        for (std::size_t l = 0; l < n; ++l) G0[l] = pts[0][l].f * pts[0][l].f * std::abs(pts[0][l].vt - z);
        double acc = std::abs(powerlaw_head(pts[0], G0));
        for (std::size_t j = 0; j < np; ++j) {
            const double hw = 0.5 * (br[j + 1] - br[j]);
            for (std::size_t l = 0; l < n; ++l) acc += R.w[l] * hw * pts[j][l].f * pts[j][l].f * std::abs(pts[j][l].vt - z);
            Qend[j] = acc;
        }
    }
    std::vector<std::size_t> tpanel;
    for (double x : xs) {
        const auto it = std::lower_bound(br.begin() + 1, br.end(), x * (1.0 - 1e-12));
        tpanel.push_back(static_cast<std::size_t>(it - br.begin()) - 1);
    }
    std::vector<EtaPair> eta;
    for (double x : xs) eta.push_back(eta_pair(fp, x));

    std::vector<std::vector<cplx>> q(np, std::vector<cplx>(n + 1, 1.0));
    std::vector<cplx> qsum(xs.size(), 1.0), dqsum(xs.size(), 0.0);
    out.series.term_abs.assign(xs.size(), {});
    for (std::size_t t = 0; t < xs.size(); ++t) {
        out.series.term_abs[t].push_back(std::abs(eta[t].minus.value));
        out.series.envelope_q.push_back(Qend[tpanel[t]]);
    }
    int k = 0;
    double ratio = 0.0, fact = 1.0;
    for (k = 1; k <= detail::kMaxTerms; ++k) {
        fact *= k;
        std::vector<std::vector<cplx>> G(np, std::vector<cplx>(n));
        for (std::size_t j = 0; j < np; ++j)
            for (std::size_t l = 0; l < n; ++l) G[j][l] = 0.5 * pts[j][l].f * pts[j][l].f * (pts[j][l].vt - z) * q[j][l];
        auto qprev_at = [&](const SNode& s) {
            cplx v = 0.0;
            for (std::size_t l = 0; l < n; ++l) v += s.row[l] * q[s.panel][l];
            return v;
        };
        std::vector<std::vector<cplx>> qn(np, std::vector<cplx>(n + 1)), bn(np, std::vector<cplx>(n + 1));
        cplx P = powerlaw_head(pts[0], G[0]);
        for (std::size_t j = 0; j < np; ++j) {
            const double hw = 0.5 * (br[j + 1] - br[j]);
            for (std::size_t i = 0; i <= n; ++i) {
                cplx p = P;
                for (std::size_t l = 0; l < n; ++l) p += (i < n ? S[i][l] : R.w[l]) * hw * G[j][l];
                cplx b = 0.0;
                for (const auto& s : snodes[j][i]) b += s.weight * (s.vt - z) * qprev_at(s);
                qn[j][i] = p - b;
                bn[j][i] = b;
            }
            for (std::size_t l = 0; l < n; ++l) P += R.w[l] * hw * G[j][l];
        }
        q.swap(qn);
        ratio = 0.0;
        for (std::size_t t = 0; t < xs.size(); ++t) {
            const std::size_t j = tpanel[t];
            const double f = pts[j][n].f;
            qsum[t] += q[j][n];
            dqsum[t] += 2.0 * bn[j][n] / (f * f);
            out.series.term_abs[t].push_back(std::abs(eta[t].minus.value * q[j][n]));
            const double env = std::pow(Qend[j], k) / fact;
            const double scale = std::max(std::abs(qsum[t]), std::abs(xs[t] * dqsum[t]));
            ratio = std::max(ratio, env / std::max(scale, std::numeric_limits<double>::min()));
        }
        if (ratio <= detail::kTermTol) break;
    }
    out.series.terms_used = std::min(k, detail::kMaxTerms);
    out.series.bound_value = ratio;
    if (ratio > detail::kTermTol)
        throw ConvergenceError("factorized_volterra: envelope still above tolerance after 40 terms (achieved " + std::to_string(ratio) + ")",
                               ratio);
    for (std::size_t t = 0; t < xs.size(); ++t) {
        const auto& e = eta[t].minus;
        out.values.push_back({e.value * qsum[t], e.deriv * qsum[t] + e.value * dqsum[t]});
    }
    return out;
}

// ---------------------------------------------------------------- model-level phi~ and theta~

// phi~ in the model normalization at ascending xs: series up to the envelope switch, IVP beyond.
inline std::vector<SolutionFrame> phi_tilde_frames(const PotentialModel& m, cplx z, const std::vector<double>& xs,
                                                   const IntegratorConfig& cfg = {}) {
    if (!m.singular_left()) throw ModelError(m.name + ": phi~ needs a strongly singular left endpoint");
    detail::check_targets(xs, "phi_tilde");
    if (xs.empty()) return {};
    std::function<SingularSolution(const std::vector<double>&)> series;
    double x_sw = 0.0, scale = 1.0;
    if (m.bessel) {
        const auto& b = *m.bessel;
        x_sw = envelope_switch([](double t) { return t; }, b.vtilde, z, xs.back(), 1.0 / b.gamma, detail::kEnvelopeSwitch);
        series = [&](const std::vector<double>& g) { return volterra_phi_tilde(b.gamma, b.vtilde, z, g); };
        scale = b.phi_scale;
    } else if (m.factorized) {
        const auto& fp = *m.factorized;
        x_sw = envelope_switch([&](double t) { return fp.f(t) * fp.f(t); }, fp.vtilde, z, xs.back(), 1.0, detail::kEnvelopeSwitch);
        series = [&](const std::vector<double>& g) { return factorized_phi_tilde(fp, z, g); };
    } else {
        throw ModelError(m.name + ": no singular-endpoint data (bessel or factorized) attached");
    }
    std::vector<double> inner, outer;
    for (double x : xs) (x <= x_sw ? inner : outer).push_back(x);
    if (!outer.empty()) inner.push_back(x_sw);
    const auto sol = series(inner);
    std::vector<SolutionFrame> res;
    for (std::size_t i = 0; i < xs.size() - outer.size(); ++i)
        res.push_back({xs[i], scale * sol.values[i].value, scale * sol.values[i].deriv, z, FrameTag::PhiTilde});
    if (!outer.empty()) {
        const auto& s = sol.values.back();
        const auto ys = propagate(m.V, z, x_sw, {scale * s.value, scale * s.deriv}, outer, cfg);
        for (std::size_t i = 0; i < outer.size(); ++i) res.push_back({outer[i], ys[i][0], ys[i][1], z, FrameTag::PhiTilde});
    }
    return res;
}

inline SolutionFrame phi_tilde_frame(const PotentialModel& m, cplx z, double x, const IntegratorConfig& cfg = {}) {
    return phi_tilde_frames(m, z, {x}, cfg)[0];
}

// Coefficients (c_theta, c_phi) with theta~ = c_theta theta(., x0) - c_phi phi(., x0).
inline std::pair<cplx, cplx> theta_tilde_coefficients(const SolutionFrame& phi_x0) {
    const cplx d = phi_x0.psi * phi_x0.psi + phi_x0.dpsi * phi_x0.dpsi;
    if (std::abs(d) < 1e-12)
        throw DegeneracyError("theta~: phi~(x0)^2 + phi~'(x0)^2 vanishes; move the reference point x0", std::abs(d));
    return {phi_x0.dpsi / d, phi_x0.psi / d};
}

// theta~ built from phi~ at x0 and the x0-normalized fundamental system; W(theta~, phi~) = 1.
inline std::vector<SolutionFrame> theta_tilde_frames(const PotentialModel& m, cplx z, double x0, const std::vector<double>& xs,
                                                     const IntegratorConfig& cfg = {}) {
    const auto ph0 = phi_tilde_frame(m, z, x0, cfg);
    const auto [ct, cp] = theta_tilde_coefficients(ph0);
    const auto [th, ph] = fundamental_system_interior(m, x0, z, xs, cfg);
    std::vector<SolutionFrame> out;
    for (std::size_t i = 0; i < xs.size(); ++i)
        out.push_back({xs[i], ct * th[i].psi - cp * ph[i].psi, ct * th[i].dpsi - cp * ph[i].dpsi, z, FrameTag::ThetaTilde});
    return out;
}

}  // namespace wtm
