#include <gtest/gtest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "wtm/models.hpp"
#include "wtm/singular.hpp"

using namespace wtm;

namespace {

const RealFn zero = [](double) { return 0.0; };
const RealFn expm = [](double x) { return std::exp(-x); };

double rel(cplx a, cplx b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

FactorizedPotential bessel_factor(double gamma, double x0 = 1.0) {
    FactorizedPotential fp;
    fp.f = [gamma](double x) { return std::sqrt(x / gamma); };
    fp.df = [gamma](double x) { return 0.5 / std::sqrt(x * gamma); };
    fp.ddf = [gamma](double x) { return -0.25 / (std::sqrt(gamma) * std::pow(x, 1.5)); };
    fp.vtilde = zero;
    fp.x0 = x0;
    fp.inv_f2 = [gamma, x0](double x) { return gamma * std::log(x0 / x); };
    return fp;
}

}  // namespace

TEST(Volterra, UnperturbedAtZeroIsThePurePower) {
    for (double x : {0.01, 0.5, 1.0, 3.0}) {
        const auto v = volterra_phi_tilde(1.5, zero, 0.0, x);
        EXPECT_EQ(v.value, cplx(std::pow(x, 2.0)));
        EXPECT_NEAR(std::abs(v.deriv - 2.0 * x), 0.0, 1e-14 * x);
    }
}

TEST(Volterra, UnperturbedMatchesScaledEntireBessel) {
    for (double g : {1.0, 1.5, 2.0, 2.5, 3.25}) {
        const auto o = BesselOrder::make(g);
        const double c = std::pow(2.0, g) * std::tgamma(1.0 + g);
        for (cplx z : {cplx(1, 0), cplx(-1, 0), cplx(2, 0.1), cplx(0, 1), cplx(-3, -2)}) {
            const std::vector<double> xs{0.1, 0.5, 1.0, 2.0};
            const auto sol = volterra_phi_tilde(g, zero, z, xs);
            for (std::size_t i = 0; i < xs.size(); ++i) {
                const auto ref = entire_bessel_frame(+1, o, z, xs[i]);
                EXPECT_LT(rel(sol.values[i].value, c * ref.value), 1e-11) << g << z << xs[i];
                EXPECT_LT(rel(sol.values[i].deriv, c * ref.deriv), 1e-11) << g << z << xs[i];
            }
        }
    }
}

TEST(Volterra, EveryTermObeysTheEnvelope) {
    const auto sol = volterra_phi_tilde(1.5, expm, 1.0, {0.5, 1.0});
    // independent Q(1) = (1/gamma) int_0^1 t |e^{-t} - 1| dt = (1/gamma)(1/2 - 1 + 2/e)
    const double q1 = (0.5 - 1.0 + 2.0 / std::exp(1.0)) / 1.5;
    EXPECT_NEAR(sol.series.envelope_q[1], q1, 1e-12);
    for (std::size_t t = 0; t < 2; ++t) {
        const double x = t ? 1.0 : 0.5;
        const double Q = sol.series.envelope_q[t];
        double fact = 1.0;
        for (std::size_t k = 0; k < sol.series.term_abs[t].size(); ++k) {
            if (k) fact *= static_cast<double>(k);
            EXPECT_LE(sol.series.term_abs[t][k], std::pow(x, 2.0) * std::pow(Q, k) / fact * (1 + 1e-12)) << k;
        }
    }
    EXPECT_GT(sol.series.terms_used, 3);
    EXPECT_LE(sol.series.bound_value, 1e-14);
}

TEST(Volterra, ConjugateSymmetryAndRealOnAxis) {
    const cplx z(2.0, 0.7);
    const auto a = volterra_phi_tilde(1.5, expm, z, 1.3);
    const auto b = volterra_phi_tilde(1.5, expm, std::conj(z), 1.3);
    EXPECT_LT(std::abs(a.value - std::conj(b.value)), 1e-14 * std::abs(a.value));
    EXPECT_EQ(volterra_phi_tilde(1.5, expm, 2.0, 1.3).value.imag(), 0.0);
}

TEST(Volterra, CauchyRiemannSampling) {
    // entire in z: the difference quotients along 1 and i agree
    const cplx z(0.8, 0.3);
    const double h = 1e-5;
    auto f = [&](cplx w) { return volterra_phi_tilde(2.5, expm, w, 1.1).value; };
    const cplx dx = (f(z + h) - f(z - h)) / (2 * h);
    const cplx dy = (f(z + I * h) - f(z - I * h)) / (2 * h * I);
    EXPECT_LT(std::abs(dx - dy), 1e-7 * std::abs(dx));
}

TEST(Volterra, UnreachableToleranceRaises) {
    try {
        volterra_phi_tilde(1.5, zero, cplx(200.0, 1.0), 3.0);
        FAIL() << "expected a convergence error";
    } catch (const ConvergenceError& e) {
        EXPECT_GT(e.achieved(), 1e-14);
    }
}

TEST(Volterra, InputValidation) {
    EXPECT_THROW(volterra_phi_tilde(0.5, zero, I, 1.0), ModelError);
    EXPECT_THROW(volterra_phi_tilde(1.5, zero, I, -1.0), DomainError);
    EXPECT_THROW(volterra_phi_tilde(1.5, zero, I, std::vector<double>{2.0, 1.0}), ModelError);
}

TEST(PhiTilde, BesselModelMatchesClosedFormPastTheSwitch) {
    for (double g : {1.5, 2.0}) {
        const auto m = catalog("bessel", {.gamma = g});
        for (cplx z : {cplx(10, 1), cplx(-1, 0.05), cplx(0.5, -0.2)}) {
            const std::vector<double> xs{0.2, 1.0, 4.0, 9.0};
            const auto fr = phi_tilde_frames(m, z, xs);
            for (std::size_t i = 0; i < xs.size(); ++i) {
                const auto ref = m.oracle.phi_closed(z, xs[i]);
                EXPECT_LT(rel(fr[i].psi, ref.value), 1e-8) << g << z << xs[i];
                EXPECT_LT(rel(fr[i].dpsi, ref.deriv), 1e-8) << g << z << xs[i];
            }
        }
    }
}

TEST(PhiTilde, RegularModelIsRejected) {
    EXPECT_THROW(phi_tilde_frames(catalog("free_halfline"), I, {1.0}), ModelError);
}

TEST(PhiTilde, SquareIntegrableNearZero) {
    const auto m = catalog("perturbed_bessel", {.gamma = 1.5, .vtilde = "exp(-x)"});
    auto l2 = [&](int n) {
        std::vector<double> xs;
        for (int i = 1; i <= n; ++i) xs.push_back(static_cast<double>(i) / n);
        const auto fr = phi_tilde_frames(m, I, xs);
        double s = 0.0;  // trapezoid, phi~(0) = 0
        for (int i = 0; i < n; ++i) s += 0.5 / n * (std::norm(fr[i].psi) + (i ? std::norm(fr[i - 1].psi) : 0.0));
        return s;
    };
    const double a = l2(200), b = l2(400);
    EXPECT_TRUE(std::isfinite(a));
    EXPECT_LT(std::abs(a - b), 1e-4 * b);
}

TEST(ThetaTilde, WronskianIsOne) {
    const auto m = catalog("bessel", {.gamma = 1.5});
    for (cplx z : {cplx(-1, 0), cplx(0, 1), cplx(2, 0.1)}) {
        const std::vector<double> xs{0.3, 1.0, 2.5};
        const auto th = theta_tilde_frames(m, z, 1.0, xs);
        const auto ph = phi_tilde_frames(m, z, xs);
        for (std::size_t i = 0; i < xs.size(); ++i) EXPECT_LT(std::abs(wronskian(th[i], ph[i]) - 1.0), 1e-8) << z << xs[i];
    }
}

TEST(ThetaTilde, RealForRealZ) {
    const auto m = catalog("perturbed_bessel", {.gamma = 1.5, .vtilde = "exp(-x)"});
    const auto th = theta_tilde_frames(m, 2.0, 1.0, {0.5, 2.0});
    for (const auto& f : th) {
        EXPECT_EQ(f.psi.imag(), 0.0);
        EXPECT_EQ(f.dpsi.imag(), 0.0);
    }
}

TEST(ThetaTilde, DiffersFromClosedThetaByMultipleOfPhi) {
    const auto m = catalog("bessel", {.gamma = 1.5});
    const cplx z(2, 0.1);
    const std::vector<double> xs{0.4, 1.0, 1.7, 3.0};
    const auto th = theta_tilde_frames(m, z, 1.0, xs);
    const auto ph = phi_tilde_frames(m, z, xs);
    const cplx k = (th[0].psi - m.oracle.theta_closed(z, xs[0]).value) / ph[0].psi;
    for (std::size_t i = 1; i < xs.size(); ++i) {
        const cplx d = th[i].psi - m.oracle.theta_closed(z, xs[i]).value;
        EXPECT_LT(std::abs(d - k * ph[i].psi), 1e-8 * std::max(1.0, std::abs(d)));
    }
}

TEST(ThetaTilde, DegenerateReferencePoint) {
    SolutionFrame f{1.0, cplx(1.0), I, cplx(1.0), FrameTag::PhiTilde};
    EXPECT_THROW(theta_tilde_coefficients(f), DegeneracyError);
}

TEST(Eta, BesselFactorRecoversInverseSquare) {
    const double g = 1.5;
    const auto fp = bessel_factor(g);
    for (double x : {0.2, 1.0, 3.0}) {
        const double f = fp.f(x);
        EXPECT_NEAR(fp.ddf(x) / f + 1.0 / std::pow(f, 4), (g * g - 0.25) / (x * x), 1e-12 / (x * x));
    }
}

TEST(Eta, WronskianAndResidual) {
    const auto m = make_inverse_power(3.0);
    const auto& fp = *m.factorized;
    for (double x : {0.1, 1.0, 2.0}) {
        const auto e = eta_pair(fp, x);
        EXPECT_NEAR(std::abs(e.plus.value * e.minus.deriv - e.plus.deriv * e.minus.value - 1.0), 0.0, 1e-12);
        // -eta'' + (f''/f + f^-4) eta = 0 by central differences
        const double h = 1e-4 * x;
        const double em = eta_pair(fp, x - h).minus.value.real(), ep = eta_pair(fp, x + h).minus.value.real();
        const double e0 = e.minus.value.real();
        const double d2 = (ep - 2 * e0 + em) / (h * h);
        const double pot = fp.ddf(x) / fp.f(x) + std::pow(fp.f(x), -4);
        EXPECT_LT(std::abs(-d2 + pot * e0), 1e-6 * std::abs(pot * e0)) << x;
    }
}

TEST(Eta, OverflowGuard) {
    const auto m = make_inverse_power(3.0);
    EXPECT_THROW(eta_pair(*m.factorized, 1e-6), ConvergenceError);
    EXPECT_THROW(eta_pair(*m.factorized, 0.0), DomainError);
}

TEST(Eta, QuadratureFallbackMatchesClosedForm) {
    const auto closed = *make_inverse_power(3.0).factorized;
    auto fp = closed;
    fp.inv_f2 = nullptr;
    for (double x : {0.05, 0.7, 1.0, 4.0}) {
        const auto a = eta_pair(closed, x), b = eta_pair(fp, x);
        EXPECT_NEAR(a.ihat, b.ihat, 1e-11 * std::max(1.0, std::abs(a.ihat)));
    }
}

TEST(FactorizedVolterra, FreeZeroIsEtaMinus) {
    const auto fp = bessel_factor(1.5);
    for (double x : {0.3, 1.0, 2.0}) {
        const auto v = factorized_phi_tilde(fp, 0.0, {x}).values[0];
        const auto e = eta_pair(fp, x).minus;
        EXPECT_EQ(v.value, e.value);
        EXPECT_EQ(v.deriv, e.deriv);
    }
}

TEST(FactorizedVolterra, BesselFactorMatchesVolterraUpToConstant) {
    const double g = 1.5;
    const auto fp = bessel_factor(g);
    const std::vector<double> xs{0.2, 0.8, 1.5};
    const auto ref = volterra_phi_tilde(g, zero, cplx(1, 0.5), xs);
    const auto got = factorized_phi_tilde(fp, cplx(1, 0.5), xs);
    const cplx c = got.values[0].value / ref.values[0].value;
    // eta_- = (x/gamma)^{1/2} (x/x0)^gamma / sqrt 2
    EXPECT_LT(rel(c, 1.0 / std::sqrt(2.0 * g)), 1e-9);
    for (cplx z : {cplx(1, 0.5), cplx(-2, 0.1), cplx(3, -1)}) {
        const auto r = volterra_phi_tilde(g, zero, z, xs);
        const auto s = factorized_phi_tilde(fp, z, xs);
        for (std::size_t i = 0; i < xs.size(); ++i) {
            EXPECT_LT(rel(s.values[i].value, c * r.values[i].value), 1e-9) << z << xs[i];
            EXPECT_LT(rel(s.values[i].deriv, c * r.values[i].deriv), 1e-9) << z << xs[i];
        }
    }
}

TEST(FactorizedVolterra, InversePowerIsSquareIntegrableNearZero) {
    const auto m = make_inverse_power(3.0);
    auto l2 = [&](int n) {
        // geometric grid toward 0, trapezoid in log x
        std::vector<double> xs;
        for (int i = n; i >= 0; --i) xs.push_back(std::pow(10.0, -4.0 * i / n));  // eta overflow guard below ~1e-5
        const auto fr = phi_tilde_frames(m, I, xs);
        double s = 0.0;
        for (std::size_t i = 1; i < xs.size(); ++i)
            s += 0.5 * (xs[i] - xs[i - 1]) * (std::norm(fr[i].psi) + std::norm(fr[i - 1].psi));
        return s;
    };
    const double a = l2(300), b = l2(600);
    EXPECT_TRUE(std::isfinite(a));
    EXPECT_GT(a, 0.0);
    EXPECT_LT(std::abs(a - b), 1e-3 * b);  // second-order trapezoid
}

TEST(FactorizedVolterra, SolvesTheEquation) {
    // the series values at two points are joined by the ODE
    const auto m = make_inverse_power(3.0);
    const cplx z(1.5, 0.4);
    const auto s = factorized_phi_tilde(*m.factorized, z, {0.3, 0.9});
    const auto y = propagate(m.V, z, 0.3, {s.values[0].value, s.values[0].deriv}, {0.9});
    EXPECT_LT(rel(y[0][0], s.values[1].value), 1e-8);
    EXPECT_LT(rel(y[0][1], s.values[1].deriv), 1e-8);
}

TEST(FactorizedVolterra, EntireAndConjugateSymmetric) {
    const auto fp = *make_inverse_power(3.0).factorized;
    const cplx z(0.7, 0.6);
    auto f = [&](cplx w) { return factorized_phi_tilde(fp, w, {0.8}).values[0].value; };
    EXPECT_LT(std::abs(f(z) - std::conj(f(std::conj(z)))), 1e-13 * std::abs(f(z)));
    const double h = 1e-5;
    const cplx dx = (f(z + h) - f(z - h)) / (2 * h), dy = (f(z + I * h) - f(z - I * h)) / (2 * h * I);
    EXPECT_LT(std::abs(dx - dy), 1e-7 * std::abs(dx));
}

TEST(FactorizedVolterra, EnvelopeHolds) {
    const auto fp = *make_inverse_power(3.0).factorized;
    const auto sol = factorized_phi_tilde(fp, cplx(1, 1), {1.0});
    const double Q = sol.series.envelope_q[0];
    double fact = 1.0;
    for (std::size_t k = 0; k < sol.series.term_abs[0].size(); ++k) {
        if (k) fact *= static_cast<double>(k);
        EXPECT_LE(sol.series.term_abs[0][k], sol.series.term_abs[0][0] * std::pow(Q, k) / fact * (1 + 1e-9)) << k;
    }
}
