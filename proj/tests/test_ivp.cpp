#include <gtest/gtest.h>

#include "wtm/ivp.hpp"
#include "wtm/models.hpp"

using namespace wtm;

namespace {

std::vector<double> linspace(double a, double b, int n) {
    std::vector<double> v;
    for (int i = 0; i < n; ++i) v.push_back(a + (b - a) * i / (n - 1));
    return v;
}

// Elementary log-derivative of x^{1/2} H^{(1)}_{3/2}(z^{1/2} x).
cplx h32_logderiv(cplx z, double x) {
    const cplx r = sqrt_upper(z);
    const cplx w = r * x;
    const cplx dlnh = -1.0 / (2.0 * w) + I + (-I / (w * w)) / (1.0 + I / w);
    return 1.0 / (2.0 * x) + r * dlnh;
}

}  // namespace

TEST(IntegratorConfig, Validation) {
    EXPECT_NO_THROW(IntegratorConfig{}.validate());
    EXPECT_THROW((IntegratorConfig{1e-15, 1e-13, 0, 1e-12}.validate()), ModelError);
    EXPECT_THROW((IntegratorConfig{1e-11, 0.5, 0, 1e-12}.validate()), ModelError);
    EXPECT_THROW((IntegratorConfig{1e-11, 1e-13, 0, 0.0}.validate()), ModelError);
}

TEST(Regular, FreeDirichletClosedForm) {
    const auto m = catalog("free_halfline");
    const double l = 2.0, r = std::sqrt(l);
    const auto xs = linspace(0.0, 6.0, 25);
    const auto [th, ph] = fundamental_system_regular(m, 0.0, l, xs);
    for (std::size_t i = 0; i < xs.size(); ++i) {
        EXPECT_NEAR(ph[i].psi.real(), std::sin(r * xs[i]) / r, 1e-9);
        EXPECT_NEAR(th[i].psi.real(), std::cos(r * xs[i]), 1e-9);
        EXPECT_NEAR(ph[i].psi.imag(), 0.0, 1e-14);
    }
    EXPECT_EQ(ph[0].psi, cplx(0.0));
    EXPECT_EQ(ph[0].dpsi, cplx(1.0));
}

TEST(Regular, FreeComplexSpectralParameter) {
    const auto m = catalog("free_halfline");
    const auto [th, ph] = fundamental_system_regular(m, 0.0, I, {0.0, 1.0});
    const cplx ref = std::sin(std::exp(I * pi / 4.0)) * std::exp(-I * pi / 4.0);
    EXPECT_LT(std::abs(ph[1].psi - ref), 1e-10);
}

TEST(Regular, InitialDataForAlpha) {
    const auto m = catalog("free_halfline");
    const double a = pi / 3.0;
    const auto [th, ph] = fundamental_system_regular(m, a, cplx(1, 1), {0.0});
    EXPECT_EQ(ph[0].psi, cplx(-std::sin(a)));
    EXPECT_EQ(ph[0].dpsi, cplx(std::cos(a)));
    EXPECT_EQ(th[0].psi, cplx(std::cos(a)));
    EXPECT_EQ(th[0].dpsi, cplx(std::sin(a)));
}

TEST(Regular, WronskianConserved) {
    auto m = catalog("tabulated", {.table_x = {0, 1, 2, 3, 4, 5}, .table_v = {2, 1, -1, 0.5, 0.2, 0}});
    const IntegratorConfig cfg;
    for (cplx z : {cplx(1, 1), cplx(-2, 0.5), cplx(9, 0)}) {
        const auto xs = linspace(0.0, 8.0, 33);
        const auto [th, ph] = fundamental_system_regular(m, 0.7, z, xs, cfg);
        for (std::size_t i = 0; i < xs.size(); ++i)
        {
            // global error on growing solutions sits well above the local tolerance
            const double scale = std::max({1.0, std::abs(th[i].psi * ph[i].dpsi), std::abs(th[i].dpsi * ph[i].psi)});
            EXPECT_LE(std::abs(wronskian(th[i], ph[i]) - 1.0), 1e3 * cfg.rel_tol * scale) << z << " " << xs[i];
        }
    }
}

TEST(Regular, ConjugateSymmetry) {
    const auto m = catalog("tabulated", {.table_x = {0, 1, 2, 3}, .table_v = {1, 2, 0.5, 0}});
    const cplx z(1.5, 0.7);
    const auto xs = linspace(0.0, 4.0, 9);
    const auto a = fundamental_system_regular(m, 0.3, z, xs);
    const auto b = fundamental_system_regular(m, 0.3, std::conj(z), xs);
    for (std::size_t i = 0; i < xs.size(); ++i) EXPECT_LT(std::abs(a.second[i].psi - std::conj(b.second[i].psi)), 1e-12);
}

TEST(Regular, SingularModelIsRejected) {
    EXPECT_THROW(fundamental_system_regular(catalog("bessel"), 0.0, I, {0.1}), SingularEndpointError);
}

TEST(Regular, ToleranceHalvingIsSelfConsistent) {
    const auto m = catalog("tabulated", {.table_x = {0, 1, 2, 3}, .table_v = {1, 2, 0.5, 0}});
    IntegratorConfig c1{1e-8, 1e-10, 0, 1e-13}, c2{5e-9, 5e-11, 0, 1e-13};
    const auto a = fundamental_system_regular(m, 0.0, cplx(3, 0.2), {5.0}, c1);
    const auto b = fundamental_system_regular(m, 0.0, cplx(3, 0.2), {5.0}, c2);
    EXPECT_LT(std::abs(a.second[0].psi - b.second[0].psi), 1e-6);
}

TEST(Interior, InitialData) {
    const auto m = catalog("bessel");
    const auto [th, ph] = fundamental_system_interior(m, 1.0, cplx(2, 1), {1.0});
    EXPECT_EQ(ph[0].psi, cplx(0.0));
    EXPECT_EQ(ph[0].dpsi, cplx(1.0));
    EXPECT_EQ(th[0].psi, cplx(1.0));
    EXPECT_EQ(th[0].dpsi, cplx(0.0));
}

TEST(Interior, FreeLineClosedForms) {
    const auto m = catalog("free_line");
    const cplx z(0.7, 0.4);
    const cplx r = sqrt_upper(z);
    const std::vector<double> xs{-3.0, -1.0, 0.5, 2.0, 4.0};
    const auto [th, ph] = fundamental_system_interior(m, 0.0, z, xs);
    for (std::size_t i = 0; i < xs.size(); ++i) {
        EXPECT_LT(std::abs(th[i].psi - std::cos(r * xs[i])), 1e-9);
        EXPECT_LT(std::abs(ph[i].psi - std::sin(r * xs[i]) / r), 1e-9);
    }
}

TEST(Interior, BesselMatchesClosedFormCombination) {
    const auto m = catalog("bessel", {.gamma = 1.5});
    const auto o = BesselOrder::make(1.5);
    const double x0 = 1.0;
    const cplx z = 4.0;
    // theta(x, x0) = A E_+ + B E_-, fixed by the data (1, 0) at x0.
    const auto ep = entire_bessel_frame(+1, o, z, x0), em = entire_bessel_frame(-1, o, z, x0);
    const cplx det = ep.value * em.deriv - ep.deriv * em.value;
    const cplx A = em.deriv / det, B = -ep.deriv / det;
    const cplx Ap = -em.value / det, Bp = ep.value / det;  // phi: data (0, 1)
    const std::vector<double> xs{0.2, 0.6, 1.5, 3.0};
    const auto [th, ph] = fundamental_system_interior(m, x0, z, xs);
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const cplx e1 = entire_bessel(+1, o, z, xs[i]), e2 = entire_bessel(-1, o, z, xs[i]);
        EXPECT_LT(std::abs(th[i].psi - (A * e1 + B * e2)), 1e-8 * std::max(1.0, std::abs(th[i].psi))) << xs[i];
        EXPECT_LT(std::abs(ph[i].psi - (Ap * e1 + Bp * e2)), 1e-8 * std::max(1.0, std::abs(ph[i].psi))) << xs[i];
        EXPECT_LT(std::abs(wronskian(th[i], ph[i]) - 1.0), 1e-9);
    }
}

TEST(Interior, SingularEndpointGuard) {
    const auto m = catalog("bessel");
    EXPECT_THROW(fundamental_system_interior(m, 1.0, I, {0.5, 0.0}), SingularEndpointError);
    EXPECT_NO_THROW(fundamental_system_interior(m, 1.0, I, {0.5, 1e-3}));
}

TEST(Riccati, FreeIsConstant) {
    const auto m = catalog("free_halfline");
    for (cplx z : {cplx(0, 1), cplx(4, 0.5), cplx(-1, 0.2), cplx(3, -2)}) {
        for (double x : {0.0, 1.0, 5.0}) {
            const cplx v = riccati_logderivative(m, z, x).m;
            const cplx ref = (z.imag() > 0 ? 1.0 : -1.0) * I * sqrt_upper(z);
            EXPECT_LT(std::abs(v - (z.imag() > 0 ? ref : std::conj(I * sqrt_upper(std::conj(z))))), 1e-10) << z;
        }
    }
}

TEST(Riccati, BesselAgainstElementaryHankel) {
    const auto m = catalog("bessel", {.gamma = 1.5});
    for (cplx z : {cplx(0, 1), cplx(2, 0.05), cplx(-3, 1), cplx(20, 0.5)}) {
        for (double x : {0.3, 1.0, 2.0}) {
            const cplx v = riccati_logderivative(m, z, x).m;
            const cplx ref = h32_logderiv(z, x);
            EXPECT_LT(std::abs(v - ref), 1e-8 * std::abs(ref)) << z << " " << x;
        }
    }
}

TEST(Riccati, HerglotzSign) {
    for (const auto& m : {catalog("bessel"), catalog("perturbed_bessel"), catalog("free_halfline")}) {
        const cplx v = riccati_logderivative(m, I, 1.0).m;
        EXPECT_GT(v.imag(), 0.0);
        EXPECT_LT(riccati_logderivative(m, -I, 1.0).m.imag(), 0.0);
    }
}

TEST(Riccati, StartPointIndependence) {
    const auto m = catalog("perturbed_bessel", {.gamma = 1.5, .vtilde = "exp(-x)"});
    const cplx z(1.0, 0.3);
    const cplx a = riccati_logderivative(m, z, 1.0).m;
    RiccatiOptions o;
    o.b = 80.0;
    const cplx b = riccati_logderivative(m, z, 1.0, o).m;
    EXPECT_LT(std::abs(a - b), 1e-8 * std::abs(a));
}

TEST(Riccati, ChartSwapThroughLargeValues) {
    // near the singular endpoint m_+ ~ (1/2 - gamma)/x is large
    const auto m = catalog("bessel", {.gamma = 3.5});
    const cplx z(1.0, 1.0);
    const cplx v = riccati_logderivative(m, z, 0.01).m;
    auto ref_h = [&](double x) {
        const auto h = hankel_combination_frame(BesselOrder::make(3.5), z, x);
        return h.deriv / h.value;
    };
    EXPECT_LT(std::abs(v - ref_h(0.01)), 1e-7 * std::abs(v));
}

TEST(Riccati, RealZOnTheSpectrumIsRejected) {
    EXPECT_THROW(riccati_logderivative(catalog("free_halfline"), 2.0, 1.0), DomainError);
    EXPECT_THROW(riccati_logderivative(catalog("free_halfline"), 0.0, 1.0), DomainError);
}

TEST(Riccati, NegativeRealZ) {
    // psi_+ = e^{-x}
    EXPECT_NEAR(std::abs(riccati_logderivative(catalog("free_halfline"), -1.0, 1.0).m + 1.0), 0.0, 1e-10);
    const cplx v = riccati_logderivative(catalog("bessel"), -1.0, 1.0).m;
    EXPECT_LT(std::abs(v - h32_logderiv(-1.0, 1.0)), 1e-9);
}

TEST(Riccati, LeftPathOnFreeLine) {
    const auto m = catalog("free_line");
    const cplx z(2, 1);
    const auto v = riccati_path_left(m, z, {-1.0, 0.0, 2.0});
    for (const auto& x : v) EXPECT_LT(std::abs(x + I * sqrt_upper(z)), 1e-10);
}

TEST(WeylPlus, FreeExponential) {
    const auto m = catalog("free_halfline");
    const cplx z(1, 1);
    const auto xs = linspace(0.0, 5.0, 11);
    const auto f = weyl_plus_frames(m, z, xs);
    for (std::size_t i = 0; i < xs.size(); ++i)
        EXPECT_LT(std::abs(f[i].psi - std::exp(I * sqrt_upper(z) * xs[i])), 1e-9);
}
