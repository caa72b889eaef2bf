#include <gtest/gtest.h>

#include "wtm/herglotz.hpp"
#include "wtm/mfunctions.hpp"
#include "wtm/models.hpp"

using namespace wtm;

namespace {

// square root with the cut on [0, inf), arg z in (0, 2 pi)
cplx cut_sqrt(cplx z) {
    double a = std::atan2(z.imag(), z.real());
    if (a <= 0.0) a += 2.0 * pi;
    return std::sqrt(std::abs(z)) * std::exp(0.5 * I * a);
}
cplx isqrt(cplx z) { return I * cut_sqrt(z); }
cplx atom2(cplx z) { return 1.0 / (2.0 - z); }

// z^{3/2} with arg in (0, 2 pi): the non-Herglotz order-3/2 m~ written out by hand
cplx bessel15(cplx z) {
    double a = std::atan2(z.imag(), z.real());
    if (a <= 0.0) a += 2.0 * pi;
    const cplx zg = std::pow(std::abs(z), 1.5) * std::exp(1.5 * I * a);
    return -(2.0 / pi) * std::sin(1.5 * pi) * std::exp(-1.5 * I * pi) * zg;
}

// rotated free half-line m at alpha = pi/4
cplx free_quarter(cplx z) {
    const cplx s = isqrt(z);
    return (s - 1.0) / (1.0 + s);
}

}  // namespace

TEST(Richardson, ExactForPolynomials) {
    const std::vector<double> e{0.4, 0.2, 0.1, 0.05};
    std::vector<double> v;
    for (double x : e) v.push_back(3.0 - 2.0 * x + 5.0 * x * x - x * x * x);
    const auto r = richardson(e, v);
    EXPECT_NEAR(r.value, 3.0, 1e-12);
    EXPECT_TRUE(r.converged);
    EXPECT_THROW(richardson(e, {1.0}), ModelError);
}

TEST(Richardson, FlagsOscillation) {
    const std::vector<double> e{0.4, 0.2, 0.1, 0.05};
    EXPECT_FALSE(richardson(e, {1.0, 1.1, 0.9, 1.3}).converged);
}

TEST(Stieltjes, SquareRootOnUnitInterval) {
    // the sqrt branch point at 0 leaves an eps^{3/2} remainder the polynomial fit cannot remove
    const auto r = stieltjes_inversion(isqrt, 0.0, 1.0);
    EXPECT_NEAR(r.value, 2.0 / (3.0 * pi), 1e-5);
    EXPECT_TRUE(r.converged);
    EXPECT_FALSE(r.nudged);
}

TEST(Stieltjes, InteriorAtom) {
    const auto r = stieltjes_inversion(atom2, 1.0, 3.0);
    EXPECT_NEAR(r.value, 1.0, 1e-6);
}

TEST(Stieltjes, EndpointAtomHalfOpen) {
    // (1, 2] contains the atom, (2, 3] does not
    const auto a = stieltjes_inversion(atom2, 1.0, 2.0);
    const auto b = stieltjes_inversion(atom2, 2.0, 3.0);
    EXPECT_TRUE(a.nudged);
    EXPECT_TRUE(b.nudged);
    EXPECT_NEAR(a.value, 1.0, 1e-3);
    EXPECT_NEAR(b.value, 0.0, 1e-3);
}

TEST(Stieltjes, BesselTilde) {
    const auto r = stieltjes_inversion(bessel15, 0.0, 1.0);
    EXPECT_NEAR(r.value, (2.0 / (pi * pi)) / 2.5, 1e-6);
}

TEST(Stieltjes, NumericBesselTildeMatchesClosedForm) {
    const auto model = catalog("bessel");
    auto f = [&](cplx z) { return singular_m_tilde(model, z).value; };
    InversionOptions o;
    o.smooth = true;
    o.rel_tol = 1e-7;
    const auto r = stieltjes_inversion(f, 0.5, 1.0, o);
    EXPECT_NEAR(r.value, (2.0 / (pi * pi)) * (1.0 - std::pow(0.5, 2.5)) / 2.5, 1e-5);
}

TEST(Stieltjes, RejectsBadInput) {
    EXPECT_THROW(stieltjes_inversion(isqrt, 1.0, 1.0), ModelError);
    InversionOptions o;
    o.schedule = {1e-3, 1e-2};
    EXPECT_THROW(stieltjes_inversion(isqrt, 0.0, 1.0, o), ModelError);
}

TEST(Density, SquareRoot) {
    EXPECT_NEAR(ac_density(isqrt, 4.0).value, 2.0 / pi, 1e-8);
    EXPECT_NEAR(ac_density(isqrt, -1.0).value, 0.0, 1e-10);
}

TEST(Density, Bessel) {
    EXPECT_NEAR(ac_density(bessel15, 1.0).value, 2.0 / (pi * pi), 1e-8);
    EXPECT_EQ(ac_density(bessel15, -2.0).value, 0.0);
    EXPECT_NEAR(2.0 / (pi * pi), 0.2026424, 1e-7);
}

TEST(Density, PoleIsSignalled) { EXPECT_THROW(ac_density(atom2, 2.0), PoleSignal); }

TEST(PointMass, Atom) {
    const auto p = point_mass(atom2, 2.0);
    EXPECT_NEAR(p.mass, 1.0, 1e-10);
    EXPECT_NEAR(p.eps_re_limit, 0.0, 1e-10);
}

TEST(PointMass, ContinuousPointHasNone) { EXPECT_NEAR(point_mass(isqrt, 1.0).mass, 0.0, 1e-10); }

TEST(PointMass, FreeQuarterRotationEigenvalue) {
    // phi = -e^{-x}/sqrt 2 has squared norm 1/4
    EXPECT_NEAR(point_mass(free_quarter, -1.0).mass, 4.0, 1e-8);
    const auto model = catalog("free_halfline");
    auto f = [&](cplx z) { return halfline_m(model, pi / 4, z).value; };
    EXPECT_NEAR(point_mass(f, -1.0).mass, 4.0, 1e-6);
}

TEST(Representation, SquareRoot) {
    HerglotzRepresentation rep;
    rep.c = -std::sqrt(2.0) / 2.0;
    for (int i = 0; i <= 4000; ++i) {
        const double l = 400.0 * std::pow(i / 4000.0, 2);
        rep.measure.grid.push_back(l);
        rep.measure.density.push_back(std::sqrt(l) / pi);
    }
    const auto r = representation_residual(isqrt, rep, {I, cplx(2, 1), cplx(-3, 0.5), cplx(0.5, 4)});
    EXPECT_LE(r.max_residual, 1e-4);
    EXPECT_FALSE(r.tail_dominated);
}

TEST(Representation, PureAtom) {
    HerglotzRepresentation rep;
    rep.c = 2.0 / 5.0;  // Re of the atom term at z = i is -2/5, c cancels it
    rep.measure.atoms.push_back({2.0, 1.0});
    const auto r = representation_residual(atom2, rep, {I, cplx(1, 3), cplx(-4, 0.1)});
    EXPECT_LE(r.max_residual, 1e-12);
}

TEST(Representation, Constant) {
    HerglotzRepresentation rep;
    rep.c = 1.5;
    const auto r = representation_residual([](cplx) { return cplx(1.5); }, rep, {I, cplx(3, 2)});
    EXPECT_EQ(r.max_residual, 0.0);
}

TEST(Representation, ShortWindowIsFlagged) {
    HerglotzRepresentation rep;
    rep.measure.grid = {0.0, 1.0, 2.0};
    rep.measure.density = {0.0, 1.0 / pi, std::sqrt(2.0) / pi};
    EXPECT_TRUE(representation_residual(isqrt, rep, {cplx(10, 1)}).tail_dominated);
}

TEST(Representation, RejectsInvalidMeasure) {
    HerglotzRepresentation rep;
    rep.measure.grid = {0.0, 1.0};
    rep.measure.density = {0.0, -1.0};
    EXPECT_THROW(representation_residual(isqrt, rep, {I}), ModelError);
    rep.measure.density = {0.0, 1.0};
    rep.d = -1.0;
    EXPECT_THROW(representation_residual(isqrt, rep, {I}), ModelError);
}

TEST(Properties, SquareRootPasses) {
    const auto r = property_report(isqrt, 1.0, 4.0);
    EXPECT_LE(r.conjugate_symmetry, 1e-12);
    EXPECT_LE(r.max_eps_re_limit, 1e-10);
    EXPECT_GE(r.min_eps_re_order, 0.95);  // eps Re m is O(eps^2) here
    EXPECT_NEAR(r.min_eps_im_limit, 0.0, 1e-10);
    EXPECT_TRUE(r.measure_nondecreasing);
    EXPECT_NEAR(r.accumulated.back(), 2.0 / (3.0 * pi) * (8.0 - 1.0), 1e-6);
    EXPECT_EQ(r.profile, SignProfile::Herglotz);
}

TEST(Properties, BesselTildeIsNotHerglotz) {
    const auto model = catalog("bessel");
    auto f = [&](cplx z) { return singular_m_tilde(model, z).value; };
    PropertyOptions o;
    o.lambda_points = 6;
    o.subintervals = 6;
    o.inversion.smooth = true;
    o.inversion.rel_tol = 1e-7;
    const auto r = property_report(f, 0.5, 2.0, o);
    EXPECT_LE(r.conjugate_symmetry, 1e-10);
    EXPECT_TRUE(r.measure_nondecreasing);
    EXPECT_LE(r.max_eps_re_limit, 1e-6);
    EXPECT_NE(r.profile, SignProfile::Herglotz);
    EXPECT_GT(r.upper_half_plane_violations, 0);
}

TEST(Properties, AntiHerglotzMinus) {
    const auto model = catalog("free_line");
    auto f = [&](cplx z) { return interior_m_pm(model, 0.0, z).first.value; };
    PropertyOptions o;
    o.lambda_points = 4;
    o.subintervals = 2;
    o.inversion.smooth = true;
    o.inversion.rel_tol = 1e-6;
    const auto r = property_report(f, 1.0, 2.0, o);
    EXPECT_EQ(r.profile, SignProfile::AntiHerglotz);
    EXPECT_FALSE(r.measure_nondecreasing);
}

TEST(MatrixMeasure, FreeLineIsPositive) {
    // free line at x0 = 0: m_- = -i sqrt z, m_+ = i sqrt z
    std::array<Sampler, 3> e{[](cplx z) { return 1.0 / (-2.0 * isqrt(z)); }, [](cplx) { return cplx(0.0); },
                             [](cplx z) { return -isqrt(z) * isqrt(z) / (-2.0 * isqrt(z)); }};
    const auto w = matrix_stieltjes(e, 0.5, 2.0);
    // d Omega = diag(1/(2 pi sqrt l), sqrt l/(2 pi)) dl
    EXPECT_NEAR(w[0], (std::sqrt(2.0) - std::sqrt(0.5)) / pi, 1e-6);
    EXPECT_NEAR(w[2], (std::pow(2.0, 1.5) - std::pow(0.5, 1.5)) / (3.0 * pi), 1e-6);
    EXPECT_TRUE(is_psd(w));
    EXPECT_FALSE(is_psd({1.0, 2.0, 1.0}));
}
