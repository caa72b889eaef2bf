#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

namespace {

struct Run {
    int code;
    std::string out;
};

Run run(const std::string& args) {
    const std::string cmd = std::string(WTM_CLI_PATH) + " " + args + " 2>/dev/null";
    FILE* p = popen(cmd.c_str(), "r");
    if (!p) return {-1, {}};
    std::string out;
    char buf[4096];
    for (std::size_t n; (n = std::fread(buf, 1, sizeof buf, p)) > 0;) out.append(buf, n);
    const int st = pclose(p);
    return {WIFEXITED(st) ? WEXITSTATUS(st) : -1, out};
}

std::vector<std::vector<std::string>> csv(const std::string& s) {
    std::vector<std::vector<std::string>> rows;
    std::stringstream ss(s);
    for (std::string line; std::getline(ss, line);) {
        std::vector<std::string> r;
        std::stringstream ls(line);
        for (std::string c; std::getline(ls, c, ',');) r.push_back(c);
        rows.push_back(r);
    }
    return rows;
}

double num(const std::string& s) { return std::stod(s); }

}  // namespace

TEST(Cli, FreeHalfLineMatchesISqrtZ) {
    auto r = run("mfun --model free_halfline --alpha 0 --z 0+1i");
    ASSERT_EQ(r.code, 0);
    auto t = csv(r.out);
    ASSERT_EQ(t.size(), 2u);
    EXPECT_EQ(t[0], (std::vector<std::string>{"re_z", "im_z", "re_m", "im_m", "err"}));
    // i sqrt(i) = (-1 + i)/sqrt 2
    EXPECT_NEAR(num(t[1][2]), -std::numbers::sqrt2 / 2, 1e-9);
    EXPECT_NEAR(num(t[1][3]), std::numbers::sqrt2 / 2, 1e-9);
}

TEST(Cli, BesselTildeOnNegativeAxis) {
    // gamma = 3/2, C = 1: m~(-1) = -(2/pi) sin(3pi/2) e^{-3i pi/2} (-1)^{3/2} = 2/pi
    auto r = run("mfun --model bessel --gamma 1.5 --kind tilde --z -1+0i");
    ASSERT_EQ(r.code, 0);
    auto t = csv(r.out);
    ASSERT_EQ(t.size(), 2u);
    EXPECT_NEAR(num(t[1][2]), 2 / std::numbers::pi, 1e-8);
    EXPECT_NEAR(num(t[1][3]), 0.0, 1e-8);
}

TEST(Cli, EmptyGridGivesHeaderOnly) {
    auto r = run("mfun --model free_halfline --z-grid 1+1i:2+2i:0");
    EXPECT_EQ(r.code, 0);
    EXPECT_EQ(r.out, "re_z,im_z,re_m,im_m,err\n");
}

TEST(Cli, GridIsRectangularRealOuter) {
    auto r = run("mfun --model free_halfline --z-grid 1+1i:2+3i:3");
    ASSERT_EQ(r.code, 0);
    auto t = csv(r.out);
    ASSERT_EQ(t.size(), 10u);
    EXPECT_EQ(num(t[1][0]), 1.0);
    EXPECT_EQ(num(t[2][1]), 2.0);
    EXPECT_EQ(num(t[4][0]), 1.5);
}

TEST(Cli, JsonComplexObjects) {
    auto r = run("mfun --model free_halfline --z 0+1i --format json");
    ASSERT_EQ(r.code, 0);
    auto j = nlohmann::json::parse(r.out);
    ASSERT_EQ(j.size(), 1u);
    EXPECT_NEAR(j[0]["m"]["re"].get<double>(), -std::numbers::sqrt2 / 2, 1e-9);
    EXPECT_EQ(j[0]["z"]["im"].get<double>(), 1.0);
    EXPECT_TRUE(j[0].contains("err"));
}

TEST(Cli, BesselDensityMatchesClosedForm) {
    auto r = run("density --model bessel --gamma 1.5 --lmin 0.5 --lmax 2 --n 3");
    ASSERT_EQ(r.code, 0);
    auto t = csv(r.out);
    ASSERT_EQ(t.size(), 4u);
    for (std::size_t i = 1; i < t.size(); ++i) {
        const double l = num(t[i][0]);
        EXPECT_NEAR(num(t[i][1]), 2 / (std::numbers::pi * std::numbers::pi) * std::pow(l, 1.5), 1e-6) << l;
    }
}

TEST(Cli, DensityAtEigenvalueIsNumericalError) {
    auto r = run("density --model free_halfline --alpha 0.7853981633974483 --lmin -1 --lmax -1 --n 1");
    EXPECT_EQ(r.code, 3);
}

TEST(Cli, MatrixDensityIsRankOneOnHalfLineSpectrum) {
    auto r = run("density --model bessel --matrix --x0 1 --lmin 0.5 --lmax 2 --n 3");
    ASSERT_EQ(r.code, 0);
    auto t = csv(r.out);
    ASSERT_EQ(t[0].size(), 5u);
    for (std::size_t i = 1; i < t.size(); ++i) {
        EXPECT_GT(num(t[i][1]), 0.0);
        EXPECT_NEAR(num(t[i][4]), 0.0, 1e-9);
    }
}

TEST(Cli, TransformOfExponential) {
    // Dirichlet free half-line: int e^{-x} sin(kx)/k dx = 1/(1 + lambda)
    auto r = run("transform --model free_halfline --h 'exp(-x)' --support 0:40 --lmin 0.5 --lmax 3 --n 3");
    ASSERT_EQ(r.code, 0);
    auto t = csv(r.out);
    ASSERT_EQ(t.size(), 4u);
    for (std::size_t i = 1; i < t.size(); ++i) EXPECT_NEAR(num(t[i][1]), 1 / (1 + num(t[i][0])), 1e-8);
}

TEST(Cli, GreenFunctionFreeHalfLine) {
    // G = sin(k x<) e^{i k x>} / k with k = sqrt z, Im k > 0
    auto r = run("green --model free_halfline --z 0+1i --x 0.5 --xp 1");
    ASSERT_EQ(r.code, 0);
    auto t = csv(r.out);
    const std::complex<double> k = std::sqrt(std::complex<double>(0, 1));
    const auto g = std::sin(k * 0.5) * std::exp(std::complex<double>(0, 1) * k * 1.0) / k;
    EXPECT_NEAR(num(t[1][2]), g.real(), 1e-9);
    EXPECT_NEAR(num(t[1][3]), g.imag(), 1e-9);
}

TEST(Cli, ResolventColumnsAndOutFile) {
    const auto path = std::filesystem::temp_directory_path() / "wtm_cli_resolvent.csv";
    auto r = run("resolvent --model bessel --z 1+0.5i --f 'exp(-x)' --support 0.5:3 --x-grid 1:2:3 --out " + path.string());
    ASSERT_EQ(r.code, 0);
    EXPECT_TRUE(r.out.empty());
    std::ifstream f(path);
    std::stringstream ss;
    ss << f.rdbuf();
    auto t = csv(ss.str());
    ASSERT_EQ(t.size(), 4u);
    EXPECT_EQ(t[0], (std::vector<std::string>{"x", "re_u", "im_u"}));
    std::filesystem::remove(path);
}

TEST(Cli, ModelFile) {
    const auto path = std::filesystem::temp_directory_path() / "wtm_cli_model.txt";
    std::ofstream(path) << "family = bessel\ngamma = 1.5\nC = 1\n";
    auto r = run("mfun --model-file " + path.string() + " --z -1+0i");
    EXPECT_EQ(r.code, 0);
    auto t = csv(r.out);
    ASSERT_EQ(t.size(), 2u);
    EXPECT_NEAR(num(t[1][2]), 2 / std::numbers::pi, 1e-8);
    std::filesystem::remove(path);
}

TEST(Cli, VerifyRegularSuitePasses) {
    auto r = run("verify --suite regular");
    EXPECT_EQ(r.code, 0);
    auto t = csv(r.out);
    ASSERT_EQ(t.size(), 4u);
    EXPECT_EQ(t[0], (std::vector<std::string>{"name", "measured", "expected", "tolerance", "status"}));
    for (std::size_t i = 1; i < t.size(); ++i) EXPECT_EQ(t[i].back(), "pass");
}

TEST(Cli, VerifyFailureExitsOne) {
    EXPECT_EQ(run("verify --suite as-stated").code, 1);
}

TEST(Cli, UsageErrorsExitTwo) {
    EXPECT_EQ(run("verify --suite nope").code, 2);
    EXPECT_EQ(run("mfun --z 1+1i").code, 2);
    EXPECT_EQ(run("mfun --model free_halfline --model-file x --z 1+1i").code, 2);
    EXPECT_EQ(run("mfun --model nosuch --z 1+1i").code, 2);
    EXPECT_EQ(run("mfun --model free_halfline --z 1+xi").code, 2);
    EXPECT_EQ(run("mfun --model free_halfline --z 1+1i --format xml").code, 2);
    EXPECT_EQ(run("mfun --model free_halfline --z 1+1i --rtol 1").code, 2);
    EXPECT_EQ(run("nosuchcommand").code, 2);
    EXPECT_EQ(run("").code, 2);
}

TEST(Cli, HelpExitsZero) {
    EXPECT_EQ(run("--help").code, 0);
    EXPECT_EQ(run("transform --help").code, 0);
}

TEST(Cli, ImaginaryOnlyZ) {
    auto r = run("mfun --model free_halfline --z 4i");
    ASSERT_EQ(r.code, 0);
    auto t = csv(r.out);
    EXPECT_EQ(num(t[1][0]), 0.0);
    EXPECT_EQ(num(t[1][1]), 4.0);
    // i sqrt(4i) = sqrt 2 (-1 + i)
    EXPECT_NEAR(num(t[1][2]), -std::numbers::sqrt2, 1e-9);
}
