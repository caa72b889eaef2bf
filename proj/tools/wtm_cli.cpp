// wtm_cli: m-functions, spectral densities, transforms, Green's functions and verification from the shell.
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <regex>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "wtm/herglotz.hpp"
#include "wtm/mfunctions.hpp"
#include "wtm/models.hpp"
#include "wtm/transform.hpp"
#include "wtm/verification.hpp"

using namespace wtm;
using json = nlohmann::ordered_json;

namespace {

enum Exit { Ok = 0, VerifyFailed = 1, Usage = 2, Numerical = 3 };

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// a, a+bi, a-bi, bi, +i, -i; no spaces
cplx parse_complex(const std::string& s) {
    static const std::regex full(R"(^([+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)?(?:([+-](?:\d+\.?\d*|\.\d+)?(?:[eE][+-]?\d+)?)i)?$)");
    static const std::regex imag_only(R"(^([+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?|[+-]?)i$)");
    std::smatch m;
    if (std::regex_match(s, m, imag_only)) {
        const std::string t = m[1];
        return {0.0, (t.empty() || t == "+") ? 1.0 : t == "-" ? -1.0 : std::stod(t)};
    }
    if (s.empty() || !std::regex_match(s, m, full)) throw UsageError("cannot parse complex number '" + s + "' (expected a+bi)");
    double re = 0.0, im = 0.0;
    if (m[1].matched) re = std::stod(m[1]);
    if (m[2].matched) {
        const std::string t = m[2];
        im = (t == "+" || t.empty()) ? 1.0 : t == "-" ? -1.0 : std::stod(t);
    }
    if (!m[1].matched && !m[2].matched) throw UsageError("cannot parse complex number '" + s + "'");
    return {re, im};
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    for (std::string t; std::getline(ss, t, sep);) out.push_back(t);
    return out;
}

std::vector<double> linspace(double a, double b, int n) {
    std::vector<double> v;
    for (int i = 0; i < n; ++i) v.push_back(n == 1 ? a : a + (b - a) * i / (n - 1));
    return v;
}

// corner:corner:n, e.g. -1+0.1i:4+1i:5 gives 5 x 5 points (real part outer)
std::vector<cplx> parse_z_grid(const std::string& s) {
    // split at ':' that is not inside a number; complex numbers contain no ':'
    const auto parts = split(s, ':');
    if (parts.size() != 3) throw UsageError("--z-grid expects min:max:n");
    const cplx a = parse_complex(parts[0]), b = parse_complex(parts[1]);
    int n = 0;
    try {
        n = std::stoi(parts[2]);
    } catch (const std::exception&) {
        throw UsageError("--z-grid: n must be an integer");
    }
    if (n < 0) throw UsageError("--z-grid: n must be nonnegative");
    std::vector<cplx> out;
    for (double re : linspace(a.real(), b.real(), n))
        for (double im : linspace(a.imag(), b.imag(), n)) out.emplace_back(re, im);
    return out;
}

std::pair<double, double> parse_range(const std::string& s, const char* flag) {
    const auto p = split(s, ':');
    if (p.size() != 2) throw UsageError(std::string(flag) + " expects lo:hi");
    return {std::stod(p[0]), std::stod(p[1])};
}

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
};

std::string number(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

void emit(const Table& t, const std::string& format, const std::string& out_path) {
    for (const auto& r : t.rows)
        for (double v : r)
            if (!std::isfinite(v)) throw ConvergenceError("non-finite value in output");
    std::ostringstream os;
    if (format == "json") {
        json arr = json::array();
        for (const auto& r : t.rows) {
            json o = json::object();
            for (std::size_t c = 0; c < t.columns.size(); ++c) {
                const auto& name = t.columns[c];
                if (name.rfind("re_", 0) == 0 && c + 1 < t.columns.size() && t.columns[c + 1] == "im_" + name.substr(3)) {
                    o[name.substr(3)] = {{"re", r[c]}, {"im", r[c + 1]}};
                    ++c;
                } else {
                    o[name] = r[c];
                }
            }
            arr.push_back(o);
        }
        os << arr.dump(2) << "\n";
    } else {
        for (std::size_t c = 0; c < t.columns.size(); ++c) os << (c ? "," : "") << t.columns[c];
        os << "\n";
        for (const auto& r : t.rows) {
            for (std::size_t c = 0; c < r.size(); ++c) os << (c ? "," : "") << number(r[c]);
            os << "\n";
        }
    }
    if (out_path.empty()) {
        std::cout << os.str();
    } else {
        std::ofstream f(out_path);
        if (!f) throw UsageError("cannot write '" + out_path + "'");
        f << os.str();
    }
}

struct Common {
    std::string model, model_file, vtilde = "exp(-x)", format = "csv", out, eps_schedule;
    double gamma = 1.5, C = 1.0, alpha = 0.0, x0 = 1.0, power = 3.0;
    double rtol = 1e-11, atol = 1e-13;
    bool x0_set = false;

    PotentialModel load() const {
        if (model.empty() == model_file.empty()) throw UsageError("give exactly one of --model or --model-file");
        if (!model_file.empty()) return load_model_file(model_file);
        return catalog(model, {.gamma = gamma, .C = C, .x0 = x0, .vtilde = vtilde, .power = power});
    }
    IntegratorConfig cfg() const {
        IntegratorConfig c;
        c.rel_tol = rtol;
        c.abs_tol = atol;
        c.validate();
        return c;
    }
    RiccatiOptions riccati() const {
        RiccatiOptions r;
        r.cfg = cfg();
        return r;
    }
    std::vector<double> schedule() const {
        if (eps_schedule.empty()) return default_schedule();
        std::vector<double> s;
        for (const auto& t : split(eps_schedule, ',')) s.push_back(std::stod(t));
        return s;
    }
    void check_format() const {
        if (format != "csv" && format != "json") throw UsageError("--format must be csv or json");
    }
};

void add_common(CLI::App* c, Common& o, bool model = true) {
    if (model) {
        c->add_option("--model", o.model, "catalog model: free_halfline, free_line, bessel, perturbed_bessel, inverse_power, tabulated");
        c->add_option("--model-file", o.model_file, "model file with key = value lines (family, gamma, C, x0, vtilde, power, table, points)");
        c->add_option("--gamma", o.gamma, "Bessel order, >= 1")->capture_default_str();
        c->add_option("--C", o.C, "normalization constant of the singular pair")->capture_default_str();
        c->add_option("--vtilde", o.vtilde, "perturbation for perturbed_bessel, an expression in x")->capture_default_str();
        c->add_option("--power", o.power, "exponent for inverse_power")->capture_default_str();
        c->add_option("--alpha", o.alpha, "boundary angle at a regular endpoint, [0, pi)")->capture_default_str();
        c->add_option("--x0", o.x0, "interior reference point")->capture_default_str();
        c->add_option("--rtol", o.rtol, "ODE relative tolerance")->capture_default_str();
        c->add_option("--atol", o.atol, "ODE absolute tolerance")->capture_default_str();
        c->add_option("--eps-schedule", o.eps_schedule, "comma list of decreasing eps for boundary limits (default 1e-2,5e-3,2.5e-3,1.25e-3)");
    }
    c->add_option("--format", o.format, "csv or json")->capture_default_str();
    c->add_option("--out", o.out, "write to this path instead of stdout");
}

std::vector<cplx> z_points(const std::vector<std::string>& zs, const std::string& grid) {
    std::vector<cplx> out;
    for (const auto& s : zs) out.push_back(parse_complex(s));
    if (!grid.empty())
        for (cplx z : parse_z_grid(grid)) out.push_back(z);
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Weyl-Titchmarsh m-functions and spectral data for half-line Schrodinger operators.\n"
                 "Exit codes: 0 ok, 1 verification failure, 2 usage/model error, 3 numerical nonconvergence."};
    app.require_subcommand(1);
    Common o;

    std::vector<std::string> zs;
    std::string zgrid, kind, gauge;
    auto* mfun = app.add_subcommand("mfun", "Weyl coefficient samples m(z): columns re_z, im_z, re_m, im_m, err");
    add_common(mfun, o);
    mfun->add_option("--z", zs, "spectral parameter(s) a+bi");
    mfun->add_option("--z-grid", zgrid, "rectangular grid min:max:n between complex corners, n points per axis");
    mfun->add_option("--kind", kind, "alpha (regular half-line), tilde (singular endpoint), plus / minus (interior at --x0)");
    mfun->add_option("--gauge", gauge, "tilde only: reference (closed-form theta, default when the model has one) or constructed (theta~ from phi~ at x0)");

    double lmin = 0.0, lmax = 1.0;
    int n = 11;
    bool matrix = false;
    auto* dens = app.add_subcommand("density", "spectral density from boundary values pi^{-1} Im m(lambda + i0): columns lambda, rho (or w00, w01, w11, det)");
    add_common(dens, o);
    dens->add_option("--lmin", lmin)->capture_default_str();
    dens->add_option("--lmax", lmax)->capture_default_str();
    dens->add_option("--n", n)->capture_default_str();
    dens->add_flag("--matrix", matrix, "2x2 density of the interior matrix M at --x0");

    std::string h_expr = "exp(-x)", support = "0:20";
    auto* tr = app.add_subcommand("transform", "generalized eigenfunction transform of h: columns lambda, re_h0, im_h0 (re_h1, im_h1)");
    tr->set_help_flag("--help", "Print this help message and exit");  // -h would clash with --h
    add_common(tr, o);
    tr->add_option("--h", h_expr, "function of x")->capture_default_str();
    tr->add_option("--support", support, "lo:hi, where h is supported")->capture_default_str();
    tr->add_option("--lmin", lmin)->capture_default_str();
    tr->add_option("--lmax", lmax)->capture_default_str();
    tr->add_option("--n", n)->capture_default_str();

    std::vector<double> xs;
    double xp = 1.0;
    std::string zstr = "0+1i";
    auto* gr = app.add_subcommand("green", "Green's function G(z, x, x'): columns x, xp, re_g, im_g");
    add_common(gr, o);
    gr->add_option("--z", zstr, "spectral parameter a+bi")->capture_default_str();
    gr->add_option("--x", xs, "point(s) x")->required();
    gr->add_option("--xp", xp, "second point")->capture_default_str();

    std::string f_expr = "1", x_grid = "0.5:3:11";
    auto* rs = app.add_subcommand("resolvent", "(H - z)^{-1} f on a grid: columns x, re_u, im_u");
    add_common(rs, o);
    rs->add_option("--z", zstr, "spectral parameter a+bi")->capture_default_str();
    rs->add_option("--f", f_expr, "function of x")->capture_default_str();
    rs->add_option("--support", support, "lo:hi, where f is supported")->capture_default_str();
    rs->add_option("--x-grid", x_grid, "lo:hi:n output points")->capture_default_str();

    std::string suite = "all";
    auto* ver = app.add_subcommand("verify", "acceptance suites: name, measured, expected, tolerance, status");
    add_common(ver, o, false);
    ver->add_option("--suite", suite, "regular, singular, transforms, herglotz, all, as-stated")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return Usage;
    }

    try {
        o.check_format();
        Table t;
        if (*ver) {
            if (!verify::known_suite(suite)) throw UsageError("unknown suite '" + suite + "'");
            const auto lines = verify::run_suite(suite);
            t.columns = {"name", "measured", "expected", "tolerance", "status"};
            bool ok = true;
            std::ostringstream os;
            if (o.format == "json") {
                json arr = json::array();
                for (const auto& c : lines)
                    arr.push_back({{"name", "AC" + c.id + " " + c.name}, {"measured", c.measured}, {"expected", c.expected}, {"tolerance", c.tolerance},
                                   {"status", c.pass ? "pass" : "fail"}, {"detail", c.detail}});
                os << arr.dump(2) << "\n";
            } else {
                os << "name,measured,expected,tolerance,status\n";
                for (const auto& c : lines) os << "\"AC" << c.id << " " << c.name << "\"," << number(c.measured) << "," << number(c.expected) << ","
                                               << number(c.tolerance) << "," << (c.pass ? "pass" : "fail") << "\n";
            }
            for (const auto& c : lines) ok = ok && c.pass;
            if (o.out.empty())
                std::cout << os.str();
            else
                std::ofstream(o.out) << os.str();
            return ok ? Ok : VerifyFailed;
        }

        const auto model = o.load();
        const auto ric = o.riccati();
        if (*mfun) {
            if (kind.empty()) kind = model.singular_left() ? "tilde" : "alpha";
            t.columns = {"re_z", "im_z", "re_m", "im_m", "err"};
            MTildeOptions mo;
            mo.riccati = ric;
            if (gauge.empty()) gauge = model.oracle.theta_closed ? "reference" : "constructed";
            if (gauge == "reference")
                mo.gauge = ThetaGauge::Reference;
            else if (gauge == "constructed")
                mo.gauge = ThetaGauge::Constructed;
            else
                throw UsageError("--gauge must be reference or constructed");
            for (cplx z : z_points(zs, zgrid)) {
                BoundaryFunctionSample s;
                if (kind == "alpha")
                    s = halfline_m(model, o.alpha, z, {ric});
                else if (kind == "tilde")
                    s = singular_m_tilde(model, z, {0.5, 1.0, 2.0}, mo);
                else if (kind == "plus" || kind == "minus") {
                    const auto pm = interior_m_pm(model, o.x0, z, {o.alpha, ric});
                    s = kind == "plus" ? pm.second : pm.first;
                } else
                    throw UsageError("--kind must be alpha, tilde, plus or minus");
                t.rows.push_back({z.real(), z.imag(), s.value.real(), s.value.imag(), s.err_estimate});
            }
        } else if (*dens) {
            if (n < 0) throw UsageError("--n must be nonnegative");
            const auto sched = o.schedule();
            if (matrix) {
                t.columns = {"lambda", "w00", "w01", "w11", "det"};
                for (double l : linspace(lmin, lmax, n)) {
                    std::array<std::vector<double>, 3> v;
                    for (double e : sched) {
                        const auto M = matrix_m(model, o.x0, cplx(l, e), {o.alpha, ric});
                        v[0].push_back(M(0, 0).imag() / pi);
                        v[1].push_back(M(0, 1).imag() / pi);
                        v[2].push_back(M(1, 1).imag() / pi);
                    }
                    double w[3];
                    for (int k = 0; k < 3; ++k) w[k] = richardson(sched, v[k]).value;
                    t.rows.push_back({l, w[0], w[1], w[2], w[0] * w[2] - w[1] * w[1]});
                }
            } else {
                t.columns = {"lambda", "rho"};
                Sampler s;
                if (model.singular_left()) {
                    MTildeOptions mo;
                    mo.riccati = ric;
                    s = [&model, mo](cplx z) { return singular_m_tilde(model, z, {0.5, 1.0, 2.0}, mo).value; };
                } else {
                    s = [&model, &o, ric](cplx z) { return halfline_m(model, o.alpha, z, {ric}).value; };
                }
                for (double l : linspace(lmin, lmax, n)) t.rows.push_back({l, ac_density(s, l, sched).value});
            }
        } else if (*tr) {
            const auto [lo, hi] = parse_range(support, "--support");
            const RealFn h = Expression(h_expr).function();
            Basis b = model.full_line() ? Basis::theta_phi(o.x0) : model.singular_left() ? Basis::phi_tilde() : Basis::phi_alpha(o.alpha);
            TransformOptions to;
            to.cfg = o.cfg();
            const auto v = forward_transform(model, [&](double x) { return cplx(h(x)); }, lo, hi, linspace(lmin, lmax, std::max(n, 0)), b, to);
            t.columns = {"lambda", "re_h0", "im_h0"};
            if (b.components() == 2) {
                t.columns.push_back("re_h1");
                t.columns.push_back("im_h1");
            }
            for (std::size_t i = 0; i < v.grid.size(); ++i) {
                std::vector<double> r{v.grid[i], v.comp0[i].real(), v.comp0[i].imag()};
                if (b.components() == 2) {
                    r.push_back(v.comp1[i].real());
                    r.push_back(v.comp1[i].imag());
                }
                t.rows.push_back(r);
            }
        } else if (*gr) {
            const cplx z = parse_complex(zstr);
            t.columns = {"x", "xp", "re_g", "im_g"};
            for (double x : xs) {
                const cplx g = greens_function(model, z, x, xp, {o.alpha, ric});
                t.rows.push_back({x, xp, g.real(), g.imag()});
            }
        } else if (*rs) {
            const cplx z = parse_complex(zstr);
            const auto [lo, hi] = parse_range(support, "--support");
            const auto p = split(x_grid, ':');
            if (p.size() != 3) throw UsageError("--x-grid expects lo:hi:n");
            const auto grid = linspace(std::stod(p[0]), std::stod(p[1]), std::stoi(p[2]));
            const RealFn f = Expression(f_expr).function();
            const auto u = resolvent_apply(model, z, [&](double x) { return cplx(f(x)); }, lo, hi, grid, {o.alpha, ric});
            t.columns = {"x", "re_u", "im_u"};
            for (std::size_t i = 0; i < grid.size(); ++i) t.rows.push_back({grid[i], u[i].real(), u[i].imag()});
        }
        emit(t, o.format, o.out);
        return Ok;
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return Usage;
    } catch (const ModelError& e) {
        std::cerr << "model error: " << e.what() << "\n";
        return Usage;
    } catch (const PoleSignal& e) {
        std::cerr << "point mass at lambda = " << e.where() << ": " << e.what() << "\n";
        return Numerical;
    } catch (const Error& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return Numerical;
    } catch (const std::invalid_argument& e) {
        std::cerr << "usage error: bad number (" << e.what() << ")\n";
        return Usage;
    } catch (const std::out_of_range& e) {
        std::cerr << "usage error: number out of range\n";
        return Usage;
    }
}
