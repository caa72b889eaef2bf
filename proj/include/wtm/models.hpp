#pragma once

#include <array>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <boost/math/special_functions/fpclassify.hpp>  // pchip uses unqualified isnan
#include <boost/math/interpolators/pchip.hpp>

#include "wtm/potential.hpp"
#include "wtm/quadrature.hpp"
#include "wtm/specialfn.hpp"

namespace wtm {

struct BesselParams {
    double gamma = 1.5;
    double C = 1.0;

    void validate() const {
        if (!(gamma >= 1.0) || !std::isfinite(gamma)) throw ModelError("bessel: gamma must be >= 1");
        if (C == 0.0 || !std::isfinite(C)) throw ModelError("bessel: C must be finite and nonzero");
    }
};

// ---------------------------------------------------------------- closed forms

// m~_+ of the Bessel operator with the canonical (C-scaled) theta/phi pair.
inline cplx bessel_closed_m(cplx z, const BesselParams& p) {
    p.validate();
    if (z.imag() == 0.0 && z.real() >= 0.0) throw DomainError("bessel_closed_m: z lies on the cut [0, inf)");
    const auto o = BesselOrder::make(p.gamma);
    const double c2 = p.C * p.C;
    if (o.is_integer()) {
        const int n = o.n();
        return c2 * (2.0 / pi) * cut_power(z, n).value * (I - cut_log(z).value / pi);
    }
    return -c2 * (2.0 / pi) * std::sin(pi * o.gamma) * std::exp(-I * pi * o.gamma) * cut_power(z, o.gamma).value;
}

inline double bessel_density(double lambda, const BesselParams& p) {
    p.validate();
    if (lambda <= 0.0) return 0.0;
    const auto o = BesselOrder::make(p.gamma);
    const double s = o.is_integer() ? 1.0 : std::pow(std::sin(pi * o.gamma), 2);
    return p.C * p.C * std::pow(lambda, o.gamma) * (2.0 / (pi * pi)) * s;
}

// d Omega / d lambda for the interior point x0: (w00, w01, w11).
inline std::array<double, 3> bessel_omega_density(double lambda, double x0, double gamma) {
    if (lambda <= 0.0) return {0.0, 0.0, 0.0};
    if (!(x0 > 0.0)) throw DomainError("bessel_omega_density: x0 must be positive");
    const double r = std::sqrt(lambda);
    const double w = r * x0;
    const double j = bessel_j(gamma, w).real();
    const double dj = 0.5 * (bessel_j(gamma - 1.0, w).real() - bessel_j(gamma + 1.0, w).real());
    const double b = j + 2.0 * x0 * r * dj;
    return {0.5 * x0 * j * j, 0.25 * (j * j + 2.0 * x0 * r * j * dj), b * b / (8.0 * x0)};
}

namespace detail {

// Multiplier taking E_+ = z^{-gamma/2} x^{1/2} J_gamma to the canonical phi~.
inline double bessel_phi_factor(const BesselParams& p) {
    const auto o = BesselOrder::make(p.gamma);
    if (o.is_integer()) return (pi / 2.0) / p.C;
    return pi / (2.0 * std::sin(pi * o.gamma) * p.C);
}

inline ValueDeriv scale(const ValueDeriv& f, cplx s) { return {s * f.value, s * f.deriv}; }

}  // namespace detail

inline Oracle bessel_oracle(const BesselParams& p) {
    p.validate();
    const auto o = BesselOrder::make(p.gamma);
    const double phi_fac = detail::bessel_phi_factor(p);
    Oracle orc;
    orc.m_closed = [p](cplx z) { return bessel_closed_m(z, p); };
    orc.density_closed = [p](double l) { return bessel_density(l, p); };
    orc.phi_closed = [o, phi_fac](cplx z, double x) {
        return detail::scale(entire_bessel_frame(+1, o, z, x), phi_fac);
    };
    const double C = p.C;
    orc.theta_closed = [o, C](cplx z, double x) {
        if (o.is_integer()) return detail::scale(theta_integer_entire(o.n(), z, x), C);
        return detail::scale(entire_bessel_frame(-1, o, z, x), C);
    };
    // (i pi / 2) x<^{1/2} J(z^{1/2} x<) x>^{1/2} H(z^{1/2} x>)
    orc.green_closed = [o](cplx z, double x, double xp) {
        const double lo = std::min(x, xp), hi = std::max(x, xp);
        const cplx j = cut_power(z, o.gamma / 2.0).value * entire_bessel(+1, o, z, lo);
        return (I * pi / 2.0) * j * hankel_combination(o, z, hi);
    };
    orc.omega_density_closed = [g = o.gamma](double l, double x0) { return bessel_omega_density(l, x0, g); };
    orc.m_pm_closed = [o](cplx z, double x0) {
        const ValueDeriv e = entire_bessel_frame(+1, o, z, x0);
        const ValueDeriv h = hankel_combination_frame(o, z, x0);
        return std::pair<cplx, cplx>{e.deriv / e.value, h.deriv / h.value};
    };
    return orc;
}

// Example data for the free operator: half-line with Dirichlet data at 0, or the full line with x0 = 0.
inline Oracle free_closed_forms(DomainKind kind) {
    Oracle orc;
    auto sinc_frame = [](cplx z, double x) -> ValueDeriv {
        const cplx r = sqrt_upper(z);
        if (std::abs(r) * std::abs(x) < 1e-8) return {x, 1.0};
        return {std::sin(r * x) / r, std::cos(r * x)};
    };
    auto cos_frame = [](cplx z, double x) -> ValueDeriv {
        const cplx r = sqrt_upper(z);
        return {std::cos(r * x), -r * std::sin(r * x)};
    };
    orc.phi_closed = sinc_frame;
    orc.theta_closed = cos_frame;
    if (kind == DomainKind::HalfLine) {
        orc.m_closed = [](cplx z) { return I * sqrt_upper(z); };
        orc.density_closed = [](double l) { return l > 0.0 ? std::sqrt(l) / pi : 0.0; };
        orc.green_closed = [](cplx z, double x, double xp) {
            const cplx r = sqrt_upper(z);
            const double lo = std::min(x, xp), hi = std::max(x, xp);
            return std::sin(r * lo) * std::exp(I * r * hi) / r;
        };
    } else {
        orc.green_closed = [](cplx z, double x, double xp) {
            const cplx r = sqrt_upper(z);
            return I * std::exp(I * r * std::abs(x - xp)) / (2.0 * r);
        };
        orc.omega_density_closed = [](double l, double) -> std::array<double, 3> {
            if (l <= 0.0) return {0.0, 0.0, 0.0};
            return {1.0 / (2.0 * pi * std::sqrt(l)), 0.0, std::sqrt(l) / (2.0 * pi)};
        };
        orc.m_pm_closed = [](cplx z, double) {
            const cplx r = sqrt_upper(z);
            return std::pair<cplx, cplx>{-I * r, I * r};
        };
    }
    return orc;
}

// ---------------------------------------------------------------- expressions

// Recursive-descent parser for + - * / ^ exp ln sin cos, numbers and the variable x.
class Expression {
public:
    explicit Expression(std::string text) : text_(std::move(text)) {
        pos_ = 0;
        fn_ = parse_sum();
        skip();
        if (pos_ != text_.size()) fail("unexpected '" + std::string(1, text_[pos_]) + "'");
    }
    double operator()(double x) const { return fn_(x); }
    const std::string& text() const { return text_; }
    RealFn function() const { return fn_; }

private:
    std::string text_;
    std::size_t pos_ = 0;
    RealFn fn_;

    [[noreturn]] void fail(const std::string& m) const {
        throw ModelError("expression '" + text_ + "': " + m + " at position " + std::to_string(pos_));
    }
    void skip() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }
    bool eat(char c) {
        skip();
        if (pos_ < text_.size() && text_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }
    RealFn parse_sum() {
        RealFn lhs = parse_product();
        for (;;) {
            if (eat('+')) {
                RealFn r = parse_product();
                lhs = [lhs, r](double x) { return lhs(x) + r(x); };
            } else if (eat('-')) {
                RealFn r = parse_product();
                lhs = [lhs, r](double x) { return lhs(x) - r(x); };
            } else {
                return lhs;
            }
        }
    }
    RealFn parse_product() {
        RealFn lhs = parse_unary();
        for (;;) {
            if (eat('*')) {
                RealFn r = parse_unary();
                lhs = [lhs, r](double x) { return lhs(x) * r(x); };
            } else if (eat('/')) {
                RealFn r = parse_unary();
                lhs = [lhs, r](double x) { return lhs(x) / r(x); };
            } else {
                return lhs;
            }
        }
    }
    RealFn parse_unary() {
        if (eat('-')) {
            RealFn a = parse_unary();
            return [a](double x) { return -a(x); };
        }
        if (eat('+')) return parse_unary();
        return parse_power();
    }
    RealFn parse_power() {
        RealFn base = parse_primary();
        if (eat('^')) {
            RealFn e = parse_unary();  // right associative
            return [base, e](double x) { return std::pow(base(x), e(x)); };
        }
        return base;
    }
    RealFn parse_primary() {
        skip();
        if (pos_ >= text_.size()) fail("unexpected end");
        const char c = text_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            std::size_t used = 0;
            double v = 0.0;
            try {
                v = std::stod(text_.substr(pos_), &used);
            } catch (const std::exception&) {
                fail("bad number");
            }
            pos_ += used;
            return [v](double) { return v; };
        }
        if (eat('(')) {
            RealFn inner = parse_sum();
            if (!eat(')')) fail("missing ')'");
            return inner;
        }
        if (std::isalpha(static_cast<unsigned char>(c))) {
            std::size_t start = pos_;
            while (pos_ < text_.size() && std::isalpha(static_cast<unsigned char>(text_[pos_]))) ++pos_;
            const std::string name = text_.substr(start, pos_ - start);
            if (name == "x") return [](double x) { return x; };
            double (*f)(double) = nullptr;
            if (name == "exp") f = [](double v) { return std::exp(v); };
            else if (name == "ln") f = [](double v) { return std::log(v); };
            else if (name == "sin") f = [](double v) { return std::sin(v); };
            else if (name == "cos") f = [](double v) { return std::cos(v); };
            else {
                pos_ = start;
                fail("unknown identifier '" + name + "'");
            }
            if (!eat('(')) fail("expected '(' after " + name);
            RealFn arg = parse_sum();
            if (!eat(')')) fail("missing ')'");
            return [f, arg](double x) { return f(arg(x)); };
        }
        fail("unexpected '" + std::string(1, c) + "'");
    }
};

// ---------------------------------------------------------------- catalog

struct CatalogParams {
    double gamma = 1.5;
    double C = 1.0;
    double x0 = 1.0;
    std::string vtilde = "exp(-x)";
    double power = 3.0;
    std::vector<double> table_x, table_v;
};

namespace detail {

// First x beyond which |vtilde| stays below the threshold (checked on a geometric scan).
inline double decay_start(const RealFn& vt, double threshold) {
    double x = 1.0;
    while (x < 1e4) {
        bool ok = true;
        for (double y = x; y <= 4.0 * x; y *= 1.02) {
            const double v = vt(y);
            if (!std::isfinite(v) || std::abs(v) > threshold) {
                ok = false;
                break;
            }
        }
        if (ok) return x;
        x *= 1.05;
    }
    throw ModelError("perturbed_bessel: vtilde does not decay below " + std::to_string(threshold) + " before x = 1e4");
}

}  // namespace detail

inline PotentialModel make_free_halfline() {
    PotentialModel m;
    m.name = "free_halfline";
    m.V = [](double) { return 0.0; };
    m.oracle = free_closed_forms(DomainKind::HalfLine);
    return m;
}

inline PotentialModel make_free_line() {
    PotentialModel m;
    m.name = "free_line";
    m.domain = DomainKind::FullLine;
    m.a = -std::numeric_limits<double>::infinity();
    m.V = [](double) { return 0.0; };
    m.oracle = free_closed_forms(DomainKind::FullLine);
    return m;
}

inline PotentialModel make_bessel(const BesselParams& p) {
    p.validate();
    const auto o = BesselOrder::make(p.gamma);
    PotentialModel m;
    m.name = "bessel";
    const double c = o.gamma * o.gamma - 0.25;
    m.V = [c](double x) { return c / (x * x); };
    m.left = LeftEndpoint::StronglySingularLimitPoint;
    m.C = p.C;
    m.oracle = bessel_oracle(p);
    m.tail = {c, 0.0};
    m.bessel = BesselLike{o.gamma, [](double) { return 0.0; },
                          detail::bessel_phi_factor(p) / (std::pow(2.0, o.gamma) * gamma_real(1.0 + o.gamma))};
    return m;
}

inline PotentialModel make_perturbed_bessel(const BesselParams& p, RealFn vtilde, const std::string& label) {
    p.validate();
    if (!vtilde) throw ModelError("perturbed_bessel: vtilde missing");
    const auto o = BesselOrder::make(p.gamma);
    PotentialModel m;
    m.name = "perturbed_bessel(" + label + ")";
    const double c = o.gamma * o.gamma - 0.25;
    m.V = [c, vtilde](double x) { return c / (x * x) + vtilde(x); };
    m.left = LeftEndpoint::StronglySingularLimitPoint;
    m.C = p.C;
    m.tail = {c, detail::decay_start(vtilde, 1e-15)};
    m.bessel = BesselLike{o.gamma, vtilde,
                          detail::bessel_phi_factor(p) / (std::pow(2.0, o.gamma) * gamma_real(1.0 + o.gamma))};
    return m;
}

// V = x^{-p}, p > 2, written as f''/f + f^{-4} + vtilde with f = x^{p/4}.
inline PotentialModel make_inverse_power(double p, double x0 = 1.0) {
    if (!(p > 2.0) || !std::isfinite(p)) throw ModelError("inverse_power: need p > 2");
    if (!(x0 > 0.0)) throw ModelError("inverse_power: x0 must be positive");
    const double q = p / 4.0;
    PotentialModel m;
    m.name = "inverse_power(" + std::to_string(p) + ")";
    m.V = [p](double x) { return std::pow(x, -p); };
    m.left = LeftEndpoint::StronglySingularLimitPoint;
    m.tail = {0.0, std::pow(1e13, 1.0 / p)};
    FactorizedPotential fp;
    fp.f = [q](double x) { return std::pow(x, q); };
    fp.df = [q](double x) { return q * std::pow(x, q - 1.0); };
    fp.ddf = [q](double x) { return q * (q - 1.0) * std::pow(x, q - 2.0); };
    fp.vtilde = [q](double x) { return -q * (q - 1.0) / (x * x); };
    fp.x0 = x0;
    const double e = 1.0 - p / 2.0;
    fp.inv_f2 = [e, x0](double x) { return (std::pow(x0, e) - std::pow(x, e)) / e; };
    m.factorized = fp;
    m.length_scale = x0;
    return m;
}

// Tabulated V on [x_first, x_last], monotone cubic in between, zero beyond. Regular only.
inline PotentialModel make_tabulated(std::vector<double> xs, std::vector<double> vs) {
    if (xs.size() != vs.size() || xs.size() < 4) throw ModelError("tabulated: need at least 4 (x, V) pairs");
    for (std::size_t i = 1; i < xs.size(); ++i)
        if (!(xs[i] > xs[i - 1])) throw ModelError("tabulated: x values must increase strictly");
    for (double v : vs)
        if (!std::isfinite(v)) throw ModelError("tabulated: non-finite V value");
    const double a = xs.front(), last = xs.back();
    auto spline = std::make_shared<boost::math::interpolators::pchip<std::vector<double>>>(std::move(xs), std::move(vs));
    PotentialModel m;
    m.name = "tabulated";
    m.a = a;
    m.V = [spline, last](double x) { return x > last ? 0.0 : (*spline)(x); };
    m.tail = {0.0, last};
    return m;
}

inline PotentialModel catalog(const std::string& name, const CatalogParams& p = {}) {
    if (name == "free_halfline") return make_free_halfline();
    if (name == "free_line") return make_free_line();
    if (name == "bessel") return make_bessel({p.gamma, p.C});
    if (name == "perturbed_bessel") {
        Expression e(p.vtilde);
        return make_perturbed_bessel({p.gamma, p.C}, e.function(), p.vtilde);
    }
    if (name == "inverse_power") return make_inverse_power(p.power, p.x0);
    if (name == "tabulated") return make_tabulated(p.table_x, p.table_v);
    throw ModelError("unknown model '" + name + "'");
}

// ---------------------------------------------------------------- validation

// Quadrature check of the endpoint classification stored in the model.
inline void validate_endpoint(const PotentialModel& m) {
    if (m.full_line()) return;
    auto absV = [&m](double x) { return std::abs(m.V(x)); };
    if (!m.singular_left()) {
        double err = 0.0;
        const double v = integrate_adaptive(absV, m.a, m.a + 1.0, 1e-10, &err);
        if (!std::isfinite(v) || err > 1e-6 * std::max(1.0, v))
            throw ModelError(m.name + ": V does not look integrable on [a, a+1]");
        return;
    }
    auto tail_int = [&](double d) {
        // geometric panels keep the 1/x^k growth resolved
        double s = 0.0;
        for (double lo = d; lo < 1.0; lo *= 2.0) s += integrate_adaptive(absV, m.a + lo, m.a + std::min(1.0, 2.0 * lo), 1e-10);
        return s;
    };
    const double small = tail_int(1e-8), large = tail_int(1e-4);
    if (!(small > 100.0 * large))
        throw ModelError(m.name + ": declared strongly singular but V looks integrable at the left endpoint");
}

inline void validate_factorized(const FactorizedPotential& fp, double b = 1.0) {
    auto f2 = [&fp](double x) { return fp.f(x) * fp.f(x); };
    auto f2v = [&fp](double x) { return fp.f(x) * fp.f(x) * std::abs(fp.vtilde(x)); };
    double s1 = 0.0, s2 = 0.0;
    for (double lo = 1e-12 * b; lo < b; lo *= 2.0) {
        const double hi = std::min(b, 2.0 * lo);
        s1 += integrate_adaptive(f2, lo, hi, 1e-10);
        s2 += integrate_adaptive(f2v, lo, hi, 1e-10);
    }
    if (!std::isfinite(s1) || !std::isfinite(s2))
        throw ModelError("factorized potential: f^2 or f^2 vtilde not integrable near 0");
    // A divergent integrand keeps growing as the cutoff shrinks; compare with a coarser cutoff.
    double c1 = 0.0, c2 = 0.0;
    for (double lo = 1e-6 * b; lo < b; lo *= 2.0) {
        const double hi = std::min(b, 2.0 * lo);
        c1 += integrate_adaptive(f2, lo, hi, 1e-10);
        c2 += integrate_adaptive(f2v, lo, hi, 1e-10);
    }
    if (s1 > 1.01 * c1 + 1e-12 || s2 > 1.01 * c2 + 1e-12)
        throw ModelError("factorized potential: f^2 or f^2 vtilde not integrable near 0");
}

// ---------------------------------------------------------------- model files

inline std::vector<std::pair<double, double>> read_table_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ModelError("cannot open table file '" + path + "'");
    std::vector<std::pair<double, double>> rows;
    std::string line;
    while (std::getline(in, line)) {
        for (char& c : line)
            if (c == ',' || c == ';') c = ' ';
        std::istringstream ls(line);
        double x, v;
        if (ls >> x >> v) rows.emplace_back(x, v);
    }
    return rows;
}

// key = value (or key: value) lines; '#' starts a comment.
inline PotentialModel load_model_text(const std::string& text, const std::string& base_dir = ".") {
    std::map<std::string, std::string> kv;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r");
            if (b == std::string::npos) return std::string();
            const auto e = s.find_last_not_of(" \t\r");
            return s.substr(b, e - b + 1);
        };
        line = trim(line);
        if (line.empty()) continue;
        auto sep = line.find('=');
        if (sep == std::string::npos) sep = line.find(':');
        if (sep == std::string::npos) throw ModelError("model file line " + std::to_string(lineno) + ": expected key = value");
        kv[trim(line.substr(0, sep))] = trim(line.substr(sep + 1));
    }
    auto number = [&](const std::string& k, double def) {
        auto it = kv.find(k);
        if (it == kv.end()) return def;
        try {
            std::size_t used = 0;
            const double v = std::stod(it->second, &used);
            if (used != it->second.size()) throw std::invalid_argument(k);
            return v;
        } catch (const std::exception&) {
            throw ModelError("model file: key '" + k + "' is not a number");
        }
    };
    static const std::vector<std::string> known{"family", "gamma", "C", "x0", "vtilde", "power", "table", "points"};
    for (const auto& [k, v] : kv)
        if (std::find(known.begin(), known.end(), k) == known.end()) throw ModelError("model file: unknown key '" + k + "'");
    if (!kv.count("family")) throw ModelError("model file: missing 'family'");
    CatalogParams p;
    p.gamma = number("gamma", p.gamma);
    p.C = number("C", p.C);
    p.x0 = number("x0", p.x0);
    p.power = number("power", p.power);
    if (kv.count("vtilde")) p.vtilde = kv["vtilde"];
    const std::string fam = kv["family"];
    if (fam == "tabulated") {
        std::vector<std::pair<double, double>> rows;
        if (kv.count("table")) {
            std::string path = kv["table"];
            if (!path.empty() && path[0] != '/') path = base_dir + "/" + path;
            rows = read_table_file(path);
        } else if (kv.count("points")) {
            std::string s = kv["points"];
            for (char& c : s)
                if (c == ',' || c == ';') c = ' ';
            std::istringstream ps(s);
            double x, v;
            while (ps >> x >> v) rows.emplace_back(x, v);
        } else {
            throw ModelError("model file: tabulated family needs 'table' or 'points'");
        }
        for (auto& [x, v] : rows) {
            p.table_x.push_back(x);
            p.table_v.push_back(v);
        }
    }
    return catalog(fam, p);
}

inline PotentialModel load_model_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ModelError("cannot open model file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    const auto slash = path.find_last_of('/');
    return load_model_text(ss.str(), slash == std::string::npos ? "." : path.substr(0, slash));
}

}  // namespace wtm
