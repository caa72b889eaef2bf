#pragma once

#include <cmath>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/legendre.hpp>

#include "wtm/errors.hpp"

namespace wtm {

// Gauss-Legendre rule on [-1, 1] with barycentric weights for interpolation on its nodes.
struct GaussRule {
    std::vector<double> x, w, bary;
};

inline GaussRule gauss_legendre(int n) {
    if (n < 1) throw ModelError("gauss_legendre: need at least one node");
    const auto zeros = boost::math::legendre_p_zeros<double>(n);  // nonnegative half, ascending
    GaussRule r;
    std::vector<double> pos;
    for (double z : zeros) pos.push_back(z);
    for (auto it = pos.rbegin(); it != pos.rend(); ++it)
        if (*it > 0.0) r.x.push_back(-*it);
    for (double z : pos) r.x.push_back(z);
    for (double x : r.x) {
        const double d = boost::math::legendre_p_prime(n, x);
        r.w.push_back(2.0 / ((1.0 - x * x) * d * d));
    }
    for (std::size_t j = 0; j < r.x.size(); ++j)
        r.bary.push_back((j % 2 ? -1.0 : 1.0) * std::sqrt((1.0 - r.x[j] * r.x[j]) * r.w[j]));
    return r;
}

// Barycentric Lagrange interpolation of nodal values at t (all on [-1, 1]).
template <class T>
T bary_eval(const GaussRule& r, const std::vector<T>& f, double t) {
    T num{};
    double den = 0.0;
    for (std::size_t j = 0; j < r.x.size(); ++j) {
        const double d = t - r.x[j];
        if (d == 0.0) return f[j];
        const double c = r.bary[j] / d;
        num += c * f[j];
        den += c;
    }
    return num / den;
}

// S(i, j) = integral from -1 to x_i of the j-th Lagrange basis polynomial.
inline std::vector<std::vector<double>> cumulative_matrix(const GaussRule& r) {
    const std::size_t n = r.x.size();
    std::vector<std::vector<double>> s(n, std::vector<double>(n, 0.0));
    std::vector<double> e(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double half = 0.5 * (r.x[i] + 1.0);
        for (std::size_t j = 0; j < n; ++j) {
            e.assign(n, 0.0);
            e[j] = 1.0;
            double acc = 0.0;
            for (std::size_t k = 0; k < n; ++k) acc += r.w[k] * bary_eval(r, e, -1.0 + half * (r.x[k] + 1.0));
            s[i][j] = half * acc;
        }
    }
    return s;
}

// Adaptive Gauss-Kronrod on a finite interval.
template <class F>
auto integrate_adaptive(F f, double a, double b, double tol = 1e-12, double* err = nullptr, unsigned depth = 12) {
    double e = 0.0;
    auto v = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, depth, tol, &e);
    if (err) *err = e;
    return v;
}

}  // namespace wtm
