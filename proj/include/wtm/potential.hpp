#pragma once

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <utility>

#include "wtm/specialfn.hpp"

namespace wtm {

using RealFn = std::function<double(double)>;

enum class DomainKind { HalfLine, FullLine };
enum class LeftEndpoint { Regular, StronglySingularLimitPoint };

// Closed-form handles; each may be empty.
struct Oracle {
    std::function<cplx(cplx)> m_closed;                       // alpha = 0 or tilde coefficient
    std::function<double(double)> density_closed;             // d rho / d lambda
    std::function<ValueDeriv(cplx, double)> phi_closed;       // phi_0 or phi~, in the model normalization
    std::function<ValueDeriv(cplx, double)> theta_closed;
    std::function<cplx(cplx, double, double)> green_closed;   // (z, x, x')
    std::function<std::array<double, 3>(double, double)> omega_density_closed;  // (lambda, x0) -> w00, w01, w11
    std::function<std::pair<cplx, cplx>(cplx, double)> m_pm_closed;             // (z, x0) -> m_-, m_+
};

// V(x) = c / x^2 (up to a negligible remainder) for x >= start; on the full line for |x| >= start.
struct TailModel {
    double inverse_square = 0.0;
    double start = 0.0;
};

// V = (gamma^2 - 1/4)/x^2 + vtilde near a = 0.
struct BesselLike {
    double gamma;
    RealFn vtilde;
    double phi_scale;  // model phi~ = phi_scale * (x^{1/2+gamma} + ...)
};

// V = f''/f + f^{-4} + vtilde. inv_f2 (optional) returns the integral of f^{-2} from x to x0.
struct FactorizedPotential {
    RealFn f, df, ddf;
    RealFn vtilde;
    double x0 = 1.0;
    RealFn inv_f2;
};

struct PotentialModel {
    std::string name;
    DomainKind domain = DomainKind::HalfLine;
    double a = 0.0;
    RealFn V;
    LeftEndpoint left = LeftEndpoint::Regular;
    Oracle oracle;
    double C = 1.0;
    TailModel tail;
    std::optional<BesselLike> bessel;
    std::optional<FactorizedPotential> factorized;
    double length_scale = 1.0;

    bool singular_left() const { return left == LeftEndpoint::StronglySingularLimitPoint; }
    bool full_line() const { return domain == DomainKind::FullLine; }
};

}  // namespace wtm
