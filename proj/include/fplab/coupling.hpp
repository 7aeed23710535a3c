#pragma once

// Coupling function rho and the parameters of the coupled system: oscillator
// frequency omega0, field mass m, and the field kind (wave field m = 0,
// Klein-Gordon field m > 0). rho is real, even and radial, so rho_hat is real
// and even; the Gaussian shape has no Fourier zeros, the radial bump may.
//
// Fourier convention used throughout: f_hat(k) = int exp(-i k.x) f(x) dx,
// f(x) = (2 pi)^-3 int exp(+i k.x) f_hat(k) dk. For real even rho both sign
// conventions give the same rho_hat.

#include <cmath>
#include <stdexcept>
#include <string>

#include "fplab/quadrature.hpp"

namespace fplab {

enum class CouplingShape { gaussian, radial_bump };
enum class FieldKind { WF, KGF };

struct CouplingSpec {
    CouplingShape shape = CouplingShape::gaussian;
    double amplitude = 1.0;   // g
    double width = 1.0;       // sigma (gaussian) or support radius (bump)
    double mass = 1.0;        // field mass m >= 0
    double omega0 = 2.0;      // oscillator frequency in H_A

    FieldKind field_kind() const { return mass > 0.0 ? FieldKind::KGF : FieldKind::WF; }

    void validate() const {
        if (amplitude < 0.0) throw std::invalid_argument("coupling: amplitude g must be >= 0");
        if (width <= 0.0) throw std::invalid_argument("coupling: width sigma must be > 0");
        if (mass < 0.0) throw std::invalid_argument("coupling: mass m must be >= 0");
        if (omega0 <= 0.0) throw std::invalid_argument("coupling: omega0 must be > 0");
    }

    // rho(x) as a function of r = |x|.
    double rho_radial(double r) const {
        if (shape == CouplingShape::gaussian)
            return amplitude * std::exp(-0.5 * r * r / (width * width));
        // smooth bump supported on r < width, normalized to rho(0) = g
        double u = r / width;
        if (u >= 1.0) return 0.0;
        return amplitude * std::exp(1.0 - 1.0 / (1.0 - u * u));
    }

    // rho_hat(k), real and even. Gaussian in closed form; bump by radial
    // quadrature rho_hat(k) = (4 pi / k) int_0^R r sin(k r) rho(r) dr.
    double rho_hat(double k) const {
        k = std::abs(k);
        if (shape == CouplingShape::gaussian) {
            double s2 = width * width;
            return amplitude * std::pow(2.0 * 3.14159265358979323846 * s2, 1.5) *
                   std::exp(-0.5 * s2 * k * k);
        }
        const double R = width;
        if (k < 1e-8) {
            auto r0 = integrate([&](double r) { return 4.0 * 3.14159265358979323846 * r * r * rho_radial(r); },
                                0.0, R, 1e-12);
            return r0.value;
        }
        auto r1 = oscillatory_integral([&](double r) { return 4.0 * 3.14159265358979323846 * r * rho_radial(r) / k; },
                                       0.0, R, k, Trig::sin, 1e-12);
        return r1.value;
    }

    // |rho_hat| falls below ~1e-26 of its peak beyond this radius; radial
    // k-integrals are truncated here.
    double k_cutoff() const {
        if (shape == CouplingShape::gaussian) return 11.0 / width;
        return 60.0 / width;  // bump tails decay slower (sub-exponential)
    }

    std::string shape_name() const {
        return shape == CouplingShape::gaussian ? "gaussian" : "radial_bump";
    }
};

}  // namespace fplab
