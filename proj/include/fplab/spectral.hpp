#pragma once

// Exact single-mode algebra of the free field: dispersion, the mode
// propagator G_t(k) of the system phi_dot = pi, pi_dot = -omega^2 phi, its
// adjoint under the L^2 pairing, and the commutation matrix C(k).

#include <cmath>

#include "fplab/smallmat.hpp"

namespace fplab {

inline double dispersion(const Vec3& k, double m) {
    return std::sqrt(k.norm2() + m * m);
}

// G_t = [[cos wt, sin(wt)/w], [-w sin wt, cos wt]]; the w -> 0 zero mode of
// the wave field degenerates to the shear [[1, t], [0, 1]].
inline Mat2 propagator_matrix_omega(double omega, double t) {
    if (omega == 0.0) return {1.0, t, 0.0, 1.0};
    double c = std::cos(omega * t), s = std::sin(omega * t);
    return {c, s / omega, -omega * s, c};
}

inline Mat2 propagator_matrix(const Vec3& k, double t, double m) {
    return propagator_matrix_omega(dispersion(k, m), t);
}

// Adjoint propagator W'_t: <G_t a, b> = <a, W'_t b> for the mode pairing;
// equals the transpose of G_t.
inline Mat2 adjoint_propagator_omega(double omega, double t) {
    return propagator_matrix_omega(omega, t).transposed();
}

inline Mat2 adjoint_propagator(const Vec3& k, double t, double m) {
    return adjoint_propagator_omega(dispersion(k, m), t);
}

// C(k) = [[0, 1/w], [-w, 0]]; rejects the w = 0 zero mode, which the caller
// must exclude for the wave field.
inline Mat2 commutation_matrix_omega(double omega) {
    if (omega <= 0.0) throw std::domain_error("commutation_matrix: omega(k) = 0 (WF zero mode excluded)");
    return {0.0, 1.0 / omega, -omega, 0.0};
}

inline Mat2 commutation_matrix(const Vec3& k, double m) {
    return commutation_matrix_omega(dispersion(k, m));
}

}  // namespace fplab
