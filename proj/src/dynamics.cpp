#include "fplab/dynamics.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace fplab {

Vec3 coupling_force(const GridCoupling& gc, const FieldState& f) {
    const auto& grid = gc.grid;
    double fx = 0.0, fy = 0.0, fz = 0.0;
    const double invV = 1.0 / grid.volume();
    for (std::size_t i = 0; i < grid.n_modes(); ++i) {
        // cweight vanishes on self-conjugate modes, so pair_weight = 2 there
        double im = f.phi[i].imag();
        double w = grid.pair_weight[i] * im * invV;
        fx += w * gc.cweight[i].x;
        fy += w * gc.cweight[i].y;
        fz += w * gc.cweight[i].z;
    }
    return {fx, fy, fz};
}

double field_energy(const GridCoupling& gc, const FieldState& f) {
    const auto& grid = gc.grid;
    double acc = 0.0;
    const double invV = 1.0 / grid.volume();
    for (std::size_t i = 0; i < grid.n_modes(); ++i) {
        double w2 = gc.omega[i] * gc.omega[i];
        acc += grid.pair_weight[i] * (w2 * std::norm(f.phi[i]) + std::norm(f.pi[i]));
    }
    return 0.5 * acc * invV;
}

EnergyBreakdown hamiltonian(const SystemState& Y, const GridCoupling& gc,
                            const CouplingSpec& spec) {
    EnergyBreakdown e;
    e.H_B = field_energy(gc, Y.field);
    e.H_A = 0.5 * (Y.p.norm2() + spec.omega0 * spec.omega0 * Y.q.norm2());
    e.H_int = -Y.q.dot(coupling_force(gc, Y.field));
    e.H_total = e.H_A + e.H_B + e.H_int;
    SystemState psi = t_map(Y, gc);
    e.H_B_psi = field_energy(gc, psi.field);
    Mat3 Aeff = Mat3::scaled_identity(spec.omega0 * spec.omega0) - gc.km_lattice;
    e.H_eff_A = 0.5 * Y.p.norm2() + 0.5 * Y.q.dot(Aeff * Y.q);
    return e;
}

SystemState t_map(const SystemState& Y, const GridCoupling& gc) {
    SystemState out = Y;
    const auto& grid = gc.grid;
    for (std::size_t i = 0; i < grid.n_modes(); ++i) {
        double w = gc.omega[i];
        if (w == 0.0) continue;  // cweight vanishes there as well
        double proj = Y.q.dot(gc.cweight[i]) / (w * w);
        out.field.phi[i] += cplx{0.0, -proj};  // + q.h_hat, h_hat = -i k rho_hat / w^2
    }
    return out;
}

SystemState t_map_inverse(const SystemState& Y, const GridCoupling& gc) {
    SystemState out = Y;
    const auto& grid = gc.grid;
    for (std::size_t i = 0; i < grid.n_modes(); ++i) {
        double w = gc.omega[i];
        if (w == 0.0) continue;
        double proj = Y.q.dot(gc.cweight[i]) / (w * w);
        out.field.phi[i] += cplx{0.0, proj};
    }
    return out;
}

std::vector<Vec3> force_history(const FieldState& phi0, const GridCoupling& gc,
                                const std::vector<double>& times) {
    const auto& grid = gc.grid;
    std::vector<Vec3> out(times.size());
    const double invV = 1.0 / grid.volume();
    for (std::size_t ti = 0; ti < times.size(); ++ti) {
        double t = times[ti];
        double fx = 0.0, fy = 0.0, fz = 0.0;
        for (std::size_t i = 0; i < grid.n_modes(); ++i) {
            const Vec3& cw = gc.cweight[i];
            if (cw.x == 0.0 && cw.y == 0.0 && cw.z == 0.0) continue;
            double w = gc.omega[i];
            cplx evolved = std::cos(w * t) * phi0.phi[i] +
                           (std::sin(w * t) / w) * phi0.pi[i];
            double im = evolved.imag() * grid.pair_weight[i] * invV;
            fx += im * cw.x;
            fy += im * cw.y;
            fz += im * cw.z;
        }
        out[ti] = {fx, fy, fz};
    }
    return out;
}

std::string wraparound_warning(const ModeGrid& grid, const CouplingSpec& spec, double T) {
    double safe = 0.5 * grid.box_length - 4.0 * spec.width;
    if (T <= safe) return {};
    std::ostringstream os;
    os << "wrap-around: horizon T=" << T << " exceeds L/2 - 4 sigma = " << safe
       << "; signals re-enter the coupling region (unit propagation speed)";
    return os.str();
}

SpectralDuhamelEvolver::SpectralDuhamelEvolver(const GridCoupling& gc,
                                               const CouplingSpec& spec, double dt)
    : gc_(gc), dt_(dt), w2_(spec.omega0 * spec.omega0) {
    if (dt == 0.0) throw std::invalid_argument("SpectralDuhamelEvolver: dt must be nonzero");
    const std::size_t n = gc.grid.n_modes();
    cos_.resize(n);
    sinow_.resize(n);
    mwsin_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        double w = gc.omega[i];
        if (w == 0.0) {
            cos_[i] = 1.0;
            sinow_[i] = dt;
            mwsin_[i] = 0.0;
        } else {
            cos_[i] = std::cos(w * dt);
            sinow_[i] = std::sin(w * dt) / w;
            mwsin_[i] = -w * std::sin(w * dt);
        }
    }
}

void SpectralDuhamelEvolver::step(SystemState& Y) const {
    const auto& grid = gc_.grid;
    const std::size_t n = grid.n_modes();
    Vec3 a0 = coupling_force(gc_, Y.field) - w2_ * Y.q;
    Vec3 q1 = Y.q + dt_ * Y.p + (0.5 * dt_ * dt_) * a0;

    // field: exact rotation plus trapezoid of the source (0, i q.k rho_hat)
    const double half = 0.5 * dt_;
    for (std::size_t i = 0; i < n; ++i) {
        double c = cos_[i], so = sinow_[i], mw = mwsin_[i];
        cplx phi = Y.field.phi[i], pi = Y.field.pi[i];
        double b0 = Y.q.dot(gc_.cweight[i]);
        double b1 = q1.dot(gc_.cweight[i]);
        // G_dt (phi, pi) + dt/2 [ G_dt (0, i b0) + (0, i b1) ]
        Y.field.phi[i] = c * phi + so * pi + cplx{0.0, half * so * b0};
        Y.field.pi[i] = mw * phi + c * pi + cplx{0.0, half * (c * b0 + b1)};
    }
    Vec3 a1 = coupling_force(gc_, Y.field) - w2_ * q1;
    Y.p += half * (a0 + a1);
    Y.q = q1;
    Y.time += dt_;
}

LeapfrogEvolver::LeapfrogEvolver(const GridCoupling& gc, const CouplingSpec& spec,
                                 double dt)
    : gc_(gc), dt_(dt), w2_(spec.omega0 * spec.omega0) {
    double wmax = gc.grid.omega_max(spec.mass);
    if (std::abs(dt) * wmax >= 2.0)
        throw std::invalid_argument("LeapfrogEvolver: CFL violation, need |dt| < 2/omega_max = " +
                                    std::to_string(2.0 / wmax));
}

void LeapfrogEvolver::step(SystemState& Y) const {
    const auto& grid = gc_.grid;
    const std::size_t n = grid.n_modes();
    const double half = 0.5 * dt_;
    // half kick
    Vec3 fq = coupling_force(gc_, Y.field) - w2_ * Y.q;
    for (std::size_t i = 0; i < n; ++i) {
        double w2m = gc_.omega[i] * gc_.omega[i];
        double b = Y.q.dot(gc_.cweight[i]);
        Y.field.pi[i] += half * (-w2m * Y.field.phi[i] + cplx{0.0, b});
    }
    Y.p += half * fq;
    // drift
    for (std::size_t i = 0; i < n; ++i) Y.field.phi[i] += dt_ * Y.field.pi[i];
    Y.q += dt_ * Y.p;
    // half kick
    fq = coupling_force(gc_, Y.field) - w2_ * Y.q;
    for (std::size_t i = 0; i < n; ++i) {
        double w2m = gc_.omega[i] * gc_.omega[i];
        double b = Y.q.dot(gc_.cweight[i]);
        Y.field.pi[i] += half * (-w2m * Y.field.phi[i] + cplx{0.0, b});
    }
    Y.p += half * fq;
    Y.time += dt_;
}

}  // namespace fplab
