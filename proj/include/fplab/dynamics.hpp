#pragma once

// Evolution of the coupled field-particle system
//   phi_dot = pi,  pi_dot = (Delta - m^2) phi + q . grad rho,
//   q_dot = p,     p_dot  = -omega0^2 q + <grad rho, phi>,
// by two independent integrators on the mode lattice:
//   - spectral-Duhamel: exact free rotation of every mode, coupling terms
//     accumulated by the trapezoid rule (time-reversible, second order);
//   - leapfrog: velocity-Verlet on the full quadratic Hamiltonian with the
//     coupling applied as kicks (symplectic, CFL-limited).
// Plus Hamiltonian bookkeeping and the change of variables psi = phi + q.h
// that splits H into H_B(psi) + H_A_eff(xi).

#include <string>
#include <vector>

#include "fplab/mode_grid.hpp"
#include "fplab/random_fields.hpp"
#include "fplab/smallmat.hpp"

namespace fplab {

struct SystemState {
    FieldState field;
    Vec3 q, p;
    double time = 0.0;
};

struct EnergyBreakdown {
    double H_total = 0.0;
    double H_A = 0.0;
    double H_B = 0.0;
    double H_int = 0.0;
    double H_eff_A = 0.0;   // |p|^2/2 + q.(omega0^2 I - Km_grid) q / 2
    double H_B_psi = 0.0;   // field energy in the psi variables
};

// <grad rho, phi> evaluated as a Parseval sum over modes.
Vec3 coupling_force(const GridCoupling& gc, const FieldState& f);

double field_energy(const GridCoupling& gc, const FieldState& f);

EnergyBreakdown hamiltonian(const SystemState& Y, const GridCoupling& gc,
                            const CouplingSpec& spec);

// psi = phi + q.h with h_hat = -i k rho_hat / (k^2 + m^2); pi unchanged.
SystemState t_map(const SystemState& Y, const GridCoupling& gc);
SystemState t_map_inverse(const SystemState& Y, const GridCoupling& gc);

// F(t) = <grad rho, (W_t phi0)^0> for each requested time.
std::vector<Vec3> force_history(const FieldState& phi0, const GridCoupling& gc,
                                const std::vector<double>& times);

// Empty when the box comfortably contains the causal cone of the coupling
// region over the run ([L/2 - 4 sigma] wrap-around heuristic).
std::string wraparound_warning(const ModeGrid& grid, const CouplingSpec& spec, double T);

class SpectralDuhamelEvolver {
  public:
    SpectralDuhamelEvolver(const GridCoupling& gc, const CouplingSpec& spec, double dt);
    void step(SystemState& Y) const;
    double dt() const { return dt_; }

  private:
    const GridCoupling& gc_;
    double dt_, w2_;
    std::vector<double> cos_, sinow_, mwsin_;  // cos(w dt), sin(w dt)/w, -w sin(w dt)
};

class LeapfrogEvolver {
  public:
    // throws on CFL violation: |dt| * omega_max >= 2
    LeapfrogEvolver(const GridCoupling& gc, const CouplingSpec& spec, double dt);
    void step(SystemState& Y) const;
    double dt() const { return dt_; }

  private:
    const GridCoupling& gc_;
    double dt_, w2_;
};

template <class Evolver, class Observer>
inline void evolve(const Evolver& ev, SystemState& Y, std::size_t n_steps, Observer&& obs) {
    obs(Y, std::size_t{0});
    for (std::size_t s = 1; s <= n_steps; ++s) {
        ev.step(Y);
        obs(Y, s);
    }
}

inline void evolve_steps(const SpectralDuhamelEvolver& ev, SystemState& Y, std::size_t n) {
    for (std::size_t s = 0; s < n; ++s) ev.step(Y);
}

inline void evolve_steps(const LeapfrogEvolver& ev, SystemState& Y, std::size_t n) {
    for (std::size_t s = 0; s < n; ++s) ev.step(Y);
}

}  // namespace fplab
