#pragma once

// Time-domain solver for the particle equations with memory:
//   Volterra form:  q'' = -omega0^2 q + int_0^t D(t-s) q_s ds + F(t)
//   Langevin form:  q'' = -(omega0^2 I - K_m) q - int_0^t Gamma(t-s) q'_s ds + F_eff(t)
// both integrated by velocity-Verlet with a trapezoidal memory sum (second
// order; O(n^2) work). The resolvent table N(t) is built by solving the
// homogeneous Volterra equation with canonical initial data, and decay rates
// are measured by least-squares fits of the norm envelope.

#include <functional>
#include <string>
#include <vector>

#include "fplab/kernels.hpp"
#include "fplab/smallmat.hpp"

namespace fplab {

using Forcing = std::function<Vec3(double)>;

struct ParticleTrajectory {
    double dt = 0.0;
    std::vector<Vec3> q_samples;
    std::vector<Vec3> p_samples;
    std::string forcing_id;

    std::size_t n_samples() const { return q_samples.size(); }
    double time_at(std::size_t j) const { return dt * static_cast<double>(j); }
};

struct ResolventTable {
    double dt = 0.0;
    double horizon = 0.0;
    std::vector<Mat3> N_samples;      // N(0) = 0
    std::vector<Mat3> Ndot_samples;   // Ndot(0) = I
    std::vector<Mat3> Nddot_samples;

    std::size_t n_samples() const { return N_samples.size(); }
    // Simpson integrals int_0^T N_ir(s) cos(omega s) ds and the sine
    // counterpart, used by the projected-observable weights.
    Mat3 cos_transform(double omega) const;
    Mat3 sin_transform(double omega) const;
};

// omega0 is taken from `spec`; the memory kernel comes from `table`.
ParticleTrajectory solve_volterra(const KernelTable& table, const CouplingSpec& spec,
                                  const Forcing& F, const Vec3& q0, const Vec3& p0,
                                  double dt, double T);

ParticleTrajectory solve_langevin(const KernelTable& table, const CouplingSpec& spec,
                                  const Forcing& F_eff, const Vec3& q0, const Vec3& p0,
                                  double dt, double T);

ResolventTable resolvent(const KernelTable& table, const CouplingSpec& spec, double dt,
                         double T);

enum class DecayModel { exponential, power };

struct DecayFit {
    double rate_or_exponent = 0.0;  // positive decay rate (exp) or signed exponent (power)
    double r_squared = 0.0;
    std::size_t n_points = 0;
};

// Least-squares fit of log(values) against t (exponential) or log t (power)
// on the window [t1, t2]. Values are floored at 1e-300 before the log.
DecayFit fit_decay(const std::vector<double>& times, const std::vector<double>& values,
                   double t1, double t2, DecayModel model);

// Local maxima of |values|: the oscillation envelope. Decay laws of the
// kernels and resolvents bound the envelope, not the signed samples.
void envelope(const std::vector<double>& times, const std::vector<double>& values,
              std::vector<double>& env_times, std::vector<double>& env_values);

}  // namespace fplab
