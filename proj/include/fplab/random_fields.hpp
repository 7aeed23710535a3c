#pragma once

// Gaussian field initial data with prescribed per-mode spectral densities.
// Box normalization: E |phi_hat(k)|^2 / L^3 = q00(k), so (1/L^3)-weighted
// Riemann sums of q_hat reproduce continuum covariances of test pairings.
// Samples are stored on the independent-mode half lattice; Hermitian symmetry
// holds by construction (the -k value IS the stored conjugate).

#include <complex>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "fplab/mode_grid.hpp"
#include "fplab/rng.hpp"
#include "fplab/smallmat.hpp"

namespace fplab {

struct FieldState {
    std::vector<cplx> phi;
    std::vector<cplx> pi;

    void resize(std::size_t n) {
        phi.assign(n, cplx{0.0, 0.0});
        pi.assign(n, cplx{0.0, 0.0});
    }
};

struct FieldSample {
    FieldState state;
    std::uint64_t seed = 0;
};

enum class DensityKind { generic, gibbs, two_temperature };

struct SpectralDensity {
    DensityKind kind = DensityKind::generic;
    std::function<double(const Vec3&)> q00;
    std::function<double(const Vec3&)> q11;
    std::function<cplx(const Vec3&)> q01;  // zero for generic/gibbs
    bool exclude_zero_mode = false;        // infrared regularization (WF Gibbs)
    double temperature = 0.0;              // gibbs
    double t_minus = 0.0, t_plus = 0.0, half_width = 0.0;  // two_temperature

    Herm2 at(const Vec3& k, bool self_conjugate, bool is_zero_mode) const {
        Herm2 q;
        if (is_zero_mode && exclude_zero_mode) return q;
        q.q00 = q00(k);
        q.q11 = q11(k);
        q.q01 = q01 ? q01(k) : cplx{0.0, 0.0};
        if (self_conjugate) q.q01 = cplx{0.0, 0.0};  // real modes carry no phase
        return q;
    }
};

// Gibbs field density: q00 = T / omega(k)^2, q11 = T. For the wave field the
// zero mode is excluded (variance set to zero) as the torus infrared
// regularization; with include_zero_mode forced true and m = 0 this throws.
SpectralDensity gibbs_field_density(double T, const CouplingSpec& spec,
                                    bool include_zero_mode = false);

// Smooth translation-invariant density with gaussian k-profiles.
SpectralDensity generic_density(double a00, double a11, double corr_length);

FieldSample sample_field(const SpectralDensity& density, const ModeGrid& grid,
                         std::uint64_t seed);

// phi_0 = zeta_-(x1) phi_- + zeta_+(x1) phi_+ with independent Gibbs factors
// phi_± at temperatures T∓/T±; quintic smoothstep transitions of half-width a
// at x1 = 0 and (mirrored) at the box seam. Requires a power-of-two grid for
// the position-space multiplication and 2a < L/4.
FieldSample two_temperature_sample(double T_minus, double T_plus, double a,
                                   const ModeGrid& grid, const CouplingSpec& spec,
                                   std::uint64_t seed);

// Smooth partition weights used by the two-temperature construction; exposed
// for the bulk-window bookkeeping of observables.
double two_temp_hot_weight(double x1, double a, double L);
double two_temp_cold_weight(double x1, double a, double L);

enum class ParticleLaw { gibbs_A, gibbs_eff };

// gibbs_A:  q ~ N(0, T/omega0^2 I), p ~ N(0, T I)
// gibbs_eff: q ~ N(0, T (omega0^2 I - Km)^{-1}), p ~ N(0, T I)
void sample_particle(ParticleLaw law, double T, const CouplingSpec& spec, const Mat3& Km,
                     Rng& rng, Vec3& q0, Vec3& p0);

struct EmpiricalDensity {
    std::vector<double> q00, q11;
    std::vector<cplx> q01;
    std::vector<double> se00, se11, se01;
    std::size_t n_samples = 0;
    bool degenerate = false;  // zero-variance estimate (e.g. repeated sample)
};

EmpiricalDensity empirical_spectral_density(const std::vector<FieldSample>& samples,
                                            const ModeGrid& grid);

}  // namespace fplab
