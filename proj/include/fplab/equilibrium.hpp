#pragma once

// Closed-form limit objects and the Monte-Carlo verdict machinery:
//   - projected observables Pi(Z) = f_* + alpha.u + beta.v built from the
//     resolvent table and the adjoint free flow,
//   - the limit covariance q_B_inf = (q0 + C q0 C^T)/2 per mode and its
//     two-temperature variant,
//   - the limit quadratic form Q_inf(Z1, Z2),
//   - ensemble estimators: covariance convergence, asymptotics in mean,
//     Gibbs invariance, equilibrium mixing, and the two-temperature bulk
//     energy current.

#include <cstdint>
#include <string>
#include <vector>

#include "fplab/dynamics.hpp"
#include "fplab/kernels.hpp"
#include "fplab/mode_grid.hpp"
#include "fplab/random_fields.hpp"
#include "fplab/smallmat.hpp"
#include "fplab/stats.hpp"
#include "fplab/volterra.hpp"

namespace fplab {

struct Observable {
    FieldState f;  // band-limited test pair (zero on self-conjugate modes)
    Vec3 u, v;

    // throws unless f vanishes on self-conjugate modes (and on the zero mode
    // for the wave field, where 1/omega weights appear downstream)
    void validate(const ModeGrid& grid, double mass) const;
};

// <Y, Z> = <phi, f0> + <pi, f1> + q.u + p.v
double pair_observable(const SystemState& Y, const Observable& Z, const ModeGrid& grid);
// <a, b> over field pairs
double pair_field(const FieldState& a, const FieldState& b, const ModeGrid& grid);

struct ResolventWeights {
    // alpha[i], beta[i]: field pairs over modes, i = 0..2
    std::vector<cplx2> alpha[3];
    std::vector<cplx2> beta[3];
    double t_pi = 0.0;            // time-quadrature horizon
    double tail_integral = 0.0;   // bound on int_{T_Pi}^inf |N(s)| ds
};

ResolventWeights resolvent_weights(const ResolventTable& res, const GridCoupling& gc,
                                   FieldKind kind);

struct ProjectedObservable {
    FieldState pi_hat;  // \hat Pi(Z) per mode
    Vec3 u, v;          // kept for bookkeeping
    double truncation_bound = 0.0;
};

ProjectedObservable projected_observable(const Observable& Z, const ResolventWeights& W,
                                         const ResolventTable& res, const GridCoupling& gc);

enum class LimitProvenance { one_temperature, two_temperature };

struct LimitCovariance {
    std::vector<Herm2> q;  // per independent mode
    LimitProvenance provenance = LimitProvenance::one_temperature;
};

// q_B_inf = (q0 + C q0 C^T)/2 evaluated mode-wise (only Im q01 survives).
LimitCovariance limit_field_covariance(const SpectralDensity& q0, const GridCoupling& gc);

// Theorem-level two-temperature limit: diagonal Gibbs at (T+ + T-)/2 plus the
// odd cross term -i sgn(k1) (T+ - T-) / (2 omega) (in the e^{-ikx} transform
// convention used by this code).
LimitCovariance two_temperature_limit_covariance(double T_minus, double T_plus,
                                                 const GridCoupling& gc);

// Q_inf(Z1, Z2) = (1/L^3) sum_k Pi1(k)^dagger q_B_inf(k) Pi2(k)
double limit_form(const ProjectedObservable& P1, const ProjectedObservable& P2,
                  const LimitCovariance& cov, const ModeGrid& grid);

// <W_t phi0, Pi(Z)>: the free-flow pairing used by the asymptotics.
double free_flow_pairing(const FieldState& phi0, const ProjectedObservable& P,
                         const GridCoupling& gc, double t);

// Draw a field from a per-mode Hermitian covariance set.
FieldSample sample_field_cov(const std::vector<Herm2>& cov, const ModeGrid& grid,
                             std::uint64_t seed);

// Sample of the limit measure: field from q_B_inf, particle enslaved through
// the alpha/beta pairings; with field_correction the f_*-direction term of
// Pi is included in the field marginal.
SystemState sample_limit_state(const LimitCovariance& cov, const ResolventWeights& W,
                               const GridCoupling& gc, std::uint64_t seed,
                               bool field_correction);

struct InitialMeasure {
    SpectralDensity field_density;
    ParticleLaw particle_law = ParticleLaw::gibbs_A;
    double particle_T = 1.0;
};

// Evolve an ensemble and record <Y_t, Z> for each observable at each time.
// Returns values[time][observable][member]; deterministic in member order.
std::vector<std::vector<std::vector<double>>> ensemble_pairings(
    const InitialMeasure& mu0, const GridCoupling& gc, const CouplingSpec& spec,
    const std::vector<Observable>& obs, const std::vector<double>& times,
    std::size_t n_members, std::uint64_t base_seed, double dt, unsigned workers = 0);

struct DeviationCurve {
    std::vector<double> times;
    std::vector<Estimate> deviation;  // E |<Y_t,Z> - <W_t phi0, Pi(Z)>|^2
    DecayFit fit;                     // power-law fit on [t_fit_lo, horizon]
};

DeviationCurve asymptotics_check(const InitialMeasure& mu0, const GridCoupling& gc,
                                 const CouplingSpec& spec, const Observable& Z,
                                 const ProjectedObservable& PiZ,
                                 const std::vector<double>& times, std::size_t n_members,
                                 std::uint64_t base_seed, double dt, double t_fit_lo,
                                 unsigned workers = 0);

struct MixingCurve {
    std::vector<double> lags;
    std::vector<Estimate> correlation;  // E_inf <S_t Y, Z1><Y, Z2>
};

MixingCurve mixing_correlation(const LimitCovariance& cov, const ResolventWeights& W,
                               const GridCoupling& gc, const CouplingSpec& spec,
                               const Observable& Z1, const Observable& Z2,
                               const std::vector<double>& lags, std::size_t n_members,
                               std::uint64_t base_seed, double dt, bool field_correction,
                               unsigned workers = 0);

struct InvarianceReport {
    std::vector<double> times;
    std::vector<std::string> moment_names;
    // value[moment][time]: ensemble mean with stderr
    std::vector<std::vector<Estimate>> value;
    // z[moment][time]: paired z-score of value(t) - value(0)
    std::vector<std::vector<double>> z_vs_t0;
    double max_abs_z = 0.0;
    // closed-form targets for Var q_i / Var p_i under the effective Gibbs law
    double var_q_target = 0.0, var_p_target = 0.0;
};

InvarianceReport gibbs_invariance_check(double T, const GridCoupling& gc,
                                        const CouplingSpec& spec,
                                        const std::vector<double>& times,
                                        std::size_t n_members, std::uint64_t base_seed,
                                        double dt, unsigned workers = 0);

struct CurrentReport {
    Estimate flux;            // bulk average of -pi d1 phi (first component)
    double prediction = 0.0;  // -(T+ - T-)/ (2 L^3) sum_k |k1|/omega
    double z_vs_zero = 0.0;
    double z_vs_prediction = 0.0;
    double window_lo = 0.0, window_hi = 0.0;
    double t_late = 0.0;
};

// Free-flow two-temperature ensemble evolved to t_late; the energy current
// is window-averaged over x1 in [window_lo, window_hi] (hot bulk).
CurrentReport energy_current(double T_minus, double T_plus, double a,
                             const ModeGrid& grid, const CouplingSpec& spec,
                             double t_late, double window_lo, double window_hi,
                             std::size_t n_members, std::uint64_t base_seed,
                             unsigned workers = 0);

}  // namespace fplab
