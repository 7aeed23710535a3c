#pragma once

// Continuum kernels induced by the coupling: the dissipation kernel D(t),
// the memory kernel Gamma(t), the coupling constant matrix K_m, the Laplace
// symbol A(lambda) = (lambda^2 + omega0^2) I - D_tilde(lambda), and a
// numerical stability scan of A along the imaginary axis.
//
// For radial rho all kernels are scalar multiples of the identity and reduce
// to 1D radial integrals with prefactor 1/(6 pi^2):
//   d(t)     = c int k^4 sin(w t)/w   |rho_hat|^2 dk,   w = sqrt(k^2 + m^2)
//   gamma(t) = c int k^4 cos(w t)/w^2 |rho_hat|^2 dk
//   kappa    = c int k^4 / w^2        |rho_hat|^2 dk    (= gamma(0))
// Large t uses the frequency substitution u = w(k) and zero-split summation.

#include <array>
#include <complex>
#include <string>
#include <vector>

#include "fplab/coupling.hpp"
#include "fplab/smallmat.hpp"

namespace fplab {

struct CMat3 {
    std::array<std::array<cplx, 3>, 3> a{};
    cplx& operator()(int i, int j) { return a[i][j]; }
    cplx operator()(int i, int j) const { return a[i][j]; }
    static CMat3 scaled_identity(cplx s) {
        CMat3 m;
        m(0, 0) = m(1, 1) = m(2, 2) = s;
        return m;
    }
    double max_abs() const {
        double r = 0.0;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) r = std::max(r, std::abs(a[i][j]));
        return r;
    }
};

// Smallest singular value (via the Hermitian eigenproblem of A^dagger A).
double smallest_singular_value(const CMat3& A);

// Radial scalar kernels; matrix ops below wrap them as kappa * I etc.
double radial_kappa(const CouplingSpec& spec, double tol = 1e-10);
double radial_dissipation(const CouplingSpec& spec, double t, double tol = 1e-10);
double radial_memory(const CouplingSpec& spec, double t, double tol = 1e-10);
cplx radial_laplace_dtilde(const CouplingSpec& spec, cplx lambda, double tol = 1e-10);

Mat3 coupling_constant_matrix(const CouplingSpec& spec, double tol = 1e-10);
Mat3 dissipation_kernel(const CouplingSpec& spec, double t, double tol = 1e-10);
Mat3 memory_kernel(const CouplingSpec& spec, double t, double tol = 1e-10);

// A(lambda) for Re lambda != 0, and the boundary value A(i y + 0) on the
// imaginary axis (principal value plus Plemelj residue once |y| > m).
CMat3 laplace_symbol(const CouplingSpec& spec, cplx lambda, double tol = 1e-10);

struct StabilityReport {
    bool stable = false;
    bool marginal_uncoupled = false;  // g = 0: undamped resonance at y = omega0
    bool r1prime_ok = false;          // omega0^2 I - K_m positive definite
    bool kgf_strong_ok = true;        // (omega0^2 - m^2) I - K_m PD (KGF only)
    double margin = 0.0;              // min_y sigma_min(A(iy+0))
    double y_at_min = 0.0;
    double det_A0 = 0.0;              // det(omega0^2 I - K_m)
    double kappa = 0.0;
};

StabilityReport stability_scan(const CouplingSpec& spec, double y_max, int n_scan,
                               double tol = 1e-8);

struct KernelTable {
    double dt = 0.0;
    double horizon = 0.0;  // T_ker
    double quad_tol = 1e-8;
    bool isotropy_flag = true;
    Mat3 Km;
    std::vector<Mat3> D_samples;      // D(j dt), j = 0..n
    std::vector<Mat3> Gamma_samples;  // Gamma(j dt)

    std::size_t n_samples() const { return D_samples.size(); }
    Mat3 D_at(double t) const;      // cubic interpolation between samples
    Mat3 Gamma_at(double t) const;

    // NDJSON stream: a meta record followed by one record per time sample.
    void save_ndjson(const std::string& path) const;
    static KernelTable load_ndjson(const std::string& path);
};

KernelTable build_kernel_table(const CouplingSpec& spec, double dt, double horizon,
                               double quad_tol = 1e-8, unsigned workers = 0);

}  // namespace fplab
