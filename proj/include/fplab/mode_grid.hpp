#pragma once

// Fourier lattice of the periodic box [-L/2, L/2)^3: wavevectors
// k = 2 pi n / L with integer n in [-N/2, N/2)^3. Real fields satisfy
// f_hat(-k) = conj(f_hat(k)), so only one representative of each {k, -k}
// pair is stored. Modes fixed by k -> -k (all components 0 or Nyquist) are
// real and carry pair weight 1; all others weight 2.
//
// Discrete transform convention matching coupling.hpp:
//   f_hat(k) = sum_x f(x) exp(-i k.x) h^3   (h = L/N)
//   f(x)     = (1/L^3) sum_k f_hat(k) exp(+i k.x)
// so (1/L^3) sum_k approximates (2 pi)^-3 int dk with mode volume (2pi/L)^3.

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "fplab/coupling.hpp"
#include "fplab/smallmat.hpp"

namespace fplab {

struct ModeGrid {
    double box_length = 48.0;  // L
    int points_per_axis = 48;  // N, even

    // Per independent mode (size n_modes()):
    std::vector<Vec3> k;            // wavevector
    std::vector<double> pair_weight;  // 2 for +-k pairs, 1 for self-conjugate
    std::vector<std::uint8_t> self_conjugate;
    std::vector<std::int32_t> n2;   // integer |n|^2, for dispersion caches
    std::vector<std::array<int, 3>> ntriple;  // integer mode index in [-N/2, N/2)
    std::size_t zero_mode_index = 0;

    ModeGrid(double L, int N) : box_length(L), points_per_axis(N) {
        if (N <= 0 || N % 2 != 0) throw std::invalid_argument("ModeGrid: points_per_axis must be even and positive");
        if (L <= 0.0) throw std::invalid_argument("ModeGrid: box_length must be positive");
        const double dk = 2.0 * 3.14159265358979323846 / L;
        const int half = N / 2;
        // Representative selection: first nonzero component of n (after
        // mapping Nyquist to itself) is positive, scanning n1, n2, n3.
        auto is_rep = [&](int n1, int n2c, int n3) {
            auto neg = [&](int v) { return v == -half ? -half : -v; };
            int m1 = neg(n1), m2 = neg(n2c), m3 = neg(n3);
            if (n1 != m1) return n1 > m1;
            if (n2c != m2) return n2c > m2;
            if (n3 != m3) return n3 > m3;
            return true;  // self-conjugate
        };
        for (int n1 = -half; n1 < half; ++n1)
            for (int n2c = -half; n2c < half; ++n2c)
                for (int n3 = -half; n3 < half; ++n3) {
                    if (!is_rep(n1, n2c, n3)) continue;
                    bool self = (n1 == 0 || n1 == -half) && (n2c == 0 || n2c == -half) &&
                                (n3 == 0 || n3 == -half);
                    if (n1 == 0 && n2c == 0 && n3 == 0) zero_mode_index = k.size();
                    k.push_back({dk * n1, dk * n2c, dk * n3});
                    pair_weight.push_back(self ? 1.0 : 2.0);
                    self_conjugate.push_back(self ? 1 : 0);
                    n2.push_back(n1 * n1 + n2c * n2c + n3 * n3);
                    ntriple.push_back({n1, n2c, n3});
                }
    }

    // Full-lattice flat index of the integer mode triple (wrapped layout).
    std::size_t lattice_index(int n1, int n2c, int n3) const {
        const int N = points_per_axis;
        auto fold = [N](int v) { return v < 0 ? v + N : v; };
        return (static_cast<std::size_t>(fold(n1)) * N + fold(n2c)) * N + fold(n3);
    }

    std::size_t n_modes() const { return k.size(); }
    std::size_t lattice_points() const {
        auto n = static_cast<std::size_t>(points_per_axis);
        return n * n * n;
    }
    double volume() const { return box_length * box_length * box_length; }
    double mode_volume() const {
        double dk = 2.0 * 3.14159265358979323846 / box_length;
        return dk * dk * dk;
    }
    double k_nyquist() const {
        return 3.14159265358979323846 * points_per_axis / box_length;
    }
    double omega_max(double m) const {
        double kn = k_nyquist();
        return std::sqrt(3.0 * kn * kn + m * m);
    }
};

// Per-grid caches that depend on the coupling: dispersion omega(k) and the
// spectral coupling weights c_j(k) = i k_j rho_hat(k) (the transform of
// grad_j rho). The weights vanish on self-conjugate modes, where a real
// lattice field has no odd derivative component.
struct GridCoupling {
    const ModeGrid& grid;
    std::vector<double> omega;     // dispersion per mode
    std::vector<double> rho_hat;   // coupling transform per mode
    std::vector<Vec3> cweight;     // imaginary part of (grad rho)-hat: k_j * rho_hat
    double mass;
    Mat3 km_lattice;               // exact coupling-constant matrix of the lattice

    GridCoupling(const ModeGrid& g, const CouplingSpec& spec) : grid(g), mass(spec.mass) {
        const std::size_t n = g.n_modes();
        omega.resize(n);
        rho_hat.resize(n);
        cweight.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            double k2 = g.k[i].norm2();
            omega[i] = std::sqrt(k2 + spec.mass * spec.mass);
            rho_hat[i] = spec.rho_hat(std::sqrt(k2));
            cweight[i] = g.self_conjugate[i] ? Vec3{} : g.k[i] * rho_hat[i];
        }
        km_lattice = lattice_km();
    }

    // Lattice coupling-constant matrix (1/L^3) sum_k k_i k_j |rho_hat|^2 / omega^2.
    // This is the exact constant of the discretized system; the continuum
    // kernel module computes its continuum counterpart by quadrature.
    Mat3 lattice_km() const {
        Mat3 km;
        const double invV = 1.0 / grid.volume();
        for (std::size_t i = 0; i < grid.n_modes(); ++i) {
            double w = grid.pair_weight[i] * rho_hat[i] * rho_hat[i] / (omega[i] * omega[i]);
            if (grid.self_conjugate[i]) continue;  // cweight zero there
            const Vec3& kv = grid.k[i];
            for (int r = 0; r < 3; ++r)
                for (int c = 0; c < 3; ++c) km(r, c) += w * kv[r] * kv[c] * invV;
        }
        return km;
    }
};

}  // namespace fplab
