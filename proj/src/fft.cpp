#include "fplab/fft.hpp"

#include <cmath>
#include <stdexcept>

namespace fplab {

bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

namespace {

// Iterative in-place radix-2 FFT on a strided view.
void fft1(cplx* data, int N, std::size_t stride, int sign) {
    // bit reversal
    for (int i = 1, j = 0; i < N; ++i) {
        int bit = N >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(data[i * stride], data[j * stride]);
    }
    for (int len = 2; len <= N; len <<= 1) {
        double ang = sign * 2.0 * 3.14159265358979323846 / len;
        cplx wl(std::cos(ang), std::sin(ang));
        for (int i = 0; i < N; i += len) {
            cplx w(1.0, 0.0);
            for (int j = 0; j < len / 2; ++j) {
                cplx u = data[(i + j) * stride];
                cplx v = data[(i + j + len / 2) * stride] * w;
                data[(i + j) * stride] = u + v;
                data[(i + j + len / 2) * stride] = u - v;
                w *= wl;
            }
        }
    }
}

}  // namespace

void fft3_raw(LatticeArray& data, int N, int sign) {
    if (!is_power_of_two(N)) throw std::invalid_argument("fft3: N must be a power of two");
    const std::size_t n = static_cast<std::size_t>(N);
    if (data.size() != n * n * n) throw std::invalid_argument("fft3: size mismatch");
    // axis 3 (contiguous)
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) fft1(&data[(i * n + j) * n], N, 1, sign);
    // axis 2
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t l = 0; l < n; ++l) fft1(&data[i * n * n + l], N, n, sign);
    // axis 1
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t l = 0; l < n; ++l) fft1(&data[j * n + l], N, n * n, sign);
}

namespace {

// (-1)^(n1+n2+n3) phase from the half-box position offset x = -L/2 + j h.
void apply_alternating_phase(LatticeArray& data, int N) {
    const std::size_t n = static_cast<std::size_t>(N);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            for (std::size_t l = 0; l < n; ++l)
                if ((i + j + l) & 1) data[(i * n + j) * n + l] = -data[(i * n + j) * n + l];
}

}  // namespace

void fourier_to_position(LatticeArray& data, int N, double L) {
    apply_alternating_phase(data, N);
    fft3_raw(data, N, +1);
    const double h = L / N;
    const double scale = 1.0 / (h * h * h) / (static_cast<double>(N) * N * N);
    for (auto& v : data) v *= scale;
}

void position_to_fourier(LatticeArray& data, int N, double L) {
    fft3_raw(data, N, -1);
    const double h = L / N;
    const double scale = h * h * h;
    for (auto& v : data) v *= scale;
    apply_alternating_phase(data, N);
}

LatticeArray expand_modes(const std::vector<cplx>& modes, const ModeGrid& grid) {
    const int N = grid.points_per_axis;
    LatticeArray full(static_cast<std::size_t>(N) * N * N, cplx{0.0, 0.0});
    const int half = N / 2;
    auto neg = [half](int v) { return v == -half ? -half : -v; };
    for (std::size_t i = 0; i < grid.n_modes(); ++i) {
        const auto& n = grid.ntriple[i];
        full[grid.lattice_index(n[0], n[1], n[2])] = modes[i];
        if (!grid.self_conjugate[i])
            full[grid.lattice_index(neg(n[0]), neg(n[1]), neg(n[2]))] = std::conj(modes[i]);
    }
    return full;
}

std::vector<cplx> reduce_modes(const LatticeArray& full, const ModeGrid& grid) {
    std::vector<cplx> modes(grid.n_modes());
    for (std::size_t i = 0; i < grid.n_modes(); ++i) {
        const auto& n = grid.ntriple[i];
        cplx v = full[grid.lattice_index(n[0], n[1], n[2])];
        if (grid.self_conjugate[i]) v = cplx{v.real(), 0.0};  // reality constraint
        modes[i] = v;
    }
    return modes;
}

}  // namespace fplab
