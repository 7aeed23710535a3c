#include "fplab/random_fields.hpp"

#include <cmath>
#include <stdexcept>

#include "fplab/fft.hpp"

namespace fplab {

SpectralDensity gibbs_field_density(double T, const CouplingSpec& spec,
                                    bool include_zero_mode) {
    if (T <= 0.0) throw std::invalid_argument("gibbs_field_density: T must be > 0");
    if (spec.mass == 0.0 && include_zero_mode)
        throw std::invalid_argument("gibbs_field_density: m = 0 with zero mode included");
    SpectralDensity d;
    d.kind = DensityKind::gibbs;
    d.temperature = T;
    double m = spec.mass;
    d.q00 = [T, m](const Vec3& k) {
        double w2 = k.norm2() + m * m;
        return w2 > 0.0 ? T / w2 : 0.0;
    };
    d.q11 = [T](const Vec3&) { return T; };
    d.q01 = nullptr;
    d.exclude_zero_mode = (m == 0.0);
    return d;
}

SpectralDensity generic_density(double a00, double a11, double corr_length) {
    if (a00 < 0.0 || a11 < 0.0 || corr_length <= 0.0)
        throw std::invalid_argument("generic_density: amplitudes >= 0 and corr_length > 0 required");
    SpectralDensity d;
    d.kind = DensityKind::generic;
    double l2 = corr_length * corr_length;
    d.q00 = [a00, l2](const Vec3& k) { return a00 * std::exp(-l2 * k.norm2()); };
    d.q11 = [a11, l2](const Vec3& k) { return a11 * std::exp(-l2 * k.norm2()); };
    d.q01 = nullptr;
    return d;
}

FieldSample sample_field(const SpectralDensity& density, const ModeGrid& grid,
                         std::uint64_t seed) {
    FieldSample sample;
    sample.seed = seed;
    sample.state.resize(grid.n_modes());
    Rng rng(seed);
    const double vol = grid.volume();
    const double sqvol = std::sqrt(vol);
    for (std::size_t i = 0; i < grid.n_modes(); ++i) {
        bool self = grid.self_conjugate[i] != 0;
        Herm2 q = density.at(grid.k[i], self, i == grid.zero_mode_index);
        if (!q.psd(1e-12 * (1.0 + q.q00 + q.q11)))
            throw std::runtime_error("sample_field: spectral density not PSD at a grid mode");
        // Cholesky of [[q00, q01], [conj q01, q11]]
        double l00 = std::sqrt(std::max(0.0, q.q00));
        cplx l10{0.0, 0.0};
        double ls = q.q11;
        if (l00 > 0.0) {
            l10 = std::conj(q.q01) / l00;
            ls = q.q11 - std::norm(l10);
        }
        double l11 = std::sqrt(std::max(0.0, ls));
        if (self) {
            // self-conjugate modes are real with full variance L^3 q
            double z0 = rng.normal();
            double z1 = rng.normal();
            sample.state.phi[i] = cplx{sqvol * l00 * z0, 0.0};
            sample.state.pi[i] = cplx{sqvol * (l10.real() * z0 + l11 * z1), 0.0};
        } else {
            // complex modes: unit-variance complex normals
            const double r = std::sqrt(0.5);
            cplx z0{r * rng.normal(), r * rng.normal()};
            cplx z1{r * rng.normal(), r * rng.normal()};
            sample.state.phi[i] = sqvol * l00 * z0;
            sample.state.pi[i] = sqvol * (l10 * z0 + l11 * z1);
        }
    }
    return sample;
}

namespace {

double smoothstep5(double u) {
    if (u <= 0.0) return 0.0;
    if (u >= 1.0) return 1.0;
    return u * u * u * (10.0 + u * (-15.0 + 6.0 * u));
}

double wrap_box(double x, double L) {
    while (x >= 0.5 * L) x -= L;
    while (x < -0.5 * L) x += L;
    return x;
}

// Weight of the arc centered at c (hot: c = +L/4, cold: c = -L/4) with
// quintic crossfades of half-width a at the arc ends x1 = 0 and x1 = ±L/2.
double arc_weight(double x1, double a, double L, double center) {
    double xi = std::abs(wrap_box(x1 - center, L));
    double r0 = 0.25 * L - a;
    return 1.0 - smoothstep5((xi - r0) / (2.0 * a));
}

}  // namespace

double two_temp_hot_weight(double x1, double a, double L) {
    return arc_weight(x1, a, L, 0.25 * L);
}

double two_temp_cold_weight(double x1, double a, double L) {
    return arc_weight(x1, a, L, -0.25 * L);
}

FieldSample two_temperature_sample(double T_minus, double T_plus, double a,
                                   const ModeGrid& grid, const CouplingSpec& spec,
                                   std::uint64_t seed) {
    if (T_minus <= 0.0 || T_plus <= 0.0)
        throw std::invalid_argument("two_temperature_sample: temperatures must be > 0");
    if (spec.mass <= 0.0)
        throw std::invalid_argument("two_temperature_sample: requires m > 0 (KGF)");
    if (!(2.0 * a < grid.box_length / 4.0))
        throw std::invalid_argument("two_temperature_sample: transition regions overlap after periodization (need 2a < L/4)");
    if (!is_power_of_two(grid.points_per_axis))
        throw std::invalid_argument("two_temperature_sample: grid must be a power of two for the position-space cutoffs");

    const int N = grid.points_per_axis;
    const double L = grid.box_length;
    const double h = L / N;

    SpectralDensity gm = gibbs_field_density(T_minus, spec);
    SpectralDensity gp = gibbs_field_density(T_plus, spec);
    std::uint64_t s = seed;
    std::uint64_t seed_minus = splitmix64(s);
    std::uint64_t seed_plus = splitmix64(s);
    FieldSample cold = sample_field(gm, grid, seed_minus);
    FieldSample hot = sample_field(gp, grid, seed_plus);

    auto combine = [&](const std::vector<cplx>& cold_modes, const std::vector<cplx>& hot_modes) {
        LatticeArray c = expand_modes(cold_modes, grid);
        LatticeArray hx = expand_modes(hot_modes, grid);
        fourier_to_position(c, N, L);
        fourier_to_position(hx, N, L);
        const std::size_t n = static_cast<std::size_t>(N);
        for (std::size_t i = 0; i < n; ++i) {
            double x1 = -0.5 * L + static_cast<double>(i) * h;
            double wc = two_temp_cold_weight(x1, a, L);
            double wh = two_temp_hot_weight(x1, a, L);
            for (std::size_t j = 0; j < n * n; ++j) {
                std::size_t idx = i * n * n + j;
                c[idx] = wc * c[idx] + wh * hx[idx];
            }
        }
        position_to_fourier(c, N, L);
        return reduce_modes(c, grid);
    };

    FieldSample out;
    out.seed = seed;
    out.state.phi = combine(cold.state.phi, hot.state.phi);
    out.state.pi = combine(cold.state.pi, hot.state.pi);
    return out;
}

void sample_particle(ParticleLaw law, double T, const CouplingSpec& spec, const Mat3& Km,
                     Rng& rng, Vec3& q0, Vec3& p0) {
    if (T < 0.0) throw std::invalid_argument("sample_particle: T must be >= 0");
    q0 = Vec3{};
    p0 = Vec3{};
    if (T == 0.0) return;
    double sp = std::sqrt(T);
    if (law == ParticleLaw::gibbs_A) {
        double sq = std::sqrt(T) / spec.omega0;
        for (int i = 0; i < 3; ++i) {
            q0[static_cast<std::size_t>(i)] = sq * rng.normal();
            p0[static_cast<std::size_t>(i)] = sp * rng.normal();
        }
        return;
    }
    Mat3 A = Mat3::scaled_identity(spec.omega0 * spec.omega0) - Km;
    if (!positive_definite(A))
        throw std::invalid_argument("sample_particle: omega0^2 I - K_m is not positive definite");
    Mat3 C = inverse_spd(A) * T;
    // Cholesky of the 3x3 covariance
    Mat3 Lc = Mat3::zero();
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j <= i; ++j) {
            double s = C(i, j);
            for (int k = 0; k < j; ++k) s -= Lc(i, k) * Lc(j, k);
            if (i == j)
                Lc(i, i) = std::sqrt(std::max(0.0, s));
            else
                Lc(i, j) = s / Lc(j, j);
        }
    }
    Vec3 z{rng.normal(), rng.normal(), rng.normal()};
    q0 = Lc * z;
    for (int i = 0; i < 3; ++i) p0[static_cast<std::size_t>(i)] = sp * rng.normal();
}

EmpiricalDensity empirical_spectral_density(const std::vector<FieldSample>& samples,
                                            const ModeGrid& grid) {
    if (samples.size() < 2)
        throw std::invalid_argument("empirical_spectral_density: need at least 2 samples");
    const std::size_t n = grid.n_modes();
    const std::size_t m = samples.size();
    const double vol = grid.volume();
    EmpiricalDensity est;
    est.n_samples = m;
    est.q00.assign(n, 0.0);
    est.q11.assign(n, 0.0);
    est.q01.assign(n, cplx{0.0, 0.0});
    est.se00.assign(n, 0.0);
    est.se11.assign(n, 0.0);
    est.se01.assign(n, 0.0);

    std::vector<double> v00(m), v11(m);
    std::vector<cplx> v01(m);
    double max_var = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t s = 0; s < m; ++s) {
            const auto& f = samples[s].state;
            v00[s] = std::norm(f.phi[i]) / vol;
            v11[s] = std::norm(f.pi[i]) / vol;
            v01[s] = f.phi[i] * std::conj(f.pi[i]) / vol;
        }
        auto e00 = mean_with_stderr(v00);
        auto e11 = mean_with_stderr(v11);
        est.q00[i] = e00.value;
        est.se00[i] = e00.stderr_;
        est.q11[i] = e11.value;
        est.se11[i] = e11.stderr_;
        cplx mu{0.0, 0.0};
        for (const auto& v : v01) mu += v;
        mu /= static_cast<double>(m);
        double var = 0.0;
        for (const auto& v : v01) var += std::norm(v - mu);
        var /= static_cast<double>(m - 1);
        est.q01[i] = mu;
        est.se01[i] = std::sqrt(var / static_cast<double>(m));
        max_var = std::max(max_var, std::max(e00.stderr_, e11.stderr_));
    }
    est.degenerate = (max_var == 0.0);
    return est;
}

}  // namespace fplab
