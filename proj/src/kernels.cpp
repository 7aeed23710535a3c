#include "fplab/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "fplab/parallel.hpp"
#include "fplab/quadrature.hpp"

namespace fplab {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kRadialPrefactor = 1.0 / (6.0 * kPi * kPi);  // (2pi)^-3 * 4pi/3

double sq(double x) { return x * x; }

// Amplitude of the u = omega(k) substituted integrals: k(u)^3 |rho_hat(k)|^2.
double freq_amplitude(const CouplingSpec& spec, double u) {
    double m2 = sq(spec.mass);
    double k2 = u * u - m2;
    if (k2 <= 0.0) return 0.0;
    double k = std::sqrt(k2);
    double rh = spec.rho_hat(k);
    return k * k2 * rh * rh;
}

}  // namespace

double radial_kappa(const CouplingSpec& spec, double tol) {
    spec.validate();
    if (spec.amplitude == 0.0) return 0.0;
    auto f = [&](double k) {
        double rh = spec.rho_hat(k);
        return sq(sq(k)) * rh * rh / (k * k + sq(spec.mass));
    };
    auto r = integrate(f, 0.0, spec.k_cutoff(), tol);
    if (!r.converged)
        throw std::runtime_error("radial_kappa: quadrature did not converge, error estimate " +
                                 std::to_string(r.error));
    return kRadialPrefactor * r.value;
}

double radial_dissipation(const CouplingSpec& spec, double t, double tol) {
    spec.validate();
    if (spec.amplitude == 0.0 || t == 0.0) return 0.0;
    double sign = t < 0.0 ? -1.0 : 1.0;  // D is odd in t
    t = std::abs(t);
    double u_hi = std::sqrt(sq(spec.k_cutoff()) + sq(spec.mass));
    auto r = oscillatory_integral([&](double u) { return freq_amplitude(spec, u); },
                                  spec.mass, u_hi, t, Trig::sin, tol);
    if (!r.converged)
        throw std::runtime_error("radial_dissipation: quadrature did not converge at t=" +
                                 std::to_string(t));
    return sign * kRadialPrefactor * r.value;
}

double radial_memory(const CouplingSpec& spec, double t, double tol) {
    spec.validate();
    if (spec.amplitude == 0.0) return 0.0;
    t = std::abs(t);  // Gamma is even
    double u_hi = std::sqrt(sq(spec.k_cutoff()) + sq(spec.mass));
    auto r = oscillatory_integral([&](double u) { return freq_amplitude(spec, u) / (u * u); },
                                  spec.mass, u_hi, t, Trig::cos, tol);
    if (!r.converged)
        throw std::runtime_error("radial_memory: quadrature did not converge at t=" +
                                 std::to_string(t));
    return kRadialPrefactor * r.value;
}

cplx radial_laplace_dtilde(const CouplingSpec& spec, cplx lambda, double tol) {
    spec.validate();
    if (spec.amplitude == 0.0) return {0.0, 0.0};
    const double m2 = sq(spec.mass);
    const double kcut = spec.k_cutoff();
    if (lambda.real() != 0.0) {
        const cplx l2 = lambda * lambda;
        QuadResult qr;
        cplx v = integrate_complex(
            [&](double k) {
                double rh = spec.rho_hat(k);
                return sq(sq(k)) * rh * rh / (l2 + k * k + m2);
            },
            0.0, kcut, tol, &qr);
        if (!qr.converged) throw std::runtime_error("radial_laplace_dtilde: quadrature did not converge");
        return kRadialPrefactor * v;
    }

    // Boundary value on the imaginary axis, lambda = i y + 0.
    const double y = lambda.imag();
    const double y2 = y * y;
    if (y2 <= m2) {  // below the continuous spectrum: regular integrand
        auto f = [&](double k) {
            double rh = spec.rho_hat(k);
            return sq(sq(k)) * rh * rh / (k * k + m2 - y2);
        };
        auto r = integrate(f, 0.0, kcut, tol);
        if (!r.converged) throw std::runtime_error("radial_laplace_dtilde: PV quadrature did not converge");
        return {kRadialPrefactor * r.value, 0.0};
    }
    const double k0 = std::sqrt(y2 - m2);
    double rh0 = spec.rho_hat(k0);
    double imag_part = -((y > 0.0) ? 1.0 : -1.0) * kPi / 2.0 * k0 * k0 * k0 * rh0 * rh0;
    if (k0 >= kcut) return {0.0, 0.0};  // coupling support exhausted
    // PV int g(k)/(k^2 - k0^2) dk = PV int h(k)/(k - k0) dk, h = g/(k + k0)
    auto h = [&](double k) {
        double rh = spec.rho_hat(k);
        return sq(sq(k)) * rh * rh / (k + k0);
    };
    auto r = principal_value(h, 0.0, kcut, k0, tol);
    if (!r.converged) throw std::runtime_error("radial_laplace_dtilde: PV quadrature did not converge");
    return kRadialPrefactor * cplx{r.value, imag_part};
}

Mat3 coupling_constant_matrix(const CouplingSpec& spec, double tol) {
    return Mat3::scaled_identity(radial_kappa(spec, tol));
}

Mat3 dissipation_kernel(const CouplingSpec& spec, double t, double tol) {
    return Mat3::scaled_identity(radial_dissipation(spec, t, tol));
}

Mat3 memory_kernel(const CouplingSpec& spec, double t, double tol) {
    return Mat3::scaled_identity(radial_memory(spec, t, tol));
}

CMat3 laplace_symbol(const CouplingSpec& spec, cplx lambda, double tol) {
    cplx diag = lambda * lambda + sq(spec.omega0) - radial_laplace_dtilde(spec, lambda, tol);
    return CMat3::scaled_identity(diag);
}

double smallest_singular_value(const CMat3& A) {
    // Hermitian 3x3 B = A^dagger A; smallest eigenvalue by the trigonometric
    // closed form; sigma_min = sqrt(eig_min).
    cplx B[3][3];
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            cplx s{0.0, 0.0};
            for (int k = 0; k < 3; ++k) s += std::conj(A(k, i)) * A(k, j);
            B[i][j] = s;
        }
    double p1 = std::norm(B[0][1]) + std::norm(B[0][2]) + std::norm(B[1][2]);
    double tr = (B[0][0] + B[1][1] + B[2][2]).real();
    if (p1 == 0.0) {
        double mn = std::min({B[0][0].real(), B[1][1].real(), B[2][2].real()});
        return std::sqrt(std::max(0.0, mn));
    }
    double q = tr / 3.0;
    double p2 = sq(B[0][0].real() - q) + sq(B[1][1].real() - q) + sq(B[2][2].real() - q) + 2.0 * p1;
    double p = std::sqrt(p2 / 6.0);
    // det((1/p)(B - qI))/2
    cplx C[3][3];
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) C[i][j] = (B[i][j] - (i == j ? cplx{q, 0.0} : cplx{0.0, 0.0})) / p;
    cplx det = C[0][0] * (C[1][1] * C[2][2] - C[1][2] * C[2][1]) -
               C[0][1] * (C[1][0] * C[2][2] - C[1][2] * C[2][0]) +
               C[0][2] * (C[1][0] * C[2][1] - C[1][1] * C[2][0]);
    double r = std::clamp(det.real() / 2.0, -1.0, 1.0);
    double phi = std::acos(r) / 3.0;
    double eig_min = q + 2.0 * p * std::cos(phi + 2.0 * kPi / 3.0);
    return std::sqrt(std::max(0.0, eig_min));
}

StabilityReport stability_scan(const CouplingSpec& spec, double y_max, int n_scan, double tol) {
    if (n_scan < 100) throw std::invalid_argument("stability_scan: n_scan must be >= 100");
    StabilityReport rep;
    rep.kappa = radial_kappa(spec, tol);
    rep.marginal_uncoupled = (rep.kappa == 0.0);
    double w2 = sq(spec.omega0);
    Mat3 A0 = Mat3::scaled_identity(w2) - Mat3::scaled_identity(rep.kappa);
    rep.det_A0 = A0.det();
    rep.r1prime_ok = positive_definite(A0);
    if (spec.field_kind() == FieldKind::KGF) {
        Mat3 S = Mat3::scaled_identity(w2 - sq(spec.mass) - rep.kappa);
        rep.kgf_strong_ok = positive_definite(S);
    }
    double margin = std::numeric_limits<double>::infinity();
    // Offset grid keeps the uncoupled resonance y = omega0 off the nodes.
    for (int j = 0; j < n_scan; ++j) {
        double y = (j + 0.5) * y_max / n_scan;
        double s = smallest_singular_value(laplace_symbol(spec, cplx{0.0, y}, tol));
        if (s < margin) {
            margin = s;
            rep.y_at_min = y;
        }
    }
    rep.margin = margin;
    rep.stable = rep.margin > 0.0 && rep.r1prime_ok && !rep.marginal_uncoupled;
    return rep;
}

Mat3 KernelTable::D_at(double t) const {
    double sign = 1.0;
    if (t < 0.0) {
        t = -t;
        sign = -1.0;
    }
    double x = t / dt;
    auto n = static_cast<long>(n_samples());
    long j = std::lround(x);
    if (j >= 0 && j < n && std::abs(x - static_cast<double>(j)) < 1e-9)
        return sign * D_samples[static_cast<std::size_t>(j)];
    // 4-point Lagrange interpolation (solver steps that do not divide the
    // table step; documented O(dt^4) interpolation error)
    long i1 = std::clamp(static_cast<long>(std::floor(x)), 1l, n - 3);
    double s = x - static_cast<double>(i1);
    double w0 = -s * (s - 1.0) * (s - 2.0) / 6.0;
    double w1 = (s + 1.0) * (s - 1.0) * (s - 2.0) / 2.0;
    double w2 = -(s + 1.0) * s * (s - 2.0) / 2.0;
    double w3 = (s + 1.0) * s * (s - 1.0) / 6.0;
    auto u = static_cast<std::size_t>(i1);
    return sign * (w0 * D_samples[u - 1] + w1 * D_samples[u] + w2 * D_samples[u + 1] +
                   w3 * D_samples[u + 2]);
}

Mat3 KernelTable::Gamma_at(double t) const {
    t = std::abs(t);
    double x = t / dt;
    auto n = static_cast<long>(n_samples());
    long j = std::lround(x);
    if (j >= 0 && j < n && std::abs(x - static_cast<double>(j)) < 1e-9)
        return Gamma_samples[static_cast<std::size_t>(j)];
    long i1 = std::clamp(static_cast<long>(std::floor(x)), 1l, n - 3);
    double s = x - static_cast<double>(i1);
    double w0 = -s * (s - 1.0) * (s - 2.0) / 6.0;
    double w1 = (s + 1.0) * (s - 1.0) * (s - 2.0) / 2.0;
    double w2 = -(s + 1.0) * s * (s - 2.0) / 2.0;
    double w3 = (s + 1.0) * s * (s - 1.0) / 6.0;
    auto u = static_cast<std::size_t>(i1);
    return w0 * Gamma_samples[u - 1] + w1 * Gamma_samples[u] + w2 * Gamma_samples[u + 1] +
           w3 * Gamma_samples[u + 2];
}

KernelTable build_kernel_table(const CouplingSpec& spec, double dt, double horizon,
                               double quad_tol, unsigned workers) {
    if (dt <= 0.0 || horizon <= 0.0) throw std::invalid_argument("build_kernel_table: dt and horizon must be positive");
    KernelTable table;
    table.dt = dt;
    table.horizon = horizon;
    table.quad_tol = quad_tol;
    table.Km = coupling_constant_matrix(spec, quad_tol);
    auto n = static_cast<std::size_t>(std::lround(horizon / dt)) + 1;
    table.D_samples.resize(n);
    table.Gamma_samples.resize(n);
    parallel_for(
        n,
        [&](std::size_t j) {
            double t = static_cast<double>(j) * dt;
            table.D_samples[j] = dissipation_kernel(spec, t, quad_tol);
            table.Gamma_samples[j] = memory_kernel(spec, t, quad_tol);
        },
        workers);
    table.isotropy_flag = true;  // radial coupling: off-diagonals vanish identically
    return table;
}

void KernelTable::save_ndjson(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("KernelTable::save_ndjson: cannot open " + path);
    nlohmann::json meta = {
        {"record", "kernel_table_meta"},
        {"dt", dt},
        {"horizon", horizon},
        {"quad_tol", quad_tol},
        {"isotropy", isotropy_flag},
        {"n_samples", n_samples()},
    };
    std::vector<double> km;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) km.push_back(Km(i, j));
    meta["Km"] = km;
    out << meta.dump() << "\n";
    out.precision(17);
    for (std::size_t j = 0; j < n_samples(); ++j) {
        nlohmann::json rec;
        rec["t"] = static_cast<double>(j) * dt;
        std::vector<double> d, g;
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c) {
                d.push_back(D_samples[j](r, c));
                g.push_back(Gamma_samples[j](r, c));
            }
        rec["D"] = d;
        rec["Gamma"] = g;
        out << rec.dump() << "\n";
    }
}

KernelTable KernelTable::load_ndjson(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("KernelTable::load_ndjson: cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("KernelTable::load_ndjson: empty file");
    auto meta = nlohmann::json::parse(line);
    KernelTable table;
    table.dt = meta.at("dt").get<double>();
    table.horizon = meta.at("horizon").get<double>();
    table.quad_tol = meta.at("quad_tol").get<double>();
    table.isotropy_flag = meta.at("isotropy").get<bool>();
    auto km = meta.at("Km").get<std::vector<double>>();
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) table.Km(i, j) = km[static_cast<std::size_t>(i * 3 + j)];
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto rec = nlohmann::json::parse(line);
        auto d = rec.at("D").get<std::vector<double>>();
        auto g = rec.at("Gamma").get<std::vector<double>>();
        Mat3 D, G;
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c) {
                D(r, c) = d[static_cast<std::size_t>(r * 3 + c)];
                G(r, c) = g[static_cast<std::size_t>(r * 3 + c)];
            }
        table.D_samples.push_back(D);
        table.Gamma_samples.push_back(G);
    }
    return table;
}

}  // namespace fplab
