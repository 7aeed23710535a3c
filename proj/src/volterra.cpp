#include "fplab/volterra.hpp"

#include <cmath>
#include <stdexcept>

#include "fplab/stats.hpp"

namespace fplab {

namespace {

void check_grid(const KernelTable& table, double dt, double T) {
    if (dt <= 0.0 || T <= 0.0) throw std::invalid_argument("volterra: dt and T must be positive");
    if (T > table.horizon + 1e-12)
        throw std::invalid_argument("volterra: requested T exceeds kernel table horizon");
}

void check_finite(const Vec3& f, double t) {
    if (!std::isfinite(f.x) || !std::isfinite(f.y) || !std::isfinite(f.z))
        throw std::runtime_error("volterra: non-finite forcing at t=" + std::to_string(t));
}

}  // namespace

ParticleTrajectory solve_volterra(const KernelTable& table, const CouplingSpec& spec,
                                  const Forcing& F, const Vec3& q0, const Vec3& p0,
                                  double dt, double T) {
    check_grid(table, dt, T);
    const auto n = static_cast<std::size_t>(std::lround(T / dt));
    const double w2 = spec.omega0 * spec.omega0;

    // Kernel samples on the solver grid (table grid when aligned, cubic
    // interpolation otherwise).
    std::vector<Mat3> D(n + 1);
    for (std::size_t j = 0; j <= n; ++j) D[j] = table.D_at(static_cast<double>(j) * dt);

    ParticleTrajectory traj;
    traj.dt = dt;
    traj.q_samples.reserve(n + 1);
    traj.p_samples.reserve(n + 1);
    traj.q_samples.push_back(q0);
    traj.p_samples.push_back(p0);

    // Trapezoidal memory: D(0) = 0 exactly, so the newest sample never
    // enters the sum and the update stays explicit.
    auto memory = [&](std::size_t step) {
        Vec3 acc{};
        for (std::size_t j = 1; j < step; ++j) acc += D[step - j] * traj.q_samples[j];
        if (step >= 1) acc += 0.5 * (D[step] * traj.q_samples[0]);
        return acc * dt;
    };

    Vec3 f0 = F(0.0);
    check_finite(f0, 0.0);
    Vec3 a = f0 - w2 * q0;
    for (std::size_t s = 1; s <= n; ++s) {
        const Vec3& qn = traj.q_samples[s - 1];
        const Vec3& pn = traj.p_samples[s - 1];
        Vec3 qn1 = qn + dt * pn + (0.5 * dt * dt) * a;
        traj.q_samples.push_back(qn1);
        double t1 = static_cast<double>(s) * dt;
        Vec3 f1 = F(t1);
        check_finite(f1, t1);
        Vec3 a1 = f1 - w2 * qn1 + memory(s);
        traj.p_samples.push_back(pn + (0.5 * dt) * (a + a1));
        a = a1;
    }
    traj.forcing_id = "volterra";
    return traj;
}

ParticleTrajectory solve_langevin(const KernelTable& table, const CouplingSpec& spec,
                                  const Forcing& F_eff, const Vec3& q0, const Vec3& p0,
                                  double dt, double T) {
    check_grid(table, dt, T);
    const auto n = static_cast<std::size_t>(std::lround(T / dt));
    Mat3 Veff_hess = Mat3::scaled_identity(spec.omega0 * spec.omega0) - table.Km;

    std::vector<Mat3> G(n + 1);
    for (std::size_t j = 0; j <= n; ++j) G[j] = table.Gamma_at(static_cast<double>(j) * dt);

    ParticleTrajectory traj;
    traj.dt = dt;
    traj.q_samples.push_back(q0);
    traj.p_samples.push_back(p0);

    // Memory over the velocity history, excluding the newest sample (handled
    // implicitly: Gamma(0) != 0 couples p_{n+1} back into its own update).
    auto memory_past = [&](std::size_t step) {
        Vec3 acc{};
        for (std::size_t j = 1; j < step; ++j) acc += G[step - j] * traj.p_samples[j];
        if (step >= 1) acc += 0.5 * (G[step] * traj.p_samples[0]);
        return acc * dt;
    };

    // (I + dt^2/4 Gamma(0)) p_{n+1} = rhs
    Mat3 implicit_lhs = Mat3::identity() + (0.25 * dt * dt) * G[0];

    Vec3 f0 = F_eff(0.0);
    check_finite(f0, 0.0);
    Vec3 a = f0 - Veff_hess * q0 - (0.5 * dt) * (G[0] * p0);
    for (std::size_t s = 1; s <= n; ++s) {
        const Vec3& qn = traj.q_samples[s - 1];
        const Vec3& pn = traj.p_samples[s - 1];
        Vec3 qn1 = qn + dt * pn + (0.5 * dt * dt) * a;
        traj.q_samples.push_back(qn1);
        double t1 = static_cast<double>(s) * dt;
        Vec3 f1 = F_eff(t1);
        check_finite(f1, t1);
        Vec3 partial = f1 - Veff_hess * qn1 - memory_past(s);
        Vec3 rhs = pn + (0.5 * dt) * (a + partial);
        Vec3 pn1 = solve3(implicit_lhs, rhs);
        traj.p_samples.push_back(pn1);
        a = partial - (0.5 * dt) * (G[0] * pn1);
    }
    traj.forcing_id = "langevin";
    return traj;
}

ResolventTable resolvent(const KernelTable& table, const CouplingSpec& spec, double dt,
                         double T) {
    check_grid(table, dt, T);
    ResolventTable res;
    res.dt = dt;
    res.horizon = T;
    auto zero_force = [](double) { return Vec3{}; };
    const double w2 = spec.omega0 * spec.omega0;

    std::vector<ParticleTrajectory> cols;
    for (int r = 0; r < 3; ++r) {
        Vec3 p0{};
        p0[static_cast<std::size_t>(r)] = 1.0;
        cols.push_back(solve_volterra(table, spec, zero_force, Vec3{}, p0, dt, T));
    }
    const std::size_t n = cols[0].n_samples();
    res.N_samples.resize(n);
    res.Ndot_samples.resize(n);
    res.Nddot_samples.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
        Mat3 N, Nd;
        for (int r = 0; r < 3; ++r)
            for (int i = 0; i < 3; ++i) {
                N(i, r) = cols[static_cast<std::size_t>(r)].q_samples[j][static_cast<std::size_t>(i)];
                Nd(i, r) = cols[static_cast<std::size_t>(r)].p_samples[j][static_cast<std::size_t>(i)];
            }
        res.N_samples[j] = N;
        res.Ndot_samples[j] = Nd;
    }
    // Nddot from the equation: N'' = -omega0^2 N + int_0^t D(t-s) N(s) ds.
    std::vector<Mat3> D(n);
    for (std::size_t j = 0; j < n; ++j) D[j] = table.D_at(static_cast<double>(j) * dt);
    for (std::size_t s = 0; s < n; ++s) {
        Mat3 mem = Mat3::zero();
        for (std::size_t j = 1; j < s; ++j) mem += D[s - j] * res.N_samples[j];
        if (s >= 1) mem += 0.5 * (D[s] * res.N_samples[0]);
        res.Nddot_samples[s] = Mat3::scaled_identity(-w2) * res.N_samples[s] + dt * mem;
    }
    return res;
}

Mat3 ResolventTable::cos_transform(double omega) const {
    // composite Simpson over the table grid (n odd -> trapezoid tail)
    Mat3 acc = Mat3::zero();
    const std::size_t n = n_samples();
    if (n < 3) return acc;
    std::size_t last = (n % 2 == 1) ? n - 1 : n - 2;
    for (std::size_t j = 0; j <= last; ++j) {
        double w = (j == 0 || j == last) ? 1.0 : (j % 2 == 1 ? 4.0 : 2.0);
        acc += (w * std::cos(omega * dt * static_cast<double>(j))) * N_samples[j];
    }
    acc = (dt / 3.0) * acc;
    if (last != n - 1) {
        acc += (0.5 * dt) *
               (std::cos(omega * dt * static_cast<double>(n - 2)) * N_samples[n - 2] +
                std::cos(omega * dt * static_cast<double>(n - 1)) * N_samples[n - 1]);
    }
    return acc;
}

Mat3 ResolventTable::sin_transform(double omega) const {
    Mat3 acc = Mat3::zero();
    const std::size_t n = n_samples();
    if (n < 3) return acc;
    std::size_t last = (n % 2 == 1) ? n - 1 : n - 2;
    for (std::size_t j = 0; j <= last; ++j) {
        double w = (j == 0 || j == last) ? 1.0 : (j % 2 == 1 ? 4.0 : 2.0);
        acc += (w * std::sin(omega * dt * static_cast<double>(j))) * N_samples[j];
    }
    acc = (dt / 3.0) * acc;
    if (last != n - 1) {
        acc += (0.5 * dt) *
               (std::sin(omega * dt * static_cast<double>(n - 2)) * N_samples[n - 2] +
                std::sin(omega * dt * static_cast<double>(n - 1)) * N_samples[n - 1]);
    }
    return acc;
}

DecayFit fit_decay(const std::vector<double>& times, const std::vector<double>& values,
                   double t1, double t2, DecayModel model) {
    std::vector<double> x, y;
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (times[i] < t1 || times[i] > t2) continue;
        double v = std::max(std::abs(values[i]), 1e-300);
        x.push_back(model == DecayModel::exponential ? times[i] : std::log(times[i]));
        y.push_back(std::log(v));
    }
    if (x.size() < 10) throw std::invalid_argument("fit_decay: degenerate window (fewer than 10 samples)");
    LineFit f = fit_line(x, y);
    DecayFit out;
    out.rate_or_exponent = model == DecayModel::exponential ? -f.slope : f.slope;
    out.r_squared = f.r_squared;
    out.n_points = x.size();
    return out;
}

void envelope(const std::vector<double>& times, const std::vector<double>& values,
              std::vector<double>& env_times, std::vector<double>& env_values) {
    env_times.clear();
    env_values.clear();
    for (std::size_t i = 1; i + 1 < values.size(); ++i) {
        double a = std::abs(values[i - 1]), b = std::abs(values[i]), c = std::abs(values[i + 1]);
        if (b >= a && b >= c && b > 0.0) {
            env_times.push_back(times[i]);
            env_values.push_back(b);
        }
    }
}

}  // namespace fplab
