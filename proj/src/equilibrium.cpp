#include "fplab/equilibrium.hpp"

#include <cmath>
#include <map>
#include <stdexcept>

#include "fplab/fft.hpp"
#include "fplab/parallel.hpp"

namespace fplab {

void Observable::validate(const ModeGrid& grid, double mass) const {
    if (f.phi.size() != grid.n_modes() || f.pi.size() != grid.n_modes())
        throw std::invalid_argument("Observable: test pair size does not match grid");
    for (std::size_t i = 0; i < grid.n_modes(); ++i) {
        if (grid.self_conjugate[i] && (f.phi[i] != cplx{0.0, 0.0} || f.pi[i] != cplx{0.0, 0.0}))
            throw std::invalid_argument("Observable: test pair must vanish on self-conjugate (Nyquist) modes");
    }
    if (mass == 0.0) {
        std::size_t z = grid.zero_mode_index;
        if (f.phi[z] != cplx{0.0, 0.0} || f.pi[z] != cplx{0.0, 0.0})
            throw std::invalid_argument("Observable: WF test pair must vanish on the zero mode");
    }
}

double pair_field(const FieldState& a, const FieldState& b, const ModeGrid& grid) {
    double acc = 0.0;
    const double invV = 1.0 / grid.volume();
    for (std::size_t i = 0; i < grid.n_modes(); ++i) {
        double re = (a.phi[i] * std::conj(b.phi[i]) + a.pi[i] * std::conj(b.pi[i])).real();
        acc += grid.pair_weight[i] * re;
    }
    return acc * invV;
}

double pair_observable(const SystemState& Y, const Observable& Z, const ModeGrid& grid) {
    return pair_field(Y.field, Z.f, grid) + Y.q.dot(Z.u) + Y.p.dot(Z.v);
}

namespace {

// Per-|n|^2 cache of the resolvent cosine/sine transforms at omega(k).
class TransformCache {
  public:
    TransformCache(const ResolventTable& res) : res_(res) {}

    const std::pair<Mat3, Mat3>& at(std::int32_t n2key, double omega) {
        auto it = cache_.find(n2key);
        if (it != cache_.end()) return it->second;
        auto r = cache_.emplace(n2key, std::make_pair(res_.cos_transform(omega),
                                                      res_.sin_transform(omega)));
        return r.first->second;
    }

  private:
    const ResolventTable& res_;
    std::map<std::int32_t, std::pair<Mat3, Mat3>> cache_;
};

double fitted_tail_integral(const ResolventTable& res, FieldKind kind) {
    // Bound |N(s)| <= C eps_F(s) with C fitted on the last quarter of the
    // table, then integrate eps_F beyond the horizon.
    const std::size_t n = res.n_samples();
    if (n < 8) return 0.0;
    double T = res.horizon;
    double C = 0.0;
    double delta = 0.0;
    if (kind == FieldKind::WF) {
        // effective exponential rate from the envelope over the last half
        std::vector<double> times, norms;
        for (std::size_t j = n / 2; j < n; ++j) {
            times.push_back(res.dt * static_cast<double>(j));
            norms.push_back(res.N_samples[j].norm());
        }
        std::vector<double> et, ev;
        envelope(times, norms, et, ev);
        if (ev.size() < 4) {
            delta = 0.1;
        } else {
            std::vector<double> ly(ev.size());
            for (std::size_t i = 0; i < ev.size(); ++i) ly[i] = std::log(std::max(ev[i], 1e-300));
            delta = std::max(1e-3, -fit_line(et, ly).slope);
        }
        for (std::size_t j = 3 * n / 4; j < n; ++j) {
            double t = res.dt * static_cast<double>(j);
            C = std::max(C, res.N_samples[j].norm() / std::exp(-delta * t));
        }
        return C * std::exp(-delta * T) / delta;
    }
    for (std::size_t j = 3 * n / 4; j < n; ++j) {
        double t = res.dt * static_cast<double>(j);
        C = std::max(C, res.N_samples[j].norm() * std::pow(1.0 + t, 1.5));
    }
    return C * 2.0 / std::sqrt(1.0 + T);
}

}  // namespace

ResolventWeights resolvent_weights(const ResolventTable& res, const GridCoupling& gc,
                                   FieldKind kind) {
    const ModeGrid& grid = gc.grid;
    const std::size_t n = grid.n_modes();
    ResolventWeights W;
    W.t_pi = res.horizon;
    W.tail_integral = fitted_tail_integral(res, kind);
    for (int i = 0; i < 3; ++i) {
        W.alpha[i].assign(n, cplx2{});
        W.beta[i].assign(n, cplx2{});
    }
    TransformCache cache(res);
    for (std::size_t m = 0; m < n; ++m) {
        const Vec3& cw = gc.cweight[m];
        if (cw.x == 0.0 && cw.y == 0.0 && cw.z == 0.0) continue;
        double w = gc.omega[m];
        const auto& [Nc, Ns] = cache.at(grid.n2[m], w);
        Vec3 Ac = Nc * cw;
        Vec3 As = Ns * cw;
        for (int i = 0; i < 3; ++i) {
            auto ii = static_cast<std::size_t>(i);
            // alpha_i = i (Nc cw)_i on phi, -i (Ns cw)_i / w on pi
            W.alpha[i][m].c0 = cplx{0.0, Ac[ii]};
            W.alpha[i][m].c1 = cplx{0.0, -As[ii] / w};
            // beta_i = i w (Ns cw)_i on phi, i (Nc cw)_i on pi
            W.beta[i][m].c0 = cplx{0.0, w * As[ii]};
            W.beta[i][m].c1 = cplx{0.0, Ac[ii]};
        }
    }
    return W;
}

ProjectedObservable projected_observable(const Observable& Z, const ResolventWeights& W,
                                         const ResolventTable& res, const GridCoupling& gc) {
    const ModeGrid& grid = gc.grid;
    const std::size_t n = grid.n_modes();
    ProjectedObservable P;
    P.u = Z.u;
    P.v = Z.v;
    P.pi_hat.resize(n);

    // c_i(s) = <W_s grad_i rho^0, f> on the resolvent time grid
    const std::size_t ns = res.n_samples();
    std::vector<std::array<double, 3>> c(ns, {0.0, 0.0, 0.0});
    const double invV = 1.0 / grid.volume();
    bool f_nonzero = false;
    for (std::size_t m = 0; m < n; ++m)
        if (Z.f.phi[m] != cplx{0.0, 0.0} || Z.f.pi[m] != cplx{0.0, 0.0}) {
            f_nonzero = true;
            break;
        }
    if (f_nonzero) {
        for (std::size_t s = 0; s < ns; ++s) {
            double t = res.dt * static_cast<double>(s);
            double acc[3] = {0.0, 0.0, 0.0};
            for (std::size_t m = 0; m < n; ++m) {
                const Vec3& cw = gc.cweight[m];
                if (cw.x == 0.0 && cw.y == 0.0 && cw.z == 0.0) continue;
                double w = gc.omega[m];
                double proj = (std::sin(w * t) / w) * Z.f.phi[m].imag() +
                              std::cos(w * t) * Z.f.pi[m].imag();
                proj *= grid.pair_weight[m] * invV;
                acc[0] += proj * cw.x;
                acc[1] += proj * cw.y;
                acc[2] += proj * cw.z;
            }
            for (int i = 0; i < 3; ++i) c[s][static_cast<std::size_t>(i)] = acc[i];
        }
    }

    // Simpson integrals of c_i against cos/sin(omega s), cached per |n|^2.
    std::map<std::int32_t, std::array<double, 6>> cs_cache;
    auto cs_at = [&](std::int32_t key, double w) -> const std::array<double, 6>& {
        auto it = cs_cache.find(key);
        if (it != cs_cache.end()) return it->second;
        std::array<double, 6> out{};
        std::size_t last = (ns % 2 == 1) ? ns - 1 : ns - 2;
        for (std::size_t s = 0; s <= last; ++s) {
            double simw = (s == 0 || s == last) ? 1.0 : (s % 2 == 1 ? 4.0 : 2.0);
            double t = res.dt * static_cast<double>(s);
            double cosv = std::cos(w * t), sinv = std::sin(w * t);
            for (int i = 0; i < 3; ++i) {
                out[static_cast<std::size_t>(2 * i)] += simw * c[s][static_cast<std::size_t>(i)] * cosv;
                out[static_cast<std::size_t>(2 * i + 1)] += simw * c[s][static_cast<std::size_t>(i)] * sinv;
            }
        }
        for (auto& v : out) v *= res.dt / 3.0;
        if (last != ns - 1) {
            for (std::size_t s = ns - 2; s < ns; ++s) {
                double t = res.dt * static_cast<double>(s);
                for (int i = 0; i < 3; ++i) {
                    out[static_cast<std::size_t>(2 * i)] +=
                        0.5 * res.dt * c[s][static_cast<std::size_t>(i)] * std::cos(w * t);
                    out[static_cast<std::size_t>(2 * i + 1)] +=
                        0.5 * res.dt * c[s][static_cast<std::size_t>(i)] * std::sin(w * t);
                }
            }
        }
        return cs_cache.emplace(key, out).first->second;
    };

    double max_weight = 0.0;
    for (std::size_t m = 0; m < n; ++m) {
        cplx2 acc;
        acc.c0 = Z.f.phi[m];
        acc.c1 = Z.f.pi[m];
        for (int i = 0; i < 3; ++i) {
            auto ii = static_cast<std::size_t>(i);
            acc.c0 += W.alpha[i][m].c0 * Z.u[ii] + W.beta[i][m].c0 * Z.v[ii];
            acc.c1 += W.alpha[i][m].c1 * Z.u[ii] + W.beta[i][m].c1 * Z.v[ii];
        }
        if (f_nonzero) {
            const Vec3& cw = gc.cweight[m];
            if (!(cw.x == 0.0 && cw.y == 0.0 && cw.z == 0.0)) {
                double w = gc.omega[m];
                const auto& cs = cs_at(grid.n2[m], w);
                // f_* correction: sum_i [[C_i, w S_i], [-S_i/w, C_i]] alpha_i
                for (int i = 0; i < 3; ++i) {
                    double Ci = cs[static_cast<std::size_t>(2 * i)];
                    double Si = cs[static_cast<std::size_t>(2 * i + 1)];
                    const cplx2& al = W.alpha[i][m];
                    acc.c0 += Ci * al.c0 + (w * Si) * al.c1;
                    acc.c1 += (-Si / w) * al.c0 + Ci * al.c1;
                }
            }
        }
        P.pi_hat.phi[m] = acc.c0;
        P.pi_hat.pi[m] = acc.c1;
        max_weight = std::max(max_weight, std::max(std::abs(acc.c0), std::abs(acc.c1)));
    }
    // tail of the s-integrals, proportional to the fitted resolvent tail
    double cw_scale = 0.0;
    for (std::size_t m = 0; m < n; ++m) cw_scale = std::max(cw_scale, gc.cweight[m].norm());
    double unorm = std::sqrt(Z.u.norm2() + Z.v.norm2());
    P.truncation_bound = W.tail_integral * cw_scale * (unorm + (f_nonzero ? 1.0 : 0.0));
    return P;
}

LimitCovariance limit_field_covariance(const SpectralDensity& q0, const GridCoupling& gc) {
    const ModeGrid& grid = gc.grid;
    LimitCovariance cov;
    cov.provenance = LimitProvenance::one_temperature;
    cov.q.resize(grid.n_modes());
    for (std::size_t i = 0; i < grid.n_modes(); ++i) {
        double w = gc.omega[i];
        bool zero = (i == grid.zero_mode_index);
        if (w == 0.0) {
            cov.q[i] = Herm2{};  // WF zero mode regularized to zero
            continue;
        }
        Herm2 in = q0.at(grid.k[i], grid.self_conjugate[i] != 0, zero);
        Herm2 out;
        out.q00 = 0.5 * (in.q00 + in.q11 / (w * w));
        out.q11 = 0.5 * (in.q11 + w * w * in.q00);
        out.q01 = cplx{0.0, in.q01.imag()};
        cov.q[i] = out;
    }
    return cov;
}

LimitCovariance two_temperature_limit_covariance(double T_minus, double T_plus,
                                                 const GridCoupling& gc) {
    const ModeGrid& grid = gc.grid;
    LimitCovariance cov;
    cov.provenance = LimitProvenance::two_temperature;
    cov.q.resize(grid.n_modes());
    const double Tbar = 0.5 * (T_plus + T_minus);
    const double dT = 0.5 * (T_plus - T_minus);
    for (std::size_t i = 0; i < grid.n_modes(); ++i) {
        double w = gc.omega[i];
        if (w == 0.0) {
            cov.q[i] = Herm2{};
            continue;
        }
        Herm2 out;
        out.q00 = Tbar / (w * w);
        out.q11 = Tbar;
        double k1 = grid.k[i].x;
        double sgn = (k1 > 0.0) - (k1 < 0.0);
        if (!grid.self_conjugate[i] && sgn != 0.0)
            out.q01 = cplx{0.0, -sgn * dT / w};  // e^{-ikx}-convention sign
        cov.q[i] = out;
    }
    return cov;
}

double limit_form(const ProjectedObservable& P1, const ProjectedObservable& P2,
                  const LimitCovariance& cov, const ModeGrid& grid) {
    if (cov.q.size() != grid.n_modes()) throw std::invalid_argument("limit_form: grid mismatch");
    double acc = 0.0;
    const double invV = 1.0 / grid.volume();
    for (std::size_t i = 0; i < grid.n_modes(); ++i) {
        cplx2 a{P1.pi_hat.phi[i], P1.pi_hat.pi[i]};
        cplx2 b{P2.pi_hat.phi[i], P2.pi_hat.pi[i]};
        acc += grid.pair_weight[i] * herm_quad(a, cov.q[i], b).real();
    }
    return acc * invV;
}

double free_flow_pairing(const FieldState& phi0, const ProjectedObservable& P,
                         const GridCoupling& gc, double t) {
    const ModeGrid& grid = gc.grid;
    double acc = 0.0;
    const double invV = 1.0 / grid.volume();
    for (std::size_t i = 0; i < grid.n_modes(); ++i) {
        double w = gc.omega[i];
        cplx e0, e1;
        if (w == 0.0) {
            e0 = phi0.phi[i] + t * phi0.pi[i];
            e1 = phi0.pi[i];
        } else {
            double cs = std::cos(w * t), sn = std::sin(w * t);
            e0 = cs * phi0.phi[i] + (sn / w) * phi0.pi[i];
            e1 = -w * sn * phi0.phi[i] + cs * phi0.pi[i];
        }
        acc += grid.pair_weight[i] *
               (e0 * std::conj(P.pi_hat.phi[i]) + e1 * std::conj(P.pi_hat.pi[i])).real();
    }
    return acc * invV;
}

FieldSample sample_field_cov(const std::vector<Herm2>& cov, const ModeGrid& grid,
                             std::uint64_t seed) {
    if (cov.size() != grid.n_modes()) throw std::invalid_argument("sample_field_cov: grid mismatch");
    FieldSample sample;
    sample.seed = seed;
    sample.state.resize(grid.n_modes());
    Rng rng(seed);
    const double sqvol = std::sqrt(grid.volume());
    for (std::size_t i = 0; i < grid.n_modes(); ++i) {
        const Herm2& q = cov[i];
        if (!q.psd(1e-12 * (1.0 + q.q00 + q.q11)))
            throw std::runtime_error("sample_field_cov: covariance not PSD at a mode");
        double l00 = std::sqrt(std::max(0.0, q.q00));
        cplx l10{0.0, 0.0};
        double ls = q.q11;
        if (l00 > 0.0) {
            l10 = std::conj(q.q01) / l00;
            ls = q.q11 - std::norm(l10);
        }
        double l11 = std::sqrt(std::max(0.0, ls));
        if (grid.self_conjugate[i]) {
            double z0 = rng.normal(), z1 = rng.normal();
            sample.state.phi[i] = cplx{sqvol * l00 * z0, 0.0};
            sample.state.pi[i] = cplx{sqvol * (l10.real() * z0 + l11 * z1), 0.0};
        } else {
            const double r = std::sqrt(0.5);
            cplx z0{r * rng.normal(), r * rng.normal()};
            cplx z1{r * rng.normal(), r * rng.normal()};
            sample.state.phi[i] = sqvol * l00 * z0;
            sample.state.pi[i] = sqvol * (l10 * z0 + l11 * z1);
        }
    }
    return sample;
}

SystemState sample_limit_state(const LimitCovariance& cov, const ResolventWeights& W,
                               const GridCoupling& gc, std::uint64_t seed,
                               bool field_correction) {
    const ModeGrid& grid = gc.grid;
    FieldSample f = sample_field_cov(cov.q, grid, seed);
    SystemState Y;
    Y.field = f.state;
    for (int i = 0; i < 3; ++i) {
        FieldState a, b;
        a.phi.assign(grid.n_modes(), cplx{});
        a.pi.assign(grid.n_modes(), cplx{});
        b = a;
        for (std::size_t m = 0; m < grid.n_modes(); ++m) {
            a.phi[m] = W.alpha[i][m].c0;
            a.pi[m] = W.alpha[i][m].c1;
            b.phi[m] = W.beta[i][m].c0;
            b.pi[m] = W.beta[i][m].c1;
        }
        Y.q[static_cast<std::size_t>(i)] = pair_field(f.state, a, grid);
        Y.p[static_cast<std::size_t>(i)] = pair_field(f.state, b, grid);
    }
    if (field_correction) {
        // field part gains sum_i int_0^T <W_{-s} phi, alpha_i> W_s grad_i rho^0 ds
        const double ds = 0.1;
        const auto nsteps = static_cast<std::size_t>(std::lround(W.t_pi / ds));
        const double invV = 1.0 / grid.volume();
        std::vector<std::array<double, 3>> ct(nsteps + 1);
        for (std::size_t s = 0; s <= nsteps; ++s) {
            double t = ds * static_cast<double>(s);
            double acc[3] = {0.0, 0.0, 0.0};
            for (std::size_t m = 0; m < grid.n_modes(); ++m) {
                double w = gc.omega[m];
                if (w == 0.0) continue;
                double cs = std::cos(w * t), sn = std::sin(w * t);
                cplx e0 = cs * f.state.phi[m] - (sn / w) * f.state.pi[m];
                cplx e1 = w * sn * f.state.phi[m] + cs * f.state.pi[m];
                double pw = grid.pair_weight[m] * invV;
                for (int i = 0; i < 3; ++i) {
                    acc[static_cast<std::size_t>(i)] +=
                        pw * (e0 * std::conj(W.alpha[i][m].c0) + e1 * std::conj(W.alpha[i][m].c1)).real();
                }
            }
            for (int i = 0; i < 3; ++i) ct[s][static_cast<std::size_t>(i)] = acc[i];
        }
        // Simpson transforms of ct against sin/cos(omega s), cached by |n|^2
        std::map<std::int32_t, std::array<double, 6>> cache;
        auto at = [&](std::int32_t key, double w) -> const std::array<double, 6>& {
            auto it = cache.find(key);
            if (it != cache.end()) return it->second;
            std::array<double, 6> out{};
            std::size_t last = (nsteps % 2 == 0) ? nsteps : nsteps - 1;
            for (std::size_t s = 0; s <= last; ++s) {
                double simw = (s == 0 || s == last) ? 1.0 : (s % 2 == 1 ? 4.0 : 2.0);
                double t = ds * static_cast<double>(s);
                double cv = std::cos(w * t), sv = std::sin(w * t);
                for (int i = 0; i < 3; ++i) {
                    out[static_cast<std::size_t>(2 * i)] += simw * ct[s][static_cast<std::size_t>(i)] * cv;
                    out[static_cast<std::size_t>(2 * i + 1)] += simw * ct[s][static_cast<std::size_t>(i)] * sv;
                }
            }
            for (auto& v : out) v *= ds / 3.0;
            return cache.emplace(key, out).first->second;
        };
        for (std::size_t m = 0; m < grid.n_modes(); ++m) {
            const Vec3& cw = gc.cweight[m];
            if (cw.x == 0.0 && cw.y == 0.0 && cw.z == 0.0) continue;
            double w = gc.omega[m];
            const auto& tr = at(grid.n2[m], w);
            double sphi = 0.0, spi = 0.0;
            for (int i = 0; i < 3; ++i) {
                double Ci = tr[static_cast<std::size_t>(2 * i)];
                double Si = tr[static_cast<std::size_t>(2 * i + 1)];
                sphi += cw[static_cast<std::size_t>(i)] * Si / w;
                spi += cw[static_cast<std::size_t>(i)] * Ci;
            }
            Y.field.phi[m] += cplx{0.0, sphi};
            Y.field.pi[m] += cplx{0.0, spi};
        }
    }
    return Y;
}

std::vector<std::vector<std::vector<double>>> ensemble_pairings(
    const InitialMeasure& mu0, const GridCoupling& gc, const CouplingSpec& spec,
    const std::vector<Observable>& obs, const std::vector<double>& times,
    std::size_t n_members, std::uint64_t base_seed, double dt, unsigned workers) {
    const ModeGrid& grid = gc.grid;
    for (const auto& Z : obs) Z.validate(grid, spec.mass);
    std::vector<std::vector<std::vector<double>>> out(
        times.size(), std::vector<std::vector<double>>(obs.size(), std::vector<double>(n_members, 0.0)));
    parallel_for(
        n_members,
        [&](std::size_t mem) {
            std::uint64_t seed = member_seed(base_seed, mem);
            FieldSample f = sample_field(mu0.field_density, grid, seed);
            SystemState Y;
            Y.field = f.state;
            Rng prng(member_seed(base_seed ^ 0x5151515151515151ull, mem));
            sample_particle(mu0.particle_law, mu0.particle_T, spec, gc.km_lattice, prng, Y.q, Y.p);
            SpectralDuhamelEvolver ev(gc, spec, dt);
            double t_now = 0.0;
            for (std::size_t ti = 0; ti < times.size(); ++ti) {
                auto steps = static_cast<std::size_t>(std::lround((times[ti] - t_now) / dt));
                evolve_steps(ev, Y, steps);
                t_now += static_cast<double>(steps) * dt;
                for (std::size_t zi = 0; zi < obs.size(); ++zi)
                    out[ti][zi][mem] = pair_observable(Y, obs[zi], grid);
            }
        },
        workers);
    return out;
}

DeviationCurve asymptotics_check(const InitialMeasure& mu0, const GridCoupling& gc,
                                 const CouplingSpec& spec, const Observable& Z,
                                 const ProjectedObservable& PiZ,
                                 const std::vector<double>& times, std::size_t n_members,
                                 std::uint64_t base_seed, double dt, double t_fit_lo,
                                 unsigned workers) {
    const ModeGrid& grid = gc.grid;
    std::vector<std::vector<double>> r2(times.size(), std::vector<double>(n_members, 0.0));
    parallel_for(
        n_members,
        [&](std::size_t mem) {
            std::uint64_t seed = member_seed(base_seed, mem);
            FieldSample f = sample_field(mu0.field_density, grid, seed);
            SystemState Y;
            Y.field = f.state;
            Rng prng(member_seed(base_seed ^ 0x5151515151515151ull, mem));
            sample_particle(mu0.particle_law, mu0.particle_T, spec, gc.km_lattice, prng, Y.q, Y.p);
            FieldState phi0 = f.state;
            SpectralDuhamelEvolver ev(gc, spec, dt);
            double t_now = 0.0;
            for (std::size_t ti = 0; ti < times.size(); ++ti) {
                auto steps = static_cast<std::size_t>(std::lround((times[ti] - t_now) / dt));
                evolve_steps(ev, Y, steps);
                t_now += static_cast<double>(steps) * dt;
                double r = pair_observable(Y, Z, grid) - free_flow_pairing(phi0, PiZ, gc, t_now);
                r2[ti][mem] = r * r;
            }
        },
        workers);
    DeviationCurve curve;
    curve.times = times;
    std::vector<double> ft, fv;
    for (std::size_t ti = 0; ti < times.size(); ++ti) {
        curve.deviation.push_back(mean_with_stderr(r2[ti]));
        if (times[ti] >= t_fit_lo && curve.deviation.back().value > 0.0) {
            ft.push_back(times[ti]);
            fv.push_back(curve.deviation.back().value);
        }
    }
    if (ft.size() >= 10) {
        curve.fit = fit_decay(ft, fv, ft.front(), ft.back(), DecayModel::power);
    } else if (ft.size() >= 2) {
        std::vector<double> lx(ft.size()), ly(ft.size());
        for (std::size_t i = 0; i < ft.size(); ++i) {
            lx[i] = std::log(ft[i]);
            ly[i] = std::log(std::max(fv[i], 1e-300));
        }
        LineFit lf = fit_line(lx, ly);
        curve.fit.rate_or_exponent = lf.slope;
        curve.fit.r_squared = lf.r_squared;
        curve.fit.n_points = ft.size();
    }
    return curve;
}

MixingCurve mixing_correlation(const LimitCovariance& cov, const ResolventWeights& W,
                               const GridCoupling& gc, const CouplingSpec& spec,
                               const Observable& Z1, const Observable& Z2,
                               const std::vector<double>& lags, std::size_t n_members,
                               std::uint64_t base_seed, double dt, bool field_correction,
                               unsigned workers) {
    const ModeGrid& grid = gc.grid;
    Z1.validate(grid, spec.mass);
    Z2.validate(grid, spec.mass);
    std::vector<std::vector<double>> prod(lags.size(), std::vector<double>(n_members, 0.0));
    parallel_for(
        n_members,
        [&](std::size_t mem) {
            std::uint64_t seed = member_seed(base_seed, mem);
            SystemState Y = sample_limit_state(cov, W, gc, seed, field_correction);
            double b = pair_observable(Y, Z2, grid);
            SpectralDuhamelEvolver ev(gc, spec, dt);
            double t_now = 0.0;
            for (std::size_t li = 0; li < lags.size(); ++li) {
                auto steps = static_cast<std::size_t>(std::lround((lags[li] - t_now) / dt));
                evolve_steps(ev, Y, steps);
                t_now += static_cast<double>(steps) * dt;
                prod[li][mem] = pair_observable(Y, Z1, grid) * b;
            }
        },
        workers);
    MixingCurve curve;
    curve.lags = lags;
    for (auto& row : prod) curve.correlation.push_back(mean_with_stderr(row));
    return curve;
}

InvarianceReport gibbs_invariance_check(double T, const GridCoupling& gc,
                                        const CouplingSpec& spec,
                                        const std::vector<double>& times,
                                        std::size_t n_members, std::uint64_t base_seed,
                                        double dt, unsigned workers) {
    const ModeGrid& grid = gc.grid;
    // five tracked low modes (skip the zero mode)
    std::vector<std::size_t> tracked;
    for (std::size_t i = 0; i < grid.n_modes() && tracked.size() < 5; ++i) {
        if (i == grid.zero_mode_index || grid.self_conjugate[i]) continue;
        if (grid.n2[i] >= 1 && grid.n2[i] <= 3) tracked.push_back(i);
    }
    InvarianceReport rep;
    rep.times = times;
    rep.moment_names = {"qx2", "qy2", "qz2", "px2", "py2", "pz2"};
    for (std::size_t j = 0; j < tracked.size(); ++j)
        rep.moment_names.push_back("mode" + std::to_string(j) + "_phi2");
    rep.moment_names.push_back("energy");
    const std::size_t n_mom = rep.moment_names.size();

    std::vector<std::vector<std::vector<double>>> raw(
        times.size(), std::vector<std::vector<double>>(n_mom, std::vector<double>(n_members, 0.0)));

    SpectralDensity gibbs = gibbs_field_density(T, spec);
    const double vol = grid.volume();
    parallel_for(
        n_members,
        [&](std::size_t mem) {
            // field Gibbs in the psi variables, particle from the effective
            // Gibbs law (lattice K_m), mapped back by the inverse T-map
            std::uint64_t seed = member_seed(base_seed, mem);
            FieldSample psi = sample_field(gibbs, grid, seed);
            SystemState Y;
            Y.field = psi.state;
            Rng prng(member_seed(base_seed ^ 0xA5A5A5A5A5A5A5A5ull, mem));
            sample_particle(ParticleLaw::gibbs_eff, T, spec, gc.km_lattice, prng, Y.q, Y.p);
            Y = t_map_inverse(Y, gc);
            SpectralDuhamelEvolver ev(gc, spec, dt);
            double t_now = 0.0;
            for (std::size_t ti = 0; ti < times.size(); ++ti) {
                auto steps = static_cast<std::size_t>(std::lround((times[ti] - t_now) / dt));
                evolve_steps(ev, Y, steps);
                t_now += static_cast<double>(steps) * dt;
                std::size_t m = 0;
                for (int c = 0; c < 3; ++c) raw[ti][m++][mem] = Y.q[static_cast<std::size_t>(c)] * Y.q[static_cast<std::size_t>(c)];
                for (int c = 0; c < 3; ++c) raw[ti][m++][mem] = Y.p[static_cast<std::size_t>(c)] * Y.p[static_cast<std::size_t>(c)];
                for (std::size_t j = 0; j < tracked.size(); ++j)
                    raw[ti][m++][mem] = std::norm(Y.field.phi[tracked[j]]) / vol;
                raw[ti][m][mem] = hamiltonian(Y, gc, spec).H_total;
            }
        },
        workers);

    rep.value.assign(n_mom, std::vector<Estimate>(times.size()));
    rep.z_vs_t0.assign(n_mom, std::vector<double>(times.size(), 0.0));
    for (std::size_t m = 0; m < n_mom; ++m) {
        for (std::size_t ti = 0; ti < times.size(); ++ti) {
            rep.value[m][ti] = mean_with_stderr(raw[ti][m]);
            if (ti == 0) continue;
            std::vector<double> diff(n_members);
            for (std::size_t s = 0; s < n_members; ++s) diff[s] = raw[ti][m][s] - raw[0][m][s];
            auto d = mean_with_stderr(diff);
            double z = d.stderr_ > 0.0 ? d.value / d.stderr_ : 0.0;
            rep.z_vs_t0[m][ti] = z;
            rep.max_abs_z = std::max(rep.max_abs_z, std::abs(z));
        }
    }
    Mat3 Aeff = Mat3::scaled_identity(spec.omega0 * spec.omega0) - gc.km_lattice;
    rep.var_q_target = T * inverse_spd(Aeff)(0, 0);
    rep.var_p_target = T;
    return rep;
}

CurrentReport energy_current(double T_minus, double T_plus, double a,
                             const ModeGrid& grid, const CouplingSpec& spec,
                             double t_late, double window_lo, double window_hi,
                             std::size_t n_members, std::uint64_t base_seed,
                             unsigned workers) {
    const int N = grid.points_per_axis;
    const double L = grid.box_length;
    if (!(window_lo > a && window_hi < 0.5 * L - a && window_lo < window_hi))
        throw std::invalid_argument("energy_current: window must lie in the hot bulk (a, L/2 - a)");

    // full-lattice dispersion and derivative multiplier (Nyquist plane of k1
    // carries no odd derivative and is dropped from both sides)
    const std::size_t full = static_cast<std::size_t>(N) * N * N;
    std::vector<double> om(full), k1d(full);
    {
        const double dkv = 2.0 * 3.14159265358979323846 / L;
        const int half = N / 2;
        for (int i = 0; i < N; ++i)
            for (int j = 0; j < N; ++j)
                for (int l = 0; l < N; ++l) {
                    int n1 = i < half ? i : i - N;
                    int n2c = j < half ? j : j - N;
                    int n3 = l < half ? l : l - N;
                    std::size_t idx = (static_cast<std::size_t>(i) * N + j) * N + l;
                    double kx = dkv * n1, ky = dkv * n2c, kz = dkv * n3;
                    om[idx] = std::sqrt(kx * kx + ky * ky + kz * kz + spec.mass * spec.mass);
                    k1d[idx] = (n1 == -half) ? 0.0 : kx;
                }
    }

    // prediction: -(T+ - T-)/2 (1/L^3) sum |k1|/omega over represented modes
    double pred = 0.0;
    for (std::size_t idx = 0; idx < full; ++idx)
        if (om[idx] > 0.0) pred += std::abs(k1d[idx]) / om[idx];
    pred *= -(T_plus - T_minus) / (2.0 * L * L * L);

    // window rows in the first axis
    std::vector<std::size_t> rows;
    const double h = L / N;
    for (int i = 0; i < N; ++i) {
        double x1 = -0.5 * L + i * h;
        if (x1 >= window_lo && x1 <= window_hi) rows.push_back(static_cast<std::size_t>(i));
    }
    if (rows.empty()) throw std::invalid_argument("energy_current: window contains no lattice planes");

    std::vector<double> flux(n_members, 0.0);
    parallel_for(
        n_members,
        [&](std::size_t mem) {
            std::uint64_t seed = member_seed(base_seed, mem);
            FieldSample s = two_temperature_sample(T_minus, T_plus, a, grid, spec, seed);
            LatticeArray phi = expand_modes(s.state.phi, grid);
            LatticeArray pi = expand_modes(s.state.pi, grid);
            // free evolution to t_late, then d1 phi in Fourier
            for (std::size_t idx = 0; idx < full; ++idx) {
                double w = om[idx];
                cplx f = phi[idx], g = pi[idx];
                if (w == 0.0) {
                    phi[idx] = f + t_late * g;
                } else {
                    double cs = std::cos(w * t_late), sn = std::sin(w * t_late);
                    phi[idx] = cs * f + (sn / w) * g;
                    pi[idx] = -w * sn * f + cs * g;
                }
                phi[idx] *= cplx{0.0, k1d[idx]};  // d1 phi
            }
            fourier_to_position(phi, N, L);
            fourier_to_position(pi, N, L);
            double acc = 0.0;
            std::size_t count = 0;
            const std::size_t plane = static_cast<std::size_t>(N) * N;
            for (std::size_t r : rows) {
                for (std::size_t j = 0; j < plane; ++j) {
                    std::size_t idx = r * plane + j;
                    acc += pi[idx].real() * phi[idx].real();
                    ++count;
                }
            }
            flux[mem] = -acc / static_cast<double>(count);
        },
        workers);

    CurrentReport rep;
    rep.flux = mean_with_stderr(flux);
    rep.prediction = pred;
    rep.z_vs_zero = rep.flux.z(0.0);
    rep.z_vs_prediction = rep.flux.z(pred);
    rep.window_lo = window_lo;
    rep.window_hi = window_hi;
    rep.t_late = t_late;
    return rep;
}

}  // namespace fplab
