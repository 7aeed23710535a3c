#pragma once

// Adaptive Gauss-Kronrod 7/15 quadrature, a Cauchy principal-value rule, and
// oscillatory integrals of the form int A(u) sin(u t) du split at the zeros
// of the trigonometric factor and summed (with Euler acceleration of the
// alternating tail when the cutoff is slow to reach).

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <stdexcept>
#include <vector>

namespace fplab {

struct QuadResult {
    double value = 0.0;
    double error = 0.0;
    long evals = 0;
    bool converged = true;
};

namespace detail {

// Gauss-Kronrod 7-15 abscissae and weights on [-1, 1] (quadpack constants).
inline constexpr double kGK15Nodes[8] = {
    0.991455371120813, 0.949107912342759, 0.864864423359769, 0.741531185599394,
    0.586087235467691, 0.405845151377397, 0.207784955007898, 0.000000000000000};
inline constexpr double kGK15Weights[8] = {
    0.022935322010529, 0.063092092629979, 0.104790010322250, 0.140653259715525,
    0.169004726639267, 0.190350578064785, 0.204432940075298, 0.209482141084728};
inline constexpr double kG7Weights[4] = {
    0.129484966168870, 0.279705391489277, 0.381830050505119, 0.417959183673469};

template <class F>
inline void gk15(const F& f, double a, double b, double& kron, double& err) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    double fc = f(c);
    double resk = kGK15Weights[7] * fc;
    double resg = kG7Weights[3] * fc;
    for (int i = 0; i < 7; ++i) {
        double x = h * kGK15Nodes[i];
        double fsum = f(c - x) + f(c + x);
        resk += kGK15Weights[i] * fsum;
        if (i % 2 == 1) resg += kG7Weights[i / 2] * fsum;
    }
    kron = resk * h;
    err = std::abs((resk - resg) * h);
}

}  // namespace detail

// Adaptive bisection on |GK15 - G7|; absolute/relative mixed tolerance.
template <class F>
inline QuadResult integrate(const F& f, double a, double b, double tol,
                            int max_depth = 48) {
    QuadResult total;
    struct Seg {
        double a, b, value, error;
        int depth;
    };
    std::vector<Seg> stack;
    double v, e;
    detail::gk15(f, a, b, v, e);
    total.evals = 15;
    stack.push_back({a, b, v, e, 0});
    double sum = 0.0, errsum = 0.0;
    while (!stack.empty()) {
        Seg s = stack.back();
        stack.pop_back();
        double scale = std::max(1.0, std::abs(sum) + std::abs(s.value));
        if (s.error <= tol * std::max(1.0, scale) * 0.5 / (1 << std::min(s.depth, 20)) ||
            s.error <= tol * 1e-3 || s.depth >= max_depth) {
            if (s.depth >= max_depth && s.error > tol) total.converged = false;
            sum += s.value;
            errsum += s.error;
            continue;
        }
        double mid = 0.5 * (s.a + s.b);
        double v1, e1, v2, e2;
        detail::gk15(f, s.a, mid, v1, e1);
        detail::gk15(f, mid, s.b, v2, e2);
        total.evals += 30;
        stack.push_back({s.a, mid, v1, e1, s.depth + 1});
        stack.push_back({mid, s.b, v2, e2, s.depth + 1});
    }
    total.value = sum;
    total.error = errsum;
    if (errsum > tol * std::max(1.0, std::abs(sum)) * 10.0) total.converged = false;
    return total;
}

// Complex-valued integrand: integrate real and imaginary parts.
template <class F>
inline std::complex<double> integrate_complex(const F& f, double a, double b,
                                              double tol, QuadResult* out = nullptr) {
    auto re = integrate([&](double x) { return f(x).real(); }, a, b, tol);
    auto im = integrate([&](double x) { return f(x).imag(); }, a, b, tol);
    if (out) {
        out->value = std::abs(std::complex<double>(re.value, im.value));
        out->error = re.error + im.error;
        out->evals = re.evals + im.evals;
        out->converged = re.converged && im.converged;
    }
    return {re.value, im.value};
}

// PV int_a^b h(k) / (k - pole) dk with a < pole < b. The singular window is
// handled by the subtracted form (h(k) - h(pole))/(k - pole), whose log term
// cancels on the symmetric window.
template <class F>
inline QuadResult principal_value(const F& h, double a, double b, double pole,
                                  double tol) {
    if (!(a < pole && pole < b)) throw std::invalid_argument("principal_value: pole outside (a,b)");
    double delta = std::min(pole - a, b - pole);
    double lo = pole - delta, hi = pole + delta;
    double hp = h(pole);
    auto reg = [&](double k) {
        double d = k - pole;
        if (std::abs(d) < 1e-14 * std::max(1.0, std::abs(pole))) {
            // symmetric difference derivative limit
            double eps = 1e-7 * std::max(1.0, std::abs(pole));
            return (h(pole + eps) - h(pole - eps)) / (2.0 * eps);
        }
        return (h(k) - hp) / d;
    };
    QuadResult r = integrate(reg, lo, hi, tol);
    if (lo > a) {
        auto left = integrate([&](double k) { return h(k) / (k - pole); }, a, lo, tol);
        r.value += left.value;
        r.error += left.error;
        r.evals += left.evals;
        r.converged = r.converged && left.converged;
    }
    if (hi < b) {
        auto right = integrate([&](double k) { return h(k) / (k - pole); }, hi, b, tol);
        r.value += right.value;
        r.error += right.error;
        r.evals += right.evals;
        r.converged = r.converged && right.converged;
    }
    return r;
}

enum class Trig { sin, cos };

// int_a^b A(u) * trig(u t) du for smooth decaying A and t >= 0. Below ~10
// half-periods the plain adaptive rule is used; beyond that the integral is
// chunked at the zeros u_n = n pi / t of the trigonometric factor, each chunk
// integrated by GK15, and the chunk series summed. If the amplitude has not
// decayed out by the last chunk, the alternating remainder is estimated by
// repeated averaging of partial sums (Euler transform).
template <class F>
inline QuadResult oscillatory_integral(const F& amplitude, double a, double b,
                                       double t, Trig trig, double tol) {
    auto f = [&](double u) {
        double ph = u * t;
        return amplitude(u) * (trig == Trig::sin ? std::sin(ph) : std::cos(ph));
    };
    if (t <= 0.0 || (b - a) * t < 10.0 * 3.14159265358979323846)
        return integrate(f, a, b, tol);

    const double pi = 3.14159265358979323846;
    const double halfp = pi / t;
    // First zero of the factor at or beyond a.
    double n0 = std::ceil(a / halfp + 1e-12);
    if (trig == Trig::cos) n0 = std::ceil(a / halfp - 0.5 + 1e-12) + 0.5;
    double z = n0 * halfp;
    QuadResult total;
    std::vector<double> terms;
    double head = 0.0;
    if (z > a) {
        auto r = integrate(f, a, std::min(z, b), tol);
        head = r.value;
        total.error += r.error;
        total.evals += r.evals;
    }
    double lo = z;
    int small_count = 0;
    double absmax = std::abs(head);
    while (lo < b) {
        double hi = std::min(lo + halfp, b);
        double v, e;
        detail::gk15(f, lo, hi, v, e);
        // One refinement level keeps chunk error well under tol.
        if (e > 0.1 * tol * std::max(1.0, std::abs(v))) {
            double m = 0.5 * (lo + hi), v1, e1, v2, e2;
            detail::gk15(f, lo, m, v1, e1);
            detail::gk15(f, m, hi, v2, e2);
            v = v1 + v2;
            e = e1 + e2;
            total.evals += 30;
        }
        terms.push_back(v);
        total.error += e;
        total.evals += 15;
        absmax = std::max(absmax, std::abs(v));
        if (std::abs(v) < tol * 1e-3 * std::max(1.0, absmax)) {
            if (++small_count >= 3) break;
        } else {
            small_count = 0;
        }
        lo = hi;
    }
    double series = 0.0;
    for (double v : terms) series += v;
    // Euler acceleration of the unfinished alternating tail.
    if (!terms.empty() && lo < b && std::abs(terms.back()) > tol * std::max(1.0, absmax)) {
        std::size_t k = std::min<std::size_t>(terms.size(), 12);
        std::vector<double> partial(k);
        double s = series;
        for (std::size_t i = 0; i < k; ++i) {
            partial[k - 1 - i] = s;
            s -= terms[terms.size() - 1 - i];
        }
        while (partial.size() > 1) {
            for (std::size_t i = 0; i + 1 < partial.size(); ++i)
                partial[i] = 0.5 * (partial[i] + partial[i + 1]);
            partial.pop_back();
        }
        series = partial[0];
    }
    total.value = head + series;
    return total;
}

}  // namespace fplab
