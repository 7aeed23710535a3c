#pragma once

// Ensemble statistics: sample moments, jackknife standard errors, excess
// kurtosis, and least-squares line fits used by the decay-rate estimators.

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace fplab {

inline double mean(std::span<const double> x) {
    double s = 0.0;
    for (double v : x) s += v;
    return x.empty() ? 0.0 : s / static_cast<double>(x.size());
}

inline double sample_variance(std::span<const double> x) {
    std::size_t n = x.size();
    if (n < 2) return 0.0;
    double m = mean(x);
    double s = 0.0;
    for (double v : x) s += (v - m) * (v - m);
    return s / static_cast<double>(n - 1);
}

struct Estimate {
    double value = 0.0;
    double stderr_ = 0.0;

    double z(double target) const {
        return stderr_ > 0.0 ? (value - target) / stderr_ : 0.0;
    }
};

// Jackknife standard error of the sample mean (equals the usual SE of the
// mean, kept as a uniform interface with the covariance estimators).
inline Estimate mean_with_stderr(std::span<const double> x) {
    Estimate e;
    e.value = mean(x);
    std::size_t n = x.size();
    if (n >= 2) e.stderr_ = std::sqrt(sample_variance(x) / static_cast<double>(n));
    return e;
}

// Sample covariance of paired draws with leave-one-out jackknife error.
inline Estimate covariance_jackknife(std::span<const double> x, std::span<const double> y) {
    std::size_t n = x.size();
    if (n != y.size() || n < 3) throw std::invalid_argument("covariance_jackknife: need n >= 3 paired samples");
    double sx = 0.0, sy = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sx += x[i];
        sy += y[i];
        sxy += x[i] * y[i];
    }
    const double dn = static_cast<double>(n);
    Estimate e;
    e.value = (sxy - sx * sy / dn) / (dn - 1.0);

    // Leave-one-out replicates from the accumulated sums.
    std::vector<double> rep(n);
    double rmean = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double sxi = sx - x[i], syi = sy - y[i], sxyi = sxy - x[i] * y[i];
        rep[i] = (sxyi - sxi * syi / (dn - 1.0)) / (dn - 2.0);
        rmean += rep[i];
    }
    rmean /= dn;
    double s = 0.0;
    for (double r : rep) s += (r - rmean) * (r - rmean);
    e.stderr_ = std::sqrt((dn - 1.0) / dn * s);
    return e;
}

inline Estimate variance_jackknife(std::span<const double> x) {
    return covariance_jackknife(x, x);
}

// Excess kurtosis m4/m2^2 - 3 with jackknife stderr.
inline Estimate excess_kurtosis_jackknife(std::span<const double> x) {
    std::size_t n = x.size();
    if (n < 5) throw std::invalid_argument("excess_kurtosis_jackknife: need n >= 5");
    const double dn = static_cast<double>(n);
    double s1 = 0.0, s2 = 0.0, s3 = 0.0, s4 = 0.0;
    for (double v : x) {
        s1 += v;
        s2 += v * v;
        s3 += v * v * v;
        s4 += v * v * v * v;
    }
    auto kurt_from_sums = [](double m, double p1, double p2, double p3, double p4) {
        double mu = p1 / m;
        double m2 = p2 / m - mu * mu;
        double m4 = p4 / m - 4.0 * mu * p3 / m + 6.0 * mu * mu * p2 / m - 3.0 * mu * mu * mu * mu;
        return m4 / (m2 * m2) - 3.0;
    };
    Estimate e;
    e.value = kurt_from_sums(dn, s1, s2, s3, s4);
    std::vector<double> rep(n);
    double rmean = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double v = x[i];
        rep[i] = kurt_from_sums(dn - 1.0, s1 - v, s2 - v * v, s3 - v * v * v, s4 - v * v * v * v);
        rmean += rep[i];
    }
    rmean /= dn;
    double s = 0.0;
    for (double r : rep) s += (r - rmean) * (r - rmean);
    e.stderr_ = std::sqrt((dn - 1.0) / dn * s);
    return e;
}

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
};

inline LineFit fit_line(std::span<const double> x, std::span<const double> y) {
    std::size_t n = x.size();
    if (n != y.size() || n < 2) throw std::invalid_argument("fit_line: need n >= 2 paired points");
    double mx = mean(x), my = mean(y);
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    LineFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    double ssres = syy - f.slope * sxy;
    f.r_squared = syy > 0.0 ? 1.0 - ssres / syy : 1.0;
    return f;
}

}  // namespace fplab
