#pragma once

// Fixed-size 2x2 / 3x3 linear algebra used throughout the mode and kernel
// computations. Row-major, value semantics.

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>

namespace fplab {

using cplx = std::complex<double>;

struct Vec3 {
    double x = 0.0, y = 0.0, z = 0.0;

    double& operator[](std::size_t i) { return i == 0 ? x : (i == 1 ? y : z); }
    double operator[](std::size_t i) const { return i == 0 ? x : (i == 1 ? y : z); }

    Vec3 operator+(const Vec3& b) const { return {x + b.x, y + b.y, z + b.z}; }
    Vec3 operator-(const Vec3& b) const { return {x - b.x, y - b.y, z - b.z}; }
    Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
    Vec3& operator+=(const Vec3& b) { x += b.x; y += b.y; z += b.z; return *this; }
    Vec3& operator-=(const Vec3& b) { x -= b.x; y -= b.y; z -= b.z; return *this; }

    double dot(const Vec3& b) const { return x * b.x + y * b.y + z * b.z; }
    double norm2() const { return dot(*this); }
    double norm() const { return std::sqrt(norm2()); }
};

inline Vec3 operator*(double s, const Vec3& v) { return v * s; }

struct Mat3 {
    // a[i][j], row i, column j
    std::array<std::array<double, 3>, 3> a{};

    static Mat3 zero() { return {}; }
    static Mat3 identity() {
        Mat3 m;
        m.a[0][0] = m.a[1][1] = m.a[2][2] = 1.0;
        return m;
    }
    static Mat3 scaled_identity(double s) {
        Mat3 m;
        m.a[0][0] = m.a[1][1] = m.a[2][2] = s;
        return m;
    }

    double& operator()(std::size_t i, std::size_t j) { return a[i][j]; }
    double operator()(std::size_t i, std::size_t j) const { return a[i][j]; }

    Mat3 operator+(const Mat3& b) const {
        Mat3 r;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) r.a[i][j] = a[i][j] + b.a[i][j];
        return r;
    }
    Mat3 operator-(const Mat3& b) const {
        Mat3 r;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) r.a[i][j] = a[i][j] - b.a[i][j];
        return r;
    }
    Mat3 operator*(double s) const {
        Mat3 r;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) r.a[i][j] = a[i][j] * s;
        return r;
    }
    Mat3& operator+=(const Mat3& b) {
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) a[i][j] += b.a[i][j];
        return *this;
    }
    Vec3 operator*(const Vec3& v) const {
        return {a[0][0] * v.x + a[0][1] * v.y + a[0][2] * v.z,
                a[1][0] * v.x + a[1][1] * v.y + a[1][2] * v.z,
                a[2][0] * v.x + a[2][1] * v.y + a[2][2] * v.z};
    }
    Mat3 operator*(const Mat3& b) const {
        Mat3 r;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                double s = 0.0;
                for (int k = 0; k < 3; ++k) s += a[i][k] * b.a[k][j];
                r.a[i][j] = s;
            }
        return r;
    }
    Mat3 transposed() const {
        Mat3 r;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) r.a[i][j] = a[j][i];
        return r;
    }
    double det() const {
        return a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) -
               a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0]) +
               a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0]);
    }
    double max_abs() const {
        double m = 0.0;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) m = std::max(m, std::abs(a[i][j]));
        return m;
    }
    // Frobenius norm
    double norm() const {
        double s = 0.0;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) s += a[i][j] * a[i][j];
        return std::sqrt(s);
    }
};

inline Mat3 operator*(double s, const Mat3& m) { return m * s; }

// Sylvester criterion for a symmetric 3x3 matrix.
inline bool positive_definite(const Mat3& m) {
    double d1 = m(0, 0);
    double d2 = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
    return d1 > 0.0 && d2 > 0.0 && m.det() > 0.0;
}

// Solve (3x3) A x = b by Cramer's rule; caller guarantees det(A) != 0.
inline Vec3 solve3(const Mat3& A, const Vec3& b) {
    double d = A.det();
    Mat3 m;
    Vec3 r;
    for (int c = 0; c < 3; ++c) {
        m = A;
        for (int i = 0; i < 3; ++i) m(i, c) = b[i];
        r[c] = m.det() / d;
    }
    return r;
}

// Inverse of a symmetric positive definite 3x3 matrix.
inline Mat3 inverse_spd(const Mat3& A) {
    Mat3 inv;
    Vec3 e[3] = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
    for (int c = 0; c < 3; ++c) {
        Vec3 col = solve3(A, e[c]);
        for (int i = 0; i < 3; ++i) inv(i, c) = col[i];
    }
    return inv;
}

// Real 2x2 matrix acting on field-pair modes (phi_hat, pi_hat).
struct Mat2 {
    double a00 = 0.0, a01 = 0.0, a10 = 0.0, a11 = 0.0;

    static Mat2 identity() { return {1.0, 0.0, 0.0, 1.0}; }

    Mat2 operator*(const Mat2& b) const {
        return {a00 * b.a00 + a01 * b.a10, a00 * b.a01 + a01 * b.a11,
                a10 * b.a00 + a11 * b.a10, a10 * b.a01 + a11 * b.a11};
    }
    Mat2 operator-(const Mat2& b) const {
        return {a00 - b.a00, a01 - b.a01, a10 - b.a10, a11 - b.a11};
    }
    Mat2 transposed() const { return {a00, a10, a01, a11}; }
    double det() const { return a00 * a11 - a01 * a10; }
    double max_abs() const {
        return std::max(std::max(std::abs(a00), std::abs(a01)),
                        std::max(std::abs(a10), std::abs(a11)));
    }

    template <class T>
    void apply(T& u0, T& u1) const {
        T v0 = a00 * u0 + a01 * u1;
        T v1 = a10 * u0 + a11 * u1;
        u0 = v0;
        u1 = v1;
    }
};

// Hermitian 2x2 complex matrix, used for per-mode field covariances.
struct Herm2 {
    double q00 = 0.0, q11 = 0.0;  // real diagonal
    cplx q01{0.0, 0.0};           // upper off-diagonal; lower is conj(q01)

    bool psd(double tol = 0.0) const {
        return q00 >= -tol && q11 >= -tol &&
               q00 * q11 - std::norm(q01) >= -tol * (1.0 + q00 + q11);
    }
};

struct cplx2 {
    cplx c0{0.0, 0.0}, c1{0.0, 0.0};
};

// v^dagger Q w for Hermitian Q, complex pair vectors v, w.
inline cplx herm_quad(const cplx2& v, const Herm2& Q, const cplx2& w) {
    return std::conj(v.c0) * (Q.q00 * w.c0 + Q.q01 * w.c1) +
           std::conj(v.c1) * (std::conj(Q.q01) * w.c0 + Q.q11 * w.c1);
}

}  // namespace fplab
