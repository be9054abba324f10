#pragma once
#include <array>
#include <cmath>
#include <algorithm>
#include <limits>

namespace flowerflow {

// Chart-coordinate pair (all registry manifolds are 2-dimensional surfaces).
struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    double& operator[](int i) { return i == 0 ? x : y; }
    double operator[](int i) const { return i == 0 ? x : y; }
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator-(Vec2 a) { return {-a.x, -a.y}; }
inline Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
inline Vec2 operator*(Vec2 a, double s) { return s * a; }
inline Vec2 operator/(Vec2 a, double s) { return {a.x / s, a.y / s}; }
inline Vec2& operator+=(Vec2& a, Vec2 b) { a.x += b.x; a.y += b.y; return a; }
inline Vec2& operator-=(Vec2& a, Vec2 b) { a.x -= b.x; a.y -= b.y; return a; }
inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }

// Ambient embedding coordinates.
struct Vec3 {
    double x = 0.0, y = 0.0, z = 0.0;
};

inline Vec3 operator+(Vec3 a, Vec3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
inline Vec3 operator-(Vec3 a, Vec3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
inline Vec3 operator*(double s, Vec3 a) { return {s * a.x, s * a.y, s * a.z}; }
inline Vec3 operator/(Vec3 a, double s) { return {a.x / s, a.y / s, a.z / s}; }
inline Vec3& operator+=(Vec3& a, Vec3 b) { a.x += b.x; a.y += b.y; a.z += b.z; return a; }
inline double dot(Vec3 a, Vec3 b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline Vec3 cross(Vec3 a, Vec3 b) {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
inline double norm(Vec3 a) { return std::sqrt(dot(a, a)); }
inline Vec3 normalized(Vec3 a) { double n = norm(a); return n > 0 ? a / n : a; }

struct Mat2 {
    double m00 = 0, m01 = 0, m10 = 0, m11 = 0;

    static Mat2 identity() { return {1, 0, 0, 1}; }
    static Mat2 diag(double a, double b) { return {a, 0, 0, b}; }

    Vec2 apply(Vec2 v) const { return {m00 * v.x + m01 * v.y, m10 * v.x + m11 * v.y}; }
    double det() const { return m00 * m11 - m01 * m10; }
    double trace() const { return m00 + m11; }

    // Solve A x = b (2x2, direct).
    Vec2 solve(Vec2 b) const {
        double d = det();
        return {(b.x * m11 - b.y * m01) / d, (m00 * b.y - m10 * b.x) / d};
    }

    // Eigenvalues of a symmetric matrix.
    std::array<double, 2> sym_eigenvalues() const {
        double h = 0.5 * trace();
        double d = std::sqrt(std::max(0.0, h * h - det()));
        return {h - d, h + d};
    }
};

inline Mat2 operator+(Mat2 a, Mat2 b) {
    return {a.m00 + b.m00, a.m01 + b.m01, a.m10 + b.m10, a.m11 + b.m11};
}
inline Mat2 operator*(double s, Mat2 a) { return {s * a.m00, s * a.m01, s * a.m10, s * a.m11}; }

inline double quad_form(const Mat2& g, Vec2 a, Vec2 b) {
    return a.x * (g.m00 * b.x + g.m01 * b.y) + a.y * (g.m10 * b.x + g.m11 * b.y);
}

// Smooth 0->1 ramp, s in [0,1].
inline double smoothstep(double s) {
    s = std::clamp(s, 0.0, 1.0);
    return s * s * (3.0 - 2.0 * s);
}

// Wrap x into [0, period).
inline double wrap_periodic(double x, double period) {
    double r = std::fmod(x, period);
    return r < 0 ? r + period : r;
}

// Wrap a difference into (-period/2, period/2].
inline double wrap_symmetric(double d, double period) {
    double r = wrap_periodic(d, period);
    return r > 0.5 * period ? r - period : r;
}

constexpr double kPi = 3.14159265358979323846;
constexpr double kTwoPi = 6.28318530717958647692;

} // namespace flowerflow
