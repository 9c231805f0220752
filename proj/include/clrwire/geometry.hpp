#pragma once

#include <array>
#include <cmath>

namespace clrwire {

struct Point3 {
    double x = 0.0, y = 0.0, z = 0.0;

    friend Point3 operator+(const Point3& a, const Point3& b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
    friend Point3 operator-(const Point3& a, const Point3& b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
    friend Point3 operator*(double s, const Point3& p) { return {s * p.x, s * p.y, s * p.z}; }
    friend Point3 operator*(const Point3& p, double s) { return s * p; }
    friend Point3 operator/(const Point3& p, double s) { return {p.x / s, p.y / s, p.z / s}; }
    Point3& operator+=(const Point3& o) { x += o.x; y += o.y; z += o.z; return *this; }
    Point3& operator-=(const Point3& o) { x -= o.x; y -= o.y; z -= o.z; return *this; }
    friend bool operator==(const Point3& a, const Point3& b) { return a.x == b.x && a.y == b.y && a.z == b.z; }
    friend bool operator!=(const Point3& a, const Point3& b) { return !(a == b); }

    bool finite() const { return std::isfinite(x) && std::isfinite(y) && std::isfinite(z); }
};

inline double dot(const Point3& a, const Point3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline Point3 cross(const Point3& a, const Point3& b) {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
inline double norm2(const Point3& p) { return dot(p, p); }
inline double norm(const Point3& p) { return std::sqrt(norm2(p)); }
inline double dist2(const Point3& a, const Point3& b) { return norm2(a - b); }
inline double dist(const Point3& a, const Point3& b) { return std::sqrt(dist2(a, b)); }
inline Point3 normalized(const Point3& p) { return p / norm(p); }
// Convex form: exact at t=0 and t=1.
inline Point3 lerp(const Point3& a, const Point3& b, double t) { return (1.0 - t) * a + t * b; }

// Row-major 3x3 matrix.
struct Mat3 {
    std::array<double, 9> m{1, 0, 0, 0, 1, 0, 0, 0, 1};

    static Mat3 identity() { return Mat3{}; }
    double operator()(int r, int c) const { return m[3 * r + c]; }
    double& operator()(int r, int c) { return m[3 * r + c]; }

    friend Point3 operator*(const Mat3& a, const Point3& p) {
        return {a.m[0] * p.x + a.m[1] * p.y + a.m[2] * p.z,
                a.m[3] * p.x + a.m[4] * p.y + a.m[5] * p.z,
                a.m[6] * p.x + a.m[7] * p.y + a.m[8] * p.z};
    }
    friend Mat3 operator*(const Mat3& a, const Mat3& b) {
        Mat3 r;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                double s = 0;
                for (int k = 0; k < 3; ++k) s += a(i, k) * b(k, j);
                r(i, j) = s;
            }
        return r;
    }
    friend Mat3 operator+(const Mat3& a, const Mat3& b) {
        Mat3 r;
        for (int i = 0; i < 9; ++i) r.m[i] = a.m[i] + b.m[i];
        return r;
    }
    friend Mat3 operator*(double s, const Mat3& a) {
        Mat3 r;
        for (int i = 0; i < 9; ++i) r.m[i] = s * a.m[i];
        return r;
    }
    friend bool operator==(const Mat3& a, const Mat3& b) { return a.m == b.m; }

    Mat3 transposed() const {
        Mat3 r;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) r(i, j) = (*this)(j, i);
        return r;
    }
    double det() const {
        return m[0] * (m[4] * m[8] - m[5] * m[7]) - m[1] * (m[3] * m[8] - m[5] * m[6]) +
               m[2] * (m[3] * m[7] - m[4] * m[6]);
    }
};

}  // namespace clrwire
