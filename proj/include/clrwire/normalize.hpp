#pragma once

#include <cmath>
#include <utility>

#include "clrwire/error.hpp"
#include "clrwire/geometry.hpp"
#include "clrwire/wireframe.hpp"

namespace clrwire {

constexpr double kDegenerateEps = 1e-6;  // minimum endpoint separation
constexpr double kParallelEps = 1e-9;    // cross-product threshold for the parallel branch

// The invertible transform that canonicalized a curve: endpoints to (-1,0,0)/(1,0,0).
struct CurveFrame {
    Point3 translation;          // original start point
    Mat3 rotation;               // proper rotation applied after translation
    double scale = 1.0;          // positive uniform scale

    bool well_formed(double tol = 1e-9) const {
        if (!(scale > 0.0) || !std::isfinite(scale)) return false;
        Mat3 rtr = rotation.transposed() * rotation;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                if (std::abs(rtr(i, j) - (i == j ? 1.0 : 0.0)) > tol) return false;
        return std::abs(rotation.det() - 1.0) <= tol;
    }
};

// R = I + sin(theta) K + (1 - cos(theta)) K^2, right-hand rule about `axis`.
inline Mat3 rodrigues(const Point3& axis, double theta) {
    if (std::abs(norm(axis) - 1.0) > 1e-9) throw NonUnitAxis("rodrigues axis must have unit length");
    Mat3 k;
    k.m = {0, -axis.z, axis.y, axis.z, 0, -axis.x, -axis.y, axis.x, 0};
    return Mat3::identity() + std::sin(theta) * k + (1.0 - std::cos(theta)) * (k * k);
}

// Minimal rotation taking unit direction `d` onto (1,0,0). Parallel input gives the
// identity; anti-parallel rotates pi about (0,1,0).
inline Mat3 rotation_to_x_axis(const Point3& d) {
    const Point3 target{1, 0, 0};
    Point3 a = cross(d, target);
    double an = norm(a);
    if (an < kParallelEps) {
        if (dot(d, target) >= 0.0) return Mat3::identity();
        Mat3 half_turn;
        half_turn.m = {-1, 0, 0, 0, 1, 0, 0, 0, -1};
        return half_turn;
    }
    double theta = std::acos(std::clamp(dot(d, target), -1.0, 1.0));
    return rodrigues(a / an, theta);
}

// Frame that maps a curve starting at `start` and ending at `end` into canonical pose.
inline CurveFrame frame_from_endpoints(const Point3& start, const Point3& end) {
    Point3 delta = end - start;
    double len = norm(delta);
    if (len <= kDegenerateEps) throw DegenerateCurve("endpoints nearly coincide");
    CurveFrame f;
    f.translation = start;
    f.rotation = rotation_to_x_axis(delta / len);
    Point3 rotated = f.rotation * delta;
    f.scale = 2.0 / rotated.x;
    return f;
}

inline Point3 apply_frame(const CurveFrame& f, const Point3& p) {
    return f.scale * (f.rotation * (p - f.translation)) - Point3{1, 0, 0};
}

inline Point3 invert_frame(const CurveFrame& f, const Point3& q) {
    return f.rotation.transposed() * ((q + Point3{1, 0, 0}) / f.scale) + f.translation;
}

inline std::pair<Curve, CurveFrame> normalize_curve(const Curve& c) {
    if (c.samples.size() < 2) throw DegenerateCurve("curve has fewer than 2 samples");
    CurveFrame f = frame_from_endpoints(c.front(), c.back());
    Curve out;
    out.samples.reserve(c.samples.size());
    for (const auto& p : c.samples) out.samples.push_back(apply_frame(f, p));
    return {std::move(out), f};
}

inline Curve denormalize_curve(const Curve& c, const CurveFrame& f) {
    if (!f.well_formed()) throw InvalidFrame("rotation not in SO(3) or scale <= 0");
    Curve out;
    out.samples.reserve(c.samples.size());
    for (const auto& p : c.samples) out.samples.push_back(invert_frame(f, p));
    return out;
}

inline bool is_normalized(const Curve& c, double tol = 1e-6) {
    return c.samples.size() >= 2 && dist(c.front(), Point3{-1, 0, 0}) <= tol &&
           dist(c.back(), Point3{1, 0, 0}) <= tol;
}

}  // namespace clrwire
