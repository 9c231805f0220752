#pragma once

#include <cmath>
#include <vector>

#include "clrwire/rng.hpp"
#include "clrwire/wireframe.hpp"

namespace testutil {

using namespace clrwire;

inline bool near(double a, double b, double tol = 1e-9) { return std::abs(a - b) <= tol; }
inline bool near(const Point3& a, const Point3& b, double tol = 1e-9) { return dist(a, b) <= tol; }

// Axis-aligned unit cube frame: 12 edges, 8 vertices, each of degree 3.
inline Wireframe make_box(Point3 lo = {-0.5, -0.5, -0.5}, Point3 hi = {0.5, 0.5, 0.5}, int samples = 16) {
    Wireframe w;
    auto corner = [&](int i) -> Point3 {
        return {(i & 1) ? hi.x : lo.x, (i & 2) ? hi.y : lo.y, (i & 4) ? hi.z : lo.z};
    };
    for (int i = 0; i < 8; ++i) w.vertices.push_back(corner(i));
    const int edges[12][2] = {{0, 1}, {0, 2}, {0, 4}, {1, 3}, {1, 5}, {2, 3},
                              {2, 6}, {3, 7}, {4, 5}, {4, 6}, {5, 7}, {6, 7}};
    for (auto& e : edges) {
        w.curves.push_back(sample_curve(LineSpec{corner(e[0]), corner(e[1])}, samples));
        w.adjacency.push_back({e[0], e[1]});
    }
    return w;
}

// Unit square in the z=0 plane.
inline Wireframe make_square(int samples = 8) {
    Wireframe w;
    w.vertices = {{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0}};
    const int edges[4][2] = {{0, 1}, {1, 2}, {2, 3}, {3, 0}};
    for (auto& e : edges) {
        w.curves.push_back(sample_curve(LineSpec{w.vertices[size_t(e[0])], w.vertices[size_t(e[1])]}, samples));
        w.adjacency.push_back({e[0], e[1]});
    }
    return w;
}

inline Curve random_bezier(Rng& rng, int samples = 32, double span = 2.0) {
    auto pt = [&]() -> Point3 {
        return {rng.uniform(-span, span), rng.uniform(-span, span), rng.uniform(-span, span)};
    };
    while (true) {
        BezierSpec b{pt(), pt(), pt(), pt()};
        if (dist(b.p0, b.p3) > 1e-3) return sample_curve(b, samples);
    }
}

}  // namespace testutil
