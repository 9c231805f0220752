#include "doctest.h"

#include "clrwire/normalize.hpp"
#include "test_helpers.hpp"

using namespace clrwire;
using testutil::near;

namespace {

// Independent oracle: rotate v by the unit quaternion built from (axis, theta).
Point3 quat_rotate(const Point3& axis, double theta, const Point3& v) {
    double c = std::cos(theta / 2), s = std::sin(theta / 2);
    double qw = c, qx = s * axis.x, qy = s * axis.y, qz = s * axis.z;
    // q * (0,v) * conj(q)
    double tx = qw * v.x + qy * v.z - qz * v.y;
    double ty = qw * v.y + qz * v.x - qx * v.z;
    double tz = qw * v.z + qx * v.y - qy * v.x;
    double tw = -qx * v.x - qy * v.y - qz * v.z;
    return {tx * qw - tw * qx - ty * qz + tz * qy,
            ty * qw - tw * qy - tz * qx + tx * qz,
            tz * qw - tw * qz - tx * qy + ty * qx};
}

Point3 random_unit(Rng& rng) {
    while (true) {
        Point3 p{rng.normal(), rng.normal(), rng.normal()};
        double n = norm(p);
        if (n > 1e-6) return p / n;
    }
}

}  // namespace

TEST_SUITE_BEGIN("normalize");

TEST_CASE("rodrigues: matches the quaternion oracle") {
    CHECK(near(rodrigues({0, 1, 0}, 1.5707963267948966) * Point3{0, 0, 1}, {1, 0, 0}, 1e-12));
    Rng rng(42);
    for (int i = 0; i < 200; ++i) {
        Point3 axis = random_unit(rng);
        double theta = rng.uniform(-6.3, 6.3);
        Point3 v{rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2)};
        CHECK(near(rodrigues(axis, theta) * v, quat_rotate(axis, theta, v), 1e-10));
    }
}

TEST_CASE("rodrigues: theta=0 is identity, half-turn flips") {
    CHECK(rodrigues({0, 0, 1}, 0.0) == Mat3::identity());
    CHECK(near(rodrigues({0, 0, 1}, 3.14159265358979323846) * Point3{1, 0, 0}, {-1, 0, 0}, 1e-12));
}

TEST_CASE("rodrigues: output stays in SO(3)") {
    Rng rng(7);
    for (int i = 0; i < 200; ++i) {
        Mat3 r = rodrigues(random_unit(rng), rng.uniform(-10, 10));
        Mat3 rtr = r.transposed() * r;
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b) CHECK(near(rtr(a, b), a == b ? 1.0 : 0.0, 1e-12));
        CHECK(near(r.det(), 1.0, 1e-12));
    }
}

TEST_CASE("rodrigues: non-unit axis rejected") {
    CHECK_THROWS_AS(rodrigues({0, 2, 0}, 1.0), NonUnitAxis);
}

TEST_CASE("normalize_curve: axis-aligned segment keeps identity frame") {
    auto [c, f] = normalize_curve(sample_curve(LineSpec{{0, 0, 0}, {2, 0, 0}}, 16));
    CHECK(near(c.front(), {-1, 0, 0}, 1e-12));
    CHECK(near(c.back(), {1, 0, 0}, 1e-12));
    CHECK(f.rotation == Mat3::identity());
    CHECK(near(f.scale, 1.0, 1e-12));
    CHECK(near(f.translation, {0, 0, 0}));
}

TEST_CASE("normalize_curve: vertical segment maps z onto x") {
    auto [c, f] = normalize_curve(sample_curve(LineSpec{{1, 1, 1}, {1, 1, 3}}, 16));
    CHECK(near(c.front(), {-1, 0, 0}, 1e-9));
    CHECK(near(c.back(), {1, 0, 0}, 1e-9));
    CHECK(near(f.rotation * Point3{0, 0, 1}, {1, 0, 0}, 1e-12));
    CHECK(near(f.scale, 1.0, 1e-12));
}

TEST_CASE("normalize_curve: quarter arc becomes symmetric about x=0") {
    ArcSpec a;
    a.radius = 1.0;
    Curve arc = sample_curve(a, 33);  // (1,0,0) -> (0,1,0)
    auto [c, f] = normalize_curve(arc);
    CHECK(near(c.front(), {-1, 0, 0}, 1e-9));
    CHECK(near(c.back(), {1, 0, 0}, 1e-9));
    for (int i = 0; i < 33; ++i) {
        const Point3& p = c.samples[size_t(i)];
        const Point3& q = c.samples[size_t(32 - i)];
        CHECK(near(p.x, -q.x, 1e-9));
    }
}

TEST_CASE("normalize_curve: anti-parallel segment uses the deterministic half-turn") {
    auto [c, f] = normalize_curve(sample_curve(LineSpec{{1, 0, 0}, {-1, 0, 0}}, 8));
    CHECK(near(c.front(), {-1, 0, 0}, 1e-12));
    CHECK(near(c.back(), {1, 0, 0}, 1e-12));
    CHECK(f.well_formed());
}

TEST_CASE("normalize_curve: degenerate endpoints rejected") {
    Curve c;
    for (int i = 0; i < 8; ++i) c.samples.push_back({std::sin(i * 0.7), std::cos(i * 0.9), 0.0});
    c.samples.back() = c.samples.front();
    CHECK_THROWS_AS(normalize_curve(c), DegenerateCurve);
}

TEST_CASE("denormalize: identity frame leaves input unchanged") {
    Curve c = sample_curve(LineSpec{{0.1, 0.2, 0.3}, {0.4, 0.5, 0.6}}, 8);
    CurveFrame ident;
    ident.translation = {-1, 0, 0};  // cancels the +(1,0,0) shift of the inverse map
    Curve out = denormalize_curve(c, ident);
    for (size_t i = 0; i < c.samples.size(); ++i) CHECK(near(out.samples[i], c.samples[i] , 1e-15));
}

TEST_CASE("denormalize: invalid frame rejected") {
    CurveFrame f;
    f.scale = -1.0;
    CHECK_THROWS_AS(denormalize_curve(sample_curve(LineSpec{{0, 0, 0}, {1, 0, 0}}, 4), f), InvalidFrame);
    CurveFrame g;
    g.rotation(0, 0) = 2.0;
    CHECK_THROWS_AS(denormalize_curve(sample_curve(LineSpec{{0, 0, 0}, {1, 0, 0}}, 4), g), InvalidFrame);
}

TEST_CASE("round-trip: denormalize(normalize(c)) == c over random Beziers") {
    Rng rng(123);
    double worst = 0;
    for (int i = 0; i < 1000; ++i) {
        Curve c = testutil::random_bezier(rng, 32);
        auto [n, f] = normalize_curve(c);
        Curve back = denormalize_curve(n, f);
        for (size_t k = 0; k < c.samples.size(); ++k) worst = std::max(worst, dist(back.samples[k], c.samples[k]));
    }
    CHECK(worst < 1e-9);
}

TEST_CASE("frame with s=2 maps the canonical segment to length 2 at recorded pose") {
    CurveFrame f;
    f.translation = {0.5, -0.25, 1.0};
    f.rotation = rodrigues({0, 0, 1}, 0.3);
    f.scale = 2.0;
    Curve canon = sample_curve(LineSpec{{-1, 0, 0}, {1, 0, 0}}, 8);
    Curve out = denormalize_curve(canon, f);
    CHECK(near(dist(out.front(), out.back()), 1.0, 1e-12));  // length 2 / scale 2
    CHECK(near(out.front(), f.translation, 1e-12));          // start returns to p1
    auto [re, rf] = normalize_curve(out);
    CHECK(near(re.front(), {-1, 0, 0}, 1e-9));
    CHECK(near(re.back(), {1, 0, 0}, 1e-9));
    CHECK(near(rf.scale, 2.0, 1e-9));
}

TEST_CASE("similarity invariance: translation + uniform scale leave the normalized curve fixed") {
    Rng rng(77);
    for (int i = 0; i < 100; ++i) {
        Curve c = testutil::random_bezier(rng, 24);
        double s = rng.uniform(0.2, 5.0);
        Point3 t{rng.uniform(-3, 3), rng.uniform(-3, 3), rng.uniform(-3, 3)};
        Curve g = c;
        for (auto& p : g.samples) p = s * p + t;
        auto [n1, f1] = normalize_curve(c);
        auto [n2, f2] = normalize_curve(g);
        for (size_t k = 0; k < n1.samples.size(); ++k) CHECK(near(n2.samples[k], n1.samples[k], 1e-7));
    }
}

TEST_CASE("similarity invariance: rotations preserve the roll-invariant signature") {
    // Rotating the input can roll the normalized curve about x (the documented
    // ambiguity), so compare x and radial distance from the x-axis per sample.
    Rng rng(78);
    for (int i = 0; i < 100; ++i) {
        Curve c = testutil::random_bezier(rng, 24);
        Mat3 g = rodrigues(random_unit(rng), rng.uniform(-3, 3));
        Curve gc = c;
        for (auto& p : gc.samples) p = g * p;
        auto [n1, f1] = normalize_curve(c);
        auto [n2, f2] = normalize_curve(gc);
        for (size_t k = 0; k < n1.samples.size(); ++k) {
            CHECK(near(n2.samples[k].x, n1.samples[k].x, 1e-7));
            double r1 = std::hypot(n1.samples[k].y, n1.samples[k].z);
            double r2 = std::hypot(n2.samples[k].y, n2.samples[k].z);
            CHECK(near(r2, r1, 1e-7));
        }
    }
}

TEST_SUITE_END();
