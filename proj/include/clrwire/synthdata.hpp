#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <map>
#include <string>
#include <vector>

#include "clrwire/error.hpp"
#include "clrwire/rng.hpp"
#include "clrwire/topocodec.hpp"
#include "clrwire/wireframe.hpp"

namespace clrwire {

// ---------------------------------------------------------------------------
// Corpus specification

enum class Family { BoxFrame, Prism, Cylinder, FilletBox, PolylineNetwork };

inline const char* family_name(Family f) {
    switch (f) {
        case Family::BoxFrame: return "box";
        case Family::Prism: return "prism";
        case Family::Cylinder: return "cylinder";
        case Family::FilletBox: return "fillet";
        case Family::PolylineNetwork: return "polyline";
    }
    return "?";
}

struct CorpusSpec {
    std::array<double, 5> weights{1, 1, 1, 1, 1};  // indexed by Family
    int min_curves = 4;
    int max_curves = 16;
    int samples_per_curve = 32;
    uint64_t seed = 0;
    int size = 0;

    void check() const {
        double total = 0;
        for (double w : weights) {
            if (w < 0) throw Error("corpus spec: negative family weight");
            total += w;
        }
        if (total <= 0) throw Error("corpus spec: family weights sum to zero");
        if (min_curves < 1 || max_curves < min_curves) throw Error("corpus spec: bad curve-count range");
        if (samples_per_curve < 2) throw Error("corpus spec: need at least 2 samples per curve");
    }
};

namespace detail {

constexpr double kCubeMargin = 0.98;  // keep generated geometry strictly inside [-1,1]^3
constexpr double kPi = 3.14159265358979323846;

// Intrinsic curve-count range a family can produce.
inline std::pair<int, int> family_curve_range(Family f) {
    switch (f) {
        case Family::BoxFrame: return {12, 12};
        case Family::Prism: return {9, 15};       // 3n for n in 3..5
        case Family::Cylinder: return {10, 12};   // 8 arcs + 2..4 side lines
        case Family::FilletBox: return {16, 16};  // 4 + 8 + 4
        case Family::PolylineNetwork: return {4, 64};
    }
    return {0, 0};
}

inline Wireframe assemble(const std::vector<Point3>& vertices, const std::vector<std::array<int, 2>>& edges,
                          const std::vector<CurveSpec>& specs, int samples) {
    Wireframe w;
    w.vertices = vertices;
    for (size_t i = 0; i < edges.size(); ++i) {
        w.curves.push_back(sample_curve(specs[i], samples));
        w.adjacency.push_back({edges[i][0], edges[i][1]});
    }
    return w;
}

inline Wireframe gen_box_frame(Rng& rng, int samples) {
    Point3 h{rng.uniform(0.25, 0.85), rng.uniform(0.25, 0.85), rng.uniform(0.25, 0.85)};
    auto center_for = [&](double half) { return rng.uniform(-(kCubeMargin - half), kCubeMargin - half); };
    Point3 c{center_for(h.x), center_for(h.y), center_for(h.z)};
    std::vector<Point3> verts;
    for (int i = 0; i < 8; ++i)
        verts.push_back({c.x + ((i & 1) ? h.x : -h.x), c.y + ((i & 2) ? h.y : -h.y), c.z + ((i & 4) ? h.z : -h.z)});
    std::vector<std::array<int, 2>> es = {{0, 1}, {0, 2}, {0, 4}, {1, 3}, {1, 5}, {2, 3},
                                          {2, 6}, {3, 7}, {4, 5}, {4, 6}, {5, 7}, {6, 7}};
    std::vector<CurveSpec> specs;
    for (auto& e : es) specs.push_back(LineSpec{verts[size_t(e[0])], verts[size_t(e[1])]});
    return assemble(verts, es, specs, samples);
}

inline Wireframe gen_prism(Rng& rng, int samples) {
    int n = 3 + rng.index(3);
    double r = rng.uniform(0.3, 0.8);
    double h = rng.uniform(0.5, 1.4);
    double cx = rng.uniform(-(kCubeMargin - r), kCubeMargin - r);
    double cy = rng.uniform(-(kCubeMargin - r), kCubeMargin - r);
    double z0 = rng.uniform(-kCubeMargin, kCubeMargin - h);
    double phase = rng.uniform(0.0, 2.0 * kPi);
    std::vector<Point3> verts;
    for (int ring = 0; ring < 2; ++ring)
        for (int k = 0; k < n; ++k) {
            double a = phase + 2.0 * kPi * double(k) / double(n);
            verts.push_back({cx + r * std::cos(a), cy + r * std::sin(a), z0 + (ring ? h : 0.0)});
        }
    std::vector<std::array<int, 2>> es;
    std::vector<CurveSpec> specs;
    for (int ring = 0; ring < 2; ++ring)
        for (int k = 0; k < n; ++k) {
            int a = ring * n + k, b = ring * n + (k + 1) % n;
            es.push_back({a, b});
            specs.push_back(LineSpec{verts[size_t(a)], verts[size_t(b)]});
        }
    for (int k = 0; k < n; ++k) {
        es.push_back({k, n + k});
        specs.push_back(LineSpec{verts[size_t(k)], verts[size_t(n + k)]});
    }
    return assemble(verts, es, specs, samples);
}

inline Wireframe gen_cylinder(Rng& rng, int samples) {
    double r = rng.uniform(0.3, 0.8);
    double h = rng.uniform(0.5, 1.4);
    double cx = rng.uniform(-(kCubeMargin - r), kCubeMargin - r);
    double cy = rng.uniform(-(kCubeMargin - r), kCubeMargin - r);
    double z0 = rng.uniform(-kCubeMargin, kCubeMargin - h);
    double phase = rng.uniform(0.0, 2.0 * kPi);
    const double quarter = 0.5 * kPi;
    std::vector<Point3> verts;
    for (int ring = 0; ring < 2; ++ring)
        for (int k = 0; k < 4; ++k) {
            double a = phase + quarter * double(k);
            verts.push_back({cx + r * std::cos(a), cy + r * std::sin(a), z0 + (ring ? h : 0.0)});
        }
    std::vector<std::array<int, 2>> es;
    std::vector<CurveSpec> specs;
    for (int ring = 0; ring < 2; ++ring)
        for (int k = 0; k < 4; ++k) {
            es.push_back({ring * 4 + k, ring * 4 + (k + 1) % 4});
            specs.push_back(ArcSpec{{cx, cy, z0 + (ring ? h : 0.0)},
                                    r,
                                    {1, 0, 0},
                                    {0, 1, 0},
                                    phase + quarter * double(k),
                                    phase + quarter * double(k + 1)});
        }
    int rungs = 2 + rng.index(3);
    std::array<int, 4> order{0, 1, 2, 3};
    rng.shuffle(order.begin(), order.end());
    for (int i = 0; i < rungs; ++i) {
        int k = order[size_t(i)];
        es.push_back({k, 4 + k});
        specs.push_back(LineSpec{verts[size_t(k)], verts[size_t(4 + k)]});
    }
    return assemble(verts, es, specs, samples);
}

// Plain rectangular base, fillet-cornered top ring, four slanted joins:
// 4 lines + (4 arcs + 4 lines) + 4 lines = 16 curves, 12 vertices.
inline Wireframe gen_fillet_box(Rng& rng, int samples) {
    double ax = rng.uniform(0.35, 0.8), ay = rng.uniform(0.35, 0.8);
    double f = rng.uniform(0.08, 0.45 * std::min(ax, ay));
    double h = rng.uniform(0.5, 1.4);
    double cx = rng.uniform(-(kCubeMargin - ax), kCubeMargin - ax);
    double cy = rng.uniform(-(kCubeMargin - ay), kCubeMargin - ay);
    double z0 = rng.uniform(-kCubeMargin, kCubeMargin - h);
    double z1 = z0 + h;
    const double quarter = 0.5 * kPi;

    // Bottom rectangle corners, counter-clockwise from (+x, +y).
    double sx[4] = {1, -1, -1, 1}, sy[4] = {1, 1, -1, -1};
    std::vector<Point3> verts;
    for (int q = 0; q < 4; ++q) verts.push_back({cx + sx[q] * ax, cy + sy[q] * ay, z0});
    // Top ring: fillet arc around inner corner K_q spans angles [90q, 90(q+1)]
    // degrees; vertex 4+2q is the arc start, 4+2q+1 the arc end.
    double kxs[4], kys[4];
    for (int q = 0; q < 4; ++q) {
        kxs[q] = cx + sx[q] * (ax - f);
        kys[q] = cy + sy[q] * (ay - f);
    }
    for (int q = 0; q < 4; ++q) {
        double a0 = quarter * double(q), a1 = quarter * double(q + 1);
        verts.push_back({kxs[q] + f * std::cos(a0), kys[q] + f * std::sin(a0), z1});
        verts.push_back({kxs[q] + f * std::cos(a1), kys[q] + f * std::sin(a1), z1});
    }
    std::vector<std::array<int, 2>> es;
    std::vector<CurveSpec> specs;
    for (int q = 0; q < 4; ++q) {  // bottom rectangle
        es.push_back({q, (q + 1) % 4});
        specs.push_back(LineSpec{verts[size_t(q)], verts[size_t((q + 1) % 4)]});
    }
    for (int q = 0; q < 4; ++q) {  // top fillet arcs
        es.push_back({4 + 2 * q, 4 + 2 * q + 1});
        specs.push_back(
            ArcSpec{{kxs[q], kys[q], z1}, f, {1, 0, 0}, {0, 1, 0}, quarter * double(q), quarter * double(q + 1)});
    }
    for (int q = 0; q < 4; ++q) {  // top straight sides: arc end q -> arc start q+1
        int a = 4 + 2 * q + 1, b = 4 + 2 * ((q + 1) % 4);
        es.push_back({a, b});
        specs.push_back(LineSpec{verts[size_t(a)], verts[size_t(b)]});
    }
    for (int q = 0; q < 4; ++q) {  // slanted joins, bottom corner -> top arc start
        es.push_back({q, 4 + 2 * q});
        specs.push_back(LineSpec{verts[size_t(q)], verts[size_t(4 + 2 * q)]});
    }
    return assemble(verts, es, specs, samples);
}

inline Wireframe gen_polyline_network(Rng& rng, int samples, int min_curves, int max_curves) {
    int v = 4 + rng.index(5);
    std::vector<Point3> verts;
    int guard = 0;
    while (int(verts.size()) < v) {
        Point3 p{rng.uniform(-0.85, 0.85), rng.uniform(-0.85, 0.85), rng.uniform(-0.85, 0.85)};
        bool clear = true;
        for (const Point3& q : verts) clear = clear && dist(p, q) > 0.15;
        if (clear) verts.push_back(p);
        if (++guard > 10000) throw Error("polyline generator: vertex placement stalled");
    }
    std::vector<std::array<int, 2>> es;
    for (int i = 1; i < v; ++i) es.push_back({rng.index(i), i});  // random spanning tree
    int target = std::clamp(v - 1 + rng.index(4), min_curves, max_curves);
    guard = 0;
    while (int(es.size()) < target && guard++ < 10000) {
        int a = rng.index(v), b = rng.index(v);
        if (a == b) continue;
        if (a > b) std::swap(a, b);
        // Allow the occasional parallel edge; the codec supports multigraphs.
        bool dup = false;
        for (auto& e : es) dup = dup || (e[0] == a && e[1] == b);
        if (dup && rng.uniform() > 0.15) continue;
        es.push_back({a, b});
    }
    std::vector<CurveSpec> specs;
    for (auto& e : es) {
        const Point3& a = verts[size_t(e[0])];
        const Point3& b = verts[size_t(e[1])];
        if (rng.uniform() < 0.5) {
            specs.push_back(LineSpec{a, b});
        } else {
            auto bulge = [&](const Point3& base) {
                Point3 p = base + Point3{rng.normal() * 0.08, rng.normal() * 0.08, rng.normal() * 0.08};
                p.x = std::clamp(p.x, -0.95, 0.95);
                p.y = std::clamp(p.y, -0.95, 0.95);
                p.z = std::clamp(p.z, -0.95, 0.95);
                return p;
            };
            specs.push_back(BezierSpec{a, bulge(lerp(a, b, 1.0 / 3.0)), bulge(lerp(a, b, 2.0 / 3.0)), b});
        }
    }
    return assemble(verts, es, specs, samples);
}

inline bool in_unit_cube(const Wireframe& w) {
    auto ok = [](const Point3& p) { return std::abs(p.x) <= 1.0 && std::abs(p.y) <= 1.0 && std::abs(p.z) <= 1.0; };
    for (const Point3& p : w.vertices)
        if (!ok(p)) return false;
    for (const Curve& c : w.curves)
        for (const Point3& p : c.samples)
            if (!ok(p)) return false;
    return true;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Generation

struct GenResult {
    Wireframe wire;
    Family family = Family::BoxFrame;
};

constexpr int kGenRetries = 64;

// Draws a family by weight, builds a shape, and accepts it only if it is
// valid, connected, inside the unit cube, within the curve-count range, and
// class-bound encodable. Returns the canonicalized wireframe.
inline GenResult gen_wireframe_tagged(const CorpusSpec& spec, Rng& rng) {
    spec.check();
    std::string last_reason = "no attempt";
    double eligible_total = 0;
    for (size_t f = 0; f < spec.weights.size(); ++f) {
        auto [lo, hi] = detail::family_curve_range(Family(f));
        if (hi >= spec.min_curves && lo <= spec.max_curves) eligible_total += spec.weights[f];
    }
    if (eligible_total <= 0) throw Error("gen_wireframe: no weighted family fits the curve-count range");
    for (int attempt = 0; attempt < kGenRetries; ++attempt) {
        double pick = rng.uniform(0.0, eligible_total);
        Family fam = Family::PolylineNetwork;
        for (size_t f = 0; f < spec.weights.size(); ++f) {
            auto [lo, hi] = detail::family_curve_range(Family(f));
            if (!(hi >= spec.min_curves && lo <= spec.max_curves) || spec.weights[f] <= 0) continue;
            if (pick < spec.weights[f]) {
                fam = Family(f);
                break;
            }
            pick -= spec.weights[f];
        }
        Rng sub = rng.sub("attempt", uint64_t(attempt));
        try {
            Wireframe w;
            switch (fam) {
                case Family::BoxFrame: w = detail::gen_box_frame(sub, spec.samples_per_curve); break;
                case Family::Prism: w = detail::gen_prism(sub, spec.samples_per_curve); break;
                case Family::Cylinder: w = detail::gen_cylinder(sub, spec.samples_per_curve); break;
                case Family::FilletBox: w = detail::gen_fillet_box(sub, spec.samples_per_curve); break;
                case Family::PolylineNetwork:
                    w = detail::gen_polyline_network(sub, spec.samples_per_curve, spec.min_curves, spec.max_curves);
                    break;
            }
            if (w.curve_count() < spec.min_curves || w.curve_count() > spec.max_curves)
                throw Error("curve count " + std::to_string(w.curve_count()) + " outside range");
            if (!detail::in_unit_cube(w)) throw Error("geometry escapes the unit cube");
            if (!is_valid(w)) throw Error("failed validation");
            CanonicalResult canon = canonical_order_detailed(w);  // throws on disconnection
            diff_encode(canon.adjacency);                         // throws on class overflow
            return {std::move(canon.wire), fam};
        } catch (const Error& e) {
            last_reason = std::string(family_name(fam)) + ": " + e.what();
        }
    }
    throw Error("gen_wireframe: exhausted " + std::to_string(kGenRetries) + " retries; last: " + last_reason);
}

inline Wireframe gen_wireframe(const CorpusSpec& spec, Rng& rng) { return gen_wireframe_tagged(spec, rng).wire; }

// Per-sample substreams: sample i is reproducible regardless of batch layout.
inline std::vector<GenResult> gen_corpus(const CorpusSpec& spec) {
    spec.check();
    if (spec.size < 1) throw Error("gen_corpus: spec.size must be >= 1");
    std::vector<GenResult> out;
    out.reserve(size_t(spec.size));
    Rng root(spec.seed);
    for (int i = 0; i < spec.size; ++i) {
        Rng sample = root.sub("sample", uint64_t(i));
        out.push_back(gen_wireframe_tagged(spec, sample));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Augmentation

// The 48 signed axis permutations: all axis-aligned 90-degree rotations and
// mirrors (full octahedral symmetry group).
inline const std::array<Mat3, 48>& octahedral_group() {
    static const std::array<Mat3, 48> group = [] {
        std::array<Mat3, 48> g{};
        int perms[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
        int n = 0;
        for (auto& perm : perms)
            for (int signs = 0; signs < 8; ++signs) {
                Mat3 m;
                m.m.fill(0.0);
                for (int r = 0; r < 3; ++r) m(r, perm[r]) = (signs >> r) & 1 ? -1.0 : 1.0;
                g[size_t(n++)] = m;
            }
        return g;
    }();
    return group;
}

inline Wireframe transform_wireframe(const Wireframe& w, const Mat3& m) {
    Wireframe out = w;
    for (Point3& p : out.vertices) p = m * p;
    for (Curve& c : out.curves)
        for (Point3& p : c.samples) p = m * p;
    return out;
}

// All 48 octahedral transforms of w, each re-canonicalized.
inline std::vector<Wireframe> augment48(const Wireframe& w) {
    std::vector<Wireframe> out;
    out.reserve(48);
    for (const Mat3& m : octahedral_group()) out.push_back(canonical_order(transform_wireframe(w, m)));
    return out;
}

// Uniform scale U[0.9,1.1] then per-axis translation U[-0.1,0.1]; topology
// untouched. Draw order is fixed: scale, tx, ty, tz.
inline Wireframe jitter(const Wireframe& w, Rng& rng) {
    double s = rng.uniform(0.9, 1.1);
    Point3 t{rng.uniform(-0.1, 0.1), rng.uniform(-0.1, 0.1), rng.uniform(-0.1, 0.1)};
    Wireframe out = w;
    for (Point3& p : out.vertices) p = s * p + t;
    for (Curve& c : out.curves)
        for (Point3& p : c.samples) p = s * p + t;
    return out;
}

// ---------------------------------------------------------------------------
// Deduplication

constexpr double kDedupGrid = 1e-3;

namespace detail {

inline void hash_i64(std::string& buf, int64_t v) {
    char b[8];
    std::memcpy(b, &v, 8);
    buf.append(b, 8);
}

inline int64_t quant(double x) { return int64_t(std::llround(x / kDedupGrid)); }

inline void hash_point(std::string& buf, const Point3& p) {
    hash_i64(buf, quant(p.x));
    hash_i64(buf, quant(p.y));
    hash_i64(buf, quant(p.z));
}

}  // namespace detail

// Digest of the canonical form with coordinates quantized to a 1e-3 grid:
// wireframes equal up to curve order, orientation, and sub-grid noise collide.
inline uint64_t dedup_hash(const Wireframe& w) {
    Wireframe c = canonical_order(w);
    std::string buf;
    buf.reserve(64 + c.curves.size() * 40);
    detail::hash_i64(buf, int64_t(c.vertex_count()));
    detail::hash_i64(buf, int64_t(c.curve_count()));
    for (const AdjRow& r : c.adjacency) {
        detail::hash_i64(buf, r.start);
        detail::hash_i64(buf, r.end);
    }
    for (const Point3& p : c.vertices) detail::hash_point(buf, p);
    for (const Curve& cv : c.curves) detail::hash_point(buf, cv.samples[(cv.samples.size() - 1) / 2]);
    return Rng::fnv1a(buf);
}

// ---------------------------------------------------------------------------
// Filtering

struct FilterResult {
    std::vector<Wireframe> kept;
    std::map<std::string, int> dropped;  // reason -> count

    int dropped_total() const {
        int n = 0;
        for (auto& [k, v] : dropped) n += v;
        return n;
    }
};

namespace detail {

// Combinatorial cuboid: 8 vertices of degree 3, 12 straight curves.
inline bool is_cuboid(const Wireframe& w) {
    if (w.vertex_count() != 8 || w.curve_count() != 12) return false;
    std::array<int, 8> degree{};
    for (const AdjRow& r : w.adjacency) {
        if (r.start < 0 || r.start >= 8 || r.end < 0 || r.end >= 8) return false;
        degree[size_t(r.start)]++;
        degree[size_t(r.end)]++;
    }
    for (int d : degree)
        if (d != 3) return false;
    for (const Curve& c : w.curves) {
        const Point3 a = c.front(), b = c.back();
        for (const Point3& p : c.samples) {
            double t = dist(a, b) > 0 ? dot(p - a, b - a) / dist2(a, b) : 0.0;
            if (dist(p, lerp(a, b, std::clamp(t, 0.0, 1.0))) > 1e-9) return false;
        }
    }
    return true;
}

}  // namespace detail

// Drops oversized, disconnected, or class-overflowing wireframes; `strict`
// additionally drops plain cuboids. Per-reason counts sum to input - kept.
inline FilterResult filter_corpus(const std::vector<Wireframe>& ws, int max_curves = 128, bool strict = false) {
    FilterResult out;
    for (const Wireframe& w : ws) {
        if (w.curve_count() > max_curves) {
            out.dropped["too_many_curves"]++;
            continue;
        }
        try {
            CanonicalResult canon = canonical_order_detailed(w);
            diff_encode(canon.adjacency);
            if (strict && detail::is_cuboid(canon.wire)) {
                out.dropped["cuboid"]++;
                continue;
            }
        } catch (const DisconnectedGraph&) {
            out.dropped["disconnected"]++;
            continue;
        } catch (const ClassOverflow&) {
            out.dropped["class_overflow"]++;
            continue;
        }
        out.kept.push_back(w);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Condition clouds

enum class CloudMode { Full, Partial };

// Half-space used by a partial cut: keeps p with dot(p - point, normal) >= 0.
struct PlaneCut {
    Point3 point, normal;
};

// Conditioning input for generation: points sampled from the curves (full) or
// the half of them on one side of a random plane through the centroid
// (partial), re-padded to exactly n. In partial mode the chosen plane is
// reported through cut_out when given.
inline std::vector<Point3> make_condition_cloud(const Wireframe& w, int n, CloudMode mode, Rng& rng,
                                                PlaneCut* cut_out = nullptr) {
    if (n < 1) throw Error("make_condition_cloud: n must be >= 1");
    if (mode == CloudMode::Full) return wireframe_to_pointcloud(w, n, &rng);

    std::vector<Point3> base = wireframe_to_pointcloud(w, n, &rng);
    Point3 centroid{0, 0, 0};
    for (const Point3& p : base) centroid += p;
    centroid = centroid / double(base.size());
    for (int attempt = 0; attempt < 64; ++attempt) {
        Point3 normal{rng.normal(), rng.normal(), rng.normal()};
        if (norm(normal) < 1e-6) continue;
        normal = normalized(normal);
        std::vector<Point3> kept;
        for (const Point3& p : base)
            if (dot(p - centroid, normal) >= 0.0) kept.push_back(p);
        if (kept.empty() || kept.size() == base.size()) continue;  // degenerate cut, re-draw plane
        // Re-pad to n by resampling the kept side.
        int rounds = 0;
        while (int(kept.size()) < n && rounds++ < 64) {
            Rng pad = rng.sub("pad", uint64_t(rounds));
            for (const Point3& p : wireframe_to_pointcloud(w, n, &pad)) {
                if (int(kept.size()) >= n) break;
                if (dot(p - centroid, normal) >= 0.0) kept.push_back(p);
            }
        }
        if (int(kept.size()) == n) {
            if (cut_out) *cut_out = {centroid, normal};
            return kept;
        }
    }
    throw Error("make_condition_cloud: could not build a partial cloud (degenerate geometry?)");
}

}  // namespace clrwire
