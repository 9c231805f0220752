#pragma once

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

#include "clrwire/error.hpp"
#include "clrwire/geometry.hpp"
#include "clrwire/rng.hpp"

namespace clrwire {

constexpr int kCurveSamples = 256;       // default per-curve sample count
constexpr double kVertexEps = 1e-4;      // endpoint/vertex consistency tolerance
constexpr double kSegmentEps = 1e-9;     // point-on-polyline tolerance

// One edge of a wireframe: ordered 3D samples along the curve.
struct Curve {
    std::vector<Point3> samples;

    Curve() = default;
    explicit Curve(std::vector<Point3> pts) : samples(std::move(pts)) {}

    const Point3& front() const { return samples.front(); }
    const Point3& back() const { return samples.back(); }
    int size() const { return int(samples.size()); }

    double arc_length() const {
        double L = 0;
        for (size_t i = 1; i < samples.size(); ++i) L += dist(samples[i - 1], samples[i]);
        return L;
    }
    Curve reversed() const {
        Curve c = *this;
        std::reverse(c.samples.begin(), c.samples.end());
        return c;
    }
};

struct AdjRow {
    int start = 0;
    int end = 0;
    friend bool operator==(const AdjRow&, const AdjRow&) = default;
};

// Curves + shared vertices + per-curve (start, end) vertex indices.
struct Wireframe {
    std::vector<Curve> curves;
    std::vector<Point3> vertices;
    std::vector<AdjRow> adjacency;

    int curve_count() const { return int(curves.size()); }
    int vertex_count() const { return int(vertices.size()); }
};

// Per-curve endpoint coordinates, (start, end) flattened to 6 reals.
struct VertexCoords {
    std::array<double, 6> v{};
    static VertexCoords from(const Point3& s, const Point3& e) {
        return VertexCoords{{s.x, s.y, s.z, e.x, e.y, e.z}};
    }
    Point3 start() const { return {v[0], v[1], v[2]}; }
    Point3 end() const { return {v[3], v[4], v[5]}; }
};

// ---------------------------------------------------------------------------
// Analytic curve specs and sampling

struct LineSpec {
    Point3 a, b;
};
// point(t) = center + radius*(cos(a0+t*(a1-a0))*u + sin(a0+t*(a1-a0))*v)
struct ArcSpec {
    Point3 center;
    double radius = 1.0;
    Point3 u{1, 0, 0}, v{0, 1, 0};  // orthonormal plane basis
    double angle0 = 0.0, angle1 = 1.5707963267948966;
};
struct BezierSpec {
    Point3 p0, p1, p2, p3;
};
using CurveSpec = std::variant<LineSpec, ArcSpec, BezierSpec>;

inline Point3 eval_spec(const CurveSpec& spec, double t) {
    if (auto* l = std::get_if<LineSpec>(&spec)) return lerp(l->a, l->b, t);
    if (auto* a = std::get_if<ArcSpec>(&spec)) {
        double ang = a->angle0 + t * (a->angle1 - a->angle0);
        return a->center + a->radius * (std::cos(ang) * a->u + std::sin(ang) * a->v);
    }
    const auto& b = std::get<BezierSpec>(spec);
    double s = 1.0 - t;
    return (s * s * s) * b.p0 + (3 * s * s * t) * b.p1 + (3 * s * t * t) * b.p2 + (t * t * t) * b.p3;
}

// Uniform parameter sampling of an analytic spec; endpoints are the exact t=0/t=1 evaluations.
inline Curve sample_curve(const CurveSpec& spec, int s) {
    if (s < 2) throw Error("sample_curve: need at least 2 samples");
    if (auto* l = std::get_if<LineSpec>(&spec)) {
        if (dist2(l->a, l->b) == 0.0) throw DegenerateCurve("line endpoints coincide");
    } else if (auto* a = std::get_if<ArcSpec>(&spec)) {
        if (a->radius <= 0.0) throw DegenerateCurve("arc radius <= 0");
        if (a->angle0 == a->angle1) throw DegenerateCurve("arc angle span is zero");
    } else {
        const auto& b = std::get<BezierSpec>(spec);
        if (b.p0 == b.p1 && b.p1 == b.p2 && b.p2 == b.p3) throw DegenerateCurve("all Bezier control points coincide");
    }
    Curve c;
    c.samples.reserve(size_t(s));
    for (int i = 0; i < s; ++i) c.samples.push_back(eval_spec(spec, double(i) / double(s - 1)));
    return c;
}

// ---------------------------------------------------------------------------
// Point cloud sampling

// n points uniform by polyline arc length. With an rng, positions are jittered
// within their strata; without, stratum midpoints are used (n=1 -> arc midpoint).
inline std::vector<Point3> wireframe_to_pointcloud(const Wireframe& w, int n, Rng* rng = nullptr) {
    if (n < 1) throw Error("wireframe_to_pointcloud: n must be >= 1");
    struct Seg {
        Point3 a, b;
        double cum;  // cumulative length up to segment end
    };
    std::vector<Seg> segs;
    double total = 0;
    for (const auto& c : w.curves)
        for (size_t i = 1; i < c.samples.size(); ++i) {
            double d = dist(c.samples[i - 1], c.samples[i]);
            if (d > 0) {
                total += d;
                segs.push_back({c.samples[i - 1], c.samples[i], total});
            }
        }
    if (segs.empty() || total <= 0.0) throw EmptyWireframe("total arc length is zero");

    std::vector<Point3> out;
    out.reserve(size_t(n));
    size_t cursor = 0;
    for (int i = 0; i < n; ++i) {
        double u = rng ? rng->uniform() : 0.5;
        double s = (double(i) + u) / double(n) * total;
        while (cursor + 1 < segs.size() && segs[cursor].cum < s) ++cursor;
        const Seg& sg = segs[cursor];
        double seg_len = dist(sg.a, sg.b);
        double s0 = sg.cum - seg_len;
        double t = std::clamp((s - s0) / seg_len, 0.0, 1.0);
        out.push_back(lerp(sg.a, sg.b, t));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Validation

struct Violation {
    enum Kind {
        NonFinite,
        TooFewCurves,
        TooFewVertices,
        IndexOutOfRange,
        EndpointMismatch,
        DegenerateCurveSamples,
    } kind;
    int index = -1;  // offending curve or vertex index, -1 when global
    std::string message;
};

inline std::vector<Violation> validate(const Wireframe& w, double eps_v = kVertexEps) {
    std::vector<Violation> out;
    if (w.curves.empty()) out.push_back({Violation::TooFewCurves, -1, "wireframe has no curves"});
    if (w.vertices.size() < 2) out.push_back({Violation::TooFewVertices, -1, "wireframe has fewer than 2 vertices"});
    for (size_t i = 0; i < w.vertices.size(); ++i)
        if (!w.vertices[i].finite())
            out.push_back({Violation::NonFinite, int(i), "vertex " + std::to_string(i) + " has non-finite coordinates"});
    const int V = int(w.vertices.size());
    for (size_t i = 0; i < w.curves.size(); ++i) {
        const Curve& c = w.curves[i];
        if (c.samples.size() < 2) {
            out.push_back({Violation::DegenerateCurveSamples, int(i), "curve " + std::to_string(i) + " has fewer than 2 samples"});
            continue;
        }
        bool finite = true;
        for (const auto& p : c.samples)
            if (!p.finite()) {
                finite = false;
                break;
            }
        if (!finite) {
            out.push_back({Violation::NonFinite, int(i), "curve " + std::to_string(i) + " has non-finite samples"});
            continue;
        }
        if (c.arc_length() == 0.0)
            out.push_back({Violation::DegenerateCurveSamples, int(i), "curve " + std::to_string(i) + " has zero length"});
        if (i < w.adjacency.size()) {
            const AdjRow& r = w.adjacency[i];
            if (r.start < 0 || r.start >= V || r.end < 0 || r.end >= V) {
                out.push_back({Violation::IndexOutOfRange, int(i), "curve " + std::to_string(i) + " adjacency index out of range"});
                continue;
            }
            if (dist(c.front(), w.vertices[size_t(r.start)]) > eps_v || dist(c.back(), w.vertices[size_t(r.end)]) > eps_v)
                out.push_back({Violation::EndpointMismatch, int(i), "curve " + std::to_string(i) + " endpoints do not match adjacency vertices"});
        }
    }
    if (w.adjacency.size() != w.curves.size())
        out.push_back({Violation::IndexOutOfRange, -1, "adjacency row count != curve count"});
    return out;
}

inline bool is_valid(const Wireframe& w, double eps_v = kVertexEps) { return validate(w, eps_v).empty(); }

// ---------------------------------------------------------------------------
// JSON serialization (schema version "1")

inline nlohmann::json wireframe_to_json(const Wireframe& w) {
    nlohmann::json j;
    j["version"] = "1";
    auto& jc = j["curves"] = nlohmann::json::array();
    for (const auto& c : w.curves) {
        nlohmann::json pts = nlohmann::json::array();
        for (const auto& p : c.samples) pts.push_back({p.x, p.y, p.z});
        jc.push_back(std::move(pts));
    }
    auto& jv = j["vertices"] = nlohmann::json::array();
    for (const auto& p : w.vertices) jv.push_back({p.x, p.y, p.z});
    auto& ja = j["adjacency"] = nlohmann::json::array();
    for (const auto& r : w.adjacency) ja.push_back({r.start, r.end});
    return j;
}

inline Wireframe wireframe_from_json(const nlohmann::json& j) {
    for (const char* key : {"version", "curves", "vertices", "adjacency"})
        if (!j.contains(key)) throw SchemaError(std::string("missing key \"") + key + "\"");
    if (j["version"].get<std::string>() != "1")
        throw SchemaError("unsupported version \"" + j["version"].get<std::string>() + "\", expected \"1\"");
    auto to_point = [](const nlohmann::json& p, const char* where) -> Point3 {
        if (!p.is_array() || p.size() != 3) throw SchemaError(std::string(where) + ": expected [x,y,z]");
        return {p[0].get<double>(), p[1].get<double>(), p[2].get<double>()};
    };
    Wireframe w;
    for (const auto& jc : j["curves"]) {
        Curve c;
        for (const auto& p : jc) c.samples.push_back(to_point(p, "curves"));
        w.curves.push_back(std::move(c));
    }
    for (const auto& p : j["vertices"]) w.vertices.push_back(to_point(p, "vertices"));
    for (const auto& r : j["adjacency"]) {
        if (!r.is_array() || r.size() != 2) throw SchemaError("adjacency: expected [start,end]");
        w.adjacency.push_back({r[0].get<int>(), r[1].get<int>()});
    }
    return w;
}

// Atomic write: temp file in the target directory, then rename.
inline void write_text_atomic(const std::filesystem::path& path, const std::string& text) {
    namespace fs = std::filesystem;
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
        out << text;
        if (!out) throw IoError("write failed for " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) throw IoError("rename " + tmp.string() + " -> " + path.string() + ": " + ec.message());
}

inline std::filesystem::path save_json(const Wireframe& w, const std::filesystem::path& path) {
    write_text_atomic(path, wireframe_to_json(w).dump());
    return path;
}

inline Wireframe load_json(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
    return wireframe_from_json(j);
}

// ---------------------------------------------------------------------------
// OBJ export: `v` records for all samples, one `l` polyline per curve.

inline std::filesystem::path export_obj(const Wireframe& w, const std::filesystem::path& path) {
    if (w.curves.empty()) throw EmptyWireframe("cannot export a wireframe with no curves");
    std::ostringstream out;
    out << "# clrwire wireframe: " << w.curves.size() << " curves, " << w.vertices.size() << " vertices\n";
    char buf[128];
    for (const auto& c : w.curves)
        for (const auto& p : c.samples) {
            std::snprintf(buf, sizeof buf, "v %.17g %.17g %.17g\n", p.x, p.y, p.z);
            out << buf;
        }
    int base = 1;  // OBJ indices are 1-based and continue across curves
    for (const auto& c : w.curves) {
        out << "l";
        for (int i = 0; i < c.size(); ++i) out << ' ' << base + i;
        out << '\n';
        base += c.size();
    }
    write_text_atomic(path, out.str());
    return path;
}

}  // namespace clrwire
