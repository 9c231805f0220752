#pragma once

#include <algorithm>
#include <array>
#include <deque>
#include <numeric>
#include <vector>

#include "clrwire/error.hpp"
#include "clrwire/wireframe.hpp"

namespace clrwire {

constexpr int kColClasses = 6;   // colDiff in [0, 6)
constexpr int kRowClasses = 24;  // rowDiff in [0, 24)
constexpr double kOrderTol = 1e-9;

// Adjacency after canonical ordering: start <= end, rows lexicographically sorted.
struct SortedAdjacency {
    std::vector<AdjRow> rows;
    std::vector<int> curve_permutation;  // original curve index -> sorted row index
};

// Per-row (colDiff, rowDiff) classes of the sorted adjacency.
struct DiffAdjacency {
    std::vector<std::array<int, 2>> rows;  // [colDiff, rowDiff]
};

namespace detail {

// z-y-x comparison with tolerance, falling back to exact compare on near-ties.
inline bool zyx_less(const Point3& a, const Point3& b, double tol = kOrderTol) {
    if (std::abs(a.z - b.z) > tol) return a.z < b.z;
    if (std::abs(a.y - b.y) > tol) return a.y < b.y;
    if (std::abs(a.x - b.x) > tol) return a.x < b.x;
    if (a.z != b.z) return a.z < b.z;
    if (a.y != b.y) return a.y < b.y;
    return a.x < b.x;
}

// Reversal-invariant ordering key for parallel edges: sum of the two middle samples.
inline std::array<double, 3> curve_midkey(const Curve& c) {
    size_t n = c.samples.size();
    const Point3& m1 = c.samples[(n - 1) / 2];
    const Point3& m2 = c.samples[n - 1 - (n - 1) / 2];
    return {m1.z + m2.z, m1.y + m2.y, m1.x + m2.x};
}

}  // namespace detail

struct CanonicalResult {
    Wireframe wire;
    SortedAdjacency adjacency;
};

// Canonical vertex ordering (z-y-x sort, then BFS relabel by visit time) and row
// normalization: start <= end per row, rows sorted ascending, curves reordered and
// oriented so sample[0] sits at the row's start vertex.
inline CanonicalResult canonical_order_detailed(const Wireframe& w) {
    const int V = w.vertex_count();
    const int N = w.curve_count();
    if (V < 1 || N < 1) throw Error("canonical_order: empty wireframe");

    // Initial total order by (z, y, x); input index as last-resort tiebreak.
    std::vector<int> by_zyx(static_cast<size_t>(V));
    std::iota(by_zyx.begin(), by_zyx.end(), 0);
    std::stable_sort(by_zyx.begin(), by_zyx.end(), [&](int a, int b) {
        return detail::zyx_less(w.vertices[size_t(a)], w.vertices[size_t(b)]);
    });
    std::vector<int> rank(static_cast<size_t>(V));
    for (int i = 0; i < V; ++i) rank[size_t(by_zyx[size_t(i)])] = i;

    std::vector<std::vector<int>> nbrs(static_cast<size_t>(V));
    for (const auto& r : w.adjacency) {
        nbrs[size_t(r.start)].push_back(r.end);
        nbrs[size_t(r.end)].push_back(r.start);
    }
    for (auto& lst : nbrs) {
        std::sort(lst.begin(), lst.end(), [&](int a, int b) { return rank[size_t(a)] < rank[size_t(b)]; });
        lst.erase(std::unique(lst.begin(), lst.end()), lst.end());
    }

    // BFS from the z-y-x minimum, neighbors in current-rank order.
    std::vector<int> new_index(size_t(V), -1);
    std::deque<int> queue;
    int next = 0;
    queue.push_back(by_zyx[0]);
    new_index[size_t(by_zyx[0])] = next++;
    while (!queue.empty()) {
        int v = queue.front();
        queue.pop_front();
        for (int u : nbrs[size_t(v)])
            if (new_index[size_t(u)] < 0) {
                new_index[size_t(u)] = next++;
                queue.push_back(u);
            }
    }
    if (next != V) {
        std::vector<int> comp(size_t(V), -1);
        std::vector<int> sizes;
        for (int s = 0; s < V; ++s) {
            if (comp[size_t(s)] >= 0) continue;
            int id = int(sizes.size());
            int count = 0;
            std::deque<int> q{s};
            comp[size_t(s)] = id;
            while (!q.empty()) {
                int v = q.front();
                q.pop_front();
                ++count;
                for (int u : nbrs[size_t(v)])
                    if (comp[size_t(u)] < 0) {
                        comp[size_t(u)] = id;
                        q.push_back(u);
                    }
            }
            sizes.push_back(count);
        }
        std::sort(sizes.rbegin(), sizes.rend());
        throw DisconnectedGraph(sizes);
    }

    struct Row {
        AdjRow row;
        bool flipped;
        int original;
        std::array<double, 3> midkey;
    };
    std::vector<Row> rows;
    rows.reserve(size_t(N));
    for (int i = 0; i < N; ++i) {
        int s = new_index[size_t(w.adjacency[size_t(i)].start)];
        int e = new_index[size_t(w.adjacency[size_t(i)].end)];
        bool flip = s > e;
        if (flip) std::swap(s, e);
        rows.push_back({{s, e}, flip, i, detail::curve_midkey(w.curves[size_t(i)])});
    }
    std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
        if (a.row.start != b.row.start) return a.row.start < b.row.start;
        if (a.row.end != b.row.end) return a.row.end < b.row.end;
        if (a.midkey != b.midkey) return a.midkey < b.midkey;
        return a.original < b.original;
    });

    CanonicalResult out;
    out.wire.vertices.resize(size_t(V));
    for (int v = 0; v < V; ++v) out.wire.vertices[size_t(new_index[size_t(v)])] = w.vertices[size_t(v)];
    out.wire.curves.reserve(size_t(N));
    out.adjacency.curve_permutation.resize(size_t(N));
    for (size_t k = 0; k < rows.size(); ++k) {
        const Row& r = rows[k];
        out.wire.curves.push_back(r.flipped ? w.curves[size_t(r.original)].reversed() : w.curves[size_t(r.original)]);
        out.wire.adjacency.push_back(r.row);
        out.adjacency.rows.push_back(r.row);
        out.adjacency.curve_permutation[size_t(r.original)] = int(k);
    }
    return out;
}

inline Wireframe canonical_order(const Wireframe& w) { return canonical_order_detailed(w).wire; }

inline bool is_canonical_adjacency(const std::vector<AdjRow>& rows) {
    for (size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].start > rows[i].end) return false;
        if (i > 0 && (rows[i - 1].start > rows[i].start ||
                      (rows[i - 1].start == rows[i].start && rows[i - 1].end > rows[i].end)))
            return false;
    }
    return !rows.empty() && rows[0].start == 0;
}

inline DiffAdjacency diff_encode(const SortedAdjacency& a) {
    if (a.rows.empty()) throw Error("diff_encode: no rows");
    DiffAdjacency d;
    d.rows.reserve(a.rows.size());
    int prev_start = 0;  // row 0 diffs against start index 0
    for (size_t i = 0; i < a.rows.size(); ++i) {
        const AdjRow& r = a.rows[i];
        if (r.start > r.end) throw Error("diff_encode: row " + std::to_string(i) + " has start > end");
        int col = r.start - prev_start;
        int row = r.end - r.start;
        if (col < 0) throw Error("diff_encode: rows not sorted at " + std::to_string(i));
        if (col >= kColClasses) throw ClassOverflow(int(i), col, kColClasses);
        if (row >= kRowClasses) throw ClassOverflow(int(i), row, kRowClasses);
        d.rows.push_back({col, row});
        prev_start = r.start;
    }
    return d;
}

inline SortedAdjacency diff_decode(const DiffAdjacency& d) {
    SortedAdjacency a;
    a.rows.reserve(d.rows.size());
    int start = 0;
    for (size_t i = 0; i < d.rows.size(); ++i) {
        int col = d.rows[i][0], row = d.rows[i][1];
        if (col < 0 || col >= kColClasses || row < 0 || row >= kRowClasses)
            throw Error("diff_decode: class out of bounds at row " + std::to_string(i));
        start += col;
        a.rows.push_back({start, start + row});
    }
    a.curve_permutation.resize(a.rows.size());
    std::iota(a.curve_permutation.begin(), a.curve_permutation.end(), 0);
    return a;
}

struct ClassHistogram {
    std::array<long long, kColClasses> col_counts{};
    std::array<long long, kRowClasses> row_counts{};
};

inline ClassHistogram class_histogram(const std::vector<DiffAdjacency>& corpus) {
    if (corpus.empty()) throw Error("class_histogram: empty corpus");
    ClassHistogram h;
    for (const auto& d : corpus)
        for (const auto& r : d.rows) {
            h.col_counts[size_t(r[0])]++;
            h.row_counts[size_t(r[1])]++;
        }
    return h;
}

}  // namespace clrwire
