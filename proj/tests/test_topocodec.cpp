#include "doctest.h"

#include <algorithm>
#include <numeric>

#include "clrwire/topocodec.hpp"
#include "test_helpers.hpp"

using namespace clrwire;
using testutil::near;

namespace {

bool same_wire(const Wireframe& a, const Wireframe& b) {
    if (a.vertices != b.vertices || a.adjacency.size() != b.adjacency.size()) return false;
    for (size_t i = 0; i < a.adjacency.size(); ++i)
        if (!(a.adjacency[i] == b.adjacency[i])) return false;
    if (a.curves.size() != b.curves.size()) return false;
    for (size_t i = 0; i < a.curves.size(); ++i)
        if (a.curves[i].samples != b.curves[i].samples) return false;
    return true;
}

// Relabel vertices by perm (old index i becomes perm[i]) and reorder curves by order.
Wireframe scramble(const Wireframe& w, const std::vector<int>& perm, const std::vector<int>& order,
                   uint64_t flip_mask) {
    Wireframe out;
    out.vertices.resize(w.vertices.size());
    for (size_t i = 0; i < w.vertices.size(); ++i) out.vertices[size_t(perm[i])] = w.vertices[i];
    for (size_t k = 0; k < order.size(); ++k) {
        size_t i = size_t(order[k]);
        AdjRow r{perm[size_t(w.adjacency[i].start)], perm[size_t(w.adjacency[i].end)]};
        Curve c = w.curves[i];
        if (flip_mask >> k & 1) {
            std::swap(r.start, r.end);
            c = c.reversed();
        }
        out.adjacency.push_back(r);
        out.curves.push_back(std::move(c));
    }
    return out;
}

}  // namespace

TEST_SUITE_BEGIN("topocodec");

TEST_CASE("unit square: canonical rows and diff classes") {
    Wireframe sq = testutil::make_square();
    CanonicalResult r = canonical_order_detailed(sq);
    REQUIRE(r.adjacency.rows.size() == 4);
    CHECK(r.adjacency.rows[0] == AdjRow{0, 1});
    CHECK(r.adjacency.rows[1] == AdjRow{0, 2});
    CHECK(r.adjacency.rows[2] == AdjRow{1, 3});
    CHECK(r.adjacency.rows[3] == AdjRow{2, 3});
    DiffAdjacency d = diff_encode(r.adjacency);
    CHECK(d.rows[0] == std::array<int, 2>{0, 1});
    CHECK(d.rows[1] == std::array<int, 2>{0, 2});
    CHECK(d.rows[2] == std::array<int, 2>{1, 2});
    CHECK(d.rows[3] == std::array<int, 2>{1, 1});
}

TEST_CASE("single edge encodes to [[0,1]]") {
    Wireframe w;
    w.vertices = {{0, 0, 0}, {1, 0, 0}};
    w.curves.push_back(sample_curve(LineSpec{{0, 0, 0}, {1, 0, 0}}, 8));
    w.adjacency.push_back({0, 1});
    DiffAdjacency d = diff_encode(canonical_order_detailed(w).adjacency);
    REQUIRE(d.rows.size() == 1);
    CHECK(d.rows[0] == std::array<int, 2>{0, 1});
}

TEST_CASE("square: all 4! curve orders canonicalize identically") {
    Wireframe sq = testutil::make_square();
    Wireframe ref = canonical_order(sq);
    std::vector<int> perm_v(sq.vertices.size());
    std::iota(perm_v.begin(), perm_v.end(), 0);
    std::vector<int> order = {0, 1, 2, 3};
    int checked = 0;
    do {
        for (uint64_t mask : {uint64_t(0), uint64_t(0b1010), uint64_t(0b1111)}) {
            Wireframe s = scramble(sq, perm_v, order, mask);
            CHECK(same_wire(canonical_order(s), ref));
            ++checked;
        }
    } while (std::next_permutation(order.begin(), order.end()));
    CHECK(checked == 72);
}

TEST_CASE("box: random vertex relabels and curve shuffles canonicalize identically") {
    Wireframe box = testutil::make_box();
    Wireframe ref = canonical_order(box);
    Rng rng(99);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<int> perm_v(box.vertices.size());
        std::iota(perm_v.begin(), perm_v.end(), 0);
        rng.shuffle(perm_v.begin(), perm_v.end());
        std::vector<int> order(box.curves.size());
        std::iota(order.begin(), order.end(), 0);
        rng.shuffle(order.begin(), order.end());
        Wireframe s = scramble(box, perm_v, order, rng.next_u64());
        CHECK(same_wire(canonical_order(s), ref));
    }
}

TEST_CASE("canonical curves start at their row's start vertex") {
    Wireframe box = canonical_order(testutil::make_box());
    for (size_t i = 0; i < box.curves.size(); ++i) {
        CHECK(near(box.curves[i].front(), box.vertices[size_t(box.adjacency[i].start)], 1e-12));
        CHECK(near(box.curves[i].back(), box.vertices[size_t(box.adjacency[i].end)], 1e-12));
    }
}

TEST_CASE("canonical_order is idempotent") {
    for (const Wireframe& w : {testutil::make_square(), testutil::make_box()}) {
        Wireframe once = canonical_order(w);
        CHECK(same_wire(canonical_order(once), once));
    }
}

TEST_CASE("curve_permutation maps original indices to their sorted rows") {
    Wireframe box = testutil::make_box();
    CanonicalResult r = canonical_order_detailed(box);
    for (size_t i = 0; i < box.curves.size(); ++i) {
        int k = r.adjacency.curve_permutation[i];
        const Curve& moved = r.wire.curves[size_t(k)];
        bool fwd = moved.samples == box.curves[i].samples;
        bool rev = moved.samples == box.curves[i].reversed().samples;
        CHECK((fwd || rev));
    }
}

TEST_CASE("parallel edges: order is independent of sample direction") {
    // Two distinct curves joining the same vertex pair; reversing one input
    // curve's samples must not change which sorted row it lands in.
    Wireframe w;
    w.vertices = {{0, 0, 0}, {1, 0, 0}};
    BezierSpec up{{0, 0, 0}, {0.3, 0.8, 0}, {0.7, 0.8, 0}, {1, 0, 0}};
    BezierSpec dn{{0, 0, 0}, {0.3, -0.8, 0}, {0.7, -0.8, 0}, {1, 0, 0}};
    w.curves.push_back(sample_curve(up, 16));
    w.curves.push_back(sample_curve(dn, 16));
    w.adjacency = {{0, 1}, {0, 1}};
    Wireframe ref = canonical_order(w);

    Wireframe flipped = w;
    std::swap(flipped.curves[0], flipped.curves[1]);
    std::swap(flipped.adjacency[0], flipped.adjacency[1]);
    flipped.curves[0] = flipped.curves[0].reversed();
    std::swap(flipped.adjacency[0].start, flipped.adjacency[0].end);
    CHECK(same_wire(canonical_order(flipped), ref));
}

TEST_CASE("disconnected input reports component sizes") {
    Wireframe w;
    for (int t = 0; t < 2; ++t) {
        double off = t * 10.0;
        int base = t * 3;
        w.vertices.push_back({off, 0, 0});
        w.vertices.push_back({off + 1, 0, 0});
        w.vertices.push_back({off, 1, 0});
        for (auto [a, b] : {std::pair{0, 1}, {1, 2}, {0, 2}}) {
            w.curves.push_back(sample_curve(LineSpec{w.vertices[size_t(base + a)], w.vertices[size_t(base + b)]}, 8));
            w.adjacency.push_back({base + a, base + b});
        }
    }
    CHECK_THROWS_AS(canonical_order(w), DisconnectedGraph);
    try {
        canonical_order(w);
    } catch (const DisconnectedGraph& e) {
        CHECK(e.component_sizes == std::vector<int>{3, 3});
    }
}

TEST_CASE("diff_encode rejects class overflow") {
    SortedAdjacency a;
    a.rows = {{0, 1}, {6, 7}};  // colDiff 6 at row 1
    CHECK_THROWS_AS(diff_encode(a), ClassOverflow);
    try {
        diff_encode(a);
    } catch (const ClassOverflow& e) {
        CHECK(e.row == 1);
        CHECK(e.value == 6);
        CHECK(e.limit == kColClasses);
    }
    SortedAdjacency b;
    b.rows = {{0, 24}};  // rowDiff 24 at row 0
    CHECK_THROWS_AS(diff_encode(b), ClassOverflow);
}

TEST_CASE("diff round-trip is exact both ways") {
    Rng rng(4242);
    for (int trial = 0; trial < 500; ++trial) {
        int n = 1 + rng.index(40);
        DiffAdjacency d;
        for (int i = 0; i < n; ++i)
            d.rows.push_back({rng.index(kColClasses), i == 0 ? 1 + rng.index(kRowClasses - 1) : rng.index(kRowClasses)});
        SortedAdjacency a = diff_decode(d);
        DiffAdjacency back = diff_encode(a);
        CHECK(back.rows == d.rows);
    }
}

TEST_CASE("diff_decode rejects out-of-range classes") {
    CHECK_THROWS_AS(diff_decode(DiffAdjacency{{{6, 0}}}), Error);
    CHECK_THROWS_AS(diff_decode(DiffAdjacency{{{0, 24}}}), Error);
    CHECK_THROWS_AS(diff_decode(DiffAdjacency{{{-1, 0}}}), Error);
}

TEST_CASE("canonical adjacencies satisfy is_canonical_adjacency") {
    for (const Wireframe& w : {testutil::make_square(), testutil::make_box()})
        CHECK(is_canonical_adjacency(canonical_order_detailed(w).adjacency.rows));
    CHECK(!is_canonical_adjacency({{1, 0}}));
    CHECK(!is_canonical_adjacency({{0, 2}, {0, 1}}));
    CHECK(!is_canonical_adjacency({{1, 2}}));
}

TEST_CASE("class_histogram counts every row once") {
    Wireframe box = testutil::make_box();
    Wireframe sq = testutil::make_square();
    std::vector<DiffAdjacency> corpus = {diff_encode(canonical_order_detailed(box).adjacency),
                                         diff_encode(canonical_order_detailed(sq).adjacency)};
    ClassHistogram h = class_histogram(corpus);
    long long col_total = std::accumulate(h.col_counts.begin(), h.col_counts.end(), 0LL);
    long long row_total = std::accumulate(h.row_counts.begin(), h.row_counts.end(), 0LL);
    CHECK(col_total == 16);
    CHECK(row_total == 16);
}

TEST_SUITE_END();
