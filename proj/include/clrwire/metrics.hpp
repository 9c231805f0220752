#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "clrwire/error.hpp"
#include "clrwire/wireframe.hpp"

namespace clrwire {

using PointSet = std::vector<Point3>;

// ---------------------------------------------------------------------------
// Nearest-neighbor acceleration

// Static 3D kd-tree; exact nearest queries (agrees with a linear scan).
class KdTree3 {
public:
    explicit KdTree3(PointSet pts) : pts_(std::move(pts)) {
        if (pts_.empty()) throw EmptySet("kd-tree over no points");
        std::vector<int> idx(pts_.size());
        std::iota(idx.begin(), idx.end(), 0);
        nodes_.reserve(pts_.size());
        root_ = build(idx, 0, int(idx.size()), 0);
    }

    // (index, squared distance) of the nearest stored point.
    std::pair<int, double> nearest(const Point3& q) const {
        int best = -1;
        double best_d2 = std::numeric_limits<double>::infinity();
        search(root_, q, best, best_d2);
        return {best, best_d2};
    }

    double nearest_dist2(const Point3& q) const { return nearest(q).second; }
    const PointSet& points() const { return pts_; }

private:
    struct Node {
        int point, left, right, axis;
    };
    PointSet pts_;
    std::vector<Node> nodes_;
    int root_ = -1;

    static double coord(const Point3& p, int axis) { return axis == 0 ? p.x : axis == 1 ? p.y : p.z; }

    int build(std::vector<int>& idx, int lo, int hi, int depth) {
        if (lo >= hi) return -1;
        int axis = depth % 3;
        int mid = (lo + hi) / 2;
        std::nth_element(idx.begin() + lo, idx.begin() + mid, idx.begin() + hi, [&](int a, int b) {
            double ca = coord(pts_[size_t(a)], axis), cb = coord(pts_[size_t(b)], axis);
            if (ca != cb) return ca < cb;
            return a < b;
        });
        int me = int(nodes_.size());
        nodes_.push_back({idx[size_t(mid)], -1, -1, axis});
        int l = build(idx, lo, mid, depth + 1);
        int r = build(idx, mid + 1, hi, depth + 1);
        nodes_[size_t(me)].left = l;
        nodes_[size_t(me)].right = r;
        return me;
    }

    void search(int ni, const Point3& q, int& best, double& best_d2) const {
        if (ni < 0) return;
        const Node& n = nodes_[size_t(ni)];
        const Point3& p = pts_[size_t(n.point)];
        double d2 = dist2(q, p);
        if (d2 < best_d2 || (d2 == best_d2 && n.point < best)) {
            best_d2 = d2;
            best = n.point;
        }
        double delta = coord(q, n.axis) - coord(p, n.axis);
        int near = delta < 0 ? n.left : n.right;
        int far = delta < 0 ? n.right : n.left;
        search(near, q, best, best_d2);
        if (delta * delta <= best_d2) search(far, q, best, best_d2);
    }
};

// ---------------------------------------------------------------------------
// Pairwise set metrics

// Chamfer distance: sum of the two directional means of squared L2 nearest
// distances. This convention is fixed project-wide.
inline double chamfer(const PointSet& a, const PointSet& b) {
    if (a.empty() || b.empty()) throw EmptySet("chamfer over an empty set");
    KdTree3 ta(a), tb(b);
    double ab = 0, ba = 0;
    for (const Point3& p : a) ab += tb.nearest_dist2(p);
    for (const Point3& p : b) ba += ta.nearest_dist2(p);
    return ab / double(a.size()) + ba / double(b.size());
}

inline double chamfer(const KdTree3& ta, const KdTree3& tb) {
    double ab = 0, ba = 0;
    for (const Point3& p : ta.points()) ab += tb.nearest_dist2(p);
    for (const Point3& p : tb.points()) ba += ta.nearest_dist2(p);
    return ab / double(ta.points().size()) + ba / double(tb.points().size());
}

namespace detail {

constexpr double kAssignInf = std::numeric_limits<double>::infinity();

// Exact min-cost perfect matching (shortest augmenting paths with potentials),
// O(n^3). cost is row-major n x n. Returns total cost; match[row] = col.
inline double solve_assignment(const std::vector<double>& cost, int n, std::vector<int>& match) {
    std::vector<double> u(size_t(n) + 1, 0.0), v(size_t(n) + 1, 0.0);
    std::vector<int> p(size_t(n) + 1, 0), way(size_t(n) + 1, 0);
    for (int i = 1; i <= n; ++i) {
        p[0] = i;
        int j0 = 0;
        std::vector<double> minv(size_t(n) + 1, kAssignInf);
        std::vector<char> used(size_t(n) + 1, 0);
        do {
            used[size_t(j0)] = 1;
            int i0 = p[size_t(j0)], j1 = 0;
            double delta = kAssignInf;
            for (int j = 1; j <= n; ++j) {
                if (used[size_t(j)]) continue;
                double cur = cost[size_t(i0 - 1) * n + (j - 1)] - u[size_t(i0)] - v[size_t(j)];
                if (cur < minv[size_t(j)]) {
                    minv[size_t(j)] = cur;
                    way[size_t(j)] = j0;
                }
                if (minv[size_t(j)] < delta) {
                    delta = minv[size_t(j)];
                    j1 = j;
                }
            }
            for (int j = 0; j <= n; ++j) {
                if (used[size_t(j)]) {
                    u[size_t(p[size_t(j)])] += delta;
                    v[size_t(j)] -= delta;
                } else {
                    minv[size_t(j)] -= delta;
                }
            }
            j0 = j1;
        } while (p[size_t(j0)] != 0);
        do {
            int j1 = way[size_t(j0)];
            p[size_t(j0)] = p[size_t(j1)];
            j0 = j1;
        } while (j0 != 0);
    }
    match.assign(size_t(n), -1);
    double total = 0;
    for (int j = 1; j <= n; ++j) {
        if (p[size_t(j)] == 0) continue;
        match[size_t(p[size_t(j)] - 1)] = j - 1;
        total += cost[size_t(p[size_t(j)] - 1) * n + (j - 1)];
    }
    return total;
}

// Forward auction with epsilon scaling; person i bids for objects. Minimizes
// cost within n*eps_final of optimal. Used above the exact-solver size cutoff.
inline double auction_assignment(const std::vector<double>& cost, int n, std::vector<int>& match) {
    double cmax = 0;
    for (double c : cost) cmax = std::max(cmax, std::abs(c));
    if (cmax == 0.0) {
        match.resize(size_t(n));
        std::iota(match.begin(), match.end(), 0);
        return 0.0;
    }
    // Auction maximizes benefit; use negated cost.
    std::vector<double> price(size_t(n), 0.0);
    std::vector<int> owner(size_t(n), -1);
    match.assign(size_t(n), -1);
    double eps_final = 1e-7 * cmax / double(n);
    double eps = std::max(cmax / 2.0, eps_final);
    while (true) {
        std::fill(owner.begin(), owner.end(), -1);
        std::fill(match.begin(), match.end(), -1);
        std::vector<int> queue(static_cast<size_t>(n));
        std::iota(queue.begin(), queue.end(), 0);
        while (!queue.empty()) {
            int i = queue.back();
            queue.pop_back();
            double best = -kAssignInf, second = -kAssignInf;
            int best_j = -1;
            for (int j = 0; j < n; ++j) {
                double val = -cost[size_t(i) * n + j] - price[size_t(j)];
                if (val > best) {
                    second = best;
                    best = val;
                    best_j = j;
                } else if (val > second) {
                    second = val;
                }
            }
            double bid = best - second + eps;
            price[size_t(best_j)] += bid;
            if (owner[size_t(best_j)] >= 0) {
                match[size_t(owner[size_t(best_j)])] = -1;
                queue.push_back(owner[size_t(best_j)]);
            }
            owner[size_t(best_j)] = i;
            match[size_t(i)] = best_j;
        }
        if (eps <= eps_final) break;
        eps = std::max(eps / 5.0, eps_final);
    }
    double total = 0;
    for (int i = 0; i < n; ++i) total += cost[size_t(i) * n + size_t(match[i])];
    return total;
}

}  // namespace detail

constexpr int kExactEmdLimit = 512;

// Earth mover's distance: minimum mean L2 matching cost over perfect
// matchings. Exact up to kExactEmdLimit points, epsilon-approximate auction
// beyond (within ~1e-7 relative of optimal).
inline double emd(const PointSet& a, const PointSet& b) {
    if (a.empty() || b.empty()) throw EmptySet("emd over an empty set");
    if (a.size() != b.size())
        throw SizeMismatch("emd: " + std::to_string(a.size()) + " vs " + std::to_string(b.size()) + " points");
    const int n = int(a.size());
    std::vector<double> cost(size_t(n) * size_t(n));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) cost[size_t(i) * n + j] = dist(a[size_t(i)], b[size_t(j)]);
    std::vector<int> match;
    double total = n <= kExactEmdLimit ? detail::solve_assignment(cost, n, match)
                                       : detail::auction_assignment(cost, n, match);
    return total / double(n);
}

// Harmonic mean of precision and recall at distance tau; 0 when both are 0.
inline double fscore(const PointSet& a, const PointSet& b, double tau = 0.02) {
    if (a.empty() || b.empty()) throw EmptySet("fscore over an empty set");
    if (tau <= 0.0) throw Error("fscore: tau must be positive");
    KdTree3 ta(a), tb(b);
    double t2 = tau * tau;
    double prec = 0, rec = 0;
    for (const Point3& p : a) prec += tb.nearest_dist2(p) <= t2 ? 1.0 : 0.0;
    for (const Point3& p : b) rec += ta.nearest_dist2(p) <= t2 ? 1.0 : 0.0;
    prec /= double(a.size());
    rec /= double(b.size());
    if (prec + rec == 0.0) return 0.0;
    return 2.0 * prec * rec / (prec + rec);
}

// Chamfer over vertex sets only (vertex reconstruction precision).
inline double corner_cd(const Wireframe& a, const Wireframe& b) {
    if (a.vertices.empty() || b.vertices.empty()) throw EmptySet("corner_cd: wireframe has no vertices");
    return chamfer(a.vertices, b.vertices);
}

// ---------------------------------------------------------------------------
// Distribution metrics over sets of point sets

enum class BaseMetric { CD, EMD };

inline double set_distance(const PointSet& a, const PointSet& b, BaseMetric m) {
    return m == BaseMetric::CD ? chamfer(a, b) : emd(a, b);
}

namespace detail {

inline std::vector<std::vector<double>> cross_distances(const std::vector<PointSet>& gen,
                                                        const std::vector<PointSet>& ref, BaseMetric m) {
    if (gen.empty() || ref.empty()) throw EmptySet("distribution metric over an empty set list");
    std::vector<std::vector<double>> d(gen.size(), std::vector<double>(ref.size()));
    if (m == BaseMetric::CD) {
        std::vector<KdTree3> tg, tr;
        tg.reserve(gen.size());
        tr.reserve(ref.size());
        for (const auto& p : gen) tg.emplace_back(p);
        for (const auto& p : ref) tr.emplace_back(p);
        for (size_t i = 0; i < gen.size(); ++i)
            for (size_t j = 0; j < ref.size(); ++j) d[i][j] = chamfer(tg[i], tr[j]);
    } else {
        for (size_t i = 0; i < gen.size(); ++i)
            for (size_t j = 0; j < ref.size(); ++j) d[i][j] = emd(gen[i], ref[j]);
    }
    return d;
}

inline std::vector<std::vector<double>> self_distances(const std::vector<PointSet>& sets, BaseMetric m) {
    std::vector<std::vector<double>> d(sets.size(), std::vector<double>(sets.size(), 0.0));
    if (m == BaseMetric::CD) {
        std::vector<KdTree3> ts;
        ts.reserve(sets.size());
        for (const auto& p : sets) ts.emplace_back(p);
        for (size_t i = 0; i < sets.size(); ++i)
            for (size_t j = i + 1; j < sets.size(); ++j) d[i][j] = d[j][i] = chamfer(ts[i], ts[j]);
    } else {
        for (size_t i = 0; i < sets.size(); ++i)
            for (size_t j = i + 1; j < sets.size(); ++j) d[i][j] = d[j][i] = emd(sets[i], sets[j]);
    }
    return d;
}

}  // namespace detail

// Percentage of reference sets matched as someone's nearest reference.
inline double cov(const std::vector<PointSet>& gen, const std::vector<PointSet>& ref, BaseMetric m) {
    auto d = detail::cross_distances(gen, ref, m);
    std::set<size_t> matched;
    for (size_t i = 0; i < gen.size(); ++i) {
        size_t arg = 0;
        for (size_t j = 1; j < ref.size(); ++j)
            if (d[i][j] < d[i][arg]) arg = j;  // tie keeps the lower index
        matched.insert(arg);
    }
    return 100.0 * double(matched.size()) / double(ref.size());
}

// Mean over reference sets of the distance to the closest generated set.
inline double mmd(const std::vector<PointSet>& gen, const std::vector<PointSet>& ref, BaseMetric m) {
    auto d = detail::cross_distances(gen, ref, m);
    double total = 0;
    for (size_t j = 0; j < ref.size(); ++j) {
        double best = d[0][j];
        for (size_t i = 1; i < gen.size(); ++i) best = std::min(best, d[i][j]);
        total += best;
    }
    return total / double(ref.size());
}

// 1-NN classifier accuracy (%) over the pooled sets, self excluded, ties to
// the lower pooled index (generated block first).
inline double one_nn(const std::vector<PointSet>& gen, const std::vector<PointSet>& ref, BaseMetric m) {
    if (gen.empty() || ref.empty()) throw EmptySet("one_nn over an empty set list");
    if (gen.size() + ref.size() < 2) throw EmptySet("one_nn needs at least two pooled sets");
    const size_t g = gen.size(), r = ref.size();
    auto cross = detail::cross_distances(gen, ref, m);
    auto gg = detail::self_distances(gen, m);
    auto rr = detail::self_distances(ref, m);
    auto pooled = [&](size_t x, size_t y) {  // pooled indices: [0,g) gen, [g,g+r) ref
        if (x < g && y < g) return gg[x][y];
        if (x >= g && y >= g) return rr[x - g][y - g];
        return x < g ? cross[x][y - g] : cross[y][x - g];
    };
    size_t correct = 0;
    for (size_t x = 0; x < g + r; ++x) {
        size_t best = x == 0 ? 1 : 0;
        for (size_t y = 0; y < g + r; ++y) {
            if (y == x) continue;
            if (pooled(x, y) < pooled(x, best)) best = y;
        }
        bool same_side = (x < g) == (best < g);
        if (same_side) ++correct;
    }
    return 100.0 * double(correct) / double(g + r);
}

struct DistributionScores {
    double cov_pct, mmd, one_nn_pct;
};

// All three distribution metrics with the distance matrices computed once.
inline DistributionScores distribution_scores(const std::vector<PointSet>& gen, const std::vector<PointSet>& ref,
                                              BaseMetric m) {
    if (gen.empty() || ref.empty()) throw EmptySet("distribution metric over an empty set list");
    const size_t g = gen.size(), r = ref.size();
    auto cross = detail::cross_distances(gen, ref, m);
    auto gg = detail::self_distances(gen, m);
    auto rr = detail::self_distances(ref, m);
    DistributionScores out{};
    std::set<size_t> matched;
    for (size_t i = 0; i < g; ++i) {
        size_t arg = 0;
        for (size_t j = 1; j < r; ++j)
            if (cross[i][j] < cross[i][arg]) arg = j;
        matched.insert(arg);
    }
    out.cov_pct = 100.0 * double(matched.size()) / double(r);
    double total = 0;
    for (size_t j = 0; j < r; ++j) {
        double best = cross[0][j];
        for (size_t i = 1; i < g; ++i) best = std::min(best, cross[i][j]);
        total += best;
    }
    out.mmd = total / double(r);
    auto pooled = [&](size_t x, size_t y) {
        if (x < g && y < g) return gg[x][y];
        if (x >= g && y >= g) return rr[x - g][y - g];
        return x < g ? cross[x][y - g] : cross[y][x - g];
    };
    size_t correct = 0;
    for (size_t x = 0; x < g + r; ++x) {
        size_t best = x == 0 ? 1 : 0;
        for (size_t y = 0; y < g + r; ++y) {
            if (y == x) continue;
            if (pooled(x, y) < pooled(x, best)) best = y;
        }
        if ((x < g) == (best < g)) ++correct;
    }
    out.one_nn_pct = 100.0 * double(correct) / double(g + r);
    return out;
}

// ---------------------------------------------------------------------------
// Topology consistency

constexpr int kIsoVertexLimit = 64;

namespace detail {

struct MultiGraph {
    int v = 0;
    std::vector<std::vector<int>> mult;  // edge multiplicities, loops on the diagonal
    explicit MultiGraph(const Wireframe& w) : v(w.vertex_count()), mult(size_t(v), std::vector<int>(size_t(v), 0)) {
        for (const AdjRow& r : w.adjacency) {
            if (r.start == r.end)
                mult[size_t(r.start)][size_t(r.start)]++;
            else {
                mult[size_t(r.start)][size_t(r.end)]++;
                mult[size_t(r.end)][size_t(r.start)]++;
            }
        }
    }
};

// Iterated color refinement; colors are dense ints, stable across both graphs.
inline std::vector<std::vector<int>> refine_colors(const MultiGraph& a, const MultiGraph& b) {
    std::vector<std::vector<int>> colors = {std::vector<int>(size_t(a.v), 0), std::vector<int>(size_t(b.v), 0)};
    const MultiGraph* gs[2] = {&a, &b};
    for (int round = 0; round < a.v + 1; ++round) {
        // Signature: own color, loop count, sorted (neighbor color, multiplicity) pairs.
        std::map<std::vector<int>, int> dict;
        std::vector<std::vector<int>> next(2);
        for (int s = 0; s < 2; ++s) {
            const MultiGraph& g = *gs[s];
            next[s].resize(size_t(g.v));
            for (int i = 0; i < g.v; ++i) {
                std::vector<int> sig = {colors[size_t(s)][size_t(i)], g.mult[size_t(i)][size_t(i)]};
                std::vector<std::pair<int, int>> nb;
                for (int j = 0; j < g.v; ++j)
                    if (j != i && g.mult[size_t(i)][size_t(j)] > 0)
                        nb.push_back({colors[size_t(s)][size_t(j)], g.mult[size_t(i)][size_t(j)]});
                std::sort(nb.begin(), nb.end());
                for (auto& [c, m] : nb) {
                    sig.push_back(c);
                    sig.push_back(m);
                }
                auto [it, fresh] = dict.try_emplace(sig, int(dict.size()));
                next[s][size_t(i)] = it->second;
            }
        }
        if (next == colors) break;
        colors = std::move(next);
    }
    return colors;
}

inline bool iso_backtrack(const MultiGraph& a, const MultiGraph& b, const std::vector<int>& ca,
                          const std::vector<int>& cb, std::vector<int>& map_ab, std::vector<char>& used,
                          const std::vector<int>& order, size_t pos) {
    if (pos == order.size()) return true;
    int va = order[pos];
    for (int vb = 0; vb < b.v; ++vb) {
        if (used[size_t(vb)] || cb[size_t(vb)] != ca[size_t(va)]) continue;
        if (b.mult[size_t(vb)][size_t(vb)] != a.mult[size_t(va)][size_t(va)]) continue;
        bool ok = true;
        for (size_t k = 0; k < pos && ok; ++k)
            ok = a.mult[size_t(va)][size_t(order[k])] == b.mult[size_t(vb)][size_t(map_ab[size_t(order[k])])];
        if (!ok) continue;
        used[size_t(vb)] = 1;
        map_ab[size_t(va)] = vb;
        if (iso_backtrack(a, b, ca, cb, map_ab, used, order, pos + 1)) return true;
        used[size_t(vb)] = 0;
    }
    return false;
}

}  // namespace detail

// True iff the vertex-adjacency multigraphs are isomorphic.
inline bool topo_consistent(const Wireframe& a, const Wireframe& b) {
    if (a.vertex_count() > kIsoVertexLimit || b.vertex_count() > kIsoVertexLimit)
        throw SizeLimit("topo_consistent: vertex count exceeds " + std::to_string(kIsoVertexLimit));
    if (a.vertex_count() != b.vertex_count() || a.curve_count() != b.curve_count()) return false;
    if (a.vertex_count() == 0) return true;
    detail::MultiGraph ga(a), gb(b);
    auto colors = detail::refine_colors(ga, gb);
    std::vector<int> ha = colors[0], hb = colors[1];
    std::sort(ha.begin(), ha.end());
    std::sort(hb.begin(), hb.end());
    if (ha != hb) return false;
    // Match rarest color classes first to cut the search space.
    std::map<int, int> class_size;
    for (int c : colors[0]) class_size[c]++;
    std::vector<int> order(size_t(ga.v));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int x, int y) {
        int sx = class_size[colors[0][size_t(x)]], sy = class_size[colors[0][size_t(y)]];
        if (sx != sy) return sx < sy;
        return x < y;
    });
    std::vector<int> map_ab(size_t(ga.v), -1);
    std::vector<char> used(size_t(gb.v), 0);
    return detail::iso_backtrack(ga, gb, colors[0], colors[1], map_ab, used, order, 0);
}

// ---------------------------------------------------------------------------
// Silhouette score over flattened latents

// Standard silhouette with Euclidean distance. Singletons score 0; a=b=0
// scores 0.
inline double silhouette(const std::vector<std::vector<double>>& points, const std::vector<int>& labels) {
    if (points.size() != labels.size())
        throw SizeMismatch("silhouette: " + std::to_string(points.size()) + " points, " +
                           std::to_string(labels.size()) + " labels");
    if (points.size() < 2) throw DegenerateLabels("silhouette needs at least 2 points");
    std::map<int, std::vector<size_t>> groups;
    for (size_t i = 0; i < labels.size(); ++i) groups[labels[i]].push_back(i);
    if (groups.size() < 2) throw DegenerateLabels("silhouette needs at least 2 groups");
    auto d = [&](size_t i, size_t j) {
        double s = 0;
        for (size_t k = 0; k < points[i].size(); ++k) {
            double diff = points[i][k] - points[j][k];
            s += diff * diff;
        }
        return std::sqrt(s);
    };
    for (const auto& p : points)
        if (p.size() != points[0].size()) throw SizeMismatch("silhouette: ragged point dimensions");
    double total = 0;
    for (size_t i = 0; i < points.size(); ++i) {
        const auto& own = groups[labels[i]];
        if (own.size() == 1) continue;  // singleton contributes 0
        double a = 0;
        for (size_t j : own)
            if (j != i) a += d(i, j);
        a /= double(own.size() - 1);
        double b = std::numeric_limits<double>::infinity();
        for (const auto& [lab, members] : groups) {
            if (lab == labels[i]) continue;
            double m = 0;
            for (size_t j : members) m += d(i, j);
            b = std::min(b, m / double(members.size()));
        }
        double denom = std::max(a, b);
        total += denom == 0.0 ? 0.0 : (b - a) / denom;
    }
    return total / double(points.size());
}

// ---------------------------------------------------------------------------
// Reporting

struct MetricReport {
    std::map<std::string, double> values;
    int gen_count = 0, ref_count = 0;
    uint64_t seed = 0;

    void require_finite() const {
        for (const auto& [k, v] : values)
            if (!std::isfinite(v)) throw FiniteCheck("metric " + k + " is non-finite");
    }
};

}  // namespace clrwire
