#pragma once
#include <algorithm>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "flowerflow/manifold.hpp"

namespace flowerflow {

// A broken geodesic: consecutive segments share endpoints.
using Chain = std::vector<GeodesicSegment>;

inline double chain_length(const Chain& c) {
    double s = 0;
    for (const auto& seg : c) s += seg.length;
    return s;
}

inline Chain reverse_chain(const Chain& c) {
    Chain r;
    r.reserve(c.size());
    for (auto it = c.rbegin(); it != c.rend(); ++it) r.push_back(reverse_segment(*it));
    return r;
}

inline Chain concat_chains(Chain a, const Chain& b) {
    a.insert(a.end(), b.begin(), b.end());
    return a;
}

// Point at arc length s from the chain start (s clamped to [0, total]).
inline Point chain_point_at_arc(const Manifold& m, const Chain& c, double s) {
    if (c.empty()) throw DomainError("chain_point_at_arc: empty chain");
    if (s <= 0) return c.front().start;
    for (const auto& seg : c) {
        if (s <= seg.length) {
            double tau = s / seg.length;
            if (tau >= 1.0) return seg.end;
            return m.geodesic_shoot(seg.start, seg.initial_velocity.v, tau).point;
        }
        s -= seg.length;
    }
    return c.back().end;
}

// Split at arc length s; either half may come back empty.
inline std::pair<Chain, Chain> split_chain_at_arc(const Manifold& m, const Chain& c, double s) {
    Chain head, tail;
    double remaining = s;
    size_t k = 0;
    for (; k < c.size(); ++k) {
        const auto& seg = c[k];
        if (remaining <= 1e-14 * std::max(1.0, seg.length)) break;
        if (remaining < seg.length * (1.0 - 1e-14)) {
            auto [left, right] = split_segment(m, seg, remaining / seg.length);
            head.push_back(left);
            tail.push_back(right);
            ++k;
            break;
        }
        head.push_back(seg);
        remaining -= seg.length;
    }
    for (; k < c.size(); ++k) tail.push_back(c[k]);
    return {head, tail};
}

// ---------------------------------------------------------------------------
// Net types
// ---------------------------------------------------------------------------

// Base point plus petals; petal j is a closed chain through its interior
// points, both chain endpoints at the base. Constant petals carry no chain.
struct PiecewiseGeodesicFlower {
    Point base;
    std::vector<Chain> petals;
    std::vector<bool> constant;

    size_t petal_count() const { return petals.size(); }
    bool petal_is_constant(size_t j) const { return constant.at(j) || petals[j].empty(); }
};

using Flower = PiecewiseGeodesicFlower;

// Interior vertices of a petal (between consecutive segments).
inline std::vector<Point> petal_interior_points(const Chain& petal) {
    std::vector<Point> pts;
    for (size_t k = 1; k < petal.size(); ++k) pts.push_back(petal[k].start);
    return pts;
}

// 1-skeleton of an i-simplex: totally ordered vertices, one broken-geodesic
// edge per vertex pair (a,b), a<b, running from vertices[a] to vertices[b].
struct Cage {
    std::vector<Point> vertices;
    std::map<std::pair<int, int>, Chain> edges;
    std::map<std::pair<int, int>, bool> constant_flags;

    int order() const { return static_cast<int>(vertices.size()) - 1; }
};

// Generic incidence view used by the measurement code; cages, flowers and
// multigraph nets (theta graphs) all reduce to it.
struct Net {
    struct Edge {
        int a, b;  // chain runs vertices[a] -> vertices[b]
        Chain chain;
    };
    std::vector<Point> vertices;
    std::vector<Edge> edges;
};

inline Net as_net(const Cage& cage) {
    Net n;
    n.vertices = cage.vertices;
    for (const auto& [key, chain] : cage.edges) n.edges.push_back({key.first, key.second, chain});
    return n;
}

inline Net as_net(const Flower& f) {
    Net n;
    n.vertices = {f.base};
    for (size_t j = 0; j < f.petals.size(); ++j)
        if (!f.petal_is_constant(j)) n.edges.push_back({0, 0, f.petals[j]});
    return n;
}

// ---------------------------------------------------------------------------
// Measurement
// ---------------------------------------------------------------------------

// Identifies a balancing-condition site: a net vertex (edge < 0) or the
// junction before segment `index` of edge `edge`.
struct VertexRef {
    int edge = -1;
    int index = 0;

    std::string label() const {
        return edge < 0 ? "v" + std::to_string(index)
                        : "e" + std::to_string(edge) + ":p" + std::to_string(index);
    }
};

struct ResidualEntry {
    VertexRef at;
    double norm = 0.0;
};

struct NetMeasurement {
    double total_length = 0.0;
    std::vector<double> per_edge_lengths;
    std::vector<ResidualEntry> balancing_residuals;
    double max_residual = 0.0;
    double geodesic_deviation = 0.0;

    bool is_geodesic_net(double tol_stat, double tol_geo) const {
        return max_residual <= tol_stat && geodesic_deviation <= tol_geo;
    }
};

namespace detail {

// Unit tangent pointing away from the chosen end of a segment, in ambient
// coordinates; zero for segments below the degeneracy threshold.
inline Vec3 away_unit(const Manifold& m, const GeodesicSegment& seg, bool from_start) {
    if (seg.length <= m.degenerate_segment_length()) return {};
    TangentVector t = from_start ? seg.initial_velocity
                                 : TangentVector{seg.end, -seg.final_velocity.v};
    Vec3 w = m.embed_tangent(t);
    double n = norm(w);
    return n > 0 ? w / n : Vec3{};
}

} // namespace detail

// Ambient unit tangents of all edge-ends meeting a net vertex, directed away.
inline std::vector<Vec3> incident_unit_tangents(const Manifold& m, const Net& net, int vertex) {
    std::vector<Vec3> out;
    for (const auto& e : net.edges) {
        if (e.chain.empty()) continue;
        if (e.a == vertex) out.push_back(detail::away_unit(m, e.chain.front(), true));
        if (e.b == vertex) out.push_back(detail::away_unit(m, e.chain.back(), false));
    }
    return out;
}

// Ambient sum of unit tangents of all edge-ends meeting a net vertex.
inline Vec3 vertex_residual_ambient(const Manifold& m, const Net& net, int vertex) {
    Vec3 sum{};
    for (const auto& e : net.edges) {
        if (e.chain.empty()) continue;
        if (e.a == vertex) sum += detail::away_unit(m, e.chain.front(), true);
        if (e.b == vertex) sum += detail::away_unit(m, e.chain.back(), false);
    }
    return sum;
}

// Chart components of an ambient tangent at p (metric-weighted projection).
inline Vec2 pull_ambient(const Manifold& m, const Point& p, Vec3 w) {
    Vec3 a0 = m.embed_tangent({p, {1, 0}});
    Vec3 a1 = m.embed_tangent({p, {0, 1}});
    Vec2 rhs{dot(w, a0), dot(w, a1)};
    Mat2 g = m.metric_at(p);
    if (std::abs(g.det()) < 1e-14 * std::max(1.0, g.m00 * g.m11)) {
        return {g.m00 > 0 ? rhs.x / g.m00 : 0.0, g.m11 > 0 ? rhs.y / g.m11 : 0.0};
    }
    return g.solve(rhs);
}

// Sum of unit tangents at a net vertex, directed away from it.
inline TangentVector balancing_residual(const Manifold& m, const Net& net, int vertex) {
    if (vertex < 0 || vertex >= static_cast<int>(net.vertices.size()))
        throw DomainError("balancing_residual: unknown vertex id");
    Vec3 sum = vertex_residual_ambient(m, net, vertex);
    const Point& p = net.vertices[static_cast<size_t>(vertex)];
    return {p, pull_ambient(m, p, sum)};
}

inline NetMeasurement measure(const Manifold& m, const Net& net) {
    NetMeasurement out;
    for (const auto& e : net.edges) {
        double len = chain_length(e.chain);
        out.per_edge_lengths.push_back(len);
        out.total_length += len;
        for (const auto& seg : e.chain)
            out.geodesic_deviation = std::max(out.geodesic_deviation, seg.residual);
    }
    for (int v = 0; v < static_cast<int>(net.vertices.size()); ++v) {
        double n = norm(vertex_residual_ambient(m, net, v));
        out.balancing_residuals.push_back({{-1, v}, n});
    }
    // Junctions between consecutive segments inside an edge are degree-2
    // vertices of the discrete net; their tangent sums measure the kinks.
    for (int ei = 0; ei < static_cast<int>(net.edges.size()); ++ei) {
        const Chain& c = net.edges[static_cast<size_t>(ei)].chain;
        for (size_t k = 1; k < c.size(); ++k) {
            Vec3 s = detail::away_unit(m, c[k - 1], false) + detail::away_unit(m, c[k], true);
            out.balancing_residuals.push_back({{ei, static_cast<int>(k)}, norm(s)});
        }
    }
    for (const auto& r : out.balancing_residuals)
        out.max_residual = std::max(out.max_residual, r.norm);
    return out;
}

inline double length(const Manifold&, const Net& net) {
    double s = 0;
    for (const auto& e : net.edges) s += chain_length(e.chain);
    return s;
}
inline double length(const Manifold& m, const Cage& c) { return length(m, as_net(c)); }
inline double length(const Manifold& m, const Flower& f) { return length(m, as_net(f)); }

// ---------------------------------------------------------------------------
// Birkhoff rebalancing
// ---------------------------------------------------------------------------

struct RebalanceOptions {
    int max_passes = 48;
    double equal_length_tol = 1e-6;  // relative deviation of segment lengths
};

// One subdivision pass: place `count` points at equal arc positions along the
// closed loop (base kept as the first knot) and reconnect by minimizing
// geodesics. Length never increases.
inline Chain rebalance_pass(const Manifold& m, const Chain& petal, const Point& base, int count,
                            int petal_index) {
    double total = chain_length(petal);
    if (total <= m.degenerate_segment_length()) return {};
    double spacing = total / count;
    if (spacing >= 0.5 * m.injectivity_floor())
        throw RebalanceError("birkhoff_rebalance: subdivision spacing " + std::to_string(spacing) +
                                 " leaves the unique-geodesic regime",
                             petal_index);
    std::vector<Point> knots;
    knots.reserve(static_cast<size_t>(count) + 1);
    knots.push_back(base);
    for (int k = 1; k < count; ++k)
        knots.push_back(chain_point_at_arc(m, petal, spacing * k));
    knots.push_back(base);
    Chain next;
    next.reserve(static_cast<size_t>(count));
    for (size_t k = 0; k + 1 < knots.size(); ++k) {
        const Vec2* hint = nullptr;
        Vec2 h;
        if (k < petal.size()) {
            h = petal[k].initial_velocity.v;
            hint = &h;
        }
        next.push_back(m.minimizing_geodesic(knots[k], knots[k + 1], hint));
    }
    return next;
}

// Subdivide a petal into segment_count arcs of (approximately) equal length
// joined by minimizing geodesics; iterated until the lengths agree to
// tolerance or the pass budget runs out. The base point never moves and the
// total length never increases.
inline Chain birkhoff_rebalance(const Manifold& m, const Chain& petal, const Point& base,
                                int segment_count, const RebalanceOptions& opts = {},
                                int petal_index = 0) {
    if (segment_count < 1) throw DomainError("birkhoff_rebalance: segment count must be >= 1");
    Chain current = petal;
    for (int pass = 0; pass < opts.max_passes; ++pass) {
        Chain next = rebalance_pass(m, current, base, segment_count, petal_index);
        if (next.empty()) return next;
        current = std::move(next);
        double total = chain_length(current);
        double spacing = total / segment_count;
        double dev = 0;
        for (const auto& seg : current)
            dev = std::max(dev, std::abs(seg.length - spacing) / std::max(spacing, 1e-300));
        if (dev <= opts.equal_length_tol) break;
    }
    return current;
}

// ---------------------------------------------------------------------------
// Cage -> flower deformation retraction
// ---------------------------------------------------------------------------

// At parameter t each vertex below the maximal one slides along its edge to
// the maximal vertex by the fraction t of that edge's length; the slid-off
// pieces are grafted onto both ends of the remaining edges, so the image in M
// never changes and every edge stays within three input edge lengths.
inline Cage cage_to_flower(const Manifold& m, const Cage& cage, double t) {
    if (t < 0.0 || t > 1.0) throw DomainError("cage_to_flower: t outside [0,1]");
    int vmax = cage.order();
    if (vmax < 1) throw DomainError("cage_to_flower: malformed cage");
    if (t == 0.0) return cage;

    std::vector<Chain> traversed(static_cast<size_t>(vmax));  // v_i(t) -> v_i, reversed piece
    std::vector<Chain> remaining(static_cast<size_t>(vmax));
    std::vector<Point> moved(static_cast<size_t>(vmax));
    for (int i = 0; i < vmax; ++i) {
        auto it = cage.edges.find({i, vmax});
        const Chain& spoke = it == cage.edges.end() ? Chain{} : it->second;
        double len = chain_length(spoke);
        if (len <= m.degenerate_segment_length()) {
            traversed[i] = {};
            remaining[i] = {};
            moved[i] = cage.vertices[static_cast<size_t>(vmax)];
            continue;
        }
        auto [head, tail] = split_chain_at_arc(m, spoke, t * len);
        traversed[i] = reverse_chain(head);
        remaining[i] = tail;
        moved[i] = tail.empty() ? spoke.back().end : tail.front().start;
    }

    Cage out;
    out.vertices = cage.vertices;
    for (int i = 0; i < vmax; ++i) out.vertices[static_cast<size_t>(i)] = moved[i];
    for (const auto& [key, chain] : cage.edges) {
        auto [a, b] = key;
        if (b == vmax) {
            out.edges[key] = remaining[static_cast<size_t>(a)];
        } else {
            Chain e = concat_chains(traversed[static_cast<size_t>(a)], chain);
            e = concat_chains(std::move(e), reverse_chain(traversed[static_cast<size_t>(b)]));
            out.edges[key] = std::move(e);
        }
        out.constant_flags[key] = chain_length(out.edges[key]) <= m.degenerate_segment_length();
    }
    return out;
}

// Convert a fully retracted cage (t=1) into a flower at the maximal vertex.
// Edges between non-maximal vertices become petals; spokes become constant
// petals.
inline Flower flower_from_collapsed_cage(const Manifold& m, const Cage& collapsed) {
    int vmax = collapsed.order();
    const Point& base = collapsed.vertices[static_cast<size_t>(vmax)];
    for (const auto& v : collapsed.vertices)
        if (!points_close(m, v, base, 1e-6 * std::max(1.0, m.working_scale())))
            throw DomainError("flower_from_collapsed_cage: cage is not fully retracted");
    Flower f;
    f.base = base;
    for (const auto& [key, chain] : collapsed.edges) {
        bool constant = chain_length(chain) <= m.degenerate_segment_length();
        if (key.second == vmax) {
            f.petals.push_back({});
            f.constant.push_back(true);
        } else {
            f.petals.push_back(constant ? Chain{} : chain);
            f.constant.push_back(constant);
        }
    }
    return f;
}

// ---------------------------------------------------------------------------
// Image comparison
// ---------------------------------------------------------------------------

inline std::vector<Point> image_samples(const Net& net) {
    std::vector<Point> pts = net.vertices;
    for (const auto& e : net.edges)
        for (const auto& seg : e.chain) pts.insert(pts.end(), seg.samples.begin(), seg.samples.end());
    return pts;
}

// Symmetric Hausdorff distance between sampled images. Uses ambient chords on
// isometrically embedded manifolds and intrinsic distance otherwise.
inline double hausdorff_distance(const Manifold& m, const std::vector<Point>& A,
                                 const std::vector<Point>& B) {
    if (A.empty() || B.empty()) throw DomainError("hausdorff_distance: empty sample set");
    auto one_sided = [&](const std::vector<Point>& X, const std::vector<Point>& Y) {
        double worst = 0;
        if (m.embed_faithful()) {
            std::vector<Vec3> ey;
            ey.reserve(Y.size());
            for (const auto& q : Y) ey.push_back(m.embed(q));
            for (const auto& p : X) {
                Vec3 ep = m.embed(p);
                double best = std::numeric_limits<double>::infinity();
                for (const auto& eq : ey) best = std::min(best, norm(ep - eq));
                worst = std::max(worst, best);
            }
        } else {
            for (const auto& p : X) {
                double best = std::numeric_limits<double>::infinity();
                for (const auto& q : Y) best = std::min(best, m.distance(p, q));
                worst = std::max(worst, best);
            }
        }
        return worst;
    };
    return std::max(one_sided(A, B), one_sided(B, A));
}

inline double hausdorff_distance(const Manifold& m, const Net& a, const Net& b) {
    return hausdorff_distance(m, image_samples(a), image_samples(b));
}

// Largest gap between stored samples over all segments of a net.
inline double max_sampling_gap(const Net& net) {
    double gap = 0;
    for (const auto& e : net.edges)
        for (const auto& seg : e.chain)
            if (seg.samples.size() > 1)
                gap = std::max(gap, seg.length / static_cast<double>(seg.samples.size() - 1));
    return gap;
}

} // namespace flowerflow
