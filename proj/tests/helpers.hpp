#pragma once
#include <random>

#include "flowerflow/flow.hpp"
#include "flowerflow/nets.hpp"
#include "flowerflow/registry.hpp"

namespace ff_test {

using namespace flowerflow;

inline Point pt(double a, double b) { return {{a, b}, 0}; }

// Uniform point in a chart box, rejected against pathologies by the caller.
inline Point random_point(std::mt19937_64& rng, Vec2 lo, Vec2 hi) {
    std::uniform_real_distribution<double> ux(lo.x, hi.x), uy(lo.y, hi.y);
    return {{ux(rng), uy(rng)}, 0};
}

// Closed polygon flower around a chart-space center; roughly circular so the
// chords stay well inside the uniqueness regime.
inline Flower polygon_flower(const Manifold& m, Vec2 center, double radius, int n,
                             std::mt19937_64* jitter = nullptr, double jitter_amp = 0.0) {
    std::vector<Point> pts;
    std::uniform_real_distribution<double> uj(-1.0, 1.0);
    for (int k = 0; k <= n + 1; ++k) {
        double a = kTwoPi * static_cast<double>(k) / (n + 1);
        double r = radius;
        if (jitter && k >= 1 && k <= n) r += jitter_amp * uj(*jitter);
        pts.push_back(m.normalize({{center.x + r * std::cos(a), center.y + r * std::sin(a)}, 0}));
    }
    Flower f;
    f.base = pts.front();
    f.petals = {Chain{}};
    for (size_t k = 0; k + 1 < pts.size(); ++k)
        f.petals[0].push_back(m.minimizing_geodesic(pts[k], pts[k + 1]));
    f.constant = {false};
    return f;
}

// Triangle cage with vertices in a chart ball of the given radius.
inline Cage random_small_cage(const Manifold& m, std::mt19937_64& rng, Vec2 center, double spread,
                              int vertex_count) {
    std::uniform_real_distribution<double> u(-spread, spread);
    std::vector<Point> vs;
    for (int k = 0; k < vertex_count; ++k)
        vs.push_back(m.normalize({{center.x + u(rng), center.y + u(rng)}, 0}));
    Cage cage;
    cage.vertices = vs;
    for (int a = 0; a < vertex_count; ++a)
        for (int b = a + 1; b < vertex_count; ++b)
            cage.edges[{a, b}] = {m.minimizing_geodesic(vs[static_cast<size_t>(a)],
                                                        vs[static_cast<size_t>(b)])};
    return cage;
}

} // namespace ff_test
