#pragma once
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "flowerflow/manifolds.hpp"
#include "flowerflow/nets.hpp"
#include "flowerflow/revolution.hpp"

namespace flowerflow {

// A separating hypersurface: a parallel circle on a surface of revolution
// (coordinate = profile parameter u) or a round circle on the plane
// (coordinate = radius). side=+1 puts the end at larger coordinate values,
// side=-1 at smaller ones.
struct SigmaSurface {
    double coordinate = 0.0;
    int side = +1;
    std::string name;
};

// Core region, separating hypersurfaces and the local-convexity scale.
struct EndsDecomposition {
    enum class Kind { None, RevolutionBands, PlaneDisk };
    Kind kind = Kind::None;
    std::vector<SigmaSurface> sigmas;
    double delta = 0.0;

    bool empty() const { return kind == Kind::None || sigmas.empty(); }
};

// Signed scalar used to situate a point against the sigmas.
inline double region_coordinate(const Manifold& m, const EndsDecomposition& deco, const Point& p) {
    switch (deco.kind) {
        case EndsDecomposition::Kind::RevolutionBands:
            return p.c.x;
        case EndsDecomposition::Kind::PlaneDisk:
            return norm(p.c);
        default:
            (void)m;
            return 0.0;
    }
}

constexpr double kSigmaBand = 1e-6;  // tolerance band around each sigma, in coordinate units

// Index of the end whose region contains p (beyond its sigma by more than the
// band); -1 when p is in the core closure.
inline int end_index_of(const Manifold& m, const EndsDecomposition& deco, const Point& p) {
    if (deco.empty()) return -1;
    double c = region_coordinate(m, deco, p);
    for (size_t i = 0; i < deco.sigmas.size(); ++i) {
        const auto& s = deco.sigmas[i];
        if (s.side > 0 && c > s.coordinate + kSigmaBand) return static_cast<int>(i);
        if (s.side < 0 && c < s.coordinate - kSigmaBand) return static_cast<int>(i);
    }
    return -1;
}

struct PositionClass {
    enum class Kind { InCoreClosure, InEnd, Straddling } kind = Kind::InCoreClosure;
    int index = -1;  // end/sigma index for InEnd and Straddling
};

inline PositionClass classify_position(const Manifold& m, const EndsDecomposition& deco,
                                       const Net& net) {
    PositionClass out;
    if (deco.empty()) return out;
    std::vector<bool> touches_end(deco.sigmas.size(), false);
    bool touches_core = false;
    for (const auto& p : image_samples(net)) {
        int e = end_index_of(m, deco, p);
        if (e < 0)
            touches_core = true;
        else
            touches_end[static_cast<size_t>(e)] = true;
    }
    int ends_hit = -1;
    int n_ends = 0;
    for (size_t i = 0; i < touches_end.size(); ++i)
        if (touches_end[i]) {
            ends_hit = static_cast<int>(i);
            ++n_ends;
        }
    if (n_ends == 0) {
        out.kind = PositionClass::Kind::InCoreClosure;
    } else if (!touches_core && n_ends == 1) {
        out.kind = PositionClass::Kind::InEnd;
        out.index = ends_hit;
    } else {
        out.kind = PositionClass::Kind::Straddling;
        out.index = ends_hit;
    }
    return out;
}

// Distance from p to the core closure; exact profile arc length on surfaces
// of revolution, radial gap on the plane.
inline double core_distance(const Manifold& m, const EndsDecomposition& deco, const Point& p) {
    int e = end_index_of(m, deco, p);
    if (e < 0) return 0.0;
    const auto& s = deco.sigmas[static_cast<size_t>(e)];
    switch (deco.kind) {
        case EndsDecomposition::Kind::PlaneDisk:
            return std::max(0.0, norm(p.c) - s.coordinate);
        case EndsDecomposition::Kind::RevolutionBands: {
            auto* sor = dynamic_cast<const SurfaceOfRevolution*>(&m);
            if (!sor) throw DomainError("core_distance: decomposition requires a surface of revolution");
            return sor->profile_arc(s.coordinate, p.c.x);
        }
        default:
            return 0.0;
    }
}

// ---------------------------------------------------------------------------
// Local convexity audit (minimizing geodesics between delta-close sigma points
// must stay on the end side, up to the tolerance band)
// ---------------------------------------------------------------------------

struct ConvexityReport {
    bool pass = false;
    bool valid = true;  // false when too many solver failures
    int pairs_tested = 0;
    int bvp_failures = 0;
    int violations = 0;
    double worst_penetration = 0.0;      // coordinate units past the band
    double worst_penetration_arc = 0.0;  // same, in metric (profile-arc) units
    Point witness_a, witness_b;
};

inline ConvexityReport check_local_convexity(const Manifold& m, const EndsDecomposition& deco,
                                             size_t sigma_index, int sample_count,
                                             std::uint64_t seed) {
    if (sigma_index >= deco.sigmas.size())
        throw DomainError("check_local_convexity: sigma index out of range");
    const SigmaSurface& sigma = deco.sigmas[sigma_index];
    if (deco.delta <= 0) throw DomainError("check_local_convexity: delta must be positive");
    if (deco.delta >= 0.5 * m.injectivity_floor())
        throw DomainError("check_local_convexity: delta must stay below injectivity_floor/2");

    double circle_r;  // ambient radius of the sigma circle
    const SurfaceOfRevolution* sor = nullptr;
    if (deco.kind == EndsDecomposition::Kind::RevolutionBands) {
        sor = dynamic_cast<const SurfaceOfRevolution*>(&m);
        if (!sor) throw DomainError("check_local_convexity: decomposition/manifold mismatch");
        circle_r = sor->profile().rho(sigma.coordinate);
    } else if (deco.kind == EndsDecomposition::Kind::PlaneDisk) {
        circle_r = sigma.coordinate;
    } else {
        throw DomainError("check_local_convexity: no decomposition");
    }

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    ConvexityReport rep;
    rep.pairs_tested = sample_count;
    auto sigma_point = [&](double angle) -> Point {
        if (deco.kind == EndsDecomposition::Kind::PlaneDisk)
            return {{circle_r * std::cos(angle), circle_r * std::sin(angle)}, 0};
        return {{sigma.coordinate, wrap_periodic(angle, kTwoPi)}, 0};
    };
    auto coordinate = [&](const Point& p) { return region_coordinate(m, deco, p); };

    for (int k = 0; k < sample_count; ++k) {
        // stratified base angle, uniform separation in (0, delta]
        double a1 = (k + u01(rng)) * kTwoPi / sample_count;
        double sep = std::max(1e-8, u01(rng) * deco.delta);
        double a2 = a1 + sep / circle_r;
        Point p = sigma_point(a1), q = sigma_point(a2);
        GeodesicSegment seg;
        try {
            seg = m.minimizing_geodesic(p, q);
        } catch (const Error&) {
            ++rep.bvp_failures;
            continue;
        }
        double pen = 0.0;
        for (const auto& sp : seg.samples) {
            double c = coordinate(sp);
            double excess = sigma.side > 0 ? sigma.coordinate - c : c - sigma.coordinate;
            pen = std::max(pen, excess - kSigmaBand);
        }
        if (pen > 0.0) {
            ++rep.violations;
            if (pen > rep.worst_penetration) {
                rep.worst_penetration = pen;
                rep.witness_a = p;
                rep.witness_b = q;
                if (sor) {
                    double bad = sigma.side > 0 ? sigma.coordinate - pen : sigma.coordinate + pen;
                    rep.worst_penetration_arc = sor->profile_arc(sigma.coordinate, bad);
                } else {
                    rep.worst_penetration_arc = pen;
                }
            }
        }
    }
    rep.valid = rep.bvp_failures <= sample_count / 100;
    rep.pass = rep.valid && rep.violations == 0;
    return rep;
}

} // namespace flowerflow
