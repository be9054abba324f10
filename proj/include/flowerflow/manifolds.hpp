#pragma once
#include <algorithm>
#include <cmath>

#include "flowerflow/manifold.hpp"

namespace flowerflow {

// ---------------------------------------------------------------------------
// EuclideanPlane
// ---------------------------------------------------------------------------

class EuclideanPlane final : public Manifold {
public:
    explicit EuclideanPlane(double extent = 1e3)
        : Manifold("euclidean_plane",
                   /*injectivity_floor=*/1e6, /*convexity_floor=*/1e6,
                   WorkingRegion{{-extent, -extent}, {extent, extent}},
                   /*working_scale=*/2 * extent) {}

    Mat2 metric_at(const Point&) const override { return Mat2::identity(); }
    std::array<Mat2, 2> metric_partials_at(const Point&) const override { return {}; }
    Christoffel christoffels_at(const Point&) const override { return {}; }

    Vec3 embed(const Point& p) const override { return {p.c.x, p.c.y, 0.0}; }
    Vec3 embed_tangent(const TangentVector& t) const override { return {t.v.x, t.v.y, 0.0}; }

    ShootResult geodesic_shoot(const Point& p, const Vec2& v, double t) const override {
        Point q{p.c + t * v, 0};
        if (!region_.contains(q.c)) {
            // clip to the box for the event report
            return {p, {p, v}, true, 0.0};
        }
        return {q, {q, v}, false, 0.0};
    }

    GeodesicSegment minimizing_geodesic(const Point& p, const Point& q,
                                        const Vec2* = nullptr) const override {
        return build_segment(p, q.c - p.c, 1.0, 0.0);
    }

    TangentVector parallel_transport(const TangentVector& v,
                                     const GeodesicSegment& along) const override {
        require_same_base(v.base, along.start);
        return {along.end, v.v};
    }

    double distance(const Point& p, const Point& q, bool* exact = nullptr) const override {
        if (exact) *exact = true;
        return norm(q.c - p.c);
    }

protected:
    GeodesicSegment build_segment(const Point& p, Vec2 w, double t, double extra) const override {
        GeodesicSegment s;
        s.start = p;
        s.end = {p.c + t * w, 0};
        s.initial_velocity = {s.start, t * w};
        s.final_velocity = {s.end, t * w};
        s.length = norm(w) * std::abs(t);
        s.samples.reserve(kSegmentSamples);
        for (int k = 0; k < kSegmentSamples; ++k) {
            double f = static_cast<double>(k) / (kSegmentSamples - 1);
            s.samples.push_back({p.c + (f * t) * w, 0});
        }
        s.residual = extra;
        return s;
    }
};

// ---------------------------------------------------------------------------
// RoundSphere — colatitude/longitude chart, all operations in closed form via
// the R^3 embedding. Pole representatives keep their longitude so meridian
// velocities stay expressible in the chart basis.
// ---------------------------------------------------------------------------

class RoundSphere final : public Manifold {
public:
    explicit RoundSphere(double radius = 1.0)
        : Manifold("round_sphere", kPi * radius, 0.5 * kPi * radius, sphere_region(),
                   kPi * radius),
          r_(radius) {
        if (radius <= 0) throw DomainError("round_sphere: radius must be positive");
    }

    double radius() const { return r_; }

    Mat2 metric_at(const Point& p) const override {
        double s = std::sin(p.c.x);
        return Mat2::diag(r_ * r_, r_ * r_ * s * s);
    }
    std::array<Mat2, 2> metric_partials_at(const Point& p) const override {
        double th = p.c.x;
        return {Mat2::diag(0.0, 2 * r_ * r_ * std::sin(th) * std::cos(th)), Mat2{}};
    }
    Christoffel christoffels_at(const Point& p) const override {
        double th = p.c.x, s = std::sin(th), c = std::cos(th);
        Christoffel g;
        g.G[0][1][1] = -s * c;
        double cot = std::abs(s) > 1e-14 ? c / s : 0.0;
        g.G[1][0][1] = g.G[1][1][0] = cot;
        return g;
    }

    Vec3 embed(const Point& p) const override {
        double th = p.c.x, ph = p.c.y;
        return {r_ * std::sin(th) * std::cos(ph), r_ * std::sin(th) * std::sin(ph),
                r_ * std::cos(th)};
    }
    Vec3 embed_tangent(const TangentVector& t) const override {
        double th = t.base.c.x, ph = t.base.c.y;
        Vec3 dth{r_ * std::cos(th) * std::cos(ph), r_ * std::cos(th) * std::sin(ph),
                 -r_ * std::sin(th)};
        Vec3 dph{-r_ * std::sin(th) * std::sin(ph), r_ * std::sin(th) * std::cos(ph), 0.0};
        return t.v.x * dth + t.v.y * dph;
    }

    ShootResult geodesic_shoot(const Point& p, const Vec2& v, double t) const override {
        double speed = metric_norm(p, v);
        if (speed == 0.0 || t == 0.0) return {p, {p, v}, false, 0.0};
        Vec3 P = embed(p);
        Vec3 V = embed_tangent({p, v});
        double omega = speed / r_;
        double a = omega * t;
        Vec3 Q = std::cos(a) * P + (std::sin(a) * r_ / speed) * V;
        Vec3 W = (-speed / r_ * std::sin(a)) * P + std::cos(a) * V;
        Point q = chart_point(Q, W);
        return {q, {q, pull_tangent(q, W)}, false, 0.0};
    }

    GeodesicSegment minimizing_geodesic(const Point& p, const Point& q,
                                        const Vec2* = nullptr) const override {
        Vec3 P = embed(p), Q = embed(q);
        double psi = std::atan2(norm(cross(P, Q)), dot(P, Q));
        double dist = r_ * psi;
        if (dist == 0.0) return degenerate_segment(p);
        if (dist > 0.5001 * injectivity_floor_)
            throw DomainError("round_sphere: endpoints beyond the unique-geodesic regime");
        Vec3 dir = normalized(Q - (dot(P, Q) / (r_ * r_)) * P);
        Point start = at_pole(p) ? chart_point(P, dir) : p;  // longitude of departure
        Vec2 w = pull_tangent(start, dist * dir);
        return build_segment(start, w, 1.0, 0.0);
    }

    TangentVector parallel_transport(const TangentVector& v,
                                     const GeodesicSegment& along) const override {
        require_same_base(v.base, along.start);
        if (along.length == 0.0) return {along.end, v.v};
        Vec3 T0 = normalized(embed_tangent(along.initial_velocity));
        Vec3 T1 = normalized(embed_tangent(along.final_velocity));
        Vec3 K = normalized(cross(embed(along.start), T0));
        Vec3 W = embed_tangent(v);  // at v's own representative (poles differ)
        Vec3 out = dot(W, T0) * T1 + dot(W, K) * K;
        return {along.end, pull_tangent(along.end, out)};
    }

    double distance(const Point& p, const Point& q, bool* exact = nullptr) const override {
        if (exact) *exact = true;
        Vec3 P = embed(p), Q = embed(q);
        return r_ * std::atan2(norm(cross(P, Q)), dot(P, Q));
    }

protected:
    GeodesicSegment build_segment(const Point& p, Vec2 w, double t, double extra) const override {
        double speed = metric_norm(p, w);
        GeodesicSegment s;
        s.start = p;
        if (speed * std::abs(t) == 0.0) return degenerate_segment(p);
        s.samples.reserve(kSegmentSamples);
        for (int k = 0; k < kSegmentSamples; ++k) {
            double f = static_cast<double>(k) / (kSegmentSamples - 1);
            s.samples.push_back(geodesic_shoot(p, w, f * t).point);
        }
        ShootResult endr = geodesic_shoot(p, w, t);
        s.end = endr.point;
        s.samples.back() = s.end;
        s.initial_velocity = {p, t * w};
        s.final_velocity = {s.end, t * endr.velocity.v};
        s.length = speed * std::abs(t);
        s.residual = extra;
        return s;
    }

private:
    static WorkingRegion sphere_region() {
        WorkingRegion w{{0.0, 0.0}, {kPi, kTwoPi}};
        w.periodic[1] = true;
        w.period[1] = kTwoPi;
        return w;
    }

    bool at_pole(const Point& p) const { return std::sin(p.c.x) < 1e-12; }

    // Chart point for an ambient position; at poles the longitude is taken
    // from the motion direction `dir` so meridian velocities pull back cleanly.
    Point chart_point(Vec3 P, Vec3 dir) const {
        double z = std::clamp(P.z / r_, -1.0, 1.0);
        double th = std::acos(z);
        double ph;
        if (std::hypot(P.x, P.y) < 1e-13 * r_) {
            ph = std::atan2(dir.y, dir.x);
            if (th > 0.5 * kPi) ph = std::atan2(-dir.y, -dir.x);  // south pole: approach meridian
        } else {
            ph = std::atan2(P.y, P.x);
        }
        return {{th, wrap_periodic(ph, kTwoPi)}, 0};
    }

    Vec2 pull_tangent(const Point& p, Vec3 w) const {
        double th = p.c.x, ph = p.c.y;
        Vec3 dth{r_ * std::cos(th) * std::cos(ph), r_ * std::cos(th) * std::sin(ph),
                 -r_ * std::sin(th)};
        Vec3 dph{-r_ * std::sin(th) * std::sin(ph), r_ * std::sin(th) * std::cos(ph), 0.0};
        double vth = dot(w, dth) / (r_ * r_);
        double s2 = std::sin(th);
        double vph = s2 > 1e-12 ? dot(w, dph) / (r_ * r_ * s2 * s2) : 0.0;
        return {vth, vph};
    }

    double r_;
};

// ---------------------------------------------------------------------------
// FlatTorus — R^2 / (Z e1 + Z e2), unit-cell chart with a constant metric.
// ---------------------------------------------------------------------------

class FlatTorus final : public Manifold {
public:
    explicit FlatTorus(Vec2 e1 = {1, 0}, Vec2 e2 = {0, 1})
        : Manifold("flat_torus", torus_injectivity(e1, e2), 0.5 * torus_injectivity(e1, e2),
                   torus_region(), norm(e1) + norm(e2)),
          e1_(e1),
          e2_(e2),
          g_{dot(e1, e1), dot(e1, e2), dot(e1, e2), dot(e2, e2)} {
        if (std::abs(e1.x * e2.y - e1.y * e2.x) < 1e-12)
            throw DomainError("flat_torus: lattice vectors are collinear");
    }

    Mat2 metric_at(const Point&) const override { return g_; }
    std::array<Mat2, 2> metric_partials_at(const Point&) const override { return {}; }
    Christoffel christoffels_at(const Point&) const override { return {}; }

    // Chart plot embedding (fundamental domain); not seam-faithful for
    // positions, which is why distance-based comparisons are used instead.
    Vec3 embed(const Point& p) const override {
        Point q = normalize(p);
        Vec2 w = q.c.x * e1_ + q.c.y * e2_;
        return {w.x, w.y, 0.0};
    }
    bool embed_faithful() const override { return false; }
    Vec3 embed_tangent(const TangentVector& t) const override {
        Vec2 w = t.v.x * e1_ + t.v.y * e2_;
        return {w.x, w.y, 0.0};
    }

    Vec2 chart_delta(const Point& from, const Point& to) const override {
        Vec2 d{wrap_symmetric(to.c.x - from.c.x, 1.0), wrap_symmetric(to.c.y - from.c.y, 1.0)};
        // shortest lattice representative under the metric
        Vec2 best = d;
        double bn = quad_form(g_, best, best);
        for (int i = -1; i <= 1; ++i)
            for (int j = -1; j <= 1; ++j) {
                Vec2 cand = d + Vec2{double(i), double(j)};
                double n2 = quad_form(g_, cand, cand);
                if (n2 < bn) {
                    bn = n2;
                    best = cand;
                }
            }
        return best;
    }

    ShootResult geodesic_shoot(const Point& p, const Vec2& v, double t) const override {
        Point q = normalize({p.c + t * v, 0});
        return {q, {q, v}, false, 0.0};
    }

    GeodesicSegment minimizing_geodesic(const Point& p, const Point& q,
                                        const Vec2* = nullptr) const override {
        return build_segment(p, chart_delta(p, q), 1.0, 0.0);
    }

    TangentVector parallel_transport(const TangentVector& v,
                                     const GeodesicSegment& along) const override {
        require_same_base(v.base, along.start);
        return {along.end, v.v};
    }

    double distance(const Point& p, const Point& q, bool* exact = nullptr) const override {
        if (exact) *exact = true;
        Vec2 d = chart_delta(p, q);
        return std::sqrt(quad_form(g_, d, d));
    }

protected:
    GeodesicSegment build_segment(const Point& p, Vec2 w, double t, double extra) const override {
        GeodesicSegment s;
        s.start = normalize(p);
        s.end = normalize({p.c + t * w, 0});
        s.initial_velocity = {s.start, t * w};
        s.final_velocity = {s.end, t * w};
        s.length = std::sqrt(quad_form(g_, w, w)) * std::abs(t);
        s.samples.reserve(kSegmentSamples);
        for (int k = 0; k < kSegmentSamples; ++k) {
            double f = static_cast<double>(k) / (kSegmentSamples - 1);
            s.samples.push_back(normalize({p.c + (f * t) * w, 0}));
        }
        s.residual = extra;
        return s;
    }

private:
    static WorkingRegion torus_region() {
        WorkingRegion w{{0, 0}, {1, 1}};
        w.periodic[0] = w.periodic[1] = true;
        w.period[0] = w.period[1] = 1.0;
        return w;
    }
    static double torus_injectivity(Vec2 e1, Vec2 e2) {
        double best = std::numeric_limits<double>::infinity();
        for (int i = -2; i <= 2; ++i)
            for (int j = -2; j <= 2; ++j) {
                if (i == 0 && j == 0) continue;
                best = std::min(best, norm(double(i) * e1 + double(j) * e2));
            }
        return 0.5 * best;
    }

    Vec2 e1_, e2_;
    Mat2 g_;
};

} // namespace flowerflow
