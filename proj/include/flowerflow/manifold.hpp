#pragma once
#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "flowerflow/errors.hpp"
#include "flowerflow/geometry.hpp"

namespace flowerflow {

struct Point {
    Vec2 c;            // chart coordinates
    int chart_id = 0;  // reserved for multi-chart manifolds; all built-ins use chart 0
};

struct TangentVector {
    Point base;
    Vec2 v;  // components in the chart basis at `base`
};

// A minimizing (or shot) geodesic arc, parametrized on [0,1] at constant speed.
// `samples` sit at uniform arc-length fractions, samples.front()==start,
// samples.back()==end. `residual` is the solver's defect estimate for this arc
// (speed-conservation drift plus endpoint mismatch where applicable).
struct GeodesicSegment {
    Point start;
    Point end;
    TangentVector initial_velocity;  // d/dt at t=0; metric norm equals `length`
    TangentVector final_velocity;    // d/dt at t=1, based at `end`
    double length = 0.0;
    std::vector<Point> samples;
    double residual = 0.0;
};

struct ShootResult {
    Point point;
    TangentVector velocity;
    bool exited = false;      // trajectory left the working region
    double exit_time = 0.0;   // parameter time of the boundary event
};

// Chart box; periodic axes wrap instead of bounding.
struct WorkingRegion {
    Vec2 lo, hi;
    bool periodic[2] = {false, false};
    double period[2] = {0.0, 0.0};

    bool contains(Vec2 c, double slack = 0.0) const {
        for (int i = 0; i < 2; ++i) {
            if (periodic[i]) continue;
            if (c[i] < lo[i] - slack || c[i] > hi[i] + slack) return false;
        }
        return true;
    }
};

struct Christoffel {
    double G[2][2][2] = {};  // G[i][j][k] = Gamma^i_{jk}
};

namespace detail {
struct GeoState {
    Vec2 x, v;
};
inline GeoState operator+(GeoState a, GeoState b) { return {a.x + b.x, a.v + b.v}; }
inline GeoState operator*(double s, GeoState a) { return {s * a.x, s * a.v}; }
} // namespace detail

class Manifold {
public:
    virtual ~Manifold() = default;

    const std::string& kind() const { return kind_; }
    int dimension() const { return 2; }
    double injectivity_floor() const { return injectivity_floor_; }
    double convexity_floor() const { return convexity_floor_; }
    const WorkingRegion& working_region() const { return region_; }

    // Rough metric diameter of the working region; sets the degeneracy scale
    // for "constant" segments.
    double working_scale() const { return working_scale_; }
    double degenerate_segment_length() const { return 1e-9 * working_scale_; }

    // --- chart structure -------------------------------------------------
    virtual Mat2 metric_at(const Point& p) const = 0;
    virtual std::array<Mat2, 2> metric_partials_at(const Point& p) const {
        return finite_difference_partials(p);
    }
    virtual Christoffel christoffels_at(const Point& p) const {
        return christoffels_from_partials(p);
    }
    virtual Vec3 embed(const Point& p) const = 0;
    virtual Vec3 embed_tangent(const TangentVector& t) const = 0;
    // False when embed() is a chart plot rather than an isometric immersion
    // (positions near a seam then embed far apart).
    virtual bool embed_faithful() const { return true; }

    // Canonical representative (wraps periodic coordinates).
    virtual Point normalize(const Point& p) const {
        Point q = p;
        for (int i = 0; i < 2; ++i)
            if (region_.periodic[i]) q.c[i] = wrap_periodic(q.c[i], region_.period[i]);
        return q;
    }

    // Seam-aware coordinate difference to - from (shortest representative on
    // periodic axes).
    virtual Vec2 chart_delta(const Point& from, const Point& to) const {
        Vec2 d = to.c - from.c;
        for (int i = 0; i < 2; ++i)
            if (region_.periodic[i]) d[i] = wrap_symmetric(d[i], region_.period[i]);
        return d;
    }

    void validate_point(const Point& p) const {
        if (!region_.contains(p.c, 1e-9 * working_scale_))
            throw DomainError(kind_ + ": point outside chart domain");
        if (p.chart_id != 0) throw DomainError(kind_ + ": unknown chart id");
    }

    double metric_norm(const Point& p, Vec2 v) const {
        return std::sqrt(std::max(0.0, quad_form(metric_at(p), v, v)));
    }
    double metric_inner(const Point& p, Vec2 a, Vec2 b) const {
        return quad_form(metric_at(p), a, b);
    }

    // --- geodesic operations ----------------------------------------------
    // Geodesic gamma with gamma(0)=p, gamma'(0)=v, evaluated at parameter t;
    // velocity is transported along. Leaving the working region is reported
    // as an event, not an error.
    virtual ShootResult geodesic_shoot(const Point& p, const Vec2& velocity, double t) const {
        validate_point(p);
        auto states = integrate_geodesic(p, velocity, t, nullptr);
        return states.result;
    }

    // Minimizing geodesic between nearby points (shooting Newton on the
    // initial velocity). Precondition d(p,q) < injectivity_floor/2; `hint`
    // warm-starts the solver.
    virtual GeodesicSegment minimizing_geodesic(const Point& p, const Point& q,
                                                const Vec2* hint = nullptr) const {
        validate_point(p);
        validate_point(q);
        Vec2 d = chart_delta(p, q);
        if (norm(d) == 0.0) return degenerate_segment(p);
        // Estimated distance gates the uniqueness precondition.
        Point mid{p.c + 0.5 * d, p.chart_id};
        double est = metric_norm(normalize(mid), d);
        if (est > 0.55 * injectivity_floor_ && !hint)
            throw DomainError(kind_ + ": endpoints beyond the unique-geodesic regime (estimate " +
                              std::to_string(est) + ")");
        Vec2 w = hint ? *hint : bvp_initial_guess(p, q, d);
        double res = 0.0;
        for (int iter = 0; iter < kBvpMaxIterations; ++iter) {
            ShootResult s = geodesic_shoot(p, w, 1.0);
            Vec2 r = chart_delta(s.point, q);
            res = norm(r);
            if (res <= kBvpTolerance) return build_segment(p, w, 1.0, res);
            Mat2 J = bvp_jacobian(p, w, s.point);
            w += J.solve(r);
        }
        throw SolverError(kind_ + ": boundary-value solver did not converge", res);
    }

    // Parallel transport of v along a segment (v based at segment start).
    virtual TangentVector parallel_transport(const TangentVector& v,
                                             const GeodesicSegment& along) const {
        require_same_base(v.base, along.start);
        Vec2 w = transport_by_integration(along, v.v);
        return {along.end, w};
    }

    // Distance; exact within the uniqueness regime, otherwise a chart-path
    // upper bound with *exact set to false.
    virtual double distance(const Point& p, const Point& q, bool* exact = nullptr) const {
        if (exact) *exact = true;
        Vec2 d = chart_delta(p, q);
        if (norm(d) == 0.0) return 0.0;
        Point mid{p.c + 0.5 * d, p.chart_id};
        double est = metric_norm(normalize(mid), d);
        if (est <= 0.5 * injectivity_floor_) {
            try {
                return minimizing_geodesic(p, q).length;
            } catch (const SolverError&) {
                // fall through to the flagged upper bound
            }
        }
        if (exact) *exact = false;
        return distance_upper_bound(p, q);
    }

    // --- construction helpers ----------------------------------------------
    // Segment from initial data (no endpoint solve); exact on closed-form
    // manifolds, RK4 elsewhere. Throws if the trajectory leaves the region.
    GeodesicSegment segment_from_shoot(const Point& p, const Vec2& velocity, double t) const {
        return build_segment(p, t * velocity, 1.0, 0.0);
    }

protected:
    Manifold(std::string kind, double injectivity_floor, double convexity_floor,
             WorkingRegion region, double working_scale)
        : kind_(std::move(kind)),
          injectivity_floor_(injectivity_floor),
          convexity_floor_(convexity_floor),
          region_(region),
          working_scale_(working_scale) {}

    static constexpr int kSegmentSamples = 9;     // interior sample resolution per arc
    static constexpr int kBvpMaxIterations = 50;
    static constexpr double kBvpTolerance = 1e-10;  // chart-coordinate residual

    // Geometric comparison: chart representatives may differ at poles/seams.
    void require_same_base(const Point& a, const Point& b) const {
        if (norm(embed(a) - embed(b)) > 1e-7 * std::max(1.0, working_scale_))
            throw DomainError(kind_ + ": tangent vector based at the wrong point");
    }

    virtual double distance_upper_bound(const Point& p, const Point& q) const {
        Vec2 d = chart_delta(p, q);
        double gp = metric_norm(p, d), gq = metric_norm(q, d);
        return std::max(gp, gq);
    }

    virtual Vec2 bvp_initial_guess(const Point& p, const Point& /*q*/, Vec2 delta) const {
        // Chart difference rescaled so its metric length at the midpoint is kept.
        Point mid = normalize({p.c + 0.5 * delta, p.chart_id});
        double lp = metric_norm(p, delta);
        double lm = metric_norm(mid, delta);
        return (lp > 0 && lm > 0) ? (lm / lp) * delta : delta;
    }

    std::array<Mat2, 2> finite_difference_partials(const Point& p) const {
        std::array<Mat2, 2> out;
        double h = 1e-6 * std::max(1.0, std::abs(p.c.x) + std::abs(p.c.y));
        for (int i = 0; i < 2; ++i) {
            Point pp = p, pm = p;
            pp.c[i] += h;
            pm.c[i] -= h;
            Mat2 gp = metric_at(pp), gm = metric_at(pm);
            out[i] = (1.0 / (2 * h)) * (gp + (-1.0) * gm);
        }
        return out;
    }

    Christoffel christoffels_from_partials(const Point& p) const {
        Mat2 g = metric_at(p);
        auto dg = metric_partials_at(p);
        double det = g.det();
        Mat2 ginv{g.m11 / det, -g.m01 / det, -g.m10 / det, g.m00 / det};
        auto gat = [&](const Mat2& m, int a, int b) {
            return a == 0 ? (b == 0 ? m.m00 : m.m01) : (b == 0 ? m.m10 : m.m11);
        };
        Christoffel c;
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j)
                for (int k = 0; k < 2; ++k) {
                    double s = 0;
                    for (int l = 0; l < 2; ++l)
                        s += gat(ginv, i, l) *
                             (gat(dg[j], l, k) + gat(dg[k], j, l) - gat(dg[l], j, k));
                    c.G[i][j][k] = 0.5 * s;
                }
        return c;
    }

    Vec2 geodesic_acceleration(const Point& p, Vec2 v) const {
        Christoffel c = christoffels_at(p);
        Vec2 a;
        for (int i = 0; i < 2; ++i) {
            double s = 0;
            for (int j = 0; j < 2; ++j)
                for (int k = 0; k < 2; ++k) s += c.G[i][j][k] * v[j] * v[k];
            a[i] = -s;
        }
        return a;
    }

    struct Integration {
        ShootResult result;
        std::vector<detail::GeoState> states;  // filled only when dense output requested
        double step = 0.0;
    };

    // Fixed-step RK4 with refinement while the speed-conservation defect
    // exceeds tolerance. Dense states returned when `dense` is non-null.
    Integration integrate_geodesic(const Point& p, Vec2 v, double t, const bool* dense) const {
        Integration out;
        double speed0 = metric_norm(p, v);
        if (speed0 * std::abs(t) == 0.0) {
            out.result = {p, {p, v}, false, 0.0};
            if (dense) out.states = {{p.c, v}};
            return out;
        }
        double arc = speed0 * std::abs(t);
        int n = substeps_for(arc);
        for (int attempt = 0;; ++attempt) {
            out.states.clear();
            bool keep = dense != nullptr;
            detail::GeoState y{p.c, v};
            if (keep) out.states.push_back(y);
            double h = t / n;
            bool exited = false;
            double exit_time = 0.0;
            auto f = [&](const detail::GeoState& s) {
                Point ps{s.x, p.chart_id};
                return detail::GeoState{s.v, geodesic_acceleration(ps, s.v)};
            };
            for (int k = 0; k < n; ++k) {
                auto k1 = f(y);
                auto k2 = f(y + (0.5 * h) * k1);
                auto k3 = f(y + (0.5 * h) * k2);
                auto k4 = f(y + h * k3);
                y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
                if (!region_.contains(y.x)) {
                    exited = true;
                    exit_time = (k + 1) * h;
                    break;
                }
                if (keep) out.states.push_back(y);
            }
            Point endp = normalize({y.x, p.chart_id});
            double speed1 = metric_norm(endp, y.v);
            double drift = std::abs(speed1 - speed0) / speed0;
            if (!exited && drift > kShootDriftTolerance && attempt < 4) {
                n *= 2;
                continue;
            }
            out.result = {endp, {endp, y.v}, exited, exit_time};
            out.step = t / n;
            // Defect recorded on the result velocity's magnitude channel via
            // the caller (build_segment reads the drift again).
            return out;
        }
    }

    virtual int substeps_for(double arc) const {
        double target = std::max(1e-12, injectivity_floor_ / 8.0);
        int n = static_cast<int>(std::ceil(arc / target));
        n = std::clamp(n, 8, 1 << 16);
        return ((n + kSegmentSamples - 2) / (kSegmentSamples - 1)) * (kSegmentSamples - 1);
    }

    static constexpr double kShootDriftTolerance = 1e-11;

    GeodesicSegment degenerate_segment(const Point& p) const {
        GeodesicSegment s;
        s.start = s.end = p;
        s.initial_velocity = {p, {0, 0}};
        s.final_velocity = {p, {0, 0}};
        s.length = 0.0;
        s.samples.assign(2, p);
        return s;
    }

    // Build a unit-parameter segment from initial data. `extra_residual`
    // carries the BVP endpoint mismatch when called from the solver.
    virtual GeodesicSegment build_segment(const Point& p, Vec2 w, double t,
                                          double extra_residual) const {
        bool dense = true;
        auto integ = integrate_geodesic(p, w, t, &dense);
        if (integ.result.exited)
            throw DomainError(kind_ + ": geodesic segment leaves the working region");
        GeodesicSegment s;
        s.start = p;
        s.end = integ.result.point;
        s.initial_velocity = {p, t * w};  // reparametrized to [0,1]
        s.final_velocity = {s.end, t * integ.result.velocity.v};
        double speed0 = metric_norm(p, w);
        double speed1 = metric_norm(s.end, integ.result.velocity.v);
        s.length = 0.5 * (speed0 + speed1) * std::abs(t);
        int n = static_cast<int>(integ.states.size()) - 1;
        int stride = std::max(1, n / (kSegmentSamples - 1));
        s.samples.reserve(kSegmentSamples);
        for (int k = 0; k <= n; k += stride)
            s.samples.push_back(normalize({integ.states[static_cast<size_t>(k)].x, p.chart_id}));
        if (norm(chart_delta(s.samples.back(), s.end)) > 0) s.samples.back() = s.end;
        double drift = speed0 > 0 ? std::abs(speed1 - speed0) / speed0 : 0.0;
        s.residual = drift + extra_residual;
        return s;
    }

    Mat2 bvp_jacobian(const Point& p, Vec2 w, const Point& base_end) const {
        Mat2 J;
        double eps = 1e-7 * std::max(1.0, norm(w));
        for (int c = 0; c < 2; ++c) {
            Vec2 w2 = w;
            w2[c] += eps;
            ShootResult s2 = geodesic_shoot(p, w2, 1.0);
            Vec2 col = chart_delta(base_end, s2.point) / eps;
            // Newton solves J * dw = r with r = delta(end, q); endpoint moves
            // with +J dw, so the residual shrinks along J^{-1} r.
            if (c == 0) {
                J.m00 = col.x;
                J.m10 = col.y;
            } else {
                J.m01 = col.x;
                J.m11 = col.y;
            }
        }
        return J;
    }

    Vec2 transport_by_integration(const GeodesicSegment& seg, Vec2 w0) const {
        if (seg.length == 0.0) return w0;
        Vec2 v0 = seg.initial_velocity.v;
        int n = substeps_for(seg.length);
        double h = 1.0 / n;
        struct State {
            Vec2 x, v, w;
        };
        State y{seg.start.c, v0, w0};
        auto f = [&](const State& s) {
            Point ps{s.x, seg.start.chart_id};
            Christoffel c = christoffels_at(ps);
            Vec2 dv = {0, 0}, dw = {0, 0};
            for (int i = 0; i < 2; ++i) {
                double sv = 0, sw = 0;
                for (int j = 0; j < 2; ++j)
                    for (int k = 0; k < 2; ++k) {
                        sv += c.G[i][j][k] * s.v[j] * s.v[k];
                        sw += c.G[i][j][k] * s.v[j] * s.w[k];
                    }
                dv[i] = -sv;
                dw[i] = -sw;
            }
            return State{s.v, dv, dw};
        };
        auto add = [](State a, State b, double s) {
            return State{a.x + s * b.x, a.v + s * b.v, a.w + s * b.w};
        };
        for (int k = 0; k < n; ++k) {
            State k1 = f(y);
            State k2 = f(add(y, k1, 0.5 * h));
            State k3 = f(add(y, k2, 0.5 * h));
            State k4 = f(add(y, k3, h));
            y = State{y.x + (h / 6.0) * (k1.x + 2.0 * k2.x + 2.0 * k3.x + k4.x),
                      y.v + (h / 6.0) * (k1.v + 2.0 * k2.v + 2.0 * k3.v + k4.v),
                      y.w + (h / 6.0) * (k1.w + 2.0 * k2.w + 2.0 * k3.w + k4.w)};
        }
        return y.w;
    }

    std::string kind_;
    double injectivity_floor_;
    double convexity_floor_;
    WorkingRegion region_;
    double working_scale_;
};

using ManifoldPtr = std::shared_ptr<const Manifold>;

// --- free helpers -----------------------------------------------------------

inline bool points_close(const Manifold& m, const Point& a, const Point& b, double tol) {
    return norm(m.embed(a) - m.embed(b)) <= tol;
}

inline GeodesicSegment reverse_segment(const GeodesicSegment& s) {
    GeodesicSegment r;
    r.start = s.end;
    r.end = s.start;
    r.initial_velocity = {s.end, -s.final_velocity.v};
    r.final_velocity = {s.start, -s.initial_velocity.v};
    r.length = s.length;
    r.residual = s.residual;
    r.samples.assign(s.samples.rbegin(), s.samples.rend());
    return r;
}

// Split at parameter tau in (0,1); both halves reuse the parent's geodesic.
inline std::pair<GeodesicSegment, GeodesicSegment> split_segment(const Manifold& m,
                                                                 const GeodesicSegment& s,
                                                                 double tau) {
    GeodesicSegment left = m.segment_from_shoot(s.start, s.initial_velocity.v, tau);
    GeodesicSegment right =
        m.segment_from_shoot(left.end, left.final_velocity.v * (1.0 / tau) * (1.0 - tau), 1.0);
    return {left, right};
}

// Finite-difference covariant acceleration over interior samples, in
// unit-speed parametrization. A coarse audit of segment straightness; the
// truncation floor scales with (sample gap)^2.
inline double max_covariant_residual(const Manifold& m, const GeodesicSegment& s) {
    size_t n = s.samples.size();
    if (n < 3 || s.length == 0.0) return 0.0;
    double h = 1.0 / static_cast<double>(n - 1);
    double worst = 0.0;
    for (size_t k = 1; k + 1 < n; ++k) {
        Vec2 prev = m.chart_delta(s.samples[k], s.samples[k - 1]);
        Vec2 next = m.chart_delta(s.samples[k], s.samples[k + 1]);
        Vec2 vel = (next - prev) / (2 * h);
        Vec2 acc = (next + prev) / (h * h);
        Point pk = s.samples[k];
        Christoffel c = m.christoffels_at(pk);
        Vec2 defect;
        for (int i = 0; i < 2; ++i) {
            double sum = 0;
            for (int j = 0; j < 2; ++j)
                for (int kk = 0; kk < 2; ++kk) sum += c.G[i][j][kk] * vel[j] * vel[kk];
            defect[i] = acc[i] + sum;
        }
        // normalize to unit-speed parametrization
        worst = std::max(worst, m.metric_norm(pk, defect) / (s.length * s.length));
    }
    return worst;
}

} // namespace flowerflow
