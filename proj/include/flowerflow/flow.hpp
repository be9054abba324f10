#pragma once
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "flowerflow/ends.hpp"
#include "flowerflow/manifold.hpp"
#include "flowerflow/nets.hpp"

namespace flowerflow {

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

// Zeroed derived fields are filled by resolve_config: I = min(delta/2, i1/4),
// N = floor(L/I), dt = I/(10 n) clamped so that dt * (speed bound) < I/4,
// a = I/4. All tolerances live here; nothing outcome-relevant is hard-coded.
struct FlowConfig {
    double L = 0.0;      // length budget
    double delta = 0.0;  // local-convexity scale
    double I = 0.0;      // segment bound
    int N = 0;           // interior points per petal
    double dt = 0.0;
    double a = 0.0;            // short-petal threshold
    double tol_stat = 1e-6;    // stationarity tolerance on the max residual
    double tol_geo = 1e-6;     // tolerance on the geodesic deviation
    long max_steps = 20000;
    double escape_radius = -1.0;  // < 0 resolves to L
    int stationary_window = 50;
    double contraction_fraction = 0.01;  // collapse when diameter < I * fraction
    double monotonicity_slack = 1e-8;
    int snapshot_stride = 25;
    RebalanceOptions rebalance{};
};

inline int active_petal_count(const Flower& f) {
    int n = 0;
    for (size_t j = 0; j < f.petals.size(); ++j)
        if (!f.petal_is_constant(j)) ++n;
    return n;
}

inline FlowConfig resolve_config(const Manifold& m, FlowConfig c, int petals) {
    if (c.L <= 0) throw DomainError("flow config: L must be positive");
    if (c.delta <= 0) throw DomainError("flow config: delta must be positive");
    if (c.I <= 0) c.I = std::min(0.5 * c.delta, 0.25 * m.injectivity_floor());
    if (c.N <= 0) c.N = static_cast<int>(std::floor(c.L / c.I));
    if (c.N < 1) throw DomainError("flow config: N = floor(L/I) must be at least 1");
    if (c.a <= 0) c.a = 0.25 * c.I;
    if (c.a >= c.I) throw DomainError("flow config: short-petal threshold a must stay below I");
    double speed_bound = 4.0 * std::max(1, petals);  // 2 x (max incident segments)
    double dt_cap = 0.999 * c.I / (4.0 * speed_bound);
    double dt_default = c.I / (10.0 * m.dimension());
    if (c.dt <= 0) c.dt = std::min(dt_default, dt_cap);
    if (c.dt * speed_bound >= 0.25 * c.I)
        throw DomainError("flow config: dt violates the inter-rebalance spacing bound");
    if (c.escape_radius < 0) c.escape_radius = c.L;
    return c;
}

// ---------------------------------------------------------------------------
// Vector field
// ---------------------------------------------------------------------------

struct FlowerField {
    TangentVector base;
    std::vector<std::vector<TangentVector>> interior;  // per petal, per interior point
    std::vector<double> weights;                       // short-petal stratum weight per petal
    std::vector<double> extents;                       // arc-based distance bound from base
    double max_norm = 0.0;
    double sum_squares = 0.0;
    bool generic = true;  // no stratum blending active
};

namespace detail {

// Arc-based upper bound on how far the petal reaches from the base.
inline double petal_extent(const Chain& petal) {
    double total = chain_length(petal);
    double cum = 0.0, extent = 0.0;
    for (size_t k = 0; k + 1 < petal.size(); ++k) {
        cum += petal[k].length;
        extent = std::max(extent, std::min(cum, total - cum));
    }
    return extent;
}

inline GeodesicSegment connect(const Manifold& m, const Point& p, const Point& q,
                               const GeodesicSegment* old) {
    if (old) {
        Vec2 hint = old->initial_velocity.v;
        try {
            return m.minimizing_geodesic(p, q, &hint);
        } catch (const SolverError&) {
            // cold restart below
        }
    }
    return m.minimizing_geodesic(p, q);
}

} // namespace detail

// Per-point deformation field. Large petals contribute unit tangents of their
// incident segments; petals inside the a/2-ball of the base are excluded from
// the base sum and their interior points follow the transported base vector
// plus a unit pull toward the base; the strata are blended by a smooth
// per-petal weight w(extent) with w=1 below a/2 and w=0 above a.
inline FlowerField vector_field(const Manifold& m, const Flower& f, const FlowConfig& cfg) {
    FlowerField field;
    field.interior.resize(f.petals.size());
    field.weights.assign(f.petals.size(), 0.0);
    field.extents.assign(f.petals.size(), 0.0);

    for (size_t j = 0; j < f.petals.size(); ++j) {
        if (f.petal_is_constant(j)) {
            field.weights[j] = 1.0;
            continue;
        }
        for (const auto& seg : f.petals[j])
            if (seg.length > cfg.I * (1.0 + 1e-6))
                throw DomainError("vector_field: flower is not rebalanced (segment length " +
                                  std::to_string(seg.length) + " exceeds I)");
        double e = detail::petal_extent(f.petals[j]);
        field.extents[j] = e;
        field.weights[j] = smoothstep((cfg.a - e) / (0.5 * cfg.a));
        if (field.weights[j] > 0.0) field.generic = false;
    }

    Vec3 base_sum{};
    for (size_t j = 0; j < f.petals.size(); ++j) {
        if (f.petal_is_constant(j)) continue;
        double keep = 1.0 - field.weights[j];
        if (keep == 0.0) continue;
        base_sum += keep * (detail::away_unit(m, f.petals[j].front(), true) +
                            detail::away_unit(m, f.petals[j].back(), false));
    }
    field.base = {f.base, pull_ambient(m, f.base, base_sum)};
    double base_norm = m.metric_norm(f.base, field.base.v);
    field.max_norm = base_norm;
    field.sum_squares = base_norm * base_norm;

    for (size_t j = 0; j < f.petals.size(); ++j) {
        if (f.petal_is_constant(j)) continue;
        const Chain& chain = f.petals[j];
        double w = field.weights[j];
        auto& out = field.interior[j];
        out.reserve(chain.size() - 1);
        for (size_t k = 0; k + 1 < chain.size(); ++k) {
            Point p = chain[k].end;
            Vec3 g_amb = detail::away_unit(m, chain[k], false) +
                         detail::away_unit(m, chain[k + 1], true);
            Vec2 v = pull_ambient(m, p, g_amb);
            if (w > 0.0) {
                GeodesicSegment to_p = m.minimizing_geodesic(f.base, p);
                Vec2 v1 = m.parallel_transport(field.base, to_p).v;
                Vec2 v2{0, 0};
                if (to_p.length > m.degenerate_segment_length()) {
                    double n = m.metric_norm(p, to_p.final_velocity.v);
                    // Unit pull toward the base, capped so one dt-step lands on
                    // the base instead of shooting past it.
                    double pull = std::min(1.0, to_p.length / cfg.dt);
                    v2 = (-pull / n) * to_p.final_velocity.v;
                }
                v = (1.0 - w) * v + w * (v1 + v2);
            }
            out.push_back({p, v});
            double nn = m.metric_norm(p, v);
            field.max_norm = std::max(field.max_norm, nn);
            field.sum_squares += nn * nn;
        }
    }
    return field;
}

struct FirstVariation {
    double value = 0.0;
    bool generic = true;  // the -sum |V|^2 identity is exact only without blending
};

inline FirstVariation first_variation(const Manifold& m, const Flower& f, const FlowConfig& cfg) {
    FlowerField field = vector_field(m, f, cfg);
    return {-field.sum_squares, field.generic};
}

// ---------------------------------------------------------------------------
// Stepping
// ---------------------------------------------------------------------------

// Field motion only: every point shot along its vector for time h, chains
// reconnected by minimizing geodesics. No rebalancing.
inline Flower advect(const Manifold& m, const Flower& f, const FlowerField& field, double h) {
    Flower out;
    out.constant = f.constant;
    out.petals.resize(f.petals.size());
    ShootResult bs = m.geodesic_shoot(f.base, field.base.v, h);
    if (bs.exited) throw Error("advect: base point left the working region");
    out.base = bs.point;
    for (size_t j = 0; j < f.petals.size(); ++j) {
        if (f.petal_is_constant(j)) continue;
        const Chain& chain = f.petals[j];
        std::vector<Point> knots;
        knots.reserve(chain.size() + 1);
        knots.push_back(out.base);
        for (size_t k = 0; k + 1 < chain.size(); ++k) {
            ShootResult sr = m.geodesic_shoot(chain[k].end, field.interior[j][k].v, h);
            if (sr.exited) throw Error("advect: petal point left the working region");
            knots.push_back(sr.point);
        }
        knots.push_back(out.base);
        Chain next;
        next.reserve(chain.size());
        for (size_t k = 0; k + 1 < knots.size(); ++k)
            next.push_back(detail::connect(m, knots[k], knots[k + 1], &chain[k]));
        out.petals[j] = std::move(next);
    }
    return out;
}

inline Flower rebalance_flower(const Manifold& m, const Flower& f, const FlowConfig& cfg) {
    Flower out;
    out.base = f.base;
    out.petals.resize(f.petals.size());
    out.constant = f.constant;
    for (size_t j = 0; j < f.petals.size(); ++j) {
        if (f.petal_is_constant(j)) {
            out.constant[j] = true;
            continue;
        }
        Chain rb = birkhoff_rebalance(m, f.petals[j], f.base, cfg.N + 1, cfg.rebalance,
                                      static_cast<int>(j));
        if (rb.empty()) {
            out.constant[j] = true;
            out.petals[j] = {};
        } else {
            out.petals[j] = std::move(rb);
        }
    }
    return out;
}

struct StepResult {
    Flower flower;
    double length_before = 0.0;
    double length_after = 0.0;
    double dt_used = 0.0;
    FlowerField field;
};

// One flow step: advect along the field for dt, then Birkhoff-rebalance each
// petal. Length must not increase beyond the slack; if it does the motion is
// retried with a halved substep (deterministic), and failing that it is an
// error rather than a silent clip.
inline StepResult step(const Manifold& m, const Flower& f, const FlowConfig& cfg) {
    StepResult r;
    r.field = vector_field(m, f, cfg);
    r.length_before = length(m, f);
    double h = cfg.dt;
    for (int attempt = 0; attempt < 6; ++attempt) {
        Flower moved = advect(m, f, r.field, h);
        Flower rebal = rebalance_flower(m, moved, cfg);
        double len = length(m, rebal);
        if (len <= r.length_before + cfg.monotonicity_slack) {
            r.flower = std::move(rebal);
            r.length_after = len;
            r.dt_used = h;
            return r;
        }
        h *= 0.5;
    }
    throw Error("step: length increased beyond the monotonicity slack");
}

// ---------------------------------------------------------------------------
// Trajectories
// ---------------------------------------------------------------------------

struct TraceRecord {
    double t = 0.0;
    double length = 0.0;
    double max_residual = 0.0;
};

struct FlowSnapshot {
    long step = 0;
    double t = 0.0;
    Flower flower;
};

struct FlowOutcome {
    enum class Kind { ContractedToPoint, StationaryFlower, EscapedToEnd, BudgetExhausted };
    Kind kind = Kind::BudgetExhausted;
    Point point;           // ContractedToPoint
    std::string end_id;    // EscapedToEnd
    Flower final_flower;
    NetMeasurement measurement;  // populated for StationaryFlower (and final state otherwise)
    long steps = 0;
    double final_time = 0.0;
    std::vector<TraceRecord> trace;        // dense scalars
    std::vector<FlowSnapshot> snapshots;   // strided full states
    FlowConfig config;                     // resolved values actually used
};

inline const char* to_string(FlowOutcome::Kind k) {
    switch (k) {
        case FlowOutcome::Kind::ContractedToPoint: return "ContractedToPoint";
        case FlowOutcome::Kind::StationaryFlower: return "StationaryFlower";
        case FlowOutcome::Kind::EscapedToEnd: return "EscapedToEnd";
        default: return "BudgetExhausted";
    }
}

using FlowObserver =
    std::function<void(long step, double t, const Flower&, double length, double residual)>;

namespace detail {

inline double min_core_distance(const Manifold& m, const EndsDecomposition& deco,
                                const Net& net) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& p : image_samples(net)) best = std::min(best, core_distance(m, deco, p));
    return best;
}

// Explicit collapse of a tiny flower: all points slide to the base along
// minimizing geodesics (the whole flower sits in a convex ball).
inline Flower contract_to_base(const Flower& f) {
    Flower out;
    out.base = f.base;
    out.petals.assign(f.petals.size(), {});
    out.constant.assign(f.petals.size(), true);
    return out;
}

} // namespace detail

// Runs the flow until contraction, stationarity, escape, or budget exhaustion.
// Escape is absorbing: iteration stops the moment the flower is classified
// inside one end beyond the escape radius.
inline FlowOutcome run_flow(const Manifold& m, const Flower& start, const FlowConfig& cfg_in,
                            const EndsDecomposition* ends = nullptr,
                            const FlowObserver& observer = nullptr) {
    FlowConfig cfg = resolve_config(m, cfg_in, active_petal_count(start));
    double len0 = length(m, start);
    if (len0 > cfg.L * (1.0 + 1e-9))
        throw DomainError("run_flow: initial length exceeds the budget L");

    FlowOutcome out;
    out.config = cfg;
    Flower flower = rebalance_flower(m, start, cfg);  // entry Birkhoff deformation
    double t = 0.0;
    int stationary_run = 0;
    double prev_len = std::numeric_limits<double>::infinity();

    auto record_snapshot = [&](long s) {
        if (cfg.snapshot_stride > 0 && s % cfg.snapshot_stride == 0)
            out.snapshots.push_back({s, t, flower});
    };

    for (long s = 0; s <= cfg.max_steps; ++s) {
        double len = length(m, flower);
        bool all_constant = active_petal_count(flower) == 0;
        FlowerField field;
        double residual = 0.0;
        if (!all_constant) {
            field = vector_field(m, flower, cfg);
            residual = field.max_norm;
        }
        out.trace.push_back({t, len, residual});
        record_snapshot(s);
        if (observer) observer(s, t, flower, len, residual);
        out.steps = s;
        out.final_time = t;

        // (a) collapse of a tiny shrinking flower (finite-time contraction)
        double diameter_bound = 0.0;
        for (double e : field.extents) diameter_bound = std::max(diameter_bound, 2.0 * e);
        bool shrinking = prev_len - len > 1e-14 * std::max(1.0, len);
        if (all_constant || (diameter_bound < cfg.I * cfg.contraction_fraction && shrinking)) {
            flower = detail::contract_to_base(flower);
            out.trace.push_back({t, 0.0, 0.0});
            out.kind = FlowOutcome::Kind::ContractedToPoint;
            out.point = flower.base;
            out.final_flower = flower;
            out.measurement = measure(m, as_net(flower));
            return out;
        }

        // (b) stationarity sustained over the window, certified by measurement
        stationary_run = residual <= cfg.tol_stat ? stationary_run + 1 : 0;
        if (stationary_run >= cfg.stationary_window) {
            NetMeasurement meas = measure(m, as_net(flower));
            if (meas.max_residual <= cfg.tol_stat && meas.geodesic_deviation <= cfg.tol_geo) {
                out.kind = FlowOutcome::Kind::StationaryFlower;
                out.final_flower = flower;
                out.measurement = meas;
                return out;
            }
            stationary_run = 0;
        }

        // (c) absorbing escape into one end
        if (ends && !ends->empty()) {
            Net net = as_net(flower);
            PositionClass pc = classify_position(m, *ends, net);
            if (pc.kind == PositionClass::Kind::InEnd &&
                detail::min_core_distance(m, *ends, net) > cfg.escape_radius) {
                out.kind = FlowOutcome::Kind::EscapedToEnd;
                out.end_id = ends->sigmas[static_cast<size_t>(pc.index)].name.empty()
                                 ? "end:" + std::to_string(pc.index)
                                 : ends->sigmas[static_cast<size_t>(pc.index)].name;
                out.final_flower = flower;
                out.measurement = measure(m, net);
                return out;
            }
        }

        if (s == cfg.max_steps) break;
        StepResult sr = step(m, flower, cfg);
        flower = std::move(sr.flower);
        t += sr.dt_used;
        prev_len = sr.length_before;
    }
    out.kind = FlowOutcome::Kind::BudgetExhausted;
    out.final_flower = flower;
    out.measurement = measure(m, as_net(flower));
    return out;
}

struct CageFlowResult {
    FlowOutcome outcome;
    double cage_length = 0.0;
    double flower_length = 0.0;  // after the retraction, before the flow
    double max_edge_growth = 0.0;
};

// Retraction phase (cage collapsed onto its maximal vertex) followed by the
// flower flow, with the length budget enlarged to absorb the retraction's
// growth.
inline CageFlowResult run_cage_flow(const Manifold& m, const Cage& cage, const FlowConfig& cfg_in,
                                    const EndsDecomposition* ends = nullptr,
                                    const FlowObserver& observer = nullptr) {
    CageFlowResult r;
    r.cage_length = length(m, cage);
    if (cfg_in.L > 0 && r.cage_length > cfg_in.L * (1.0 + 1e-9))
        throw DomainError("run_cage_flow: cage longer than the budget L");
    double max_edge_in = 0.0;
    for (const auto& [key, chain] : cage.edges) max_edge_in = std::max(max_edge_in, chain_length(chain));
    Cage collapsed = cage_to_flower(m, cage, 1.0);
    for (const auto& [key, chain] : collapsed.edges)
        r.max_edge_growth = std::max(
            r.max_edge_growth, max_edge_in > 0 ? chain_length(chain) / max_edge_in : 0.0);
    Flower f = flower_from_collapsed_cage(m, collapsed);
    r.flower_length = length(m, f);
    FlowConfig cfg = cfg_in;
    cfg.L = std::max(cfg.L, r.flower_length * (1.0 + 1e-6));
    cfg.I = 0;  // re-derive for the enlarged budget
    cfg.N = 0;
    cfg.dt = 0;
    cfg.a = 0;
    if (cfg.escape_radius < 0 && cfg_in.L > 0) cfg.escape_radius = cfg_in.L;
    r.outcome = run_flow(m, f, cfg, ends, observer);
    return r;
}

// ---------------------------------------------------------------------------
// Flow-property audit
// ---------------------------------------------------------------------------

struct PropertyCheck {
    std::string id;
    bool pass = true;
    long at_step = -1;    // first offending trace index
    double worst = 0.0;
    std::string note;
};

struct PropertyReport {
    std::vector<PropertyCheck> checks;
    bool all_pass = true;

    void add(PropertyCheck c) {
        all_pass = all_pass && c.pass;
        checks.push_back(std::move(c));
    }
};

struct AuditContext {
    struct ConvexBall {
        Point center;
        double radius = 0.0;
    };
    std::vector<ConvexBall> balls;   // declared convex sets the flow must preserve
    const EndsDecomposition* ends = nullptr;
    bool started_in_end = false;     // end preservation is audited when set
};

// Checks the defining flow properties on a completed trajectory:
//   monotone length; guaranteed window decay away from stationarity;
//   stationary states fixed; declared convex sets and end regions preserved.
inline PropertyReport check_flow_properties(const Manifold& m, const FlowOutcome& out,
                                            const AuditContext& ctx = {}) {
    PropertyReport rep;
    const FlowConfig& cfg = out.config;

    PropertyCheck p1;
    p1.id = "length-non-increasing";
    for (size_t i = 1; i < out.trace.size(); ++i) {
        double rise = out.trace[i].length - out.trace[i - 1].length;
        if (rise > cfg.monotonicity_slack) {
            p1.pass = false;
            p1.at_step = static_cast<long>(i);
            p1.worst = rise;
            p1.note = "length rose by " + std::to_string(rise);
            break;
        }
    }
    rep.add(p1);

    // Away from stationarity the first variation forces a definite drop over
    // a 10-step window (margin factor 0.05 on dt * residual^2 per step).
    PropertyCheck p2;
    p2.id = "window-length-drop";
    const size_t win = 10;
    for (size_t i = 0; i + win < out.trace.size(); ++i) {
        double rmin = std::numeric_limits<double>::infinity();
        for (size_t k = i; k < i + win; ++k) rmin = std::min(rmin, out.trace[k].max_residual);
        if (rmin <= 10.0 * cfg.tol_stat) continue;
        double need = 0.05 * rmin * rmin * cfg.dt * static_cast<double>(win);
        double drop = out.trace[i].length - out.trace[i + win].length;
        if (drop < need) {
            p2.pass = false;
            p2.at_step = static_cast<long>(i);
            p2.worst = drop - need;
            p2.note = "drop " + std::to_string(drop) + " below " + std::to_string(need);
            break;
        }
    }
    rep.add(p2);

    PropertyCheck p4;
    p4.id = "stationary-fixed";
    for (size_t i = 1; i < out.trace.size(); ++i) {
        if (out.trace[i - 1].max_residual > cfg.tol_stat) continue;
        double change = std::abs(out.trace[i].length - out.trace[i - 1].length);
        double allowed = cfg.tol_stat * cfg.dt * 10.0 + cfg.monotonicity_slack;
        if (change > allowed) {
            p4.pass = false;
            p4.at_step = static_cast<long>(i);
            p4.worst = change;
            break;
        }
    }
    rep.add(p4);

    if (!ctx.balls.empty()) {
        PropertyCheck p6;
    p6.id = "convex-set-preservation";
        double slack = 1e-10 * std::max(1.0, m.working_scale());
        for (const auto& snap : out.snapshots) {
            for (const auto& ball : ctx.balls) {
                for (const auto& p : image_samples(as_net(snap.flower))) {
                    double d = m.distance(ball.center, p);
                    if (d > ball.radius + 10.0 * slack) {
                        p6.pass = false;
                        p6.at_step = snap.step;
                        p6.worst = d - ball.radius;
                        p6.note = "point left the declared ball";
                        break;
                    }
                }
                if (!p6.pass) break;
            }
            if (!p6.pass) break;
        }
        rep.add(p6);
    }

    if (ctx.started_in_end && ctx.ends && !ctx.ends->empty()) {
        PropertyCheck pe;
    pe.id = "end-preservation";
        for (const auto& snap : out.snapshots) {
            PositionClass pc = classify_position(m, *ctx.ends, as_net(snap.flower));
            if (pc.kind == PositionClass::Kind::InCoreClosure ||
                (pc.kind == PositionClass::Kind::Straddling && snap.step > 0)) {
                pe.pass = false;
                pe.at_step = snap.step;
                pe.note = "flower re-entered the core region";
                break;
            }
        }
        rep.add(pe);
    }
    return rep;
}

// Re-runs the flow from an escaped final state and verifies the escape is
// absorbing: the flower never comes back within the escape radius of the core.
inline PropertyCheck verify_absorbing_escape(const Manifold& m, const FlowOutcome& out,
                                             const EndsDecomposition& ends, int extra_steps = 100) {
    PropertyCheck c;
    c.id = "absorbing-escape";
    if (out.kind != FlowOutcome::Kind::EscapedToEnd) {
        c.pass = false;
        c.note = "outcome is not an escape";
        return c;
    }
    FlowConfig cfg = out.config;
    Flower flower = out.final_flower;
    for (int s = 0; s < extra_steps; ++s) {
        StepResult sr = step(m, flower, cfg);
        flower = std::move(sr.flower);
        double d = detail::min_core_distance(m, ends, as_net(flower));
        if (d <= cfg.escape_radius * (1.0 - 1e-9)) {
            c.pass = false;
            c.at_step = s;
            c.worst = d;
            c.note = "core distance fell back to " + std::to_string(d);
            return c;
        }
    }
    return c;
}

} // namespace flowerflow
