// Acceptance suite: one PASS/FAIL line per criterion, each with its
// tolerances pinned in code. Exit status is 0 when every criterion is in its
// documented state (criterion 2 is a documented geometric impossibility on
// the sech profile and is expected to fail; see README).

#include <chrono>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "flowerflow/ends.hpp"
#include "flowerflow/fill.hpp"
#include "flowerflow/flow.hpp"
#include "flowerflow/registry.hpp"
#include "flowerflow/scenario.hpp"

using namespace flowerflow;

namespace {

struct Line {
    std::string id;
    bool pass = false;
    bool expected_pass = true;
    std::string detail;
};
std::vector<Line> g_lines;

void record(const std::string& id, bool pass, const std::string& detail,
            bool expected_pass = true) {
    g_lines.push_back({id, pass, expected_pass, detail});
    std::printf("%s %-14s %s%s\n", pass ? "PASS" : "FAIL", id.c_str(), detail.c_str(),
                (!pass && !expected_pass) ? "  [documented failure]" : "");
    std::fflush(stdout);
}

Point pt(double a, double b) { return {{a, b}, 0}; }

double wall_seconds(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ---------------------------------------------------------------------------

FlowOutcome g_equator_outcome;

void criterion_1_sphere_closed_geodesic() {
    auto t0 = std::chrono::steady_clock::now();
    auto sphere = make_manifold(json{{"kind", "round_sphere"}, {"radius", 1.0}});
    FlowConfig cfg;
    cfg.L = 7.0;
    cfg.delta = 1.0;
    cfg.max_steps = 5000;
    FlowConfig resolved = resolve_config(*sphere, cfg, 1);
    Flower f = make_parallel_circle_flower(*sphere, kPi / 2, resolved.N, {0.05, "alternating"});
    FlowOutcome out = run_flow(*sphere, f, cfg);
    double secs = wall_seconds(t0);
    double len = out.trace.empty() ? 0.0 : out.trace.back().length;
    bool ok = out.kind == FlowOutcome::Kind::StationaryFlower &&
              std::abs(len - kTwoPi) <= 1e-3 && out.measurement.max_residual <= 1e-6 &&
              secs < 60.0;
    g_equator_outcome = out;
    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "outcome=%s |L-2pi|=%.2e residual=%.2e wall=%.1fs (tol 1e-3 / 1e-6 / 60s)",
                  to_string(out.kind), std::abs(len - kTwoPi), out.measurement.max_residual, secs);
    record("criterion-1", ok, buf);
}

FlowOutcome g_sech_outcome;
const SurfaceOfRevolution* g_sech = nullptr;
EndsDecomposition g_sech_deco;

void criterion_2_sech_waist() {
    auto sor = SurfaceOfRevolution::make("sech_bulge");
    g_sech = sor.get();
    static std::shared_ptr<SurfaceOfRevolution> keep = sor;
    g_sech_deco.kind = EndsDecomposition::Kind::RevolutionBands;
    g_sech_deco.delta = 0.05;
    g_sech_deco.sigmas = {{1.0, +1, "plus"}, {-1.0, -1, "minus"}};

    // flow clause, exactly as stated: parallel at u = 0.5 expected to reach
    // the waist circle of length 2 pi
    FlowConfig cfg;
    cfg.L = 7.0;
    cfg.delta = 1.0;
    cfg.escape_radius = 1.0;
    cfg.max_steps = 40000;
    cfg.snapshot_stride = 500;
    FlowConfig resolved = resolve_config(*sor, cfg, 1);
    Flower f = make_parallel_circle_flower(*sor, 0.5, resolved.N);
    FlowOutcome out = run_flow(*sor, f, cfg, &g_sech_deco);
    g_sech_outcome = out;
    double len = out.trace.empty() ? 0.0 : out.trace.back().length;
    bool flow_ok = out.kind == FlowOutcome::Kind::StationaryFlower &&
                   std::abs(len - kTwoPi) <= 1e-2;

    // delta-local convexity at both sigmas: 2000 pairs, zero penetrations
    bool ends_ok = true;
    int worst_violations = 0;
    for (size_t i = 0; i < 2; ++i) {
        ConvexityReport rep = check_local_convexity(*sor, g_sech_deco, i, 2000, 1 + i);
        ends_ok = ends_ok && rep.valid && rep.pass;
        worst_violations = std::max(worst_violations, rep.violations);
    }
    char buf[320];
    std::snprintf(buf, sizeof buf,
                  "flow outcome=%s%s final_length=%.4f (expected StationaryFlower |L-2pi|<=1e-2); "
                  "ends delta=0.05 pairs=2000 violations=%d -> %s",
                  to_string(out.kind),
                  out.kind == FlowOutcome::Kind::EscapedToEnd ? ("(" + out.end_id + ")").c_str() : "",
                  len, worst_violations, ends_ok ? "PASS" : "FAIL");
    // The flow clause contradicts the geometry of rho = sech u (the u=0
    // circle is the longest parallel, a min-max critical point; descent from
    // u=0.5 drifts outward). Reported faithfully as stated.
    record("criterion-2", flow_ok && ends_ok, buf, /*expected_pass=*/false);
}

FlowOutcome g_hyperbola_outcome;
const SurfaceOfRevolution* g_hyp = nullptr;
EndsDecomposition g_hyp_deco;

void criterion_3_hyperbola_escape() {
    auto sor = SurfaceOfRevolution::make("hyperbola");
    g_hyp = sor.get();
    static std::shared_ptr<SurfaceOfRevolution> keep = sor;
    g_hyp_deco.kind = EndsDecomposition::Kind::RevolutionBands;
    g_hyp_deco.delta = 0.05;
    g_hyp_deco.sigmas = {{1.0, -1, "narrow"}, {4.0, +1, "wide"}};

    FlowConfig cfg;
    cfg.L = 5.2;  // escape radius defaults to L
    cfg.delta = 1.0;
    cfg.max_steps = 400000;
    cfg.snapshot_stride = 2000;
    FlowConfig resolved = resolve_config(*sor, cfg, 1);
    Flower f = make_parallel_circle_flower(*sor, 0.8, resolved.N);
    FlowOutcome out = run_flow(*sor, f, cfg, &g_hyp_deco);
    g_hyperbola_outcome = out;

    bool escaped = out.kind == FlowOutcome::Kind::EscapedToEnd && out.end_id == "narrow";
    bool strictly_decreasing = true;
    for (size_t i = 1; i < out.trace.size(); ++i)
        if (!(out.trace[i].length < out.trace[i - 1].length)) strictly_decreasing = false;
    double final_core_distance = std::numeric_limits<double>::infinity();
    for (const auto& p : image_samples(as_net(out.final_flower)))
        final_core_distance = std::min(final_core_distance, core_distance(*sor, g_hyp_deco, p));
    bool far_enough = final_core_distance > cfg.L;

    ConvexityReport wide = check_local_convexity(
        *sor, [&] {
            EndsDecomposition flipped = g_hyp_deco;
            flipped.sigmas[0].side = +1;  // candidate end on the wide side of u=1
            return flipped;
        }(), 0, 2000, 17);
    bool wide_fails = wide.valid && !wide.pass;

    bool ok = escaped && strictly_decreasing && far_enough && wide_fails;
    char buf[320];
    std::snprintf(buf, sizeof buf,
                  "outcome=%s(%s) steps=%ld strictly_decreasing=%d core_distance=%.2f>L=%.2f "
                  "wide_side_convexity=%s",
                  to_string(out.kind), out.end_id.c_str(), out.steps, strictly_decreasing,
                  final_core_distance, cfg.L, wide.pass ? "PASS(unexpected)" : "FAIL(expected)");
    record("criterion-3", ok, buf);
}

void criterion_4_theta_net() {
    auto sphere = make_manifold(json{{"kind", "round_sphere"}, {"radius", 1.0}});
    Net theta = make_theta_net(*sphere, 24);
    NetMeasurement meas = measure(*sphere, theta);
    bool ok = meas.max_residual <= 1e-8 && meas.geodesic_deviation <= 1e-6 &&
              std::abs(meas.total_length - 3 * kPi) <= 1e-6;
    double worst_angle_err = 0.0;
    for (int v = 0; v <= 1; ++v) {
        auto tangents = incident_unit_tangents(*sphere, theta, v);
        if (tangents.size() != 3) ok = false;
        for (size_t i = 0; i < tangents.size(); ++i)
            for (size_t j = i + 1; j < tangents.size(); ++j) {
                double ang = std::acos(std::clamp(dot(tangents[i], tangents[j]), -1.0, 1.0));
                worst_angle_err = std::max(worst_angle_err, std::abs(ang - kTwoPi / 3));
            }
    }
    ok = ok && worst_angle_err <= 1e-6;
    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "residual=%.2e deviation=%.2e |L-3pi|=%.2e angle_err=%.2e "
                  "(tol 1e-8 / 1e-6 / 1e-6 / 1e-6)",
                  meas.max_residual, meas.geodesic_deviation,
                  std::abs(meas.total_length - 3 * kPi), worst_angle_err);
    record("criterion-4", ok, buf);
}

void criterion_5_first_variation() {
    struct Setup {
        ManifoldPtr m;
        Vec2 center;
        double radius, jitter;
        double L, delta;
    };
    std::vector<Setup> setups = {
        {make_manifold("euclidean_plane"), {0, 0}, 1.0, 0.15, 10.0, 1.0},
        {make_manifold(json{{"kind", "round_sphere"}}), {kPi / 2, 2.0}, 0.5, 0.08, 5.0, 1.0},
        {make_manifold(json{{"kind", "flat_torus"}}), {0.5, 0.5}, 0.2, 0.03, 2.0, 0.5},
    };
    const double h = 1e-4;
    int tested = 0, failed = 0;
    double worst_rel = 0.0;
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> uj(-1.0, 1.0);
    auto jittered_polygon = [&](const Setup& su, int n) {
        std::vector<Point> pts;
        for (int k = 0; k <= n + 1; ++k) {
            double ang = kTwoPi * static_cast<double>(k) / (n + 1);
            double r = su.radius + (k >= 1 && k <= n ? su.jitter * uj(rng) : 0.0);
            pts.push_back(su.m->normalize(
                {{su.center.x + r * std::cos(ang), su.center.y + r * std::sin(ang)}, 0}));
        }
        Flower f;
        f.base = pts.front();
        f.petals = {chain_through(*su.m, pts)};
        f.constant = {false};
        return f;
    };
    for (const auto& su : setups) {
        FlowConfig cfg;
        cfg.L = su.L;
        cfg.delta = su.delta;
        FlowConfig rc = resolve_config(*su.m, cfg, 1);
        for (int k = 0; k < 50; ++k) {
            Flower f = jittered_polygon(su, 15);
            FlowerField field = vector_field(*su.m, f, rc);
            if (!field.generic) continue;
            double fv = -field.sum_squares;
            double len0 = length(*su.m, f);
            double len1 = length(*su.m, advect(*su.m, f, field, h));
            double slope = (len1 - len0) / h;
            double err = std::abs(slope - fv);
            double allowed = std::max(0.05 * std::abs(fv), 1e-6);
            worst_rel = std::max(worst_rel, std::abs(fv) > 0 ? err / std::abs(fv) : 0.0);
            ++tested;
            if (err > allowed) ++failed;
        }
    }
    bool ok = failed == 0 && tested >= 150;
    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "flowers=%d mismatches=%d worst_rel=%.3f (dt=1e-4, tol 5%% or 1e-6 abs)", tested,
                  failed, worst_rel);
    record("criterion-5", ok, buf);
}

// polygon helper local to the suite (jittered chart circle, rebalanced)
Flower ff_test_polygon(const void*, std::mt19937_64&, const FlowConfig&);

void criterion_6_cage_bounds() {
    std::vector<ManifoldPtr> ms = {make_manifold("euclidean_plane"),
                                   make_manifold(json{{"kind", "round_sphere"}}),
                                   make_manifold(json{{"kind", "flat_torus"}})};
    std::mt19937_64 rng(777);
    std::uniform_real_distribution<double> u(-0.08, 0.08);
    int cages_tested = 0, edge_violations = 0, image_violations = 0;
    for (const auto& m : ms) {
        Vec2 center = m->kind() == "round_sphere" ? Vec2{kPi / 2, 1.0} : Vec2{0.4, 0.4};
        for (int rep = 0; rep < 34; ++rep) {
            int n_vertices = rep % 2 == 0 ? 3 : 4;
            std::vector<Point> vs;
            for (int k = 0; k < n_vertices; ++k)
                vs.push_back(m->normalize({{center.x + u(rng), center.y + u(rng)}, 0}));
            Cage cage = make_cage(*m, vs);
            double l = 0;
            for (const auto& [key, chain] : cage.edges) l = std::max(l, chain_length(chain));
            Net image0 = as_net(cage);
            ++cages_tested;
            for (double t : {0.0, 0.25, 0.5, 0.75, 1.0}) {
                Cage moved = cage_to_flower(*m, cage, t);
                for (const auto& [key, chain] : moved.edges)
                    if (chain_length(chain) > 3 * l + 1e-6) ++edge_violations;
                double gap =
                    2.0 * std::max(max_sampling_gap(image0), max_sampling_gap(as_net(moved)));
                if (hausdorff_distance(*m, as_net(moved), image0) > gap) ++image_violations;
            }
        }
    }
    bool ok = cages_tested >= 100 && edge_violations == 0 && image_violations == 0;
    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "cages=%d edge_violations=%d image_violations=%d (bounds 3l+1e-6, 2x gap)",
                  cages_tested, edge_violations, image_violations);
    record("criterion-6", ok, buf);
}

CageFlowResult g_torus_result;

void criterion_8_torus_systole() {
    auto torus = make_manifold(json{{"kind", "flat_torus"}, {"lattice", {{1, 0}, {0, 1}}}});
    Cage cage = make_cage(*torus, {pt(0.1, 0.45), pt(0.4, 0.55), pt(0.7, 0.5)});
    FlowConfig cfg;
    cfg.L = 2.0;
    cfg.delta = 0.4;
    cfg.max_steps = 30000;
    g_torus_result = run_cage_flow(*torus, cage, cfg);
    const FlowOutcome& out = g_torus_result.outcome;
    // independent lattice computation: systole in the (1,0) class
    double systole = norm(Vec2{1, 0});
    double len = out.trace.empty() ? 0.0 : out.trace.back().length;
    bool ok = out.kind == FlowOutcome::Kind::StationaryFlower && std::abs(len - systole) <= 1e-3;
    char buf[256];
    std::snprintf(buf, sizeof buf, "outcome=%s |L-%.1f|=%.2e steps=%ld (tol 1e-3)",
                  to_string(out.kind), systole, std::abs(len - systole), out.steps);
    record("criterion-8", ok, buf);
}

DiskFilling g_plane_fill;
DiskFilling g_hyperbola_fill;

void criterion_9_disk_fillings() {
    auto plane = make_manifold("euclidean_plane");
    FlowConfig cfg;
    cfg.L = 0.35;
    cfg.delta = 0.02;
    cfg.dt = 1e-4;
    cfg.max_steps = 20000;
    Flower loop = make_round_loop_flower(*plane, {0, 0}, 0.05, 40);
    g_plane_fill = fill_closed_curve(*plane, loop.petals[0], cfg);
    bool plane_ok = g_plane_fill.complete && g_plane_fill.apex_is_point &&
                    norm(g_plane_fill.apex_point.c) <= 1e-3;
    for (size_t i = 1; i < g_plane_fill.sheet_lengths.size(); ++i)
        if (g_plane_fill.sheet_lengths[i] > g_plane_fill.sheet_lengths[i - 1] + 1e-8)
            plane_ok = false;

    auto sor = SurfaceOfRevolution::make("hyperbola");
    FlowConfig hcfg;
    hcfg.L = 5.2;
    hcfg.delta = 1.0;
    hcfg.escape_radius = 0.6;
    hcfg.max_steps = 60000;
    FlowConfig hres = resolve_config(*sor, hcfg, 1);
    Flower par = make_parallel_circle_flower(*sor, 0.8, hres.N);
    EndsDecomposition deco;
    deco.kind = EndsDecomposition::Kind::RevolutionBands;
    deco.delta = 0.05;
    deco.sigmas = {{1.0, -1, "narrow"}, {4.0, +1, "wide"}};
    g_hyperbola_fill = fill_closed_curve(*sor, par.petals[0], hcfg, &deco);
    bool hyp_ok = g_hyperbola_fill.complete && !g_hyperbola_fill.apex_is_point &&
                  g_hyperbola_fill.apex_end == "narrow";
    size_t first_outside = g_hyperbola_fill.sheets.size();
    for (size_t i = 0; i < g_hyperbola_fill.sheets.size(); ++i) {
        bool outside = true;
        for (const auto& p : g_hyperbola_fill.sheets[i])
            if (core_distance(*sor, deco, p) <= 0.0) outside = false;
        if (outside) {
            first_outside = i;
            break;
        }
    }
    if (first_outside >= g_hyperbola_fill.sheets.size()) hyp_ok = false;
    for (size_t i = first_outside; i < g_hyperbola_fill.sheets.size() && hyp_ok; ++i)
        for (const auto& p : g_hyperbola_fill.sheets[i])
            if (core_distance(*sor, deco, p) <= 0.0) hyp_ok = false;

    bool ok = plane_ok && hyp_ok;
    char buf[320];
    std::snprintf(buf, sizeof buf,
                  "plane: apex_offset=%.2e sheets=%zu monotone=%d; hyperbola: apex=end(%s) "
                  "late_sheets_outside_core=%d",
                  norm(g_plane_fill.apex_point.c), g_plane_fill.sheets.size(), plane_ok,
                  g_hyperbola_fill.apex_end.c_str(), hyp_ok);
    record("criterion-9", ok, buf);
}

void criterion_7_flow_property_audit() {
    bool ok = true;
    std::string note;

    struct Tracked {
        const char* name;
        const Manifold* m;
        const FlowOutcome* out;
        AuditContext ctx;
    };
    auto plane = make_manifold("euclidean_plane");
    AuditContext plane_ctx;
    plane_ctx.balls.push_back({pt(0, 0), 0.0501});
    AuditContext hyp_ctx;
    hyp_ctx.ends = &g_hyp_deco;
    hyp_ctx.started_in_end = true;  // the u=0.8 parallel starts inside the narrow end
    AuditContext sech_ctx;
    sech_ctx.ends = &g_sech_deco;

    std::vector<Tracked> trajectories = {
        {"equator", nullptr, &g_equator_outcome, {}},
        {"sech", g_sech, &g_sech_outcome, sech_ctx},
        {"hyperbola", g_hyp, &g_hyperbola_outcome, hyp_ctx},
        {"torus-cage", nullptr, &g_torus_result.outcome, {}},
        {"plane-fill", plane.get(), &g_plane_fill.outcome, plane_ctx},
        {"hyperbola-fill", g_hyp, &g_hyperbola_fill.outcome, {}},
    };
    auto sphere = make_manifold(json{{"kind", "round_sphere"}});
    auto torus = make_manifold(json{{"kind", "flat_torus"}});
    trajectories[0].m = sphere.get();
    trajectories[3].m = torus.get();

    for (const auto& tr : trajectories) {
        if (tr.out->trace.empty()) {
            ok = false;
            note += std::string(tr.name) + ":missing ";
            continue;
        }
        PropertyReport rep = check_flow_properties(*tr.m, *tr.out, tr.ctx);
        if (!rep.all_pass) {
            ok = false;
            for (const auto& c : rep.checks)
                if (!c.pass) note += std::string(tr.name) + ":" + c.id + " ";
        }
    }

    // absorbing escape, re-run for 100 extra steps
    if (g_hyperbola_outcome.kind == FlowOutcome::Kind::EscapedToEnd) {
        PropertyCheck absorb = verify_absorbing_escape(*g_hyp, g_hyperbola_outcome, g_hyp_deco, 100);
        if (!absorb.pass) {
            ok = false;
            note += "hyperbola:absorbing-escape ";
        }
    } else {
        ok = false;
        note += "hyperbola:no-escape ";
    }

    // an intentionally corrupted trace is flagged at the exact step
    FlowOutcome bad = g_equator_outcome;
    size_t corrupt = bad.trace.size() / 2;
    bad.trace[corrupt].length = bad.trace[corrupt - 1].length + 1e-3;
    PropertyReport rep = check_flow_properties(*sphere, bad);
    bool flagged = false;
    for (const auto& c : rep.checks)
        if (c.id == "length-non-increasing" && !c.pass &&
            c.at_step == static_cast<long>(corrupt))
            flagged = true;
    if (!flagged) {
        ok = false;
        note += "corruption-not-flagged ";
    }

    char buf[320];
    std::snprintf(buf, sizeof buf, "trajectories=6 corrupted_trace_flagged_at=%zu %s", corrupt,
                  note.empty() ? "all properties hold" : note.c_str());
    record("criterion-7", ok, buf);
}

} // namespace

int main(int, char**) {
    std::printf("acceptance suite: stationary geodesic flowers, escapes and fillings\n");
    criterion_1_sphere_closed_geodesic();
    criterion_2_sech_waist();
    criterion_3_hyperbola_escape();
    criterion_4_theta_net();
    criterion_5_first_variation();
    criterion_6_cage_bounds();
    criterion_8_torus_systole();
    criterion_9_disk_fillings();
    criterion_7_flow_property_audit();

    int passed = 0, documented = 0, regressions = 0;
    for (const auto& l : g_lines) {
        if (l.pass) ++passed;
        if (l.pass != l.expected_pass) ++regressions;
        if (!l.pass && !l.expected_pass) ++documented;
    }
    std::printf("summary: %d/%zu criteria pass, %d documented failure(s), %d regression(s)\n",
                passed, g_lines.size(), documented, regressions);
    return regressions == 0 ? 0 : 1;
}
