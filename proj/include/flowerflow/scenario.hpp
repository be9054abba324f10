#pragma once
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "flowerflow/ends.hpp"
#include "flowerflow/fill.hpp"
#include "flowerflow/flow.hpp"
#include "flowerflow/nets.hpp"
#include "flowerflow/registry.hpp"
#include "flowerflow/render.hpp"

namespace flowerflow {

struct ParseError : Error {
    using Error::Error;
};

// ---------------------------------------------------------------------------
// JSON <-> nets
// ---------------------------------------------------------------------------

inline json point_to_json(const Point& p) { return json::array({p.c.x, p.c.y}); }

inline Point point_from_json(const Manifold& m, const json& j, const std::string& path) {
    if (!j.is_array() || j.size() != 2)
        throw ParseError(path + ": expected a [c0, c1] chart-coordinate pair");
    Point p{{j.at(0).get<double>(), j.at(1).get<double>()}, 0};
    p = m.normalize(p);
    m.validate_point(p);
    return p;
}

// Broken geodesic through the listed points (consecutive minimizing arcs).
inline Chain chain_through(const Manifold& m, const std::vector<Point>& pts) {
    Chain c;
    for (size_t k = 0; k + 1 < pts.size(); ++k)
        c.push_back(m.minimizing_geodesic(pts[k], pts[k + 1]));
    return c;
}

inline Flower flower_from_json(const Manifold& m, const json& j) {
    Flower f;
    f.base = point_from_json(m, j.at("base"), "base");
    int idx = 0;
    for (const auto& petal : j.at("petals")) {
        std::vector<Point> pts{f.base};
        int pidx = 0;
        for (const auto& pj : petal)
            pts.push_back(point_from_json(
                m, pj, "petals[" + std::to_string(idx) + "][" + std::to_string(pidx++) + "]"));
        pts.push_back(f.base);
        f.petals.push_back(pts.size() > 2 ? chain_through(m, pts) : Chain{});
        f.constant.push_back(f.petals.back().empty());
        ++idx;
    }
    return f;
}

inline Cage cage_from_json(const Manifold& m, const json& j) {
    Cage cage;
    for (size_t k = 0; k < j.at("vertices").size(); ++k)
        cage.vertices.push_back(
            point_from_json(m, j.at("vertices").at(k), "cage.vertices[" + std::to_string(k) + "]"));
    int n = static_cast<int>(cage.vertices.size());
    if (n < 3) throw ParseError("cage.vertices: at least 3 vertices required");
    const json& edges = j.value("edges", json::object());
    for (int a = 0; a < n; ++a)
        for (int b = a + 1; b < n; ++b) {
            std::string key = std::to_string(a) + "-" + std::to_string(b);
            std::vector<Point> pts{cage.vertices[static_cast<size_t>(a)]};
            if (edges.contains(key))
                for (const auto& wj : edges.at(key))
                    pts.push_back(point_from_json(m, wj, "cage.edges[" + key + "]"));
            pts.push_back(cage.vertices[static_cast<size_t>(b)]);
            cage.edges[{a, b}] = chain_through(m, pts);
            cage.constant_flags[{a, b}] =
                chain_length(cage.edges[{a, b}]) <= m.degenerate_segment_length();
        }
    return cage;
}

inline json flower_to_json(const Flower& f) {
    json petals = json::array();
    for (const auto& chain : f.petals) {
        json petal = json::array();
        for (const auto& p : petal_interior_points(chain)) petal.push_back(point_to_json(p));
        petals.push_back(petal);
    }
    return json{{"base", point_to_json(f.base)}, {"petals", petals}};
}

inline json cage_to_json(const Cage& cage) {
    json vertices = json::array();
    for (const auto& v : cage.vertices) vertices.push_back(point_to_json(v));
    json edges = json::object();
    for (const auto& [key, chain] : cage.edges) {
        json pts = json::array();
        for (size_t k = 1; k < chain.size(); ++k) pts.push_back(point_to_json(chain[k].start));
        edges[std::to_string(key.first) + "-" + std::to_string(key.second)] = pts;
    }
    return json{{"cage", json{{"vertices", vertices}, {"edges", edges}}}};
}

// ---------------------------------------------------------------------------
// Generators
// ---------------------------------------------------------------------------

struct Perturbation {
    double amplitude = 0.0;
    std::string pattern = "alternating";  // or "none"
};

// Closed circle of constant chart second coordinate spacing: a parallel
// (u = coord) on a surface of revolution, or a colatitude circle on the
// sphere. Interior points optionally displaced in the first coordinate.
inline Flower make_parallel_circle_flower(const Manifold& m, double coord, int interior_points,
                                          const Perturbation& pert = {}) {
    int n = interior_points;
    if (n < 2) throw DomainError("parallel_circle: need at least 2 interior points");
    std::vector<Point> pts;
    for (int k = 0; k <= n + 1; ++k) {
        double phi = kTwoPi * static_cast<double>(k) / (n + 1);
        double c0 = coord;
        if (k >= 1 && k <= n && pert.amplitude != 0.0 && pert.pattern == "alternating")
            c0 += (k % 2 == 0 ? -1.0 : 1.0) * pert.amplitude;
        pts.push_back(m.normalize({{c0, phi}, 0}));
    }
    Flower f;
    f.base = pts.front();
    f.petals = {chain_through(m, pts)};
    f.constant = {false};
    return f;
}

// Round loop on the plane.
inline Flower make_round_loop_flower(const Manifold& m, Vec2 center, double radius,
                                     int interior_points) {
    int n = interior_points;
    std::vector<Point> pts;
    for (int k = 0; k <= n + 1; ++k) {
        double a = kTwoPi * static_cast<double>(k) / (n + 1);
        pts.push_back(m.normalize({{center.x + radius * std::cos(a),
                                    center.y + radius * std::sin(a)}, 0}));
    }
    Flower f;
    f.base = pts.front();
    f.petals = {chain_through(m, pts)};
    f.constant = {false};
    return f;
}

// Theta graph on the sphere: both poles joined by three meridians at
// longitudes 0, 2pi/3, 4pi/3. Pole representatives carry the meridian
// longitude so edge velocities stay chart-expressible.
inline Net make_theta_net(const Manifold& m, int segments_per_meridian = 24) {
    if (m.kind() != "round_sphere") throw DomainError("theta_net: defined on the round sphere");
    Net net;
    net.vertices = {{{0.0, 0.0}, 0}, {{kPi, 0.0}, 0}};
    for (int e = 0; e < 3; ++e) {
        double phi = kTwoPi * e / 3.0;
        std::vector<Point> pts;
        for (int k = 0; k <= segments_per_meridian; ++k)
            pts.push_back({{kPi * static_cast<double>(k) / segments_per_meridian, phi}, 0});
        net.edges.push_back({0, 1, chain_through(m, pts)});
    }
    return net;
}

// Complete 1-skeleton over the given vertices; optional waypoints pin edges
// to non-minimizing representatives (torus homotopy classes).
inline Cage make_cage(const Manifold& m, const std::vector<Point>& vertices,
                      const std::map<std::pair<int, int>, std::vector<Point>>& waypoints = {}) {
    Cage cage;
    cage.vertices = vertices;
    int n = static_cast<int>(vertices.size());
    for (int a = 0; a < n; ++a)
        for (int b = a + 1; b < n; ++b) {
            std::vector<Point> pts{vertices[static_cast<size_t>(a)]};
            auto it = waypoints.find({a, b});
            if (it != waypoints.end()) pts.insert(pts.end(), it->second.begin(), it->second.end());
            pts.push_back(vertices[static_cast<size_t>(b)]);
            cage.edges[{a, b}] = chain_through(m, pts);
            cage.constant_flags[{a, b}] =
                chain_length(cage.edges[{a, b}]) <= m.degenerate_segment_length();
        }
    return cage;
}

// ---------------------------------------------------------------------------
// Ends decomposition from JSON
// ---------------------------------------------------------------------------

inline EndsDecomposition ends_from_json(const Manifold& m, const json& j) {
    EndsDecomposition deco;
    deco.delta = j.value("delta", 0.05);
    if (m.kind().rfind("surface_of_revolution", 0) == 0)
        deco.kind = EndsDecomposition::Kind::RevolutionBands;
    else if (m.kind() == "euclidean_plane")
        deco.kind = EndsDecomposition::Kind::PlaneDisk;
    else
        throw ParseError("ends: decomposition requires a surface of revolution or the plane");
    for (const auto& sj : j.at("sigma")) {
        SigmaSurface s;
        if (sj.contains("u"))
            s.coordinate = sj.at("u").get<double>();
        else if (sj.contains("radius"))
            s.coordinate = sj.at("radius").get<double>();
        else
            throw ParseError("ends.sigma: needs \"u\" (revolution) or \"radius\" (plane)");
        std::string side = sj.value("end_side", "+");
        s.side = side == "-" ? -1 : +1;
        s.name = sj.value("name", std::string{});
        deco.sigmas.push_back(s);
    }
    return deco;
}

// ---------------------------------------------------------------------------
// Scenario
// ---------------------------------------------------------------------------

struct Scenario {
    std::string name;
    std::uint64_t seed = 0;
    json manifold_spec;
    ManifoldPtr manifold;
    json net_spec;
    std::optional<FlowConfig> flow;
    std::string mode;  // "flower", "cage", or "check"
    std::optional<EndsDecomposition> ends;
    json ends_spec;
    std::vector<std::string> checks;
    json expect;
    std::vector<std::string> outputs;
    int convexity_samples = 2000;
};

inline FlowConfig flow_config_from_json(const json& j) {
    FlowConfig c;
    c.L = j.at("L").get<double>();
    c.delta = j.at("delta").get<double>();
    c.I = j.value("I", 0.0);
    c.N = j.value("N", 0);
    c.dt = j.value("dt", 0.0);
    c.a = j.value("a", 0.0);
    c.tol_stat = j.value("tol_stat", 1e-6);
    c.tol_geo = j.value("tol_geo", 1e-6);
    c.max_steps = j.value("max_steps", 20000L);
    c.escape_radius = j.value("escape_radius", -1.0);
    c.stationary_window = j.value("stationary_window", 50);
    c.contraction_fraction = j.value("contraction_fraction", 0.01);
    c.monotonicity_slack = j.value("monotonicity_slack", 1e-8);
    c.snapshot_stride = j.value("snapshot_stride", 25);
    return c;
}

inline Scenario parse_scenario(const json& j) {
    Scenario s;
    try {
        s.name = j.at("name").get<std::string>();
    } catch (const json::exception&) {
        throw ParseError("name: required string");
    }
    s.seed = j.value("seed", 0ULL);
    if (!j.contains("manifold")) throw ParseError("manifold: required");
    s.manifold_spec = j.at("manifold");
    try {
        s.manifold = make_manifold(s.manifold_spec);
    } catch (const std::exception& e) {
        throw ParseError(std::string("manifold: ") + e.what());
    }
    if (!j.contains("initial_net")) throw ParseError("initial_net: required");
    s.net_spec = j.at("initial_net");
    if (j.contains("flow")) {
        try {
            s.flow = flow_config_from_json(j.at("flow"));
        } catch (const json::exception& e) {
            throw ParseError(std::string("flow: ") + e.what());
        }
        s.mode = j.at("flow").value("mode", std::string{});
    }
    if (j.contains("ends")) {
        s.ends_spec = j.at("ends");
        try {
            s.ends = ends_from_json(*s.manifold, s.ends_spec);
        } catch (const json::exception& e) {
            throw ParseError(std::string("ends: ") + e.what());
        }
    }
    for (const auto& c : j.value("checks", json::array())) s.checks.push_back(c.get<std::string>());
    s.expect = j.value("expect", json::object());
    for (const auto& o : j.value("outputs", json::array({"summary"})))
        s.outputs.push_back(o.get<std::string>());
    s.convexity_samples = j.value("convexity_samples", 2000);
    if (s.mode.empty()) {
        bool is_cage = s.net_spec.contains("cage") ||
                       s.net_spec.value("generator", std::string{}) == "triangle_cage";
        s.mode = !s.flow ? "check" : (is_cage ? "cage" : "flower");
    }
    return s;
}

// Built nets for one scenario; exactly one of flower/cage/net is active.
struct BuiltNet {
    std::optional<Flower> flower;
    std::optional<Cage> cage;
    std::optional<Net> net;  // generic nets (theta graph), check-only

    Net view() const {
        if (flower) return as_net(*flower);
        if (cage) return as_net(*cage);
        return *net;
    }
};

inline BuiltNet build_net(const Manifold& m, const json& j, int n_interior) {
    BuiltNet out;
    if (j.contains("generator")) {
        std::string g = j.at("generator").get<std::string>();
        if (g == "parallel_circle") {
            double coord;
            if (j.contains("u"))
                coord = j.at("u").get<double>();
            else if (j.contains("colatitude"))
                coord = j.at("colatitude").get<double>();
            else
                throw ParseError("initial_net: parallel_circle needs \"u\" or \"colatitude\"");
            Perturbation pert;
            if (j.contains("perturbation")) {
                pert.amplitude = j.at("perturbation").value("amplitude", 0.0);
                pert.pattern = j.at("perturbation").value("pattern", "alternating");
            }
            out.flower = make_parallel_circle_flower(m, coord, j.value("points", n_interior), pert);
        } else if (g == "round_loop") {
            Vec2 center{0, 0};
            if (j.contains("center"))
                center = {j.at("center").at(0).get<double>(), j.at("center").at(1).get<double>()};
            out.flower = make_round_loop_flower(m, center, j.value("radius", 0.05),
                                                j.value("points", n_interior));
        } else if (g == "theta_net") {
            out.net = make_theta_net(m, j.value("segments", 24));
        } else if (g == "triangle_cage") {
            std::vector<Point> vs;
            for (size_t k = 0; k < j.at("vertices").size(); ++k)
                vs.push_back(point_from_json(m, j.at("vertices").at(k),
                                             "initial_net.vertices[" + std::to_string(k) + "]"));
            out.cage = make_cage(m, vs);
        } else {
            throw ParseError("initial_net: unknown generator \"" + g + "\"");
        }
    } else if (j.contains("cage")) {
        out.cage = cage_from_json(m, j.at("cage"));
    } else if (j.contains("base")) {
        out.flower = flower_from_json(m, j);
    } else {
        throw ParseError("initial_net: expected a generator, a cage, or a flower");
    }
    return out;
}

inline BuiltNet build_initial_net(const Scenario& s) {
    // interior point count follows the flow discretization when present
    int n_interior = 32;
    if (s.flow) n_interior = resolve_config(*s.manifold, *s.flow, 1).N;
    return build_net(*s.manifold, s.net_spec, n_interior);
}

// ---------------------------------------------------------------------------
// Scenario execution
// ---------------------------------------------------------------------------

struct ScenarioResult {
    std::string name;
    int exit_code = 0;  // 0 pass, 1 check failure, 2 parse, 3 numerical
    std::string status = "pass";
    json summary;
    std::optional<FlowOutcome> outcome;
};

namespace detail {

inline json measurement_to_json(const NetMeasurement& meas) {
    json residuals = json::array();
    for (const auto& r : meas.balancing_residuals)
        residuals.push_back(json{{"at", r.at.label()}, {"norm", r.norm}});
    return json{{"total_length", meas.total_length},
                {"max_residual", meas.max_residual},
                {"geodesic_deviation", meas.geodesic_deviation},
                {"per_edge_lengths", meas.per_edge_lengths},
                {"residuals", residuals}};
}

inline json outcome_to_json(const FlowOutcome& out) {
    json o{{"kind", to_string(out.kind)}};
    if (out.kind == FlowOutcome::Kind::ContractedToPoint) o["point"] = point_to_json(out.point);
    if (out.kind == FlowOutcome::Kind::EscapedToEnd) o["end"] = out.end_id;
    return o;
}

inline json config_to_json(const FlowConfig& c) {
    return json{{"L", c.L},        {"delta", c.delta},
                {"I", c.I},        {"N", c.N},
                {"dt", c.dt},      {"a", c.a},
                {"tol_stat", c.tol_stat}, {"tol_geo", c.tol_geo},
                {"max_steps", c.max_steps}, {"escape_radius", c.escape_radius}};
}

inline std::uint64_t effective_seed(std::uint64_t scenario_seed) {
    if (const char* env = std::getenv("FLOWERFLOW_SEED")) {
        try {
            return std::stoull(env);
        } catch (...) {
            // unparsable override ignored
        }
    }
    return scenario_seed;
}

inline void write_text(const std::filesystem::path& p, const std::string& text) {
    std::ofstream f(p);
    if (!f) throw Error("cannot write " + p.string());
    f << text;
}

inline void write_trace_files(const std::filesystem::path& dir, const Manifold& m,
                              const FlowOutcome& out, bool jsonl, bool csv) {
    if (jsonl) {
        std::ofstream f(dir / "trace.jsonl");
        size_t snap = 0;
        for (size_t i = 0; i < out.trace.size(); ++i) {
            json row{{"step", i},
                     {"t", out.trace[i].t},
                     {"length", out.trace[i].length},
                     {"max_residual", out.trace[i].max_residual}};
            while (snap < out.snapshots.size() &&
                   out.snapshots[snap].step < static_cast<long>(i))
                ++snap;
            if (snap < out.snapshots.size() &&
                out.snapshots[snap].step == static_cast<long>(i)) {
                json pts = json::array();
                for (const auto& p : image_samples(as_net(out.snapshots[snap].flower)))
                    pts.push_back(point_to_json(p));
                row["points"] = pts;
            }
            f << row.dump() << "\n";
        }
    }
    if (csv) {
        std::ofstream f(dir / "trace.csv");
        f << "step,t,length,max_residual\n";
        for (size_t i = 0; i < out.trace.size(); ++i)
            f << i << "," << out.trace[i].t << "," << out.trace[i].length << ","
              << out.trace[i].max_residual << "\n";
    }
    (void)m;
}

inline void write_snapshot_svg(const std::filesystem::path& path, const Manifold& m,
                               const FlowOutcome& out) {
    std::vector<std::vector<Vec2>> lines;
    for (const auto& snap : out.snapshots) {
        std::vector<Vec2> line;
        for (const auto& chain : snap.flower.petals)
            for (const auto& seg : chain)
                for (const auto& p : seg.samples) line.push_back(render_project(m, p));
        if (!line.empty()) lines.push_back(std::move(line));
    }
    write_svg(path.string(), lines);
}

} // namespace detail

// Runs one scenario: builds the net, flows it when requested, evaluates the
// requested checks, writes the declared outputs under out_dir/<name>/.
// Deterministic for a fixed seed and config.
inline ScenarioResult run_scenario(const json& sj, const std::filesystem::path& out_dir) {
    Scenario s = parse_scenario(sj);
    ScenarioResult res;
    res.name = s.name;
    const Manifold& m = *s.manifold;
    std::uint64_t seed = detail::effective_seed(s.seed);

    json summary{{"name", s.name}, {"seed", seed}, {"manifold", s.manifold_spec},
                 {"mode", s.mode}};
    json checks_json = json::object();
    std::vector<std::string> failures;

    std::filesystem::path dir = out_dir / s.name;
    std::filesystem::create_directories(dir);

    try {
        BuiltNet net = build_initial_net(s);
        summary["initial_length"] = length(m, net.view());

        std::optional<FlowOutcome> outcome;
        std::optional<CageFlowResult> cage_result;
        const EndsDecomposition* deco = s.ends ? &*s.ends : nullptr;

        if (s.flow && s.mode != "check") {
            if (s.mode == "cage") {
                if (!net.cage) throw ParseError("flow.mode=cage requires a cage net");
                cage_result = run_cage_flow(m, *net.cage, *s.flow, deco);
                outcome = cage_result->outcome;
                summary["retraction"] = json{{"cage_length", cage_result->cage_length},
                                             {"flower_length", cage_result->flower_length},
                                             {"max_edge_growth", cage_result->max_edge_growth}};
            } else {
                if (!net.flower) throw ParseError("flow.mode=flower requires a flower net");
                outcome = run_flow(m, *net.flower, *s.flow, deco);
            }
            summary["outcome"] = detail::outcome_to_json(*outcome);
            summary["final_length"] = outcome->trace.empty() ? 0.0 : outcome->trace.back().length;
            summary["steps"] = outcome->steps;
            summary["max_residual"] = outcome->measurement.max_residual;
            summary["geodesic_deviation"] = outcome->measurement.geodesic_deviation;
            summary["config"] = detail::config_to_json(outcome->config);
        } else {
            NetMeasurement meas = measure(m, net.view());
            summary["measurement"] = detail::measurement_to_json(meas);
        }

        // --- checks ------------------------------------------------------
        for (const std::string& check : s.checks) {
            if (check == "flow_properties") {
                if (!outcome) throw ParseError("checks: flow_properties requires a flow");
                AuditContext ctx;
                ctx.ends = deco;
                PropertyReport rep = check_flow_properties(m, *outcome, ctx);
                if (outcome->kind == FlowOutcome::Kind::EscapedToEnd && deco) {
                    rep.add(verify_absorbing_escape(m, *outcome, *deco));
                }
                json rj = json::array();
                for (const auto& c : rep.checks)
                    rj.push_back(json{{"id", c.id},
                                      {"pass", c.pass},
                                      {"at_step", c.at_step},
                                      {"note", c.note}});
                checks_json["flow_properties"] = rj;
                if (!rep.all_pass) failures.push_back("flow_properties");
            } else if (check == "ends_convexity") {
                if (!s.ends) throw ParseError("checks: ends_convexity requires an ends block");
                json rj = json::array();
                bool ok = true;
                for (size_t i = 0; i < s.ends->sigmas.size(); ++i) {
                    ConvexityReport rep =
                        check_local_convexity(m, *s.ends, i, s.convexity_samples, seed + i);
                    std::string expect = "PASS";
                    if (s.ends_spec.contains("sigma") && s.ends_spec.at("sigma").size() > i)
                        expect = s.ends_spec.at("sigma").at(i).value("expect", "PASS");
                    bool matches = rep.pass == (expect == "PASS");
                    ok = ok && rep.valid && matches;
                    rj.push_back(json{{"sigma", s.ends->sigmas[i].name.empty()
                                                    ? std::to_string(i)
                                                    : s.ends->sigmas[i].name},
                                      {"pass", rep.pass},
                                      {"expected", expect},
                                      {"valid", rep.valid},
                                      {"pairs", rep.pairs_tested},
                                      {"bvp_failures", rep.bvp_failures},
                                      {"violations", rep.violations},
                                      {"worst_penetration", rep.worst_penetration}});
                }
                checks_json["ends_convexity"] = rj;
                if (!ok) failures.push_back("ends_convexity");
            } else if (check == "net_certificate") {
                NetMeasurement meas = measure(m, net.view());
                double tol_res = s.expect.value("max_residual", 1e-8);
                double tol_dev = s.expect.value("geodesic_deviation", 1e-6);
                bool ok = meas.max_residual <= tol_res && meas.geodesic_deviation <= tol_dev;
                if (s.expect.contains("total_length")) {
                    double want = s.expect.at("total_length").get<double>();
                    double tol = s.expect.value("length_tol", 1e-6);
                    ok = ok && std::abs(meas.total_length - want) <= tol;
                }
                checks_json["net_certificate"] =
                    json{{"pass", ok}, {"measurement", detail::measurement_to_json(meas)}};
                if (!ok) failures.push_back("net_certificate");
            } else {
                throw ParseError("checks: unknown suite \"" + check + "\"");
            }
        }

        // --- outcome expectation ------------------------------------------
        if (outcome && s.expect.contains("kind")) {
            bool ok = s.expect.at("kind").get<std::string>() == to_string(outcome->kind);
            if (ok && s.expect.contains("end"))
                ok = outcome->end_id == s.expect.at("end").get<std::string>();
            if (ok && s.expect.contains("final_length")) {
                double want = s.expect.at("final_length").get<double>();
                double tol = s.expect.value("length_tol", 1e-6);
                ok = std::abs(outcome->trace.back().length - want) <= tol;
            }
            if (ok && s.expect.contains("max_residual"))
                ok = outcome->measurement.max_residual <= s.expect.at("max_residual").get<double>();
            checks_json["expect"] = json{{"pass", ok}};
            if (!ok) failures.push_back("expect");
        }

        summary["checks"] = checks_json;
        summary["status"] = failures.empty() ? "pass" : "fail";
        if (!failures.empty()) summary["failed_checks"] = failures;

        // --- outputs -------------------------------------------------------
        auto wants = [&](const std::string& o) {
            return std::find(s.outputs.begin(), s.outputs.end(), o) != s.outputs.end();
        };
        if (outcome) {
            detail::write_trace_files(dir, m, *outcome, wants("json_trace"), wants("csv_trace"));
            if (wants("svg")) detail::write_snapshot_svg(dir / "snapshots.svg", m, *outcome);
        }
        detail::write_text(dir / "summary.json", summary.dump(2) + "\n");

        res.outcome = std::move(outcome);
        res.summary = std::move(summary);
        res.exit_code = failures.empty() ? 0 : 1;
        res.status = failures.empty() ? "pass" : "fail(" + failures.front() + ")";
        return res;
    } catch (const ParseError&) {
        throw;
    } catch (const Error& e) {
        summary["status"] = "error";
        summary["error"] = e.what();
        summary["checks"] = checks_json;
        detail::write_text(dir / "summary.json", summary.dump(2) + "\n");
        res.summary = std::move(summary);
        res.exit_code = 3;
        res.status = std::string("error(") + e.what() + ")";
        return res;
    }
}

inline ScenarioResult run_scenario_file(const std::filesystem::path& file,
                                        const std::filesystem::path& out_dir) {
    std::ifstream f(file);
    if (!f) throw ParseError("cannot open scenario file " + file.string());
    json sj;
    try {
        sj = json::parse(f);
    } catch (const json::exception& e) {
        throw ParseError("scenario " + file.string() + ": " + e.what());
    }
    return run_scenario(sj, out_dir);
}

// ---------------------------------------------------------------------------
// Batch runner
// ---------------------------------------------------------------------------

struct BatchRow {
    std::string file;
    std::string name;
    std::string status;
    double final_length = 0.0;
    int exit_code = 0;
    long wall_ms = 0;
};

struct BatchReport {
    std::vector<BatchRow> rows;
    int exit_code = 0;
};

// Runs every scenario file in the directory, up to `jobs` concurrently.
// Individual failures are recorded and the batch continues; per-scenario
// outputs are independent of the parallelism.
inline BatchReport run_batch(const std::filesystem::path& dir,
                             const std::filesystem::path& out_dir, int jobs) {
    std::vector<std::filesystem::path> files;
    if (std::filesystem::exists(dir))
        for (const auto& e : std::filesystem::directory_iterator(dir))
            if (e.path().extension() == ".json") files.push_back(e.path());
    std::sort(files.begin(), files.end());

    BatchReport report;
    report.rows.resize(files.size());
    std::atomic<size_t> next{0};
    auto worker = [&]() {
        for (;;) {
            size_t i = next.fetch_add(1);
            if (i >= files.size()) return;
            BatchRow& row = report.rows[i];
            row.file = files[i].filename().string();
            auto t0 = std::chrono::steady_clock::now();
            try {
                ScenarioResult r = run_scenario_file(files[i], out_dir);
                row.name = r.name;
                row.status = r.status;
                row.exit_code = r.exit_code;
                if (r.summary.contains("final_length"))
                    row.final_length = r.summary.at("final_length").get<double>();
            } catch (const ParseError& e) {
                row.status = std::string("fail(parse): ") + e.what();
                row.exit_code = 2;
            } catch (const std::exception& e) {
                row.status = std::string("error: ") + e.what();
                row.exit_code = 3;
            }
            row.wall_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                              std::chrono::steady_clock::now() - t0)
                              .count();
        }
    };
    int n_threads = std::max(1, std::min<int>(jobs, static_cast<int>(files.size())));
    std::vector<std::thread> pool;
    for (int k = 0; k < n_threads; ++k) pool.emplace_back(worker);
    for (auto& th : pool) th.join();

    for (const auto& row : report.rows)
        if (row.exit_code != 0) report.exit_code = 1;
    return report;
}

} // namespace flowerflow
