#pragma once
#include <optional>
#include <string>
#include <vector>

#include "flowerflow/flow.hpp"
#include "flowerflow/nets.hpp"

namespace flowerflow {

// Disk filling of a closed curve built from its flow trajectory: sheets are
// flow snapshots at increasing homotopy parameter, the apex is either the
// collapse point or the end the curve escaped into.
struct DiskFilling {
    std::vector<Point> boundary;              // input curve, sampled
    std::vector<std::vector<Point>> sheets;   // closed polylines, outer to inner
    std::vector<double> sheet_lengths;
    bool complete = false;        // false on budget exhaustion (no filling produced)
    bool apex_is_point = false;
    Point apex_point;
    std::string apex_end;
    FlowOutcome outcome;
};

namespace detail {

inline std::vector<Point> closed_polyline(const Flower& f) {
    std::vector<Point> pts;
    for (const auto& chain : f.petals) {
        for (const auto& seg : chain)
            for (size_t k = 0; k + 1 < seg.samples.size(); ++k) pts.push_back(seg.samples[k]);
    }
    pts.push_back(f.base);
    return pts;
}

} // namespace detail

// Treats the 2-cage as a closed broken geodesic: edge (0,1), edge (1,2), then
// edge (0,2) reversed.
inline Chain closed_chain_from_2cage(const Cage& cage) {
    if (cage.order() != 2) throw DomainError("fill_2cage: a 2-cage is required");
    Chain loop = cage.edges.at({0, 1});
    loop = concat_chains(std::move(loop), cage.edges.at({1, 2}));
    loop = concat_chains(std::move(loop), reverse_chain(cage.edges.at({0, 2})));
    return loop;
}

inline Flower one_petal_flower(const Chain& loop) {
    Flower f;
    if (loop.empty()) throw DomainError("one_petal_flower: empty loop");
    f.base = loop.front().start;  // basepoint = first polyline vertex
    f.petals = {loop};
    f.constant = {chain_length(loop) == 0.0};
    return f;
}

// Runs the flow on the curve and records a sheet whenever the length has
// dropped by 2% since the previous sheet, plus the terminal state.
inline DiskFilling fill_closed_curve(const Manifold& m, const Chain& loop, const FlowConfig& cfg,
                                     const EndsDecomposition* ends = nullptr) {
    Flower f = one_petal_flower(loop);
    DiskFilling fill;
    double last_recorded = std::numeric_limits<double>::infinity();
    FlowObserver observer = [&](long, double, const Flower& state, double len, double) {
        if (len <= 0.98 * last_recorded) {
            fill.sheets.push_back(detail::closed_polyline(state));
            fill.sheet_lengths.push_back(len);
            last_recorded = len;
        }
    };
    // first sheet = boundary
    fill.boundary = detail::closed_polyline(f);
    fill.sheets.push_back(fill.boundary);
    fill.sheet_lengths.push_back(chain_length(loop));
    last_recorded = fill.sheet_lengths.front();

    fill.outcome = run_flow(m, f, cfg, ends, observer);
    // terminal sheet
    fill.sheets.push_back(detail::closed_polyline(fill.outcome.final_flower));
    fill.sheet_lengths.push_back(length(m, fill.outcome.final_flower));

    switch (fill.outcome.kind) {
        case FlowOutcome::Kind::ContractedToPoint:
            fill.complete = true;
            fill.apex_is_point = true;
            fill.apex_point = fill.outcome.point;
            break;
        case FlowOutcome::Kind::StationaryFlower:
            // A stationary limit is not a disk filling; reported honestly.
            fill.complete = false;
            break;
        case FlowOutcome::Kind::EscapedToEnd:
            fill.complete = true;
            fill.apex_is_point = false;
            fill.apex_end = fill.outcome.end_id;
            break;
        case FlowOutcome::Kind::BudgetExhausted:
            fill.complete = false;
            break;
    }
    return fill;
}

inline DiskFilling fill_2cage(const Manifold& m, const Cage& cage2, const FlowConfig& cfg,
                              const EndsDecomposition* ends = nullptr) {
    return fill_closed_curve(m, closed_chain_from_2cage(cage2), cfg, ends);
}

} // namespace flowerflow
