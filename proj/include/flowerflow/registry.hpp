#pragma once
#include <memory>
#include <string>

#include <json.hpp>

#include "flowerflow/manifolds.hpp"
#include "flowerflow/revolution.hpp"

namespace flowerflow {

using json = nlohmann::ordered_json;

// Manifold registry: string kind plus a JSON parameter block, e.g.
//   {"kind":"surface_of_revolution","profile":"sech_bulge"}
// Floors and chart extents may be overridden per instance.
inline ManifoldPtr make_manifold(const json& spec) {
    if (spec.is_string()) return make_manifold(json{{"kind", spec.get<std::string>()}});
    if (!spec.contains("kind")) throw DomainError("manifold: missing \"kind\"");
    std::string kind = spec.at("kind").get<std::string>();
    if (kind == "euclidean_plane") {
        return std::make_shared<EuclideanPlane>(spec.value("extent", 1e3));
    }
    if (kind == "round_sphere") {
        return std::make_shared<RoundSphere>(spec.value("radius", 1.0));
    }
    if (kind == "flat_torus") {
        Vec2 e1{1, 0}, e2{0, 1};
        if (spec.contains("lattice")) {
            auto lat = spec.at("lattice");
            e1 = {lat.at(0).at(0).get<double>(), lat.at(0).at(1).get<double>()};
            e2 = {lat.at(1).at(0).get<double>(), lat.at(1).at(1).get<double>()};
        }
        return std::make_shared<FlatTorus>(e1, e2);
    }
    if (kind == "surface_of_revolution") {
        std::string profile = spec.value("profile", std::string("sech_bulge"));
        std::optional<double> umin, umax, inj;
        if (spec.contains("u_min")) umin = spec.at("u_min").get<double>();
        if (spec.contains("u_max")) umax = spec.at("u_max").get<double>();
        if (spec.contains("injectivity_floor")) inj = spec.at("injectivity_floor").get<double>();
        return SurfaceOfRevolution::make(profile, umin, umax, inj);
    }
    throw DomainError("manifold: unknown kind \"" + kind + "\"");
}

} // namespace flowerflow
