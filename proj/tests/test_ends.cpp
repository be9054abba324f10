#include <catch2/catch_amalgamated.hpp>

#include "flowerflow/ends.hpp"
#include "flowerflow/registry.hpp"
#include "flowerflow/scenario.hpp"
#include "helpers.hpp"

using namespace flowerflow;
using ff_test::pt;
using Catch::Approx;

namespace {

EndsDecomposition hyperbola_deco() {
    EndsDecomposition d;
    d.kind = EndsDecomposition::Kind::RevolutionBands;
    d.delta = 0.05;
    d.sigmas = {{1.0, -1, "narrow"}, {4.0, +1, "wide"}};
    return d;
}

EndsDecomposition sech_deco() {
    EndsDecomposition d;
    d.kind = EndsDecomposition::Kind::RevolutionBands;
    d.delta = 0.05;
    d.sigmas = {{1.0, +1, "plus"}, {-1.0, -1, "minus"}};
    return d;
}

} // namespace

TEST_CASE("hyperbola surface: the narrow orientation passes, the wide one fails") {
    auto sor = SurfaceOfRevolution::make("hyperbola");
    EndsDecomposition d = hyperbola_deco();

    ConvexityReport narrow = check_local_convexity(*sor, d, 0, 800, 42);
    CHECK(narrow.valid);
    CHECK(narrow.pass);
    CHECK(narrow.violations == 0);

    // candidate end on the wide side of the same circle
    EndsDecomposition flipped = d;
    flipped.sigmas[0].side = +1;
    ConvexityReport wide = check_local_convexity(*sor, flipped, 0, 800, 42);
    CHECK(wide.valid);
    CHECK_FALSE(wide.pass);
    CHECK(wide.worst_penetration > 0.0);

    // exactly one of the two orientations passes
    CHECK(narrow.pass != wide.pass);
}

TEST_CASE("clairaut oracle: geodesics between parallel points dip below the parallel") {
    // the minimum radius along the connecting geodesic equals the Clairaut
    // constant rho(u0) cos(alpha0), strictly below rho(u0)
    auto sor = SurfaceOfRevolution::make("hyperbola");
    double u0 = 1.0;
    Point p = pt(u0, 0.0), q = pt(u0, 0.04);
    GeodesicSegment seg = sor->minimizing_geodesic(p, q);
    double c = sor->clairaut_constant(p, seg.initial_velocity.v);
    double min_u = u0;
    for (const auto& s : seg.samples) min_u = std::min(min_u, s.c.x);
    CHECK(min_u < u0 - 1e-7);                       // dips toward smaller radius
    CHECK(min_u == Approx(std::abs(c)).margin(1e-5));  // rho(u) = u on this profile
}

TEST_CASE("sech bulge: both declared ends are locally convex") {
    auto sor = SurfaceOfRevolution::make("sech_bulge");
    EndsDecomposition d = sech_deco();
    for (size_t i = 0; i < 2; ++i) {
        ConvexityReport rep = check_local_convexity(*sor, d, i, 800, 7);
        CHECK(rep.valid);
        CHECK(rep.pass);
        CHECK(rep.violations == 0);
    }
}

TEST_CASE("catenoid neck pulls geodesics toward the core: convexity fails") {
    auto sor = SurfaceOfRevolution::make("catenoid");
    EndsDecomposition d;
    d.kind = EndsDecomposition::Kind::RevolutionBands;
    d.delta = 0.05;
    d.sigmas = {{1.0, +1, "plus"}};
    ConvexityReport rep = check_local_convexity(*sor, d, 0, 400, 11);
    CHECK(rep.valid);
    CHECK_FALSE(rep.pass);
}

TEST_CASE("convexity verdict is monotone in delta") {
    auto sor = SurfaceOfRevolution::make("hyperbola");
    EndsDecomposition d = hyperbola_deco();
    ConvexityReport full = check_local_convexity(*sor, d, 0, 500, 123);
    REQUIRE(full.pass);
    EndsDecomposition half = d;
    half.delta = d.delta / 2;
    ConvexityReport halved = check_local_convexity(*sor, half, 0, 500, 123);
    CHECK(halved.pass);
}

TEST_CASE("position classification") {
    auto sor = SurfaceOfRevolution::make("sech_bulge");
    EndsDecomposition d = sech_deco();

    Flower waist = make_parallel_circle_flower(*sor, 0.0, 32);
    CHECK(classify_position(*sor, d, as_net(waist)).kind == PositionClass::Kind::InCoreClosure);

    Flower far = make_parallel_circle_flower(*sor, 3.0, 32);
    PositionClass pc = classify_position(*sor, d, as_net(far));
    CHECK(pc.kind == PositionClass::Kind::InEnd);
    CHECK(d.sigmas[static_cast<size_t>(pc.index)].name == "plus");

    // a petal crossing u = 1
    std::vector<Point> pts = {pt(0.8, 0.0), pt(1.3, 0.15), pt(0.8, 0.3), pt(0.8, 0.0)};
    Flower crossing;
    crossing.base = pts.front();
    crossing.petals = {chain_through(*sor, pts)};
    crossing.constant = {false};
    PositionClass st = classify_position(*sor, d, as_net(crossing));
    CHECK(st.kind == PositionClass::Kind::Straddling);
    CHECK(d.sigmas[static_cast<size_t>(st.index)].name == "plus");
}

TEST_CASE("core distance") {
    auto sor = SurfaceOfRevolution::make("sech_bulge");
    EndsDecomposition d = sech_deco();
    CHECK(core_distance(*sor, d, pt(0.3, 1.0)) == 0.0);

    // independent Simpson quadrature of the profile arc length on [1, 2]
    auto integrand = [](double u) {
        double dr = -std::tanh(u) / std::cosh(u);
        return std::sqrt(1.0 + dr * dr);
    };
    double expect = 0.0;
    int cells = 2000;
    for (int k = 0; k < cells; ++k) {
        double a = 1.0 + k / double(cells), b = a + 1.0 / cells;
        expect += (b - a) / 6.0 * (integrand(a) + 4 * integrand(0.5 * (a + b)) + integrand(b));
    }
    CHECK(core_distance(*sor, d, pt(2.0, 0.5)) == Approx(expect).margin(1e-6));

    // plane with a disk core
    auto plane = make_manifold("euclidean_plane");
    EndsDecomposition disk;
    disk.kind = EndsDecomposition::Kind::PlaneDisk;
    disk.delta = 0.05;
    disk.sigmas = {{1.0, +1, "outside"}};
    CHECK(core_distance(*plane, disk, pt(4.0, 0.0)) == Approx(3.0));
    CHECK(core_distance(*plane, disk, pt(0.2, 0.2)) == 0.0);

    // classification consistent with core distance
    auto far = make_parallel_circle_flower(*sor, 2.5, 24);
    PositionClass pc = classify_position(*sor, d, as_net(far));
    REQUIRE(pc.kind == PositionClass::Kind::InEnd);
    for (const auto& p : image_samples(as_net(far))) CHECK(core_distance(*sor, d, p) > 0.0);
}

TEST_CASE("ends decomposition from JSON") {
    auto sor = SurfaceOfRevolution::make("hyperbola");
    json j = json::parse(R"({"delta":0.05,
        "sigma":[{"u":1.0,"end_side":"-","name":"narrow"},{"u":4.0,"end_side":"+","name":"wide"}]})");
    EndsDecomposition d = ends_from_json(*sor, j);
    CHECK(d.kind == EndsDecomposition::Kind::RevolutionBands);
    CHECK(d.delta == 0.05);
    REQUIRE(d.sigmas.size() == 2);
    CHECK(d.sigmas[0].side == -1);
    CHECK(d.sigmas[1].name == "wide");

    CHECK_THROWS_AS(check_local_convexity(*sor, d, 5, 10, 1), DomainError);
    EndsDecomposition bad = d;
    bad.delta = 0.0;
    CHECK_THROWS_AS(check_local_convexity(*sor, bad, 0, 10, 1), DomainError);
}

TEST_CASE("plane disk boundary is locally convex toward the outside") {
    auto plane = make_manifold("euclidean_plane");
    EndsDecomposition disk;
    disk.kind = EndsDecomposition::Kind::PlaneDisk;
    disk.delta = 0.05;
    disk.sigmas = {{1.0, +1, "outside"}};
    // chords of a circle dip inside the disk: outside orientation fails,
    // which is the expected Euclidean behaviour (no convex ends)
    ConvexityReport rep = check_local_convexity(*plane, disk, 0, 400, 3);
    CHECK(rep.valid);
    CHECK_FALSE(rep.pass);
}
