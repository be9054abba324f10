#pragma once
#include <cmath>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "flowerflow/manifold.hpp"

namespace flowerflow {

// Profile curve (rho(u), z(u)) rotated about the z-axis; chart (u, phi).
// Every family ships analytic first and second derivatives.
class RevolutionProfile {
public:
    virtual ~RevolutionProfile() = default;
    virtual const char* name() const = 0;
    virtual double rho(double u) const = 0;
    virtual double rho_d(double u) const = 0;
    virtual double rho_dd(double u) const = 0;
    virtual double z(double u) const = 0;
    virtual double z_d(double u) const = 0;
    virtual double z_dd(double u) const = 0;

    // Conservative floors for the default working interval, below.
    virtual double default_u_min() const = 0;
    virtual double default_u_max() const = 0;
    virtual double default_injectivity_floor() const = 0;
};

// rho = sech u, z = u. One bulge at u=0 (maximal radius), two tapering ends.
class SechBulgeProfile final : public RevolutionProfile {
public:
    const char* name() const override { return "sech_bulge"; }
    double rho(double u) const override { return 1.0 / std::cosh(u); }
    double rho_d(double u) const override { return -std::tanh(u) / std::cosh(u); }
    double rho_dd(double u) const override {
        double s = 1.0 / std::cosh(u), t = std::tanh(u);
        return s * (t * t - s * s);
    }
    double z(double u) const override { return u; }
    double z_d(double) const override { return 1.0; }
    double z_dd(double) const override { return 0.0; }
    double default_u_min() const override { return -8.0; }
    double default_u_max() const override { return 8.0; }
    double default_injectivity_floor() const override { return 0.25; }
};

// z = 1/x rotated about the z-axis, parametrized by the radius: rho = u,
// z = 1/u, u > 0. Narrow end u -> 0 (z -> inf), wide flaring end u -> inf.
class HyperbolaProfile final : public RevolutionProfile {
public:
    const char* name() const override { return "hyperbola"; }
    double rho(double u) const override { return u; }
    double rho_d(double) const override { return 1.0; }
    double rho_dd(double) const override { return 0.0; }
    double z(double u) const override { return 1.0 / u; }
    double z_d(double u) const override { return -1.0 / (u * u); }
    double z_dd(double u) const override { return 2.0 / (u * u * u); }
    double default_u_min() const override { return 0.1; }
    double default_u_max() const override { return 8.0; }
    double default_injectivity_floor() const override { return 0.4; }
};

// rho = u, z = u^2.
class ParaboloidProfile final : public RevolutionProfile {
public:
    const char* name() const override { return "paraboloid"; }
    double rho(double u) const override { return u; }
    double rho_d(double) const override { return 1.0; }
    double rho_dd(double) const override { return 0.0; }
    double z(double u) const override { return u * u; }
    double z_d(double u) const override { return 2.0 * u; }
    double z_dd(double) const override { return 2.0; }
    double default_u_min() const override { return 0.05; }
    double default_u_max() const override { return 6.0; }
    double default_injectivity_floor() const override { return 0.5; }
};

// rho = cosh u, z = u. A true neck: the waist u=0 is the shortest parallel.
class CatenoidProfile final : public RevolutionProfile {
public:
    const char* name() const override { return "catenoid"; }
    double rho(double u) const override { return std::cosh(u); }
    double rho_d(double u) const override { return std::sinh(u); }
    double rho_dd(double u) const override { return std::cosh(u); }
    double z(double u) const override { return u; }
    double z_d(double) const override { return 1.0; }
    double z_dd(double) const override { return 0.0; }
    double default_u_min() const override { return -4.0; }
    double default_u_max() const override { return 4.0; }
    double default_injectivity_floor() const override { return 1.0; }
};

inline std::shared_ptr<const RevolutionProfile> make_profile(const std::string& name) {
    if (name == "sech_bulge") return std::make_shared<SechBulgeProfile>();
    if (name == "hyperbola") return std::make_shared<HyperbolaProfile>();
    if (name == "paraboloid") return std::make_shared<ParaboloidProfile>();
    if (name == "catenoid") return std::make_shared<CatenoidProfile>();
    throw DomainError("unknown revolution profile: " + name);
}

// ---------------------------------------------------------------------------
// SurfaceOfRevolution — generic chart machinery (RK4 geodesics, shooting BVP,
// transport ODE) over an analytic profile. Induced metric
// diag(rho'^2 + z'^2, rho^2).
// ---------------------------------------------------------------------------

class SurfaceOfRevolution final : public Manifold {
public:
    SurfaceOfRevolution(std::shared_ptr<const RevolutionProfile> profile, double u_min,
                        double u_max, double injectivity_floor)
        : Manifold(std::string("surface_of_revolution:") + profile->name(), injectivity_floor,
                   0.5 * injectivity_floor, revolution_region(u_min, u_max),
                   /*working_scale placeholder*/ 1.0),
          profile_(std::move(profile)),
          u_min_(u_min),
          u_max_(u_max) {
        build_arc_table();
        double rho_max = 0.0;
        for (const auto& row : arc_table_) rho_max = std::max(rho_max, profile_->rho(row.u));
        working_scale_ = arc_table_.back().s + kPi * rho_max;
    }

    static std::shared_ptr<SurfaceOfRevolution> make(const std::string& profile_name,
                                                     std::optional<double> u_min = {},
                                                     std::optional<double> u_max = {},
                                                     std::optional<double> inj = {}) {
        auto prof = make_profile(profile_name);
        return std::make_shared<SurfaceOfRevolution>(
            prof, u_min.value_or(prof->default_u_min()), u_max.value_or(prof->default_u_max()),
            inj.value_or(prof->default_injectivity_floor()));
    }

    const RevolutionProfile& profile() const { return *profile_; }
    double u_min() const { return u_min_; }
    double u_max() const { return u_max_; }

    Mat2 metric_at(const Point& p) const override {
        double u = p.c.x;
        double dr = profile_->rho_d(u), dz = profile_->z_d(u), r = profile_->rho(u);
        return Mat2::diag(dr * dr + dz * dz, r * r);
    }

    std::array<Mat2, 2> metric_partials_at(const Point& p) const override {
        double u = p.c.x;
        double dr = profile_->rho_d(u), ddr = profile_->rho_dd(u);
        double dz = profile_->z_d(u), ddz = profile_->z_dd(u);
        double r = profile_->rho(u);
        return {Mat2::diag(2 * (dr * ddr + dz * ddz), 2 * r * dr), Mat2{}};
    }

    Christoffel christoffels_at(const Point& p) const override {
        double u = p.c.x;
        double dr = profile_->rho_d(u), ddr = profile_->rho_dd(u);
        double dz = profile_->z_d(u), ddz = profile_->z_dd(u);
        double r = profile_->rho(u);
        double E = dr * dr + dz * dz;
        double Eu = 2 * (dr * ddr + dz * ddz);
        double Gu = 2 * r * dr;
        Christoffel c;
        c.G[0][0][0] = Eu / (2 * E);
        c.G[0][1][1] = -Gu / (2 * E);
        double over_g = r > 0 ? Gu / (2 * r * r) : 0.0;
        c.G[1][0][1] = c.G[1][1][0] = over_g;
        return c;
    }

    Vec3 embed(const Point& p) const override {
        double u = p.c.x, ph = p.c.y, r = profile_->rho(u);
        return {r * std::cos(ph), r * std::sin(ph), profile_->z(u)};
    }
    Vec3 embed_tangent(const TangentVector& t) const override {
        double u = t.base.c.x, ph = t.base.c.y;
        double dr = profile_->rho_d(u), dz = profile_->z_d(u), r = profile_->rho(u);
        Vec3 du{dr * std::cos(ph), dr * std::sin(ph), dz};
        Vec3 dph{-r * std::sin(ph), r * std::cos(ph), 0.0};
        return t.v.x * du + t.v.y * dph;
    }

    // Arc length along the profile between two parallels: integral of
    // sqrt(rho'^2 + z'^2) du (precomputed cumulative table, linear in between).
    double profile_arc(double u_from, double u_to) const {
        return std::abs(arc_at(u_to) - arc_at(u_from));
    }

    // r^2 phi' / speed — conserved along geodesics (Clairaut).
    double clairaut_constant(const Point& p, Vec2 v) const {
        double r = profile_->rho(p.c.x);
        double n = metric_norm(p, v);
        return n > 0 ? r * r * v.y / n : 0.0;
    }

protected:
    double distance_upper_bound(const Point& p, const Point& q) const override {
        double dphi = std::abs(wrap_symmetric(q.c.y - p.c.y, kTwoPi));
        return profile_arc(p.c.x, q.c.x) + profile_->rho(q.c.x) * dphi;
    }

private:
    static WorkingRegion revolution_region(double u_min, double u_max) {
        WorkingRegion w{{u_min, 0.0}, {u_max, kTwoPi}};
        w.periodic[1] = true;
        w.period[1] = kTwoPi;
        return w;
    }

    struct ArcRow {
        double u, s;
    };

    void build_arc_table() {
        const int cells = 4096;
        arc_table_.reserve(cells + 1);
        double s = 0.0;
        double h = (u_max_ - u_min_) / cells;
        auto speed = [&](double u) {
            double dr = profile_->rho_d(u), dz = profile_->z_d(u);
            return std::sqrt(dr * dr + dz * dz);
        };
        arc_table_.push_back({u_min_, 0.0});
        for (int k = 0; k < cells; ++k) {
            double a = u_min_ + k * h, b = a + h;
            s += (h / 6.0) * (speed(a) + 4.0 * speed(0.5 * (a + b)) + speed(b));
            arc_table_.push_back({b, s});
        }
    }

    double arc_at(double u) const {
        double lo = arc_table_.front().u, hi = arc_table_.back().u;
        u = std::clamp(u, lo, hi);
        double f = (u - lo) / (hi - lo) * (arc_table_.size() - 1);
        size_t k = std::min(arc_table_.size() - 2, static_cast<size_t>(f));
        double t = f - static_cast<double>(k);
        return arc_table_[k].s + t * (arc_table_[k + 1].s - arc_table_[k].s);
    }

    std::shared_ptr<const RevolutionProfile> profile_;
    double u_min_, u_max_;
    std::vector<ArcRow> arc_table_;
};

} // namespace flowerflow
