#pragma once
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "flowerflow/manifold.hpp"

namespace flowerflow {

// Orthographic screen projection: chart plot for flat charts, a fixed oblique
// view of the embedding for embedded surfaces.
inline Vec2 render_project(const Manifold& m, const Point& p) {
    if (m.kind() == "euclidean_plane" || m.kind() == "flat_torus") {
        Vec3 e = m.embed(p);
        return {e.x, e.y};
    }
    Vec3 e = m.embed(p);
    const double az = 0.6, el = 0.35;
    double x = std::cos(az) * e.x + std::sin(az) * e.y;
    double y = -std::sin(az) * e.x + std::cos(az) * e.y;
    double z = e.z;
    return {x, std::cos(el) * z - std::sin(el) * y};
}

// Polylines rendered oldest->newest with a fading stroke.
inline std::string polylines_svg(const std::vector<std::vector<Vec2>>& lines) {
    double lo_x = 1e300, lo_y = 1e300, hi_x = -1e300, hi_y = -1e300;
    for (const auto& line : lines)
        for (const auto& p : line) {
            lo_x = std::min(lo_x, p.x);
            hi_x = std::max(hi_x, p.x);
            lo_y = std::min(lo_y, p.y);
            hi_y = std::max(hi_y, p.y);
        }
    if (lines.empty() || lo_x > hi_x) {
        lo_x = lo_y = -1;
        hi_x = hi_y = 1;
    }
    double w = std::max(1e-9, hi_x - lo_x), h = std::max(1e-9, hi_y - lo_y);
    double pad = 0.05 * std::max(w, h);
    std::ostringstream out;
    out.precision(8);
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"" << (lo_x - pad) << " "
        << (lo_y - pad) << " " << (w + 2 * pad) << " " << (h + 2 * pad) << "\">\n";
    double stroke = 0.004 * std::max(w, h);
    for (size_t i = 0; i < lines.size(); ++i) {
        double shade = lines.size() > 1 ? double(i) / double(lines.size() - 1) : 1.0;
        int gray = static_cast<int>(200 - 170 * shade);
        out << "  <polyline fill=\"none\" stroke=\"rgb(" << gray << "," << gray << ","
            << (55 + gray) << ")\" stroke-width=\"" << stroke << "\" points=\"";
        for (const auto& p : lines[i]) out << p.x << "," << -p.y << " ";
        out << "\"/>\n";
    }
    out << "</svg>\n";
    return out.str();
}

inline void write_svg(const std::string& path, const std::vector<std::vector<Vec2>>& lines) {
    std::ofstream f(path);
    if (!f) throw Error("write_svg: cannot open " + path);
    f << polylines_svg(lines);
}

} // namespace flowerflow
