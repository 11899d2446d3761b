#include <cmath>
#include <random>
#include <stdexcept>

#include "evcas/graph.hpp"

namespace evcas {

namespace {

struct RoadClass {
    double limit_kmh;
    double floor_kmh;
};

constexpr double kPi = 3.14159265358979323846;

struct Relief {
    double amp[4];
    double freq[4];
    double dir[4];
    double phase[4];

    double height(double x, double y) const {
        double h = 0.0;
        for (int k = 0; k < 4; ++k) h += amp[k] * std::sin(freq[k] * (x * std::cos(dir[k]) + y * std::sin(dir[k])) + phase[k]);
        return h;
    }
};

}  // namespace

Instance generate_synthetic(const GenParams& p) {
    if (p.n_vertices < 2) throw std::invalid_argument("generate_synthetic needs at least 2 vertices");
    std::mt19937_64 rng(p.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    const std::uint32_t n = p.n_vertices;
    const std::uint32_t w = static_cast<std::uint32_t>(std::ceil(std::sqrt(static_cast<double>(n))));
    std::vector<double> px(n), py(n);
    for (std::uint32_t v = 0; v < n; ++v) {
        px[v] = (v % w + 0.5 * (unit(rng) - 0.5)) * p.spacing;
        py[v] = (v / w + 0.5 * (unit(rng) - 0.5)) * p.spacing;
    }

    // gradient of the elevation field is bounded by sum(amp * freq) <= max_grade * relief
    Relief relief;
    for (int k = 0; k < 4; ++k) {
        const double wavelength = 2000.0 + 8000.0 * unit(rng);
        relief.freq[k] = 2.0 * kPi / wavelength;
        relief.amp[k] = 0.25 * p.max_grade * p.relief / relief.freq[k];
        relief.dir[k] = 2.0 * kPi * unit(rng);
        relief.phase[k] = 2.0 * kPi * unit(rng);
    }
    std::vector<double> h(n);
    for (std::uint32_t v = 0; v < n; ++v) h[v] = relief.height(px[v], py[v]);

    Instance g(n, p.capacity_kwh * 1000.0);
    const RoadClass residential{30, 30}, urban{50, 50}, highway{130, 80};
    const double rural_limits[3] = {70, 80, 100};
    auto pick_class = [&]() {
        const double r = unit(rng);
        if (r < p.residential_share) return residential;
        if (r < p.residential_share + p.urban_share) return urban;
        return RoadClass{rural_limits[static_cast<int>(unit(rng) * 3) % 3], 60};
    };
    auto add_road = [&](Vertex a, Vertex b, RoadClass rc, double curvature) {
        const double dx = px[b] - px[a], dy = py[b] - py[a];
        const double len = std::sqrt(dx * dx + dy * dy) * curvature;
        const double v_max = rc.limit_kmh / 3.6;
        const double v_min = std::min(rc.floor_kmh, rc.limit_kmh) / 3.6;
        const double s_ab = (h[b] - h[a]) / len;
        g.add_arc(a, b, arc_from_physical(len, s_ab, v_min, v_max, default_coeffs(len)), len);
        g.add_arc(b, a, arc_from_physical(len, -s_ab, v_min, v_max, default_coeffs(len)), len);
    };

    for (Vertex v = 0; v < n; ++v) {
        const std::uint32_t col = v % w;
        if (col + 1 < w && v + 1 < n) add_road(v, v + 1, pick_class(), 1.0 + 0.1 * unit(rng));
        if (v + w < n) add_road(v, v + w, pick_class(), 1.0 + 0.1 * unit(rng));
        if (unit(rng) < p.diagonal_share) {
            if (col + 1 < w && v + w + 1 < n)
                add_road(v, v + w + 1, pick_class(), 1.0 + 0.1 * unit(rng));
            else if (col > 0 && v + w - 1 < n)
                add_road(v, v + w - 1, pick_class(), 1.0 + 0.1 * unit(rng));
        }
    }
    const std::uint32_t hop = std::max<std::uint32_t>(2, static_cast<std::uint32_t>(p.highway_every) / 2);
    const std::uint32_t every = std::max<std::uint32_t>(2, static_cast<std::uint32_t>(p.highway_every));
    const std::uint32_t rows = (n + w - 1) / w;
    for (std::uint32_t r = every / 2; r < rows; r += every)
        for (std::uint32_t c = 0; c + hop < w; c += hop) {
            const Vertex a = r * w + c, b = r * w + c + hop;
            if (b < n) add_road(a, b, highway, 1.02);
        }
    for (std::uint32_t c = every / 2; c < w; c += every)
        for (std::uint32_t r = 0; r + hop < rows; r += hop) {
            const Vertex a = r * w + c, b = (r + hop) * w + c;
            if (b < n) add_road(a, b, highway, 1.02);
        }
    g.build_index();
    return g;
}

}  // namespace evcas
