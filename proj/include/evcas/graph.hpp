#ifndef EVCAS_GRAPH_HPP
#define EVCAS_GRAPH_HPP

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "evcas/tradeoff.hpp"

namespace evcas {

using Vertex = std::uint32_t;
using ArcId = std::uint32_t;
inline constexpr std::uint32_t kNone = 0xffffffffu;

struct Arc {
    Vertex tail = 0;
    Vertex head = 0;
    CF cost;
    double length = 0.0;  // meters, 0 if unknown
};

class Instance {
public:
    double capacity = 0.0;
    std::vector<Arc> arcs;

    Instance() = default;
    Instance(std::uint32_t n, double cap) : capacity(cap), n_(n) {}

    std::uint32_t vertex_count() const { return n_; }
    std::size_t arc_count() const { return arcs.size(); }
    Vertex add_vertex() { return n_++; }
    ArcId add_arc(Vertex tail, Vertex head, CF cost, double length = 0.0);

    void build_index();
    std::span<const ArcId> out_arcs(Vertex v) const;
    std::span<const ArcId> in_arcs(Vertex v) const;

    std::uint64_t fingerprint() const;

private:
    std::uint32_t n_ = 0;
    std::vector<std::uint32_t> out_off_, in_off_;
    std::vector<ArcId> out_, in_;
};

struct QuerySpec {
    Vertex s = 0;
    Vertex t = 0;
    double b_s = 0.0;
};

struct PhysicalCoeffs {
    double c1 = 0.0;  // Wh per (m/s)^2 for the whole arc
    double c2 = 0.0;  // Wh per unit grade for the whole arc
    double c3 = 0.0;  // Wh for the whole arc
};

// per-meter vehicle constants scaled to an arc of the given length
PhysicalCoeffs default_coeffs(double length);

CF arc_from_physical(double length, double slope, double v_min, double v_max, const PhysicalCoeffs& k);

struct SplitInfo {
    Instance instance;
    std::vector<ArcId> origin;       // split arc -> arc of the input
    std::vector<std::uint8_t> part;  // 0 whole, 1 first half, 2 second half
    std::uint32_t original_vertices = 0;
};

SplitInfo split_sign_changing(const Instance& g);

inline constexpr double kInfiniteStep = 0.0;

// step in km/h; kInfiniteStep keeps only the two endpoint samples
Instance sample_multiarcs(const Instance& g, double step_kmh);

struct GenParams {
    std::uint32_t n_vertices = 1000;
    std::uint64_t seed = 1;
    double capacity_kwh = 16.0;
    double spacing = 400.0;
    double diagonal_share = 0.3;
    double highway_every = 8;
    double residential_share = 0.4;
    double urban_share = 0.3;
    double max_grade = 0.1;
    double relief = 0.4;
};

Instance generate_synthetic(const GenParams& p);

struct InstanceStats {
    double negative_share = 0.0;
    double nonconstant_share = 0.0;
};

InstanceStats instance_stats(const Instance& g);

void save_instance(const Instance& g, std::ostream& os);
Instance load_instance(std::istream& is);
void save_instance(const Instance& g, const std::string& path);
Instance load_instance(const std::string& path);

std::vector<QuerySpec> load_queries(std::istream& is);
void save_queries(const std::vector<QuerySpec>& qs, std::ostream& os);

double soc_step(double b, double consumption, double capacity);

// folds the state of charge along arcs with per-arc driving times; -inf on depletion
double soc_replay(const Instance& g, const std::vector<std::pair<ArcId, double>>& path, double b_s,
                  std::vector<double>* prefix = nullptr);

}  // namespace evcas

#endif
