#ifndef EVCAS_POTENTIALS_HPP
#define EVCAS_POTENTIALS_HPP

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "evcas/tfp.hpp"

namespace evcas {

// Convex nonincreasing map from state of charge to a driving-time lower bound:
// infinite below the first breakpoint, constant beyond the last.
struct PwlBound {
    std::vector<std::pair<double, double>> pts;  // (b, x), b strictly increasing

    static PwlBound point(double b, double x) { return PwlBound{{{b, x}}}; }
    bool empty() const { return pts.empty(); }
    double eval(double b) const;
    double min_soc() const { return pts.empty() ? kInf : pts.front().first; }
    double min_time() const { return pts.empty() ? kInf : pts.back().second; }
    bool valid(std::string* why = nullptr) const;
    std::string dump() const;
};

struct ReduceParams {
    double dx = 0.0;  // seconds
    double db = 0.0;  // Wh
    double ds = 0.0;  // slope difference

    // 2^(delta - floor(log2 M_kWh)) with delta = 10 for dx and 17 for db, ds = 1/16
    static ReduceParams for_capacity(double capacity_wh);
};

// 2^(15 - floor(log2 M_kWh)) Wh
double default_convert_error(double capacity_wh);

PwlBound convert(const CF& c, double err);
PwlBound link_pwl(const PwlBound& a, const PwlBound& b);
PwlBound lower_hull(std::vector<std::pair<double, double>> pts);
PwlBound merge_pwl(const PwlBound& a, const PwlBound& b, const ReduceParams& r = {});
PwlBound reduce_breakpoints(const PwlBound& f, const ReduceParams& r);

// per search arc: minimum time, minimum consumption, and converted bound
struct BoundArc {
    Vertex tail = 0;
    Vertex head = 0;
    double tau_min = 0.0;
    double c_min = 0.0;
    PwlBound phi;
};

class BoundGraph {
public:
    BoundGraph() = default;
    BoundGraph(const SearchGraph& g, double convert_err);

    std::uint32_t vertex_count() const { return n_; }
    double capacity() const { return capacity_; }
    const std::vector<BoundArc>& arcs() const { return arcs_; }
    std::span<const std::uint32_t> in_arcs(Vertex v) const;

private:
    std::uint32_t n_ = 0;
    double capacity_ = 0.0;
    std::vector<BoundArc> arcs_;
    std::vector<std::uint32_t> in_off_, in_;
};

class NullPotential final : public Potential {
public:
    double at(Vertex, double) const override { return 0.0; }
    double key(Vertex, const CF& c) const override { return c.tau_min; }
    double energy_lb(Vertex) const override { return 0.0; }
};

class PiD final : public Potential {
public:
    PiD(const BoundGraph& g, Vertex t, const std::vector<std::uint8_t>* arc_mask = nullptr);

    // infinite when b is below the energy lower bound of v
    double at(Vertex v, double b) const override;
    double key(Vertex v, const CF& c) const override;
    double energy_lb(Vertex v) const override { return energy_[v]; }
    bool reachable(Vertex v) const { return time_[v] < kInf; }
    std::uint64_t scans = 0;

private:
    std::vector<double> time_, energy_;
};

class PiPhi final : public Potential {
public:
    PiPhi(const BoundGraph& g, Vertex t, const ReduceParams& r, const std::vector<std::uint8_t>* arc_mask = nullptr);

    double at(Vertex v, double b) const override { return phi_[v].eval(b); }
    double key(Vertex v, const CF& c) const override;
    double energy_lb(Vertex v) const override { return phi_[v].min_soc(); }
    const PwlBound& bound(Vertex v) const { return phi_[v]; }
    std::uint64_t scans = 0;

private:
    double capacity_;
    std::vector<PwlBound> phi_;
};

// min over x of x + f(M - c(x))
double bound_key(const PwlBound& f, const CF& c, double capacity);

}  // namespace evcas

#endif
