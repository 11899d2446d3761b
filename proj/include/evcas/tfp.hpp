#ifndef EVCAS_TFP_HPP
#define EVCAS_TFP_HPP

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "evcas/graph.hpp"
#include "evcas/tradeoff.hpp"

namespace evcas {

// An arc as seen by the search. Plain arcs carry one consumption function; discharging
// shortcuts carry a positive part (first) and a shifted negative part (second).
struct SearchArc {
    Vertex tail = 0;
    Vertex head = 0;
    const CF* first = nullptr;
    const CF* second = nullptr;
    ArcId id = 0;
};

class SearchGraph {
public:
    SearchGraph() = default;
    SearchGraph(std::uint32_t n, double capacity, std::vector<SearchArc> arcs);

    static SearchGraph from_instance(const Instance& g);

    std::uint32_t vertex_count() const { return n_; }
    double capacity() const { return capacity_; }
    const std::vector<SearchArc>& arcs() const { return arcs_; }
    std::span<const std::uint32_t> out_arcs(Vertex v) const;
    std::span<const std::uint32_t> in_arcs(Vertex v) const;

private:
    std::uint32_t n_ = 0;
    double capacity_ = 0.0;
    std::vector<SearchArc> arcs_;
    std::vector<std::uint32_t> out_off_, in_off_, out_, in_;
};

class Potential {
public:
    virtual ~Potential() = default;
    // lower bound on the remaining driving time from v with state of charge b
    virtual double at(Vertex v, double b) const = 0;
    // min over x of x + at(v, M - c(x))
    virtual double key(Vertex v, const CF& c) const = 0;
    // lower bound on the energy needed from v to the target
    virtual double energy_lb(Vertex v) const = 0;
};

using TrimFn = std::function<std::optional<CF>(const CF&, const std::vector<const CF*>&, double slack, TrimStats*)>;

struct TfpOptions {
    const Potential* potential = nullptr;
    double epsilon = 0.0;
    bool energy_pruning = true;
    const std::vector<std::uint8_t>* arc_mask = nullptr;  // search arcs with mask 0 are skipped
    TrimFn trim;  // defaults to trim_dominated
    bool instrument = false;
    std::uint64_t label_limit = 0;  // 0 = unlimited
};

struct PathStep {
    ArcId arc = 0;
    double time = 0.0;
    double first_time = 0.0;  // share on the positive part of a two-part arc
};

struct QueryResult {
    bool feasible = false;
    bool aborted = false;
    double time = kInf;
    double soc = -kInf;
    std::uint64_t labels_settled = 0;
    std::uint64_t labels_created = 0;
    std::uint64_t dominance_checks = 0;
    std::uint32_t max_settled_per_vertex = 0;
    std::vector<PathStep> path;
    std::vector<double> extraction_keys;  // filled when instrumented
    std::vector<std::uint32_t> settled_per_vertex;
};

QueryResult tfp_query(const SearchGraph& g, const QuerySpec& q, const TfpOptions& opt = {});

struct BspLabel {
    double tau = 0.0;
    double soc = 0.0;
};

struct BspOptions {
    const Potential* potential = nullptr;
    bool energy_pruning = true;
    bool full_pareto = false;  // keep searching after the first target label
    std::uint64_t label_limit = 0;  // settled plus queued labels; 0 = unlimited
};

struct BspResult {
    bool feasible = false;
    bool aborted = false;
    double time = kInf;
    double soc = -kInf;
    std::uint64_t labels_settled = 0;
    std::vector<BspLabel> target_labels;
};

// bicriteria label setting over an instance with constant arcs only
BspResult bsp_query(const Instance& g, const QuerySpec& q, const BspOptions& opt = {});

}  // namespace evcas

#endif
