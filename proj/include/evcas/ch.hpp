#ifndef EVCAS_CH_HPP
#define EVCAS_CH_HPP

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "evcas/graph.hpp"
#include "evcas/tradeoff.hpp"

namespace evcas {

enum class SocKind : std::uint8_t { nonpositive, discharging };

// Two-part representation of the SoC behavior of a path. For nonpositive paths, plus is
// a zero constant at the minimum driving time and minus is the whole function shifted
// to start at 0. In both cases minus.tau_min == 0.
struct SocFunction {
    SocKind kind = SocKind::discharging;
    CF plus;
    CF minus;

    // classifies a single-signed arc; throws on sign-changing input
    static SocFunction from_arc(const CF& c);
    static SocFunction nonpositive(const CF& c);
    static SocFunction discharging(CF plus, CF minus);

    double tau_min() const { return plus.tau_min; }
    // consumption at the slowest admissible driving times
    double min_consumption() const { return plus.value_at_max() + minus.value_at_max(); }
    bool trivial_minus() const { return minus.is_constant() && minus.value_at_min() == 0.0; }
    // unconstrained consumption function of the path
    CF whole() const;
    std::size_t size_coefficient() const { return plus.size() + 4 * minus.size(); }
    bool valid(std::string* why = nullptr) const;
};

// state of charge after the path for driving time x and initial b; nullopt on depletion
std::optional<double> soc_eval(const SocFunction& f, double x, double b, double capacity);

enum class PairKind : std::uint8_t { nonpositive, discharging, inactive };

PairKind pair_kind(const SocFunction& f1, const SocFunction& f2);

// pre: pair_kind(f1, f2) != inactive
SocFunction build_shortcut(const SocFunction& f1, const SocFunction& f2);

// sup over the common domain of a - b; inf if a starts later than b
double max_difference(const CF& a, const CF& b);

// trims cand where some member of others dominates it; others are never modified
std::optional<SocFunction> trim_by(const SocFunction& cand, const std::vector<const SocFunction*>& others);

struct CompareResult {
    std::optional<SocFunction> candidate;
    std::vector<std::optional<SocFunction>> existing;
};

CompareResult compare_shortcuts(const SocFunction& candidate, const std::vector<SocFunction>& existing);

// single-piece upper bound sharing the endpoints of c
CF simplify_upper_bound(const CF& c);

enum class ArcTag : std::uint8_t { upward, downward, core, dropped };

struct ChArc {
    Vertex tail = 0;
    Vertex head = 0;
    SocFunction f;
    ArcId via1 = kNone;
    ArcId via2 = kNone;
    ArcTag tag = ArcTag::core;
    std::uint32_t hops = 1;
    bool trimmed = false;  // this arc or a constituent lost part of its domain
};

struct WitnessTarget {
    Vertex head = 0;
    std::optional<SocFunction> cand;
};

struct WitnessStats {
    std::uint64_t searches = 0;
    std::uint64_t settled = 0;
    std::uint64_t bounds = 0;
};

struct WitnessOptions {
    std::uint32_t settled_limit = 128;
    bool nonpositive = true;  // exact search over nonpositive arcs for nonpositive targets
    WitnessStats* stats = nullptr;
    std::vector<std::pair<CF, CF>>* bound_log = nullptr;  // (linked, simplified) pairs
    const std::vector<CF>* arc_bounds = nullptr;          // simplify_upper_bound of each plus part
};

// Positive-part witness search from u over live arcs, avoiding vertex skip. Discharging
// targets are trimmed where a bound label certifies them.
void witness_search(const std::vector<ChArc>& arcs, const std::vector<std::vector<ArcId>>& out, Vertex u,
                    Vertex skip, std::vector<WitnessTarget>& targets, const WitnessOptions& opt = {});

struct ChParams {
    double stop_avg_degree = 32.0;
    std::uint32_t settled_limit = 128;
    bool nonpositive_witness = true;
    std::vector<std::pair<CF, CF>>* bound_log = nullptr;
};

struct ChStats {
    std::uint32_t contracted = 0;
    std::uint32_t core_vertices = 0;
    std::uint32_t active_core = 0;
    std::uint64_t shortcuts = 0;
    std::uint64_t dropped = 0;
    double core_avg_degree = 0.0;
    WitnessStats witness;
};

struct ChResult {
    double capacity = 0.0;
    std::uint32_t vertex_count = 0;
    std::uint64_t fingerprint = 0;      // of the contracted instance
    std::vector<std::uint32_t> rank;    // kNone for core vertices
    std::vector<ChArc> arcs;            // input arcs first, then shortcuts
    std::size_t input_arcs = 0;
    std::vector<Vertex> core;
    ChStats stats;

    // original arc sequence represented by an augmented arc
    std::vector<ArcId> unpack(ArcId a) const;
};

// pre: no arc of g changes sign
ChResult contract(const Instance& g, const ChParams& p = {});

const char* tag_name(ArcTag t);

void save_ch_arcs(const ChResult& r, std::ostream& os);
void save_order(const ChResult& r, std::ostream& os);

// parses the fields of an 's' record after the tag
ChArc parse_ch_arc(const std::vector<std::string>& tokens, std::size_t pos);

}  // namespace evcas

#endif
