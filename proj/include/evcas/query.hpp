#ifndef EVCAS_QUERY_HPP
#define EVCAS_QUERY_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "evcas/ch.hpp"
#include "evcas/graph.hpp"
#include "evcas/potentials.hpp"
#include "evcas/tfp.hpp"

namespace evcas {

// contraction result over the sign-split copy of an instance
struct Preprocessed {
    SplitInfo split;
    ChResult ch;
    std::uint64_t source_fingerprint = 0;
};

Preprocessed preprocess(const Instance& g, const ChParams& p = {});

// writes path and path + ".order"
void save_preprocessed(const Preprocessed& pre, const std::string& path);
Preprocessed load_preprocessed(const std::string& path);

enum class PotentialKind : std::uint8_t { none, pi_d, pi_phi };

PotentialKind parse_potential(const std::string& s);
const char* potential_name(PotentialKind k);

struct ChasOptions {
    PotentialKind potential = PotentialKind::pi_d;
    double epsilon = 0.0;
    bool fastest_path_check = false;
    bool instrument = false;
};

class ChasEngine {
public:
    // throws when pre was not built from g
    ChasEngine(const Preprocessed& pre, const Instance& g);

    // path steps refer to arcs of the original instance
    QueryResult query(const QuerySpec& q, const ChasOptions& opt = {}) const;

    // search arcs relevant for an s-t query
    std::vector<std::uint8_t> mark(Vertex s, Vertex t) const;

    const SearchGraph& search_graph() const { return sg_; }
    const BoundGraph& bound_graph() const { return bg_; }

private:
    const Preprocessed& pre_;
    const Instance& g_;
    std::vector<CF> wholes_;
    std::vector<ArcTag> tags_;
    std::vector<std::uint8_t> core_mask_;
    SearchGraph sg_;
    BoundGraph bg_;

    std::vector<PathStep> unpack(const std::vector<PathStep>& path, double b_s, double* time, double* soc) const;
    bool fastest_path(const QuerySpec& q, const std::vector<std::uint8_t>& mask, QueryResult& r) const;
};

// maps a path over split arcs back to arcs of the input, merging halves
std::vector<PathStep> merge_split_path(const SplitInfo& split, const std::vector<PathStep>& path);

}  // namespace evcas

#endif
