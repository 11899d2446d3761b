#ifndef EVCAS_BENCH_HPP
#define EVCAS_BENCH_HPP

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "evcas/graph.hpp"
#include "evcas/potentials.hpp"
#include "evcas/query.hpp"
#include "evcas/tfp.hpp"

namespace evcas {

// All benchmark randomness comes from one std::mt19937_64 seeded with the user seed.
// Sources are drawn as rng() % n and targets as rng() % candidates, in query order.
using BenchRng = std::mt19937_64;

// vertices reachable from s when starting with a full battery, s included
std::vector<Vertex> reachable_at_full(const Instance& g, Vertex s);

std::vector<QuerySpec> sample_in_range(const Instance& g, std::uint64_t seed, std::size_t count);

struct RankedQuery {
    QuerySpec q;
    std::uint32_t rank = 0;  // target was the 2^rank-th vertex settled
};

// per source, plain Dijkstra on minimum driving times; b_s = M
std::vector<RankedQuery> sample_dijkstra_rank(const Instance& g, std::uint64_t seed, std::size_t sources);

enum class EngineKind : std::uint8_t { tfp, astar, chasp };

struct EngineSpec {
    EngineKind kind = EngineKind::tfp;
    PotentialKind potential = PotentialKind::none;
    double epsilon = 0.0;

    std::string name() const;
};

// "tfp", "astar", "astar:pi_phi", "chasp:none"; astar and chasp default to pi_d
EngineSpec parse_engine(const std::string& s);
std::vector<EngineSpec> parse_engines(const std::string& list);

class EngineSet {
public:
    // pre may be null when no chasp engine is run
    EngineSet(const Instance& g, const Preprocessed* pre);

    QueryResult run(const EngineSpec& e, const QuerySpec& q) const;

private:
    const Instance& g_;
    SearchGraph sg_;
    BoundGraph bg_;
    std::unique_ptr<ChasEngine> chas_;
};

struct BenchRow {
    std::size_t query = 0;
    std::string engine;
    std::int32_t rank = -1;
    QuerySpec q;
    std::string status;
    double time = kInf;
    double soc = -kInf;
    double ms = 0.0;
    std::uint64_t labels = 0;
    std::uint64_t comparisons = 0;
    bool agree = true;  // same verdict and optimum as the first exact engine
};

struct BenchOptions {
    unsigned threads = 1;
    double agree_tol = 1e-6;
};

std::vector<BenchRow> run_bench(const EngineSet& set, const std::vector<EngineSpec>& engines,
                                const std::vector<RankedQuery>& queries, const BenchOptions& opt = {});

struct BenchSummary {
    std::string engine;
    std::int32_t rank = -1;
    std::size_t queries = 0;
    std::size_t feasible = 0;
    double median_ms = 0.0;
    double mean_ms = 0.0;
    double std_ms = 0.0;
    double max_ms = 0.0;
    double mean_labels = 0.0;
    std::uint64_t max_labels = 0;
    std::size_t disagreements = 0;
};

std::vector<BenchSummary> summarize(const std::vector<BenchRow>& rows);

void write_rows(const std::vector<BenchRow>& rows, std::ostream& os);
void write_summary(const std::vector<BenchSummary>& s, std::ostream& os);

// finite values as %.17g, infinities as the literal inf or -inf
std::string csv_number(double v);

struct OracleRow {
    double step = kInfiniteStep;
    std::size_t queries = 0;
    std::size_t tfp_feasible = 0;
    std::size_t bsp_feasible = 0;
    std::size_t bsp_aborted = 0;
    std::size_t common = 0;  // feasible for tfp and for every step
    double mean_ratio = 0.0;
    double max_ratio = 0.0;
    double tfp_labels = 0.0;  // means over all queries
    double bsp_labels = 0.0;
};

// Sampled bicriteria search per speed step against the continuous optimum, both goal
// directed by the scalar potential. Ratios are taken over queries that every step
// solves, so the rows are comparable.
// bsp_label_limit caps settled plus queued labels per sampled query, 0 = unlimited
std::vector<OracleRow> run_oracle(const Instance& g, const std::vector<QuerySpec>& queries,
                                  const std::vector<double>& steps, std::uint64_t bsp_label_limit = 0);

void write_oracle(const std::vector<OracleRow>& rows, std::ostream& os);

// "inf" maps to kInfiniteStep
std::vector<double> parse_steps(const std::string& list);

}  // namespace evcas

#endif
