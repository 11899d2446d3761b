#include "evcas/bench.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <mutex>
#include <ostream>
#include <queue>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "evcas/heap.hpp"

namespace evcas {

std::vector<Vertex> reachable_at_full(const Instance& g, Vertex s) {
    const double M = g.capacity;
    std::vector<double> best(g.vertex_count(), -kInf);
    std::priority_queue<std::pair<double, Vertex>> queue;
    best[s] = M;
    queue.emplace(M, s);
    while (!queue.empty()) {
        const auto [b, v] = queue.top();
        queue.pop();
        if (b < best[v]) continue;
        for (ArcId a : g.out_arcs(v)) {
            const Arc& arc = g.arcs[a];
            const double next = soc_step(b, arc.cost.value_at_max(), M);
            if (next > best[arc.head] + value_tolerance(M)) {
                best[arc.head] = next;
                queue.emplace(next, arc.head);
            }
        }
    }
    std::vector<Vertex> out;
    for (Vertex v = 0; v < g.vertex_count(); ++v)
        if (best[v] > -kInf) out.push_back(v);
    return out;
}

std::vector<QuerySpec> sample_in_range(const Instance& g, std::uint64_t seed, std::size_t count) {
    BenchRng rng(seed);
    std::vector<QuerySpec> out;
    const std::uint32_t n = g.vertex_count();
    if (n < 2) return out;
    std::size_t attempts = 0;
    while (out.size() < count) {
        if (++attempts > 100 * count + 1000) throw std::runtime_error("no source reaches another vertex");
        const Vertex s = static_cast<Vertex>(rng() % n);
        std::vector<Vertex> reach = reachable_at_full(g, s);
        std::erase(reach, s);
        if (reach.empty()) continue;
        const Vertex t = reach[rng() % reach.size()];
        out.push_back({s, t, g.capacity});
    }
    return out;
}

std::vector<RankedQuery> sample_dijkstra_rank(const Instance& g, std::uint64_t seed, std::size_t sources) {
    BenchRng rng(seed);
    std::vector<RankedQuery> out;
    const std::uint32_t n = g.vertex_count();
    if (n < 2) return out;
    std::vector<double> dist(n);
    IndexedHeap<double> heap(n);
    for (std::size_t i = 0; i < sources; ++i) {
        const Vertex s = static_cast<Vertex>(rng() % n);
        std::fill(dist.begin(), dist.end(), kInf);
        heap.resize(n);
        dist[s] = 0.0;
        heap.push_or_update(s, 0.0);
        std::uint64_t settled = 0, next = 2;
        std::uint32_t k = 1;
        while (!heap.empty()) {
            const Vertex v = heap.pop();
            if (++settled == next) {
                out.push_back({{s, v, g.capacity}, k});
                next *= 2;
                ++k;
            }
            for (ArcId a : g.out_arcs(v)) {
                const Arc& arc = g.arcs[a];
                const double d = dist[v] + arc.cost.tau_min;
                if (d < dist[arc.head]) {
                    dist[arc.head] = d;
                    heap.push_or_update(arc.head, d);
                }
            }
        }
    }
    return out;
}

std::string EngineSpec::name() const {
    std::string out;
    switch (kind) {
        case EngineKind::tfp: out = "tfp"; break;
        case EngineKind::astar: out = "astar"; break;
        case EngineKind::chasp: out = "chasp"; break;
    }
    if (kind != EngineKind::tfp) out += std::string(":") + potential_name(potential);
    if (epsilon > 0.0) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "@%g", epsilon);
        out += buf;
    }
    return out;
}

EngineSpec parse_engine(const std::string& s) {
    EngineSpec e;
    std::string head = s, pot;
    if (const auto at = head.find('@'); at != std::string::npos) {
        e.epsilon = std::stod(head.substr(at + 1));
        head = head.substr(0, at);
    }
    if (const auto colon = head.find(':'); colon != std::string::npos) {
        pot = head.substr(colon + 1);
        head = head.substr(0, colon);
    }
    if (head == "tfp") {
        e.kind = EngineKind::tfp;
        if (!pot.empty()) throw std::invalid_argument("engine tfp takes no potential");
        return e;
    }
    if (head == "astar") e.kind = EngineKind::astar;
    else if (head == "chasp") e.kind = EngineKind::chasp;
    else throw std::invalid_argument("unknown engine '" + head + "'");
    e.potential = pot.empty() ? PotentialKind::pi_d : parse_potential(pot);
    return e;
}

std::vector<EngineSpec> parse_engines(const std::string& list) {
    std::vector<EngineSpec> out;
    std::stringstream ss(list);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(parse_engine(item));
    if (out.empty()) throw std::invalid_argument("empty engine list");
    return out;
}

EngineSet::EngineSet(const Instance& g, const Preprocessed* pre)
    : g_(g), sg_(SearchGraph::from_instance(g)), bg_(sg_, default_convert_error(g.capacity)) {
    if (pre) chas_ = std::make_unique<ChasEngine>(*pre, g);
}

QueryResult EngineSet::run(const EngineSpec& e, const QuerySpec& q) const {
    if (e.kind == EngineKind::chasp) {
        if (!chas_) throw std::logic_error("chasp needs preprocessing data");
        ChasOptions opt;
        opt.potential = e.potential;
        opt.epsilon = e.epsilon;
        return chas_->query(q, opt);
    }
    TfpOptions opt;
    opt.epsilon = e.epsilon;
    std::unique_ptr<Potential> pot;
    if (e.kind == EngineKind::astar) {
        switch (e.potential) {
            case PotentialKind::none: pot = std::make_unique<NullPotential>(); break;
            case PotentialKind::pi_d: pot = std::make_unique<PiD>(bg_, q.t); break;
            case PotentialKind::pi_phi:
                pot = std::make_unique<PiPhi>(bg_, q.t, ReduceParams::for_capacity(g_.capacity));
                break;
        }
        opt.potential = pot.get();
    }
    return tfp_query(sg_, q, opt);
}

std::vector<BenchRow> run_bench(const EngineSet& set, const std::vector<EngineSpec>& engines,
                                const std::vector<RankedQuery>& queries, const BenchOptions& opt) {
    const std::size_t ne = engines.size();
    std::vector<BenchRow> rows(queries.size() * ne);
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto work = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= queries.size()) return;
            try {
                for (std::size_t k = 0; k < ne; ++k) {
                    BenchRow& row = rows[i * ne + k];
                    row.query = i;
                    row.engine = engines[k].name();
                    row.rank = queries[i].rank == 0 ? -1 : static_cast<std::int32_t>(queries[i].rank);
                    row.q = queries[i].q;
                    const auto t0 = std::chrono::steady_clock::now();
                    const QueryResult r = set.run(engines[k], queries[i].q);
                    const auto t1 = std::chrono::steady_clock::now();
                    row.ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
                    row.status = r.aborted ? "aborted" : r.feasible ? "feasible" : "infeasible";
                    row.time = r.time;
                    row.soc = r.soc;
                    row.labels = r.labels_settled;
                    row.comparisons = r.dominance_checks;
                }
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next = queries.size();
                return;
            }
        }
    };
    const unsigned threads = std::max(1u, opt.threads);
    if (threads == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (unsigned i = 0; i < threads; ++i) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }
    if (failure) std::rethrow_exception(failure);

    std::size_t ref = ne;
    for (std::size_t k = 0; k < ne; ++k)
        if (engines[k].epsilon == 0.0) {
            ref = k;
            break;
        }
    if (ref < ne) {
        for (std::size_t i = 0; i < queries.size(); ++i) {
            const BenchRow& r0 = rows[i * ne + ref];
            for (std::size_t k = 0; k < ne; ++k) {
                BenchRow& row = rows[i * ne + k];
                if (engines[k].epsilon > 0.0) {
                    row.agree = r0.status != "feasible" ||
                                (row.status == "feasible" && row.time >= r0.time - opt.agree_tol);
                    continue;
                }
                row.agree = row.status == r0.status &&
                            (row.status != "feasible" || std::abs(row.time - r0.time) <= opt.agree_tol);
            }
        }
    }
    return rows;
}

std::vector<BenchSummary> summarize(const std::vector<BenchRow>& rows) {
    std::map<std::pair<std::string, std::int32_t>, std::vector<const BenchRow*>> groups;
    std::vector<std::string> order;
    for (const auto& r : rows) {
        if (std::find(order.begin(), order.end(), r.engine) == order.end()) order.push_back(r.engine);
        groups[{r.engine, r.rank}].push_back(&r);
    }
    std::vector<BenchSummary> out;
    for (const auto& engine : order) {
        for (const auto& [key, members] : groups) {
            if (key.first != engine) continue;
            BenchSummary s;
            s.engine = engine;
            s.rank = key.second;
            s.queries = members.size();
            std::vector<double> ms;
            double labels = 0.0;
            for (const BenchRow* r : members) {
                ms.push_back(r->ms);
                labels += static_cast<double>(r->labels);
                s.max_labels = std::max(s.max_labels, r->labels);
                if (r->status == "feasible") ++s.feasible;
                if (!r->agree) ++s.disagreements;
            }
            std::sort(ms.begin(), ms.end());
            const std::size_t m = ms.size();
            s.median_ms = m % 2 ? ms[m / 2] : 0.5 * (ms[m / 2 - 1] + ms[m / 2]);
            double sum = 0.0;
            for (double v : ms) sum += v;
            s.mean_ms = sum / m;
            double var = 0.0;
            for (double v : ms) var += (v - s.mean_ms) * (v - s.mean_ms);
            s.std_ms = std::sqrt(var / m);
            s.max_ms = ms.back();
            s.mean_labels = labels / m;
            out.push_back(s);
        }
    }
    return out;
}

std::string csv_number(double v) {
    if (v == kInf) return "inf";
    if (v == -kInf) return "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_rows(const std::vector<BenchRow>& rows, std::ostream& os) {
    os << "query,engine,rank,source,target,b_s,status,time_s,soc_wh,ms,labels_settled,comparisons,agree\n";
    for (const auto& r : rows)
        os << r.query << ',' << r.engine << ',' << r.rank << ',' << r.q.s << ',' << r.q.t << ','
           << csv_number(r.q.b_s) << ',' << r.status << ',' << csv_number(r.time) << ',' << csv_number(r.soc) << ','
           << csv_number(r.ms) << ',' << r.labels << ',' << r.comparisons << ',' << (r.agree ? 1 : 0) << '\n';
}

void write_summary(const std::vector<BenchSummary>& s, std::ostream& os) {
    os << "engine,rank,queries,feasible,median_ms,mean_ms,std_ms,max_ms,mean_labels,max_labels,disagreements\n";
    for (const auto& r : s)
        os << r.engine << ',' << r.rank << ',' << r.queries << ',' << r.feasible << ',' << csv_number(r.median_ms) << ','
           << csv_number(r.mean_ms) << ',' << csv_number(r.std_ms) << ',' << csv_number(r.max_ms) << ','
           << csv_number(r.mean_labels) << ',' << r.max_labels << ',' << r.disagreements << '\n';
}

std::vector<OracleRow> run_oracle(const Instance& g, const std::vector<QuerySpec>& queries,
                                  const std::vector<double>& steps, std::uint64_t bsp_label_limit) {
    const SearchGraph sg = SearchGraph::from_instance(g);
    const BoundGraph bg(sg, default_convert_error(g.capacity));
    std::vector<QueryResult> tfp;
    double tfp_labels = 0.0;
    for (const auto& q : queries) {
        const PiD pot(bg, q.t);
        TfpOptions opt;
        opt.potential = &pot;
        tfp.push_back(tfp_query(sg, q, opt));
        tfp_labels += static_cast<double>(tfp.back().labels_settled);
    }
    std::vector<std::vector<BspResult>> bsp;
    for (double step : steps) {
        const Instance sampled = sample_multiarcs(g, step);
        const SearchGraph ssg = SearchGraph::from_instance(sampled);
        const BoundGraph sbg(ssg, default_convert_error(g.capacity));
        auto& results = bsp.emplace_back();
        for (const auto& q : queries) {
            const PiD pot(sbg, q.t);
            BspOptions opt;
            opt.potential = &pot;
            opt.label_limit = bsp_label_limit;
            results.push_back(bsp_query(sampled, q, opt));
        }
    }
    std::vector<std::uint8_t> common(queries.size(), 1);
    for (std::size_t i = 0; i < queries.size(); ++i) {
        if (!tfp[i].feasible || tfp[i].time <= 0.0) common[i] = 0;
        for (const auto& results : bsp)
            if (!results[i].feasible) common[i] = 0;
    }
    std::vector<OracleRow> out;
    for (std::size_t k = 0; k < steps.size(); ++k) {
        OracleRow row;
        row.step = steps[k];
        row.queries = queries.size();
        double ratio_sum = 0.0, bsp_labels = 0.0;
        for (std::size_t i = 0; i < queries.size(); ++i) {
            const BspResult& b = bsp[k][i];
            bsp_labels += static_cast<double>(b.labels_settled);
            if (tfp[i].feasible) ++row.tfp_feasible;
            if (b.feasible) ++row.bsp_feasible;
            if (b.aborted) ++row.bsp_aborted;
            if (!common[i]) continue;
            const double ratio = b.time / tfp[i].time;
            ++row.common;
            ratio_sum += ratio;
            row.max_ratio = std::max(row.max_ratio, ratio);
        }
        row.mean_ratio = row.common ? ratio_sum / row.common : 0.0;
        if (!queries.empty()) {
            row.tfp_labels = tfp_labels / queries.size();
            row.bsp_labels = bsp_labels / queries.size();
        }
        out.push_back(row);
    }
    return out;
}

void write_oracle(const std::vector<OracleRow>& rows, std::ostream& os) {
    os << "step_kmh,queries,tfp_feasible,bsp_feasible,bsp_aborted,common,mean_ratio,max_ratio,tfp_labels,bsp_labels\n";
    for (const auto& r : rows)
        os << (r.step == kInfiniteStep ? std::string("inf") : csv_number(r.step)) << ',' << r.queries << ','
           << r.tfp_feasible << ',' << r.bsp_feasible << ',' << r.bsp_aborted << ',' << r.common << ',' << csv_number(r.mean_ratio) << ','
           << csv_number(r.max_ratio) << ',' << csv_number(r.tfp_labels) << ',' << csv_number(r.bsp_labels) << '\n';
}

std::vector<double> parse_steps(const std::string& list) {
    std::vector<double> out;
    std::stringstream ss(list);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        if (item == "inf") {
            out.push_back(kInfiniteStep);
            continue;
        }
        const double v = std::stod(item);
        if (!(v > 0.0) || !std::isfinite(v)) throw std::invalid_argument("speed step must be positive: " + item);
        out.push_back(v);
    }
    return out;
}

}  // namespace evcas
