#include <algorithm>
#include <iterator>
#include <stdexcept>
#include <tuple>

#include "evcas/tfp.hpp"

namespace evcas {

namespace {

struct Entry {
    double key;
    double neg_soc;
    std::uint64_t seq;
    Vertex v;
    double tau;
    double soc;

    bool operator>(const Entry& o) const {
        return std::tie(key, neg_soc, seq) > std::tie(o.key, o.neg_soc, o.seq);
    }
};

}  // namespace

BspResult bsp_query(const Instance& g, const QuerySpec& q, const BspOptions& opt) {
    for (const auto& a : g.arcs)
        if (!a.cost.is_constant()) throw std::invalid_argument("bsp_query needs an instance with constant arcs");
    if (q.s >= g.vertex_count() || q.t >= g.vertex_count()) throw std::out_of_range("query vertex out of range");
    const double M = g.capacity;
    BspResult r;
    // per vertex, settled labels sorted by time with strictly increasing state of charge
    std::vector<std::vector<BspLabel>> front(g.vertex_count());
    auto dominated = [&](Vertex v, double tau, double soc) {
        const auto& f = front[v];
        const double hi = tau + 1e-12 * std::max(1.0, tau);
        auto it = std::upper_bound(f.begin(), f.end(), hi, [](double x, const BspLabel& l) { return x < l.tau; });
        return it != f.begin() && std::prev(it)->soc >= soc - value_tolerance(soc);
    };
    auto settle = [&](Vertex v, double tau, double soc) {
        auto& f = front[v];
        auto pos = std::lower_bound(f.begin(), f.end(), tau, [](const BspLabel& l, double x) { return l.tau < x; });
        auto end = pos;
        while (end != f.end() && end->soc <= soc) ++end;
        pos = f.erase(pos, end);
        f.insert(pos, {tau, soc});
    };
    std::vector<Entry> heap;
    std::uint64_t seq = 0;
    auto key_of = [&](Vertex v, double tau, double soc) {
        return opt.potential ? tau + opt.potential->at(v, soc) : tau;
    };
    auto lb_of = [&](Vertex v) {
        return opt.energy_pruning && opt.potential ? opt.potential->energy_lb(v) : 0.0;
    };
    auto push = [&](Vertex v, double tau, double soc) {
        if (soc < lb_of(v) - value_tolerance(soc)) return;
        if (dominated(v, tau, soc)) return;
        const double k = key_of(v, tau, soc);
        if (k == kInf) return;
        heap.push_back({k, -soc, seq++, v, tau, soc});
        std::push_heap(heap.begin(), heap.end(), std::greater<>());
    };
    push(q.s, 0.0, q.b_s);
    while (!heap.empty()) {
        if (opt.label_limit && r.labels_settled + heap.size() > opt.label_limit) {
            r.aborted = true;
            return r;
        }
        std::pop_heap(heap.begin(), heap.end(), std::greater<>());
        const Entry e = heap.back();
        heap.pop_back();
        if (dominated(e.v, e.tau, e.soc)) continue;
        settle(e.v, e.tau, e.soc);
        ++r.labels_settled;
        if (e.v == q.t) {
            if (!r.feasible) {
                r.feasible = true;
                r.time = e.tau;
                r.soc = e.soc;
            }
            r.target_labels.push_back({e.tau, e.soc});
            if (!opt.full_pareto) break;
            continue;
        }
        for (ArcId a : g.out_arcs(e.v)) {
            const Arc& arc = g.arcs[a];
            const double b = soc_step(e.soc, arc.cost.value_at_min(), M);
            if (b == -kInf) continue;
            push(arc.head, e.tau + arc.cost.tau_min, b);
        }
    }
    return r;
}

}  // namespace evcas
