#include "evcas/tfp.hpp"

#include <algorithm>
#include <stdexcept>
#include <tuple>

#include "evcas/heap.hpp"

namespace evcas {

SearchGraph::SearchGraph(std::uint32_t n, double capacity, std::vector<SearchArc> arcs)
    : n_(n), capacity_(capacity), arcs_(std::move(arcs)) {
    out_off_.assign(n_ + 1, 0);
    in_off_.assign(n_ + 1, 0);
    for (const auto& a : arcs_) {
        if (a.tail >= n_ || a.head >= n_) throw std::out_of_range("search arc endpoint out of range");
        ++out_off_[a.tail + 1];
        ++in_off_[a.head + 1];
    }
    for (std::uint32_t v = 0; v < n_; ++v) {
        out_off_[v + 1] += out_off_[v];
        in_off_[v + 1] += in_off_[v];
    }
    out_.resize(arcs_.size());
    in_.resize(arcs_.size());
    std::vector<std::uint32_t> o(out_off_.begin(), out_off_.end() - 1), i(in_off_.begin(), in_off_.end() - 1);
    for (std::uint32_t k = 0; k < arcs_.size(); ++k) {
        out_[o[arcs_[k].tail]++] = k;
        in_[i[arcs_[k].head]++] = k;
    }
}

SearchGraph SearchGraph::from_instance(const Instance& g) {
    std::vector<SearchArc> arcs;
    arcs.reserve(g.arc_count());
    for (ArcId a = 0; a < g.arc_count(); ++a) arcs.push_back({g.arcs[a].tail, g.arcs[a].head, &g.arcs[a].cost, nullptr, a});
    return SearchGraph(g.vertex_count(), g.capacity, std::move(arcs));
}

std::span<const std::uint32_t> SearchGraph::out_arcs(Vertex v) const {
    return {out_.data() + out_off_[v], out_off_[v + 1] - out_off_[v]};
}

std::span<const std::uint32_t> SearchGraph::in_arcs(Vertex v) const {
    return {in_.data() + in_off_[v], in_off_[v + 1] - in_off_[v]};
}

namespace {

struct Label {
    CF cost;
    DeltaRecord d1, d2;
    std::uint32_t parent = kNone;
    std::uint32_t arc = kNone;
    double key = 0.0;
    double tie = 0.0;
};

using QueueKey = std::tuple<double, double, Vertex>;

class Search {
public:
    Search(const SearchGraph& g, const QuerySpec& q, const TfpOptions& opt)
        : g_(g), q_(q), opt_(opt), M_(g.capacity()), slack_(opt.epsilon * g.capacity()),
          settled_(g.vertex_count()), uns_(g.vertex_count()), queue_(g.vertex_count()) {}

    QueryResult run() {
        QueryResult r;
        if (q_.s >= g_.vertex_count() || q_.t >= g_.vertex_count()) throw std::out_of_range("query vertex out of range");
        if (q_.b_s < 0.0 || q_.b_s > M_ + value_tolerance(M_)) throw std::invalid_argument("initial state of charge outside [0, M]");
        if (q_.s == q_.t) {
            r.feasible = true;
            r.time = 0.0;
            r.soc = q_.b_s;
            return r;
        }
        Label start;
        start.cost = CF::constant(0.0, std::max(0.0, M_ - q_.b_s));
        if (opt_.energy_pruning && opt_.potential) {
            auto c = clamp_battery(start.cost, M_, opt_.potential->energy_lb(q_.s));
            if (!c) return finish(r);
        }
        if (!set_key(q_.s, start)) return finish(r);
        push(q_.s, std::move(start));

        while (!queue_.empty()) {
            const Vertex u = queue_.top();
            const std::uint32_t lid = pop_min(u);
            if (opt_.instrument) r.extraction_keys.push_back(labels_[lid].key);
            if (u == q_.t) {
                r.feasible = true;
                r.time = labels_[lid].cost.tau_min;
                r.soc = M_ - labels_[lid].cost.value_at_min();
                retrieve(lid, r.path);
                return finish(r);
            }
            settled_[u].push_back(lid);
            ++r.labels_settled;
            restore(u);
            for (std::uint32_t ai : g_.out_arcs(u)) {
                if (opt_.arc_mask && !(*opt_.arc_mask)[ai]) continue;
                relax(lid, ai);
                if (opt_.label_limit && labels_.size() > opt_.label_limit) {
                    r.aborted = true;
                    return finish(r);
                }
            }
        }
        return finish(r);
    }

private:
    const SearchGraph& g_;
    QuerySpec q_;
    const TfpOptions& opt_;
    double M_;
    double slack_;
    std::vector<Label> labels_;
    std::vector<std::vector<std::uint32_t>> settled_;
    std::vector<std::vector<std::uint32_t>> uns_;
    IndexedHeap<QueueKey, 4> queue_;
    TrimStats trim_stats_;
    std::uint64_t created_ = 0;

    QueryResult& finish(QueryResult& r) {
        r.labels_created = created_;
        r.dominance_checks = trim_stats_.checks;
        if (opt_.instrument) r.settled_per_vertex.resize(settled_.size());
        for (std::size_t v = 0; v < settled_.size(); ++v) {
            const auto k = static_cast<std::uint32_t>(settled_[v].size());
            r.max_settled_per_vertex = std::max(r.max_settled_per_vertex, k);
            if (opt_.instrument) r.settled_per_vertex[v] = k;
        }
        return r;
    }

    bool set_key(Vertex v, Label& l) const {
        l.key = opt_.potential ? opt_.potential->key(v, l.cost) : l.cost.tau_min;
        l.tie = l.cost.value_at_min();
        return l.key < kInf;
    }

    bool label_less(std::uint32_t a, std::uint32_t b) const {
        const Label &x = labels_[a], &y = labels_[b];
        if (x.key != y.key) return x.key < y.key;
        if (x.tie != y.tie) return x.tie < y.tie;
        return a < b;
    }

    // std heap functions build max-heaps, so invert the order
    auto heap_cmp() const {
        return [this](std::uint32_t a, std::uint32_t b) { return label_less(b, a); };
    }

    void update_queue(Vertex v) {
        if (uns_[v].empty()) {
            queue_.erase(v);
            return;
        }
        const Label& l = labels_[uns_[v].front()];
        queue_.push_or_update(v, QueueKey{l.key, l.tie, v});
    }

    void push(Vertex v, Label l) {
        const auto id = static_cast<std::uint32_t>(labels_.size());
        labels_.push_back(std::move(l));
        ++created_;
        uns_[v].push_back(id);
        std::push_heap(uns_[v].begin(), uns_[v].end(), heap_cmp());
        if (uns_[v].front() == id) update_queue(v);
    }

    std::uint32_t pop_min(Vertex v) {
        std::pop_heap(uns_[v].begin(), uns_[v].end(), heap_cmp());
        const std::uint32_t id = uns_[v].back();
        uns_[v].pop_back();
        update_queue(v);
        return id;
    }

    std::optional<CF> trim(const CF& c, Vertex v) {
        if (settled_[v].empty()) return c;
        std::vector<const CF*> set;
        set.reserve(settled_[v].size());
        for (std::uint32_t id : settled_[v]) set.push_back(&labels_[id].cost);
        if (opt_.trim) return opt_.trim(c, set, slack_, &trim_stats_);
        return trim_dominated(c, set, slack_, &trim_stats_);
    }

    // the minimum unsettled label of v must not be dominated by settled labels of v
    void restore(Vertex v) {
        while (!uns_[v].empty()) {
            const std::uint32_t id = uns_[v].front();
            Label& l = labels_[id];
            auto t = trim(l.cost, v);
            if (t && t->tau_min == l.cost.tau_min && t->tau_max == l.cost.tau_max) break;
            std::pop_heap(uns_[v].begin(), uns_[v].end(), heap_cmp());
            uns_[v].pop_back();
            if (!t) continue;
            l.cost = std::move(*t);
            if (!set_key(v, l)) continue;
            uns_[v].push_back(id);
            std::push_heap(uns_[v].begin(), uns_[v].end(), heap_cmp());
        }
        update_queue(v);
    }

    void relax(std::uint32_t lid, std::uint32_t ai) {
        const SearchArc& a = g_.arcs()[ai];
        const double lb = opt_.energy_pruning && opt_.potential ? opt_.potential->energy_lb(a.head) : 0.0;
        if (lb == kInf) return;
        Label nl;
        nl.parent = lid;
        nl.arc = ai;
        LinkResult r1 = link_linear(labels_[lid].cost, *a.first);
        std::optional<CF> c;
        if (a.second) {
            auto mid = clamp_battery(r1.cost, M_, 0.0);
            if (!mid) return;
            LinkResult r2 = link_linear(*mid, *a.second);
            c = clamp_battery(r2.cost, M_, lb);
            nl.d2 = std::move(r2.delta);
        } else {
            c = clamp_battery(r1.cost, M_, lb);
        }
        if (!c) return;
        nl.d1 = std::move(r1.delta);
        auto t = trim(*c, a.head);
        if (!t) return;
        nl.cost = std::move(*t);
        if (!set_key(a.head, nl)) return;
        push(a.head, std::move(nl));
    }

    void retrieve(std::uint32_t lid, std::vector<PathStep>& path) const {
        double x = labels_[lid].cost.tau_min;
        while (labels_[lid].parent != kNone) {
            const Label& l = labels_[lid];
            const SearchArc& a = g_.arcs()[l.arc];
            PathStep step;
            step.arc = a.id;
            if (a.second) {
                const double d2 = l.d2.eval(x);
                const double d1 = l.d1.eval(x - d2);
                step.first_time = d1;
                step.time = d1 + d2;
            } else {
                step.time = l.d1.eval(x);
                step.first_time = step.time;
            }
            x -= step.time;
            path.push_back(step);
            lid = l.parent;
        }
        std::reverse(path.begin(), path.end());
    }
};

}  // namespace

QueryResult tfp_query(const SearchGraph& g, const QuerySpec& q, const TfpOptions& opt) {
    Search s(g, q, opt);
    return s.run();
}

}  // namespace evcas
