#include "evcas/ch.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>
#include <tuple>
#include <unordered_map>

#include "evcas/heap.hpp"

namespace evcas {

namespace {

CF zero_at(double t) { return CF::constant(t, 0.0); }

bool same_domain(const CF& a, const CF& b) { return a.tau_min == b.tau_min && a.tau_max == b.tau_max; }

bool same_domain(const SocFunction& a, const SocFunction& b) {
    return same_domain(a.plus, b.plus) && same_domain(a.minus, b.minus);
}

}  // namespace

SocFunction SocFunction::from_arc(const CF& c) {
    const double tol = value_tolerance(0.0);
    if (c.value_at_max() >= -tol) return discharging(c, zero_at(0.0));
    if (c.value_at_min() <= tol) return nonpositive(c);
    throw std::invalid_argument("arc consumption changes sign; split the instance first");
}

SocFunction SocFunction::nonpositive(const CF& c) {
    SocFunction f;
    f.kind = SocKind::nonpositive;
    f.plus = zero_at(c.tau_min);
    f.minus = c.shifted(-c.tau_min, 0.0);
    return f;
}

SocFunction SocFunction::discharging(CF plus, CF minus) {
    SocFunction f;
    f.kind = SocKind::discharging;
    f.plus = std::move(plus);
    f.minus = std::move(minus);
    return f;
}

CF SocFunction::whole() const {
    if (plus.is_constant()) return minus.shifted(plus.tau_min, plus.value_at_min());
    if (minus.is_constant()) return plus.shifted(minus.tau_min, minus.value_at_min());
    return link(plus, minus);
}

bool SocFunction::valid(std::string* why) const {
    auto fail = [&](const std::string& msg) {
        if (why) *why = msg;
        return false;
    };
    std::string inner;
    if (!plus.valid(&inner)) return fail("plus: " + inner);
    if (!minus.valid(&inner)) return fail("minus: " + inner);
    if (minus.tau_min != 0.0) return fail("minus does not start at 0");
    if (minus.value_at_min() > value_tolerance(0.0)) return fail("minus has positive values");
    if (plus.value_at_max() < -value_tolerance(0.0)) return fail("plus has negative values");
    if (kind == SocKind::nonpositive) {
        if (!plus.is_constant() || plus.value_at_min() != 0.0) return fail("nonpositive plus is not a zero constant");
    } else if (min_consumption() < -value_tolerance(plus.value_at_max())) {
        return fail("discharging function ends below zero");
    }
    return true;
}

std::optional<double> soc_eval(const SocFunction& f, double x, double b, double capacity) {
    auto cb = clamp_battery(f.plus, b, 0.0);
    if (!cb) return std::nullopt;
    const double v = link(*cb, f.minus).eval(x);
    if (v == kInf) return std::nullopt;
    return std::min(capacity, b - v);
}

PairKind pair_kind(const SocFunction& f1, const SocFunction& f2) {
    if (f1.kind == SocKind::nonpositive)
        return f2.kind == SocKind::nonpositive ? PairKind::nonpositive : PairKind::inactive;
    if (f2.kind == SocKind::discharging) return PairKind::discharging;
    const double total = f1.min_consumption() + f2.minus.value_at_max();
    return total >= 0.0 ? PairKind::discharging : PairKind::inactive;
}

SocFunction build_shortcut(const SocFunction& f1, const SocFunction& f2) {
    const PairKind k = pair_kind(f1, f2);
    if (k == PairKind::inactive) throw std::invalid_argument("shortcut would be neither discharging nor nonpositive");
    const CF h = link(f1.minus, f2.plus);
    CF hp, hm;
    if (h.value_at_max() >= 0.0) {
        hp = h;
        hm = zero_at(h.tau_max);
    } else if (h.value_at_min() <= 0.0) {
        hp = zero_at(h.tau_min);
        hm = h;
    } else {
        const double z = inverse(h, 0.0).value_or(h.tau_max);
        hp = h.restricted(h.tau_min, z);
        hm = h.restricted(z, h.tau_max);
    }
    CF plus = link(f1.plus, hp);
    CF minus = link(hm, f2.minus).shifted(-hm.tau_min, 0.0);
    minus.tau_min = 0.0;
    minus.pieces.front().dom_start = 0.0;
    SocFunction f;
    f.kind = k == PairKind::nonpositive ? SocKind::nonpositive : SocKind::discharging;
    f.plus = std::move(plus);
    f.minus = std::move(minus);
    return f;
}

double max_difference(const CF& a, const CF& b) {
    if (a.tau_min > b.tau_min) return kInf;
    const double lo = b.tau_min;
    const double hi = std::max(a.tau_max, b.tau_max);
    double m = a.eval(hi) - b.eval(hi);
    if (hi > lo) {
        std::vector<double> pts{lo, hi};
        for (double x : a.breakpoints())
            if (x > lo && x < hi) pts.push_back(x);
        for (double x : b.breakpoints())
            if (x > lo && x < hi) pts.push_back(x);
        std::sort(pts.begin(), pts.end());
        pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
        for (std::size_t k = 0; k + 1 < pts.size(); ++k) {
            const double mid = 0.5 * (pts[k] + pts[k + 1]);
            m = std::max(m, max_piece_difference(a.piece_at(mid), b.piece_at(mid), pts[k], pts[k + 1]));
        }
    }
    return m;
}

std::optional<SocFunction> trim_by(const SocFunction& cand, const std::vector<const SocFunction*>& others) {
    if (cand.kind == SocKind::nonpositive) {
        std::vector<CF> wholes;
        for (const SocFunction* o : others)
            if (o->kind == SocKind::nonpositive) wholes.push_back(o->whole());
        if (wholes.empty()) return cand;
        std::vector<const CF*> set;
        for (const CF& w : wholes) set.push_back(&w);
        const CF c = cand.whole();
        auto t = trim_dominated(c, set);
        if (!t) return std::nullopt;
        if (same_domain(*t, c)) return cand;
        return SocFunction::nonpositive(*t);
    }
    std::vector<CF> lifted;
    for (const SocFunction* o : others) {
        const double eps = std::max(0.0, max_difference(o->minus, cand.minus));
        if (eps == kInf) continue;
        lifted.push_back(o->plus.shifted(0.0, eps));
    }
    if (lifted.empty()) return cand;
    std::vector<const CF*> set;
    for (const CF& l : lifted) set.push_back(&l);
    auto t = trim_dominated(cand.plus, set);
    if (!t) return std::nullopt;
    if (same_domain(*t, cand.plus)) return cand;
    return SocFunction::discharging(std::move(*t), cand.minus);
}

CompareResult compare_shortcuts(const SocFunction& candidate, const std::vector<SocFunction>& existing) {
    CompareResult r;
    std::vector<const SocFunction*> ex;
    for (const auto& e : existing) ex.push_back(&e);
    r.candidate = trim_by(candidate, ex);
    for (const auto& e : existing) {
        if (!r.candidate) {
            r.existing.emplace_back(e);
            continue;
        }
        r.existing.push_back(trim_by(e, {&*r.candidate}));
    }
    return r;
}

CF simplify_upper_bound(const CF& c) {
    if (c.is_constant() || c.size() == 1) return c;
    double beta = kInf;
    for (const auto& p : c.pieces)
        if (p.alpha > 0.0) beta = std::min(beta, p.beta);
    if (beta == kInf) return c;
    const double lo = c.tau_min, hi = c.tau_max;
    const double a = c.value_at_min(), e = c.value_at_max();
    const double dl = (beta - lo) * (beta - lo), dh = (beta - hi) * (beta - hi);
    const double gamma = (e * dh - a * dl) / (dh - dl);
    const double alpha = (a - gamma) * dl;
    return CF::single(alpha, beta, gamma, lo, hi);
}

// ---------------------------------------------------------------- witness search

namespace {

struct WLabel {
    CF c;
    Vertex v = 0;
};

using WKey = std::tuple<double, double, std::uint32_t>;

class LabelQueue {
public:
    void push(const WLabel& l, std::uint32_t id) {
        heap_.emplace_back(l.c.tau_min, l.c.value_at_min(), id);
        std::push_heap(heap_.begin(), heap_.end(), std::greater<>());
    }
    bool empty() const { return heap_.empty(); }
    std::uint32_t pop() {
        std::pop_heap(heap_.begin(), heap_.end(), std::greater<>());
        const auto id = std::get<2>(heap_.back());
        heap_.pop_back();
        return id;
    }

private:
    std::vector<WKey> heap_;
};

class WitnessSearch {
public:
    WitnessSearch(const std::vector<ChArc>& arcs, const std::vector<std::vector<ArcId>>& out, Vertex skip,
                  const WitnessOptions& opt, bool exact)
        : arcs_(arcs), out_(out), skip_(skip), opt_(opt), exact_(exact) {}

    // targets: indices into the caller's list, all of the matching kind
    void run(Vertex u, std::vector<WitnessTarget>& targets, const std::vector<std::size_t>& idx) {
        if (idx.empty()) return;
        if (opt_.stats) ++opt_.stats->searches;
        targets_ = &targets;
        live_ = idx;
        refresh();
        push({CF::constant(0.0, 0.0), u});
        std::uint32_t settled = 0;
        while (!queue_.empty() && !live_.empty()) {
            const std::uint32_t id = queue_.pop();
            WLabel& l = labels_[id];
            if (l.c.tau_min > time_stop_) break;
            auto& s = settled_[l.v];
            if (!s.empty()) {
                std::vector<const CF*> set;
                for (std::uint32_t k : s) set.push_back(&labels_[k].c);
                auto t = trim_dominated(l.c, set);
                if (!t) continue;
                if (!same_domain(*t, l.c)) {
                    l.c = std::move(*t);
                    queue_.push(l, id);
                    continue;
                }
            }
            s.push_back(id);
            if (opt_.stats) ++opt_.stats->settled;
            if (++settled > opt_.settled_limit) break;
            certify(id);
            if (live_.empty()) break;
            relax(id);
        }
    }

private:
    const std::vector<ChArc>& arcs_;
    const std::vector<std::vector<ArcId>>& out_;
    Vertex skip_;
    const WitnessOptions& opt_;
    bool exact_;
    std::vector<WitnessTarget>* targets_ = nullptr;
    std::vector<std::size_t> live_;
    double time_stop_ = 0.0;
    double prune_ = 0.0;
    std::vector<WLabel> labels_;
    std::unordered_map<Vertex, std::vector<std::uint32_t>> settled_;
    LabelQueue queue_;

    void push(WLabel l) {
        const auto id = static_cast<std::uint32_t>(labels_.size());
        labels_.push_back(std::move(l));
        queue_.push(labels_.back(), id);
    }

    void refresh() {
        time_stop_ = -kInf;
        prune_ = -kInf;
        for (std::size_t i : live_) {
            const SocFunction& f = *(*targets_)[i].cand;
            if (exact_) {
                const CF w = f.whole();
                time_stop_ = std::max(time_stop_, w.tau_max);
                prune_ = std::max(prune_, w.value_at_min());
            } else {
                time_stop_ = std::max(time_stop_, f.plus.tau_max);
                prune_ = std::max(prune_, f.plus.value_at_min() + f.minus.value_at_max());
            }
        }
    }

    void certify(std::uint32_t id) {
        const WLabel& l = labels_[id];
        bool changed = false;
        for (std::size_t k = 0; k < live_.size();) {
            auto& tg = (*targets_)[live_[k]];
            if (tg.head != l.v) {
                ++k;
                continue;
            }
            const SocFunction& f = *tg.cand;
            std::optional<SocFunction> nf;
            if (exact_) {
                const CF w = f.whole();
                auto t = trim_dominated(w, {&l.c});
                if (t && same_domain(*t, w))
                    nf = f;
                else if (t)
                    nf = SocFunction::nonpositive(*t);
            } else {
                const CF bound = l.c.shifted(0.0, -f.minus.value_at_max());
                auto t = trim_dominated(f.plus, {&bound});
                if (t && same_domain(*t, f.plus))
                    nf = f;
                else if (t)
                    nf = SocFunction::discharging(std::move(*t), f.minus);
            }
            if (nf && same_domain(*nf, f)) {
                ++k;
                continue;
            }
            changed = true;
            tg.cand = std::move(nf);
            if (!tg.cand) {
                live_.erase(live_.begin() + static_cast<std::ptrdiff_t>(k));
                continue;
            }
            ++k;
        }
        if (changed) refresh();
    }

    void relax(std::uint32_t id) {
        const Vertex v = labels_[id].v;
        for (ArcId ai : out_[v]) {
            const ChArc& a = arcs_[ai];
            if (a.head == skip_) continue;
            const CF& from = labels_[id].c;
            CF next;
            if (exact_) {
                if (a.f.kind != SocKind::nonpositive) continue;
                const CF w = a.f.whole();
                if (from.value_at_max() + w.value_at_max() > prune_ + value_tolerance(prune_)) continue;
                next = link(from, w);
            } else {
                CF local;
                const CF* bound = opt_.arc_bounds ? &(*opt_.arc_bounds)[ai] : nullptr;
                if (!bound) bound = &(local = simplify_upper_bound(a.f.plus));
                if (from.value_at_max() + bound->value_at_max() > prune_ + value_tolerance(prune_)) continue;
                const CF linked = link(from, *bound);
                next = simplify_upper_bound(linked);
                if (opt_.stats && linked.size() > 1) ++opt_.stats->bounds;
                if (opt_.bound_log && linked.size() > 1) opt_.bound_log->emplace_back(linked, next);
            }
            if (next.value_at_max() > prune_ + value_tolerance(prune_)) continue;
            auto it = settled_.find(a.head);
            if (it != settled_.end() && !it->second.empty()) {
                std::vector<const CF*> set;
                for (std::uint32_t k : it->second) set.push_back(&labels_[k].c);
                auto t = trim_dominated(next, set);
                if (!t) continue;
                next = std::move(*t);
            }
            push({std::move(next), a.head});
        }
    }
};

}  // namespace

void witness_search(const std::vector<ChArc>& arcs, const std::vector<std::vector<ArcId>>& out, Vertex u,
                    Vertex skip, std::vector<WitnessTarget>& targets, const WitnessOptions& opt) {
    std::vector<std::size_t> pos, neg;
    for (std::size_t i = 0; i < targets.size(); ++i) {
        if (!targets[i].cand) continue;
        (targets[i].cand->kind == SocKind::discharging ? pos : neg).push_back(i);
    }
    WitnessSearch(arcs, out, skip, opt, false).run(u, targets, pos);
    if (opt.nonpositive) WitnessSearch(arcs, out, skip, opt, true).run(u, targets, neg);
}

// ---------------------------------------------------------------- contraction

namespace {

struct Candidate {
    Vertex tail = 0;
    Vertex head = 0;
    std::optional<SocFunction> f;
    ArcId via1 = kNone;
    ArcId via2 = kNone;
    std::uint32_t hops = 0;
    bool trimmed = false;
};

struct Simulation {
    bool active = false;
    double priority = kInf;
    std::vector<Candidate> cands;
};

class Contractor {
public:
    Contractor(const Instance& g, const ChParams& p)
        : g_(g), p_(p), n_(g.vertex_count()), out_(n_), in_(n_), contracted_(n_, 0), active_(n_, 0),
          rank_(n_, kNone), heap_(n_) {
        wopt_.settled_limit = p.settled_limit;
        wopt_.nonpositive = p.nonpositive_witness;
        wopt_.stats = &stats_.witness;
        wopt_.bound_log = p.bound_log;
        wopt_.arc_bounds = &bounds_;
        arcs_.reserve(g.arc_count());
        for (const Arc& a : g.arcs) {
            ChArc c;
            c.tail = a.tail;
            c.head = a.head;
            c.f = SocFunction::from_arc(a.cost);
            insert(std::move(c));
        }
    }

    ChResult run() {
        if (p_.stop_avg_degree > 0.0) {
            for (Vertex v = 0; v < n_; ++v) {
                Simulation s = simulate(v);
                set_state(v, s);
            }
            std::uint32_t order = 0;
            while (!heap_.empty()) {
                if (active_count_ == 0 || deg_sum_ >= p_.stop_avg_degree * active_count_) break;
                const Vertex v = heap_.top();
                Simulation s = simulate(v);
                unset_state(v);
                set_state(v, s);
                if (!s.active || heap_.top() != v) continue;
                apply(v, s);
                rank_[v] = order++;
            }
        }
        return finish();
    }

private:
    const Instance& g_;
    const ChParams& p_;
    std::uint32_t n_;
    std::vector<ChArc> arcs_;
    std::vector<CF> bounds_;
    std::vector<std::vector<ArcId>> out_, in_;
    std::vector<std::uint8_t> contracted_, active_;
    std::vector<std::uint32_t> rank_;
    IndexedHeap<std::pair<double, Vertex>> heap_;
    double deg_sum_ = 0.0;
    std::uint32_t active_count_ = 0;
    ChStats stats_;
    WitnessOptions wopt_;

    std::size_t degree(Vertex v) const { return out_[v].size() + in_[v].size(); }

    ArcId insert(ChArc a) {
        const auto id = static_cast<ArcId>(arcs_.size());
        out_[a.tail].push_back(id);
        in_[a.head].push_back(id);
        bounds_.push_back(simplify_upper_bound(a.f.plus));
        arcs_.push_back(std::move(a));
        return id;
    }

    static void erase_value(std::vector<ArcId>& v, ArcId a) {
        auto it = std::find(v.begin(), v.end(), a);
        if (it != v.end()) v.erase(it);
    }

    void drop(ArcId a) {
        erase_value(out_[arcs_[a].tail], a);
        erase_value(in_[arcs_[a].head], a);
        arcs_[a].tag = ArcTag::dropped;
        ++stats_.dropped;
    }

    void unset_state(Vertex v) {
        if (active_[v]) {
            deg_sum_ -= static_cast<double>(degree(v));
            --active_count_;
            active_[v] = 0;
        }
    }

    void set_state(Vertex v, const Simulation& s) {
        if (!s.active) {
            heap_.erase(v);
            return;
        }
        active_[v] = 1;
        deg_sum_ += static_cast<double>(degree(v));
        ++active_count_;
        heap_.push_or_update(v, {s.priority, v});
    }

    Simulation simulate(Vertex v) {
        Simulation s;
        std::vector<ArcId> ins, outs;
        for (ArcId a : in_[v])
            if (arcs_[a].tail != v) ins.push_back(a);
        for (ArcId a : out_[v])
            if (arcs_[a].head != v) outs.push_back(a);
        std::sort(ins.begin(), ins.end(), [&](ArcId a, ArcId b) {
            return std::tie(arcs_[a].tail, a) < std::tie(arcs_[b].tail, b);
        });
        std::sort(outs.begin(), outs.end(), [&](ArcId a, ArcId b) {
            return std::tie(arcs_[a].head, a) < std::tie(arcs_[b].head, b);
        });
        for (ArcId a : ins) {
            for (ArcId b : outs) {
                const ChArc &x = arcs_[a], &y = arcs_[b];
                if (x.tail == y.head) continue;
                if (pair_kind(x.f, y.f) == PairKind::inactive) return s;
                Candidate c;
                c.tail = x.tail;
                c.head = y.head;
                c.f = build_shortcut(x.f, y.f);
                c.via1 = a;
                c.via2 = b;
                c.hops = x.hops + y.hops;
                c.trimmed = x.trimmed || y.trimmed;
                s.cands.push_back(std::move(c));
            }
        }
        s.active = true;
        compare_parallel(s.cands);
        witness(v, s.cands);
        double added = 0.0, cq = 0.0, sc = 0.0;
        for (const auto& c : s.cands) {
            if (!c.f) continue;
            added += 1.0;
            cq += c.hops;
            sc += static_cast<double>(c.f->size_coefficient());
        }
        const double ed = added - static_cast<double>(degree(v));
        s.priority = 64.0 * ed + cq + sc;
        return s;
    }

    void compare_parallel(std::vector<Candidate>& cands) {
        for (std::size_t i = 0; i < cands.size(); ++i) {
            Candidate& c = cands[i];
            std::vector<const SocFunction*> others;
            for (ArcId e : out_[c.tail])
                if (arcs_[e].head == c.head) others.push_back(&arcs_[e].f);
            for (std::size_t j = 0; j < i; ++j)
                if (cands[j].f && cands[j].tail == c.tail && cands[j].head == c.head) others.push_back(&*cands[j].f);
            auto t = trim_by(*c.f, others);
            if (t && !same_domain(*t, *c.f)) c.trimmed = true;
            c.f = std::move(t);
            if (!c.f) continue;
            for (std::size_t j = 0; j < i; ++j) {
                Candidate& d = cands[j];
                if (!d.f || d.tail != c.tail || d.head != c.head) continue;
                auto t2 = trim_by(*d.f, {&*c.f});
                if (t2 && !same_domain(*t2, *d.f)) d.trimmed = true;
                d.f = std::move(t2);
            }
        }
    }

    void witness(Vertex v, std::vector<Candidate>& cands) {
        std::size_t i = 0;
        while (i < cands.size()) {
            std::size_t j = i;
            std::vector<WitnessTarget> targets;
            while (j < cands.size() && cands[j].tail == cands[i].tail) {
                targets.push_back({cands[j].head, cands[j].f});
                ++j;
            }
            witness_search(arcs_, out_, cands[i].tail, v, targets, wopt_);
            for (std::size_t k = i; k < j; ++k) {
                auto& t = targets[k - i].cand;
                if (t && !same_domain(*t, *cands[k].f)) cands[k].trimmed = true;
                cands[k].f = std::move(t);
            }
            i = j;
        }
    }

    void apply(Vertex v, Simulation& s) {
        std::vector<Vertex> nb;
        for (ArcId a : in_[v]) nb.push_back(arcs_[a].tail);
        for (ArcId a : out_[v]) nb.push_back(arcs_[a].head);
        std::sort(nb.begin(), nb.end());
        nb.erase(std::unique(nb.begin(), nb.end()), nb.end());
        nb.erase(std::remove(nb.begin(), nb.end(), v), nb.end());
        for (Vertex x : nb) unset_state(x);
        unset_state(v);
        heap_.erase(v);

        for (auto& c : s.cands) {
            if (!c.f) continue;
            std::vector<ArcId> par;
            for (ArcId e : out_[c.tail])
                if (arcs_[e].head == c.head) par.push_back(e);
            for (ArcId e : par) {
                auto t = trim_by(arcs_[e].f, {&*c.f});
                if (!t) {
                    drop(e);
                } else if (!same_domain(*t, arcs_[e].f)) {
                    arcs_[e].f = std::move(*t);
                    arcs_[e].trimmed = true;
                    bounds_[e] = simplify_upper_bound(arcs_[e].f.plus);
                }
            }
            ChArc a;
            a.tail = c.tail;
            a.head = c.head;
            a.f = std::move(*c.f);
            a.via1 = c.via1;
            a.via2 = c.via2;
            a.hops = c.hops;
            a.trimmed = c.trimmed;
            insert(std::move(a));
            ++stats_.shortcuts;
        }
        for (ArcId a : out_[v])
            if (arcs_[a].head != v) erase_value(in_[arcs_[a].head], a);
        for (ArcId a : in_[v])
            if (arcs_[a].tail != v) erase_value(out_[arcs_[a].tail], a);
        out_[v].clear();
        in_[v].clear();
        contracted_[v] = 1;
        ++stats_.contracted;

        for (Vertex x : nb) set_state(x, simulate(x));
    }

    ChResult finish() {
        ChResult r;
        r.capacity = g_.capacity;
        r.vertex_count = n_;
        r.fingerprint = g_.fingerprint();
        r.input_arcs = g_.arc_count();
        r.rank = rank_;
        for (auto& a : arcs_) {
            if (a.tag == ArcTag::dropped) continue;
            const bool tc = !contracted_[a.tail], hc = !contracted_[a.head];
            if (tc && hc)
                a.tag = ArcTag::core;
            else
                a.tag = rank_[a.tail] < rank_[a.head] ? ArcTag::upward : ArcTag::downward;
        }
        std::uint64_t core_deg = 0;
        for (Vertex v = 0; v < n_; ++v) {
            if (contracted_[v]) continue;
            r.core.push_back(v);
            if (active_[v]) {
                ++stats_.active_core;
                core_deg += degree(v);
            }
        }
        stats_.core_vertices = static_cast<std::uint32_t>(r.core.size());
        stats_.core_avg_degree = stats_.active_core ? static_cast<double>(core_deg) / stats_.active_core : 0.0;
        r.arcs = std::move(arcs_);
        r.stats = stats_;
        return r;
    }
};

}  // namespace

std::vector<ArcId> ChResult::unpack(ArcId a) const {
    std::vector<ArcId> path, stack{a};
    while (!stack.empty()) {
        const ArcId x = stack.back();
        stack.pop_back();
        if (arcs[x].via1 == kNone) {
            path.push_back(x);
            continue;
        }
        stack.push_back(arcs[x].via2);
        stack.push_back(arcs[x].via1);
    }
    return path;
}

ChResult contract(const Instance& g, const ChParams& p) {
    Contractor c(g, p);
    return c.run();
}

const char* tag_name(ArcTag t) {
    switch (t) {
        case ArcTag::upward: return "up";
        case ArcTag::downward: return "down";
        case ArcTag::core: return "core";
        case ArcTag::dropped: return "drop";
    }
    return "?";
}

void save_ch_arcs(const ChResult& r, std::ostream& os) {
    for (const auto& a : r.arcs) {
        os << "s " << a.tail << ' ' << a.head << ' ' << tag_name(a.tag) << ' ';
        if (a.f.kind == SocKind::nonpositive)
            os << "np " << to_record(a.f.whole());
        else
            os << "dc " << to_record(a.f.plus) << ' ' << to_record(a.f.minus);
        if (a.via1 == kNone)
            os << " - -";
        else
            os << ' ' << a.via1 << ' ' << a.via2;
        os << ' ' << a.hops << ' ' << (a.trimmed ? 1 : 0) << '\n';
    }
}

void save_order(const ChResult& r, std::ostream& os) {
    for (Vertex v = 0; v < r.vertex_count; ++v) {
        os << "o " << v << ' ';
        if (r.rank[v] == kNone)
            os << "inf\n";
        else
            os << r.rank[v] << '\n';
    }
}

ChArc parse_ch_arc(const std::vector<std::string>& t, std::size_t pos) {
    auto next = [&]() -> const std::string& {
        if (pos >= t.size()) throw std::runtime_error("truncated shortcut record");
        return t[pos++];
    };
    auto uint = [&]() { return static_cast<std::uint32_t>(std::stoul(next())); };
    ChArc a;
    a.tail = uint();
    a.head = uint();
    const std::string tag = next();
    if (tag == "up")
        a.tag = ArcTag::upward;
    else if (tag == "down")
        a.tag = ArcTag::downward;
    else if (tag == "core")
        a.tag = ArcTag::core;
    else if (tag == "drop")
        a.tag = ArcTag::dropped;
    else
        throw std::runtime_error("unknown rank tag '" + tag + "'");
    const std::string kind = next();
    if (kind == "np") {
        a.f = SocFunction::nonpositive(parse_record(t, pos));
    } else if (kind == "dc") {
        CF plus = parse_record(t, pos);
        CF minus = parse_record(t, pos);
        a.f = SocFunction::discharging(std::move(plus), std::move(minus));
    } else {
        throw std::runtime_error("unknown shortcut kind '" + kind + "'");
    }
    const std::string v1 = next(), v2 = next();
    if (v1 != "-") {
        a.via1 = static_cast<ArcId>(std::stoul(v1));
        a.via2 = static_cast<ArcId>(std::stoul(v2));
    }
    a.hops = uint();
    a.trimmed = uint() != 0;
    if (pos != t.size()) throw std::runtime_error("trailing tokens in shortcut record");
    return a;
}

}  // namespace evcas
