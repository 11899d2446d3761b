#include "evcas/query.hpp"

#include <cstdio>
#include <fstream>
#include <memory>
#include <sstream>
#include <stdexcept>

#include "evcas/heap.hpp"

namespace evcas {

namespace {

std::vector<std::string> tokenize(const std::string& line) {
    std::vector<std::string> out;
    std::istringstream is(line);
    std::string tok;
    while (is >> tok) out.push_back(tok);
    return out;
}

}  // namespace

Preprocessed preprocess(const Instance& g, const ChParams& p) {
    Preprocessed pre;
    pre.source_fingerprint = g.fingerprint();
    pre.split = split_sign_changing(g);
    pre.ch = contract(pre.split.instance, p);
    return pre;
}

void save_preprocessed(const Preprocessed& pre, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot write " + path);
    save_instance(pre.split.instance, os);
    char buf[64];
    std::snprintf(buf, sizeof buf, "x %016llx\n", static_cast<unsigned long long>(pre.source_fingerprint));
    os << buf;
    os << "v " << pre.split.original_vertices << '\n';
    for (std::size_t i = 0; i < pre.split.origin.size(); ++i)
        os << "p " << pre.split.origin[i] << ' ' << static_cast<int>(pre.split.part[i]) << '\n';
    save_ch_arcs(pre.ch, os);
    std::ofstream order(path + ".order");
    if (!order) throw std::runtime_error("cannot write " + path + ".order");
    save_order(pre.ch, order);
}

Preprocessed load_preprocessed(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot read " + path);
    Preprocessed pre;
    std::ostringstream base;
    std::string line;
    std::size_t lineno = 0;
    bool have_x = false;
    std::vector<ChArc> arcs;
    while (std::getline(is, line)) {
        ++lineno;
        try {
            auto t = tokenize(line);
            if (t.empty() || t[0][0] == '#') continue;
            const std::string& tag = t[0];
            if (tag == "evcas" || tag == "m" || tag == "n" || tag == "a") {
                base << line << '\n';
            } else if (tag == "x" && t.size() == 2) {
                pre.source_fingerprint = std::stoull(t[1], nullptr, 16);
                have_x = true;
            } else if (tag == "v" && t.size() == 2) {
                pre.split.original_vertices = static_cast<std::uint32_t>(std::stoul(t[1]));
            } else if (tag == "p" && t.size() == 3) {
                pre.split.origin.push_back(static_cast<ArcId>(std::stoul(t[1])));
                pre.split.part.push_back(static_cast<std::uint8_t>(std::stoul(t[2])));
            } else if (tag == "s") {
                arcs.push_back(parse_ch_arc(t, 1));
            } else {
                throw std::runtime_error("unknown record tag '" + tag + "'");
            }
        } catch (const std::exception& e) {
            throw std::runtime_error(path + " line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    if (!have_x) throw std::runtime_error(path + ": missing source fingerprint");
    std::istringstream bs(base.str());
    pre.split.instance = load_instance(bs);
    const Instance& g = pre.split.instance;
    if (pre.split.origin.size() != g.arc_count()) throw std::runtime_error(path + ": split map does not cover every arc");
    if (arcs.size() < g.arc_count()) throw std::runtime_error(path + ": fewer shortcut records than arcs");
    for (const auto& a : arcs) {
        if (a.tail >= g.vertex_count() || a.head >= g.vertex_count())
            throw std::runtime_error(path + ": shortcut endpoint out of range");
        if (a.via1 != kNone && (a.via1 >= arcs.size() || a.via2 >= arcs.size()))
            throw std::runtime_error(path + ": shortcut refers to unknown arc");
    }
    ChResult& ch = pre.ch;
    ch.capacity = g.capacity;
    ch.vertex_count = g.vertex_count();
    ch.fingerprint = g.fingerprint();
    ch.input_arcs = g.arc_count();
    ch.arcs = std::move(arcs);
    ch.rank.assign(g.vertex_count(), kNone);
    std::ifstream os(path + ".order");
    if (!os) throw std::runtime_error("cannot read " + path + ".order");
    lineno = 0;
    while (std::getline(os, line)) {
        ++lineno;
        auto t = tokenize(line);
        if (t.empty() || t[0][0] == '#') continue;
        if (t[0] != "o" || t.size() != 3)
            throw std::runtime_error(path + ".order line " + std::to_string(lineno) + ": expected 'o <vertex> <rank>'");
        const auto v = static_cast<Vertex>(std::stoul(t[1]));
        if (v >= g.vertex_count()) throw std::runtime_error(path + ".order: vertex out of range");
        ch.rank[v] = t[2] == "inf" ? kNone : static_cast<std::uint32_t>(std::stoul(t[2]));
    }
    for (Vertex v = 0; v < g.vertex_count(); ++v)
        if (ch.rank[v] == kNone) ch.core.push_back(v);
    ch.stats.core_vertices = static_cast<std::uint32_t>(ch.core.size());
    ch.stats.contracted = g.vertex_count() - ch.stats.core_vertices;
    for (std::size_t i = ch.input_arcs; i < ch.arcs.size(); ++i)
        if (ch.arcs[i].tag != ArcTag::dropped) ++ch.stats.shortcuts;
    return pre;
}

PotentialKind parse_potential(const std::string& s) {
    if (s == "none") return PotentialKind::none;
    if (s == "pi_d" || s == "d") return PotentialKind::pi_d;
    if (s == "pi_phi" || s == "phi") return PotentialKind::pi_phi;
    throw std::invalid_argument("unknown potential '" + s + "'");
}

const char* potential_name(PotentialKind k) {
    switch (k) {
        case PotentialKind::none: return "none";
        case PotentialKind::pi_d: return "pi_d";
        case PotentialKind::pi_phi: return "pi_phi";
    }
    return "?";
}

std::vector<PathStep> merge_split_path(const SplitInfo& split, const std::vector<PathStep>& path) {
    std::vector<PathStep> out;
    for (std::size_t i = 0; i < path.size(); ++i) {
        const ArcId a = path[i].arc;
        PathStep s{split.origin[a], path[i].time, path[i].time};
        if (split.part[a] == 1) {
            if (i + 1 >= path.size() || split.origin[path[i + 1].arc] != split.origin[a] || split.part[path[i + 1].arc] != 2)
                throw std::logic_error("split arc half without its partner");
            s.time += path[i + 1].time;
            s.first_time = s.time;
            ++i;
        } else if (split.part[a] == 2) {
            throw std::logic_error("split arc half without its partner");
        }
        out.push_back(s);
    }
    return out;
}

ChasEngine::ChasEngine(const Preprocessed& pre, const Instance& g) : pre_(pre), g_(g) {
    if (g.fingerprint() != pre.source_fingerprint)
        throw std::invalid_argument("preprocessing data was built from a different instance");
    const ChResult& ch = pre.ch;
    wholes_.resize(ch.arcs.size());
    std::vector<SearchArc> arcs;
    for (ArcId i = 0; i < ch.arcs.size(); ++i) {
        const ChArc& a = ch.arcs[i];
        if (a.tag == ArcTag::dropped) continue;
        SearchArc s{a.tail, a.head, nullptr, nullptr, i};
        if (a.f.kind == SocKind::nonpositive) {
            wholes_[i] = a.f.whole();
            s.first = &wholes_[i];
        } else if (a.f.trivial_minus()) {
            s.first = &a.f.plus;
        } else {
            s.first = &a.f.plus;
            s.second = &a.f.minus;
        }
        arcs.push_back(s);
        tags_.push_back(a.tag);
        core_mask_.push_back(a.tag == ArcTag::core ? 1 : 0);
    }
    sg_ = SearchGraph(ch.vertex_count, ch.capacity, std::move(arcs));
    bg_ = BoundGraph(sg_, default_convert_error(ch.capacity));
}

std::vector<std::uint8_t> ChasEngine::mark(Vertex s, Vertex t) const {
    std::vector<std::uint8_t> mask = core_mask_;
    std::vector<std::uint8_t> seen(sg_.vertex_count(), 0);
    std::vector<Vertex> stack{s};
    seen[s] = 1;
    while (!stack.empty()) {
        const Vertex v = stack.back();
        stack.pop_back();
        for (std::uint32_t ai : sg_.out_arcs(v)) {
            if (tags_[ai] != ArcTag::upward) continue;
            mask[ai] = 1;
            const Vertex w = sg_.arcs()[ai].head;
            if (!seen[w]) {
                seen[w] = 1;
                stack.push_back(w);
            }
        }
    }
    std::fill(seen.begin(), seen.end(), 0);
    stack.push_back(t);
    seen[t] = 1;
    while (!stack.empty()) {
        const Vertex v = stack.back();
        stack.pop_back();
        for (std::uint32_t ai : sg_.in_arcs(v)) {
            if (tags_[ai] != ArcTag::downward) continue;
            mask[ai] = 1;
            const Vertex w = sg_.arcs()[ai].tail;
            if (!seen[w]) {
                seen[w] = 1;
                stack.push_back(w);
            }
        }
    }
    return mask;
}

std::vector<PathStep> ChasEngine::unpack(const std::vector<PathStep>& path, double b_s, double* time,
                                         double* soc) const {
    const Instance& split = pre_.split.instance;
    std::vector<ArcId> chain;
    for (const auto& step : path) {
        for (ArcId a : pre_.ch.unpack(step.arc)) chain.push_back(a);
    }
    std::vector<SearchArc> arcs;
    for (std::uint32_t i = 0; i < chain.size(); ++i) arcs.push_back({i, i + 1, &split.arcs[chain[i]].cost, nullptr, i});
    const auto n = static_cast<std::uint32_t>(chain.size() + 1);
    SearchGraph line(n, split.capacity, std::move(arcs));
    const QueryResult r = tfp_query(line, {0, n - 1, b_s});
    if (!r.feasible) throw std::logic_error("unpacked path is infeasible");
    *time = r.time;
    *soc = r.soc;
    std::vector<PathStep> steps;
    for (const auto& s : r.path) steps.push_back({chain[s.arc], s.time, s.time});
    return merge_split_path(pre_.split, steps);
}

bool ChasEngine::fastest_path(const QuerySpec& q, const std::vector<std::uint8_t>& mask, QueryResult& r) const {
    const std::uint32_t n = sg_.vertex_count();
    std::vector<double> dist(n, kInf);
    std::vector<std::uint32_t> parent(n, kNone);
    IndexedHeap<double> heap(n);
    dist[q.s] = 0.0;
    heap.push_or_update(q.s, 0.0);
    while (!heap.empty()) {
        const Vertex v = heap.pop();
        if (v == q.t) break;
        for (std::uint32_t ai : sg_.out_arcs(v)) {
            if (!mask[ai]) continue;
            const SearchArc& a = sg_.arcs()[ai];
            const double d = dist[v] + a.first->tau_min + (a.second ? a.second->tau_min : 0.0);
            if (d < dist[a.head]) {
                dist[a.head] = d;
                parent[a.head] = ai;
                heap.push_or_update(a.head, d);
            }
        }
    }
    if (dist[q.t] == kInf) return false;
    std::vector<ArcId> chain;
    for (Vertex v = q.t; v != q.s;) {
        const std::uint32_t ai = parent[v];
        const auto part = pre_.ch.unpack(sg_.arcs()[ai].id);
        chain.insert(chain.begin(), part.begin(), part.end());
        v = sg_.arcs()[ai].tail;
    }
    const Instance& split = pre_.split.instance;
    std::vector<std::pair<ArcId, double>> fast;
    for (ArcId a : chain) fast.emplace_back(a, split.arcs[a].cost.tau_min);
    const double soc = soc_replay(split, fast, q.b_s);
    if (soc == -kInf) return false;
    std::vector<PathStep> steps;
    double time = 0.0;
    for (const auto& [a, x] : fast) {
        steps.push_back({a, x, x});
        time += x;
    }
    r.feasible = true;
    r.time = time;
    r.soc = soc;
    r.path = merge_split_path(pre_.split, steps);
    return true;
}

QueryResult ChasEngine::query(const QuerySpec& q, const ChasOptions& opt) const {
    if (q.s >= pre_.split.original_vertices || q.t >= pre_.split.original_vertices)
        throw std::out_of_range("query vertex out of range");
    QueryResult r;
    if (q.s == q.t) {
        r.feasible = true;
        r.time = 0.0;
        r.soc = q.b_s;
        return r;
    }
    const auto mask = mark(q.s, q.t);
    if (opt.fastest_path_check && fastest_path(q, mask, r)) return r;
    std::unique_ptr<Potential> pot;
    switch (opt.potential) {
        case PotentialKind::none: pot = std::make_unique<NullPotential>(); break;
        case PotentialKind::pi_d: pot = std::make_unique<PiD>(bg_, q.t, &mask); break;
        case PotentialKind::pi_phi:
            pot = std::make_unique<PiPhi>(bg_, q.t, ReduceParams::for_capacity(sg_.capacity()), &mask);
            break;
    }
    TfpOptions to;
    to.potential = pot.get();
    to.epsilon = opt.epsilon;
    to.arc_mask = &mask;
    to.instrument = opt.instrument;
    r = tfp_query(sg_, q, to);
    if (r.feasible) {
        double time = 0.0, soc = 0.0;
        r.path = unpack(r.path, q.b_s, &time, &soc);
        r.time = time;
        r.soc = soc;
    }
    return r;
}

}  // namespace evcas
