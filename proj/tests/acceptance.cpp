#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "evcas/bench.hpp"
#include "evcas/ch.hpp"
#include "evcas/potentials.hpp"
#include "evcas/query.hpp"
#include "evcas/tfp.hpp"
#include "oracles/oracles.hpp"

using namespace evcas;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

double rel_gap(double a, double b) {
    if (std::isinf(a) || std::isinf(b)) return a == b ? 0.0 : kInf;
    return std::abs(a - b) / std::max(1.0, std::abs(b));
}

double grid_gap(const CF& a, const CF& b, int n) {
    double m = 0.0;
    const double lo = std::min(a.tau_min, b.tau_min);
    const double hi = std::max(a.tau_max, b.tau_max) + 0.5;
    for (int k = 0; k <= n; ++k) m = std::max(m, rel_gap(a.eval(lo + (hi - lo) * k / n), b.eval(lo + (hi - lo) * k / n)));
    return m;
}

// ------------------------------------------------------------------------- 1

Outcome golden_link() {
    const CF c1 = CF::single(4.0, 1.0, -1.0, 2.0, 4.0);
    const CF c2 = CF::single(0.5, 1.0, 1.0, 2.0, 5.0);
    LinkResult r = link_single(c1, c2);
    const int reps = 1000;
    const auto t0 = Clock::now();
    for (int i = 0; i < reps; ++i) r = link_single(c1, c2);
    const double ms = seconds_since(t0) * 1000.0 / reps;
    bool ok = r.cost.size() == 3 && std::abs(r.cost.tau_min - 4.0) <= 1e-9 && std::abs(r.cost.tau_max - 9.0) <= 1e-9;
    double b1 = kInf, b2 = kInf;
    if (r.cost.size() == 3) {
        b1 = r.cost.pieces[1].dom_start;
        b2 = r.cost.pieces[2].dom_start;
        ok = ok && std::abs(b1 - 5.0) <= 1e-9 && std::abs(b2 - 6.5) <= 1e-9;
    }
    const double e4 = std::abs(r.cost.eval(4.0) - (c1.eval(2.0) + c2.eval(2.0)));
    const double e9 = std::abs(r.cost.eval(9.0) - (c1.eval(4.0) + c2.eval(5.0)));
    ok = ok && e4 <= 1e-9 && e9 <= 1e-9 && ms < 1.0;
    return {ok, fmt("pieces %zu, boundaries %.12g %.12g, endpoint errors %.2e %.2e, %.4f ms per link", r.cost.size(),
                    b1, b2, e4, e9, ms)};
}

// ------------------------------------------------------------------------- 2

Outcome algebra_suite() {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const int cases = 10000;
    double cont = 0.0, comm = 0.0, assoc = 0.0, lin_naive = 0.0, brute = 0.0, delta = 0.0, inv = 0.0;
    int nonmono = 0, nonconvex = 0;
    const auto t0 = Clock::now();
    for (int i = 0; i < cases; ++i) {
        const CF a = oracle::random_convex(rng, 1 + i % 5), b = oracle::random_convex(rng, 1 + (i / 5) % 5);
        const LinkResult lin = link_linear(a, b);
        const CF& c = lin.cost;
        for (std::size_t k = 1; k < c.pieces.size(); ++k) {
            const double x = c.pieces[k].dom_start;
            cont = std::max(cont, rel_gap(c.pieces[k - 1].eval(x), c.pieces[k].eval(x)));
        }
        double prev = kInf;
        for (int k = 0; k <= 20; ++k) {
            const double v = c.eval(c.tau_min + (c.tau_max - c.tau_min) * k / 20.0);
            if (!(v < prev)) ++nonmono;
            prev = v;
        }
        if (!is_convex(c, 1e-7)) ++nonconvex;
        comm = std::max(comm, grid_gap(c, link_linear(b, a).cost, 100));
        lin_naive = std::max(lin_naive, grid_gap(c, link_naive(a, b).cost, 100));
        if (i % 10 == 0) {
            const CF d = oracle::random_convex(rng, 1 + i % 3);
            assoc = std::max(assoc, grid_gap(link(c, d), link(a, link(b, d)), 200));
        }
        for (int k = 0; k < 3; ++k) {
            const double x = c.tau_min + (c.tau_max - c.tau_min) * u(rng);
            brute = std::max(brute, rel_gap(c.eval(x), oracle::brute_link(a, b, x)));
            const double d = lin.delta.eval(x);
            delta = std::max(delta, rel_gap(a.eval(x - d) + b.eval(d), c.eval(x)));
        }
        const double e = c.value_at_max() + u(rng) * (c.value_at_min() - c.value_at_max());
        if (auto x = inverse(c, e)) inv = std::max(inv, std::abs(c.eval(*x) - e) / std::max(1.0, std::abs(e)));
        else inv = kInf;
    }
    const double secs = seconds_since(t0);
    const bool ok = cont <= 1e-7 && nonmono == 0 && nonconvex == 0 && comm <= 1e-8 && assoc <= 1e-8 &&
                    lin_naive <= 1e-9 && brute <= 1e-6 && delta <= 1e-6 && inv <= 1e-9 && secs < 30.0;
    return {ok, fmt("%d cases in %.1f s: continuity %.1e, nonmonotone %d, nonconvex %d, commutativity %.1e, "
                    "associativity %.1e, linear vs naive %.1e, brute force %.1e, split %.1e, inverse %.1e",
                    cases, secs, cont, nonmono, nonconvex, comm, assoc, lin_naive, brute, delta, inv)};
}

// ------------------------------------------------------------------------- 3

Outcome exactness() {
    std::mt19937_64 rng(303);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    int feasible = 0, verdict = 0;
    double worst = 0.0;
    const auto t0 = Clock::now();
    for (int i = 0; i < 100; ++i) {
        const std::uint32_t n = 6 + static_cast<std::uint32_t>(rng() % 7);
        const Instance g = oracle::random_small_instance(rng, n, n * 5 / 2, 5.0);
        const QuerySpec q{0, n - 1, 5.0 * (0.2 + 0.8 * u(rng))};
        const QueryResult r = tfp_query(SearchGraph::from_instance(g), q);
        const oracle::PathSolve o = oracle::exhaustive_min_time(g, q);
        if (r.feasible != o.feasible) {
            ++verdict;
            continue;
        }
        if (!r.feasible) continue;
        ++feasible;
        worst = std::max(worst, std::abs(r.time - o.value));
    }
    const double secs = seconds_since(t0);
    const bool ok = verdict == 0 && worst <= 1e-4 && secs < 300.0;
    return {ok, fmt("100 instances, %d feasible, verdict mismatches %d, max time error %.2e s, %.1f s", feasible,
                    verdict, worst, secs)};
}

// ------------------------------------------------------------------------- 4, 5, 10, 11

struct Synthetic {
    Instance g;
    std::unique_ptr<Preprocessed> pre;
    double preprocess_s = 0.0;
    std::vector<QuerySpec> queries;
    std::vector<BenchRow> rows;
};

std::vector<Synthetic> synthetic;

const std::vector<std::uint32_t> kSizes{1000, 2000, 3000, 5000, 10000};

Outcome engine_equivalence() {
    const auto t0 = Clock::now();
    const auto engines = parse_engines("tfp,astar:pi_d,astar:pi_phi,chasp:pi_d");
    std::size_t rows = 0, disagree = 0, feasible = 0;
    std::string sizes;
    for (std::size_t i = 0; i < kSizes.size(); ++i) {
        GenParams p;
        p.n_vertices = kSizes[i];
        p.seed = 40 + i;
        Synthetic s;
        s.g = generate_synthetic(p);
        const auto tp = Clock::now();
        s.pre = std::make_unique<Preprocessed>(preprocess(s.g));
        s.preprocess_s = seconds_since(tp);
        s.queries = sample_in_range(s.g, 500 + i, 200);
        std::vector<RankedQuery> rq;
        for (const auto& q : s.queries) rq.push_back({q, 0});
        const EngineSet set(s.g, s.pre.get());
        s.rows = run_bench(set, engines, rq);
        for (const auto& r : s.rows) {
            ++rows;
            if (!r.agree) ++disagree;
            if (r.status == "feasible") ++feasible;
        }
        sizes += fmt("%s%u", sizes.empty() ? "" : "/", s.g.vertex_count());
        synthetic.push_back(std::move(s));
    }
    const double secs = seconds_since(t0);
    const bool ok = disagree == 0 && secs < 600.0;
    return {ok, fmt("vertices %s, %zu engine runs, %zu feasible, %zu disagreements, %.1f s", sizes.c_str(),
                    rows, feasible, disagree, secs)};
}

Outcome potential_consistency() {
    if (synthetic.empty()) return {false, "no instances"};
    std::mt19937_64 rng(505);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::size_t violations = 0, infinite = 0;
    double worst = kInf;
    std::string per;
    for (const auto& s : synthetic) {
        const Instance& g = s.g;
        const double M = g.capacity;
        const SearchGraph sg = SearchGraph::from_instance(g);
        const BoundGraph bg(sg, default_convert_error(M));
        std::size_t sampled = 0;
        for (int k = 0; k < 10; ++k) {
            const Vertex t = s.queries[k * s.queries.size() / 10].t;
            const PiD pd(bg, t);
            const PiPhi pp(bg, t, ReduceParams::for_capacity(M));
            std::size_t got = 0;
            while (got < 10000) {
                const Arc& a = g.arcs[rng() % g.arc_count()];
                const double x = a.cost.tau_min + u(rng) * (a.cost.tau_max - a.cost.tau_min);
                const double b = M * u(rng);
                const double f = soc_step(b, a.cost.eval(x), M);
                if (f == -kInf) continue;
                ++got;
                for (const Potential* p : {static_cast<const Potential*>(&pd), static_cast<const Potential*>(&pp)}) {
                    const double pu = p->at(a.tail, b), pv = p->at(a.head, f);
                    if (pu == kInf) {
                        ++infinite;
                        if (pv != kInf) ++violations;
                        continue;
                    }
                    const double slack = x - pu + pv;
                    worst = std::min(worst, slack);
                    if (slack < -1e-9) ++violations;
                }
            }
            sampled += got;
        }
        per += fmt("%s%zu", per.empty() ? "" : "/", sampled);
    }
    return {violations == 0, fmt("triples per instance %s, both potentials, violations %zu, min slack %.3e, "
                                 "infinite at tail %zu",
                                 per.c_str(), violations, worst, infinite)};
}

// ------------------------------------------------------------------------- 6

Outcome epsilon_bound() {
    std::mt19937_64 rng(606);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    struct Case {
        Instance g;
        std::vector<QuerySpec> qs;
    };
    std::vector<Case> cases;
    for (int i = 0; i < 40; ++i) {
        Case c{oracle::random_small_instance(rng, 12, 40, 6.0), {}};
        c.qs.push_back({0, 11, 6.0 * (0.2 + 0.8 * u(rng))});
        cases.push_back(std::move(c));
    }
    GenParams p;
    p.n_vertices = 300;
    p.seed = 66;
    p.capacity_kwh = 1.0;
    Case syn{generate_synthetic(p), {}};
    syn.qs = sample_in_range(syn.g, 67, 30);
    cases.push_back(std::move(syn));

    TfpOptions base;
    base.trim = [](const CF& c, const std::vector<const CF*>& s, double slack, TrimStats* st) {
        if (st) ++st->checks;
        return oracle::trim_exact(c, s, slack);
    };
    std::map<double, std::uint32_t> worst;
    std::size_t queries = 0, over = 0, better = 0, lost = 0;
    for (const auto& c : cases) {
        const SearchGraph sg = SearchGraph::from_instance(c.g);
        for (const auto& q : c.qs) {
            ++queries;
            const QueryResult exact = tfp_query(sg, q, base);
            for (double eps : {0.25, 0.1, 0.01}) {
                TfpOptions o = base;
                o.epsilon = eps;
                const QueryResult h = tfp_query(sg, q, o);
                worst[eps] = std::max(worst[eps], h.max_settled_per_vertex);
                if (h.max_settled_per_vertex > static_cast<std::uint32_t>(std::ceil(1.0 / eps)) + 1) ++over;
                if (h.feasible && (!exact.feasible || h.time < exact.time - 1e-9)) ++better;
                if (!h.feasible && exact.feasible) ++lost;
            }
        }
    }
    return {over == 0 && better == 0,
            fmt("%zu queries; max settled per vertex %u/%u/%u for eps 0.25/0.1/0.01 (bounds 5/11/101); "
                "bound exceeded %zu, heuristic below exact %zu, heuristic lost target %zu",
                queries, worst[0.25], worst[0.1], worst[0.01], over, better, lost)};
}

// ------------------------------------------------------------------------- 7

Outcome shortcut_fidelity() {
    std::mt19937_64 rng(707);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    oracle::Fidelity fid;
    int built = 0;
    while (built < 1000) {
        const int k = 2 + static_cast<int>(rng() % 4);
        std::vector<CF> arcs;
        double top = 0.0;
        for (int i = 0; i < k; ++i) {
            arcs.push_back(oracle::random_signed_arc(rng, u(rng) < 0.4));
            top += std::max(0.0, arcs.back().value_at_min());
        }
        auto f = oracle::random_bracket(rng, arcs, 0, arcs.size());
        if (!f) continue;
        ++built;
        oracle::check_fidelity(*f, arcs, 1.0 + top * (0.3 + u(rng)), 20, fid, 19);
    }

    // shortcuts produced by contraction against the arcs they stand for
    oracle::Fidelity ch;
    std::size_t from_ch = 0, trimmed = 0, unsound = 0;
    for (int i = 0; i < 6; ++i) {
        const Instance g = oracle::random_small_instance(rng, 14, 45, 4.0 + i);
        const Preprocessed pre = preprocess(g);
        const Instance& split = pre.split.instance;
        for (std::size_t a = pre.ch.input_arcs; a < pre.ch.arcs.size(); ++a) {
            const ChArc& sc = pre.ch.arcs[a];
            std::vector<CF> chain;
            for (ArcId e : pre.ch.unpack(static_cast<ArcId>(a))) chain.push_back(split.arcs[e].cost);
            if (!sc.trimmed) {
                ++from_ch;
                oracle::check_fidelity(sc.f, chain, g.capacity, 20, ch, 19);
                continue;
            }
            ++trimmed;
            std::vector<const CF*> ptr;
            double tmin = 0.0, tmax = 0.0;
            for (const CF& c : chain) {
                ptr.push_back(&c);
                tmin += c.tau_min;
                tmax += c.tau_max;
            }
            for (int x = 0; x < 20; ++x)
                for (int y = 0; y < 20; ++y) {
                    const double t = tmin + (tmax + 1.0 - tmin) * (x + 0.37) / 20.0;
                    const double b = g.capacity * (y + 0.41) / 20.0;
                    const auto got = soc_eval(sc.f, t, b, g.capacity);
                    const auto ref = oracle::chain_soc(ptr, b, t, g.capacity);
                    if (got && (!ref.feasible || *got > ref.value + 1e-6)) ++unsound;
                }
        }
    }
    const bool ok = fid.verdict_mismatch == 0 && fid.max_dev <= 1e-6 && ch.verdict_mismatch == 0 &&
                    ch.max_dev <= 1e-6 && unsound == 0;
    return {ok, fmt("%d random shortcuts on 20x20 grids: verdict mismatches %d, max deviation %.2e (%d barrier points); "
                    "%zu contraction shortcuts: mismatches %d, max deviation %.2e; %zu trimmed ones overstating %zu points",
                    built, fid.verdict_mismatch, fid.max_dev, fid.barrier_points, from_ch, ch.verdict_mismatch, ch.max_dev, trimmed,
                    unsound)};
}

// ------------------------------------------------------------------------- 8

Outcome upper_bounds() {
    std::mt19937_64 rng(808);
    double worst = kInf, endpoint = 0.0;
    for (int i = 0; i < 10000; ++i) {
        const CF c = oracle::random_convex(rng, 2 + i % 7);
        const CF g = simplify_upper_bound(c);
        for (int k = 0; k <= 200; ++k) {
            const double x = c.tau_min + (c.tau_max - c.tau_min) * k / 200.0;
            worst = std::min(worst, g.eval(x) - c.eval(x));
        }
        endpoint = std::max({endpoint, rel_gap(g.value_at_min(), c.value_at_min()),
                             rel_gap(g.value_at_max(), c.value_at_max())});
    }
    return {worst >= -1e-9, fmt("10000 functions with 2 to 8 pieces, min slack %.3e, endpoint gap %.1e", worst,
                                endpoint)};
}

// ------------------------------------------------------------------------- 9

Outcome model_trend() {
    GenParams p;
    p.n_vertices = 5000;
    p.seed = 90;
    p.capacity_kwh = 2.0;
    const Instance g = generate_synthetic(p);
    const auto queries = sample_in_range(g, 91, 20);
    const std::vector<double> steps{kInfiniteStep, 20.0, 10.0, 5.0};
    const auto t0 = Clock::now();
    const auto rows = run_oracle(g, queries, steps, 2000000);
    const double secs = seconds_since(t0);
    bool monotone = true;
    for (std::size_t k = 1; k < rows.size(); ++k)
        if (rows[k].mean_ratio > rows[k - 1].mean_ratio + 1e-12 || rows[k].max_ratio > rows[k - 1].max_ratio + 1e-12)
            monotone = false;
    bool above = true;
    for (const auto& r : rows)
        if (r.common && r.mean_ratio < 1.0 - 1e-9) above = false;
    const bool strict = rows.front().mean_ratio > rows.back().mean_ratio;
    const OracleRow& at20 = rows[1];
    const double share = at20.bsp_labels > 0.0 ? at20.tfp_labels / at20.bsp_labels : kInf;
    std::string ratios;
    for (const auto& r : rows)
        ratios += fmt("%s%s:%.6f(%zu aborted)", ratios.empty() ? "" : " ",
                      r.step == kInfiniteStep ? "inf" : fmt("%g", r.step).c_str(), r.mean_ratio, r.bsp_aborted);
    const bool ok = monotone && strict && above && rows.front().common > 0 && share <= 0.1;
    return {ok, fmt("5000 vertices, 2 kWh, %zu queries solved at every step; mean ratio per step %s; "
                    "tfp/bsp labels at 20 km/h %.4f; %.1f s",
                    rows.front().common, ratios.c_str(), share, secs)};
}

// ------------------------------------------------------------------------- 10

Outcome path_replay() {
    std::size_t checked = 0, bad_time = 0, bad_sum = 0, bad_soc = 0, negative = 0;
    double sum_err = 0.0, soc_err = 0.0;
    auto check = [&](const Instance& g, const QuerySpec& q, const QueryResult& r) {
        if (!r.feasible) return;
        ++checked;
        std::vector<std::pair<ArcId, double>> replay;
        double total = 0.0;
        for (const auto& s : r.path) {
            const CF& c = g.arcs[s.arc].cost;
            if (s.time < c.tau_min - 1e-9 || (!c.is_constant() && s.time > c.tau_max + 1e-9)) ++bad_time;
            total += s.time;
            replay.emplace_back(s.arc, s.time);
        }
        if (q.s != q.t && r.path.empty()) ++bad_sum;
        sum_err = std::max(sum_err, std::abs(total - r.time));
        if (std::abs(total - r.time) > 1e-9) ++bad_sum;
        std::vector<double> prefix;
        const double end = soc_replay(g, replay, q.b_s, &prefix);
        for (double b : prefix)
            if (!(b >= 0.0)) ++negative;
        soc_err = std::max(soc_err, std::abs(end - r.soc));
        if (!(std::abs(end - r.soc) <= 1e-6)) ++bad_soc;
    };
    std::mt19937_64 rng(1010);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 30; ++i) {
        const Instance g = oracle::random_small_instance(rng, 12, 40, 6.0);
        const Preprocessed pre = preprocess(g);
        const EngineSet set(g, &pre);
        const QuerySpec q{static_cast<Vertex>(rng() % 12), static_cast<Vertex>(rng() % 12), 6.0 * u(rng)};
        for (const char* e : {"tfp", "astar:pi_d", "astar:pi_phi", "chasp:pi_d", "chasp:pi_phi"})
            check(g, q, set.run(parse_engine(e), q));
    }
    for (std::size_t i = 0; i < std::min<std::size_t>(3, synthetic.size()); ++i) {
        const Synthetic& s = synthetic[i];
        const EngineSet set(s.g, s.pre.get());
        for (std::size_t k = 0; k < 40 && k < s.queries.size(); ++k)
            for (const char* e : {"tfp", "astar:pi_phi", "chasp:pi_d"}) check(s.g, s.queries[k], set.run(parse_engine(e), s.queries[k]));
    }
    const bool ok = checked > 0 && bad_time == 0 && bad_sum == 0 && bad_soc == 0 && negative == 0;
    return {ok, fmt("%zu feasible results: inadmissible times %zu, sum errors %zu (max %.2e), negative prefixes %zu, "
                    "soc mismatches %zu (max %.2e)",
                    checked, bad_time, bad_sum, sum_err, negative, bad_soc, soc_err)};
}

// ------------------------------------------------------------------------- 11

Outcome performance() {
    if (synthetic.empty()) return {false, "no instances"};
    const Synthetic& s = synthetic.back();
    std::vector<double> ms;
    for (const auto& r : s.rows)
        if (r.engine.rfind("chasp", 0) == 0) ms.push_back(r.ms);
    if (ms.empty()) return {false, "no chasp runs"};
    std::sort(ms.begin(), ms.end());
    const double median = ms.size() % 2 ? ms[ms.size() / 2] : 0.5 * (ms[ms.size() / 2 - 1] + ms[ms.size() / 2]);
    const bool ok = median < 100.0 && s.preprocess_s < 300.0;
    return {ok, fmt("%u vertices, %.0f kWh: preprocessing %.1f s, chasp median query %.2f ms over %zu queries",
                    s.g.vertex_count(), s.g.capacity / 1000.0, s.preprocess_s, median, ms.size())};
}

}  // namespace

int main() {
    struct Criterion {
        int id;
        bool soft;
        std::function<Outcome()> run;
    };
    const std::vector<Criterion> all{
        {1, false, golden_link},       {2, false, algebra_suite},       {3, false, exactness},
        {4, false, engine_equivalence}, {5, false, potential_consistency}, {6, false, epsilon_bound},
        {7, false, shortcut_fidelity}, {8, false, upper_bounds},        {9, false, model_trend},
        {10, false, path_replay},      {11, true, performance},
    };
    int failed = 0;
    for (const auto& c : all) {
        const auto t0 = Clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        std::printf("criterion %2d: %s%s (%.1f s) %s\n", c.id, o.pass ? "PASS" : "FAIL", c.soft && !o.pass ? " [soft]" : "",
                    seconds_since(t0), o.detail.c_str());
        std::fflush(stdout);
        if (!o.pass && !c.soft) ++failed;
    }
    return failed == 0 ? 0 : 1;
}
