#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "evcas/bench.hpp"
#include "evcas/graph.hpp"
#include "evcas/query.hpp"

using namespace evcas;

namespace {

constexpr int kOk = 0;
constexpr int kInfeasible = 1;
constexpr int kError = 2;

struct Globals {
    std::string instance;
    std::uint64_t seed = 1;
    std::optional<double> capacity_kwh;
    std::string potential = "pi_d";
    std::string engine = "tfp";
    double epsilon = 0.0;
    double stop_degree = 32.0;
    std::uint32_t settled_limit = 128;
    std::string out = "-";
};

class Output {
public:
    explicit Output(const std::string& path) {
        if (path.empty() || path == "-") return;
        file_ = std::make_unique<std::ofstream>(path);
        if (!*file_) throw std::runtime_error("cannot write " + path);
    }
    std::ostream& stream() { return file_ ? *file_ : std::cout; }

private:
    std::unique_ptr<std::ofstream> file_;
};

Instance load(const Globals& g) {
    if (g.instance.empty()) throw std::runtime_error("--instance is required");
    Instance inst = load_instance(g.instance);
    if (g.capacity_kwh) inst.capacity = *g.capacity_kwh * 1000.0;
    return inst;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

EngineSpec engine_from_flags(const Globals& g) {
    EngineSpec e = parse_engine(g.engine);
    if (e.kind != EngineKind::tfp && g.engine.find(':') == std::string::npos) e.potential = parse_potential(g.potential);
    if (g.epsilon > 0.0) e.epsilon = g.epsilon;
    return e;
}

std::unique_ptr<Preprocessed> load_pre(const std::string& path) {
    if (path.empty()) return nullptr;
    return std::make_unique<Preprocessed>(load_preprocessed(path));
}

int cmd_gen(const Globals& g, std::uint32_t vertices) {
    GenParams p;
    p.n_vertices = vertices;
    p.seed = g.seed;
    if (g.capacity_kwh) p.capacity_kwh = *g.capacity_kwh;
    const Instance inst = generate_synthetic(p);
    Output out(g.out);
    save_instance(inst, out.stream());
    const InstanceStats s = instance_stats(inst);
    std::fprintf(stderr, "vertices %u arcs %zu negative %.3f nonconstant %.3f\n", inst.vertex_count(),
                 inst.arc_count(), s.negative_share, s.nonconstant_share);
    return kOk;
}

int cmd_split(const Globals& g) {
    const SplitInfo s = split_sign_changing(load(g));
    Output out(g.out);
    save_instance(s.instance, out.stream());
    std::fprintf(stderr, "vertices %u (input %u) arcs %zu\n", s.instance.vertex_count(), s.original_vertices,
                 s.instance.arc_count());
    return kOk;
}

int cmd_sample(const Globals& g, std::size_t count, const std::string& model) {
    const Instance inst = load(g);
    std::vector<QuerySpec> qs;
    if (model == "in_range") {
        qs = sample_in_range(inst, g.seed, count);
    } else if (model == "rank") {
        for (const auto& r : sample_dijkstra_rank(inst, g.seed, count)) qs.push_back(r.q);
    } else {
        throw std::runtime_error("unknown query model '" + model + "'");
    }
    Output out(g.out);
    save_queries(qs, out.stream());
    return kOk;
}

int cmd_preprocess(const Globals& g) {
    const Instance inst = load(g);
    if (g.out.empty() || g.out == "-") throw std::runtime_error("preprocess needs --out <path>");
    ChParams p;
    p.stop_avg_degree = g.stop_degree;
    p.settled_limit = g.settled_limit;
    const auto t0 = std::chrono::steady_clock::now();
    const Preprocessed pre = preprocess(inst, p);
    const double secs = seconds_since(t0);
    save_preprocessed(pre, g.out);
    const ChStats& s = pre.ch.stats;
    std::fprintf(stderr,
                 "seconds %.3f contracted %u core %u active_core %u shortcuts %llu dropped %llu core_avg_degree %.2f\n",
                 secs, s.contracted, s.core_vertices, s.active_core, static_cast<unsigned long long>(s.shortcuts),
                 static_cast<unsigned long long>(s.dropped), s.core_avg_degree);
    return kOk;
}

int cmd_query(const Globals& g, const std::string& pre_path, const std::string& queries_path,
              std::optional<Vertex> source, std::optional<Vertex> target, std::optional<double> soc_kwh,
              bool print_path) {
    const Instance inst = load(g);
    const EngineSpec e = engine_from_flags(g);
    const auto pre = load_pre(pre_path);
    if (e.kind == EngineKind::chasp && !pre) throw std::runtime_error("engine chasp needs --pre <file>");
    std::vector<QuerySpec> qs;
    if (!queries_path.empty()) {
        std::ifstream is(queries_path);
        if (!is) throw std::runtime_error("cannot read " + queries_path);
        qs = load_queries(is);
    }
    if (source || target) {
        if (!source || !target) throw std::runtime_error("--source and --target go together");
        qs.push_back({*source, *target, soc_kwh ? *soc_kwh * 1000.0 : inst.capacity});
    }
    if (qs.empty()) throw std::runtime_error("no queries given");
    for (const auto& q : qs)
        if (q.s >= inst.vertex_count() || q.t >= inst.vertex_count())
            throw std::runtime_error("query vertex out of range");

    const EngineSet set(inst, e.kind == EngineKind::chasp ? pre.get() : nullptr);
    Output out(g.out);
    std::ostream& os = out.stream();
    if (print_path) os << "query,step,arc,tail,head,time_s\n";
    std::vector<BenchRow> rows;
    std::size_t feasible = 0;
    for (std::size_t i = 0; i < qs.size(); ++i) {
        const auto t0 = std::chrono::steady_clock::now();
        const QueryResult r = set.run(e, qs[i]);
        BenchRow row;
        row.ms = seconds_since(t0) * 1000.0;
        row.query = i;
        row.engine = e.name();
        row.q = qs[i];
        row.status = r.aborted ? "aborted" : r.feasible ? "feasible" : "infeasible";
        row.time = r.time;
        row.soc = r.soc;
        row.labels = r.labels_settled;
        row.comparisons = r.dominance_checks;
        rows.push_back(row);
        if (r.feasible) ++feasible;
        if (print_path)
            for (std::size_t k = 0; k < r.path.size(); ++k) {
                const Arc& a = inst.arcs[r.path[k].arc];
                os << i << ',' << k << ',' << r.path[k].arc << ',' << a.tail << ',' << a.head << ','
                   << csv_number(r.path[k].time) << '\n';
            }
    }
    if (!print_path) write_rows(rows, os);
    return feasible == 0 ? kInfeasible : kOk;
}

int cmd_bench(const Globals& g, const std::string& pre_path, const std::string& engines, const std::string& model,
              std::size_t count, unsigned threads, const std::string& summary_path) {
    const Instance inst = load(g);
    const auto specs = parse_engines(engines);
    const auto pre = load_pre(pre_path);
    for (const auto& e : specs)
        if (e.kind == EngineKind::chasp && !pre) throw std::runtime_error("engine chasp needs --pre <file>");
    std::vector<RankedQuery> queries;
    if (model == "in_range") {
        for (const auto& q : sample_in_range(inst, g.seed, count)) queries.push_back({q, 0});
    } else if (model == "rank") {
        queries = sample_dijkstra_rank(inst, g.seed, count);
    } else {
        throw std::runtime_error("unknown query model '" + model + "'");
    }
    const EngineSet set(inst, pre.get());
    BenchOptions opt;
    opt.threads = threads;
    const auto rows = run_bench(set, specs, queries, opt);
    {
        Output out(g.out);
        write_rows(rows, out.stream());
    }
    const auto summary = summarize(rows);
    if (summary_path.empty()) {
        write_summary(summary, std::cerr);
    } else {
        Output out(summary_path);
        write_summary(summary, out.stream());
    }
    std::size_t disagreements = 0;
    for (const auto& s : summary) disagreements += s.disagreements;
    if (disagreements) std::fprintf(stderr, "engines disagree on %zu rows\n", disagreements);
    return kOk;
}

int cmd_oracle(const Globals& g, std::size_t count, const std::string& steps, std::uint64_t label_limit) {
    const Instance inst = load(g);
    const auto queries = sample_in_range(inst, g.seed, count);
    const auto rows = run_oracle(inst, queries, parse_steps(steps), label_limit);
    Output out(g.out);
    write_oracle(rows, out.stream());
    return kOk;
}

int run(int argc, char** argv) {
    CLI::App app{"Energy-optimal EV routing with adaptive speeds"};
    app.require_subcommand(1);
    app.fallthrough();
    Globals g;
    app.add_option("--instance", g.instance, "instance file");
    app.add_option("--seed", g.seed, "64-bit seed for std::mt19937_64");
    app.add_option("--capacity-kwh", g.capacity_kwh, "battery capacity in kWh, overrides the instance");
    app.add_option("--potential", g.potential, "none | pi_d | pi_phi");
    app.add_option("--engine", g.engine, "tfp | astar | chasp, optionally engine:potential");
    app.add_option("--epsilon", g.epsilon, "relaxed dominance as a share of the capacity");
    app.add_option("--stop-degree", g.stop_degree, "stop contraction at this average core degree, 0 disables");
    app.add_option("--settled-limit", g.settled_limit, "witness search settled-label limit");
    app.add_option("--out", g.out, "output path, - for stdout");

    std::uint32_t vertices = 1000;
    auto* gen = app.add_subcommand("gen", "generate a synthetic instance");
    gen->add_option("--vertices", vertices, "number of vertices");

    auto* split = app.add_subcommand("split", "split sign-changing arcs");

    std::size_t count = 100;
    std::string model = "in_range";
    auto* sample = app.add_subcommand("sample", "sample queries");
    sample->add_option("--count", count, "queries, or sources for the rank model");
    sample->add_option("--model", model, "in_range | rank")->check(CLI::IsMember({"in_range", "rank"}));

    auto* prep = app.add_subcommand("preprocess", "contract an instance");

    std::string pre_path, queries_path;
    std::optional<Vertex> source, target;
    std::optional<double> soc_kwh;
    bool print_path = false;
    auto* query = app.add_subcommand("query", "answer queries");
    query->add_option("--pre", pre_path, "preprocessing file for chasp");
    query->add_option("--queries", queries_path, "query file");
    query->add_option("--source", source, "source vertex");
    query->add_option("--target", target, "target vertex");
    query->add_option("--soc-kwh", soc_kwh, "initial state of charge, default full");
    query->add_flag("--path", print_path, "print per-arc driving times instead of result rows");

    std::string engines = "tfp,astar:pi_d,astar:pi_phi";
    std::string summary_path;
    unsigned threads = 1;
    auto* bench = app.add_subcommand("bench", "benchmark engines on sampled queries");
    bench->add_option("--pre", pre_path, "preprocessing file for chasp");
    bench->add_option("--engines", engines, "comma-separated engine list, e.g. tfp,astar:pi_phi,chasp:pi_d@0.001");
    bench->add_option("--model", model, "in_range | rank")->check(CLI::IsMember({"in_range", "rank"}));
    bench->add_option("--count", count, "queries, or sources for the rank model");
    bench->add_option("--threads", threads, "worker threads");
    bench->add_option("--summary", summary_path, "summary CSV path, stderr if omitted");

    std::string steps = "inf,20,10,5,1";
    auto* oracle = app.add_subcommand("oracle", "sampled bicriteria search against continuous speeds");
    oracle->add_option("--count", count, "in-range queries");
    oracle->add_option("--steps", steps, "speed steps in km/h, inf for endpoints only");
    std::uint64_t label_limit = 0;
    oracle->add_option("--label-limit", label_limit, "abort a sampled query beyond this many labels, 0 = no limit");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e) == 0 ? kOk : kError;
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kError;
    }

    if (gen->parsed()) return cmd_gen(g, vertices);
    if (split->parsed()) return cmd_split(g);
    if (sample->parsed()) return cmd_sample(g, count, model);
    if (prep->parsed()) return cmd_preprocess(g);
    if (query->parsed()) return cmd_query(g, pre_path, queries_path, source, target, soc_kwh, print_path);
    if (bench->parsed()) return cmd_bench(g, pre_path, engines, model, count, threads, summary_path);
    if (oracle->parsed()) return cmd_oracle(g, count, steps, label_limit);
    return kError;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kError;
    }
}
