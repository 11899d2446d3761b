#include "evcas/graph.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace evcas {

ArcId Instance::add_arc(Vertex tail, Vertex head, CF cost, double length) {
    if (tail >= n_ || head >= n_) throw std::out_of_range("arc endpoint out of range");
    arcs.push_back({tail, head, std::move(cost), length});
    return static_cast<ArcId>(arcs.size() - 1);
}

void Instance::build_index() {
    out_off_.assign(n_ + 1, 0);
    in_off_.assign(n_ + 1, 0);
    for (const auto& a : arcs) {
        ++out_off_[a.tail + 1];
        ++in_off_[a.head + 1];
    }
    for (std::uint32_t v = 0; v < n_; ++v) {
        out_off_[v + 1] += out_off_[v];
        in_off_[v + 1] += in_off_[v];
    }
    out_.assign(arcs.size(), 0);
    in_.assign(arcs.size(), 0);
    std::vector<std::uint32_t> po(out_off_.begin(), out_off_.end() - 1), pi(in_off_.begin(), in_off_.end() - 1);
    for (ArcId i = 0; i < arcs.size(); ++i) {
        out_[po[arcs[i].tail]++] = i;
        in_[pi[arcs[i].head]++] = i;
    }
}

std::span<const ArcId> Instance::out_arcs(Vertex v) const {
    return {out_.data() + out_off_[v], out_.data() + out_off_[v + 1]};
}

std::span<const ArcId> Instance::in_arcs(Vertex v) const {
    return {in_.data() + in_off_[v], in_.data() + in_off_[v + 1]};
}

std::uint64_t Instance::fingerprint() const {
    std::uint64_t h = 1469598103934665603ull;
    auto mix = [&](const void* p, std::size_t n) {
        const auto* b = static_cast<const unsigned char*>(p);
        for (std::size_t i = 0; i < n; ++i) {
            h ^= b[i];
            h *= 1099511628211ull;
        }
    };
    mix(&capacity, sizeof capacity);
    mix(&n_, sizeof n_);
    for (const auto& a : arcs) {
        mix(&a.tail, sizeof a.tail);
        mix(&a.head, sizeof a.head);
        mix(&a.cost.tau_min, sizeof(double));
        mix(&a.cost.tau_max, sizeof(double));
        for (const auto& p : a.cost.pieces) mix(&p, sizeof p);
    }
    return h;
}

PhysicalCoeffs default_coeffs(double length) {
    // 1500 kg vehicle, drag 0.377 N/(m/s)^2, rolling coefficient 0.01
    return {0.377 * length / 3600.0, 14715.0 * length / 3600.0, 147.0 * length / 3600.0};
}

CF arc_from_physical(double length, double slope, double v_min, double v_max, const PhysicalCoeffs& k) {
    if (!(v_min > 0.0) || v_max < v_min || !(length > 0.0)) throw std::invalid_argument("invalid speed range or length");
    const double alpha = k.c1 * length * length;
    const double gamma = k.c2 * slope + k.c3;
    const double tmin = length / v_max;
    const double tmax = length / v_min;
    if (v_min == v_max) return CF::constant(tmin, alpha / (tmin * tmin) + gamma);
    return CF::single(alpha, 0.0, gamma, tmin, tmax);
}

SplitInfo split_sign_changing(const Instance& g) {
    SplitInfo out;
    out.original_vertices = g.vertex_count();
    out.instance = Instance(g.vertex_count(), g.capacity);
    for (ArcId i = 0; i < g.arcs.size(); ++i) {
        const Arc& a = g.arcs[i];
        const CF& c = a.cost;
        if (c.is_constant() || c.value_at_min() <= 0.0 || c.value_at_max() >= 0.0) {
            out.instance.add_arc(a.tail, a.head, c, a.length);
            out.origin.push_back(i);
            out.part.push_back(0);
            continue;
        }
        const double z = *inverse(c, 0.0);
        const double theta = 0.5 * c.tau_min;
        const Vertex mid = out.instance.add_vertex();
        CF first = c.restricted(c.tau_min, z).shifted(-theta, 0.0);
        CF second = c.restricted(z, c.tau_max).shifted(theta - z, 0.0);
        out.instance.add_arc(a.tail, mid, std::move(first), 0.0);
        out.instance.add_arc(mid, a.head, std::move(second), 0.0);
        out.origin.push_back(i);
        out.part.push_back(1);
        out.origin.push_back(i);
        out.part.push_back(2);
    }
    out.instance.build_index();
    return out;
}

Instance sample_multiarcs(const Instance& g, double step_kmh) {
    Instance out(g.vertex_count(), g.capacity);
    for (const auto& a : g.arcs) {
        const CF& c = a.cost;
        if (c.is_constant()) {
            out.add_arc(a.tail, a.head, c, a.length);
            continue;
        }
        const double len = a.length > 0.0 ? a.length : c.tau_min * (130.0 / 3.6);
        const double v_min = len / c.tau_max * 3.6;
        const double v_max = len / c.tau_min * 3.6;
        std::vector<double> times{c.tau_max};
        if (step_kmh > 0.0 && std::isfinite(step_kmh)) {
            for (int k = 1;; ++k) {
                const double v = v_min + k * step_kmh;
                if (v >= v_max - 1e-9) break;
                times.push_back(len / (v / 3.6));
            }
        }
        times.push_back(c.tau_min);
        for (double x : times) out.add_arc(a.tail, a.head, CF::constant(x, c.eval(x)), a.length);
    }
    out.build_index();
    return out;
}

InstanceStats instance_stats(const Instance& g) {
    InstanceStats s;
    if (g.arcs.empty()) return s;
    std::size_t neg = 0, var = 0;
    for (const auto& a : g.arcs) {
        if (a.cost.value_at_max() < 0.0) ++neg;
        if (!a.cost.is_constant()) ++var;
    }
    s.negative_share = static_cast<double>(neg) / g.arcs.size();
    s.nonconstant_share = static_cast<double>(var) / g.arcs.size();
    return s;
}

namespace {

std::vector<std::string> tokenize(const std::string& line) {
    std::vector<std::string> t;
    std::istringstream ss(line);
    std::string w;
    while (ss >> w) t.push_back(w);
    return t;
}

double parse_double(const std::string& s) {
    std::size_t used = 0;
    double v = std::stod(s, &used);
    if (used != s.size()) throw std::runtime_error("bad number '" + s + "'");
    return v;
}

std::uint32_t parse_uint(const std::string& s) {
    std::size_t used = 0;
    unsigned long v = std::stoul(s, &used);
    if (used != s.size() || v > 0xfffffffful) throw std::runtime_error("bad integer '" + s + "'");
    return static_cast<std::uint32_t>(v);
}

}  // namespace

void save_instance(const Instance& g, std::ostream& os) {
    char buf[64];
    os << "evcas 1\n";
    std::snprintf(buf, sizeof buf, "m %.17g\n", g.capacity);
    os << buf;
    os << "n " << g.vertex_count() << "\n";
    for (const auto& a : g.arcs) {
        os << "a " << a.tail << ' ' << a.head << ' ' << to_record(a.cost);
        if (a.length > 0.0) {
            std::snprintf(buf, sizeof buf, " l %.17g", a.length);
            os << buf;
        }
        os << '\n';
    }
}

Instance load_instance(std::istream& is) {
    Instance g;
    std::string line;
    std::size_t lineno = 0;
    bool header = false, have_m = false, have_n = false;
    double cap = 0.0;
    std::vector<Arc> arcs;
    std::uint32_t n = 0;
    while (std::getline(is, line)) {
        ++lineno;
        try {
            auto t = tokenize(line);
            if (t.empty() || t[0][0] == '#') continue;
            const std::string& tag = t[0];
            if (!header) {
                if (tag != "evcas" || t.size() != 2 || t[1] != "1") throw std::runtime_error("expected header 'evcas 1'");
                header = true;
            } else if (tag == "m") {
                if (t.size() != 2) throw std::runtime_error("expected 'm <capacity>'");
                cap = parse_double(t[1]);
                have_m = true;
            } else if (tag == "n") {
                if (t.size() != 2) throw std::runtime_error("expected 'n <vertex_count>'");
                n = parse_uint(t[1]);
                have_n = true;
            } else if (tag == "a") {
                if (!have_n) throw std::runtime_error("arc before vertex count");
                if (t.size() < 4) throw std::runtime_error("truncated arc record");
                Arc a;
                a.tail = parse_uint(t[1]);
                a.head = parse_uint(t[2]);
                if (a.tail >= n || a.head >= n) throw std::runtime_error("arc endpoint out of range");
                std::size_t pos = 3;
                a.cost = parse_record(t, pos);
                if (pos < t.size()) {
                    if (t[pos] != "l" || pos + 2 != t.size()) throw std::runtime_error("trailing tokens in arc record");
                    a.length = parse_double(t[pos + 1]);
                }
                if (!(a.cost.tau_min > 0.0)) throw std::runtime_error("arc driving time must be positive");
                arcs.push_back(std::move(a));
            } else {
                throw std::runtime_error("unknown record tag '" + tag + "'");
            }
        } catch (const std::exception& e) {
            throw std::runtime_error("line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    if (!header) throw std::runtime_error("missing header");
    if (!have_m || !have_n) throw std::runtime_error("missing capacity or vertex count");
    g = Instance(n, cap);
    g.arcs = std::move(arcs);
    g.build_index();
    return g;
}

void save_instance(const Instance& g, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot write " + path);
    save_instance(g, os);
}

Instance load_instance(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot read " + path);
    return load_instance(is);
}

std::vector<QuerySpec> load_queries(std::istream& is) {
    std::vector<QuerySpec> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        auto t = tokenize(line);
        if (t.empty() || t[0][0] == '#') continue;
        try {
            if (t[0] != "q") throw std::runtime_error("unknown record tag '" + t[0] + "'");
            if (t.size() != 4) throw std::runtime_error("expected 'q <s> <t> <b_s>'");
            out.push_back({parse_uint(t[1]), parse_uint(t[2]), parse_double(t[3])});
        } catch (const std::exception& e) {
            throw std::runtime_error("line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    return out;
}

void save_queries(const std::vector<QuerySpec>& qs, std::ostream& os) {
    char buf[96];
    for (const auto& q : qs) {
        std::snprintf(buf, sizeof buf, "q %u %u %.17g\n", q.s, q.t, q.b_s);
        os << buf;
    }
}

double soc_step(double b, double consumption, double capacity) {
    if (std::isinf(b) && b < 0) return b;
    if (consumption > b + value_tolerance(b)) return -kInf;
    return std::clamp(b - consumption, 0.0, capacity);
}

double soc_replay(const Instance& g, const std::vector<std::pair<ArcId, double>>& path, double b_s,
                  std::vector<double>* prefix) {
    double b = b_s;
    for (const auto& [a, x] : path) {
        b = soc_step(b, g.arcs[a].cost.eval(x), g.capacity);
        if (prefix) prefix->push_back(b);
        if (std::isinf(b)) break;
    }
    return b;
}

}  // namespace evcas
