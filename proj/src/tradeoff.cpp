#include "evcas/tradeoff.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace evcas {

namespace {
constexpr double kTimeTol = 1e-9;

bool tiny_span(double lo, double hi) { return hi - lo <= 1e-12 * std::max(1.0, std::abs(lo)); }
}  // namespace

double value_tolerance(double v) { return 1e-9 * std::max(1.0, std::abs(v)); }

double TradeoffPiece::eval(double x) const {
    if (alpha == 0.0) return gamma;
    const double d = x - beta;
    return alpha / (d * d) + gamma;
}

double TradeoffPiece::deriv(double x) const {
    if (alpha == 0.0) return 0.0;
    const double d = x - beta;
    return -2.0 * alpha / (d * d * d);
}

CF ConsumptionFunction::constant(double time, double value) {
    CF c;
    c.pieces.push_back({0.0, 0.0, value, time});
    c.tau_min = time;
    c.tau_max = time;
    return c;
}

CF ConsumptionFunction::single(double alpha, double beta, double gamma, double tmin, double tmax) {
    TradeoffPiece p{alpha, beta, gamma, tmin};
    if (alpha == 0.0 || tiny_span(tmin, tmax)) return constant(tmin, p.eval(tmin));
    CF c;
    c.pieces.push_back(p);
    c.tau_min = tmin;
    c.tau_max = tmax;
    return c;
}

std::size_t ConsumptionFunction::piece_index(double x) const {
    auto it = std::upper_bound(pieces.begin(), pieces.end(), x,
                               [](double v, const TradeoffPiece& p) { return v < p.dom_start; });
    if (it == pieces.begin()) return 0;
    return static_cast<std::size_t>(it - pieces.begin()) - 1;
}

double ConsumptionFunction::piece_end(std::size_t i) const {
    return i + 1 < pieces.size() ? pieces[i + 1].dom_start : tau_max;
}

double ConsumptionFunction::value_at_min() const { return pieces.front().eval(tau_min); }

double ConsumptionFunction::value_at_max() const { return pieces.back().eval(tau_max); }

double ConsumptionFunction::eval(double x) const {
    if (x < tau_min - kTimeTol) return kInf;
    if (x >= tau_max) return value_at_max();
    if (x <= tau_min) return value_at_min();
    return pieces[piece_index(x)].eval(x);
}

TradeoffPiece ConsumptionFunction::piece_at(double x) const {
    if (is_constant() || x >= tau_max) return {0.0, 0.0, value_at_max(), tau_max};
    return pieces[piece_index(x)];
}

double ConsumptionFunction::right_deriv(double x) const {
    if (is_constant() || x >= tau_max) return 0.0;
    return pieces[piece_index(std::max(x, tau_min))].deriv(std::max(x, tau_min));
}

std::vector<double> ConsumptionFunction::breakpoints() const {
    std::vector<double> out;
    out.reserve(pieces.size() + 1);
    for (const auto& p : pieces) out.push_back(p.dom_start);
    if (!is_constant()) out.push_back(tau_max);
    return out;
}

CF ConsumptionFunction::shifted(double dt, double de) const {
    CF c = *this;
    for (auto& p : c.pieces) {
        p.beta += dt;
        p.gamma += de;
        p.dom_start += dt;
    }
    c.tau_min += dt;
    c.tau_max += dt;
    return c;
}

CF ConsumptionFunction::restricted(double lo, double hi) const {
    lo = std::max(lo, tau_min);
    hi = std::min(hi, tau_max);
    if (hi <= lo || tiny_span(lo, hi)) return constant(lo, eval(lo));
    CF c;
    const std::size_t i0 = piece_index(lo);
    std::size_t i1 = piece_index(hi);
    while (i1 > i0 && pieces[i1].dom_start >= hi) --i1;
    for (std::size_t i = i0; i <= i1; ++i) c.pieces.push_back(pieces[i]);
    c.pieces.front().dom_start = lo;
    c.tau_min = lo;
    c.tau_max = hi;
    return c;
}

bool ConsumptionFunction::valid(std::string* why) const {
    auto fail = [&](const char* msg) {
        if (why) *why = msg;
        return false;
    };
    if (pieces.empty()) return fail("no pieces");
    if (!(tau_min <= tau_max)) return fail("tau_min > tau_max");
    if (std::abs(pieces.front().dom_start - tau_min) > kTimeTol) return fail("first piece does not start at tau_min");
    for (std::size_t i = 0; i < pieces.size(); ++i) {
        const auto& p = pieces[i];
        if (p.alpha < 0.0) return fail("negative alpha");
        const double end = piece_end(i);
        if (end < p.dom_start) return fail("pieces out of order");
        if (p.alpha > 0.0 && !(p.dom_start > p.beta)) return fail("piece domain touches pole");
        if (i + 1 < pieces.size()) {
            const double l = p.eval(end);
            const double r = pieces[i + 1].eval(end);
            if (std::abs(l - r) > 1e-7 * std::max(1.0, std::abs(l))) return fail("discontinuous junction");
        }
    }
    return true;
}

std::optional<double> inverse(const CF& c, double e) {
    if (c.is_constant()) {
        if (std::abs(e - c.value_at_min()) <= value_tolerance(e)) return c.tau_min;
        return std::nullopt;
    }
    const double hi = c.value_at_min();
    const double lo = c.value_at_max();
    if (e > hi + value_tolerance(hi) || e < lo - value_tolerance(lo)) return std::nullopt;
    if (e >= hi) return c.tau_min;
    if (e <= lo) return c.tau_max;
    std::size_t a = 0, b = c.pieces.size() - 1;
    while (a < b) {
        const std::size_t m = (a + b + 1) / 2;
        if (c.pieces[m].eval(c.pieces[m].dom_start) >= e)
            a = m;
        else
            b = m - 1;
    }
    const auto& p = c.pieces[a];
    const double end = c.piece_end(a);
    if (p.alpha == 0.0) return p.dom_start;
    if (e - p.gamma <= 0.0) return end;
    const double x = p.beta + std::sqrt(p.alpha / (e - p.gamma));
    return std::clamp(x, p.dom_start, end);
}

double DeltaPiece::eval(double x) const {
    switch (kind) {
        case DeltaKind::second_fixed: return value;
        case DeltaKind::first_fixed: return x - value;
        case DeltaKind::proportional: return x - (x - lambda) / mu;
    }
    return value;
}

double DeltaRecord::eval(double x) const {
    x = std::clamp(x, tau_min, tau_max);
    auto it = std::upper_bound(pieces.begin(), pieces.end(), x,
                               [](double v, const DeltaPiece& p) { return v < p.dom_start; });
    if (it != pieces.begin()) --it;
    return it->eval(x);
}

std::optional<double> extreme_point(const TradeoffPiece& p1, const TradeoffPiece& p2) {
    if (p1.alpha <= 0.0 || p2.alpha <= 0.0 || p1.alpha == p2.alpha) return std::nullopt;
    const double r = std::cbrt(p2.alpha / p1.alpha);
    if (r == 1.0) return std::nullopt;
    return (p2.beta - p1.beta * r) / (1.0 - r);
}

double max_piece_difference(const TradeoffPiece& p, const TradeoffPiece& q, double a, double b) {
    double m = p.eval(a) - q.eval(a);
    if (std::isinf(b)) return m;
    m = std::max(m, p.eval(b) - q.eval(b));
    if (auto e = extreme_point(p, q); e && *e > a && *e < b) m = std::max(m, p.eval(*e) - q.eval(*e));
    return m;
}

namespace {

void append_breakpoints(const CF& f, double lo, double hi, std::vector<double>& out) {
    for (const auto& p : f.pieces)
        if (p.dom_start > lo && p.dom_start < hi) out.push_back(p.dom_start);
    if (!f.is_constant() && f.tau_max > lo && f.tau_max < hi) out.push_back(f.tau_max);
}

// lo, the merged breakpoints of s and c inside (lo, hi), and hi; reuses a per-thread buffer
const std::vector<double>& elementary(const CF& s, const CF& c, double lo, double hi) {
    thread_local std::vector<double> pts;
    pts.clear();
    pts.push_back(lo);
    append_breakpoints(s, lo, hi, pts);
    const std::size_t mid = pts.size();
    append_breakpoints(c, lo, hi, pts);
    std::inplace_merge(pts.begin() + 1, pts.begin() + static_cast<std::ptrdiff_t>(mid), pts.end());
    pts.push_back(hi);
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    return pts;
}

// cheap necessary condition for dominance at x, where the trimmed function takes value v
bool point_may_dominate(const CF& s, double x, double v, double slack) {
    return s.eval(x) <= v + slack + 2.0 * value_tolerance(v);
}

bool interval_dominated(const CF& s, const CF& c, double a, double b, double slack) {
    if (s.tau_min > a + kTimeTol) return false;
    const double mid = 0.5 * (a + b);
    const TradeoffPiece p = s.piece_at(mid);
    const TradeoffPiece q = c.piece_at(mid);
    return max_piece_difference(p, q, a, b) <= slack + value_tolerance(q.eval(a));
}

}  // namespace

bool dominates_pairwise(const CF& c1, const CF& c2, double slack) {
    if (c1.tau_min > c2.tau_min + kTimeTol) return false;
    const double from = c2.tau_min;
    const double last = std::max(c1.tau_max, c2.tau_max);
    if (last > from) {
        const auto& pts = elementary(c1, c2, from, last);
        for (std::size_t k = 0; k + 1 < pts.size(); ++k)
            if (!interval_dominated(c1, c2, pts[k], pts[k + 1], slack)) return false;
    }
    const double x = std::max(last, from);
    return c1.eval(x) - c2.eval(x) <= slack + value_tolerance(c2.eval(x));
}

std::optional<CF> trim_dominated(const CF& c, const std::vector<const CF*>& settled, double slack, TrimStats* stats) {
    if (settled.empty()) return c;
    std::uint64_t checks = 0;
    auto finish = [&](std::optional<CF> r) {
        if (stats) stats->checks += checks;
        return r;
    };
    double lo = c.tau_min;
    const double hi = c.tau_max;
    auto tail_dominated = [&](const CF& s) {
        ++checks;
        if (s.tau_min > hi + kTimeTol) return false;
        const double v = c.value_at_max();
        return s.eval(hi) <= v + slack + value_tolerance(v);
    };
    bool changed = lo < hi;
    double at_lo = c.value_at_min();
    while (changed) {
        changed = false;
        for (const CF* s : settled) {
            if (lo >= hi) break;
            if (s->tau_min > lo + kTimeTol) continue;
            if (!point_may_dominate(*s, lo, at_lo, slack)) continue;
            const auto& pts = elementary(*s, c, lo, hi);
            double y = lo;
            for (std::size_t k = 0; k + 1 < pts.size(); ++k) {
                ++checks;
                if (!interval_dominated(*s, c, pts[k], pts[k + 1], slack)) break;
                y = pts[k + 1];
            }
            if (y > lo) {
                lo = y;
                at_lo = c.eval(lo);
                changed = true;
            }
        }
    }
    if (lo >= hi) {
        for (const CF* s : settled)
            if (tail_dominated(*s)) return finish(std::nullopt);
        return finish(c.restricted(hi, hi));
    }
    double r = kInf;
    double at_r = c.value_at_max();
    changed = true;
    while (changed) {
        changed = false;
        for (const CF* s : settled) {
            if (std::isinf(r)) {
                if (!tail_dominated(*s)) continue;
                r = hi;
                changed = true;
            }
            if (!point_may_dominate(*s, r, at_r, slack)) continue;
            const auto& pts = elementary(*s, c, lo, r);
            const double r0 = r;
            for (std::size_t k = pts.size() - 1; k > 0; --k) {
                ++checks;
                if (!interval_dominated(*s, c, pts[k - 1], pts[k], slack)) break;
                r = pts[k - 1];
                changed = true;
            }
            if (r != r0) at_r = c.eval(r);
            if (r <= lo) return finish(std::nullopt);
        }
    }
    return finish(c.restricted(lo, std::isinf(r) ? hi : r));
}

std::optional<CF> clamp_battery(const CF& c, double capacity, double target_lb) {
    if (std::isinf(target_lb) || std::isnan(target_lb)) return std::nullopt;
    const double cap = std::min(capacity, capacity - target_lb);
    if (c.value_at_max() > cap + value_tolerance(cap)) return std::nullopt;
    double lo = c.tau_min;
    if (c.value_at_min() > cap) {
        auto x = inverse(c, cap);
        lo = x ? *x : c.tau_max;
    }
    CF cc = lo > c.tau_min ? c.restricted(lo, c.tau_max) : c;
    if (cc.value_at_max() < 0.0) {
        if (cc.value_at_min() <= 0.0) return CF::constant(cc.tau_min, 0.0);
        auto z = inverse(cc, 0.0);
        cc = cc.restricted(cc.tau_min, z ? *z : cc.tau_max);
    }
    return cc;
}

std::string to_record(const CF& c) {
    char buf[128];
    std::string out;
    if (c.is_constant()) {
        std::snprintf(buf, sizeof buf, "k %.17g %.17g", c.tau_min, c.value_at_min());
        return buf;
    }
    std::snprintf(buf, sizeof buf, "f %.17g %.17g %zu", c.tau_min, c.tau_max, c.pieces.size());
    out = buf;
    for (const auto& p : c.pieces) {
        std::snprintf(buf, sizeof buf, " %.17g %.17g %.17g %.17g", p.alpha, p.beta, p.gamma, p.dom_start);
        out += buf;
    }
    return out;
}

CF parse_record(const std::vector<std::string>& tokens, std::size_t& pos) {
    auto num = [&]() {
        if (pos >= tokens.size()) throw std::runtime_error("truncated cost record");
        std::size_t used = 0;
        double v = std::stod(tokens[pos], &used);
        if (used != tokens[pos].size()) throw std::runtime_error("bad number '" + tokens[pos] + "'");
        ++pos;
        return v;
    };
    if (pos >= tokens.size()) throw std::runtime_error("missing cost record");
    const std::string tag = tokens[pos++];
    if (tag == "k") {
        const double t = num();
        const double e = num();
        return CF::constant(t, e);
    }
    if (tag == "f") {
        CF c;
        c.tau_min = num();
        c.tau_max = num();
        const double k = num();
        if (k < 1 || k != std::floor(k)) throw std::runtime_error("bad piece count");
        for (int i = 0; i < static_cast<int>(k); ++i) {
            TradeoffPiece p;
            p.alpha = num();
            p.beta = num();
            p.gamma = num();
            p.dom_start = num();
            c.pieces.push_back(p);
        }
        std::string why;
        if (!c.valid(&why)) throw std::runtime_error("invalid consumption function: " + why);
        return c;
    }
    throw std::runtime_error("unknown cost record tag '" + tag + "'");
}

}  // namespace evcas
