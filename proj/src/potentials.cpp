#include "evcas/potentials.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <stdexcept>

#include "evcas/heap.hpp"

namespace evcas {

namespace {

double soc_tol(double b) { return 1e-9 * std::max(1.0, std::abs(b)); }

}  // namespace

double PwlBound::eval(double b) const {
    if (pts.empty()) return kInf;
    if (b < pts.front().first - soc_tol(pts.front().first)) return kInf;
    if (b <= pts.front().first) return pts.front().second;
    if (b >= pts.back().first) return pts.back().second;
    auto it = std::upper_bound(pts.begin(), pts.end(), b, [](double v, const auto& p) { return v < p.first; });
    const auto& hi = *it;
    const auto& lo = *(it - 1);
    const double w = (b - lo.first) / (hi.first - lo.first);
    return lo.second + w * (hi.second - lo.second);
}

bool PwlBound::valid(std::string* why) const {
    auto fail = [&](const char* m) {
        if (why) *why = m;
        return false;
    };
    double prev_slope = -kInf;
    for (std::size_t i = 1; i < pts.size(); ++i) {
        const double db = pts[i].first - pts[i - 1].first;
        const double dx = pts[i].second - pts[i - 1].second;
        if (!(db > 0.0)) return fail("breakpoints not strictly increasing in b");
        if (dx > 1e-9 * std::max(1.0, std::abs(pts[i].second))) return fail("bound increases");
        const double s = dx / db;
        if (s < prev_slope - 1e-9 * std::max(1.0, std::abs(prev_slope))) return fail("bound not convex");
        prev_slope = s;
    }
    return true;
}

std::string PwlBound::dump() const {
    std::string s;
    char buf[80];
    for (const auto& [b, x] : pts) {
        std::snprintf(buf, sizeof buf, "%s(%.6g,%.6g)", s.empty() ? "" : " ", b, x);
        s += buf;
    }
    return s;
}

ReduceParams ReduceParams::for_capacity(double capacity_wh) {
    const int k = static_cast<int>(std::floor(std::log2(std::max(capacity_wh, 1e-9) / 1000.0)));
    return {std::ldexp(1.0, 10 - k), std::ldexp(1.0, 17 - k), 1.0 / 16.0};
}

double default_convert_error(double capacity_wh) {
    const int k = static_cast<int>(std::floor(std::log2(std::max(capacity_wh, 1e-9) / 1000.0)));
    return std::ldexp(1.0, 15 - k);
}

namespace {

struct Tangent {
    double x;
    double b;
    double d;  // db/dx
};

Tangent tangent_at(const CF& c, double x, std::size_t piece) {
    const TradeoffPiece& p = c.pieces[piece];
    return {x, p.eval(x), p.deriv(x)};
}

void refine(const CF& c, const Tangent& a, const Tangent& q, double err, int depth,
            std::vector<std::pair<double, double>>& out) {
    // a lies at the larger time (smaller energy)
    if (a.d - q.d <= 1e-15 * std::max(std::abs(a.d), std::abs(q.d))) return;
    double xr = (q.b - a.b + a.d * a.x - q.d * q.x) / (a.d - q.d);
    xr = std::clamp(xr, q.x, a.x);
    const double br = a.b + a.d * (xr - a.x);
    const double gap = c.eval(xr) - br;
    if (gap <= err || depth > 40 || xr <= q.x || xr >= a.x) {
        out.emplace_back(br, xr);
        return;
    }
    const Tangent m = tangent_at(c, xr, c.piece_index(xr));
    refine(c, a, m, err, depth + 1, out);
    out.emplace_back(m.b, m.x);
    refine(c, m, q, err, depth + 1, out);
}

}  // namespace

PwlBound convert(const CF& c, double err) {
    if (c.is_constant()) return PwlBound::point(c.value_at_min(), c.tau_min);
    const Tangent p = tangent_at(c, c.tau_max, c.size() - 1);
    const Tangent q = tangent_at(c, c.tau_min, 0);
    std::vector<std::pair<double, double>> pts;
    pts.emplace_back(p.b, p.x);
    refine(c, p, q, err, 0, pts);
    pts.emplace_back(q.b, q.x);
    return lower_hull(std::move(pts));
}

PwlBound lower_hull(std::vector<std::pair<double, double>> pts) {
    std::sort(pts.begin(), pts.end());
    std::vector<std::pair<double, double>> h;
    for (const auto& p : pts) {
        if (!h.empty() && p.first == h.back().first) continue;  // sorted: smaller x kept
        while (h.size() >= 2) {
            const auto& o = h[h.size() - 2];
            const auto& a = h.back();
            const double cross = (a.first - o.first) * (p.second - o.second) - (a.second - o.second) * (p.first - o.first);
            if (cross > 0.0) break;
            h.pop_back();
        }
        h.push_back(p);
    }
    // the bound is constant beyond its last breakpoint, so stop at the minimum
    std::size_t best = 0;
    for (std::size_t i = 1; i < h.size(); ++i)
        if (h[i].second < h[best].second) best = i;
    h.resize(h.empty() ? 0 : best + 1);
    return PwlBound{std::move(h)};
}

PwlBound link_pwl(const PwlBound& a, const PwlBound& b) {
    if (a.empty() || b.empty()) return {};
    PwlBound r;
    double cb = a.pts.front().first + b.pts.front().first;
    double cx = a.pts.front().second + b.pts.front().second;
    r.pts.emplace_back(cb, cx);
    std::size_t i = 1, j = 1;
    while (i < a.pts.size() || j < b.pts.size()) {
        bool take_a;
        if (i >= a.pts.size()) {
            take_a = false;
        } else if (j >= b.pts.size()) {
            take_a = true;
        } else {
            const double dba = a.pts[i].first - a.pts[i - 1].first, dxa = a.pts[i].second - a.pts[i - 1].second;
            const double dbb = b.pts[j].first - b.pts[j - 1].first, dxb = b.pts[j].second - b.pts[j - 1].second;
            take_a = dxa * dbb <= dxb * dba;
        }
        if (take_a) {
            cb += a.pts[i].first - a.pts[i - 1].first;
            cx += a.pts[i].second - a.pts[i - 1].second;
            ++i;
        } else {
            cb += b.pts[j].first - b.pts[j - 1].first;
            cx += b.pts[j].second - b.pts[j - 1].second;
            ++j;
        }
        r.pts.emplace_back(cb, cx);
    }
    return r;
}

PwlBound reduce_breakpoints(const PwlBound& f, const ReduceParams& r) {
    if (r.dx <= 0.0 && r.db <= 0.0 && r.ds <= 0.0) return f;
    std::vector<std::pair<double, double>> out;
    auto close = [&](const std::pair<double, double>& p, const std::pair<double, double>& q) {
        return std::abs(p.second - q.second) < r.dx || std::abs(q.first - p.first) < r.db;
    };
    for (const auto& pt : f.pts) {
        out.push_back(pt);
        for (;;) {
            const std::size_t n = out.size();
            if (n >= 2 && close(out[n - 2], out[n - 1])) {
                out[n - 2].second = std::min(out[n - 2].second, out[n - 1].second);
                out.pop_back();
                continue;
            }
            if (n >= 3) {
                const auto &p = out[n - 3], &q = out[n - 2], &s = out[n - 1];
                const double s1 = (q.second - p.second) / (q.first - p.first);
                const double s2 = (s.second - q.second) / (s.first - q.first);
                if (std::abs(s1 - s2) < r.ds) {
                    const double sm = std::min(s1, s2);
                    const double bstar = sm < 0.0 ? p.first + (s.second - p.second) / sm : p.first;
                    const std::pair<double, double> np{std::max(bstar, p.first), s.second};
                    out.pop_back();
                    out.pop_back();
                    if (np.first <= p.first) {
                        out.back().second = std::min(out.back().second, np.second);
                    } else {
                        out.push_back(np);
                    }
                    continue;
                }
            }
            break;
        }
    }
    return lower_hull(std::move(out));
}

PwlBound merge_pwl(const PwlBound& a, const PwlBound& b, const ReduceParams& r) {
    if (a.empty()) return reduce_breakpoints(b, r);
    if (b.empty()) return reduce_breakpoints(a, r);
    std::vector<double> bs;
    bs.reserve(a.pts.size() + b.pts.size());
    for (const auto& p : a.pts) bs.push_back(p.first);
    for (const auto& p : b.pts) bs.push_back(p.first);
    std::sort(bs.begin(), bs.end());
    bs.erase(std::unique(bs.begin(), bs.end()), bs.end());
    std::vector<std::pair<double, double>> pts;
    pts.reserve(2 * bs.size());
    double prev_b = 0.0, prev_diff = 0.0;
    bool have_prev = false;
    for (double v : bs) {
        const double ya = a.eval(v), yb = b.eval(v);
        const double y = std::min(ya, yb);
        if (y == kInf) continue;
        if (ya < kInf && yb < kInf) {
            const double diff = ya - yb;
            if (have_prev && ((prev_diff < 0.0 && diff > 0.0) || (prev_diff > 0.0 && diff < 0.0))) {
                const double w = prev_diff / (prev_diff - diff);
                const double cb = prev_b + w * (v - prev_b);
                pts.emplace_back(cb, std::min(a.eval(cb), b.eval(cb)));
            }
            prev_b = v;
            prev_diff = diff;
            have_prev = true;
        }
        pts.emplace_back(v, y);
    }
    PwlBound m = lower_hull(std::move(pts));
    return reduce_breakpoints(m, r);
}

BoundGraph::BoundGraph(const SearchGraph& g, double convert_err) : n_(g.vertex_count()), capacity_(g.capacity()) {
    arcs_.reserve(g.arcs().size());
    for (const SearchArc& a : g.arcs()) {
        BoundArc b;
        b.tail = a.tail;
        b.head = a.head;
        b.tau_min = a.first->tau_min;
        b.c_min = a.first->value_at_max();
        b.phi = convert(*a.first, convert_err);
        if (a.second) {
            b.tau_min += a.second->tau_min;
            b.c_min += a.second->value_at_max();
            b.phi = link_pwl(b.phi, convert(*a.second, convert_err));
        }
        arcs_.push_back(std::move(b));
    }
    in_off_.assign(n_ + 1, 0);
    for (const auto& a : arcs_) ++in_off_[a.head + 1];
    for (std::uint32_t v = 0; v < n_; ++v) in_off_[v + 1] += in_off_[v];
    in_.resize(arcs_.size());
    std::vector<std::uint32_t> pos(in_off_.begin(), in_off_.end() - 1);
    for (std::uint32_t k = 0; k < arcs_.size(); ++k) in_[pos[arcs_[k].head]++] = k;
}

std::span<const std::uint32_t> BoundGraph::in_arcs(Vertex v) const {
    return {in_.data() + in_off_[v], in_off_[v + 1] - in_off_[v]};
}

PiD::PiD(const BoundGraph& g, Vertex t, const std::vector<std::uint8_t>* arc_mask)
    : time_(g.vertex_count(), kInf), energy_(g.vertex_count(), kInf) {
    const double M = g.capacity();
    const std::uint32_t n = g.vertex_count();
    std::vector<std::uint32_t> updates(n, 0);
    std::vector<std::uint8_t> queued(n, 0);
    std::deque<Vertex> fifo{t};
    energy_[t] = 0.0;
    queued[t] = 1;
    while (!fifo.empty()) {
        const Vertex v = fifo.front();
        fifo.pop_front();
        queued[v] = 0;
        ++scans;
        for (std::uint32_t ai : g.in_arcs(v)) {
            if (arc_mask && !(*arc_mask)[ai]) continue;
            const BoundArc& a = g.arcs()[ai];
            const double e = a.c_min + energy_[v];
            if (e > M + soc_tol(M)) continue;
            if (e < energy_[a.tail] - soc_tol(e)) {
                energy_[a.tail] = e;
                if (++updates[a.tail] > n + 1) throw std::runtime_error("negative energy cycle in instance");
                if (!queued[a.tail]) {
                    queued[a.tail] = 1;
                    fifo.push_back(a.tail);
                }
            }
        }
    }
    IndexedHeap<double, 4> heap(n);
    time_[t] = 0.0;
    heap.push_or_update(t, 0.0);
    while (!heap.empty()) {
        const Vertex v = heap.pop();
        for (std::uint32_t ai : g.in_arcs(v)) {
            if (arc_mask && !(*arc_mask)[ai]) continue;
            const BoundArc& a = g.arcs()[ai];
            if (energy_[a.tail] == kInf) continue;
            const double d = time_[v] + a.tau_min;
            if (d < time_[a.tail]) {
                time_[a.tail] = d;
                heap.push_or_update(a.tail, d);
            }
        }
    }
}

double PiD::at(Vertex v, double b) const {
    return b < energy_[v] - soc_tol(energy_[v]) ? kInf : time_[v];
}

double PiD::key(Vertex v, const CF& c) const {
    return time_[v] == kInf ? kInf : c.tau_min + time_[v];
}

namespace {

bool improves(const PwlBound& nw, const PwlBound& old) {
    if (nw.empty()) return false;
    if (old.empty()) return true;
    if (nw.min_soc() < old.min_soc() - soc_tol(old.min_soc())) return true;
    auto check = [&](double b) {
        const double o = old.eval(b);
        return nw.eval(b) < o - 1e-9 * std::max(1.0, std::abs(o));
    };
    for (const auto& p : nw.pts)
        if (check(p.first)) return true;
    for (const auto& p : old.pts)
        if (check(p.first)) return true;
    return false;
}

}  // namespace

PiPhi::PiPhi(const BoundGraph& g, Vertex t, const ReduceParams& r, const std::vector<std::uint8_t>* arc_mask)
    : capacity_(g.capacity()), phi_(g.vertex_count()) {
    const double M = g.capacity();
    IndexedHeap<double, 4> heap(g.vertex_count());
    phi_[t] = PwlBound::point(0.0, 0.0);
    heap.push_or_update(t, 0.0);
    while (!heap.empty()) {
        const Vertex v = heap.pop();
        ++scans;
        for (std::uint32_t ai : g.in_arcs(v)) {
            if (arc_mask && !(*arc_mask)[ai]) continue;
            const BoundArc& a = g.arcs()[ai];
            PwlBound cand = link_pwl(a.phi, phi_[v]);
            if (cand.empty() || cand.min_soc() > M + soc_tol(M)) continue;
            PwlBound merged = merge_pwl(phi_[a.tail], cand, r);
            if (!improves(merged, phi_[a.tail])) continue;
            phi_[a.tail] = std::move(merged);
            heap.push_or_update(a.tail, phi_[a.tail].min_time());
        }
    }
}

double bound_key(const PwlBound& f, const CF& c, double capacity) {
    if (f.empty()) return kInf;
    if (c.is_constant()) {
        const double v = f.eval(capacity - c.value_at_min());
        return v == kInf ? kInf : c.tau_min + v;
    }
    auto h = [&](double x) {
        const double v = f.eval(capacity - c.eval(x));
        return v == kInf ? kInf : x + v;
    };
    std::vector<double> xs = c.breakpoints();
    for (const auto& p : f.pts) {
        auto x = inverse(c, capacity - p.first);
        if (x) xs.push_back(*x);
    }
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
    double best = kInf;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        best = std::min(best, h(xs[i]));
        if (i + 1 == xs.size()) break;
        const double lo = xs[i], hi = xs[i + 1];
        const double mid = 0.5 * (lo + hi);
        const double bm = capacity - c.eval(mid);
        if (bm < f.min_soc() || bm >= f.pts.back().first) continue;
        auto it = std::upper_bound(f.pts.begin(), f.pts.end(), bm, [](double v, const auto& p) { return v < p.first; });
        const double m = (it->second - (it - 1)->second) / (it->first - (it - 1)->first);
        const TradeoffPiece& p = c.pieces[c.piece_index(mid)];
        if (m >= 0.0 || p.alpha <= 0.0) continue;
        const double xs_ = p.beta + std::cbrt(-2.0 * p.alpha * m);
        if (xs_ > lo && xs_ < hi) best = std::min(best, h(xs_));
    }
    return best;
}

double PiPhi::key(Vertex v, const CF& c) const { return bound_key(phi_[v], c, capacity_); }

}  // namespace evcas
