#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "evcas/tradeoff.hpp"

namespace evcas {

namespace {

bool negligible(double a, double b) { return b - a <= 1e-12 * std::max(1.0, std::abs(a)); }

bool same_piece(const TradeoffPiece& p, const TradeoffPiece& q) {
    auto close = [](double u, double v) { return std::abs(u - v) <= 1e-9 * std::max(1.0, std::max(std::abs(u), std::abs(v))); };
    if (p.alpha == 0.0 && q.alpha == 0.0) return close(p.gamma, q.gamma);
    return close(p.alpha, q.alpha) && close(p.beta, q.beta) && close(p.gamma, q.gamma);
}

bool same_delta(const DeltaPiece& p, const DeltaPiece& q) {
    if (p.kind != q.kind) return false;
    auto close = [](double u, double v) { return std::abs(u - v) <= 1e-12 * std::max(1.0, std::max(std::abs(u), std::abs(v))); };
    if (p.kind == DeltaKind::proportional) return close(p.lambda, q.lambda) && close(p.mu, q.mu);
    return close(p.value, q.value);
}

struct Builder {
    std::vector<TradeoffPiece> pieces;
    std::vector<DeltaPiece> deltas;

    void add(const TradeoffPiece& p, const DeltaPiece& d) {
        if (pieces.empty() || !same_piece(pieces.back(), p)) pieces.push_back(p);
        if (deltas.empty() || !same_delta(deltas.back(), d)) deltas.push_back(d);
    }

    LinkResult finish(double tmin, double tmax, double v_at_min, double fallback_delta) {
        LinkResult r;
        while (!pieces.empty() && pieces.back().alpha == 0.0 && pieces.size() > 1) {
            tmax = pieces.back().dom_start;
            pieces.pop_back();
        }
        if (pieces.empty() || negligible(tmin, tmax) || (pieces.size() == 1 && pieces[0].alpha == 0.0)) {
            r.cost = CF::constant(tmin, v_at_min);
            DeltaPiece d{tmin, DeltaKind::second_fixed, fallback_delta, 0.0, 1.0};
            if (!deltas.empty()) {
                d = deltas.front();
                d.dom_start = tmin;
                if (d.kind == DeltaKind::proportional) {
                    d.kind = DeltaKind::second_fixed;
                    d.value = deltas.front().eval(tmin);
                }
            }
            r.delta.pieces = {d};
            r.delta.tau_min = r.delta.tau_max = tmin;
            return r;
        }
        pieces.front().dom_start = tmin;
        deltas.front().dom_start = tmin;
        r.cost.pieces = std::move(pieces);
        r.cost.tau_min = tmin;
        r.cost.tau_max = tmax;
        r.delta.pieces = std::move(deltas);
        r.delta.tau_min = tmin;
        r.delta.tau_max = tmax;
        return r;
    }
};

TradeoffPiece fixed_partner(const TradeoffPiece& interior, double y, double vy, double start) {
    return {interior.alpha, interior.beta + y, interior.gamma + vy, start};
}

TradeoffPiece combined(const TradeoffPiece& p1, const TradeoffPiece& p2, double start) {
    const double s = std::cbrt(p1.alpha) + std::cbrt(p2.alpha);
    return {s * s * s, p1.beta + p2.beta, p1.gamma + p2.gamma, start};
}

DeltaPiece combined_delta(const TradeoffPiece& p1, const TradeoffPiece& p2, double start) {
    const double r = std::cbrt(p2.alpha / p1.alpha);
    return {start, DeltaKind::proportional, 0.0, p2.beta - r * p1.beta, 1.0 + r};
}

// position on piece q matching the slope of piece p at y
double partner_position(const TradeoffPiece& q, const TradeoffPiece& p, double y) {
    return q.beta + (y - p.beta) * std::cbrt(q.alpha / p.alpha);
}

LinkResult shift_link(const CF& c1, const CF& c2) {
    Builder b;
    if (c1.is_constant() && c2.is_constant()) {
        return b.finish(c1.tau_min + c2.tau_min, c1.tau_min + c2.tau_min, c1.value_at_min() + c2.value_at_min(),
                        c2.tau_min);
    }
    LinkResult r;
    if (c1.is_constant()) {
        r.cost = c2.shifted(c1.tau_min, c1.value_at_min());
        r.delta.pieces = {{r.cost.tau_min, DeltaKind::first_fixed, c1.tau_min, 0.0, 1.0}};
    } else {
        r.cost = c1.shifted(c2.tau_min, c2.value_at_min());
        r.delta.pieces = {{r.cost.tau_min, DeltaKind::second_fixed, c2.tau_min, 0.0, 1.0}};
    }
    r.delta.tau_min = r.cost.tau_min;
    r.delta.tau_max = r.cost.tau_max;
    return r;
}

}  // namespace

LinkResult link_single(const CF& c1, const CF& c2) {
    if (c1.is_constant() || c2.is_constant()) return shift_link(c1, c2);
    if (c1.size() != 1 || c2.size() != 1) throw std::invalid_argument("link_single expects single-piece functions");
    const TradeoffPiece& g1 = c1.pieces[0];
    const TradeoffPiece& g2 = c2.pieces[0];
    const double l1 = c1.tau_min, r1 = c1.tau_max, l2 = c2.tau_min, r2 = c2.tau_max;
    const double v1l = g1.eval(l1), v1r = g1.eval(r1), v2l = g2.eval(l2), v2r = g2.eval(r2);

    Builder b;
    struct Seg {
        double from, to;
        TradeoffPiece piece;
        DeltaPiece delta;
    };
    std::vector<Seg> segs;
    // first operand moves, second parked at y
    auto first_moves = [&](double from, double to, double y, double vy) {
        segs.push_back({from, to, fixed_partner(g1, y, vy, from), {from, DeltaKind::second_fixed, y, 0.0, 1.0}});
    };
    auto second_moves = [&](double from, double to, double y, double vy) {
        segs.push_back({from, to, fixed_partner(g2, y, vy, from), {from, DeltaKind::first_fixed, y, 0.0, 1.0}});
    };
    auto both_move = [&](double from, double to) {
        segs.push_back({from, to, combined(g1, g2, from), combined_delta(g1, g2, from)});
    };

    const double s1l = g1.deriv(l1), s1r = g1.deriv(r1), s2l = g2.deriv(l2), s2r = g2.deriv(r2);
    const bool first_steeper = s1l <= s2l;
    const double sAr = first_steeper ? s1r : s2r;
    const double sBl = first_steeper ? s2l : s1l;
    const double sBr = first_steeper ? s2r : s1r;
    auto a_moves = [&](double from, double to, bool b_at_left) {
        if (first_steeper)
            first_moves(from, to, b_at_left ? l2 : r2, b_at_left ? v2l : v2r);
        else
            second_moves(from, to, b_at_left ? l1 : r1, b_at_left ? v1l : v1r);
    };
    auto b_moves_a_right = [&](double from, double to) {
        if (first_steeper)
            second_moves(from, to, r1, v1r);
        else
            first_moves(from, to, r2, v2r);
    };
    const TradeoffPiece& gA = first_steeper ? g1 : g2;
    const TradeoffPiece& gB = first_steeper ? g2 : g1;
    const double rA = first_steeper ? r1 : r2;
    const double lB = first_steeper ? l2 : l1, rB = first_steeper ? r2 : r1;
    const double lo = l1 + l2, hi = r1 + r2;

    if (sAr <= sBl) {
        a_moves(lo, rA + lB, true);
        b_moves_a_right(rA + lB, hi);
    } else if (sAr <= sBr) {
        const double lstar = lB + partner_position(gA, gB, lB);
        const double rstar = rA + partner_position(gB, gA, rA);
        a_moves(lo, lstar, true);
        both_move(lstar, rstar);
        b_moves_a_right(rstar, hi);
    } else {
        const double lstar = lB + partner_position(gA, gB, lB);
        const double rstar = rB + partner_position(gA, gB, rB);
        a_moves(lo, lstar, true);
        both_move(lstar, rstar);
        a_moves(rstar, hi, false);
    }
    for (auto& s : segs) {
        if (s.to - s.from <= 1e-12 * std::max(1.0, std::abs(s.from))) continue;
        s.piece.dom_start = s.from;
        s.delta.dom_start = s.from;
        b.add(s.piece, s.delta);
    }
    return b.finish(lo, hi, v1l + v2l, l2);
}

bool is_convex(const CF& c, double tol) {
    for (std::size_t i = 0; i + 1 < c.pieces.size(); ++i) {
        const double x = c.pieces[i + 1].dom_start;
        const double dl = c.pieces[i].deriv(x);
        const double dr = c.pieces[i + 1].deriv(x);
        if (dr < dl - tol * std::max(1.0, std::abs(dl))) return false;
    }
    for (const auto& p : c.pieces)
        if (p.alpha == 0.0 && !c.is_constant() && &p != &c.pieces.back()) return false;
    return true;
}

namespace {

struct SlopeState {
    bool interior = false;
    std::size_t piece = 0;
    double x = 0.0;
    double value = 0.0;
};

struct Transition {
    double lambda;
    double y;
    std::size_t ref;
    SlopeState next;
};

std::vector<Transition> schedule(const CF& c, SlopeState& init) {
    std::vector<Transition> out;
    init = {false, 0, c.tau_min, c.value_at_min()};
    if (c.is_constant()) return out;
    const std::size_t k = c.pieces.size();
    out.push_back({c.pieces[0].deriv(c.tau_min), c.tau_min, 0, {true, 0, 0.0, 0.0}});
    for (std::size_t p = 0; p < k; ++p) {
        const double end = c.piece_end(p);
        const double leave = c.pieces[p].deriv(end);
        const double v = c.pieces[p].eval(end);
        out.push_back({std::max(leave, out.back().lambda), end, p, {false, p, end, v}});
        if (p + 1 < k) {
            const double enter = c.pieces[p + 1].deriv(end);
            out.push_back({std::max(enter, out.back().lambda), end, p + 1, {true, p + 1, 0.0, 0.0}});
        }
    }
    return out;
}

}  // namespace

LinkResult link_linear(const CF& c1, const CF& c2) {
    if (c1.is_constant() || c2.is_constant()) return shift_link(c1, c2);
    if (!is_convex(c1, 1e-7) || !is_convex(c2, 1e-7)) return link_naive(c1, c2);
    SlopeState st[2];
    const CF* fn[2] = {&c1, &c2};
    const std::vector<Transition> tr[2] = {schedule(c1, st[0]), schedule(c2, st[1])};
    std::size_t idx[2] = {0, 0};
    const double lo = c1.tau_min + c2.tau_min;
    const double hi = c1.tau_max + c2.tau_max;
    double X = lo;
    Builder b;
    auto emit = [&](double from) {
        if (st[0].interior && st[1].interior) {
            const auto& p1 = c1.pieces[st[0].piece];
            const auto& p2 = c2.pieces[st[1].piece];
            b.add(combined(p1, p2, from), combined_delta(p1, p2, from));
        } else if (st[0].interior) {
            b.add(fixed_partner(c1.pieces[st[0].piece], st[1].x, st[1].value, from),
                  {from, DeltaKind::second_fixed, st[1].x, 0.0, 1.0});
        } else if (st[1].interior) {
            b.add(fixed_partner(c2.pieces[st[1].piece], st[0].x, st[0].value, from),
                  {from, DeltaKind::first_fixed, st[0].x, 0.0, 1.0});
        }
    };
    while (idx[0] < tr[0].size() || idx[1] < tr[1].size()) {
        int f;
        if (idx[1] >= tr[1].size())
            f = 0;
        else if (idx[0] >= tr[0].size())
            f = 1;
        else
            f = tr[0][idx[0]].lambda <= tr[1][idx[1]].lambda ? 0 : 1;
        const int o = 1 - f;
        const Transition& t = tr[f][idx[f]];
        double xo;
        if (st[o].interior) {
            const auto& q = fn[o]->pieces[st[o].piece];
            xo = std::clamp(partner_position(q, fn[f]->pieces[t.ref], t.y), q.dom_start, fn[o]->piece_end(st[o].piece));
        } else {
            xo = st[o].x;
        }
        const double xend = t.y + xo;
        if (xend > X && !negligible(X, xend) && (st[0].interior || st[1].interior)) {
            emit(X);
            X = xend;
        }
        X = std::max(X, std::min(xend, hi));
        st[f] = t.next;
        ++idx[f];
    }
    return b.finish(lo, hi, c1.value_at_min() + c2.value_at_min(), c2.tau_min);
}

namespace {

std::vector<CF> induced(const CF& c) {
    if (c.is_constant()) return {c};
    std::vector<CF> out;
    for (std::size_t i = 0; i < c.pieces.size(); ++i) {
        CF s;
        s.pieces = {c.pieces[i]};
        s.tau_min = c.pieces[i].dom_start;
        s.tau_max = c.piece_end(i);
        if (s.tau_max - s.tau_min <= 1e-12 * std::max(1.0, std::abs(s.tau_min))) s = CF::constant(s.tau_min, c.pieces[i].eval(s.tau_min));
        out.push_back(std::move(s));
    }
    return out;
}

DeltaPiece delta_at(const DeltaRecord& d, double x) {
    auto it = std::upper_bound(d.pieces.begin(), d.pieces.end(), x,
                               [](double v, const DeltaPiece& p) { return v < p.dom_start; });
    if (it != d.pieces.begin()) --it;
    DeltaPiece p = *it;
    if (x > d.tau_max) {
        p.kind = DeltaKind::second_fixed;
        p.value = it->eval(d.tau_max);
    }
    return p;
}

void add_crossings(const TradeoffPiece& p, const TradeoffPiece& q, double a, double b, std::vector<double>& out) {
    auto d = [&](double x) { return p.eval(x) - q.eval(x); };
    std::vector<double> cuts{a};
    if (auto e = extreme_point(p, q); e && *e > a && *e < b) cuts.push_back(*e);
    cuts.push_back(b);
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
        double u = cuts[k], w = cuts[k + 1];
        double du = d(u), dw = d(w);
        if (!(du * dw < 0.0)) continue;
        for (int it = 0; it < 200 && w - u > 1e-15 * std::max(1.0, std::abs(u)); ++it) {
            const double m = 0.5 * (u + w);
            const double dm = d(m);
            if ((dm < 0.0) == (du < 0.0)) {
                u = m;
                du = dm;
            } else {
                w = m;
            }
        }
        out.push_back(0.5 * (u + w));
    }
}

}  // namespace

LinkResult link_naive(const CF& c1, const CF& c2) {
    if (c1.is_constant() || c2.is_constant()) return shift_link(c1, c2);
    const auto a = induced(c1);
    const auto bb = induced(c2);
    std::vector<LinkResult> cands;
    for (const auto& f : a)
        for (const auto& g : bb) cands.push_back(link_single(f, g));
    const double lo = c1.tau_min + c2.tau_min;
    const double hi = c1.tau_max + c2.tau_max;
    std::vector<double> pts{lo, hi};
    for (const auto& c : cands)
        for (double x : c.cost.breakpoints())
            if (x > lo && x < hi) pts.push_back(x);
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    Builder b;
    for (std::size_t k = 0; k + 1 < pts.size(); ++k) {
        const double u0 = pts[k], w0 = pts[k + 1];
        if (negligible(u0, w0)) continue;
        const double mid = 0.5 * (u0 + w0);
        std::vector<std::size_t> act;
        std::vector<TradeoffPiece> ps;
        for (std::size_t i = 0; i < cands.size(); ++i) {
            if (cands[i].cost.tau_min > u0 + 1e-12 * std::max(1.0, std::abs(u0))) continue;
            act.push_back(i);
            ps.push_back(cands[i].cost.piece_at(mid));
        }
        std::vector<double> cuts{u0, w0};
        for (std::size_t i = 0; i < ps.size(); ++i)
            for (std::size_t j = i + 1; j < ps.size(); ++j) add_crossings(ps[i], ps[j], u0, w0, cuts);
        std::sort(cuts.begin(), cuts.end());
        cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
        for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
            const double u = cuts[c], w = cuts[c + 1];
            if (negligible(u, w)) continue;
            const double m = 0.5 * (u + w);
            std::size_t best = 0;
            double bv = ps[0].eval(m);
            for (std::size_t i = 1; i < ps.size(); ++i) {
                const double v = ps[i].eval(m);
                if (v < bv - 1e-14 * std::max(1.0, std::abs(bv))) {
                    bv = v;
                    best = i;
                }
            }
            TradeoffPiece p = ps[best];
            p.dom_start = u;
            DeltaPiece d = delta_at(cands[act[best]].delta, m);
            d.dom_start = u;
            b.add(p, d);
        }
    }
    return b.finish(lo, hi, c1.value_at_min() + c2.value_at_min(), c2.tau_min);
}

CF link(const CF& c1, const CF& c2) { return link_linear(c1, c2).cost; }

}  // namespace evcas
