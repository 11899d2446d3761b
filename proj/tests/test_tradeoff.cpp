#include <doctest.h>

#include <cmath>
#include <random>

#include "evcas/tradeoff.hpp"
#include "oracles/oracles.hpp"

using namespace evcas;

namespace {

CF golden_first() { return CF::single(4.0, 1.0, -1.0, 2.0, 4.0); }
CF golden_second() { return CF::single(0.5, 1.0, 1.0, 2.0, 5.0); }

double max_grid_gap(const CF& a, const CF& b, double step) {
    double m = 0.0;
    const double lo = std::min(a.tau_min, b.tau_min);
    const double hi = std::max(a.tau_max, b.tau_max) + 0.5;
    for (double x = lo; x <= hi; x += step) {
        const double u = a.eval(x), v = b.eval(x);
        if (std::isinf(u) != std::isinf(v)) return kInf;
        if (!std::isinf(u)) m = std::max(m, std::abs(u - v) / std::max(1.0, std::abs(v)));
    }
    return m;
}

}  // namespace

TEST_CASE("eval follows the single tradeoff piece and its flat extensions") {
    const CF c = CF::single(3.0, 1.0, 1.0, 2.0, 6.0);
    CHECK(c.eval(2.0) == doctest::Approx(4.0));
    CHECK(std::isinf(c.eval(1.5)));
    CHECK(c.eval(10.0) == doctest::Approx(1.12));
    CHECK(c.eval(10.0) == c.eval(6.0));
}

TEST_CASE("inverse recovers driving times") {
    const CF c = CF::single(3.0, 1.0, 1.0, 2.0, 6.0);
    CHECK(*inverse(c, 4.0) == doctest::Approx(2.0));
    CHECK(*inverse(c, 1.12) == doctest::Approx(6.0));
    CHECK_FALSE(inverse(c, 5.0).has_value());
    CHECK_FALSE(inverse(c, 1.0).has_value());

    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 1000; ++i) {
        const CF f = oracle::random_convex(rng, 1 + i % 6);
        const double e = f.value_at_max() + u(rng) * (f.value_at_min() - f.value_at_max());
        const auto x = inverse(f, e);
        REQUIRE(x.has_value());
        CHECK(std::abs(f.eval(*x) - e) <= 1e-9 * std::max(1.0, std::abs(e)));
    }
}

TEST_CASE("golden three-piece link") {
    const CF c1 = golden_first(), c2 = golden_second();
    const LinkResult r = link_single(c1, c2);
    REQUIRE(r.cost.size() == 3);
    CHECK(r.cost.tau_min == doctest::Approx(4.0).epsilon(1e-12));
    CHECK(r.cost.tau_max == doctest::Approx(9.0).epsilon(1e-12));
    CHECK(std::abs(r.cost.pieces[1].dom_start - 5.0) <= 1e-9);
    CHECK(std::abs(r.cost.pieces[2].dom_start - 6.5) <= 1e-9);
    CHECK(std::abs(r.cost.eval(4.0) - (c1.eval(2.0) + c2.eval(2.0))) <= 1e-9);
    CHECK(std::abs(r.cost.eval(9.0) - (c1.eval(4.0) + c2.eval(5.0))) <= 1e-9);
    CHECK(r.cost.valid());
    // at total time 6.5 the first function runs 4 and the second 2.5
    CHECK(r.delta.eval(6.5) == doctest::Approx(2.5));
    CHECK(oracle::brute_link(c1, c2, 6.5) == doctest::Approx(c1.eval(4.0) + c2.eval(2.5)));
    const LinkResult lin = link_linear(c1, c2);
    CHECK(max_grid_gap(lin.cost, r.cost, 1e-3) <= 1e-9);
    CHECK(max_grid_gap(link_naive(c1, c2).cost, r.cost, 1e-3) <= 1e-9);
}

TEST_CASE("linking with a constant shifts the other function") {
    const CF k = CF::constant(3.0, 2.0);
    const CF c = golden_second();
    for (const LinkResult& r : {link_single(k, c), link_linear(k, c), link_naive(c, k)}) {
        CHECK(r.cost.tau_min == doctest::Approx(5.0));
        CHECK(r.cost.tau_max == doctest::Approx(8.0));
        for (double x = 5.0; x <= 8.0; x += 0.25) CHECK(r.cost.eval(x) == doctest::Approx(c.eval(x - 3.0) + 2.0));
    }
    const LinkResult kk = link_linear(k, CF::constant(1.0, -4.0));
    CHECK(kk.cost.is_constant());
    CHECK(kk.cost.tau_min == doctest::Approx(4.0));
    CHECK(kk.cost.value_at_min() == doctest::Approx(-2.0));
}

TEST_CASE("link_single agrees with brute force and is commutative") {
    std::mt19937_64 rng(5);
    for (int i = 0; i < 300; ++i) {
        const CF a = oracle::random_single(rng), b = oracle::random_single(rng);
        const LinkResult ab = link_single(a, b), ba = link_single(b, a);
        CHECK(ab.cost.size() <= 3);
        CHECK(max_grid_gap(ab.cost, ba.cost, 1e-3) <= 1e-9);
        for (double x = ab.cost.tau_min; x <= ab.cost.tau_max + 0.5; x += 0.05) {
            const double want = oracle::brute_link(a, b, x);
            CHECK(std::abs(ab.cost.eval(x) - want) <= 1e-6 * std::max(1.0, std::abs(want)));
        }
    }
}

TEST_CASE("link_linear matches link_naive on convex multi-piece inputs") {
    std::mt19937_64 rng(17);
    for (int i = 0; i < 200; ++i) {
        const int k1 = 2 + i % 9, k2 = 2 + (i / 9) % 9;
        const CF a = oracle::random_convex(rng, k1), b = oracle::random_convex(rng, k2);
        const LinkResult lin = link_linear(a, b);
        const LinkResult nav = link_naive(a, b);
        CHECK(lin.cost.valid());
        CHECK(nav.cost.valid());
        CHECK(is_convex(lin.cost, 1e-7));
        CHECK(lin.cost.size() <= 3 * (a.size() + b.size()));
        CHECK(max_grid_gap(lin.cost, nav.cost, 1e-3) <= 1e-9);
        for (double x = lin.cost.tau_min; x <= lin.cost.tau_max; x += 0.07) {
            const double want = oracle::brute_link(a, b, x);
            CHECK(std::abs(lin.cost.eval(x) - want) <= 1e-6 * std::max(1.0, std::abs(want)));
            const double d = lin.delta.eval(x);
            CHECK(std::abs(a.eval(x - d) + b.eval(d) - lin.cost.eval(x)) <= 1e-7 * std::max(1.0, std::abs(want)));
        }
    }
}

TEST_CASE("link is associative and monotone") {
    std::mt19937_64 rng(23);
    for (int i = 0; i < 100; ++i) {
        const CF a = oracle::random_convex(rng, 1 + i % 3), b = oracle::random_convex(rng, 1 + i % 4),
                 c = oracle::random_convex(rng, 2);
        const CF left = link_naive(link_naive(a, b).cost, c).cost;
        const CF right = link_naive(a, link_naive(b, c).cost).cost;
        CHECK(max_grid_gap(left, right, 1e-3) <= 1e-8);
        double prev = kInf;
        for (double x = left.tau_min; x <= left.tau_max; x += 0.01) {
            const double v = left.eval(x);
            CHECK(v < prev);
            prev = v;
        }
        CHECK(left.eval(left.tau_min) == doctest::Approx(a.eval(a.tau_min) + b.eval(b.tau_min) + c.eval(c.tau_min)));
    }
}

TEST_CASE("extreme point of a piece difference") {
    const TradeoffPiece p{8.0, 0.0, 0.0, 0.0}, q{1.0, 1.0, 0.0, 0.0};
    REQUIRE(extreme_point(p, q).has_value());
    CHECK(*extreme_point(p, q) == doctest::Approx(2.0));
    CHECK_FALSE(extreme_point(TradeoffPiece{2.0, 1.0, 3.0, 0.0}, TradeoffPiece{2.0, 1.0, 1.0, 0.0}).has_value());
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    int found = 0;
    for (int i = 0; i < 1000; ++i) {
        const TradeoffPiece a{0.5 + 10 * u(rng), -2 + 2 * u(rng), u(rng), 0.0};
        const TradeoffPiece b{0.5 + 10 * u(rng), -2 + 2 * u(rng), u(rng), 0.0};
        const auto x = extreme_point(a, b);
        if (!x || *x <= std::max(a.beta, b.beta) + 0.05) continue;
        ++found;
        const double h = 1e-6;
        const double d = ((a.eval(*x + h) - b.eval(*x + h)) - (a.eval(*x - h) - b.eval(*x - h))) / (2 * h);
        CHECK(std::abs(d) <= 1e-6 * std::max(1.0, std::abs(a.deriv(*x))));
        CHECK(std::abs(a.deriv(*x) - b.deriv(*x)) <= 1e-9 * std::max(1.0, std::abs(a.deriv(*x))));
    }
    CHECK(found > 100);
}

TEST_CASE("pairwise dominance") {
    const CF c = golden_second();
    CHECK(dominates_pairwise(c, c));
    const CF lower = c.shifted(0.0, -1.0);
    CHECK(dominates_pairwise(lower, c));
    CHECK_FALSE(dominates_pairwise(c, lower));
    std::mt19937_64 rng(41);
    int agree = 0;
    for (int i = 0; i < 500; ++i) {
        const CF a = oracle::random_convex(rng, 1 + i % 4);
        CF b = oracle::random_convex(rng, 1 + i % 3);
        if (i % 3 == 0) b = link(b, CF::constant(0.0, -3.0));
        const bool fast = dominates_pairwise(a, b);
        const bool grid = oracle::grid_dominates(a, b, 1e-3);
        if (fast) CHECK(grid);
        agree += fast == grid;
    }
    CHECK(agree >= 495);
}

TEST_CASE("trim_dominated basics and soundness") {
    const CF c = golden_second();
    CHECK_FALSE(trim_dominated(c, {&c}).has_value());
    const auto same = trim_dominated(c, {});
    REQUIRE(same.has_value());
    CHECK(same->tau_min == c.tau_min);
    CHECK(same->tau_max == c.tau_max);

    // a fast but expensive settled function overlapping the fast region of c
    const CF fast = CF::single(0.5, 1.0, 0.95, 2.0, 3.0);
    const CF slow = CF::single(0.5, 1.0, 1.0, 2.0, 5.0);
    const auto t = trim_dominated(slow, {&fast});
    REQUIRE(t.has_value());
    CHECK(t->tau_min == doctest::Approx(3.0));
    CHECK(t->tau_max == doctest::Approx(5.0));
    for (double x = 2.0; x < 3.0; x += 1e-3) CHECK(fast.eval(x) <= slow.eval(x));

    std::mt19937_64 rng(77);
    for (int i = 0; i < 400; ++i) {
        const CF cand = oracle::random_convex(rng, 1 + i % 4, 1.0 + (i % 5));
        std::vector<CF> set;
        for (int j = 0; j < 1 + i % 3; ++j) set.push_back(oracle::random_convex(rng, 1 + j, 1.0 + ((i + j) % 4)));
        std::vector<const CF*> ptr;
        for (auto& s : set) ptr.push_back(&s);
        const auto r = trim_dominated(cand, ptr);
        auto dominated_at = [&](double x) {
            for (auto* s : ptr)
                if (s->eval(x) <= cand.eval(x) + value_tolerance(cand.eval(x))) return true;
            return false;
        };
        if (!r) {
            for (double x = cand.tau_min; x <= cand.tau_max + 1.0; x += 1e-3) CHECK(dominated_at(x));
            continue;
        }
        for (double x = cand.tau_min; x < r->tau_min; x += 1e-3) CHECK(dominated_at(x));
        if (r->tau_max < cand.tau_max)
            for (double x = r->tau_max + 1e-3; x <= cand.tau_max + 1.0; x += 1e-3) CHECK(dominated_at(x));
        for (double x = r->tau_min; x <= r->tau_max; x += 0.01) CHECK(r->eval(x) == doctest::Approx(cand.eval(x)));
    }
}

TEST_CASE("clamp_battery") {
    const CF c = CF::single(3.0, 1.0, 1.0, 2.0, 6.0);
    auto same = clamp_battery(c, 10.0, 0.0);
    REQUIRE(same.has_value());
    CHECK(same->tau_min == c.tau_min);
    CHECK(same->tau_max == c.tau_max);
    auto capped = clamp_battery(c, 2.0, 0.0);
    REQUIRE(capped.has_value());
    CHECK(capped->eval(capped->tau_min) == doctest::Approx(2.0));
    CHECK(capped->tau_min == doctest::Approx(1.0 + std::sqrt(3.0)));
    CHECK_FALSE(clamp_battery(c, 1.0, 0.0).has_value());
    auto pruned = clamp_battery(c, 10.0, 8.0);
    REQUIRE(pruned.has_value());
    CHECK(pruned->value_at_min() == doctest::Approx(2.0));
    CHECK_FALSE(clamp_battery(c, 10.0, kInf).has_value());

    // positive part reaching 5 Wh exactly at 5 s: with 5 Wh available the fastest time becomes 5
    const CF plus = CF::single(50.0, 0.0, 3.0, 2.0, 9.0);
    auto b5 = clamp_battery(plus, 5.0, 0.0);
    REQUIRE(b5.has_value());
    CHECK(b5->tau_min == doctest::Approx(5.0));

    const CF neg = CF::single(3.0, 1.0, -1.0, 2.0, 6.0);
    auto full = clamp_battery(neg, 10.0, 0.0);
    REQUIRE(full.has_value());
    CHECK(full->value_at_max() == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(full->tau_max == doctest::Approx(1.0 + std::sqrt(3.0)));
    const CF allneg = CF::single(3.0, 1.0, -5.0, 2.0, 6.0);
    auto zero = clamp_battery(allneg, 10.0, 0.0);
    REQUIRE(zero.has_value());
    CHECK(zero->is_constant());
    CHECK(zero->value_at_min() == 0.0);
    CHECK(zero->tau_min == 2.0);
}

TEST_CASE("cost records round-trip") {
    std::mt19937_64 rng(9);
    for (int i = 0; i < 50; ++i) {
        const CF c = i % 5 == 0 ? CF::constant(1.5 + i, -2.25) : oracle::random_convex(rng, 1 + i % 4);
        std::vector<std::string> tok;
        std::string rec = to_record(c), w;
        for (char ch : rec + " ") {
            if (ch == ' ') {
                if (!w.empty()) tok.push_back(w);
                w.clear();
            } else {
                w += ch;
            }
        }
        std::size_t pos = 0;
        const CF back = parse_record(tok, pos);
        CHECK(pos == tok.size());
        CHECK(to_record(back) == rec);
    }
    std::vector<std::string> bad{"z", "1"};
    std::size_t pos = 0;
    CHECK_THROWS_WITH(parse_record(bad, pos), doctest::Contains("unknown cost record tag 'z'"));
}
