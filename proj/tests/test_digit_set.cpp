#include <catch2/catch_amalgamated.hpp>

#include <atomic>
#include <thread>

#include "drh/digit_set.hpp"
#include "drh/scale_sequence.hpp"

using namespace drh;

namespace {
BigInt naive_count(const DigitSet& s, long k) {
    BigInt c = 0;
    for (long i = 1; i <= k; ++i)
        if (s.contains(i)) ++c;
    return c;
}
}  // namespace

TEST_CASE("counting the worked examples") {
    CHECK(DigitSet::evens().count(10) == 5);
    CHECK(DigitSet::multiples(4).count(12) == 3);

    // block {360..1440} of the i=2 dichotomy member: (3*2)! = 720, endpoints
    // 720/2 and 2*720, so the count at 1440 is 1440 - 360 + 1
    DigitSet s2 = DigitSet::zero_one_member(2);
    CHECK(s2.count(1440) == 1081);
    CHECK(s2.density(1440) == Rational(1081, 1440));
    CHECK(!s2.contains(359));
    CHECK(s2.contains(360));

    CHECK(DigitSet::evens().density(10) == Rational(1, 2));
}

TEST_CASE("counting matches membership scans across rule classes") {
    std::vector<DigitSet> sets = {
        DigitSet::evens(),
        DigitSet::finite({3, 5, 8, 1000, 9999}),
        DigitSet::eventually_periodic(7, 5, {BigInt(0), BigInt(3)}, {BigInt(2), BigInt(6)}),
        DigitSet::sawtooth(Rational(1, 3), Rational(2, 3)),
        DigitSet::zero_one_member(2),
        DigitSet::prime_factorial_member(2),
        DigitSet::prime_factorial_guard(1),
        DigitSet::evens().dilated(2, 3),
        set_union(DigitSet::multiples(3), DigitSet::evens()),
        set_intersection(DigitSet::multiples(3), DigitSet::evens()),
        set_complement(DigitSet::multiples(5)),
        DigitSet::half_density_witness(std::make_shared<SuperGeometricRule>(1, 4), "all"),
        DigitSet::half_density_witness(std::make_shared<SuperGeometricRule>(2, 2), "mod", 2, {BigInt(0)}),
    };
    for (const auto& s : sets) {
        BigInt running = 0;
        for (long k = 1; k <= 10000; ++k) {
            if (s.contains(k)) ++running;
            if (k <= 64 || k % 997 == 0 || k == 10000) {
                INFO(s.to_json().dump());
                REQUIRE(s.count(k) == running);
            }
        }
    }
}

TEST_CASE("count increments stay in {0,1} and densities in [0,1]") {
    Rng rng(5);
    std::vector<DigitSet> sets = {DigitSet::sawtooth(Rational(1, 4), Rational(1, 2)),
                                  DigitSet::zero_one_member(3), DigitSet::odds().dilated(1, 2)};
    for (const auto& s : sets) {
        BigInt prev = 0;
        for (long k = 1; k <= 2000; ++k) {
            BigInt c = s.count(k);
            BigInt step = c - prev;
            REQUIRE((step == 0 || step == 1));
            REQUIRE(s.density(k) >= 0);
            REQUIRE(s.density(k) <= 1);
            prev = c;
        }
    }
}

TEST_CASE("index dilation") {
    // phi_{1,2}(n) = 2n
    DigitSet t12 = DigitSet::finite({1, 2, 3}).dilated(1, 2);
    for (long j = 1; j <= 8; ++j) CHECK(t12.contains(j) == (j == 2 || j == 4 || j == 6));

    // phi_{2,3}: 1 -> 2, 2 -> 3, 3 -> 5, 4 -> 6
    DigitSet t23 = DigitSet::finite({1, 2, 3, 4}).dilated(2, 3);
    for (long j = 1; j <= 8; ++j) CHECK(t23.contains(j) == (j == 2 || j == 3 || j == 5 || j == 6));

    // image of the block [1,4] is one residue piece: [2,6] mod 3, {0,2}
    auto pieces = DigitSet::blocks({{1, 4}}).dilated(2, 3).decompose(100);
    REQUIRE(pieces.size() == 1);
    CHECK(pieces[0].lo == 2);
    CHECK(pieces[0].hi == 6);
    CHECK(pieces[0].modulus == 3);
    CHECK(pieces[0].residues == std::vector<BigInt>{0, 2});

    CHECK_THROWS_AS(DigitSet::evens().dilated(3, 2), std::invalid_argument);
    CHECK_THROWS_AS(DigitSet::evens().dilated(2, 2), std::invalid_argument);

    // order preservation: count(T, phi(k)) == count(S, k)
    Rng rng(9);
    for (int c = 0; c < 20; ++c) {
        long q = 2 + static_cast<long>(rng.below(4));
        long p = 1 + static_cast<long>(rng.below(static_cast<unsigned long>(q - 1)));
        DigitSet s = DigitSet::eventually_periodic(1 + rng.below(5), 2 + rng.below(5), {BigInt(rng.below(2))});
        DigitSet t = s.dilated(p, q);
        for (BigInt k = 1; k <= 300; ++k) REQUIRE(t.count(detail::dilate_index(k, p, q)) == s.count(k));
    }
}

TEST_CASE("boolean combinations") {
    DigitSet nat = set_union(DigitSet::evens(), DigitSet::odds());
    for (long k : {1L, 10L, 97L}) CHECK(nat.count(k) == k);

    DigitSet odd = set_complement(DigitSet::evens());
    for (long i = 1; i <= 10; ++i) CHECK(odd.contains(i) == (i % 2 == 1));

    // witness assembled as a union of its two branches: blocks on selected
    // intervals, even fill elsewhere; seam counts must match a membership scan
    auto levels = std::make_shared<SuperGeometricRule>(1, 4);
    DigitSet witness = DigitSet::half_density_witness(levels, "mod", 2, {BigInt(1)});
    for (long k = 1; k <= 10000; ++k) {
        if (k <= 40 || k % 313 == 0) REQUIRE(witness.count(k) == naive_count(witness, k));
    }
}

TEST_CASE("block structure") {
    CHECK_THROWS_AS(DigitSet::blocks({{5, 10}, {8, 20}}), std::invalid_argument);
    CHECK_THROWS_AS(DigitSet::blocks({{5, 4}}), std::invalid_argument);

    DigitSet st = DigitSet::sawtooth(Rational(1, 3), Rational(2, 3));
    auto b1 = st.block(1), b2 = st.block(2), b3 = st.block(3);
    REQUIRE((b1 && b2 && b3));
    CHECK(b1->lo == 2);
    CHECK(b1->hi == 3);
    CHECK(b2->lo == 7);
    CHECK(b2->hi == 12);
    CHECK(b3->lo == 25);
    CHECK(b3->hi == 48);
    // density exactly hi at block ends, exactly lo just before block starts
    for (std::size_t j = 1; j <= 6; ++j) {
        auto b = st.block(j);
        CHECK(st.density(b->hi) == Rational(2, 3));
        auto nxt = st.block(j + 1);
        CHECK(st.density(nxt->lo - 1) == Rational(1, 3));
    }
}

TEST_CASE("certified profiles match deep scans") {
    auto scan_range = [](const DigitSet& s, long lo, long hi) {
        Rational mn = s.density(lo), mx = mn;
        for (long k = lo + 1; k <= hi; ++k) {
            Rational v = s.density(k);
            mn = std::min(mn, v);
            mx = std::max(mx, v);
        }
        return std::make_pair(mn, mx);
    };
    DigitSet st = DigitSet::sawtooth(Rational(1, 3), Rational(2, 3));
    LimitProfile p = st.profile();
    REQUIRE(p.exact);
    auto [mn, mx] = scan_range(st, 2, 10000);
    CHECK(mn == p.liminf);
    CHECK(mx == p.limsup);

    DigitSet ev = DigitSet::evens();
    auto pp = ev.profile();
    CHECK(pp.liminf == Rational(1, 2));
    auto [mn2, mx2] = scan_range(ev, 5000, 10000);
    CHECK(mn2 >= Rational(2499, 5000));
    CHECK(mx2 <= Rational(5001, 10000));
}

TEST_CASE("json round trips") {
    std::vector<DigitSet> sets = {
        DigitSet::none(),
        DigitSet::finite({1, 5, 9}),
        DigitSet::eventually_periodic(4, 3, {BigInt(2)}, {BigInt(1)}),
        DigitSet::blocks({{2, 5}, {9, 12}}),
        DigitSet::ap_blocks({{2, 20, 3, {BigInt(0), BigInt(2)}}}),
        DigitSet::sawtooth(Rational(1, 4), Rational(1, 2)),
        DigitSet::zero_one_member(3),
        DigitSet::prime_factorial_member(2),
        DigitSet::prime_factorial_guard(2),
        DigitSet::evens().dilated(2, 5),
        set_union(DigitSet::evens(), DigitSet::finite({3})),
        set_complement(DigitSet::multiples(3)),
        DigitSet::half_density_witness(std::make_shared<SuperGeometricRule>(1, 4), "mod", 3,
                                       {BigInt(0), BigInt(2)}),
    };
    for (const auto& s : sets) {
        DigitSet back = DigitSet::from_json(s.to_json());
        REQUIRE(back.to_json() == s.to_json());
        for (long k : {1L, 7L, 64L, 500L}) REQUIRE(back.count(k) == s.count(k));
    }
}

TEST_CASE("concurrent counting is safe") {
    DigitSet s = DigitSet::zero_one_member(2);
    std::vector<std::thread> threads;
    std::atomic<bool> ok{true};
    for (int t = 0; t < 4; ++t)
        threads.emplace_back([&] {
            for (long k = 1400; k <= 1460; ++k)
                if (s.count(k) != naive_count(s, k)) ok = false;
        });
    for (auto& t : threads) t.join();
    CHECK(ok);
}
