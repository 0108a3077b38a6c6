#include <catch2/catch_amalgamated.hpp>

#include <atomic>
#include <thread>

#include "drh/scale_sequence.hpp"

using namespace drh;

TEST_CASE("rule evaluation") {
    CHECK(ScaleSequence::all_levels().level_at(7) == 7);
    CHECK(ScaleSequence::super_geometric(1, 2).level_at(5) == 32);

    // prefix (3, 5) then 8, 12, 16, ...
    ScaleSequence c(std::make_shared<ConcatRule>(std::vector<BigInt>{3, 5},
                                                 std::make_shared<ArithmeticRule>(4, 4)));
    CHECK(c.level_at(1) == 3);
    CHECK(c.level_at(2) == 5);
    CHECK(c.level_at(3) == 8);
    CHECK(c.level_at(4) == 12);

    CHECK_THROWS_AS(ArithmeticRule(0, 0), std::invalid_argument);
    CHECK_THROWS_AS(SuperGeometricRule(Rational(1, 100), Rational(11, 10)), std::invalid_argument);
    CHECK_THROWS_AS(ConcatRule({BigInt(5), BigInt(3)}, std::make_shared<ArithmeticRule>(9, 1)),
                    std::invalid_argument);
    CHECK_THROWS_AS(ConcatRule({BigInt(5)}, std::make_shared<ArithmeticRule>(0, 1)),
                    std::invalid_argument);
}

TEST_CASE("membership queries") {
    ScaleSequence ev = ScaleSequence::arithmetic(0, 2);
    CHECK(!ev.is_allowed(7));
    CHECK(ev.is_allowed(8));
    CHECK(!ev.is_allowed(0));
    CHECK(ScaleSequence::super_geometric(1, 2).is_allowed(1024));
    CHECK(!ScaleSequence::super_geometric(1, 2).is_allowed(1000));

    CHECK(ev.allowed_up_to(9) == std::vector<long>{2, 4, 6, 8});
}

TEST_CASE("strict increase and self-membership") {
    auto drive = [](const ScaleSequence& d, long depth) {
        BigInt prev = 0;
        for (long k = 1; k <= depth; ++k) {
            BigInt v = d.level_at(k);
            REQUIRE(v > prev);
            prev = v;
        }
        for (long k = 1; k <= depth; k += 911) REQUIRE(d.is_allowed(d.level_at(k)));
    };
    drive(ScaleSequence::all_levels(), 10000);
    drive(ScaleSequence::arithmetic(3, 7), 10000);
    // geometric levels reach thousands of bits by index 10^4; the invariant
    // bar stays at 10^4 on the linear rules
    drive(ScaleSequence::super_geometric(2, Rational(3, 2)), 4000);
    // factorial-endpoint samplers grow too fast for deep indices; spot checks
    ScaleSequence ends = ScaleSequence::block_ends(DigitSet::prime_factorial_member(2));
    BigInt prev = 0;
    for (long k = 1; k <= 4; ++k) {
        BigInt v = ends.level_at(k);
        REQUIRE(v > prev);
        REQUIRE(ends.is_allowed(v));
        prev = v;
    }
    CHECK(ends.level_at(1) == 240);  // 2 * (5^1)!
}

TEST_CASE("canonicalization") {
    // the full ray meets every bucket
    ScaleSequence full = canonicalize(SorgenfreyUnion::full());
    for (long k = 1; k <= 50; ++k) CHECK(full.level_at(k) == k);

    // pieces [3^-k, 3^-k + 10^-k-2): 1/3 in [1/4,1/2), 1/9 in [1/16,1/8), 1/27 in [1/32,1/16)
    ScaleSequence tr = canonicalize(
        SorgenfreyUnion::geometric_pieces(1, Rational(1, 3), Rational(1, 100), Rational(1, 10)));
    CHECK(tr.level_at(1) == 2);
    CHECK(tr.level_at(2) == 4);
    CHECK(tr.level_at(3) == 5);

    // explicit finite unions cannot certify inf = 0
    CHECK_THROWS_AS(canonicalize(SorgenfreyUnion::pieces({{Rational(1, 2), Rational(1, 2)}})),
                    std::invalid_argument);

    // idempotence: the bucket union of a sequence canonicalizes to itself
    ScaleSequence d = ScaleSequence::arithmetic(1, 3);
    ScaleSequence back = canonicalize(SorgenfreyUnion::scale_buckets(d));
    for (long k = 1; k <= 200; ++k) REQUIRE(back.level_at(k) == d.level_at(k));

    // a bucket-trace of a bucket union reproduces the trace itself
    ScaleSequence tr2 = canonicalize(SorgenfreyUnion::geometric_pieces(1, Rational(1, 3), Rational(1, 100),
                                                                       Rational(1, 10)));
    ScaleSequence again = canonicalize(SorgenfreyUnion::scale_buckets(tr2));
    for (long k = 1; k <= 60; ++k) REQUIRE(again.level_at(k) == tr2.level_at(k));
}

TEST_CASE("growth classification") {
    CHECK(ScaleSequence::all_levels().growth().all_levels);
    CHECK(ScaleSequence::arithmetic(5, 3).growth().kind == GrowthClass::BoundedGap);
    CHECK(ScaleSequence::arithmetic(5, 3).growth().param == 3);
    auto g = ScaleSequence::super_geometric(1, 2).growth();
    CHECK(g.kind == GrowthClass::Geometric);
    // consecutive ratio must actually respect the declared bound
    ScaleSequence sg = ScaleSequence::super_geometric(2, Rational(3, 2));
    Rational bound = sg.growth().param;
    for (long k = 1; k <= 60; ++k)
        REQUIRE(Rational(sg.level_at(k + 1)) <= bound * Rational(sg.level_at(k)));
}

TEST_CASE("scale json round trips") {
    std::vector<ScaleSequence> rules = {
        ScaleSequence::all_levels(),
        ScaleSequence::arithmetic(2, 5),
        ScaleSequence::super_geometric(1, 3),
        ScaleSequence(std::make_shared<ConcatRule>(std::vector<BigInt>{2, 4},
                                                   std::make_shared<ArithmeticRule>(4, 2))),
        ScaleSequence::block_ends(DigitSet::zero_one_member(2)),
        ScaleSequence::block_starts(DigitSet::sawtooth(Rational(1, 3), Rational(2, 3))),
        ScaleSequence(std::make_shared<TargetDensityRule>(DigitSet::sawtooth(Rational(1, 3), Rational(2, 3)),
                                                          Rational(1, 2))),
        canonicalize(SorgenfreyUnion::geometric_pieces(1, Rational(1, 3), Rational(1, 100), Rational(1, 10))),
    };
    for (const auto& d : rules) {
        ScaleSequence back = ScaleSequence::from_json(d.to_json());
        REQUIRE(back.to_json() == d.to_json());
        for (long k = 1; k <= 12; ++k) REQUIRE(back.level_at(k) == d.level_at(k));
    }
    // sorgenfrey unions round trip too
    for (const auto& u :
         {SorgenfreyUnion::full(), SorgenfreyUnion::pieces({{Rational(1, 4), Rational(1, 8)}}),
          SorgenfreyUnion::geometric_pieces(1, Rational(1, 2), Rational(1, 8), Rational(1, 4)),
          SorgenfreyUnion::scale_buckets(ScaleSequence::arithmetic(0, 2))}) {
        CHECK(SorgenfreyUnion::from_json(u.to_json()).to_json() == u.to_json());
    }
}

TEST_CASE("prefix cache is race free") {
    ScaleSequence d = ScaleSequence::super_geometric(2, Rational(3, 2));
    std::vector<std::thread> threads;
    std::atomic<bool> ok{true};
    for (int t = 0; t < 4; ++t)
        threads.emplace_back([&] {
            for (long k = 1; k <= 300; ++k) {
                if (d.level_at(k) != ceil_rat(2 * pow_rat(Rational(3, 2), k))) ok = false;
            }
        });
    for (auto& t : threads) t.join();
    CHECK(ok);
}
