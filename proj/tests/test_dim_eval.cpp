#include <catch2/catch_amalgamated.hpp>

#include "drh/constructions.hpp"
#include "drh/dim_eval.hpp"
#include "drh/suites.hpp"

using namespace drh;

TEST_CASE("density limits of the named families") {
    auto [h, p] = density_limits(DigitSet::evens());
    CHECK((h.exact && p.exact));
    CHECK(h.lower == Rational(1, 2));
    CHECK(p.upper == Rational(1, 2));

    // odd-prime factorial members: limsup = (i-1)/i
    for (long i = 1; i <= 4; ++i) {
        auto [hi, pi] = density_limits(DigitSet::prime_factorial_member(i));
        REQUIRE(pi.exact);
        CHECK(pi.upper == Rational(i - 1, i));
        CHECK(hi.lower == 0);
    }
    // dichotomy members: limsup = 1 - 1/i^2, liminf = 0
    for (long i = 2; i <= 4; ++i) {
        auto [hi, pi] = density_limits(DigitSet::zero_one_member(i));
        REQUIRE((hi.exact && pi.exact));
        CHECK(pi.upper == 1 - Rational(1, i * i));
        CHECK(hi.lower == 0);
    }
    auto [hs, ps] = density_limits(DigitSet::sawtooth(Rational(1, 3), Rational(2, 3)));
    CHECK(hs.lower == Rational(1, 3));
    CHECK(ps.upper == Rational(2, 3));
}

TEST_CASE("restricted dimension, recognized cases") {
    // the full sequence returns the hausdorff value
    DigitSet st = DigitSet::sawtooth(Rational(1, 3), Rational(2, 3));
    LimitBounds full = restricted_dim(st, ScaleSequence::all_levels());
    CHECK(full.exact);
    CHECK(full.lower == Rational(1, 3));

    // bounded gaps reach the same liminf
    LimitBounds arith = restricted_dim(st, ScaleSequence::arithmetic(2, 5));
    CHECK(arith.exact);
    CHECK(arith.lower == Rational(1, 3));

    // samplers along the family's own blocks
    CHECK(restricted_dim(st, ScaleSequence::block_ends(st)).lower == Rational(2, 3));
    CHECK(restricted_dim(st, ScaleSequence::block_starts(st)).lower == Rational(1, 3));
    for (long i = 2; i <= 4; ++i) {
        DigitSet z = DigitSet::zero_one_member(i);
        LimitBounds b = restricted_dim(z, ScaleSequence::block_ends(z));
        REQUIRE(b.exact);
        CHECK(b.lower == 1 - Rational(1, i * i));
    }
    for (long i = 1; i <= 4; ++i) {
        DigitSet pf = DigitSet::prime_factorial_member(i);
        LimitBounds b = restricted_dim(pf, ScaleSequence::block_ends(pf));
        REQUIRE(b.exact);
        CHECK(b.lower == Rational(i - 1, i));
    }

    // geometric level growth always finds the factorial gaps
    LimitBounds geo = restricted_dim(DigitSet::zero_one_member(3), ScaleSequence::super_geometric(1, 2));
    CHECK(geo.exact);
    CHECK(geo.lower == 0);

    // converging densities are immune to the choice of levels
    LimitBounds ev = restricted_dim(DigitSet::evens(), ScaleSequence::super_geometric(1, 3));
    CHECK((ev.exact && ev.lower == Rational(1, 2)));
}

TEST_CASE("restricted dimension, cross-family samplers") {
    // distinct primes have disjoint guard bands
    DigitSet p2 = DigitSet::prime_factorial_member(2), p3 = DigitSet::prime_factorial_member(3);
    LimitBounds cross = restricted_dim(p2, ScaleSequence::block_ends(p3));
    CHECK(cross.exact);
    CHECK(cross.lower == 0);

    // dichotomy member i sampled at member j's block ends
    DigitSet z2 = DigitSet::zero_one_member(2), z3 = DigitSet::zero_one_member(3);
    LimitBounds up = restricted_dim(z3, ScaleSequence::block_ends(z2));  // i=3 >= j=2: 1 - 1/6
    CHECK(up.exact);
    CHECK(up.lower == 1 - Rational(1, 6));
    LimitBounds dn = restricted_dim(z2, ScaleSequence::block_ends(z3));  // i=2 < j=3: (4-1)/6
    CHECK(dn.exact);
    CHECK(dn.lower == Rational(3, 6));

    // prime member sampled along dichotomy block ends: factorial bands miss
    LimitBounds pm = restricted_dim(p2, ScaleSequence::block_ends(z2));
    CHECK(pm.exact);
    CHECK(pm.lower == 0);
}

TEST_CASE("cross-sampler limits match finite evidence") {
    // the certified values above should agree with what a scan of the first
    // levels shows approaching
    DigitSet z3 = DigitSet::zero_one_member(3);
    ScaleSequence d = ScaleSequence::block_ends(DigitSet::zero_one_member(2));
    Rational v = z3.density(d.level_at(6));
    CHECK(abs(v - (1 - Rational(1, 6))) < Rational(1, 1000));
}

TEST_CASE("constructed target sequences are recognized") {
    DigitSet st = DigitSet::sawtooth(Rational(1, 3), Rational(2, 3));
    ScaleSequence d = target_density_scales(st, Rational(2, 5));
    LimitBounds b = restricted_dim(st, d);
    CHECK(b.exact);
    CHECK(b.lower == Rational(2, 5));

    // evidence window at depth 50 brackets the target
    Rational mn = 1, mx = 0;
    for (long k = 25; k <= 50; ++k) {
        Rational v = st.density(d.level_at(k));
        mn = std::min(mn, v);
        mx = std::max(mx, v);
    }
    CHECK(mn >= Rational(39, 100));
    CHECK(mx <= Rational(41, 100));
}

TEST_CASE("half-density witness along its own levels") {
    auto levels = std::make_shared<SuperGeometricRule>(1, 4);
    DigitSet s = DigitSet::half_density_witness(levels, "all");
    LimitBounds b = restricted_dim(s, ScaleSequence(levels));
    CHECK(b.exact);
    CHECK(b.lower == Rational(1, 2));
    // mixing in even-fill intervals does not move the value
    auto levels2 = std::make_shared<SuperGeometricRule>(2, 2);
    DigitSet s2 = DigitSet::half_density_witness(levels2, "mod", 2, {BigInt(0)});
    LimitBounds b2 = restricted_dim(s2, ScaleSequence(levels2));
    CHECK(b2.exact);
    CHECK(b2.lower == Rational(1, 2));
}

TEST_CASE("unrecognized pairs fall back to evidence") {
    DigitSet st = DigitSet::sawtooth(Rational(1, 3), Rational(2, 3));
    LimitBounds b = restricted_dim(st, ScaleSequence::super_geometric(1, 2), 40);
    CHECK(!b.exact);
    CHECK(b.evidence_depth == 40);
    CHECK(b.lower >= Rational(1, 3));
    CHECK(b.upper <= Rational(2, 3));
}

TEST_CASE("family dimensions") {
    // single-member family reduces to the member
    DigitSet st = DigitSet::sawtooth(Rational(1, 3), Rational(2, 3));
    LimitBounds one = restricted_dim_family(SetFamily::explicit_list({st}), ScaleSequence::all_levels());
    CHECK((one.exact && one.lower == Rational(1, 3)));

    // finite families take the max of their members
    Rng rng(3);
    for (int c = 0; c < 25; ++c) {
        std::vector<DigitSet> members;
        for (int i = 0; i < 3; ++i) members.push_back(random_exact_set(rng));
        ScaleSequence d = random_exact_scales(rng, members[rng.below(3)]);
        LimitBounds fam = restricted_dim_family(SetFamily::explicit_list(members), d);
        Rational expect_lo = 0, expect_hi = 0;
        bool all_exact = true;
        for (const auto& m : members) {
            LimitBounds b = restricted_dim(m, d);
            expect_lo = std::max(expect_lo, b.lower);
            expect_hi = std::max(expect_hi, b.upper);
            all_exact = all_exact && b.exact;
        }
        REQUIRE(fam.lower == expect_lo);
        REQUIRE(fam.upper == expect_hi);
        if (all_exact && expect_lo == expect_hi) REQUIRE(fam.exact);
    }

    // the dichotomy: 0 along the full sequence, 1 along any member's block ends
    CHECK(restricted_dim_family(SetFamily::zero_one(), ScaleSequence::all_levels()) .lower == 0);
    CHECK(restricted_dim_family(SetFamily::zero_one(), ScaleSequence::all_levels()).exact);
    LimitBounds dichot = restricted_dim_family(SetFamily::zero_one(),
                                               ScaleSequence::block_ends(DigitSet::zero_one_member(2)));
    CHECK(dichot.exact);
    CHECK(dichot.lower == 1);

    // prime factorial family: strictly below 1 along any single sequence
    LimitBounds pf = restricted_dim_family(SetFamily::prime_factorial(),
                                           ScaleSequence::block_ends(DigitSet::prime_factorial_member(3)));
    CHECK(pf.exact);
    CHECK(pf.lower == Rational(2, 3));
    CHECK(restricted_dim_family(SetFamily::prime_factorial(), ScaleSequence::super_geometric(1, 2)).lower ==
          0);

    // no certified envelope: truncated evidence
    LimitBounds trunc = restricted_dim_family(SetFamily::zero_one(),
                                              ScaleSequence::block_ends(DigitSet::prime_factorial_member(2)),
                                              5, 30);
    CHECK(!trunc.exact);
}

TEST_CASE("universal restricted dimension is the packing value") {
    CHECK(universal_restricted_dim(DigitSet::evens()).lower == Rational(1, 2));
    for (long i = 1; i <= 4; ++i)
        CHECK(universal_restricted_dim(DigitSet::prime_factorial_member(i)).lower == Rational(i - 1, i));
    CHECK(universal_restricted_dim(DigitSet::zero_one_member(2)).lower == Rational(3, 4));
}

TEST_CASE("scale invariance under canonical round trips") {
    DigitSet st = DigitSet::sawtooth(Rational(1, 3), Rational(2, 3));
    ScaleSequence d = ScaleSequence::arithmetic(1, 4);
    ScaleSequence round = canonicalize(SorgenfreyUnion::scale_buckets(d));
    LimitBounds a = restricted_dim(st, d), b = restricted_dim(st, round);
    CHECK(a.exact == b.exact);
    CHECK(a.lower == b.lower);
    CHECK(a.upper == b.upper);
}

TEST_CASE("limit bounds json") {
    LimitBounds b = LimitBounds::exactly(Rational(2, 3));
    LimitBounds back = LimitBounds::from_json(b.to_json());
    CHECK(back.lower == b.lower);
    CHECK(back.exact);
    CHECK(b.to_json()["lower"] == "2/3");
}
