#include <catch2/catch_amalgamated.hpp>

#include "drh/numeric.hpp"
#include "drh/power_value.hpp"

using namespace drh;

TEST_CASE("integer helpers") {
    CHECK(factorial(6) == 720);
    CHECK(factorial(0) == 1);
    CHECK(pow2_int(10) == 1024);
    CHECK(floor_div(7, 2) == 3);
    CHECK(floor_div(-7, 2) == -4);
    CHECK(ceil_div(7, 2) == 4);
    CHECK(ceil_div(-7, 2) == -3);
    CHECK(bit_length(BigInt(1)) == 1);
    CHECK(bit_length(BigInt(255)) == 8);
    CHECK(bit_length(BigInt(256)) == 9);

    CHECK(iroot(0, 3) == 0);
    CHECK(iroot(26, 3) == 2);
    CHECK(iroot(27, 3) == 3);
    CHECK(iroot(1000000, 2) == 1000);
    BigInt big = pow2_int(200) + 12345;
    BigInt r = iroot(big, 5);
    CHECK(pow_rat(Rational(r), 5) <= Rational(big));
    CHECK(pow_rat(Rational(r + 1), 5) > Rational(big));
}

TEST_CASE("rational formatting") {
    CHECK(rat_string(Rational(1, 2)) == "1/2");
    CHECK(rat_string(Rational(4, 2)) == "2");
    CHECK(parse_rational("3/4") == Rational(3, 4));
    CHECK(parse_rational("-5") == Rational(-5));
    CHECK_THROWS_AS(parse_rational("x"), std::invalid_argument);
    CHECK_THROWS_AS(parse_rational("1/0"), std::invalid_argument);
    CHECK(pow_rat(Rational(2, 3), 3) == Rational(8, 27));
    CHECK(pow_rat(Rational(2, 3), -2) == Rational(9, 4));
}

TEST_CASE("power values compare exactly") {
    PowerValue a = PowerValue::term(1, Rational(-1, 2));  // 2^(-1/2) ~ 0.7071
    PowerValue b = PowerValue::term(3, Rational(-2));     // 3/4
    CHECK(a < b);
    CHECK(!(b < a));
    CHECK(a.compare(a) == 0);

    // sums reduce into the canonical vector: 2^(-1/2) + 2^(-1/2) = 2^(1/2)
    PowerValue two_halves = a + a;
    CHECK(two_halves == PowerValue::term(1, Rational(1, 2)));

    // mixed denominators unify
    PowerValue c = PowerValue::term(1, Rational(-1, 3));
    PowerValue d = PowerValue::term(1, Rational(-1, 2));
    CHECK(d < c);  // 2^(-1/2) < 2^(-1/3)

    // rationality detection
    CHECK(b.is_rational());
    CHECK(b.as_rational() == Rational(3, 4));
    CHECK(!a.is_rational());
    CHECK((a + b).compare(b + a) == 0);

    // tight comparisons that force interval refinement
    PowerValue e = PowerValue::term(5, Rational(-1, 2)) + PowerValue::term(1, Rational(0));
    PowerValue f = PowerValue::term(1, Rational(1, 2)) + PowerValue::term(3, Rational(0));
    // 5/sqrt2 + 1 = 4.5355... vs sqrt2 + 3 = 4.4142...
    CHECK(f < e);
}

TEST_CASE("single power terms") {
    PowTerm sqrt2{1, Rational(1, 2)};
    PowTerm x{3, Rational(-1)};  // 1.5
    CHECK(sqrt2 < x);
    CHECK(PowTerm::compare(sqrt2, sqrt2) == 0);
    CHECK(sqrt2.reciprocal() == PowTerm{1, Rational(-1, 2)});
    PowTerm z = PowTerm::zero();
    CHECK(z < x);
    CHECK(PowTerm::compare(z, z) == 0);
    CHECK(sqrt2.to_power_value() == PowerValue::term(1, Rational(1, 2)));
}

TEST_CASE("deterministic rng") {
    Rng a(42), b(42);
    for (int i = 0; i < 100; ++i) CHECK(a.next() == b.next());
    Rng c(42);
    std::uint64_t first = c.next();
    Rng d(43);
    CHECK(first != d.next());
}
