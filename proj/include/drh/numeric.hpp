#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace drh {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

inline BigInt big_num(const Rational& r) { return boost::multiprecision::numerator(r); }
inline BigInt big_den(const Rational& r) { return boost::multiprecision::denominator(r); }

// 2^e for e >= 0.
inline BigInt pow2_int(const BigInt& e) {
    if (e < 0) throw std::invalid_argument("pow2_int: negative exponent");
    return BigInt(1) << static_cast<std::size_t>(e.convert_to<std::size_t>());
}

// 2^e as an exact rational, e may be negative.
inline Rational pow2_rat(long e) {
    if (e >= 0) return Rational(BigInt(1) << static_cast<std::size_t>(e));
    return Rational(1, BigInt(1) << static_cast<std::size_t>(-e));
}

inline BigInt factorial(const BigInt& n) {
    if (n < 0) throw std::invalid_argument("factorial: negative argument");
    BigInt r = 1;
    for (BigInt i = 2; i <= n; ++i) r *= i;
    return r;
}

// floor(a/b) for b > 0.
inline BigInt floor_div(const BigInt& a, const BigInt& b) {
    BigInt q = a / b, r = a % b;
    if (r != 0 && a < 0) --q;
    return q;
}

// ceil(a/b) for b > 0.
inline BigInt ceil_div(const BigInt& a, const BigInt& b) {
    BigInt q = a / b, r = a % b;
    if (r != 0 && a > 0) ++q;
    return q;
}

inline BigInt floor_rat(const Rational& r) { return floor_div(big_num(r), big_den(r)); }
inline BigInt ceil_rat(const Rational& r) { return ceil_div(big_num(r), big_den(r)); }

inline std::size_t bit_length(const BigInt& n) {
    if (n == 0) return 0;
    return boost::multiprecision::msb(n < 0 ? BigInt(-n) : n) + 1;
}

// Exact r^e for integer e (negative allowed when r != 0).
inline Rational pow_rat(const Rational& r, const BigInt& e) {
    if (e < 0) {
        if (r == 0) throw std::invalid_argument("pow_rat: 0 to negative power");
        return pow_rat(Rational(big_den(r), big_num(r)), -e);
    }
    Rational base = r, acc = 1;
    BigInt k = e;
    while (k > 0) {
        if ((k & 1) != 0) acc *= base;
        base *= base;
        k >>= 1;
    }
    return acc;
}

// Largest x >= 0 with x^q <= n, for n >= 0, q >= 1 (Newton iteration).
inline BigInt iroot(const BigInt& n, unsigned q) {
    if (n < 0 || q == 0) throw std::invalid_argument("iroot: bad arguments");
    if (n == 0 || q == 1) return n;
    BigInt x = BigInt(1) << static_cast<std::size_t>(bit_length(n) / q + 1);
    auto powq = [&](const BigInt& v) {
        BigInt acc = 1;
        for (unsigned i = 0; i < q; ++i) acc *= v;
        return acc;
    };
    while (true) {
        BigInt xq1 = 1;  // x^(q-1)
        for (unsigned i = 0; i + 1 < q; ++i) xq1 *= x;
        BigInt next = ((q - 1) * x + n / xq1) / q;
        if (next >= x) break;
        x = next;
    }
    while (powq(x) > n) --x;
    while (powq(x + 1) <= n) ++x;
    return x;
}

inline std::string to_string(const BigInt& n) { return n.str(); }

// Rationals travel as "p/q" strings (plain "n" when the denominator is 1).
inline std::string rat_string(const Rational& r) {
    if (big_den(r) == 1) return big_num(r).str();
    return big_num(r).str() + "/" + big_den(r).str();
}

inline Rational parse_rational(const std::string& s) {
    auto slash = s.find('/');
    try {
        if (slash == std::string::npos) return Rational(BigInt(s));
        BigInt num(s.substr(0, slash)), den(s.substr(slash + 1));
        if (den == 0) throw std::invalid_argument("zero denominator");
        return Rational(num, den);
    } catch (const std::exception&) {
        throw std::invalid_argument("not a rational: '" + s + "'");
    }
}

inline double approx(const Rational& r) { return r.convert_to<double>(); }

// Deterministic splitmix64 stream; std:: distributions are implementation
// defined, so all randomized suites draw through this.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform in [0, n), n >= 1.
    std::uint64_t below(std::uint64_t n) { return next() % n; }

    // Uniform in [lo, hi].
    long range(long lo, long hi) {
        return lo + static_cast<long>(below(static_cast<std::uint64_t>(hi - lo + 1)));
    }

    bool chance(unsigned num, unsigned den) { return below(den) < num; }

  private:
    std::uint64_t state_;
};

}  // namespace drh
