#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "drh/numeric.hpp"

namespace drh {

// Exact nonnegative reals of the form sum_j c_j * 2^(a_j / q) with rational
// c_j and integer a_j. Cover contents and mass ratios live here: a piece of
// diameter 2^-l raised to the exponent s = p/q costs 2^(-l p / q), which is
// irrational unless q | l p. Canonical form: value = sum_{r<q} v[r] * u^r
// where u = 2^(-1/q), using u^q = 1/2 to reduce exponents. The v vector is
// unique because 1, u, ..., u^(q-1) are linearly independent over Q
// (x^q - 1/2 is irreducible), so equality is coefficient equality and sign
// questions reduce to interval evaluation at u.
class PowerValue {
  public:
    PowerValue() : q_(1), v_(1, Rational(0)) {}

    explicit PowerValue(const Rational& r) : q_(1), v_(1, r) {
        if (r < 0) throw std::invalid_argument("PowerValue: negative");
    }

    // coeff * 2^(exp2), exp2 rational.
    static PowerValue term(const Rational& coeff, const Rational& exp2) {
        if (coeff < 0) throw std::invalid_argument("PowerValue: negative coefficient");
        unsigned q = static_cast<unsigned>(big_den(exp2).convert_to<unsigned long>());
        PowerValue out(q);
        if (coeff == 0) return out;
        // exponent of u = 2^(-1/q): coeff * 2^(a/q) = coeff * u^(-a)
        BigInt a = -big_num(exp2);
        BigInt m = floor_div(a, BigInt(q));
        long r = (a - m * q).convert_to<long>();
        out.v_[static_cast<std::size_t>(r)] = coeff * pow2_rat(-m.convert_to<long>());
        return out;
    }

    unsigned exponent_denominator() const { return q_; }

    bool is_zero() const {
        for (const auto& c : v_)
            if (c != 0) return false;
        return true;
    }

    bool is_rational() const {
        for (std::size_t r = 1; r < v_.size(); ++r)
            if (v_[r] != 0) return false;
        return true;
    }

    // Defined whenever every non-integral power carries a zero coefficient.
    Rational as_rational() const {
        if (!is_rational()) throw std::logic_error("PowerValue: not rational");
        return v_[0];
    }

    PowerValue& operator+=(const PowerValue& o) {
        unify(o.q_);
        PowerValue t = o;
        t.unify(q_);
        for (std::size_t r = 0; r < v_.size(); ++r) v_[r] += t.v_[r];
        return *this;
    }

    friend PowerValue operator+(PowerValue a, const PowerValue& b) { return a += b; }

    PowerValue operator*(const Rational& c) const {
        if (c < 0) throw std::invalid_argument("PowerValue: negative scale");
        PowerValue out = *this;
        for (auto& x : out.v_) x *= c;
        return out;
    }

    // Exact three-way comparison.
    int compare(const PowerValue& o) const {
        PowerValue a = *this, b = o;
        a.unify(o.q_);
        b.unify(a.q_);
        std::vector<Rational> d(a.v_.size());
        bool zero = true, nonneg = true, nonpos = true;
        for (std::size_t r = 0; r < d.size(); ++r) {
            d[r] = a.v_[r] - b.v_[r];
            if (d[r] != 0) zero = false;
            if (d[r] < 0) nonneg = false;
            if (d[r] > 0) nonpos = false;
        }
        if (zero) return 0;
        if (nonneg) return 1;  // all coefficients >= 0, some positive
        if (nonpos) return -1;
        return sign_at_u(d, a.q_);
    }

    bool operator==(const PowerValue& o) const { return compare(o) == 0; }
    bool operator<(const PowerValue& o) const { return compare(o) < 0; }
    bool operator<=(const PowerValue& o) const { return compare(o) <= 0; }

    double approx() const {
        double u = std::pow(2.0, -1.0 / static_cast<double>(q_));
        double acc = 0, up = 1;
        for (std::size_t r = 0; r < v_.size(); ++r, up *= u) acc += drh::approx(v_[r]) * up;
        return acc;
    }

    // Canonical text form, e.g. "3/4 + 2*2^(-1/2)".
    std::string to_string() const {
        std::ostringstream os;
        bool first = true;
        for (std::size_t r = 0; r < v_.size(); ++r) {
            if (v_[r] == 0) continue;
            if (!first) os << " + ";
            first = false;
            os << rat_string(v_[r]);
            if (r > 0) os << "*2^(-" << r << "/" << q_ << ")";
        }
        if (first) os << "0";
        return os.str();
    }

  private:
    explicit PowerValue(unsigned q) : q_(q), v_(q, Rational(0)) {
        if (q == 0) throw std::invalid_argument("PowerValue: zero denominator");
    }

    // Re-express with denominator lcm(q_, q2).
    void unify(unsigned q2) {
        unsigned g = gcd(q_, q2);
        unsigned l = q_ / g * q2;
        if (l == q_) return;
        std::vector<Rational> w(l, Rational(0));
        unsigned f = l / q_;  // u_old = u_new^f
        for (std::size_t r = 0; r < v_.size(); ++r) w[r * f] = v_[r];
        q_ = l;
        v_ = std::move(w);
    }

    static unsigned gcd(unsigned a, unsigned b) { return b == 0 ? a : gcd(b, a % b); }

    // Sign of sum d[r] * u^r at u = 2^(-1/q), for a vector that is neither
    // identically zero nor uniformly signed. Interval refinement terminates
    // because the value is a nonzero algebraic number.
    static int sign_at_u(const std::vector<Rational>& d, unsigned q) {
        for (std::size_t bits = 64;; bits *= 2) {
            if (bits > (1u << 22)) throw std::runtime_error("PowerValue: sign refinement overflow");
            // m <= 2^(bits - 1/q) < m+1  =>  u in [m, m+1] / 2^bits
            BigInt m = iroot(BigInt(1) << static_cast<std::size_t>(q * bits - 1), q);
            Rational lo(m, BigInt(1) << bits), hi(m + 1, BigInt(1) << bits);
            Rational lo_pow = 1, hi_pow = 1, sum_lo = 0, sum_hi = 0;
            for (std::size_t r = 0; r < d.size(); ++r) {
                if (d[r] > 0) {
                    sum_lo += d[r] * lo_pow;
                    sum_hi += d[r] * hi_pow;
                } else if (d[r] < 0) {
                    sum_lo += d[r] * hi_pow;
                    sum_hi += d[r] * lo_pow;
                }
                lo_pow *= lo;
                hi_pow *= hi;
            }
            if (sum_lo > 0) return 1;
            if (sum_hi < 0) return -1;
        }
    }

    unsigned q_;
    std::vector<Rational> v_;
};

// A single exact term coeff * 2^exp2 with rational exponent; ratios of
// dyadic masses to fractional powers land here and compare exactly via
// cross-powering.
struct PowTerm {
    Rational coeff = 0;  // >= 0
    Rational exp2 = 0;

    static PowTerm zero() { return {0, 0}; }
    bool is_zero() const { return coeff == 0; }

    // exact sign of a - b
    static int compare(const PowTerm& a, const PowTerm& b) {
        if (a.coeff == 0 || b.coeff == 0) return a.coeff == b.coeff ? 0 : (a.coeff == 0 ? -1 : 1);
        Rational de = a.exp2 - b.exp2;  // compare ca * 2^de vs cb
        BigInt p = big_num(de), q = big_den(de);
        Rational lhs = pow_rat(a.coeff, q), rhs = pow_rat(b.coeff, q);
        if (p >= 0)
            lhs *= Rational(pow2_int(p));
        else
            rhs *= Rational(pow2_int(-p));
        return lhs == rhs ? 0 : (lhs < rhs ? -1 : 1);
    }
    bool operator<(const PowTerm& o) const { return compare(*this, o) < 0; }
    bool operator==(const PowTerm& o) const { return compare(*this, o) == 0; }

    PowTerm reciprocal() const {
        if (coeff == 0) throw std::domain_error("PowTerm: reciprocal of zero");
        return {Rational(big_den(coeff), big_num(coeff)), -exp2};
    }
    PowTerm scaled(const Rational& c) const { return {coeff * c, exp2}; }

    PowerValue to_power_value() const { return PowerValue::term(coeff, exp2); }
    double approx() const { return drh::approx(coeff) * std::pow(2.0, drh::approx(exp2)); }
    std::string to_string() const {
        if (exp2 == 0) return rat_string(coeff);
        return rat_string(coeff) + "*2^(" + rat_string(exp2) + ")";
    }
};

}  // namespace drh
