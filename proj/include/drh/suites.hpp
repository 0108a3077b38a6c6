#pragma once

#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "drh/constructions.hpp"
#include "drh/cover_oracle.hpp"
#include "drh/dim_eval.hpp"

namespace drh {

struct CheckResult {
    std::string name;
    bool pass;
    std::string detail;
};

// ----------------------------------------------------- randomized inputs

// Digit sets whose density limits are certified exact.
inline DigitSet random_exact_set(Rng& rng) {
    switch (rng.below(8)) {
        case 0: {  // eventually periodic
            BigInt mod = 2 + rng.below(9);
            std::vector<BigInt> residues;
            for (BigInt r = 0; r < mod; ++r)
                if (rng.chance(1, 2)) residues.push_back(r);
            if (residues.empty()) residues.push_back(rng.below(mod.convert_to<unsigned long>()));
            BigInt threshold = 1 + rng.below(16);
            std::vector<BigInt> prefix;
            for (BigInt v = 1; v < threshold; ++v)
                if (rng.chance(1, 3)) prefix.push_back(v);
            return DigitSet::eventually_periodic(threshold, mod, residues, prefix);
        }
        case 1: {  // finite
            std::vector<BigInt> members;
            long count = rng.range(0, 6);
            for (long i = 0; i < count; ++i) members.push_back(1 + rng.below(64));
            return DigitSet::finite(members);
        }
        case 2: {  // sawtooth with integer block-end ratio
            static const std::pair<int, int> los[] = {{1, 3}, {1, 4}, {1, 5}, {1, 6}, {2, 5}, {1, 2}, {1, 3}};
            static const std::pair<int, int> his[] = {{2, 3}, {1, 2}, {1, 2}, {1, 2}, {4, 5}, {2, 3}, {3, 4}};
            auto i = rng.below(7);
            return DigitSet::sawtooth(Rational(los[i].first, los[i].second),
                                      Rational(his[i].first, his[i].second));
        }
        case 3: return DigitSet::zero_one_member(1 + static_cast<long>(rng.below(4)));
        case 4: return DigitSet::prime_factorial_member(1 + static_cast<long>(rng.below(4)));
        case 5: return DigitSet::prime_factorial_guard(1 + static_cast<long>(rng.below(3)));
        case 6: {  // dilated periodic
            DigitSet base = DigitSet::eventually_periodic(1, 2 + rng.below(4), {BigInt(0)});
            long q = 2 + static_cast<long>(rng.below(4));
            long p = 1 + static_cast<long>(rng.below(static_cast<unsigned long>(q - 1)));
            return base.dilated(p, q);
        }
        default: {  // boolean combo of periodic pieces
            DigitSet a = DigitSet::eventually_periodic(1 + rng.below(8), 2 + rng.below(5),
                                                       {BigInt(rng.below(2))});
            DigitSet b = DigitSet::multiples(2 + rng.below(4));
            switch (rng.below(3)) {
                case 0: return set_union(a, b);
                case 1: return set_intersection(a, b);
                default: return set_complement(a);
            }
        }
    }
}

// A scale sequence that the evaluator certifies jointly with s.
inline ScaleSequence random_exact_scales(Rng& rng, const DigitSet& s) {
    LimitProfile p = s.profile();
    bool converges = p.density_converges();
    std::vector<std::function<ScaleSequence()>> pool;
    pool.push_back([] { return ScaleSequence::all_levels(); });
    pool.push_back([&] { return ScaleSequence::arithmetic(rng.below(5), 1 + rng.below(5)); });
    if (converges || p.superfactorial_gaps) {
        pool.push_back([&] { return ScaleSequence::super_geometric(1, 2); });
        pool.push_back([&] { return ScaleSequence::super_geometric(2, Rational(3, 2)); });
        pool.push_back([&] { return ScaleSequence::super_geometric(1, 3); });
    }
    if (!converges && s.infinite_blocks()) {
        pool.push_back([&] { return ScaleSequence::block_ends(s); });
        if (p.block_start_limit) pool.push_back([&] { return ScaleSequence::block_starts(s); });
    }
    if (converges && s.infinite_blocks()) pool.push_back([&] { return ScaleSequence::block_ends(s); });
    if (p.exact && !converges && dynamic_cast<const detail::SawtoothNode*>(s.node())) {
        pool.push_back([&] {
            Rational alpha = p.liminf + (p.limsup - p.liminf) * Rational(1 + rng.below(9), 10);
            return target_density_scales(s, alpha);
        });
    }
    return pool[rng.below(pool.size())]();
}

inline TreeSet random_tree_nd(int n, long depth, Rng& rng) { return random_tree(n, depth, rng); }

// -------------------------------------------------------------- suites

// hausdorff <= dim_D <= packing, exact on certified pairs; evidence windows
// must respect the certified endpoints otherwise.
inline std::vector<CheckResult> suite_sandwich(long cases, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<CheckResult> out;
    long exact_done = 0, fuzzy_done = 0;
    for (long c = 0; c < cases; ++c) {
        DigitSet s = random_exact_set(rng);
        ScaleSequence d = random_exact_scales(rng, s);
        auto [h, p] = density_limits(s);
        LimitBounds v = restricted_dim(s, d);
        std::ostringstream nm;
        nm << "sandwich/" << c;
        if (h.exact && p.exact && v.exact) {
            bool ok = h.lower <= v.lower && v.upper <= p.upper;
            out.push_back({nm.str(), ok, "exact " + rat_string(h.lower) + " <= " + rat_string(v.lower) +
                                             " <= " + rat_string(p.upper)});
            ++exact_done;
        } else {
            bool ok = v.upper >= h.lower && v.lower <= p.upper;
            out.push_back({nm.str(), ok, "evidence window consistent"});
            ++fuzzy_done;
        }
    }
    // inexact pairs must still be generated and consistent
    for (long c = 0; c < cases / 10 + 3; ++c) {
        DigitSet s = DigitSet::sawtooth(Rational(1, 3), Rational(2, 3));
        ScaleSequence d = ScaleSequence::super_geometric(1, 2 + rng.below(2));
        auto [h, p] = density_limits(s);
        LimitBounds v = restricted_dim(s, d);
        std::ostringstream nm;
        nm << "sandwich/fuzzy/" << c;
        bool ok = !v.exact && v.upper >= h.lower && v.lower <= p.upper;
        out.push_back({nm.str(), ok, "inexact evidence consistent"});
    }
    std::ostringstream tally;
    tally << exact_done << " exact pairs, " << fuzzy_done << " evidence pairs";
    out.push_back({"sandwich/exact-coverage", exact_done >= cases * 9 / 10, tally.str()});
    return out;
}

// DP equals exhaustive enumeration on random trees.
inline std::vector<CheckResult> suite_oracle_equivalence(long cases1, long cases2, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<CheckResult> out;
    auto one = [&](int n, long depth, long idx) {
        TreeSet t = random_tree(n, depth, rng);
        static const Rational svals[] = {Rational(1), Rational(1, 2), Rational(1, 3), Rational(3, 4),
                                         Rational(2, 3)};
        Rational s = svals[rng.below(5)];
        if (n == 2 && rng.chance(1, 4)) s = Rational(3, 2);
        std::vector<BigInt> allowed;
        for (long l = 1; l <= depth; ++l)
            if (rng.chance(1, 2)) allowed.push_back(l);
        if (allowed.empty()) allowed.push_back(1 + rng.below(static_cast<unsigned long>(depth)));
        ContentQuery q(t, s, ScaleSequence::sparse_levels(allowed, depth + 64), depth);
        auto a = min_cover_content_dp(q);
        auto b = brute_force_content(q);
        bool ok = a.feasible() == b.feasible() && (!a.feasible() || (*a).compare(*b) == 0);
        std::ostringstream nm, det;
        nm << "oracle/" << n << "d/" << idx;
        if (a.feasible()) det << (*a).to_string();
        out.push_back({nm.str(), ok, det.str()});
    };
    for (long c = 0; c < cases1; ++c) one(1, 4 + static_cast<long>(rng.below(3)), c);
    for (long c = 0; c < cases2; ++c) one(2, 3 + static_cast<long>(rng.below(2)), c);
    return out;
}

// survivors_at_level(A_S, l) = 2^count(S, l), counting membership one by one.
inline std::vector<CheckResult> suite_formula_counting() {
    std::vector<std::pair<std::string, DigitSet>> sets = {
        {"evens", DigitSet::evens()},
        {"finite", DigitSet::finite({2, 3, 5, 7, 11, 13})},
        {"periodic", DigitSet::eventually_periodic(5, 3, {BigInt(1)}, {BigInt(2)})},
        {"sawtooth", DigitSet::sawtooth(Rational(1, 3), Rational(2, 3))},
        {"zero_one_2", DigitSet::zero_one_member(2)},
        {"prime_factorial_2", DigitSet::prime_factorial_member(2)},
        {"dilated", DigitSet::evens().dilated(2, 3)},
        {"union", set_union(DigitSet::multiples(3), DigitSet::finite({1, 7}))},
        {"complement", set_complement(DigitSet::evens())},
        {"witness", DigitSet::half_density_witness(std::make_shared<SuperGeometricRule>(1, 4), "all")},
    };
    std::vector<CheckResult> out;
    for (const auto& [name, s] : sets) {
        TreeSet t = TreeSet::from_digitset(s);
        bool ok = true;
        BigInt naive = 0;
        for (long l = 1; l <= 64 && ok; ++l) {
            if (s.contains(l)) ++naive;
            SurvivorCount sc = t.survivors_at_level(l);
            ok = sc.pow2 && sc.value == naive;
        }
        // traversal cross-check at shallow depth
        if (ok) {
            long l = 12;
            BigInt walked = 0;
            t.walk(l, [&](const TreePath& p) {
                if (p.level == l) ++walked;
            });
            ok = walked == t.survivors_at_level(l).as_integer();
        }
        out.push_back({"formula/" + name, ok, "levels 1..64 + traversal@12"});
    }
    return out;
}

// Both dilation bound candidates, scanned to 10^4.
inline std::vector<CheckResult> suite_dilation_bounds() {
    std::vector<CheckResult> out;
    static const std::pair<long, long> pqs[] = {{1, 2}, {2, 3}, {1, 3}, {3, 4}, {2, 5}, {3, 5}};
    bool derived_all = true;
    for (auto [p, q] : pqs)
        for (BigInt i = 1; i <= 10000; ++i)
            if (!dilation_bound_holds(i, p, q)) derived_all = false;
    out.push_back({"dilation/derived-bound", derived_all, "i/r <= phi(i) < (i+p)/r for i <= 10^4"});
    bool printed_fails = !dilation_bound_printed_form(3, 2, 3);
    out.push_back({"dilation/printed-form-counterexample", printed_fails,
                   "(i-p)/r < phi(i) <= i/r fails at i=3, p=2, q=3"});
    bool order = true;
    Rng rng(11);
    for (int c = 0; c < 40; ++c) {
        DigitSet s = random_exact_set(rng);
        long q = 2 + static_cast<long>(rng.below(3));
        long p = 1 + static_cast<long>(rng.below(static_cast<unsigned long>(q - 1)));
        DigitSet t = s.dilated(p, q);
        for (BigInt k = 1; k <= 200; ++k)
            if (t.count(detail::dilate_index(k, p, q)) != s.count(k)) order = false;
    }
    out.push_back({"dilation/count-transport", order, "count(T, phi(k)) == count(S, k)"});
    return out;
}

// min_cover_content >= mass(root) / (2^n C) with C from the mass scan.
inline std::vector<CheckResult> suite_mass_principle(long cases, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<CheckResult> out;
    for (long c = 0; c < cases; ++c) {
        DigitSet s = random_exact_set(rng);
        TreeSet t = TreeSet::from_digitset(s);
        WeightedTree w = WeightedTree::uniform(t);
        static const Rational svals[] = {Rational(1, 2), Rational(1, 3), Rational(2, 3), Rational(1, 4),
                                         Rational(3, 4), Rational(1)};
        Rational sexp = svals[rng.below(6)];
        long depth = 12 + static_cast<long>(rng.below(8));
        ScaleSequence d = rng.chance(1, 2) ? ScaleSequence::all_levels()
                                           : ScaleSequence::arithmetic(rng.below(3), 1 + rng.below(3));
        MassReport rep = mass_check(w, sexp, d, depth);
        auto dp = min_cover_content_dp(ContentQuery(t, sexp, d, depth));
        PowTerm floor_bound = rep.best_constant.reciprocal().scaled(Rational(1, 2));
        bool ok = dp.feasible() && !((*dp) < floor_bound.to_power_value());
        std::ostringstream nm;
        nm << "mass/" << c;
        out.push_back({nm.str(), ok,
                       "content " + (dp.feasible() ? (*dp).to_string() : "infeasible") + " >= " +
                           floor_bound.to_string()});
    }
    return out;
}

// Children masses sum exactly to the parent mass.
inline std::vector<CheckResult> suite_conservation() {
    std::vector<CheckResult> out;
    for (long i : {2L, 3L}) {
        DigitSet s = i == 2 ? DigitSet::evens() : DigitSet::sawtooth(Rational(1, 3), Rational(2, 3));
        TreeSet t = TreeSet::from_digitset(s);
        WeightedTree w = WeightedTree::uniform(t);
        bool ok = true;
        t.walk(19, [&](const TreePath& p) {
            Rational sum = 0;
            for (int d : t.children(p)) sum += w.mass(p.child(d, 1));
            if (sum != w.mass(p)) ok = false;
        });
        out.push_back({std::string("conservation/") + (i == 2 ? "evens" : "sawtooth"), ok, "depth 20"});
    }
    return out;
}

inline std::vector<CheckResult> run_suite(const std::string& name, long cases, std::uint64_t seed) {
    if (name == "sandwich") return suite_sandwich(cases ? cases : 200, seed);
    if (name == "oracle-equivalence")
        return suite_oracle_equivalence(cases ? cases : 100, cases ? cases / 5 : 20, seed);
    if (name == "formula-counting") return suite_formula_counting();
    if (name == "dilation-bounds") return suite_dilation_bounds();
    if (name == "mass-principle") return suite_mass_principle(cases ? cases : 50, seed);
    if (name == "conservation") return suite_conservation();
    if (name == "all") {
        std::vector<CheckResult> out;
        for (const char* s : {"sandwich", "oracle-equivalence", "formula-counting", "dilation-bounds",
                              "mass-principle", "conservation"}) {
            auto part = run_suite(s, cases, seed);
            out.insert(out.end(), part.begin(), part.end());
        }
        return out;
    }
    throw std::invalid_argument("unknown verify suite: " + name);
}

}  // namespace drh
