#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <stdexcept>
#include <vector>

#include "drh/power_value.hpp"
#include "drh/scale_sequence.hpp"
#include "drh/tree_set.hpp"

namespace drh {

// Restricted-content query: minimal cost sum |E_i|^s over dyadic covers of
// the surviving depth-m cubes, every piece at an allowed level <= depth.
struct ContentQuery {
    TreeSet tree;
    Rational s;  // >= 0, <= ambient dimension
    ScaleSequence scales;
    long depth;

    ContentQuery(TreeSet t, Rational s_, ScaleSequence sc, long d)
        : tree(std::move(t)), s(std::move(s_)), scales(std::move(sc)), depth(d) {
        if (s < 0 || s > tree.ambient()) throw std::invalid_argument("content query: need 0 <= s <= n");
        if (depth < 1) throw std::invalid_argument("content query: depth >= 1");
    }
};

// Feasible exact value, or the leftmost branch that no allowed level covers.
struct ContentOutcome {
    std::optional<PowerValue> value;
    std::optional<TreePath> infeasible_witness;

    bool feasible() const { return value.has_value(); }
    const PowerValue& operator*() const {
        if (!value) throw std::logic_error("content: infeasible query has no value");
        return *value;
    }
};

namespace detail {

// (2^-l)^s for a level-l cube
inline PowerValue level_cost(long level, const Rational& s) {
    return PowerValue::term(1, -Rational(level) * s);
}

struct DpContext {
    const ContentQuery& q;
    std::vector<bool> allowed;  // index by level <= depth
    int n;
    std::map<std::pair<long, BigInt>, std::optional<PowerValue>> memo;
    bool level_uniform;  // digit-restriction trees: cost depends on the level only
    std::vector<std::optional<std::optional<PowerValue>>> level_memo;

    explicit DpContext(const ContentQuery& query) : q(query), n(query.tree.ambient()) {
        allowed.assign(static_cast<std::size_t>(q.depth) + 1, false);
        for (long l : q.scales.allowed_up_to(q.depth)) allowed[static_cast<std::size_t>(l)] = true;
        level_uniform = q.tree.as_digitset_tree() != nullptr;
        level_memo.assign(static_cast<std::size_t>(q.depth) + 1, std::nullopt);
    }

    std::optional<PowerValue> cost(const TreePath& p) {
        if (level_uniform) {
            auto& slot = level_memo[static_cast<std::size_t>(p.level)];
            if (!slot) slot = compute(p);
            return *slot;
        }
        auto key = std::make_pair(p.level, p.offset);
        auto it = memo.find(key);
        if (it != memo.end()) return it->second;
        auto v = compute(p);
        memo.emplace(key, v);
        return v;
    }

    std::optional<PowerValue> compute(const TreePath& p) {
        std::optional<PowerValue> best;
        if (p.level >= 1 && allowed[static_cast<std::size_t>(p.level)]) best = level_cost(p.level, q.s);
        if (p.level < q.depth) {
            PowerValue sum;
            bool ok = true;
            for (int d : q.tree.children(p)) {
                auto c = cost(p.child(d, n));
                if (!c) {
                    ok = false;
                    break;
                }
                sum += *c;
            }
            if (ok && (!best || sum < *best)) best = sum;
        }
        return best;
    }

    // leftmost surviving branch with no allowed ancestor level
    TreePath find_witness(const TreePath& p) {
        if (p.level >= q.depth) return p;
        return find_witness(p.child(q.tree.children(p).front(), n));
    }
};

}  // namespace detail

// Minimal restricted cover content over dyadic-aligned covers, by tree
// dynamic programming: a node is either covered whole at its own level (when
// allowed) or delegated to its children.
inline ContentOutcome min_cover_content_dp(const ContentQuery& q) {
    detail::DpContext ctx(q);
    TreePath root{0, 0};
    auto v = ctx.cost(root);
    if (v) return {std::move(v), std::nullopt};
    return {std::nullopt, ctx.find_witness(root)};
}

// The optimal cover itself (for certificate checks): pieces as tree paths.
inline std::vector<TreePath> min_cover_pieces(const ContentQuery& q) {
    detail::DpContext ctx(q);
    std::vector<TreePath> out;
    std::function<void(const TreePath&)> emit = [&](const TreePath& p) {
        auto total = ctx.cost(p);
        if (!total) throw std::logic_error("min_cover_pieces: infeasible");
        if (p.level >= 1 && ctx.allowed[static_cast<std::size_t>(p.level)] &&
            detail::level_cost(p.level, q.s).compare(*total) == 0) {
            out.push_back(p);
            return;
        }
        for (int d : q.tree.children(p)) emit(p.child(d, q.tree.ambient()));
    };
    emit(TreePath{0, 0});
    return out;
}

// Exhaustive minimization over every antichain of allowed-level cubes that
// covers the surviving depth-m cubes. No per-node caching: the full choice
// tree is walked with branch-and-bound pruning, which keeps it a genuinely
// independent oracle for the DP. Depth is capped at 8.
inline ContentOutcome brute_force_content(const ContentQuery& q) {
    if (q.depth > 8) throw std::invalid_argument("brute force content: depth capped at 8");
    std::vector<bool> allowed(static_cast<std::size_t>(q.depth) + 1, false);
    for (long l : q.scales.allowed_up_to(q.depth)) allowed[static_cast<std::size_t>(l)] = true;
    int n = q.tree.ambient();

    std::optional<PowerValue> best;
    // stack of nodes still to be covered
    std::vector<TreePath> pending{TreePath{0, 0}};
    std::function<void(std::vector<TreePath>&, const PowerValue&)> go = [&](std::vector<TreePath>& stack,
                                                                            const PowerValue& acc) {
        if (best && !(acc < *best)) return;  // prune
        if (stack.empty()) {
            best = acc;
            return;
        }
        TreePath p = stack.back();
        stack.pop_back();
        if (p.level >= 1 && allowed[static_cast<std::size_t>(p.level)]) {
            PowerValue with = acc + detail::level_cost(p.level, q.s);
            go(stack, with);
        }
        if (p.level < q.depth) {
            auto kids = q.tree.children(p);
            for (int d : kids) stack.push_back(p.child(d, n));
            go(stack, acc);
            for (std::size_t i = 0; i < kids.size(); ++i) stack.pop_back();
        }
        stack.push_back(p);
    };
    go(pending, PowerValue(Rational(0)));
    if (best) return {std::move(best), std::nullopt};
    detail::DpContext ctx(q);
    return {std::nullopt, ctx.find_witness(TreePath{0, 0})};
}

// Single-level cover value min over allowed levels l <= depth of
// survivors(l) * 2^-ls; for digit-restriction trees this equals the DP
// optimum (branching is uniform per level), asserted in tests as a second
// route.
inline std::optional<PowerValue> single_level_content(const DigitSet& s, const Rational& exponent,
                                                      const ScaleSequence& scales, long depth) {
    std::optional<PowerValue> best;
    for (long l : scales.allowed_up_to(depth)) {
        PowerValue v = PowerValue::term(pow2_rat(s.count(l).convert_to<long>()), -Rational(l) * exponent);
        if (!best || v < *best) best = v;
    }
    return best;
}

// Per-depth content profile; a decay to 0 is evidence dim_D <= s, a floor is
// evidence dim_D >= s.
inline std::vector<ContentOutcome> content_decay_profile(const TreeSet& tree, const Rational& s,
                                                         const ScaleSequence& scales,
                                                         const std::vector<long>& depths) {
    long prev = 0;
    std::vector<ContentOutcome> out;
    for (long d : depths) {
        if (d <= prev) throw std::invalid_argument("decay profile: depths must increase");
        prev = d;
        out.push_back(min_cover_content_dp(ContentQuery(tree, s, scales, d)));
    }
    return out;
}

// ------------------------------------------------------------- mass check

struct MassReport {
    PowTerm best_constant;  // max over allowed-level surviving cubes of mass/|U|^s
    TreePath witness;
    bool divergent = false;   // per-level maxima still climbing at the scan edge
    int aligned_slack_n = 1;  // an arbitrary set of an allowed diameter meets <= 2^n aligned cubes

    Json to_json() const {
        return {{"best_constant", best_constant.to_string()},
                {"best_constant_approx", best_constant.approx()},
                {"witness_level", witness.level},
                {"witness_offset", witness.offset.str()},
                {"divergent", divergent},
                {"aligned_slack", std::string("2^") + std::to_string(aligned_slack_n)}};
    }
};

// Scan mass(U)/|U|^s over surviving dyadic nodes at allowed levels <= depth.
// Any cover piece the DP can use is such a node, so the reported constant C
// certifies min_cover_content >= mass(root)/C >= mass(root)/(2^n C) with the
// non-aligned slack folded in.
inline MassReport mass_check(const WeightedTree& w, const Rational& s, const ScaleSequence& scales,
                             long depth) {
    std::vector<long> levels = scales.allowed_up_to(depth);
    if (levels.empty()) throw std::invalid_argument("mass check: no allowed level within depth");
    MassReport rep;
    rep.aligned_slack_n = w.base().ambient();
    rep.best_constant = PowTerm::zero();
    std::vector<PowTerm> per_level;

    if (w.is_uniform_digitset()) {
        const DigitSet& set = w.digitset();
        for (long l : levels) {
            PowTerm ratio{pow2_rat(-set.count(l).convert_to<long>()), Rational(l) * s};
            per_level.push_back(ratio);
            if (rep.best_constant < ratio) {
                rep.best_constant = ratio;
                rep.witness = TreePath{l, 0};
            }
        }
    } else {
        std::vector<bool> allowed(static_cast<std::size_t>(depth) + 1, false);
        for (long l : levels) allowed[static_cast<std::size_t>(l)] = true;
        std::map<long, PowTerm> level_max;
        w.base().walk(depth, [&](const TreePath& p) {
            if (p.level < 1 || !allowed[static_cast<std::size_t>(p.level)]) return;
            PowTerm ratio{w.mass(p), Rational(p.level) * s};
            auto [it, fresh] = level_max.emplace(p.level, ratio);
            if (!fresh && it->second < ratio) it->second = ratio;
            if (rep.best_constant < ratio) {
                rep.best_constant = ratio;
                rep.witness = p;
            }
        });
        for (long l : levels) per_level.push_back(level_max.at(l));
    }

    // divergence: the deepest third of the allowed levels tops everything
    // seen before it
    std::size_t m = per_level.size();
    if (m >= 3) {
        std::size_t cut = 2 * m / 3;
        PowTerm head = per_level[0], tail = per_level[cut];
        for (std::size_t i = 1; i < cut; ++i)
            if (head < per_level[i]) head = per_level[i];
        for (std::size_t i = cut + 1; i < m; ++i)
            if (tail < per_level[i]) tail = per_level[i];
        rep.divergent = head < tail;
    }
    return rep;
}

// ------------------------------------------------- window density estimate

// max #(S  intersect  (m, m+k]) over m in [0, max_offset], for each k; the
// subadditive envelope f(k)/k upper-bounds the Assouad dimension of A_S.
inline LimitBounds window_density_estimate(const DigitSet& s, long max_window = 64,
                                           long max_offset = 4096) {
    // certified rule classes first
    LimitProfile p = s.profile();
    if (auto* per = dynamic_cast<const detail::PeriodicNode*>(s.node())) {
        (void)per;
        if (p.density_converges()) {
            // eventually periodic: windows of one period length carry exactly
            // the residue count, and the subadditive limit equals the density
            return LimitBounds::exactly(p.liminf);
        }
    }
    if (dynamic_cast<const detail::FiniteNode*>(s.node()) != nullptr)
        return LimitBounds::exactly(0);
    if (s.unbounded_block_lengths()) {
        // a full window of every length sits inside some block, so the
        // envelope is identically 1
        return LimitBounds::exactly(1);
    }

    long horizon = max_offset + max_window;
    std::vector<long> counts(static_cast<std::size_t>(horizon) + 1, 0);
    for (long i = 1; i <= horizon; ++i)
        counts[static_cast<std::size_t>(i)] =
            counts[static_cast<std::size_t>(i - 1)] + (s.contains(i) ? 1 : 0);
    Rational best_upper = 1;
    for (long k = 1; k <= max_window; ++k) {
        long fk = 0;
        for (long m = 0; m + k <= horizon; ++m)
            fk = std::max(fk, counts[static_cast<std::size_t>(m + k)] - counts[static_cast<std::size_t>(m)]);
        Rational r(fk, k);
        if (r < best_upper) best_upper = r;
    }
    return LimitBounds::evidence(0, best_upper, max_window);
}

// Exact max members in an aligned window (m L, (m+1) L]; defined for the
// rule classes whose window structure is fully analyzable.
inline long aligned_window_max(const DigitSet& s, long window) {
    if (auto* fin = dynamic_cast<const detail::FiniteNode*>(s.node())) {
        (void)fin;
        BigInt top = 1;
        while (s.count(top) < s.count(top * 2)) top *= 2;  // beyond the last member
        long best = 0;
        for (BigInt m = 0; m * window <= top; ++m) {
            BigInt lo = m * window + 1, hi = (m + 1) * window;
            best = std::max(best, (s.count(hi) - (lo > 1 ? s.count(lo - 1) : 0)).convert_to<long>());
        }
        return best;
    }
    Json j = s.to_json();
    if (j.at("kind") == "eventually_periodic") {
        BigInt threshold(j.at("threshold").get<std::string>());
        BigInt modulus(j.at("modulus").get<std::string>());
        BigInt period = boost::multiprecision::lcm(modulus, BigInt(window));
        BigInt top = threshold + 2 * period + window;
        long best = 0;
        for (BigInt m = 0; m * window <= top; ++m) {
            BigInt lo = m * window + 1, hi = (m + 1) * window;
            best = std::max(best, (s.count(hi) - (lo > 1 ? s.count(lo - 1) : 0)).convert_to<long>());
        }
        return best;
    }
    throw std::invalid_argument("aligned window max: rule class without certified window structure");
}

}  // namespace drh
