#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <stdexcept>
#include <vector>

#include "drh/cover_oracle.hpp"
#include "drh/dim_eval.hpp"
#include "drh/scale_sequence.hpp"
#include "drh/tree_set.hpp"

namespace drh {

// --------------------------------------------------- target density scales

// Scale sequence realizing dim_D A_S = alpha for any alpha in the closed
// interval [hausdorff, packing]; rejects targets outside it. Requires exact
// limits for the rule class.
inline ScaleSequence target_density_scales(const DigitSet& s, const Rational& alpha) {
    auto [h, p] = density_limits(s);
    if (!h.exact || !p.exact)
        throw std::invalid_argument("target density scales: the set's density limits are not certified exact");
    if (alpha < h.lower || alpha > p.upper)
        throw std::invalid_argument("target density scales: alpha " + rat_string(alpha) +
                                    " outside the attainable interval [" + rat_string(h.lower) + ", " +
                                    rat_string(p.upper) + "]");
    return ScaleSequence(std::make_shared<TargetDensityRule>(s, alpha));
}

// ----------------------------------------------------------- Holder pair

// Witness digit set S with running density <= 1/2 and its index-dilated
// partner T; the digit transport A_T -> A_S is (p/q)-Holder and pushes the
// restricted dimension along the generating levels down by the dilation
// factor.
struct HolderPair {
    DigitSet s;
    DigitSet t;
    long p, q;
    ScaleSequence levels;
};

inline HolderPair holder_witness_pair(ScaleRulePtr levels, long p, long q,
                                      std::string selector_kind = "all", BigInt selector_modulus = 2,
                                      std::vector<BigInt> selector_residues = {}) {
    if (p < 1 || p >= q) throw std::invalid_argument("holder pair: need 1 <= p < q");
    DigitSet s = DigitSet::half_density_witness(levels, std::move(selector_kind), std::move(selector_modulus),
                                                std::move(selector_residues));
    DigitSet t = s.dilated(p, q);
    return {s, t, p, q, ScaleSequence(levels)};
}

// A dyadic point sum of 2^-pos over the listed digit positions.
inline Rational point_from_positions(const std::vector<BigInt>& positions) {
    Rational x = 0;
    for (const auto& pos : positions) {
        if (pos < 1) throw std::invalid_argument("digit position must be >= 1");
        x += pow2_rat(-pos.convert_to<long>());
    }
    return x;
}

// Digit transport: a point of A_T with digits at dilated positions phi(i)
// maps to the point of A_S with digits at the i. Rejects digits at
// positions off the dilation image.
inline Rational transport_point(long p, long q, const std::vector<BigInt>& positions) {
    Rational out = 0;
    for (const auto& pos : positions) {
        auto i = detail::contract_index(pos, p, q);
        if (!i)
            throw std::invalid_argument("transport: digit position " + pos.str() +
                                        " is not in the dilation image");
        out += pow2_rat(-i->convert_to<long>());
    }
    return out;
}

// The dilation bound that direct evaluation validates: i/r <= phi(i) < (i+p)/r
// with r = p/q. The bound printed in the source theorem,
// (i-p)/r < phi(i) <= i/r, fails at i = 3, p = 2, q = 3; both predicates are
// exposed so the discrepancy stays checkable.
inline bool dilation_bound_holds(const BigInt& i, long p, long q) {
    BigInt v = detail::dilate_index(i, p, q);
    // i/r <= v < (i+p)/r  with r = p/q  <=>  i q <= v p < (i+p) q
    return i * q <= v * p && v * p < (i + p) * q;
}
inline bool dilation_bound_printed_form(const BigInt& i, long p, long q) {
    BigInt v = detail::dilate_index(i, p, q);
    // (i-p)/r < v <= i/r  <=>  (i-p) q < v p <= i q
    return (i - p) * q < v * p && v * p <= i * q;
}

// --------------------------------------------------------- ball packing

// Pairwise disjoint closed balls of diameter eps packed in an open ball of
// diameter delta: ceil((delta/(4 eps))^n). Requires 0 < eps <= delta/2.
inline BigInt disjoint_ball_count(const Rational& delta, const Rational& eps, int n) {
    if (delta <= 0 || eps <= 0) throw std::invalid_argument("ball packing: positive diameters required");
    if (2 * eps > delta) throw std::invalid_argument("ball packing: need eps <= delta/2");
    return ceil_rat(pow_rat(delta / (4 * eps), n));
}

// ------------------------------------------------------ burst construction

// Monotone increasing gauge with 0 < phi(delta) <= delta and
// phi(delta)/delta -> 0, evaluated exactly at dyadic arguments. Power rule
// phi(delta) = delta^e, e > 1.
struct AdmissibleFunction {
    Rational exponent;

    explicit AdmissibleFunction(Rational e) : exponent(std::move(e)) {
        if (exponent <= 1) throw std::invalid_argument("admissible function: exponent must exceed 1");
    }
    // smallest m with 2^-m < phi(2^-a)
    BigInt min_level_below(const BigInt& a) const {
        if (a < 0) throw std::invalid_argument("admissible function: dyadic argument must be <= 1");
        return floor_rat(Rational(a) * exponent) + 1;
    }
    Json to_json() const { return {{"kind", "power"}, {"exponent", rat_string(exponent)}}; }
    static AdmissibleFunction from_json(const Json& j) {
        if (j.at("kind") != "power") throw std::invalid_argument("admissible function: unknown kind");
        return AdmissibleFunction(json_rat(j.at("exponent")));
    }
};

// Stage data of the compact set whose universal restricted dimension
// vanishes while every level sees one cube burst into a full window of
// subcubes. Groups record each burst: a prefix cube, the window of freely
// branching levels behind it, and which window threads later burst
// themselves.
struct BurstGroup {
    long prefix_level = 0;  // level of the cube that burst (n_k of its stage)
    BigInt prefix_offset = 0;
    long burst_level = 0;  // window spans (prefix_level, burst_level]
    std::map<BigInt, std::size_t> removed;  // window value -> index of the child group
};

struct BurstLedger {
    int n = 1;
    AdmissibleFunction phi;
    long stages = 0;
    std::vector<BigInt> n_seq;    // n_1 .. n_{stages+1}
    std::vector<BigInt> m_seq;    // m_1 .. m_stages
    std::vector<BigInt> ell_seq;  // l_1 .. l_{stages+1}
    std::vector<BigInt> q_seq;    // enumeration indices q_1 .. q_stages
    std::vector<BigInt> j_seq;    // 1-based rank of the distinguished cube among selected
    std::vector<TreePath> distinguished;
    std::vector<BurstGroup> groups;

    const BigInt& level(std::size_t k) const { return n_seq.at(k - 1); }
    const BigInt& burst(std::size_t k) const { return m_seq.at(k - 1); }
    const BigInt& count(std::size_t k) const { return ell_seq.at(k - 1); }

    // survivors inside the stage-k distinguished cube at its burst level
    BigInt window_size(std::size_t k) const {
        return pow2_int(BigInt(n) * (burst(k) - level(k)));
    }

    // Content certificate at stage k: one piece of diameter 2^-n_k over the
    // distinguished cube plus l_k pieces of diameter 2^-n_{k+1} over the
    // rest, evaluated in exponent space as a certified upper bound.
    // Returns log2 of the bound.
    Rational content_certificate_log2(std::size_t k, const Rational& s) const {
        Rational t1 = -Rational(level(k)) * s;
        Rational t2 = Rational(bit_length(count(k))) - Rational(n_seq.at(k)) * s;  // l_k < 2^bits
        return (t1 > t2 ? t1 : t2) + 1;  // sum of two terms <= 2 * max
    }

    Json to_json() const {
        auto arr = [](const std::vector<BigInt>& v) {
            Json a = Json::array();
            for (const auto& x : v) a.push_back(x.str());
            return a;
        };
        return {{"n", n},           {"phi", phi.to_json()},   {"stages", stages},
                {"n_seq", arr(n_seq)}, {"m_seq", arr(m_seq)}, {"ell_seq", arr(ell_seq)},
                {"q_seq", arr(q_seq)}, {"j_seq", arr(j_seq)}};
    }
};

namespace detail {

// dyadic cube enumeration ordered by nonincreasing diameter then
// lexicographic offset: index -> (level, offset)
inline TreePath cube_by_index(const BigInt& index, int n) {
    BigInt start = 1;  // first index of the current level
    long level = 0;
    while (start + pow2_int(BigInt(n) * level) <= index) {
        start += pow2_int(BigInt(n) * level);
        ++level;
    }
    return TreePath{level, index - start};
}

struct BurstState {
    int n;
    std::vector<BurstGroup> groups;

    std::size_t window_bits(const BurstGroup& g) const {
        return static_cast<std::size_t>(n) * static_cast<std::size_t>(g.burst_level - g.prefix_level);
    }

    long child_level(const BurstGroup& g, const BigInt& w) const {
        return groups.at(g.removed.at(w)).prefix_level;
    }

    // Thread offsets at level cur are ((P << W) | w) << n(cur - burst), w in
    // [0, 2^W) minus the values burst at earlier stages; all queries reduce
    // to a contiguous w-interval plus a scan of the small removed map.
    // Window interval of w values whose thread lies inside cube (lam, o);
    // empty when the prefix disagrees.
    std::optional<std::pair<BigInt, BigInt>> window_range(const BurstGroup& g, long lam, const BigInt& o,
                                                          long cur) const {
        std::size_t W = window_bits(g);
        std::size_t S = static_cast<std::size_t>(n) * static_cast<std::size_t>(cur - g.burst_level);
        std::size_t A = static_cast<std::size_t>(n) * static_cast<std::size_t>(cur - lam);
        BigInt top = pow2_int(W) - 1;
        if (A >= S + W) {  // cube at or above the prefix
            if ((g.prefix_offset >> (A - S - W)) != o) return std::nullopt;
            return std::make_pair(BigInt(0), top);
        }
        if (A >= S) {  // cube splits the window
            std::size_t B = A - S;
            BigInt h = o - (g.prefix_offset << (W - B));
            if (h < 0 || h >= pow2_int(W - B)) return std::nullopt;
            return std::make_pair(h << B, ((h + 1) << B) - 1);
        }
        // cube below the burst level: at most the single thread it refines
        std::size_t C = S - A;
        if ((o & (pow2_int(C) - 1)) != 0) return std::nullopt;
        BigInt w = (o >> C) - (g.prefix_offset << W);
        if (w < 0 || w > top) return std::nullopt;
        return std::make_pair(w, w);
    }

    BigInt live_in_range(const BurstGroup& g, const BigInt& wlo, const BigInt& whi, long cur) const {
        if (whi < wlo) return 0;
        BigInt total = whi - wlo + 1;
        for (const auto& [w, child] : g.removed)
            if (child_level(g, w) < cur && wlo <= w && w <= whi) --total;
        return total;
    }

    BigInt count_inside(const BurstGroup& g, long lam, const BigInt& o, long cur) const {
        auto r = window_range(g, lam, o, cur);
        return r ? live_in_range(g, r->first, r->second, cur) : 0;
    }

    // number of live threads with offset strictly below the thread of value wb
    BigInt count_below(const BurstGroup& g, const BigInt& wb, long cur) const {
        return live_in_range(g, 0, wb - 1, cur);
    }

    // least live w in [wlo, whi], if any
    std::optional<BigInt> first_live(const BurstGroup& g, BigInt wlo, const BigInt& whi, long cur) const {
        while (wlo <= whi) {
            auto it = g.removed.find(wlo);
            if (it == g.removed.end() || child_level(g, wlo) >= cur) return wlo;
            ++wlo;
        }
        return std::nullopt;
    }

    BigInt thread_offset(const BurstGroup& g, const BigInt& w, long cur) const {
        std::size_t W = window_bits(g);
        std::size_t S = static_cast<std::size_t>(n) * static_cast<std::size_t>(cur - g.burst_level);
        return ((g.prefix_offset << W) | w) << S;
    }

    // live threads of g whose level-cur offset is strictly below X
    BigInt count_offset_below(const BurstGroup& g, const BigInt& X, long cur) const {
        if (g.burst_level > cur || X <= 0) return 0;
        std::size_t W = window_bits(g);
        std::size_t S = static_cast<std::size_t>(n) * static_cast<std::size_t>(cur - g.burst_level);
        BigInt whi = ((X - 1) >> S) - (g.prefix_offset << W);
        BigInt top = pow2_int(W) - 1;
        if (whi > top) whi = top;
        return live_in_range(g, 0, whi, cur);
    }
};

}  // namespace detail

// Runs the burst recurrences for the requested number of stages. Stage
// numbers follow the source recurrences: n_1 = 0, m_k minimal with
// 2^-m_k < phi(2^-k n_k), n_{k+1} = (k+1) m_k,
// l_{k+1} = l_k - 1 + 2^{n (m_k - n_k)}.
inline BurstLedger build_burst_ledger(const AdmissibleFunction& phi, int n, long stages) {
    if (n < 1 || n > 2) throw std::invalid_argument("burst ledger: ambient dimension 1 or 2");
    if (stages < 1 || stages > 8) throw std::invalid_argument("burst ledger: stages in 1..8");
    BurstLedger led{n, phi, stages, {}, {}, {}, {}, {}, {}, {}};
    led.n_seq.push_back(0);
    led.ell_seq.push_back(1);

    detail::BurstState st{n, {}};
    // group 0: the root chain, empty window
    st.groups.push_back(BurstGroup{0, 0, 0, {}});

    BigInt q_prev = 0;
    for (long k = 1; k <= stages; ++k) {
        BigInt nk = led.n_seq.back();
        BigInt mk = phi.min_level_below(BigInt(k) * nk);
        if (mk <= nk) throw std::logic_error("burst ledger: window collapsed");
        led.m_seq.push_back(mk);
        led.n_seq.push_back(BigInt(k + 1) * mk);

        long cur = nk.convert_to<long>();
        // q_k: first unused enumeration index whose cube contains a selected
        // cube; a hit arrives no later than the selected cubes' own level
        BigInt qk = 0;
        for (BigInt i = q_prev + 1;; ++i) {
            TreePath cand = detail::cube_by_index(i, n);
            if (cand.level > cur) throw std::logic_error("burst ledger: enumeration passed the stage level");
            bool hit = false;
            for (const auto& g : st.groups) {
                if (g.burst_level > cur) continue;
                if (st.count_inside(g, cand.level, cand.offset, cur) > 0) {
                    hit = true;
                    break;
                }
            }
            if (hit) {
                qk = i;
                break;
            }
        }
        led.q_seq.push_back(qk);
        q_prev = qk;
        TreePath qcube = detail::cube_by_index(qk, n);

        // distinguished cube: lexicographically least selected cube inside
        // Q_{q_k} (the lowest admissible index in offset order)
        std::optional<BigInt> best;
        BurstGroup* best_group = nullptr;
        BigInt best_w = 0;
        for (auto& g : st.groups) {
            if (g.burst_level > cur) continue;
            auto range = st.window_range(g, qcube.level, qcube.offset, cur);
            if (!range) continue;
            auto w = st.first_live(g, range->first, range->second, cur);
            if (!w) continue;
            BigInt off = st.thread_offset(g, *w, cur);
            if (!best || off < *best) {
                best = off;
                best_group = &g;
                best_w = *w;
            }
        }
        if (!best) throw std::logic_error("burst ledger: q_k cube holds no selected cube");

        // rank of the distinguished cube among all selected (1-based)
        BigInt rank = 1;
        for (const auto& g : st.groups) {
            if (g.burst_level > cur) continue;
            rank += st.count_offset_below(g, *best, cur);
        }
        led.j_seq.push_back(rank);
        led.distinguished.push_back(TreePath{cur, *best});

        // burst: remove the thread from its group, add the child group
        best_group->removed[best_w] = st.groups.size();
        st.groups.push_back(BurstGroup{cur, *best, mk.convert_to<long>(), {}});

        led.ell_seq.push_back(led.ell_seq.back() - 1 + pow2_int(BigInt(n) * (mk - nk)));
    }
    led.groups = st.groups;
    return led;
}

namespace detail {

class BurstTreeRule final : public TreeRule {
  public:
    explicit BurstTreeRule(BurstLedger led) : led_(std::move(led)) {}
    int ambient() const override { return led_.n; }

    std::vector<int> children(const TreePath& p) const override {
        // governing group: walk down the burst chain
        const BurstGroup* g = &led_.groups.at(0);
        while (true) {
            if (p.level < g->burst_level) return all_digits();  // inside the window
            BigInt W = BigInt(led_.n) * (g->burst_level - g->prefix_level);
            BigInt w = (p.offset >> static_cast<std::size_t>(led_.n * (p.level - g->burst_level))) &
                       (pow2_int(W) - 1);
            auto it = g->removed.find(w);
            if (it == g->removed.end()) return {0};  // frozen thread
            const BurstGroup& child = led_.groups.at(it->second);
            if (p.level < child.prefix_level) return {0};  // zero spine into the child prefix
            g = &child;
        }
    }

    std::optional<SurvivorCount> closed_form(long level) const override {
        if (level == 0) return SurvivorCount::exact(1);
        BigInt total = 0;
        for (const auto& g : led_.groups) {
            if (level <= g.prefix_level) continue;
            if (level <= g.burst_level) {
                total += pow2_int(BigInt(led_.n) * (level - g.prefix_level));
            } else {
                BigInt threads = pow2_int(BigInt(led_.n) * (g.burst_level - g.prefix_level));
                for (const auto& [w, child] : g.removed)
                    if (led_.groups.at(child).prefix_level < level) --threads;
                total += threads;
            }
        }
        return SurvivorCount::exact(total);
    }

    Json to_json() const override { return {{"kind", "burst_tree"}, {"ledger", led_.to_json()}}; }
    const BurstLedger& ledger() const { return led_; }

  private:
    std::vector<int> all_digits() const {
        std::vector<int> out;
        for (int d = 0; d < (1 << led_.n); ++d) out.push_back(d);
        return out;
    }

    BurstLedger led_;
};

}  // namespace detail

inline TreeSet realize_burst_tree(const BurstLedger& led) {
    return TreeSet(std::make_shared<detail::BurstTreeRule>(led));
}

// ---------------------------------------------------------- regular cover

// An s-regular compact superset of K: pick the smallest stride l and then
// the smallest child count c with log2(c)/l strictly inside
// (adim_bound, t) and c at least the worst aligned-window branching of K;
// every selected level-(m l) cube keeps exactly c level-((m+1) l) subcubes,
// K-meeting ones first, lexicographic padding after.
struct RegularCover {
    TreeSet cover;
    long child_count;  // c
    long stride;       // l; the regularity exponent is s = log2(c)/l
    double s_approx() const { return std::log2(static_cast<double>(child_count)) / stride; }
    // exact test s in (lo, hi)
    bool s_inside(const Rational& lo, const Rational& hi) const {
        Rational c(child_count);
        bool above = pow_rat(c, big_den(lo)) > Rational(pow2_int(BigInt(stride) * big_num(lo)));
        bool below = pow_rat(c, big_den(hi)) < Rational(pow2_int(BigInt(stride) * big_num(hi)));
        return above && below;
    }
};

namespace detail {

class RegularCoverRule final : public TreeRule {
  public:
    RegularCoverRule(TreeSet base, long child_count, long stride)
        : base_(std::move(base)), k_(child_count), l_(stride) {}
    int ambient() const override { return base_.ambient(); }

    std::vector<int> children(const TreePath& p) const override {
        long r = p.level % l_;
        TreePath root{p.level - r, p.offset >> static_cast<std::size_t>(ambient() * r)};
        const auto& sel = selected_children(root);
        BigInt prefix = p.offset - (root.offset << static_cast<std::size_t>(ambient() * r));
        std::vector<int> out;
        for (const auto& off : sel) {
            BigInt head = off >> static_cast<std::size_t>(ambient() * (l_ - r - 1));
            if ((head >> ambient()) != prefix) continue;
            int d = static_cast<int>((head & ((BigInt(1) << ambient()) - 1)).convert_to<long>());
            if (!std::binary_search(out.begin(), out.end(), d)) {
                out.insert(std::upper_bound(out.begin(), out.end(), d), d);
            }
        }
        if (out.empty()) throw std::logic_error("regular cover: node without children");
        return out;
    }

    std::optional<SurvivorCount> closed_form(long level) const override {
        if (level % l_ != 0) return std::nullopt;
        BigInt c = 1;
        for (long m = 0; m < level / l_; ++m) c *= k_;
        return SurvivorCount::exact(c);
    }

    Json to_json() const override {
        return {{"kind", "regular_cover"}, {"base", base_.to_json()}, {"k", k_}, {"l", l_}};
    }

    // the k selected window offsets (length-l digit strings) below a block root
    const std::vector<BigInt>& selected_children(const TreePath& root) const {
        auto key = std::make_pair(root.level, root.offset);
        auto it = memo_.find(key);
        if (it != memo_.end()) return it->second;
        std::vector<BigInt> sel;
        if (meets_base(root)) {
            // base-surviving descendants at level root.level + l, relative offsets
            std::function<void(const TreePath&)> dfs = [&](const TreePath& p) {
                if (p.level == root.level + l_) {
                    BigInt rel = p.offset - (root.offset << static_cast<std::size_t>(ambient() * l_));
                    sel.push_back(rel);
                    return;
                }
                for (int d : base_.children(p)) dfs(p.child(d, ambient()));
            };
            dfs(root);
            std::sort(sel.begin(), sel.end());
            if (static_cast<long>(sel.size()) > k_)
                throw std::logic_error("regular cover: branching exceeded the certified bound");
        }
        // lexicographic padding with cubes missing the base
        for (BigInt off = 0; static_cast<long>(sel.size()) < k_; ++off) {
            if (!std::binary_search(sel.begin(), sel.end(), off)) {
                sel.push_back(off);
                std::sort(sel.begin(), sel.end());
            }
        }
        return memo_.emplace(key, std::move(sel)).first->second;
    }

  private:
    bool meets_base(const TreePath& p) const { return base_.survives(p); }

    TreeSet base_;
    long k_, l_;
    mutable std::map<std::pair<long, BigInt>, std::vector<BigInt>> memo_;
};

}  // namespace detail

inline RegularCover make_regular_cover(const TreeSet& K, const Rational& t, const Rational& adim_bound) {
    int n = K.ambient();
    if (!(adim_bound < t)) throw std::invalid_argument("regular cover: need adim bound < t");
    if (t > n) throw std::invalid_argument("regular cover: need t <= ambient dimension");
    const DigitSet* s = K.as_digitset_tree();
    if (!s)
        throw std::invalid_argument("regular cover: base tree must expose certified window structure");

    BigInt pb = big_num(adim_bound), qb = big_den(adim_bound);
    BigInt pt = big_num(t), qt = big_den(t);
    for (long l = 1; l <= 64; ++l) {
        // child count must dominate the worst aligned-window branching and
        // put log2(c)/l strictly inside (adim_bound, t); smallest l first,
        // then smallest c
        long wmax = aligned_window_max(*s, l);
        BigInt c = pow2_int(BigInt(wmax));
        if (c < 2) c = 2;
        while (!(pow_rat(Rational(c), qb) > Rational(pow2_int(BigInt(l) * pb)))) ++c;
        if (pow_rat(Rational(c), qt) < Rational(pow2_int(BigInt(l) * pt)) && c <= pow2_int(BigInt(n) * l)) {
            long k = c.convert_to<long>();
            return RegularCover{TreeSet(std::make_shared<detail::RegularCoverRule>(K, k, l)), k, l};
        }
    }
    throw std::runtime_error("regular cover: no admissible stride up to 64");
}

}  // namespace drh
