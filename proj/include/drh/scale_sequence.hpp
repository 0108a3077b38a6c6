#pragma once

#include <algorithm>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "drh/digit_set.hpp"
#include "drh/numeric.hpp"
#include "drh/scale_rules.hpp"

namespace drh {

inline BigInt floor_log2(const Rational& x) {
    if (x <= 0) throw std::invalid_argument("floor_log2: positive argument required");
    BigInt a = big_num(x), b = big_den(x);
    long e = static_cast<long>(bit_length(a)) - static_cast<long>(bit_length(b));
    auto le = [&](long t) {  // 2^t <= a/b
        return t >= 0 ? (b << t) <= a : b <= (a << -t);
    };
    while (!le(e)) --e;
    while (le(e + 1)) ++e;
    return e;
}

// The dyadic bucket [2^-l, 2^-l+1) containing x.
inline BigInt bucket_level(const Rational& x) { return -floor_log2(x); }

// ---------------------------------------------------------------- sampler

// n_k = k-th block endpoint of a digit set with infinitely many blocks.
class BlockSamplerRule final : public ScaleRuleNode {
  public:
    BlockSamplerRule(DigitSet set, bool ends) : set_(std::move(set)), ends_(ends) {
        if (!set_.infinite_blocks())
            throw std::invalid_argument("block sampler: set must have infinitely many blocks");
    }
    BigInt at(const BigInt& k) const override {
        auto b = set_.block(k.convert_to<std::size_t>());
        if (!b) throw std::logic_error("block sampler: block ran out");
        return ends_ ? b->hi : b->lo;
    }
    Json to_json() const override {
        return {{"kind", "block_sampler"}, {"set", set_.to_json()}, {"endpoint", ends_ ? "ends" : "starts"}};
    }
    const DigitSet& set() const { return set_; }
    bool ends() const { return ends_; }

  private:
    DigitSet set_;
    bool ends_;
};

// ------------------------------------------------- target density scanner

// Smallest j in [from, to] with |count(j)/j - alpha| < tol, solved segment
// by segment on the piece decomposition (membership is an arithmetic
// progression inside each segment, so the predicate is linear-fractional
// per residue class and solvable exactly).
inline std::optional<BigInt> first_index_in_band(const DigitSet& s, const BigInt& from, const BigInt& to,
                                                 const Rational& alpha, const Rational& tol) {
    if (from > to) return std::nullopt;
    auto pieces = s.decompose(to);
    std::optional<BigInt> best;
    auto consider = [&](const BigInt& j) {
        if (!best || j < *best) best = j;
    };
    // scan one segment [L, H] where membership is (mod m, residues R)
    auto scan = [&](const BigInt& L0, const BigInt& H0, const BigInt& m, const std::vector<BigInt>& R) {
        BigInt L = L0 < from ? from : L0;
        BigInt H = H0 > to ? to : H0;
        if (best && *best <= H) H = *best - 1;
        if (L > H) return;
        BigInt base = L > 1 ? s.count(L - 1) : BigInt(0);
        BigInt density_num(R.size());
        for (BigInt r = 0; r < m; ++r) {
            BigInt j0 = L + ((r - L) % m + m) % m;  // first index of this class
            if (j0 > H) continue;
            BigInt smax = (H - j0) / m;
            BigInt A = base + ap_count(L, j0, m, R);
            // j = j0 + t m, count = A + t B; want (alpha-tol) j < count < (alpha+tol) j
            BigInt B = density_num;
            BigInt slo = 0, shi = smax;
            bool empty = false;
            auto bound = [&](const Rational& target, bool lower) {
                // lower: A + tB > target (j0 + t m); else <
                Rational K = Rational(B) - target * Rational(m);
                Rational C = target * Rational(j0) - Rational(A);
                // K t > C (lower) / K t < C (upper)
                if (lower ? K > 0 : K < 0) {  // t beyond C/K
                    BigInt t = floor_rat(C / K) + 1;
                    if (t > slo) slo = t;
                } else if (lower ? K < 0 : K > 0) {  // t before C/K
                    BigInt t = ceil_rat(C / K) - 1;
                    if (t < shi) shi = t;
                } else {  // K == 0: constant condition
                    if (lower ? !(C < 0) : !(C > 0)) empty = true;
                }
            };
            bound(alpha - tol, true);
            bound(alpha + tol, false);
            if (!empty && slo <= shi) consider(j0 + slo * m);
        }
    };
    BigInt cursor = 1;
    static const std::vector<BigInt> kNone{};
    for (const auto& p : pieces) {
        if (p.lo > cursor) scan(cursor, p.lo - 1, 1, kNone);
        scan(p.lo, p.hi, p.modulus, p.residues);
        cursor = p.hi + 1;
        if (best && cursor > *best) return best;
    }
    if (cursor <= to) scan(cursor, to, 1, kNone);
    return best;
}

// Greedy scale sequence driving M_S(n_k) toward a target density alpha in
// [liminf M_S, limsup M_S]. Tolerance schedule min(previous gap, 1/(k-1)^2)
// keeps the gap below 0.02 from k = 10 on while forcing convergence.
class TargetDensityRule final : public ScaleRuleNode {
  public:
    TargetDensityRule(DigitSet set, Rational alpha) : set_(std::move(set)), alpha_(std::move(alpha)) {
        if (alpha_ < 0 || alpha_ > 1) throw std::invalid_argument("target density: alpha in [0,1]");
    }
    BigInt at(const BigInt& k) const override {
        std::lock_guard<std::mutex> lock(mu_);
        std::size_t want = k.convert_to<std::size_t>();
        while (cache_.size() < want) {
            std::size_t idx = cache_.size() + 1;  // computing n_idx
            Rational tol;
            BigInt from;
            if (idx == 1) {
                tol = 1;
                from = 1;
            } else {
                BigInt prev = cache_.back();
                Rational gap = set_.density(prev) - alpha_;
                if (gap < 0) gap = -gap;
                Rational sched(1, BigInt(idx - 1) * BigInt(idx - 1));
                tol = (gap > 0 && gap < sched) ? gap : sched;
                from = prev + 1;
            }
            BigInt to = from * 2 + 64;
            std::optional<BigInt> j;
            while (!(j = first_index_in_band(set_, from, to, alpha_, tol))) {
                to *= 4;
                if (bit_length(to) > 4096) throw std::runtime_error("target density: band never reached");
            }
            cache_.push_back(*j);
        }
        return cache_[want - 1];
    }
    Json to_json() const override {
        return {{"kind", "target_density"}, {"set", set_.to_json()}, {"alpha", rat_string(alpha_)}};
    }
    const DigitSet& set() const { return set_; }
    const Rational& alpha() const { return alpha_; }

  private:
    DigitSet set_;
    Rational alpha_;
    mutable std::mutex mu_;
    mutable std::vector<BigInt> cache_;
};

namespace detail {
inline ScaleRulePtr make_sampler_rule(const Json& j) {
    return std::make_shared<BlockSamplerRule>(DigitSet::from_json(j.at("set")),
                                              j.at("endpoint").get<std::string>() == "ends");
}
inline ScaleRulePtr make_target_rule(const Json& j) {
    return std::make_shared<TargetDensityRule>(DigitSet::from_json(j.at("set")), json_rat(j.at("alpha")));
}
inline const bool scale_kinds_registered = [] {
    scale_rule_registry()["block_sampler"] = &make_sampler_rule;
    scale_rule_registry()["target_density"] = &make_target_rule;
    return true;
}();
}  // namespace detail

// -------------------------------------------------------- ScaleSequence

// Canonical form of an admissible diameter set: the strictly increasing
// levels n_k with D = union of [2^-n_k, 2^-n_k+1). Immutable; the prefix
// cache is append-only behind a lock.
class ScaleSequence {
  public:
    explicit ScaleSequence(ScaleRulePtr rule) : state_(std::make_shared<State>()) {
        if (!rule) throw std::invalid_argument("scale sequence: missing rule");
        state_->rule = std::move(rule);
    }

    static ScaleSequence all_levels() {
        return ScaleSequence(std::make_shared<ArithmeticRule>(0, 1));
    }
    static ScaleSequence arithmetic(const BigInt& a, const BigInt& d) {
        return ScaleSequence(std::make_shared<ArithmeticRule>(a, d));
    }
    static ScaleSequence super_geometric(const Rational& c, const Rational& rho) {
        return ScaleSequence(std::make_shared<SuperGeometricRule>(c, rho));
    }
    static ScaleSequence block_ends(const DigitSet& s) {
        return ScaleSequence(std::make_shared<BlockSamplerRule>(s, true));
    }
    static ScaleSequence block_starts(const DigitSet& s) {
        return ScaleSequence(std::make_shared<BlockSamplerRule>(s, false));
    }
    // Levels {values} then safely out of reach of queries bounded by `beyond`.
    static ScaleSequence sparse_levels(std::vector<BigInt> values, const BigInt& beyond) {
        BigInt start = values.empty() ? beyond : (values.back() > beyond ? values.back() : beyond);
        return ScaleSequence(
            std::make_shared<ConcatRule>(std::move(values), std::make_shared<ArithmeticRule>(start, 1)));
    }

    BigInt level_at(const BigInt& k) const {
        if (k < 1) throw std::invalid_argument("level_at: k >= 1");
        std::lock_guard<std::mutex> lock(state_->mu);
        std::size_t want = k.convert_to<std::size_t>();
        while (state_->cache.size() < want) {
            BigInt next = state_->rule->at(BigInt(state_->cache.size() + 1));
            if (next < 1 || (!state_->cache.empty() && next <= state_->cache.back()))
                throw std::logic_error("scale sequence: rule is not strictly increasing");
            state_->cache.push_back(next);
        }
        return state_->cache[want - 1];
    }

    bool is_allowed(const BigInt& level) const {
        if (level < 1) return false;
        std::lock_guard<std::mutex> lock(state_->mu);
        // extend the cache just past the target; never overshoots, since the
        // levels are strictly increasing
        while (state_->cache.empty() || state_->cache.back() < level) {
            BigInt next = state_->rule->at(BigInt(state_->cache.size() + 1));
            if (next < 1 || (!state_->cache.empty() && next <= state_->cache.back()))
                throw std::logic_error("scale sequence: rule is not strictly increasing");
            state_->cache.push_back(next);
        }
        return std::binary_search(state_->cache.begin(), state_->cache.end(), level);
    }

    std::vector<long> allowed_up_to(long depth) const {
        std::vector<long> out;
        for (BigInt k = 1;; ++k) {
            BigInt l = level_at(k);
            if (l > depth) break;
            out.push_back(l.convert_to<long>());
        }
        return out;
    }

    GrowthClass growth() const { return state_->rule->growth(); }
    const ScaleRuleNode* rule() const { return state_->rule.get(); }
    ScaleRulePtr rule_ptr() const { return state_->rule; }
    Json to_json() const { return state_->rule->to_json(); }
    static ScaleSequence from_json(const Json& j) { return ScaleSequence(scale_rule_from_json(j)); }
    bool same_rule(const ScaleSequence& o) const { return to_json() == o.to_json(); }

  private:
    struct State {
        ScaleRulePtr rule;
        mutable std::mutex mu;
        mutable std::vector<BigInt> cache;
    };
    std::shared_ptr<State> state_;
};

// ------------------------------------------------------- SorgenfreyUnion

// A rule-described union of half-open pieces [left, left+width). Admissible
// diameter sets must certify inf = 0 by rule class; explicit finite unions
// cannot and are rejected by canonicalize.
class SorgenfreyUnion {
  public:
    // kinds: "full" (0,inf) | "pieces" explicit list | "geometric_pieces"
    // with left_k = c*gamma^k, width_k = wc*wgamma^k | "scale_buckets" of an
    // existing sequence.
    static SorgenfreyUnion full() {
        SorgenfreyUnion u;
        u.kind_ = "full";
        return u;
    }
    static SorgenfreyUnion pieces(std::vector<std::pair<Rational, Rational>> list) {
        SorgenfreyUnion u;
        u.kind_ = "pieces";
        u.list_ = std::move(list);
        for (const auto& [left, width] : u.list_)
            if (left <= 0 || width <= 0) throw std::invalid_argument("sorgenfrey union: bad piece");
        return u;
    }
    static SorgenfreyUnion geometric_pieces(Rational c, Rational gamma, Rational wc, Rational wgamma) {
        SorgenfreyUnion u;
        u.kind_ = "geometric_pieces";
        u.c_ = std::move(c);
        u.gamma_ = std::move(gamma);
        u.wc_ = std::move(wc);
        u.wgamma_ = std::move(wgamma);
        if (u.c_ <= 0 || u.gamma_ <= 0 || u.gamma_ >= 1 || u.wc_ <= 0 || u.wgamma_ <= 0 || u.wgamma_ >= 1)
            throw std::invalid_argument("geometric pieces: need 0 < gamma, wgamma < 1 and c, wc > 0");
        return u;
    }
    static SorgenfreyUnion scale_buckets(ScaleSequence s) {
        SorgenfreyUnion u;
        u.kind_ = "scale_buckets";
        u.scales_ = std::move(s);
        return u;
    }

    const std::string& kind() const { return kind_; }

    // piece k (1-indexed) for generator kinds
    std::pair<Rational, Rational> piece(std::size_t k) const {
        if (kind_ == "pieces") return list_.at(k - 1);
        if (kind_ == "geometric_pieces")
            return {c_ * pow_rat(gamma_, BigInt(k)), wc_ * pow_rat(wgamma_, BigInt(k))};
        if (kind_ == "scale_buckets") {
            Rational left = pow2_rat(-scales_->level_at(BigInt(k)).convert_to<long>());
            return {left, left};  // [2^-n, 2^-n+1) has width 2^-n
        }
        throw std::logic_error("piece: full union has no piece list");
    }

    Json to_json() const {
        if (kind_ == "full") return {{"kind", "full"}};
        if (kind_ == "pieces") {
            Json arr = Json::array();
            for (const auto& [l, w] : list_) arr.push_back({{"left", rat_string(l)}, {"width", rat_string(w)}});
            return {{"kind", "pieces"}, {"list", arr}};
        }
        if (kind_ == "geometric_pieces")
            return {{"kind", "geometric_pieces"},
                    {"c", rat_string(c_)},
                    {"gamma", rat_string(gamma_)},
                    {"wc", rat_string(wc_)},
                    {"wgamma", rat_string(wgamma_)}};
        return {{"kind", "scale_buckets"}, {"scales", scales_->to_json()}};
    }
    static SorgenfreyUnion from_json(const Json& j) {
        std::string kind = j.at("kind").get<std::string>();
        if (kind == "full") return full();
        if (kind == "pieces") {
            std::vector<std::pair<Rational, Rational>> list;
            for (const auto& p : j.at("list")) list.emplace_back(json_rat(p.at("left")), json_rat(p.at("width")));
            return pieces(std::move(list));
        }
        if (kind == "geometric_pieces")
            return geometric_pieces(json_rat(j.at("c")), json_rat(j.at("gamma")), json_rat(j.at("wc")),
                                    json_rat(j.at("wgamma")));
        if (kind == "scale_buckets") return scale_buckets(ScaleSequence::from_json(j.at("scales")));
        throw std::invalid_argument("unknown sorgenfrey union kind: " + kind);
    }

  private:
    friend class BucketTraceRule;
    SorgenfreyUnion() = default;
    std::string kind_;
    std::vector<std::pair<Rational, Rational>> list_;
    Rational c_, gamma_, wc_, wgamma_;
    std::optional<ScaleSequence> scales_;
};

// Levels met by the pieces of a generator-backed union, in increasing order.
class BucketTraceRule final : public ScaleRuleNode {
  public:
    explicit BucketTraceRule(SorgenfreyUnion u) : u_(std::move(u)) {}
    BigInt at(const BigInt& k) const override {
        std::lock_guard<std::mutex> lock(mu_);
        std::size_t want = k.convert_to<std::size_t>();
        while (levels_.size() < want) {
            ++piece_idx_;
            auto [left, width] = u_.piece(piece_idx_);
            // buckets [2^-l, 2^-l+1) meeting [left, left+width): from the
            // bucket of the right end (exclusive) up to the bucket of left
            BigInt l_left = bucket_level(left);
            Rational right = left + width;
            BigInt l_right = bucket_level(right);
            if (pow2_rat(-l_right.convert_to<long>()) == right) ++l_right;  // right end exclusive
            for (BigInt l = l_right; l <= l_left; ++l) {
                if (l < 1) continue;  // positive levels only: diameters >= 1 are outside the dyadic trace
                if (!levels_.empty() && l <= levels_.back()) continue;
                levels_.push_back(l);
            }
            if (piece_idx_ > 4096 && levels_.size() < want)
                throw std::runtime_error("bucket trace: generator stalled");
        }
        return levels_[want - 1];
    }
    Json to_json() const override { return {{"kind", "bucket_trace"}, {"union", u_.to_json()}}; }

  private:
    SorgenfreyUnion u_;
    mutable std::mutex mu_;
    mutable std::size_t piece_idx_ = 0;
    mutable std::vector<BigInt> levels_;
};

namespace detail {
inline ScaleRulePtr make_bucket_trace(const Json& j) {
    return std::make_shared<BucketTraceRule>(SorgenfreyUnion::from_json(j.at("union")));
}
inline const bool bucket_trace_registered = [] {
    scale_rule_registry()["bucket_trace"] = &make_bucket_trace;
    return true;
}();
}  // namespace detail

// Canonical scale sequence of an admissible diameter set. Rejects unions
// whose infimum is provably positive (explicit finite lists).
inline ScaleSequence canonicalize(const SorgenfreyUnion& u) {
    if (u.kind() == "full") return ScaleSequence::all_levels();
    if (u.kind() == "pieces")
        throw std::invalid_argument("not an admissible diameter set: explicit finite union has inf > 0");
    if (u.kind() == "scale_buckets") {
        // the union already is a bucket union; its trace is itself
        return ScaleSequence::from_json(u.to_json().at("scales"));
    }
    return ScaleSequence(std::make_shared<BucketTraceRule>(u));
}

}  // namespace drh
