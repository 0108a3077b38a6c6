#pragma once

#include <algorithm>
#include <optional>
#include <stdexcept>
#include <vector>

#include "drh/digit_set.hpp"
#include "drh/scale_sequence.hpp"

namespace drh {

// Certified enclosure of one real quantity (a dimension value or a sequence
// limit). exact means lower == upper == the true value by a rule-class
// argument; otherwise the interval only summarizes finite evidence and
// evidence_depth records how far the scan went.
struct LimitBounds {
    Rational lower = 0, upper = 1;
    bool exact = false;
    long evidence_depth = 0;

    static LimitBounds exactly(const Rational& v) { return {v, v, true, 0}; }
    static LimitBounds evidence(const Rational& lo, const Rational& hi, long depth) {
        return {lo, hi, false, depth};
    }
    Json to_json() const {
        return {{"lower", rat_string(lower)},
                {"upper", rat_string(upper)},
                {"exact", exact},
                {"evidence_depth", evidence_depth}};
    }
    static LimitBounds from_json(const Json& j) {
        return {json_rat(j.at("lower")), json_rat(j.at("upper")), j.at("exact").get<bool>(),
                j.at("evidence_depth").get<long>()};
    }
};

namespace detail {

inline std::optional<long> zero_one_index(const DigitSet& s) {
    if (auto* n = dynamic_cast<const ZeroOneMemberNode*>(s.node())) return n->member_index();
    return std::nullopt;
}
inline std::optional<long> prime_factorial_index(const DigitSet& s) {
    if (auto* n = dynamic_cast<const PrimeFactorialMemberNode*>(s.node())) return n->member_index();
    return std::nullopt;
}

// Tail-window evidence for the liminf of M_S(n_k). Levels past 4096 bits
// are out of reach (factorial-endpoint samplers explode); the window covers
// the second half of whatever was computable.
inline LimitBounds scan_restricted(const DigitSet& s, const ScaleSequence& d, long depth) {
    std::vector<Rational> vals;
    for (long k = 1; k <= depth; ++k) {
        BigInt nk = d.level_at(k);
        if (bit_length(nk) > 4096) break;
        vals.push_back(s.density(nk));
    }
    if (vals.empty()) return LimitBounds::evidence(0, 1, 0);
    Rational lo = vals.back(), hi = vals.back();
    for (std::size_t i = vals.size() / 2; i < vals.size(); ++i) {
        lo = std::min(lo, vals[i]);
        hi = std::max(hi, vals[i]);
    }
    return LimitBounds::evidence(lo, hi, static_cast<long>(vals.size()));
}

}  // namespace detail

// liminf and limsup of the density sequence M_S(k); these are the Hausdorff
// and packing dimensions of the digit-restriction set A_S.
inline std::pair<LimitBounds, LimitBounds> density_limits(const DigitSet& s, long scan_depth = 10000) {
    LimitProfile p = s.profile();
    if (p.exact) return {LimitBounds::exactly(p.liminf), LimitBounds::exactly(p.limsup)};
    Rational lo, hi;
    bool first = true;
    for (long k = scan_depth / 2 + 1; k <= scan_depth; ++k) {
        Rational v = s.density(k);
        if (first || v < lo) lo = v;
        if (first || v > hi) hi = v;
        first = false;
    }
    return {LimitBounds::evidence(0, hi, scan_depth), LimitBounds::evidence(lo, 1, scan_depth)};
}

inline LimitBounds hausdorff_dim(const DigitSet& s, long scan_depth = 10000) {
    return density_limits(s, scan_depth).first;
}
inline LimitBounds packing_dim(const DigitSet& s, long scan_depth = 10000) {
    return density_limits(s, scan_depth).second;
}

// dim_D A_S = liminf_k M_S(n_k). Exact in the recognized joint cases below,
// finite tail-window evidence otherwise.
inline LimitBounds restricted_dim(const DigitSet& s, const ScaleSequence& d, long evidence_depth = 48) {
    LimitProfile p = s.profile();

    // density converges: every subsequence shares the limit
    if (p.density_converges()) return LimitBounds::exactly(p.liminf);

    GrowthClass g = d.growth();

    // full sequence: dim_D is the Hausdorff value
    if (g.all_levels && p.exact) return LimitBounds::exactly(p.liminf);

    // bounded gaps: densities drift by at most gap/k between consecutive
    // levels, so the liminf along the subsequence equals the global liminf
    // whenever the global one is approached along events
    if (g.kind == GrowthClass::BoundedGap && p.exact && p.liminf_attained)
        return LimitBounds::exactly(p.liminf);

    // geometric level growth cannot skip the superfactorial gaps, where the
    // running density decays to zero
    if (g.kind == GrowthClass::Geometric && p.exact && p.superfactorial_gaps && p.liminf == 0)
        return LimitBounds::exactly(0);

    // constructed subsequence aiming at a target density
    if (auto* t = dynamic_cast<const TargetDensityRule*>(d.rule())) {
        if (t->set().same_rule(s)) return LimitBounds::exactly(t->alpha());
    }

    if (auto* b = dynamic_cast<const BlockSamplerRule*>(d.rule())) {
        // aligned sampler of the set's own blocks
        if (b->set().same_rule(s)) {
            if (b->ends() && p.block_end_limit) return LimitBounds::exactly(*p.block_end_limit);
            if (!b->ends() && p.block_start_limit) return LimitBounds::exactly(*p.block_start_limit);
        } else if (b->ends()) {
            auto si = detail::zero_one_index(s), sj = detail::zero_one_index(b->set());
            if (si && sj) {
                // n_k = j (3m)! lands inside (i >= j) or right after (i < j)
                // the i-member's factorial block; the density limit there is
                // exact either way.
                long i = *si, j = *sj;
                if (i >= j) return LimitBounds::exactly(1 - Rational(1, BigInt(i) * j));
                return LimitBounds::exactly(Rational(BigInt(i) * i - 1, BigInt(i) * j));
            }
            auto pi = detail::prime_factorial_index(s), pj = detail::prime_factorial_index(b->set());
            if (pi && pj && *pi != *pj) {
                // guard bands of distinct primes are disjoint, so the sampled
                // levels sit in the i-member's factorial gaps where the
                // density vanishes
                return LimitBounds::exactly(0);
            }
            if (pi && sj) {
                // levels j(3m)! live in factorial bands with base 3m, never a
                // prime power of p_i when p_i != 3; when p_i = 3 the member is
                // a factorial singleton list with vanishing density anyway
                return LimitBounds::exactly(0);
            }
            if (auto* w = dynamic_cast<const detail::ZeroOneMemberNode*>(s.node());
                w && detail::prime_factorial_index(b->set()) == 1) {
                // sampler levels are (3^m)!; each sits at the left edge of the
                // member's own block, where the density tends to 1 - 1/i
                return LimitBounds::exactly(1 - Rational(1, w->member_index()));
            }
        }
    }

    // half-density witness sampled along its own generating levels: the
    // count at n_K stays within (n_1 + 3K)/2 of n_K/2, which vanishes under
    // geometric growth; verified here on a prefix before certifying.
    if (auto* w = dynamic_cast<const detail::HalfDensityWitnessNode*>(s.node())) {
        if (w->levels()->to_json() == d.to_json() &&
            dynamic_cast<const SuperGeometricRule*>(d.rule()) != nullptr) {
            BigInt n1 = d.level_at(1);
            for (long K = 2; K <= 32; ++K) {
                BigInt nk = d.level_at(K);
                BigInt c2 = 2 * s.count(nk);
                BigInt dev = c2 > nk ? c2 - nk : nk - c2;  // |2 count - n_K|
                if (dev > n1 + 3 * K) throw std::logic_error("witness drift bound violated");
            }
            return LimitBounds::exactly(Rational(1, 2));
        }
    }

    return detail::scan_restricted(s, d, evidence_depth);
}

// ------------------------------------------------------------- families

// A finite or lazily indexed family of digit sets; the assembled compact
// set is {0} together with scaled copies of the members.
class SetFamily {
  public:
    static SetFamily explicit_list(std::vector<DigitSet> members) {
        SetFamily f;
        f.kind_ = "explicit";
        f.members_ = std::move(members);
        return f;
    }
    static SetFamily zero_one() {
        SetFamily f;
        f.kind_ = "zero_one";
        return f;
    }
    static SetFamily prime_factorial() {
        SetFamily f;
        f.kind_ = "prime_factorial";
        return f;
    }

    const std::string& kind() const { return kind_; }
    std::optional<long> size() const {
        if (kind_ == "explicit") return static_cast<long>(members_.size());
        return std::nullopt;
    }
    DigitSet member(long i) const {
        if (i < 1) throw std::invalid_argument("family member index >= 1");
        if (kind_ == "explicit") return members_.at(static_cast<std::size_t>(i - 1));
        if (kind_ == "zero_one") return DigitSet::zero_one_member(i);
        return DigitSet::prime_factorial_member(i);
    }
    Json to_json() const {
        if (kind_ != "explicit") return {{"kind", kind_}};
        Json arr = Json::array();
        for (const auto& m : members_) arr.push_back(m.to_json());
        return {{"kind", "explicit"}, {"members", arr}};
    }
    static SetFamily from_json(const Json& j) {
        std::string kind = j.at("kind").get<std::string>();
        if (kind == "zero_one") return zero_one();
        if (kind == "prime_factorial") return prime_factorial();
        std::vector<DigitSet> ms;
        for (const auto& m : j.at("members")) ms.push_back(DigitSet::from_json(m));
        return explicit_list(std::move(ms));
    }

  private:
    SetFamily() = default;
    std::string kind_;
    std::vector<DigitSet> members_;
};

// dim_D of the assembled family set: sup over members of dim_D A_{S_i}.
// For the shipped infinite families the supremum is certified through their
// factorial band structure; otherwise the tail is truncated at `truncate`
// members and the result is flagged inexact.
inline LimitBounds restricted_dim_family(const SetFamily& fam, const ScaleSequence& d, long truncate = 8,
                                         long evidence_depth = 48) {
    if (auto n = fam.size()) {
        LimitBounds acc = LimitBounds::exactly(0);
        if (*n == 0) return acc;
        bool all_exact = true;
        Rational lo = 0, hi = 0;
        long depth = 0;
        for (long i = 1; i <= *n; ++i) {
            LimitBounds b = restricted_dim(fam.member(i), d, evidence_depth);
            all_exact = all_exact && b.exact;
            lo = std::max(lo, b.lower);
            hi = std::max(hi, b.upper);
            depth = std::max(depth, b.evidence_depth);
        }
        if (all_exact && lo == hi) return LimitBounds::exactly(lo);
        return LimitBounds::evidence(lo, hi, depth);
    }

    GrowthClass g = d.growth();
    bool vanishing_class =
        g.all_levels || g.kind == GrowthClass::BoundedGap || g.kind == GrowthClass::Geometric;
    auto* sampler = dynamic_cast<const BlockSamplerRule*>(d.rule());

    if (fam.kind() == "zero_one") {
        // every member has liminf 0 along gap-visiting sequences
        if (vanishing_class) return LimitBounds::exactly(0);
        if (sampler && sampler->ends()) {
            if (detail::zero_one_index(sampler->set()))
                return LimitBounds::exactly(1);  // members i >= j give 1 - 1/(ij) -> 1
            if (detail::prime_factorial_index(sampler->set()) == 1)
                return LimitBounds::exactly(1);  // levels (3^m)! give 1 - 1/i -> 1
        }
    }
    if (fam.kind() == "prime_factorial") {
        if (vanishing_class) return LimitBounds::exactly(0);
        if (sampler && sampler->ends()) {
            if (auto j = detail::prime_factorial_index(sampler->set())) {
                // the sampled member attains its block-end limit; every other
                // member sees only its factorial gaps
                return LimitBounds::exactly(Rational(BigInt(*j) - 1, BigInt(*j)));
            }
            if (detail::zero_one_index(sampler->set())) return LimitBounds::exactly(0);
        }
    }

    // no certified tail envelope: truncate
    Rational lo = 0, hi = 0;
    long depth = 0;
    for (long i = 1; i <= truncate; ++i) {
        LimitBounds b = restricted_dim(fam.member(i), d, evidence_depth);
        lo = std::max(lo, b.lower);
        hi = std::max(hi, b.upper);
        depth = std::max(depth, b.evidence_depth);
    }
    return LimitBounds::evidence(lo, hi, std::max(depth, truncate));
}

// Universal restricted dimension of A_S: the Darboux interval is the whole
// [hausdorff, packing] range, so the supremum over admissible diameter sets
// equals the packing value and is attained.
inline LimitBounds universal_restricted_dim(const DigitSet& s, long scan_depth = 10000) {
    return packing_dim(s, scan_depth);
}

}  // namespace drh
