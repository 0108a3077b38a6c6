#pragma once

#include <json.hpp>

#include <algorithm>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "drh/numeric.hpp"
#include "drh/scale_rules.hpp"

namespace drh {

// #{ i in [lo, hi] : i mod m in residues }, residues sorted subset of [0, m).
inline BigInt ap_count(const BigInt& lo, const BigInt& hi, const BigInt& m,
                       const std::vector<BigInt>& residues) {
    if (hi < lo) return 0;
    BigInt total = 0;
    for (const auto& r : residues) total += floor_div(hi - r, m) - floor_div(lo - 1 - r, m);
    return total;
}

// Interval-restricted residue classes; the canonical exchange format between
// set representations. Membership: lo <= i <= hi and (i mod modulus) in residues.
struct APPiece {
    BigInt lo, hi;
    BigInt modulus = 1;
    std::vector<BigInt> residues = {BigInt(0)};  // sorted

    bool contains(const BigInt& i) const {
        if (i < lo || i > hi) return false;
        BigInt r = i % modulus;
        return std::binary_search(residues.begin(), residues.end(), r);
    }
    BigInt count_up_to(const BigInt& k) const {
        return ap_count(lo, hi < k ? hi : k, modulus, residues);
    }
    BigInt size() const { return ap_count(lo, hi, modulus, residues); }
};

struct Block {
    BigInt lo, hi;  // inclusive, every integer in between is a member
};

// Certified limiting behaviour of the density sequence M_S(k); `exact` means
// liminf/limsup below are proven values for the rule class, not finite
// evidence.
struct LimitProfile {
    bool exact = false;
    Rational liminf = 0, limsup = 1;
    bool liminf_attained = false;      // density approaches liminf along known events
    bool superfactorial_gaps = false;  // block end / next block start ratio -> 0
    std::optional<Rational> block_end_limit;    // lim density at block ends
    std::optional<Rational> block_start_limit;  // lim density at block starts

    bool density_converges() const { return exact && liminf == limsup; }
};

class DigitSet;

namespace detail {

class SetNode {
  public:
    virtual ~SetNode() = default;
    virtual bool contains(const BigInt& i) const = 0;
    virtual BigInt count(const BigInt& k) const = 0;  // #(S intersect [1, k])
    virtual std::vector<APPiece> decompose(const BigInt& k) const = 0;
    virtual Json to_json() const = 0;
    virtual LimitProfile profile() const { return {}; }
    // Block structure, 1-indexed; nullopt when the rule is not block-shaped
    // or the index runs past a finite list.
    virtual std::optional<Block> block(std::size_t) const { return std::nullopt; }
    virtual bool infinite_blocks() const { return false; }
    virtual bool unbounded_block_lengths() const { return false; }
};

using SetNodePtr = std::shared_ptr<const SetNode>;

}  // namespace detail

// Immutable symbolic subset of the positive integers with exact counting.
class DigitSet {
  public:
    DigitSet();  // empty set

    bool contains(const BigInt& i) const { return i >= 1 && node_->contains(i); }
    BigInt count(const BigInt& k) const {
        if (k < 1) throw std::invalid_argument("count: k must be >= 1");
        return node_->count(k);
    }
    Rational density(const BigInt& k) const { return Rational(count(k), k); }
    std::vector<APPiece> decompose(const BigInt& k) const { return node_->decompose(k); }
    LimitProfile profile() const { return node_->profile(); }
    std::optional<Block> block(std::size_t j) const { return node_->block(j); }
    bool infinite_blocks() const { return node_->infinite_blocks(); }
    bool unbounded_block_lengths() const { return node_->unbounded_block_lengths(); }

    Json to_json() const { return node_->to_json(); }
    static DigitSet from_json(const Json& j);

    bool same_rule(const DigitSet& o) const { return to_json() == o.to_json(); }

    // The index dilation i = kp - m |-> kq - m (k >= 1, 0 <= m < p); the
    // image of this set under it, in residue-class form. Requires p < q.
    DigitSet dilated(long p, long q) const;

    // Factories.
    static DigitSet finite(std::vector<BigInt> members);
    static DigitSet eventually_periodic(BigInt threshold, BigInt modulus, std::vector<BigInt> residues,
                                        std::vector<BigInt> prefix = {});
    static DigitSet all();
    static DigitSet none();
    static DigitSet evens();
    static DigitSet odds();
    static DigitSet multiples(const BigInt& m);
    static DigitSet blocks(std::vector<Block> list);
    static DigitSet ap_blocks(std::vector<APPiece> pieces);
    // Oscillating-density block family: density exactly `hi` at every block
    // end and exactly `lo` just before every block start, so
    // liminf M = lo and limsup M = hi hold with certainty.
    static DigitSet sawtooth(const Rational& lo, const Rational& hi);
    // S_i = union over m >= i of [ (3m)!/i , i (3m)! ].
    static DigitSet zero_one_member(long i);
    // S_i = union over j >= 1 of [ (p_i^j)! , i (p_i^j)! ], p_i the i-th odd prime.
    static DigitSet prime_factorial_member(long i);
    // Guard bands P_i = union over j >= 1 of [ (p_i^j)! , (p_i^j + 1)! - 1 ].
    static DigitSet prime_factorial_guard(long i);
    // Blocks { ceil((n_k + n_{k+1})/2) .. n_{k+1}-2 } on selected intervals,
    // even fill elsewhere.
    static DigitSet half_density_witness(ScaleRulePtr levels, std::string selector_kind,
                                         BigInt selector_modulus = 2,
                                         std::vector<BigInt> selector_residues = {});

    friend DigitSet set_union(const DigitSet& a, const DigitSet& b);
    friend DigitSet set_intersection(const DigitSet& a, const DigitSet& b);
    friend DigitSet set_complement(const DigitSet& a);

    explicit DigitSet(detail::SetNodePtr n) : node_(std::move(n)) {}
    const detail::SetNode* node() const { return node_.get(); }

  private:
    detail::SetNodePtr node_;
};

namespace detail {

// ---------------------------------------------------------------- finite

class FiniteNode final : public SetNode {
  public:
    explicit FiniteNode(std::vector<BigInt> members) : members_(std::move(members)) {
        std::sort(members_.begin(), members_.end());
        members_.erase(std::unique(members_.begin(), members_.end()), members_.end());
        if (!members_.empty() && members_.front() < 1)
            throw std::invalid_argument("finite set: members must be positive");
    }
    bool contains(const BigInt& i) const override {
        return std::binary_search(members_.begin(), members_.end(), i);
    }
    BigInt count(const BigInt& k) const override {
        return BigInt(std::upper_bound(members_.begin(), members_.end(), k) - members_.begin());
    }
    std::vector<APPiece> decompose(const BigInt& k) const override {
        std::vector<APPiece> out;
        for (const auto& m : members_) {
            if (m > k) break;
            out.push_back({m, m, 1, {BigInt(0)}});
        }
        return out;
    }
    Json to_json() const override {
        Json arr = Json::array();
        for (const auto& m : members_) arr.push_back(m.str());
        return {{"kind", "finite"}, {"members", arr}};
    }
    LimitProfile profile() const override {
        LimitProfile p;
        p.exact = true;
        p.liminf = p.limsup = 0;
        p.liminf_attained = true;
        return p;
    }

  private:
    std::vector<BigInt> members_;
};

// ---------------------------------------------------- eventually periodic

class PeriodicNode final : public SetNode {
  public:
    PeriodicNode(BigInt threshold, BigInt modulus, std::vector<BigInt> residues, std::vector<BigInt> prefix)
        : threshold_(std::move(threshold)), modulus_(std::move(modulus)), residues_(std::move(residues)),
          prefix_(std::move(prefix)) {
        if (threshold_ < 1 || modulus_ < 1) throw std::invalid_argument("periodic set: bad parameters");
        std::sort(residues_.begin(), residues_.end());
        residues_.erase(std::unique(residues_.begin(), residues_.end()), residues_.end());
        for (const auto& r : residues_)
            if (r < 0 || r >= modulus_) throw std::invalid_argument("periodic set: residue out of range");
        std::sort(prefix_.begin(), prefix_.end());
        prefix_.erase(std::unique(prefix_.begin(), prefix_.end()), prefix_.end());
        for (const auto& v : prefix_)
            if (v < 1 || v >= threshold_) throw std::invalid_argument("periodic set: prefix member out of range");
    }
    bool contains(const BigInt& i) const override {
        if (i < threshold_) return std::binary_search(prefix_.begin(), prefix_.end(), i);
        return std::binary_search(residues_.begin(), residues_.end(), i % modulus_);
    }
    BigInt count(const BigInt& k) const override {
        BigInt c(std::upper_bound(prefix_.begin(), prefix_.end(), k) - prefix_.begin());
        if (k >= threshold_) c += ap_count(threshold_, k, modulus_, residues_);
        return c;
    }
    std::vector<APPiece> decompose(const BigInt& k) const override {
        std::vector<APPiece> out;
        for (const auto& m : prefix_) {
            if (m > k) break;
            out.push_back({m, m, 1, {BigInt(0)}});
        }
        if (k >= threshold_ && !residues_.empty()) out.push_back({threshold_, k, modulus_, residues_});
        return out;
    }
    Json to_json() const override {
        Json rs = Json::array(), ps = Json::array();
        for (const auto& r : residues_) rs.push_back(r.str());
        for (const auto& v : prefix_) ps.push_back(v.str());
        return {{"kind", "eventually_periodic"},
                {"threshold", threshold_.str()},
                {"modulus", modulus_.str()},
                {"residues", rs},
                {"prefix", ps}};
    }
    LimitProfile profile() const override {
        LimitProfile p;
        p.exact = true;
        p.liminf = p.limsup = Rational(BigInt(residues_.size()), modulus_);
        p.liminf_attained = true;
        return p;
    }

  private:
    BigInt threshold_, modulus_;
    std::vector<BigInt> residues_, prefix_;
};

// ----------------------------------------------------------- block shaped

// Shared machinery for rules that are unions of disjoint full intervals
// [a_j, b_j] with b_j < a_{j+1}. Subclasses generate blocks lazily.
class BlockNode : public SetNode {
  public:
    bool contains(const BigInt& i) const override {
        for (std::size_t j = 1;; ++j) {
            auto b = cached_block(j);
            if (!b || b->lo > i) return false;
            if (i <= b->hi) return true;
        }
    }
    BigInt count(const BigInt& k) const override {
        BigInt c = 0;
        for (std::size_t j = 1;; ++j) {
            auto b = cached_block(j);
            if (!b || b->lo > k) return c;
            c += (b->hi < k ? b->hi : k) - b->lo + 1;
        }
    }
    std::vector<APPiece> decompose(const BigInt& k) const override {
        std::vector<APPiece> out;
        for (std::size_t j = 1;; ++j) {
            auto b = cached_block(j);
            if (!b || b->lo > k) return out;
            out.push_back({b->lo, b->hi < k ? b->hi : k, 1, {BigInt(0)}});
        }
    }
    std::optional<Block> block(std::size_t j) const override { return cached_block(j); }

  protected:
    virtual std::optional<Block> make_block(std::size_t j) const = 0;

    std::optional<Block> cached_block(std::size_t j) const {
        std::lock_guard<std::mutex> lock(mu_);
        while (cache_.size() < j) {
            auto b = make_block(cache_.size() + 1);
            if (!b) return exhausted_ = true, std::nullopt;
            if (!cache_.empty() && b->lo <= cache_.back().hi)
                throw std::logic_error("block family: blocks not strictly separated");
            if (b->lo > b->hi) throw std::logic_error("block family: empty block");
            cache_.push_back(*b);
        }
        return cache_[j - 1];
    }

  private:
    mutable std::mutex mu_;
    mutable std::vector<Block> cache_;
    mutable bool exhausted_ = false;
};

class ExplicitBlocksNode final : public BlockNode {
  public:
    explicit ExplicitBlocksNode(std::vector<Block> list) : list_(std::move(list)) {
        for (std::size_t i = 0; i < list_.size(); ++i) {
            if (list_[i].lo < 1 || list_[i].lo > list_[i].hi)
                throw std::invalid_argument("blocks: bad interval");
            if (i > 0 && list_[i].lo <= list_[i - 1].hi)
                throw std::invalid_argument("blocks: intervals must be separated and increasing");
        }
    }
    Json to_json() const override {
        Json arr = Json::array();
        for (const auto& b : list_) arr.push_back({{"lo", b.lo.str()}, {"hi", b.hi.str()}});
        return {{"kind", "blocks"}, {"list", arr}};
    }
    LimitProfile profile() const override {
        LimitProfile p;  // a finite block list is a finite set
        p.exact = true;
        p.liminf = p.limsup = 0;
        p.liminf_attained = true;
        return p;
    }

  protected:
    std::optional<Block> make_block(std::size_t j) const override {
        if (j > list_.size()) return std::nullopt;
        return list_[j - 1];
    }

  private:
    std::vector<Block> list_;
};

class SawtoothNode final : public BlockNode {
  public:
    SawtoothNode(Rational lo, Rational hi) : lo_(std::move(lo)), hi_(std::move(hi)) {
        if (!(Rational(0) < lo_ && lo_ < hi_ && hi_ < 1))
            throw std::invalid_argument("sawtooth: need 0 < lo < hi < 1");
        Rational ratio = hi_ * (1 - lo_) / (lo_ * (1 - hi_));
        if (big_den(ratio) != 1 || ratio < 2)
            throw std::invalid_argument("sawtooth: block-end ratio hi(1-lo)/(lo(1-hi)) must be an integer >= 2");
        ratio_ = big_num(ratio);
        // b_1 clears every denominator so block ends and gap ends land on
        // exact density values for all j.
        Rational g = hi_ / lo_;
        b1_ = boost::multiprecision::lcm(big_den(hi_), big_den(g));
        while (big_num(hi_) * b1_ / big_den(hi_) + 1 > b1_) b1_ *= 2;  // first block nonempty
    }
    Json to_json() const override {
        return {{"kind", "sawtooth"}, {"lo", rat_string(lo_)}, {"hi", rat_string(hi_)}};
    }
    LimitProfile profile() const override {
        LimitProfile p;
        p.exact = true;
        p.liminf = lo_;
        p.limsup = hi_;
        p.liminf_attained = true;
        p.block_end_limit = hi_;
        p.block_start_limit = lo_;
        return p;
    }
    bool infinite_blocks() const override { return true; }
    bool unbounded_block_lengths() const override { return true; }

  protected:
    std::optional<Block> make_block(std::size_t j) const override {
        // b_{j+1} = ratio * b_j; count at b_j is exactly hi*b_j; the gap ends
        // at a_{j+1} - 1 = (hi/lo) b_j, where the density is exactly lo.
        BigInt b = b1_;
        for (std::size_t t = 1; t < j; ++t) b *= ratio_;
        BigInt cnt = big_num(hi_) * b / big_den(hi_);
        BigInt hi = b;
        BigInt lo;
        if (j == 1) {
            lo = b - cnt + 1;
        } else {
            BigInt bprev = b / ratio_;
            BigInt cprev = big_num(hi_) * bprev / big_den(hi_);
            lo = big_num(hi_ / lo_) * bprev / big_den(hi_ / lo_) + 1;
            // block [lo, hi] must raise the count from cprev to cnt
            if (cprev + (hi - lo + 1) != cnt) throw std::logic_error("sawtooth: recurrence broke");
        }
        return Block{lo, hi};
    }

  private:
    Rational lo_, hi_;
    BigInt ratio_, b1_;
};

inline BigInt nth_odd_prime(long i) {
    if (i < 1) throw std::invalid_argument("odd prime index must be >= 1");
    long found = 0;
    for (BigInt c = 3;; c += 2) {
        bool prime = true;
        for (BigInt d = 3; d * d <= c; d += 2)
            if (c % d == 0) {
                prime = false;
                break;
            }
        if (prime && ++found == i) return c;
    }
}

class ZeroOneMemberNode final : public BlockNode {
  public:
    explicit ZeroOneMemberNode(long i) : i_(i) {
        if (i < 1) throw std::invalid_argument("zero_one_member: i >= 1");
    }
    Json to_json() const override { return {{"kind", "zero_one_member"}, {"i", i_}}; }
    LimitProfile profile() const override {
        LimitProfile p;
        p.exact = true;
        p.liminf = 0;
        p.limsup = 1 - Rational(1, BigInt(i_) * i_);
        p.liminf_attained = true;
        p.superfactorial_gaps = true;
        p.block_end_limit = p.limsup;
        p.block_start_limit = 0;
        return p;
    }
    bool infinite_blocks() const override { return true; }
    bool unbounded_block_lengths() const override { return i_ >= 2; }
    long member_index() const { return i_; }

  protected:
    std::optional<Block> make_block(std::size_t j) const override {
        BigInt m = BigInt(i_) + BigInt(j) - 1;  // m >= i
        BigInt f = factorial(3 * m);
        return Block{f / i_, i_ * f};
    }

  private:
    long i_;
};

class PrimeFactorialMemberNode final : public BlockNode {
  public:
    explicit PrimeFactorialMemberNode(long i) : i_(i), p_(nth_odd_prime(i)) {}
    Json to_json() const override { return {{"kind", "prime_factorial_member"}, {"i", i_}}; }
    LimitProfile profile() const override {
        LimitProfile p;
        p.exact = true;
        p.liminf = 0;
        p.limsup = Rational(BigInt(i_) - 1, BigInt(i_));
        p.liminf_attained = true;
        p.superfactorial_gaps = true;
        p.block_end_limit = p.limsup;
        p.block_start_limit = 0;
        return p;
    }
    bool infinite_blocks() const override { return true; }
    bool unbounded_block_lengths() const override { return i_ >= 2; }
    long member_index() const { return i_; }
    const BigInt& prime() const { return p_; }

  protected:
    std::optional<Block> make_block(std::size_t j) const override {
        BigInt pw = 1;
        for (std::size_t t = 0; t < j; ++t) pw *= p_;
        BigInt f = factorial(pw);
        return Block{f, i_ * f};
    }

  private:
    long i_;
    BigInt p_;
};

class PrimeFactorialGuardNode final : public BlockNode {
  public:
    explicit PrimeFactorialGuardNode(long i) : i_(i), p_(nth_odd_prime(i)) {}
    Json to_json() const override { return {{"kind", "prime_factorial_guard"}, {"i", i_}}; }
    LimitProfile profile() const override {
        LimitProfile p;
        p.exact = true;
        p.liminf = 0;
        p.limsup = 1;
        p.liminf_attained = true;
        p.superfactorial_gaps = true;
        p.block_end_limit = 1;
        p.block_start_limit = 0;
        return p;
    }
    bool infinite_blocks() const override { return true; }
    bool unbounded_block_lengths() const override { return true; }
    long member_index() const { return i_; }
    const BigInt& prime() const { return p_; }

  protected:
    std::optional<Block> make_block(std::size_t j) const override {
        BigInt pw = 1;
        for (std::size_t t = 0; t < j; ++t) pw *= p_;
        return Block{factorial(pw), factorial(pw + 1) - 1};
    }

  private:
    long i_;
    BigInt p_;
};

// ------------------------------------------------------------- dilation

inline BigInt dilate_index(const BigInt& i, long p, long q) {
    // i = kp - m with k >= 1, 0 <= m <= p-1  maps to  kq - m.
    BigInt k = ceil_div(i, BigInt(p));
    BigInt m = k * p - i;
    return k * q - m;
}

// Inverse of dilate_index on its image; nullopt off the image.
inline std::optional<BigInt> contract_index(const BigInt& j, long p, long q) {
    BigInt k = ceil_div(j, BigInt(q));
    BigInt m = k * q - j;
    if (m > p - 1) return std::nullopt;
    return k * p - m;
}

class DilatedNode final : public SetNode {
  public:
    DilatedNode(DigitSet base, long p, long q) : base_(std::move(base)), p_(p), q_(q) {
        if (p < 1 || p >= q) throw std::invalid_argument("dilation: need 1 <= p < q");
    }
    bool contains(const BigInt& j) const override {
        auto i = contract_index(j, p_, q_);
        return i && base_.contains(*i);
    }
    BigInt count(const BigInt& k) const override {
        // #{ i in S : dilate(i) <= k }; dilation is strictly increasing.
        BigInt i = floor_div(k * p_, BigInt(q_)) + 1;
        while (i >= 1 && dilate_index(i, p_, q_) > k) --i;
        while (dilate_index(i + 1, p_, q_) <= k) ++i;
        if (i < 1) return 0;
        return base_.count(i);
    }
    std::vector<APPiece> decompose(const BigInt& k) const override {
        BigInt i = floor_div(k * p_, BigInt(q_)) + 1;
        while (i >= 1 && dilate_index(i, p_, q_) > k) --i;
        while (dilate_index(i + 1, p_, q_) <= k) ++i;
        std::vector<APPiece> out;
        if (i < 1) return out;
        for (const auto& piece : base_.decompose(i)) dilate_piece(piece, k, out);
        return merge_pieces(std::move(out));
    }
    Json to_json() const override {
        return {{"kind", "dilated"}, {"p", p_}, {"q", q_}, {"base", base_.to_json()}};
    }
    LimitProfile profile() const override {
        LimitProfile b = base_.profile();
        LimitProfile p;
        if (!b.exact) return p;
        Rational r(p_, q_);
        p.exact = true;
        p.liminf = r * b.liminf;
        p.limsup = r * b.limsup;
        p.liminf_attained = b.liminf_attained;
        p.superfactorial_gaps = b.superfactorial_gaps;
        return p;
    }
    const DigitSet& base() const { return base_; }

  private:
    void dilate_piece(const APPiece& piece, const BigInt& clip, std::vector<APPiece>& out) const {
        // The dilation is affine on each residue class mod p, with step
        // L = lcm(modulus, p) upstream mapping to step (L/p) q downstream.
        BigInt L = boost::multiprecision::lcm(piece.modulus, BigInt(p_));
        BigInt step = L / p_ * q_;
        for (BigInt x = 0; x < L; ++x) {
            if (!std::binary_search(piece.residues.begin(), piece.residues.end(), x % piece.modulus)) continue;
            // members congruent to x mod L inside [lo, hi]
            BigInt first = piece.lo + ((x - piece.lo) % L + L) % L;
            if (first > piece.hi) continue;
            BigInt last = piece.hi - ((piece.hi - x) % L + L) % L;
            BigInt flo = dilate_index(first, p_, q_), fhi = dilate_index(last, p_, q_);
            if (fhi > clip) {
                BigInt over = ceil_div(fhi - clip, step);
                fhi -= over * step;
                if (fhi < flo) continue;
            }
            out.push_back({flo, fhi, step, {flo % step}});
        }
    }

    static std::vector<APPiece> merge_pieces(std::vector<APPiece> pieces) {
        std::sort(pieces.begin(), pieces.end(),
                  [](const APPiece& a, const APPiece& b) { return a.lo < b.lo; });
        // Merge same-modulus pieces when the widened piece describes exactly
        // the union (verified by counting).
        bool changed = true;
        while (changed) {
            changed = false;
            for (std::size_t a = 0; a + 1 < pieces.size() && !changed; ++a)
                for (std::size_t b = a + 1; b < pieces.size() && !changed; ++b) {
                    if (pieces[a].modulus != pieces[b].modulus) continue;
                    APPiece m;
                    m.lo = pieces[a].lo < pieces[b].lo ? pieces[a].lo : pieces[b].lo;
                    m.hi = pieces[a].hi > pieces[b].hi ? pieces[a].hi : pieces[b].hi;
                    m.modulus = pieces[a].modulus;
                    m.residues = pieces[a].residues;
                    for (const auto& r : pieces[b].residues)
                        if (!std::binary_search(m.residues.begin(), m.residues.end(), r)) {
                            m.residues.push_back(r);
                            std::sort(m.residues.begin(), m.residues.end());
                        }
                    if (m.size() == pieces[a].size() + pieces[b].size()) {
                        pieces[a] = m;
                        pieces.erase(pieces.begin() + static_cast<long>(b));
                        changed = true;
                    }
                }
        }
        return pieces;
    }

    DigitSet base_;
    long p_, q_;
};

// --------------------------------------------------- half-density witness

// Interval selector for the witness: which level gaps carry blocks.
struct IntervalSelector {
    std::string kind;  // "all" | "mod"
    BigInt modulus = 2;
    std::vector<BigInt> residues;

    bool selected(const BigInt& k) const {
        if (kind == "all") return true;
        return std::binary_search(residues.begin(), residues.end(), k % modulus);
    }
    Json to_json() const {
        if (kind == "all") return {{"kind", "all"}};
        Json rs = Json::array();
        for (const auto& r : residues) rs.push_back(r.str());
        return {{"kind", "mod"}, {"modulus", modulus.str()}, {"residues", rs}};
    }
};

// On each selected interval [n_k, n_{k+1}) the members are the block
// { ceil((n_k+n_{k+1})/2) .. n_{k+1}-2 }; on the others, the even numbers.
// Running density stays <= 1/2 while the density sampled at the n_k tends
// to 1/2 when the levels grow geometrically.
class HalfDensityWitnessNode final : public SetNode {
  public:
    HalfDensityWitnessNode(ScaleRulePtr levels, IntervalSelector sel)
        : levels_(std::move(levels)), sel_(std::move(sel)) {
        if (!levels_) throw std::invalid_argument("witness: missing level rule");
    }

    bool contains(const BigInt& i) const override {
        if (i < levels_->at(1)) return false;
        BigInt k = interval_of(i);
        BigInt lo = levels_->at(k), hi = levels_->at(k + 1);
        if (sel_.selected(k)) return i >= ceil_div(lo + hi, BigInt(2)) && i <= hi - 2;
        return i % 2 == 0;
    }
    BigInt count(const BigInt& k) const override {
        BigInt c = 0;
        for (BigInt t = 1;; ++t) {
            BigInt lo = levels_->at(t);
            if (lo > k) return c;
            BigInt hi = levels_->at(t + 1);
            BigInt upto = (hi - 1 < k) ? hi - 1 : k;  // clip to [lo, upto]
            if (sel_.selected(t)) {
                BigInt blo = ceil_div(lo + hi, BigInt(2)), bhi = hi - 2;
                if (bhi > upto) bhi = upto;
                if (bhi >= blo) c += bhi - blo + 1;
            } else {
                c += ap_count(lo, upto, 2, {BigInt(0)});
            }
        }
    }
    std::vector<APPiece> decompose(const BigInt& k) const override {
        std::vector<APPiece> out;
        for (BigInt t = 1;; ++t) {
            BigInt lo = levels_->at(t);
            if (lo > k) return out;
            BigInt hi = levels_->at(t + 1);
            BigInt upto = (hi - 1 < k) ? hi - 1 : k;
            if (sel_.selected(t)) {
                BigInt blo = ceil_div(lo + hi, BigInt(2)), bhi = hi - 2;
                if (bhi > upto) bhi = upto;
                if (bhi >= blo) out.push_back({blo, bhi, 1, {BigInt(0)}});
            } else {
                BigInt first = lo + (lo % 2), last = upto - (upto % 2);
                if (last >= first) out.push_back({first, last, 2, {BigInt(0)}});
            }
        }
    }
    Json to_json() const override {
        return {{"kind", "half_density_witness"},
                {"levels", levels_->to_json()},
                {"selector", sel_.to_json()}};
    }
    const ScaleRuleNode* levels() const { return levels_.get(); }
    ScaleRulePtr levels_ptr() const { return levels_; }

  private:
    BigInt interval_of(const BigInt& i) const {
        BigInt k = 1;
        while (levels_->at(k + 1) <= i) ++k;  // geometric rules make this short
        return k;
    }

    ScaleRulePtr levels_;
    IntervalSelector sel_;
};

// ------------------------------------------------------------ combinators

enum class BoolOp { Union, Intersection, Complement };

class BoolNode final : public SetNode {
  public:
    BoolNode(BoolOp op, DigitSet a, std::optional<DigitSet> b)
        : op_(op), a_(std::move(a)), b_(std::move(b)) {
        if ((op == BoolOp::Complement) != !b_) throw std::invalid_argument("bool node arity");
    }

    bool contains(const BigInt& i) const override {
        switch (op_) {
            case BoolOp::Union: return a_.contains(i) || b_->contains(i);
            case BoolOp::Intersection: return a_.contains(i) && b_->contains(i);
            case BoolOp::Complement: return !a_.contains(i);
        }
        return false;
    }

    BigInt count(const BigInt& k) const override {
        if (op_ == BoolOp::Complement) return k - a_.count(k);
        BigInt c = 0;
        for (const auto& piece : decompose(k)) c += piece.size();
        return c;
    }

    std::vector<APPiece> decompose(const BigInt& k) const override {
        if (op_ == BoolOp::Complement) return complement_pieces(a_.decompose(k), k);
        return overlay(a_.decompose(k), b_->decompose(k), k, op_ == BoolOp::Union);
    }

    Json to_json() const override {
        const char* names[] = {"union", "intersection", "complement"};
        Json j = {{"kind", names[static_cast<int>(op_)]}, {"a", a_.to_json()}};
        if (b_) j["b"] = b_->to_json();
        return j;
    }

    LimitProfile profile() const override {
        if (op_ == BoolOp::Complement) {
            LimitProfile base = a_.profile();
            LimitProfile p;
            if (!base.exact) return p;
            p.exact = true;
            p.liminf = 1 - base.limsup;  // density of the complement is 1 - M_S
            p.limsup = 1 - base.liminf;
            p.liminf_attained = base.liminf_attained;
            return p;
        }
        LimitProfile pa = a_.profile(), pb = b_->profile();
        LimitProfile p;
        if (pa.density_converges() && pb.density_converges()) {
            // Densities of both operands converge; the combination's density
            // converges whenever the overlap does, which periodic
            // normalization certifies. Without it only certify the trivial
            // disjoint/united cases via a scan-free bound when available.
            auto norm = normalized_period();
            if (norm) {
                p.exact = true;
                p.liminf = p.limsup = *norm;
                p.liminf_attained = true;
            }
        }
        return p;
    }

  private:
    // if both operands reduce to eventually periodic sets, the exact limit
    // density of the combination.
    std::optional<Rational> normalized_period() const {
        auto pa = periodic_shape(a_);
        std::optional<std::pair<BigInt, std::vector<BigInt>>> pb;
        if (op_ != BoolOp::Complement) {
            pb = periodic_shape(*b_);
            if (!pb) return std::nullopt;
        }
        if (!pa) return std::nullopt;
        BigInt L = pa->first;
        if (pb) L = boost::multiprecision::lcm(L, pb->first);
        if (L > 100000) return std::nullopt;
        auto in = [&](const std::pair<BigInt, std::vector<BigInt>>& shape, const BigInt& x) {
            return std::binary_search(shape.second.begin(), shape.second.end(), x % shape.first);
        };
        BigInt hits = 0;
        for (BigInt x = 0; x < L; ++x) {
            bool m = op_ == BoolOp::Union ? (in(*pa, x) || in(*pb, x)) : (in(*pa, x) && in(*pb, x));
            if (m) ++hits;
        }
        return Rational(hits, L);
    }

    // (modulus, sorted residues) of the eventual period, when the operand is
    // periodic-shaped.
    static std::optional<std::pair<BigInt, std::vector<BigInt>>> periodic_shape(const DigitSet& s);

    static std::vector<APPiece> complement_pieces(const std::vector<APPiece>& in, const BigInt& k) {
        std::vector<APPiece> out;
        BigInt cursor = 1;
        for (const auto& piece : in) {
            if (piece.lo > cursor) out.push_back({cursor, piece.lo - 1, 1, {BigInt(0)}});
            std::vector<BigInt> inv;
            for (BigInt r = 0; r < piece.modulus; ++r)
                if (!std::binary_search(piece.residues.begin(), piece.residues.end(), r)) inv.push_back(r);
            if (!inv.empty()) out.push_back({piece.lo, piece.hi, piece.modulus, inv});
            cursor = piece.hi + 1;
        }
        if (cursor <= k) out.push_back({cursor, k, 1, {BigInt(0)}});
        return out;
    }

    // Overlay two disjoint-interval piece lists; combine residues per atomic
    // interval modulo the lcm.
    static std::vector<APPiece> overlay(const std::vector<APPiece>& as, const std::vector<APPiece>& bs,
                                        const BigInt& k, bool is_union) {
        std::vector<BigInt> cuts{BigInt(1), k + 1};
        for (const auto& p : as) {
            cuts.push_back(p.lo);
            cuts.push_back(p.hi + 1);
        }
        for (const auto& p : bs) {
            cuts.push_back(p.lo);
            cuts.push_back(p.hi + 1);
        }
        std::sort(cuts.begin(), cuts.end());
        cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
        auto piece_at = [](const std::vector<APPiece>& ps, const BigInt& x) -> const APPiece* {
            for (const auto& p : ps)
                if (p.lo <= x && x <= p.hi) return &p;
            return nullptr;
        };
        std::vector<APPiece> out;
        for (std::size_t t = 0; t + 1 < cuts.size(); ++t) {
            BigInt lo = cuts[t], hi = cuts[t + 1] - 1;
            if (lo < 1 || lo > k) continue;
            if (hi > k) hi = k;
            const APPiece* pa = piece_at(as, lo);
            const APPiece* pb = piece_at(bs, lo);
            if (!pa && !pb) continue;
            if (!pb || !pa) {
                if (is_union) {
                    const APPiece* p = pa ? pa : pb;
                    out.push_back({lo, hi, p->modulus, p->residues});
                }
                continue;
            }
            BigInt L = boost::multiprecision::lcm(pa->modulus, pb->modulus);
            if (L > 1000000) throw std::runtime_error("digit set overlay: joint modulus too large");
            std::vector<BigInt> rs;
            for (BigInt x = 0; x < L; ++x) {
                bool ina = std::binary_search(pa->residues.begin(), pa->residues.end(), x % pa->modulus);
                bool inb = std::binary_search(pb->residues.begin(), pb->residues.end(), x % pb->modulus);
                if (is_union ? (ina || inb) : (ina && inb)) rs.push_back(x);
            }
            if (!rs.empty()) out.push_back({lo, hi, L, rs});
        }
        return out;
    }

    BoolOp op_;
    DigitSet a_;
    std::optional<DigitSet> b_;
};

inline std::optional<std::pair<BigInt, std::vector<BigInt>>> BoolNode::periodic_shape(const DigitSet& s) {
    Json j = s.to_json();
    std::string kind = j.at("kind");
    if (kind == "finite" || kind == "blocks" || kind == "ap_blocks") {
        // finite support: empty eventual period
        return std::make_pair(BigInt(1), std::vector<BigInt>{});
    }
    if (kind == "eventually_periodic") {
        std::vector<BigInt> rs;
        for (const auto& r : j.at("residues")) rs.emplace_back(r.get<std::string>());
        std::sort(rs.begin(), rs.end());
        return std::make_pair(BigInt(j.at("modulus").get<std::string>()), rs);
    }
    return std::nullopt;
}

class APBlocksNode final : public SetNode {
  public:
    explicit APBlocksNode(std::vector<APPiece> pieces) : pieces_(std::move(pieces)) {
        std::sort(pieces_.begin(), pieces_.end(),
                  [](const APPiece& a, const APPiece& b) { return a.lo < b.lo; });
        for (std::size_t i = 0; i < pieces_.size(); ++i) {
            auto& p = pieces_[i];
            if (p.lo < 1 || p.lo > p.hi || p.modulus < 1) throw std::invalid_argument("ap_blocks: bad piece");
            std::sort(p.residues.begin(), p.residues.end());
            for (const auto& r : p.residues)
                if (r < 0 || r >= p.modulus) throw std::invalid_argument("ap_blocks: residue out of range");
            if (i > 0 && p.lo <= pieces_[i - 1].hi)
                throw std::invalid_argument("ap_blocks: pieces must have disjoint intervals");
        }
    }
    bool contains(const BigInt& i) const override {
        for (const auto& p : pieces_)
            if (p.contains(i)) return true;
        return false;
    }
    BigInt count(const BigInt& k) const override {
        BigInt c = 0;
        for (const auto& p : pieces_) {
            if (p.lo > k) break;
            c += p.count_up_to(k);
        }
        return c;
    }
    std::vector<APPiece> decompose(const BigInt& k) const override {
        std::vector<APPiece> out;
        for (const auto& p : pieces_) {
            if (p.lo > k) break;
            APPiece q = p;
            if (q.hi > k) q.hi = k;
            out.push_back(q);
        }
        return out;
    }
    Json to_json() const override {
        Json arr = Json::array();
        for (const auto& p : pieces_) {
            Json rs = Json::array();
            for (const auto& r : p.residues) rs.push_back(r.str());
            arr.push_back({{"lo", p.lo.str()}, {"hi", p.hi.str()}, {"modulus", p.modulus.str()}, {"residues", rs}});
        }
        return {{"kind", "ap_blocks"}, {"pieces", arr}};
    }
    LimitProfile profile() const override {
        LimitProfile p;  // finite intervals, so finite support
        p.exact = true;
        p.liminf = p.limsup = 0;
        p.liminf_attained = true;
        return p;
    }
    const std::vector<APPiece>& pieces() const { return pieces_; }

  private:
    std::vector<APPiece> pieces_;
};

}  // namespace detail

// ----------------------------------------------------------- DigitSet api

inline DigitSet::DigitSet() : node_(std::make_shared<detail::FiniteNode>(std::vector<BigInt>{})) {}

inline DigitSet DigitSet::finite(std::vector<BigInt> members) {
    return DigitSet(std::make_shared<detail::FiniteNode>(std::move(members)));
}
inline DigitSet DigitSet::eventually_periodic(BigInt threshold, BigInt modulus, std::vector<BigInt> residues,
                                              std::vector<BigInt> prefix) {
    return DigitSet(std::make_shared<detail::PeriodicNode>(std::move(threshold), std::move(modulus),
                                                           std::move(residues), std::move(prefix)));
}
inline DigitSet DigitSet::all() { return eventually_periodic(1, 1, {BigInt(0)}); }
inline DigitSet DigitSet::none() { return finite({}); }
inline DigitSet DigitSet::evens() { return eventually_periodic(1, 2, {BigInt(0)}); }
inline DigitSet DigitSet::odds() { return eventually_periodic(1, 2, {BigInt(1)}); }
inline DigitSet DigitSet::multiples(const BigInt& m) { return eventually_periodic(1, m, {BigInt(0)}); }
inline DigitSet DigitSet::blocks(std::vector<Block> list) {
    return DigitSet(std::make_shared<detail::ExplicitBlocksNode>(std::move(list)));
}
inline DigitSet DigitSet::ap_blocks(std::vector<APPiece> pieces) {
    return DigitSet(std::make_shared<detail::APBlocksNode>(std::move(pieces)));
}
inline DigitSet DigitSet::sawtooth(const Rational& lo, const Rational& hi) {
    return DigitSet(std::make_shared<detail::SawtoothNode>(lo, hi));
}
inline DigitSet DigitSet::zero_one_member(long i) {
    return DigitSet(std::make_shared<detail::ZeroOneMemberNode>(i));
}
inline DigitSet DigitSet::prime_factorial_member(long i) {
    return DigitSet(std::make_shared<detail::PrimeFactorialMemberNode>(i));
}
inline DigitSet DigitSet::prime_factorial_guard(long i) {
    return DigitSet(std::make_shared<detail::PrimeFactorialGuardNode>(i));
}
inline DigitSet DigitSet::half_density_witness(ScaleRulePtr levels, std::string selector_kind,
                                               BigInt selector_modulus, std::vector<BigInt> selector_residues) {
    detail::IntervalSelector sel;
    sel.kind = std::move(selector_kind);
    sel.modulus = std::move(selector_modulus);
    sel.residues = std::move(selector_residues);
    std::sort(sel.residues.begin(), sel.residues.end());
    if (sel.kind != "all" && sel.kind != "mod") throw std::invalid_argument("witness selector: unknown kind");
    return DigitSet(std::make_shared<detail::HalfDensityWitnessNode>(std::move(levels), std::move(sel)));
}

inline DigitSet DigitSet::dilated(long p, long q) const {
    return DigitSet(std::make_shared<detail::DilatedNode>(*this, p, q));
}

inline DigitSet set_union(const DigitSet& a, const DigitSet& b) {
    return DigitSet(std::make_shared<detail::BoolNode>(detail::BoolOp::Union, a, b));
}
inline DigitSet set_intersection(const DigitSet& a, const DigitSet& b) {
    return DigitSet(std::make_shared<detail::BoolNode>(detail::BoolOp::Intersection, a, b));
}
inline DigitSet set_complement(const DigitSet& a) {
    return DigitSet(std::make_shared<detail::BoolNode>(detail::BoolOp::Complement, a, std::nullopt));
}

inline DigitSet DigitSet::from_json(const Json& j) {
    std::string kind = j.at("kind").get<std::string>();
    if (kind == "finite") return finite(json_big_list(j.at("members")));
    if (kind == "eventually_periodic") {
        std::vector<BigInt> prefix;
        if (j.contains("prefix")) prefix = json_big_list(j.at("prefix"));
        return eventually_periodic(json_big(j.at("threshold")), json_big(j.at("modulus")),
                                   json_big_list(j.at("residues")), std::move(prefix));
    }
    if (kind == "blocks") {
        std::vector<Block> list;
        for (const auto& b : j.at("list")) list.push_back({json_big(b.at("lo")), json_big(b.at("hi"))});
        return blocks(std::move(list));
    }
    if (kind == "ap_blocks") {
        std::vector<APPiece> pieces;
        for (const auto& p : j.at("pieces"))
            pieces.push_back({json_big(p.at("lo")), json_big(p.at("hi")), json_big(p.at("modulus")),
                              json_big_list(p.at("residues"))});
        return ap_blocks(std::move(pieces));
    }
    if (kind == "sawtooth") return sawtooth(json_rat(j.at("lo")), json_rat(j.at("hi")));
    if (kind == "zero_one_member") return zero_one_member(j.at("i").get<long>());
    if (kind == "prime_factorial_member") return prime_factorial_member(j.at("i").get<long>());
    if (kind == "prime_factorial_guard") return prime_factorial_guard(j.at("i").get<long>());
    if (kind == "dilated")
        return from_json(j.at("base")).dilated(j.at("p").get<long>(), j.at("q").get<long>());
    if (kind == "half_density_witness") {
        const Json& sel = j.at("selector");
        std::string sk = sel.at("kind").get<std::string>();
        if (sk == "all") return half_density_witness(scale_rule_from_json(j.at("levels")), "all");
        return half_density_witness(scale_rule_from_json(j.at("levels")), "mod", json_big(sel.at("modulus")),
                                    json_big_list(sel.at("residues")));
    }
    if (kind == "union") return set_union(from_json(j.at("a")), from_json(j.at("b")));
    if (kind == "intersection") return set_intersection(from_json(j.at("a")), from_json(j.at("b")));
    if (kind == "complement") return set_complement(from_json(j.at("a")));
    throw std::invalid_argument("unknown digit set kind: " + kind);
}

}  // namespace drh
