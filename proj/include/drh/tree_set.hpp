#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "drh/dim_eval.hpp"
#include "drh/digit_set.hpp"
#include "drh/numeric.hpp"

namespace drh {

// A dyadic cube of level `level` in [0,1]^n, addressed by the integer whose
// base-2^n digits (most significant first) are the child indices along the
// path from the root. offset ranges over [0, 2^(n*level)).
struct TreePath {
    long level = 0;
    BigInt offset = 0;

    TreePath child(int digit, int n) const { return {level + 1, (offset << n) | digit}; }
    int digit_at(long t, int n) const {  // 1-indexed step along the path
        return static_cast<int>(((offset >> (n * (level - t))) & ((BigInt(1) << n) - 1)).convert_to<long>());
    }
    bool operator<(const TreePath& o) const {
        return level != o.level ? level < o.level : offset < o.offset;
    }
    bool operator==(const TreePath& o) const { return level == o.level && offset == o.offset; }
    std::string bits(int n) const {
        std::string s;
        for (long t = 1; t <= level; ++t) {
            int d = digit_at(t, n);
            for (int b = n - 1; b >= 0; --b) s += ((d >> b) & 1) ? '1' : '0';
        }
        return s;
    }
};

// Exact survivor count, kept in exponent form for uniform-branching trees so
// levels in the hundreds stay cheap.
struct SurvivorCount {
    bool pow2 = false;
    BigInt value = 0;  // exponent when pow2, exact count otherwise

    static SurvivorCount exact(BigInt v) { return {false, std::move(v)}; }
    static SurvivorCount exponent(BigInt e) { return {true, std::move(e)}; }
    BigInt as_integer() const { return pow2 ? pow2_int(value) : value; }
    bool equals(const SurvivorCount& o) const { return as_integer() == o.as_integer(); }
    Json to_json() const {
        if (pow2) return {{"pow2_exponent", value.str()}};
        return {{"count", value.str()}};
    }
};

namespace detail {

class TreeRule {
  public:
    virtual ~TreeRule() = default;
    virtual int ambient() const = 0;
    // Surviving child digits of a surviving node, sorted ascending. Must be
    // nonempty: the represented set is a nonempty compact intersection.
    virtual std::vector<int> children(const TreePath& p) const = 0;
    virtual std::optional<SurvivorCount> closed_form(long level) const { return std::nullopt; }
    virtual Json to_json() const = 0;
};

using TreeRulePtr = std::shared_ptr<const TreeRule>;

class DigitSetTreeRule final : public TreeRule {
  public:
    explicit DigitSetTreeRule(DigitSet s) : set_(std::move(s)) {}
    int ambient() const override { return 1; }
    std::vector<int> children(const TreePath& p) const override {
        return set_.contains(p.level + 1) ? std::vector<int>{0, 1} : std::vector<int>{0};
    }
    std::optional<SurvivorCount> closed_form(long level) const override {
        return SurvivorCount::exponent(level == 0 ? BigInt(0) : set_.count(level));
    }
    Json to_json() const override { return {{"kind", "digitset_tree"}, {"set", set_.to_json()}}; }
    const DigitSet& set() const { return set_; }

  private:
    DigitSet set_;
};

class FamilyTreeRule final : public TreeRule {
  public:
    explicit FamilyTreeRule(SetFamily fam) : fam_(std::move(fam)) {}
    int ambient() const override { return 1; }
    std::vector<int> children(const TreePath& p) const override {
        if (p.offset == 0) {
            // the all-zeros spine carries the point 0 and roots copy l+1
            bool has_next = !fam_.size() || p.level + 1 <= *fam_.size();
            return has_next ? std::vector<int>{0, 1} : std::vector<int>{0};
        }
        long i = p.level - static_cast<long>(bit_length(p.offset)) + 1;  // copy index: first 1 bit position
        long j = p.level + 1 - i;  // next digit position inside copy i
        return fam_.member(i).contains(j) ? std::vector<int>{0, 1} : std::vector<int>{0};
    }
    std::optional<SurvivorCount> closed_form(long level) const override {
        BigInt total = 1;  // spine
        long top = level;
        if (fam_.size() && *fam_.size() < top) top = *fam_.size();
        for (long i = 1; i <= top; ++i) {
            long j = level - i;
            total += j == 0 ? BigInt(1) : pow2_int(fam_.member(i).count(j));
        }
        return SurvivorCount::exact(total);
    }
    Json to_json() const override { return {{"kind", "family_tree"}, {"family", fam_.to_json()}}; }
    const SetFamily& family() const { return fam_; }

  private:
    SetFamily fam_;
};

class ExplicitTreeRule final : public TreeRule {
  public:
    ExplicitTreeRule(int n, long depth, std::vector<std::map<BigInt, unsigned>> levels)
        : n_(n), depth_(depth), levels_(std::move(levels)) {
        if (n_ < 1 || n_ > 3) throw std::invalid_argument("explicit tree: ambient dimension 1..3");
        if (levels_.empty() || !levels_.front().count(0))
            throw std::invalid_argument("explicit tree: missing root");
        for (long l = 0; l < depth_; ++l)
            for (const auto& [off, mask] : levels_.at(l)) {
                if (mask == 0 || mask >= (1u << (1 << n_)))
                    throw std::invalid_argument("explicit tree: node without surviving children");
                if (l + 1 >= depth_) continue;
                for (int d = 0; d < (1 << n_); ++d)
                    if ((mask & (1u << d)) && !levels_.at(l + 1).count((off << n_) | d))
                        throw std::invalid_argument("explicit tree: node without surviving children");
            }
    }
    int ambient() const override { return n_; }
    std::vector<int> children(const TreePath& p) const override {
        if (p.level >= depth_) return {0};  // frozen continuation past the stored depth
        auto it = levels_.at(p.level).find(p.offset);
        if (it == levels_.at(p.level).end()) throw std::logic_error("explicit tree: query off the tree");
        std::vector<int> out;
        for (int d = 0; d < (1 << n_); ++d)
            if (it->second & (1u << d)) out.push_back(d);
        return out;
    }
    std::optional<SurvivorCount> closed_form(long level) const override {
        // past the stored depth every node continues with one child
        return SurvivorCount::exact(count_at(level < depth_ ? level : depth_));
    }
    Json to_json() const override {
        Json lv = Json::array();
        for (const auto& level : levels_) {
            Json nodes = Json::array();
            for (const auto& [off, mask] : level) nodes.push_back({{"offset", off.str()}, {"mask", mask}});
            lv.push_back(nodes);
        }
        return {{"kind", "explicit_tree"}, {"n", n_}, {"depth", depth_}, {"levels", lv}};
    }
    long stored_depth() const { return depth_; }

  private:
    BigInt count_at(long level) const {
        if (level == 0) return 1;
        BigInt c = 0;
        for (const auto& [off, mask] : levels_.at(level - 1)) {
            (void)off;
            for (int d = 0; d < (1 << n_); ++d)
                if (mask & (1u << d)) ++c;
        }
        return c;
    }

    int n_;
    long depth_;
    // levels_[l] maps a surviving level-l node offset to the bitmask of its
    // surviving children (so levels_[0] holds the root's mask).
    std::vector<std::map<BigInt, unsigned>> levels_;
};

using TreeRuleFactory = TreeRulePtr (*)(const Json&);
inline std::map<std::string, TreeRuleFactory>& tree_rule_registry() {
    static std::map<std::string, TreeRuleFactory> reg;
    return reg;
}

}  // namespace detail

// Compact subset of [0,1]^n as a per-level dyadic survival rule.
class TreeSet {
  public:
    explicit TreeSet(detail::TreeRulePtr rule, std::optional<long> depth_limit = std::nullopt)
        : rule_(std::move(rule)), depth_limit_(depth_limit) {
        if (!rule_) throw std::invalid_argument("tree set: missing rule");
    }

    static TreeSet from_digitset(const DigitSet& s) {
        return TreeSet(std::make_shared<detail::DigitSetTreeRule>(s));
    }
    static TreeSet assemble_family(const SetFamily& fam) {
        return TreeSet(std::make_shared<detail::FamilyTreeRule>(fam));
    }
    static TreeSet point() { return from_digitset(DigitSet::none()); }

    int ambient() const { return rule_->ambient(); }
    std::optional<long> depth_limit() const { return depth_limit_; }
    TreeSet with_depth_limit(long d) const { return TreeSet(rule_, d); }

    std::vector<int> children(const TreePath& p) const {
        check_depth(p.level + 1);
        auto cs = rule_->children(p);
        if (cs.empty()) throw std::logic_error("tree set: a surviving node lost all children");
        return cs;
    }

    bool survives(const TreePath& p) const {
        check_depth(p.level);
        TreePath cur{0, 0};
        for (long t = 1; t <= p.level; ++t) {
            int d = p.digit_at(t, ambient());
            auto cs = rule_->children(cur);
            if (!std::binary_search(cs.begin(), cs.end(), d)) return false;
            cur = cur.child(d, ambient());
        }
        return true;
    }

    // Exact number of surviving level-l cubes: the minimal dyadic cover count
    // at scale 2^-l.
    SurvivorCount survivors_at_level(long level) const {
        check_depth(level);
        if (level == 0) return SurvivorCount::exact(1);
        if (auto c = rule_->closed_form(level)) return *c;
        BigInt c = 0;
        walk(level, [&](const TreePath& p) {
            if (p.level == level) ++c;
        });
        return SurvivorCount::exact(c);
    }

    // DFS over surviving nodes to max_level (inclusive); visit gets every
    // node, the root included.
    void walk(long max_level, const std::function<void(const TreePath&)>& visit) const {
        check_depth(max_level);
        walk_from(TreePath{0, 0}, max_level, visit);
    }

    void walk_from(const TreePath& start, long max_level,
                   const std::function<void(const TreePath&)>& visit) const {
        visit(start);
        if (start.level >= max_level) return;
        for (int d : rule_->children(start)) walk_from(start.child(d, ambient()), max_level, visit);
    }

    std::vector<TreePath> paths_at_level(long level) const {
        std::vector<TreePath> out;
        walk(level, [&](const TreePath& p) {
            if (p.level == level) out.push_back(p);
        });
        return out;
    }

    // Debug dump: one line per surviving path up to a level.
    std::string dump(long max_level) const {
        std::ostringstream os;
        walk(max_level, [&](const TreePath& p) { os << p.level << " " << p.bits(ambient()) << "\n"; });
        return os.str();
    }

    Json to_json() const {
        Json j = rule_->to_json();
        if (depth_limit_) j["depth_limit"] = *depth_limit_;
        return j;
    }
    static TreeSet from_json(const Json& j) {
        std::optional<long> dl;
        if (j.contains("depth_limit")) dl = j.at("depth_limit").get<long>();
        std::string kind = j.at("kind").get<std::string>();
        if (kind == "digitset_tree")
            return TreeSet(std::make_shared<detail::DigitSetTreeRule>(DigitSet::from_json(j.at("set"))), dl);
        if (kind == "family_tree")
            return TreeSet(std::make_shared<detail::FamilyTreeRule>(SetFamily::from_json(j.at("family"))), dl);
        if (kind == "explicit_tree") {
            std::vector<std::map<BigInt, unsigned>> levels;
            for (const auto& lv : j.at("levels")) {
                std::map<BigInt, unsigned> m;
                for (const auto& node : lv) m[BigInt(node.at("offset").get<std::string>())] = node.at("mask").get<unsigned>();
                levels.push_back(std::move(m));
            }
            return TreeSet(std::make_shared<detail::ExplicitTreeRule>(j.at("n").get<int>(),
                                                                      j.at("depth").get<long>(), std::move(levels)),
                           dl);
        }
        auto it = detail::tree_rule_registry().find(kind);
        if (it != detail::tree_rule_registry().end()) return TreeSet(it->second(j), dl);
        throw std::invalid_argument("unknown tree kind: " + kind);
    }

    const DigitSet* as_digitset_tree() const {
        auto* r = dynamic_cast<const detail::DigitSetTreeRule*>(rule_.get());
        return r ? &r->set() : nullptr;
    }
    const SetFamily* as_family_tree() const {
        auto* r = dynamic_cast<const detail::FamilyTreeRule*>(rule_.get());
        return r ? &r->family() : nullptr;
    }
    const detail::TreeRule* rule() const { return rule_.get(); }

  private:
    void check_depth(long level) const {
        if (depth_limit_ && level > *depth_limit_)
            throw std::out_of_range("tree set: level exceeds the depth limit");
    }

    detail::TreeRulePtr rule_;
    std::optional<long> depth_limit_;
};

// Builder for small explicit trees (tests, random-oracle suites).
class ExplicitTreeBuilder {
  public:
    ExplicitTreeBuilder(int n, long depth) : n_(n), depth_(depth), levels_(depth) {}

    // mask: bit d set <=> child d survives; node must already be reachable.
    void set_children(const TreePath& p, unsigned mask) { levels_.at(p.level)[p.offset] = mask; }

    TreeSet build() const {
        return TreeSet(std::make_shared<detail::ExplicitTreeRule>(n_, depth_, levels_));
    }

  private:
    int n_;
    long depth_;
    std::vector<std::map<BigInt, unsigned>> levels_;
};

// Deterministic random tree on [0,1]^n of the given depth; sparse branching
// keeps exhaustive cover enumeration tractable.
inline TreeSet random_tree(int n, long depth, Rng& rng) {
    ExplicitTreeBuilder b(n, depth);
    int fanout = 1 << n;
    std::function<void(const TreePath&)> gen = [&](const TreePath& p) {
        if (p.level >= depth) return;
        int want;
        unsigned roll = static_cast<unsigned>(rng.below(10));
        if (fanout == 2)
            want = roll < 5 ? 1 : 2;
        else
            want = roll < 4 ? 1 : roll < 8 ? 2 : roll < 9 ? 3 : fanout;
        unsigned mask = 0;
        int placed = 0;
        while (placed < want) {
            int d = static_cast<int>(rng.below(fanout));
            if (!(mask & (1u << d))) {
                mask |= 1u << d;
                ++placed;
            }
        }
        b.set_children(p, mask);
        for (int d = 0; d < fanout; ++d)
            if (mask & (1u << d)) gen(p.child(d, n));
    };
    gen(TreePath{0, 0});
    return b.build();
}

// ------------------------------------------------------------ weighted tree

// Tree plus an exact mass per surviving node; the root carries mass 1 and
// children masses sum to their parent's, so every level is a partition of
// the unit mass.
class WeightedTree {
  public:
    // Natural uniform measure on a digit-restriction tree: every level-j node
    // carries 2^-count(S, j).
    static WeightedTree uniform(const TreeSet& t) {
        const DigitSet* s = t.as_digitset_tree();
        if (!s)
            throw std::invalid_argument(
                "uniform measure: only digit-restriction trees carry the uniform mass rule; give explicit "
                "masses otherwise");
        WeightedTree w(t);
        w.set_ = *s;
        return w;
    }

    // Explicit masses for small trees; conservation is validated to `depth`.
    static WeightedTree explicit_masses(const TreeSet& t, std::map<TreePath, Rational> masses, long depth) {
        WeightedTree w(t);
        w.masses_ = std::move(masses);
        if (w.mass(TreePath{0, 0}) != 1) throw std::invalid_argument("weighted tree: root mass must be 1");
        t.walk(depth - 1, [&](const TreePath& p) {
            Rational sum = 0;
            for (int d : t.children(p)) sum += w.mass(p.child(d, t.ambient()));
            if (sum != w.mass(p)) throw std::invalid_argument("weighted tree: children masses do not sum");
        });
        return w;
    }

    const TreeSet& base() const { return base_; }

    Rational mass(const TreePath& p) const {
        if (set_) return p.level == 0 ? Rational(1) : pow2_rat(-set_->count(p.level).convert_to<long>());
        auto it = masses_.find(p);
        if (it == masses_.end()) throw std::logic_error("weighted tree: mass query off the tree");
        return it->second;
    }

    bool is_uniform_digitset() const { return set_.has_value(); }
    const DigitSet& digitset() const { return *set_; }

  private:
    explicit WeightedTree(TreeSet t) : base_(std::move(t)) {}
    TreeSet base_;
    std::optional<DigitSet> set_;
    std::map<TreePath, Rational> masses_;
};

}  // namespace drh
