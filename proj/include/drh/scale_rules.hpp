#pragma once

#include <json.hpp>

#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <vector>

#include "drh/numeric.hpp"

namespace drh {

using Json = nlohmann::json;

// Growth classification of an increasing level sequence, used by the
// dimension evaluator to certify limits along the sequence.
struct GrowthClass {
    enum Kind {
        BoundedGap,  // n_{k+1} - n_k <= param from some index on
        Geometric,   // n_{k+1} <= param * n_k from some index on, param rational > 1
        Other,
    };
    Kind kind = Other;
    Rational param = 0;
    bool all_levels = false;  // n_k = k
};

// A total rule for a strictly increasing sequence of positive integers,
// 1-indexed. Implementations must be pure.
class ScaleRuleNode {
  public:
    virtual ~ScaleRuleNode() = default;
    virtual BigInt at(const BigInt& k) const = 0;  // k >= 1
    virtual GrowthClass growth() const { return {}; }
    virtual Json to_json() const = 0;
};

using ScaleRulePtr = std::shared_ptr<const ScaleRuleNode>;

// n_k = a + d k, d >= 1, a + d >= 1.
class ArithmeticRule final : public ScaleRuleNode {
  public:
    ArithmeticRule(BigInt a, BigInt d) : a_(std::move(a)), d_(std::move(d)) {
        if (d_ < 1 || a_ + d_ < 1) throw std::invalid_argument("arithmetic rule: need d >= 1 and a + d >= 1");
    }
    BigInt at(const BigInt& k) const override { return a_ + d_ * k; }
    GrowthClass growth() const override {
        GrowthClass g;
        g.kind = GrowthClass::BoundedGap;
        g.param = Rational(d_);
        g.all_levels = (a_ == 0 && d_ == 1);
        return g;
    }
    Json to_json() const override { return {{"kind", "arithmetic"}, {"a", a_.str()}, {"d", d_.str()}}; }
    const BigInt& step() const { return d_; }

  private:
    BigInt a_, d_;
};

// n_k = ceil(c * rho^k), rho > 1. The constructor requires c*rho*(rho-1) >= 1
// so that consecutive values differ by at least one and the sequence is
// strictly increasing from k = 1.
class SuperGeometricRule final : public ScaleRuleNode {
  public:
    SuperGeometricRule(Rational c, Rational rho) : c_(std::move(c)), rho_(std::move(rho)) {
        if (c_ <= 0 || rho_ <= 1) throw std::invalid_argument("super-geometric rule: need c > 0, rho > 1");
        if (c_ * rho_ * (rho_ - 1) < 1)
            throw std::invalid_argument("super-geometric rule: need c*rho*(rho-1) >= 1 for strict increase");
        powers_.push_back(rho_);
    }
    BigInt at(const BigInt& k) const override {
        std::lock_guard<std::mutex> lock(mu_);
        while (BigInt(powers_.size()) < k) powers_.push_back(powers_.back() * rho_);
        return ceil_rat(c_ * powers_[k.convert_to<std::size_t>() - 1]);
    }
    GrowthClass growth() const override {
        GrowthClass g;
        g.kind = GrowthClass::Geometric;
        // ceil(c rho^{k+1}) <= rho*ceil(c rho^k) + 1 <= (rho + 1/(c rho)) ceil(c rho^k)
        g.param = rho_ + Rational(1) / (c_ * rho_);
        return g;
    }
    Json to_json() const override {
        return {{"kind", "super_geometric"}, {"c", rat_string(c_)}, {"rho", rat_string(rho_)}};
    }
    const Rational& ratio() const { return rho_; }
    const Rational& scale() const { return c_; }

  private:
    Rational c_, rho_;
    mutable std::mutex mu_;
    mutable std::vector<Rational> powers_;  // powers_[k-1] = rho^k
};

// Explicit prefix followed by a tail rule; the tail's first value must
// exceed the last prefix entry.
class ConcatRule final : public ScaleRuleNode {
  public:
    ConcatRule(std::vector<BigInt> prefix, ScaleRulePtr tail)
        : prefix_(std::move(prefix)), tail_(std::move(tail)) {
        if (!tail_) throw std::invalid_argument("concat rule: missing tail");
        BigInt prev = 0;
        for (const auto& v : prefix_) {
            if (v <= prev) throw std::invalid_argument("concat rule: prefix not strictly increasing");
            prev = v;
        }
        if (!prefix_.empty() && tail_->at(1) <= prefix_.back())
            throw std::invalid_argument("concat rule: tail must continue above the prefix");
    }
    BigInt at(const BigInt& k) const override {
        if (k <= BigInt(prefix_.size())) return prefix_[k.convert_to<std::size_t>() - 1];
        return tail_->at(k - BigInt(prefix_.size()));
    }
    GrowthClass growth() const override {
        GrowthClass g = tail_->growth();
        g.all_levels = false;  // a prefix breaks the n_k = k identity
        return g;
    }
    Json to_json() const override {
        Json pv = Json::array();
        for (const auto& v : prefix_) pv.push_back(v.str());
        return {{"kind", "concat"}, {"prefix", pv}, {"tail", tail_->to_json()}};
    }

  private:
    std::vector<BigInt> prefix_;
    ScaleRulePtr tail_;
};

// "explicit" sugar: the listed values, continued with step 1 past the end so
// the rule stays total.
inline ScaleRulePtr explicit_rule(std::vector<BigInt> values) {
    if (values.empty()) throw std::invalid_argument("explicit rule: empty");
    BigInt last = values.back();
    return std::make_shared<ConcatRule>(std::move(values), std::make_shared<ArithmeticRule>(last, 1));
}

inline BigInt json_big(const Json& j) {
    if (j.is_string()) return BigInt(j.get<std::string>());
    return BigInt(j.get<long long>());
}

inline Rational json_rat(const Json& j) {
    if (j.is_string()) return parse_rational(j.get<std::string>());
    return Rational(j.get<long long>());
}

inline std::vector<BigInt> json_big_list(const Json& j) {
    std::vector<BigInt> out;
    for (const auto& v : j) out.push_back(json_big(v));
    return out;
}

// Additional rule kinds (samplers, constructed sequences) register here.
using ScaleRuleFactory = ScaleRulePtr (*)(const Json&);
inline std::map<std::string, ScaleRuleFactory>& scale_rule_registry() {
    static std::map<std::string, ScaleRuleFactory> reg;
    return reg;
}

inline ScaleRulePtr scale_rule_from_json(const Json& j) {
    std::string kind = j.at("kind").get<std::string>();
    if (kind == "arithmetic") return std::make_shared<ArithmeticRule>(json_big(j.at("a")), json_big(j.at("d")));
    if (kind == "super_geometric")
        return std::make_shared<SuperGeometricRule>(json_rat(j.at("c")), json_rat(j.at("rho")));
    if (kind == "concat")
        return std::make_shared<ConcatRule>(json_big_list(j.at("prefix")), scale_rule_from_json(j.at("tail")));
    if (kind == "explicit") return explicit_rule(json_big_list(j.at("values")));
    auto it = scale_rule_registry().find(kind);
    if (it != scale_rule_registry().end()) return it->second(j);
    throw std::invalid_argument("unknown scale rule kind: " + kind);
}

}  // namespace drh
