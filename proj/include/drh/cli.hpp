#pragma once

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "drh/constructions.hpp"
#include "drh/cover_oracle.hpp"
#include "drh/dim_eval.hpp"
#include "drh/suites.hpp"

namespace drh::cli {

// exit codes: 0 ok, 1 failed checks / unmet --exact-only, 2 parse or
// validation errors, 3 infeasible queries
constexpr int kOk = 0, kCheckFailed = 1, kUsage = 2, kInfeasible = 3;

namespace detail {

inline std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::istringstream is(s);
    std::string tok;
    while (std::getline(is, tok, sep)) out.push_back(tok);
    return out;
}

inline DigitSet parse_set(const std::string& spec) {
    if (spec.empty()) throw std::invalid_argument("empty set spec");
    if (spec.front() == '{') return DigitSet::from_json(Json::parse(spec));
    auto parts = split(spec, ':');
    const std::string& k = parts[0];
    if (k == "evens") return DigitSet::evens();
    if (k == "odds") return DigitSet::odds();
    if (k == "all") return DigitSet::all();
    if (k == "none") return DigitSet::none();
    if (k == "multiples") return DigitSet::multiples(BigInt(parts.at(1)));
    if (k == "sawtooth") return DigitSet::sawtooth(parse_rational(parts.at(1)), parse_rational(parts.at(2)));
    if (k == "zero_one") return DigitSet::zero_one_member(std::stol(parts.at(1)));
    if (k == "prime_factorial") return DigitSet::prime_factorial_member(std::stol(parts.at(1)));
    if (k == "guard") return DigitSet::prime_factorial_guard(std::stol(parts.at(1)));
    if (k == "witness_geo")
        return DigitSet::half_density_witness(
            std::make_shared<SuperGeometricRule>(parse_rational(parts.at(1)), parse_rational(parts.at(2))),
            "all");
    throw std::invalid_argument("unknown set spec: " + spec);
}

inline ScaleSequence parse_scales(const std::string& spec) {
    if (spec.empty()) throw std::invalid_argument("empty scale spec");
    if (spec.front() == '{') return ScaleSequence::from_json(Json::parse(spec));
    auto parts = split(spec, ':');
    const std::string& k = parts[0];
    if (k == "all") return ScaleSequence::all_levels();
    if (k == "arithmetic")
        return ScaleSequence::arithmetic(BigInt(parts.at(1)), BigInt(parts.at(2)));
    if (k == "geometric")
        return ScaleSequence::super_geometric(parse_rational(parts.at(1)), parse_rational(parts.at(2)));
    if (k == "ends") return ScaleSequence::block_ends(parse_set(spec.substr(5)));
    if (k == "starts") return ScaleSequence::block_starts(parse_set(spec.substr(7)));
    if (k == "levels") {
        std::vector<BigInt> vals;
        for (const auto& v : split(parts.at(1), ',')) vals.emplace_back(v);
        BigInt beyond = vals.empty() ? BigInt(1) : BigInt(vals.back() * 2 + 64);
        return ScaleSequence::sparse_levels(vals, beyond);
    }
    throw std::invalid_argument("unknown scale spec: " + spec);
}

inline SetFamily parse_family(const std::string& spec) {
    if (spec == "zero_one") return SetFamily::zero_one();
    if (spec == "prime_factorial") return SetFamily::prime_factorial();
    if (!spec.empty() && spec.front() == '{') return SetFamily::from_json(Json::parse(spec));
    throw std::invalid_argument("unknown family spec: " + spec);
}

inline TreeSet parse_tree(const std::string& spec) {
    if (spec.empty()) throw std::invalid_argument("empty tree spec");
    if (spec.front() == '{') return TreeSet::from_json(Json::parse(spec));
    if (spec == "point") return TreeSet::point();
    if (spec.rfind("set:", 0) == 0) return TreeSet::from_digitset(parse_set(spec.substr(4)));
    if (spec.rfind("family:", 0) == 0) return TreeSet::assemble_family(parse_family(spec.substr(7)));
    throw std::invalid_argument("unknown tree spec: " + spec);
}

inline void emit(std::ostream& out, const Json& j) { out << j.dump(2) << "\n"; }

}  // namespace detail

inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"exact diameter-restricted dimension toolkit"};
    app.require_subcommand(1);

    std::string set_spec, family_spec, scales_spec, tree_spec, format = "json";
    std::string union_json, suite_name = "all", emit_path, depths_csv = "4,8,12,16,20", selector = "all";
    std::string alpha_str = "1/2", s_str = "1", t_str = "1/2", bound_str = "0", delta_str = "1",
                eps_str = "1/4", exponent_str = "2";
    long depth = 24, truncate = 8, count = 50, max_k = 64, stages = 5, max_window = 64, max_offset = 4096,
         nn = 1, member = 2, pp = 1, qq = 2;
    std::uint64_t seed = 7;
    bool exact_only = false, guard = false, mass = false;

    auto add_common = [&](CLI::App* c) {
        c->add_option("--format", format)->check(CLI::IsMember({"json", "csv"}));
        c->add_option("--seed", seed);
    };

    CLI::App* dim = app.add_subcommand("dim", "dimension values of digit-restriction sets");
    dim->add_option("--set", set_spec);
    dim->add_option("--family", family_spec);
    dim->add_option("--scales", scales_spec);
    dim->add_option("--depth", depth);
    dim->add_option("--truncate", truncate);
    dim->add_flag("--exact-only", exact_only);
    add_common(dim);

    CLI::App* content = app.add_subcommand("content", "minimal restricted cover content");
    content->add_option("--tree", tree_spec);
    content->add_option("--set", set_spec);
    content->add_option("--s", s_str);
    content->add_option("--scales", scales_spec)->required();
    content->add_option("--depth", depth);
    content->add_flag("--mass-check", mass);
    add_common(content);

    CLI::App* construct = app.add_subcommand("construct", "materialize the library constructions");
    CLI::App* c_canon = construct->add_subcommand("canonical-scales", "bucket trace of a diameter union");
    c_canon->add_option("--union", union_json)->required();
    c_canon->add_option("--count", count);
    CLI::App* c_darboux = construct->add_subcommand("darboux", "scales hitting a target dimension");
    c_darboux->add_option("--set", set_spec)->required();
    c_darboux->add_option("--alpha", alpha_str)->required();
    c_darboux->add_option("--count", count);
    c_darboux->add_option("--emit", emit_path);
    CLI::App* c_zero = construct->add_subcommand("zero-one", "{0,1}-dichotomy family member");
    c_zero->add_option("--i", member);
    CLI::App* c_prime = construct->add_subcommand("prime-factorial", "odd-prime factorial family member");
    c_prime->add_option("--i", member);
    c_prime->add_flag("--guard", guard);
    CLI::App* c_holder = construct->add_subcommand("holder", "half-density witness pair");
    c_holder->add_option("--scales", scales_spec)->required();
    c_holder->add_option("--p", pp);
    c_holder->add_option("--q", qq);
    c_holder->add_option("--selector", selector);
    CLI::App* c_burst = construct->add_subcommand("burst", "vanishing-rdim burst construction");
    c_burst->add_option("--exponent", exponent_str);
    c_burst->add_option("--n", nn);
    c_burst->add_option("--stages", stages);
    c_burst->add_option("--s", s_str);
    CLI::App* c_reg = construct->add_subcommand("regular-cover", "s-regular compact superset");
    c_reg->add_option("--set", set_spec)->required();
    c_reg->add_option("--t", t_str)->required();
    c_reg->add_option("--bound", bound_str)->required();
    CLI::App* c_ball = construct->add_subcommand("ball-pack", "disjoint ball packing count");
    c_ball->add_option("--delta", delta_str);
    c_ball->add_option("--eps", eps_str);
    c_ball->add_option("--n", nn);
    construct->require_subcommand(1);
    add_common(construct);

    CLI::App* verify = app.add_subcommand("verify", "run named invariant suites");
    verify->add_option("suite", suite_name);
    verify->add_option("--cases", count)->default_val(0);
    verify->add_option("--seed", seed);

    CLI::App* report = app.add_subcommand("report", "tables and traces");
    CLI::App* r_density = report->add_subcommand("density", "density trace of a digit set");
    r_density->add_option("--set", set_spec)->required();
    r_density->add_option("--scales", scales_spec);
    r_density->add_option("--max-k", max_k);
    CLI::App* r_decay = report->add_subcommand("decay", "content decay profile");
    r_decay->add_option("--set", set_spec);
    r_decay->add_option("--tree", tree_spec);
    r_decay->add_option("--s", s_str);
    r_decay->add_option("--scales", scales_spec)->required();
    r_decay->add_option("--depths", depths_csv);
    CLI::App* r_window = report->add_subcommand("window", "window density estimate");
    r_window->add_option("--set", set_spec)->required();
    r_window->add_option("--max-window", max_window);
    r_window->add_option("--max-offset", max_offset);
    CLI::App* r_mass = report->add_subcommand("mass", "mass distribution scan");
    r_mass->add_option("--set", set_spec)->required();
    r_mass->add_option("--s", s_str);
    r_mass->add_option("--scales", scales_spec)->required();
    r_mass->add_option("--depth", depth);
    CLI::App* r_levels = report->add_subcommand("tree-levels", "survivor counts per level");
    r_levels->add_option("--tree", tree_spec)->required();
    r_levels->add_option("--max-level", max_k);
    CLI::App* r_dump = report->add_subcommand("dump", "surviving paths");
    r_dump->add_option("--tree", tree_spec)->required();
    r_dump->add_option("--max-level", max_k);
    report->require_subcommand(1);
    add_common(report);

    std::vector<const char*> argv;
    argv.push_back("drh");
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {  // --help
            out << app.help();
            return kOk;
        }
        err << "error: " << e.what() << "\n";
        return kUsage;
    }

    try {
        using detail::emit;
        if (app.got_subcommand(dim)) {
            if (!family_spec.empty()) {
                if (scales_spec.empty()) throw std::invalid_argument("dim --family needs --scales");
                LimitBounds b = restricted_dim_family(detail::parse_family(family_spec),
                                                      detail::parse_scales(scales_spec), truncate, depth);
                if (exact_only && !b.exact) {
                    emit(err, b.to_json());
                    return kCheckFailed;
                }
                emit(out, b.to_json());
                return kOk;
            }
            DigitSet s = detail::parse_set(set_spec);
            if (!scales_spec.empty()) {
                LimitBounds b = restricted_dim(s, detail::parse_scales(scales_spec), depth);
                if (exact_only && !b.exact) {
                    emit(err, b.to_json());
                    return kCheckFailed;
                }
                emit(out, b.to_json());
                return kOk;
            }
            auto [h, p] = density_limits(s);
            LimitBounds u = universal_restricted_dim(s);
            if (exact_only && !(h.exact && p.exact)) return kCheckFailed;
            emit(out, Json{{"hausdorff", h.to_json()}, {"packing", p.to_json()}, {"universal", u.to_json()}});
            return kOk;
        }

        if (app.got_subcommand(content)) {
            TreeSet t = tree_spec.empty() ? TreeSet::from_digitset(detail::parse_set(set_spec))
                                          : detail::parse_tree(tree_spec);
            ContentQuery q(t, parse_rational(s_str), detail::parse_scales(scales_spec), depth);
            auto r = min_cover_content_dp(q);
            if (!r.feasible()) {
                emit(out, Json{{"infeasible", true},
                               {"reason", "no allowed level covers the witness branch"},
                               {"witness_level", r.infeasible_witness->level},
                               {"witness_path", r.infeasible_witness->bits(t.ambient())}});
                return kInfeasible;
            }
            Json j{{"content", (*r).to_string()}, {"approx", (*r).approx()}};
            if (mass) {
                MassReport rep = mass_check(WeightedTree::uniform(t), q.s, q.scales, depth);
                j["mass"] = rep.to_json();
            }
            emit(out, j);
            return kOk;
        }

        if (app.got_subcommand(construct)) {
            if (construct->got_subcommand(c_canon)) {
                ScaleSequence c = canonicalize(SorgenfreyUnion::from_json(Json::parse(union_json)));
                Json levels = Json::array();
                for (long k = 1; k <= count; ++k) levels.push_back(c.level_at(k).str());
                emit(out, Json{{"rule", c.to_json()}, {"levels", levels}});
                return kOk;
            }
            if (construct->got_subcommand(c_darboux)) {
                DigitSet s = detail::parse_set(set_spec);
                ScaleSequence d = target_density_scales(s, parse_rational(alpha_str));
                Json levels = Json::array(), dens = Json::array();
                for (long k = 1; k <= count; ++k) {
                    BigInt nk = d.level_at(k);
                    levels.push_back(nk.str());
                    dens.push_back(rat_string(s.density(nk)));
                }
                Json j{{"scales", d.to_json()}, {"levels", levels}, {"densities", dens}};
                if (!emit_path.empty()) {
                    std::ofstream f(emit_path);
                    f << j.dump(2) << "\n";
                }
                emit(out, j);
                return kOk;
            }
            if (construct->got_subcommand(c_zero) || construct->got_subcommand(c_prime)) {
                DigitSet s = construct->got_subcommand(c_zero)
                                 ? DigitSet::zero_one_member(member)
                                 : (guard ? DigitSet::prime_factorial_guard(member)
                                          : DigitSet::prime_factorial_member(member));
                Json blocks = Json::array();
                for (std::size_t j = 1; j <= 3; ++j) {
                    auto b = s.block(j);
                    if (!b) break;
                    blocks.push_back({{"lo", b->lo.str()}, {"hi", b->hi.str()}});
                }
                emit(out, Json{{"set", s.to_json()}, {"first_blocks", blocks}});
                return kOk;
            }
            if (construct->got_subcommand(c_holder)) {
                ScaleSequence lv = detail::parse_scales(scales_spec);
                HolderPair hp = holder_witness_pair(lv.rule_ptr(), pp, qq, selector);
                emit(out, Json{{"s", hp.s.to_json()}, {"t", hp.t.to_json()}, {"levels", lv.to_json()}});
                return kOk;
            }
            if (construct->got_subcommand(c_burst)) {
                BurstLedger led = build_burst_ledger(AdmissibleFunction(parse_rational(exponent_str)), nn,
                                                     stages);
                Json j = led.to_json();
                Rational s = parse_rational(s_str);
                Json certs = Json::array();
                for (long k = 1; k <= stages; ++k)
                    certs.push_back(rat_string(led.content_certificate_log2(k, s)));
                j["content_certificate_log2"] = certs;
                j["certificate_s"] = rat_string(s);
                emit(out, j);
                return kOk;
            }
            if (construct->got_subcommand(c_reg)) {
                TreeSet K = TreeSet::from_digitset(detail::parse_set(set_spec));
                RegularCover rc = make_regular_cover(K, parse_rational(t_str), parse_rational(bound_str));
                emit(out, Json{{"k", rc.child_count},
                               {"l", rc.stride},
                               {"s_approx", rc.s_approx()},
                               {"survivors_at_stride", rc.cover.survivors_at_level(rc.stride).as_integer().str()}});
                return kOk;
            }
            if (construct->got_subcommand(c_ball)) {
                emit(out, Json{{"count",
                                disjoint_ball_count(parse_rational(delta_str), parse_rational(eps_str), nn)
                                    .str()}});
                return kOk;
            }
        }

        if (app.got_subcommand(verify)) {
            auto results = run_suite(suite_name, count, seed);
            long failures = 0;
            for (const auto& r : results) {
                out << (r.pass ? "ok   " : "FAIL ") << r.name << "  " << r.detail << "\n";
                if (!r.pass) ++failures;
            }
            out << (failures == 0 ? "PASS " : "FAIL ") << results.size() << " checks, " << failures
                << " failures\n";
            return failures == 0 ? kOk : kCheckFailed;
        }

        if (app.got_subcommand(report)) {
            if (report->got_subcommand(r_density)) {
                DigitSet s = detail::parse_set(set_spec);
                if (scales_spec.empty()) {
                    out << "k,count,density\n";
                    for (long k = 1; k <= max_k; ++k)
                        out << k << "," << s.count(k) << "," << rat_string(s.density(k)) << "\n";
                } else {
                    ScaleSequence d = detail::parse_scales(scales_spec);
                    out << "k,n_k,count,density\n";
                    for (long k = 1; k <= max_k; ++k) {
                        BigInt nk = d.level_at(k);
                        out << k << "," << nk << "," << s.count(nk) << "," << rat_string(s.density(nk))
                            << "\n";
                    }
                }
                return kOk;
            }
            if (report->got_subcommand(r_decay)) {
                TreeSet t = tree_spec.empty() ? TreeSet::from_digitset(detail::parse_set(set_spec))
                                              : detail::parse_tree(tree_spec);
                std::vector<long> ds;
                for (const auto& v : detail::split(depths_csv, ',')) ds.push_back(std::stol(v));
                auto prof = content_decay_profile(t, parse_rational(s_str), detail::parse_scales(scales_spec),
                                                  ds);
                out << "depth,content,approx\n";
                for (std::size_t i = 0; i < ds.size(); ++i) {
                    if (!prof[i].feasible()) {
                        out << ds[i] << ",infeasible,\n";
                        return kInfeasible;
                    }
                    out << ds[i] << "," << (*prof[i]).to_string() << "," << (*prof[i]).approx() << "\n";
                }
                return kOk;
            }
            if (report->got_subcommand(r_window)) {
                emit(out, window_density_estimate(detail::parse_set(set_spec), max_window, max_offset)
                              .to_json());
                return kOk;
            }
            if (report->got_subcommand(r_mass)) {
                TreeSet t = TreeSet::from_digitset(detail::parse_set(set_spec));
                emit(out, mass_check(WeightedTree::uniform(t), parse_rational(s_str),
                                     detail::parse_scales(scales_spec), depth)
                              .to_json());
                return kOk;
            }
            if (report->got_subcommand(r_levels)) {
                TreeSet t = detail::parse_tree(tree_spec);
                out << "level,survivors\n";
                for (long l = 0; l <= max_k; ++l)
                    out << l << "," << t.survivors_at_level(l).as_integer() << "\n";
                return kOk;
            }
            if (report->got_subcommand(r_dump)) {
                out << detail::parse_tree(tree_spec).dump(max_k);
                return kOk;
            }
        }
        err << "error: no verb dispatched\n";
        return kUsage;
    } catch (const Json::exception& e) {
        err << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kUsage;
    }
}

}  // namespace drh::cli
