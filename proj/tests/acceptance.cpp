// Acceptance suite: one check per release criterion, exact tolerances pinned
// in code. Prints one PASS/FAIL line per criterion and exits nonzero when
// anything fails.

#include <chrono>
#include <functional>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>

#include "drh/cli.hpp"
#include "drh/constructions.hpp"
#include "drh/cover_oracle.hpp"
#include "drh/dim_eval.hpp"
#include "drh/suites.hpp"

using namespace drh;

namespace {

int failures = 0;

void criterion(int number, const std::string& label, const std::function<bool(std::string&)>& body,
               double time_budget_s = 0) {
    std::string detail;
    auto t0 = std::chrono::steady_clock::now();
    bool ok = false;
    try {
        ok = body(detail);
    } catch (const std::exception& e) {
        detail = std::string("exception: ") + e.what();
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (time_budget_s > 0 && secs >= time_budget_s) {
        ok = false;
        detail += " [over time budget]";
    }
    std::cout << (ok ? "PASS" : "FAIL") << "  criterion-" << std::setw(2) << std::setfill('0') << number
              << "  " << label << "  (" << std::fixed << std::setprecision(2) << secs << "s)"
              << (detail.empty() ? "" : "  -- " + detail) << "\n";
    if (!ok) ++failures;
}

bool pow2_below(const Rational& e, const Rational& threshold_log_num, const Rational& threshold) {
    (void)threshold_log_num;
    // 2^e < threshold, exact: with threshold = a/b, e = p/q:
    // 2^(p) * b^q < a^q * 1  after raising both sides to the q-th power
    BigInt p = big_num(e), q = big_den(e);
    Rational lhs = p >= 0 ? Rational(pow2_int(p)) : Rational(1, pow2_int(-p));
    return pow_rat(lhs, q) < pow_rat(threshold, q);
}

}  // namespace

int main() {
    // 1. The cover DP agrees with exhaustive enumeration.
    criterion(
        1, "oracle equivalence (dp == exhaustive, 100 trees 1d depth<=6 + 20 trees 2d depth<=4)",
        [](std::string& detail) {
            auto results = suite_oracle_equivalence(100, 20, 20260809);
            long bad = 0;
            for (const auto& r : results)
                if (!r.pass) ++bad;
            std::ostringstream os;
            os << results.size() << " trees, " << bad << " mismatches";
            detail = os.str();
            return bad == 0;
        },
        60.0);

    // 2. Survivor counts equal 2^count(S, l) across rule classes to level 64.
    criterion(2, "formula vs counting (survivors == 2^count, all rule classes, l <= 64)",
              [](std::string& detail) {
                  auto results = suite_formula_counting();
                  long bad = 0;
                  for (const auto& r : results)
                      if (!r.pass) ++bad;
                  std::ostringstream os;
                  os << results.size() << " rule classes";
                  detail = os.str();
                  return bad == 0;
              });

    // 3. hausdorff <= dim_D <= packing on 200 certified random pairs.
    criterion(3, "sandwich invariant (200 randomized exact pairs + evidence consistency)",
              [](std::string& detail) {
                  auto results = suite_sandwich(200, 7);
                  long bad = 0;
                  for (const auto& r : results)
                      if (!r.pass) ++bad;
                  std::ostringstream os;
                  os << results.size() << " checks";
                  detail = os.str();
                  return bad == 0;
              });

    // 4. Target-density sequences hit every requested value of the Darboux
    //    interval of a block rule with hausdorff 1/3 and packing 2/3.
    criterion(
        4, "darboux reproduction (alpha in {1/3, 2/5, 1/2, 3/5, 2/3}, |M - alpha| <= 0.02 on k in [10,50])",
        [](std::string& detail) {
            DigitSet st = DigitSet::sawtooth(Rational(1, 3), Rational(2, 3));
            auto [h, p] = density_limits(st);
            if (!(h.exact && h.lower == Rational(1, 3) && p.upper == Rational(2, 3))) {
                detail = "block rule limits wrong";
                return false;
            }
            const Rational alphas[] = {Rational(1, 3), Rational(2, 5), Rational(1, 2), Rational(3, 5),
                                       Rational(2, 3)};
            for (const auto& alpha : alphas) {
                ScaleSequence d = target_density_scales(st, alpha);
                for (long k = 10; k <= 50; ++k) {
                    Rational gap = st.density(d.level_at(k)) - alpha;
                    if (gap < 0) gap = -gap;
                    if (gap > Rational(2, 100)) {
                        detail = "alpha " + rat_string(alpha) + " drifts at k " + std::to_string(k);
                        return false;
                    }
                }
                LimitBounds b = restricted_dim(st, d);
                if (!(b.exact && b.lower == alpha)) {
                    detail = "constructed sequence not recognized";
                    return false;
                }
            }
            bool rejected = false;
            try {
                target_density_scales(st, Rational(9, 10));
            } catch (const std::invalid_argument&) {
                rejected = true;
            }
            if (!rejected) {
                detail = "out-of-range alpha accepted";
                return false;
            }
            detail = "5 targets x 41 indices";
            return true;
        },
        10.0);

    // 5. The {0,1} dichotomy family.
    criterion(5, "dichotomy family (block-end density 1 - 1/i^2; dim 0 on the full sequence; witnesses)",
              [](std::string& detail) {
                  for (long i = 2; i <= 4; ++i) {
                      DigitSet s = DigitSet::zero_one_member(i);
                      BigInt k = BigInt(i) * factorial(3 * i);
                      Rational gap = s.density(k) - (1 - Rational(1, i * i));
                      if (gap < 0) gap = -gap;
                      if (gap > Rational(1, 1000)) {
                          detail = "block-end density off at i " + std::to_string(i);
                          return false;
                      }
                      LimitBounds w = restricted_dim(s, ScaleSequence::block_ends(s));
                      if (!(w.exact && w.lower >= 1 - Rational(1, i) - Rational(1, 100))) {
                          detail = "witness lower bound off at i " + std::to_string(i);
                          return false;
                      }
                  }
                  LimitBounds fam = restricted_dim_family(SetFamily::zero_one(), ScaleSequence::all_levels());
                  if (!(fam.exact && fam.lower == 0)) {
                      detail = "family value along the full sequence not exactly 0";
                      return false;
                  }
                  detail = "i in {2,3,4}";
                  return true;
              });

    // 6. The odd-prime factorial family: the supremum is not attained.
    criterion(
        6, "prime factorial family (limsup (i-1)/i; every canonical sequence certified < 1; witnesses)",
        [](std::string& detail) {
            for (long i = 1; i <= 4; ++i) {
                DigitSet s = DigitSet::prime_factorial_member(i);
                auto [h, p] = density_limits(s);
                LimitBounds u = universal_restricted_dim(s);
                if (!(p.exact && p.upper == Rational(i - 1, i) && u.lower == Rational(i - 1, i))) {
                    detail = "limsup mismatch at i " + std::to_string(i);
                    return false;
                }
                LimitBounds w = restricted_dim(s, ScaleSequence::block_ends(s));
                if (!(w.exact && w.lower >= 1 - Rational(1, i))) {
                    detail = "witness below 1 - 1/i at i " + std::to_string(i);
                    return false;
                }
            }
            std::vector<ScaleSequence> canonical = {
                ScaleSequence::all_levels(),
                ScaleSequence::arithmetic(0, 2),
                ScaleSequence::arithmetic(5, 3),
                ScaleSequence::super_geometric(1, 2),
                ScaleSequence::super_geometric(1, 3),
                ScaleSequence::super_geometric(2, Rational(3, 2)),
                ScaleSequence(std::make_shared<ConcatRule>(std::vector<BigInt>{1, 4, 9},
                                                           std::make_shared<ArithmeticRule>(9, 5))),
                ScaleSequence::block_ends(DigitSet::prime_factorial_member(1)),
                ScaleSequence::block_ends(DigitSet::prime_factorial_member(2)),
                ScaleSequence::block_ends(DigitSet::prime_factorial_member(3)),
            };
            for (std::size_t c = 0; c < canonical.size(); ++c) {
                LimitBounds fam = restricted_dim_family(SetFamily::prime_factorial(), canonical[c]);
                if (!(fam.exact && fam.upper < 1)) {
                    detail = "sequence " + std::to_string(c) + " not certified below 1";
                    return false;
                }
            }
            detail = "10 canonical sequences, all certified < 1";
            return true;
        });

    // 7. The Holder witness pair.
    criterion(
        7, "holder witness (M_S <= 1/2 to 10^4; dim along levels = 1/2; transport ratio; M_T < r/2)",
        [](std::string& detail) {
            auto levels = std::make_shared<SuperGeometricRule>(1, 4);
            HolderPair hp14 = holder_witness_pair(levels, 1, 2);
            for (long i = 1; i <= 10000; ++i)
                if (hp14.s.density(i) > Rational(1, 2)) {
                    detail = "density exceeds 1/2 at " + std::to_string(i);
                    return false;
                }
            LimitBounds b = restricted_dim(hp14.s, hp14.levels);
            if (!(b.exact && b.lower == Rational(1, 2))) {
                detail = "dim along generating levels not exactly 1/2";
                return false;
            }

            // ratio bound over 10^4 sampled pairs at depth 40, exact powers
            auto ratio_ok = [](const HolderPair& hp, long p, long q) {
                std::vector<BigInt> positions;
                for (long j = 1; j <= 40; ++j)
                    if (hp.t.contains(j)) positions.push_back(j);
                Rng rng(404);
                const Rational bound(pow2_int(BigInt(p) * (q - p)));
                for (int c = 0; c < 10000; ++c) {
                    std::vector<BigInt> px, pz;
                    for (const auto& pos : positions) {
                        if (rng.chance(1, 2)) px.push_back(pos);
                        if (rng.chance(1, 2)) pz.push_back(pos);
                    }
                    Rational dx = point_from_positions(px) - point_from_positions(pz);
                    if (dx == 0) continue;
                    if (dx < 0) dx = -dx;
                    Rational df = transport_point(p, q, px) - transport_point(p, q, pz);
                    if (df < 0) df = -df;
                    if (!(pow_rat(df, q) <= bound * pow_rat(dx, p))) return false;
                }
                return true;
            };
            if (!ratio_ok(hp14, 1, 2)) {
                detail = "transport ratio bound violated (p,q)=(1,2)";
                return false;
            }

            // geometric configuration: ratio 2 = 1 + 2e with e = 1/2, and
            // r = 2/3 inside (1/(1+2e), (1+e)/(1+2e)) = (1/2, 3/4)
            auto geo = std::make_shared<SuperGeometricRule>(2, 2);  // n_k = 2^(k+1)
            HolderPair hp23 = holder_witness_pair(geo, 2, 3);
            if (!ratio_ok(hp23, 2, 3)) {
                detail = "transport ratio bound violated (p,q)=(2,3)";
                return false;
            }
            ScaleSequence d(geo);
            for (long k = 3; k <= 24; ++k) {
                Rational v = hp23.t.density(d.level_at(k + 1));
                if (!(v < Rational(1, 3))) {  // r/2 with r = 2/3
                    detail = "M_T(n_{k+1}) >= r/2 at k " + std::to_string(k);
                    return false;
                }
            }
            detail = "10^4 pairs at depth 40; prefix k in [3,24]";
            return true;
        });

    // 8. The burst construction.
    criterion(8, "burst construction (ledger prefix; recurrences; certificates < 0.1 from stage 4)",
              [](std::string& detail) {
                  BurstLedger led = build_burst_ledger(AdmissibleFunction(Rational(2)), 1, 6);
                  if (!(led.n_seq[0] == 0 && led.m_seq[0] == 1 && led.n_seq[1] == 2 && led.m_seq[1] == 9 &&
                        led.n_seq[2] == 27)) {
                      detail = "ledger prefix mismatch";
                      return false;
                  }
                  for (long k = 1; k <= 6; ++k) {
                      if (led.ell_seq[k] !=
                          led.ell_seq[k - 1] - 1 + pow2_int(led.m_seq[k - 1] - led.n_seq[k - 1])) {
                          detail = "count recurrence broke at stage " + std::to_string(k);
                          return false;
                      }
                  }
                  for (long k = 4; k <= 6; ++k)
                      if (!pow2_below(led.content_certificate_log2(k, Rational(1, 5)), 0, Rational(1, 10))) {
                          detail = "certificate not below 0.1 at stage " + std::to_string(k);
                          return false;
                      }
                  TreeSet t = realize_burst_tree(led);
                  for (std::size_t k = 1; k <= 2; ++k) {
                      BigInt inside = 0;
                      long mk = led.m_seq[k - 1].convert_to<long>();
                      t.walk_from(led.distinguished[k - 1], mk, [&](const TreePath& p) {
                          if (p.level == mk) ++inside;
                      });
                      if (inside != led.window_size(k)) {
                          detail = "distinguished window count off at stage " + std::to_string(k);
                          return false;
                      }
                  }
                  if (t.survivors_at_level(27).as_integer() != led.ell_seq[2]) {
                      detail = "tree survivors disagree with the ledger";
                      return false;
                  }
                  detail = "6 stages";
                  return true;
              });

    // 9. Mass distribution principle lower bounds the cover content.
    criterion(
        9, "mass principle (content >= mass(root)/(2C) on 50 random instances)",
        [](std::string& detail) {
            auto results = suite_mass_principle(50, 909);
            long bad = 0;
            for (const auto& r : results)
                if (!r.pass) ++bad;
            std::ostringstream os;
            os << results.size() << " instances";
            detail = os.str();
            return bad == 0;
        },
        30.0);

    // 10. Regular cover envelopes.
    criterion(10, "regular covers (20 cases: exponent inside (bound, t); containment to 18; k^m counts)",
              [](std::string& detail) {
                  struct Case {
                      DigitSet set;
                      Rational t;
                  };
                  std::vector<Case> cases;
                  std::vector<DigitSet> sets = {
                      DigitSet::none(),
                      DigitSet::finite({2, 5, 9}),
                      DigitSet::evens(),
                      DigitSet::odds(),
                      DigitSet::multiples(3),
                      DigitSet::multiples(4),
                      DigitSet::eventually_periodic(1, 5, {BigInt(0), BigInt(2)}),
                      DigitSet::eventually_periodic(1, 3, {BigInt(1)}),
                      DigitSet::eventually_periodic(6, 4, {BigInt(1), BigInt(2)}, {BigInt(1)}),
                      DigitSet::eventually_periodic(1, 6, {BigInt(0)}),
                  };
                  const Rational bumps[] = {Rational(1, 8), Rational(1, 4)};
                  for (const auto& s : sets)
                      for (const auto& bump : bumps) {
                          LimitBounds w = window_density_estimate(s);
                          if (!w.exact) continue;
                          Rational t = w.upper + bump;
                          if (t > 1) t = 1;
                          cases.push_back({s, t});
                      }
                  if (cases.size() < 20) {
                      detail = "only " + std::to_string(cases.size()) + " cases assembled";
                      return false;
                  }
                  for (std::size_t c = 0; c < cases.size(); ++c) {
                      const auto& cs = cases[c];
                      Rational bound = window_density_estimate(cs.set).upper;
                      TreeSet K = TreeSet::from_digitset(cs.set);
                      RegularCover rc = make_regular_cover(K, cs.t, bound);
                      if (!rc.s_inside(bound, cs.t)) {
                          detail = "exponent outside the window in case " + std::to_string(c);
                          return false;
                      }
                      for (long m = 1; m * rc.stride <= 18; ++m) {
                          BigInt expect = 1;
                          for (long i = 0; i < m; ++i) expect *= rc.child_count;
                          if (rc.cover.survivors_at_level(m * rc.stride).as_integer() != expect) {
                              detail = "survivor count off in case " + std::to_string(c);
                              return false;
                          }
                      }
                      bool contained = true;
                      K.walk(18, [&](const TreePath& p) {
                          if (p.level == 18 && !rc.cover.survives(p)) contained = false;
                      });
                      if (!contained) {
                          detail = "containment failed in case " + std::to_string(c);
                          return false;
                      }
                  }
                  detail = std::to_string(cases.size()) + " cases";
                  return true;
              });

    std::cout << (failures == 0 ? "ACCEPTANCE PASS" : "ACCEPTANCE FAIL") << " (" << (10 - failures)
              << "/10 criteria)\n";
    return failures == 0 ? 0 : 1;
}
