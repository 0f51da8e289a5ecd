#include "oracles.hpp"

#include "ranklab/certificates.hpp"
#include "ranklab/config.hpp"

#include <doctest.h>

#include <random>

using namespace ranklab;

namespace {

const RankOneSpec& chacon() {
  static const RankOneSpec s = make_inf_chacon(3, 1, 6, 2);
  return s;
}

RankOneSpec separated() {
  RankOneSpec s;
  s.stages = {StageSpec{3, {9, 29, 41}}};
  s.extension = ExtensionRule::RepeatLast;
  return validate_spec(s);
}

std::vector<std::int64_t> v(std::initializer_list<std::int64_t> x) { return x; }

}  // namespace

TEST_CASE("conservativity fraction at j=2 is 65/81") {
  ProductQuery q;
  q.alpha = {1, 1};
  q.b = {0, 0};
  q.baseStage = 0;
  q.horizon = 2;
  const auto rep = conservativity_fraction(chacon(), q);
  REQUIRE(rep.stages.size() == 2);
  CHECK(rep.stages[1].fraction == Rational::of(65, 81));

  const auto offs = oracle::chacon_offsets(3, 1, 6, 2, 2);
  const auto [m, t] = oracle::matched_tuples(oracle::descendants(0, offs, 0, 2), {1, 1}, {0, 0}, true);
  CHECK(t == 81);
  CHECK(m == 65);
}

TEST_CASE("single-coordinate and diagonal conservativity") {
  const Tower t = Tower::build(chacon(), 4);
  for (int j = 1; j <= 4; ++j) {
    const auto one = matched_tuple_fraction(t, v({1}), v({0}), 0, j, true);
    CHECK(one.fraction == Rational(1));
  }
  // The diagonal tuple (a, a) is matched by (d, d) for any d != a.
  const auto d = descendant_heights(t, LevelRef{0, 0}, 2);
  const std::set<std::int64_t> ds(d.begin(), d.end());
  for (Height a : d) {
    bool found = false;
    for (Height x : d)
      if (x != a) found = true;
    CHECK(found);
  }
}

TEST_CASE("property: matched_tuple_fraction equals the brute-force oracle") {
  const Tower t = Tower::build(chacon(), 4);
  const auto offs = oracle::chacon_offsets(3, 1, 6, 2, 4);
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 25; ++trial) {
    const std::size_t vdim = 1 + rng() % 3;
    std::vector<std::int64_t> alpha, b;
    for (std::size_t l = 0; l < vdim; ++l) {
      std::int64_t a = 1 + static_cast<std::int64_t>(rng() % 3);
      if (rng() % 2) a = -a;
      alpha.push_back(a);
      b.push_back(static_cast<std::int64_t>(rng() % 3));
    }
    const int i = static_cast<int>(rng() % 2);
    const int j = i + 1 + static_cast<int>(rng() % (vdim == 3 ? 1 : 2));
    const bool nz = rng() % 2;
    const auto got = matched_tuple_fraction(t, alpha, b, i, j, nz);
    const auto [m, tot] = oracle::matched_tuples(oracle::descendants(0, offs, i, j), alpha, b, nz);
    CHECK(got.matched == m);
    CHECK(got.total == tot);
  }
}

TEST_CASE("property: tuple counts do not depend on the worker count") {
  const Tower t = Tower::build(chacon(), 4);
  const auto base = matched_tuple_fraction(t, v({1, 2, -1}), v({0, 1, 2}), 0, 3, true);
  const unsigned saved = execution_config().jobs;
  for (unsigned jobs : {2u, 3u, 8u}) {
    execution_config().jobs = jobs;
    const auto par = matched_tuple_fraction(t, v({1, 2, -1}), v({0, 1, 2}), 0, 3, true);
    CHECK(par.matched == base.matched);
    CHECK(par.total == base.total);
  }
  execution_config().jobs = saved;
}

TEST_CASE("budget is enforced") {
  auto& cfg = execution_config();
  const auto saved = cfg.budget;
  cfg.budget = 100;
  const Tower t = Tower::build(chacon(), 4);
  CHECK_THROWS_AS(matched_tuple_fraction(t, v({1, 1}), v({0, 0}), 0, 4, true), Error);
  cfg.budget = saved;
}

TEST_CASE("ergodic matching worked example") {
  MatchingQuery q;
  q.signature = {1, -1};
  q.b = {0, 1};
  q.baseStage = 1;
  q.horizon = 2;
  q.probe = std::vector<Height>{9, 9};
  const auto rep = ergodic_matching(chacon(), q);
  REQUIRE(rep.probeWitness);
  CHECK(rep.probeWitness->d == std::vector<Height>{0, 17});
  CHECK(rep.probeWitness->residuals[0] == Rational(9));
  CHECK(rep.probeWitness->residuals[1] == Rational(9));
  const Tower t = Tower::build(chacon(), 2);
  CHECK(rep.probeWitness->verify(t, v({1, -1}), q.b));
}

TEST_CASE("zero shifts give the identity matching") {
  MatchingQuery q;
  q.signature = {1, -1, 1};
  q.b = {0, 0, 0};
  q.baseStage = 1;
  q.horizon = 3;
  const auto rep = ergodic_matching(chacon(), q);
  CHECK(rep.gamma == 0);
  CHECK(rep.uniqueFraction == Rational(1));
  CHECK(rep.injective);
  for (const auto& w : rep.samples) {
    CHECK(w.a == w.d);
    CHECK(w.residuals[0] == Rational(0));
  }
}

TEST_CASE("property: matching witnesses verify and the assignment is injective") {
  const Tower t = Tower::build(chacon(), 5);
  const std::vector<std::vector<int>> sigs{{1, -1}, {1, 1, -1}, {1, 1}, {-1, 1}};
  for (const auto& sig : sigs)
    for (int base = 1; base <= 2; ++base)
      for (int trial = 0; trial < 6; ++trial) {
        std::vector<std::int64_t> b(sig.size());
        for (std::size_t l = 0; l < b.size(); ++l) b[l] = (trial * 7 + 3 * static_cast<int>(l)) % 3;
        MatchingQuery q;
        q.signature = sig;
        q.b = b;
        q.baseStage = base;
        q.horizon = base + (sig.size() == 3 ? 2 : 3);
        MatchingReport rep;
        try {
          rep = ergodic_matching(chacon(), q);
        } catch (const Error& e) {
          CHECK(e.code() == ErrorCode::NoPartnerStages);
          continue;
        }
        CHECK(rep.injective);
        std::vector<std::int64_t> alpha(sig.begin(), sig.end());
        for (const auto& w : rep.samples) CHECK(w.verify(t, alpha, b));
        if (rep.gamma == 0) CHECK(rep.uniqueFraction == Rational(1));
      }
}

TEST_CASE("construct_matchable_tuple lands in the pattern set") {
  MatchingQuery q;
  q.signature = {1, -1};
  q.b = {0, 2};
  q.baseStage = 1;
  q.horizon = 4;
  const auto a = construct_matchable_tuple(chacon(), q);
  REQUIRE(a);
  q.probe = *a;
  q.enumerate = false;
  const auto rep = ergodic_matching(chacon(), q);
  REQUIRE(rep.probeWitness);
  CHECK(rep.probeWitness->verify(Tower::build(chacon(), 4), v({1, -1}), q.b));
}

TEST_CASE("pattern measure examples") {
  PatternQuery q;
  q.b = {0, 1};
  q.baseStage = 1;
  q.cutoff = 2;
  const auto one = pattern_measure(chacon(), q);
  CHECK(one.muW.lower() == Rational::of(1, 9));
  CHECK(one.muW.exact());
  CHECK(one.bound == Rational::of(1, 16));
  CHECK(one.boundHolds);

  q.b = {0, 0};
  const auto zero = pattern_measure(chacon(), q);
  CHECK(zero.gamma == 0);
  CHECK(zero.bound == Rational(1));
  CHECK(zero.muW.lower() == Rational(1));

  q.b = {0, 2};
  q.cutoff = 3;
  const auto two = pattern_measure(chacon(), q);
  CHECK(two.gamma == 2);
  CHECK(two.muW.lower() == Rational::of(1, 81));
  CHECK(two.muW.lower() >= two.bound * two.hitMass);
}

TEST_CASE("property: pattern measure equals the exhaustive matching scan") {
  const std::vector<std::vector<std::int64_t>> bs{{0, 1}, {0, 2}, {1, 0}, {0, 1, 1}};
  for (const auto& b : bs)
    for (int cutoff = 2; cutoff <= (b.size() == 3 ? 3 : 4); ++cutoff) {
      PatternQuery pq;
      pq.b = b;
      pq.baseStage = 1;
      pq.cutoff = cutoff;
      const auto pm = pattern_measure(chacon(), pq);
      MatchingQuery mq;
      mq.signature.assign(b.size(), 1);
      mq.b = b;
      mq.baseStage = 1;
      mq.horizon = cutoff;
      const auto mr = ergodic_matching(chacon(), mq);
      CHECK(pm.muW.lower() <= mr.uniqueFraction);
      CHECK(mr.uniqueFraction <= pm.muW.upper());
      if (pm.muW.exact()) CHECK(pm.muW.lower() == mr.uniqueFraction);
    }
}

TEST_CASE("mixing on the separated example attains 1/3") {
  MixingQuery q;
  q.levelStage = 0;
  q.levels = {0};
  q.windowStage = 0;
  q.m = {40};
  const auto rep = mixing_decay(separated(), q);
  REQUIRE(rep.rows.size() == 1);
  CHECK(rep.rows[0].ratio.lower() == Rational::of(1, 3));
  CHECK(rep.rows[0].ratio.exact());
  CHECK(rep.rows[0].withinBound);
  CHECK(rep.bound == Rational::of(1, 3));
}

TEST_CASE("m = 0 is reported out of window") {
  MixingQuery q;
  q.levels = {0};
  q.m = {0};
  const auto rep = mixing_decay(separated(), q);
  REQUIRE(rep.rows.size() == 1);
  CHECK_FALSE(rep.rows[0].inWindow);
  CHECK(rep.rows[0].ratio.lower() == Rational(1));
}

TEST_CASE("property: mixing ratios stay under the bound across a window") {
  AsymmParams p;
  p.k = 2;
  p.p = 3;
  p.stages = 6;
  const auto c = make_asymm_construction(p);
  for (int n : {0, 2}) {
    MixingQuery q;
    q.levelStage = 0;
    q.levels = {0};
    q.windowStage = n;
    q.samples = 40;
    const auto rep = mixing_decay(c.spec, q);
    CHECK(rep.hypothesesMet);
    CHECK_FALSE(rep.rows.empty());
    for (const auto& r : rep.rows) {
      CHECK(r.inWindow);
      CHECK(r.ratio.exact());
      CHECK(r.ratio.upper() <= rep.bound);
    }
  }
}

TEST_CASE("npc ratios") {
  NpcQuery q;
  q.baseStage = 0;
  q.horizon = 3;
  const auto rep = npc_certificate(chacon(), q);
  REQUIRE(rep.statementRatios.size() == 3);
  CHECK(rep.statementRatios[0].second == Rational::of(2, 3));
  CHECK(rep.statementRatios[1].second == Rational::of(1, 2));
  CHECK(rep.statementRatios[2].second == Rational::of(60, 121));
  bool seen = false;
  for (const auto& [n, r] : rep.proofRatios)
    if (n == 2) {
      REQUIRE(r);
      CHECK(*r == Rational::of(121, 10));
      seen = true;
    }
  CHECK(seen);
  CHECK(rep.certificate.verdict == Verdict::Holds);
  CHECK(rep.corollary["ratioLimit"]["den"] == "12");
}

TEST_CASE("property: the case replay agrees with brute force") {
  for (int N = 0; N <= 2; ++N) {
    NpcQuery q;
    q.baseStage = N;
    q.horizon = N + 4;
    const auto rep = npc_certificate(chacon(), q);
    CHECK(rep.caseReplay["agree"] == true);
    for (const auto& [j, len] : rep.apLongest) CHECK(len < 14);
  }
}

TEST_CASE("pwm witness examples") {
  const auto tq = make_tq(4, {1});
  PwmQuery q;
  q.alpha = {2};
  q.b = {0, 0};
  q.baseStage = 1;
  const auto rep = pwm_witness(tq, q);
  const auto& w = rep.witness;
  CHECK(w.gamma.gamma == 1);
  CHECK(w.L == v({1, 1}));
  CHECK(w.r == v({0, 1}));
  CHECK(w.match.a[0] - w.match.d[0] == 7);
  CHECK(w.match.a[1] - w.match.d[1] == 14);

  q.alpha = {1};
  const auto deg = pwm_witness(tq, q);
  CHECK(deg.witness.match.a[0] - deg.witness.match.d[0] == deg.witness.match.a[1] - deg.witness.match.d[1]);

  q.alpha = {-3};
  q.b = {0, 2};
  const auto neg = pwm_witness(tq, q);
  const auto& m = neg.witness.match;
  CHECK(m.a[1] - m.d[1] == -3 * (m.a[0] - m.d[0]) + 2);
  CHECK(neg.witness.r[1] == 3 * (neg.witness.L[0] + neg.witness.r[0]) - 2 - neg.witness.L[1]);
}

TEST_CASE("pwm needs a unit gap") {
  PwmQuery q;
  q.alpha = {2};
  q.b = {0, 0};
  try {
    pwm_witness(make_tq(3, {0, 1}), q);
    FAIL("expected HypothesisUnmet");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::HypothesisUnmet);
  }
}

TEST_CASE("non-ergodic check on the all-but-last family") {
  const auto abl = make_tq(3, {0, 1});
  NonErgodicQuery q;
  q.alpha = {1, 1};
  q.b = {0, 1};
  q.baseStage = 1;
  q.horizon = 5;
  q.growthHorizon = 12;
  const auto rep = non_ergodic_check(abl.spec, q);
  CHECK(rep.certificate.verdict == Verdict::Fails);
  for (const auto& f : rep.fractions) CHECK(f.matched == 0);
  for (const auto& [n, ok] : rep.growth) CHECK(ok);
  CHECK(rep.structural["modulus"] == 2);

  const Tower t = Tower::build(abl.spec, 1);
  CHECK(t.height(1) == 6);
  CHECK(t.max_descendant(0, 1) + 2 == 6);

  q.b = {0, 0};
  CHECK(non_ergodic_check(abl.spec, q).certificate.verdict == Verdict::Inconclusive);
}

TEST_CASE("asymmetry statistic examples") {
  AsymmetryQuery q;
  q.level = {1, 0};
  q.n = 1;
  q.evalStage = 3;
  const auto rep = asymmetry_statistic(chacon(), q);
  CHECK(rep.adjacency);
  CHECK(rep.zeroUpgraded);
  CHECK(rep.zeroSide.exact());
  CHECK(rep.zeroSide.upper() == Rational(0));
  CHECK(rep.forwardSide.lower() == Rational::of(1, 3));
  CHECK(rep.forwardSide.upper() == Rational::of(4, 9));

  q.shifted = true;
  const auto sh = asymmetry_statistic(chacon(), q);
  CHECK(sh.zeroSide.lower() <= rep.zeroSide.upper());
  CHECK(rep.zeroSide.lower() <= sh.zeroSide.upper());

  q.level = {0, 0};
  q.n = 0;
  try {
    asymmetry_statistic(chacon(), q);
    FAIL("expected StageTooLow");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::StageTooLow);
  }
}
