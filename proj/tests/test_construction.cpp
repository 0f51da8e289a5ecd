#include "oracles.hpp"

#include "ranklab/construction.hpp"
#include "ranklab/families.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace ranklab;

namespace {

RankOneSpec explicit_spec(std::vector<StageSpec> stages, Height h0 = 1) {
  RankOneSpec s;
  s.stages = std::move(stages);
  s.h0 = h0;
  s.extension = ExtensionRule::RepeatLast;
  return validate_spec(s);
}

const RankOneSpec& chacon() {
  static const RankOneSpec s = make_inf_chacon(3, 1, 6, 2);
  return s;
}

}  // namespace

TEST_CASE("validate_spec accepts a single explicit stage") {
  RankOneSpec s;
  s.stages = {StageSpec{3, {0, 1, 4}}};
  const auto v = validate_spec(s);
  CHECK(Tower::build(v, 1).height(1) == 8);
}

TEST_CASE("validate_spec rejects bad stages") {
  auto code_of = [](StageSpec st) {
    RankOneSpec s;
    s.stages = {st};
    try {
      validate_spec(s);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::Overflow;
  };
  CHECK(code_of(StageSpec{1, {0}}) == ErrorCode::CutTooSmall);
  CHECK(code_of(StageSpec{2, {0, -1}}) == ErrorCode::NegativeSpacer);
  CHECK(code_of(StageSpec{3, {0, 1}}) == ErrorCode::LengthMismatch);
}

TEST_CASE("building past the explicit stages without an extension rule fails") {
  RankOneSpec s;
  s.stages = {StageSpec{2, {0, 0}}};
  s.extension = ExtensionRule::None;
  CHECK_THROWS_AS(Tower::build(validate_spec(s), 3), Error);
}

TEST_CASE("height sets of the default Chacon spec") {
  CHECK(height_set(chacon(), 0) == std::vector<Height>{0, 2, 3});
  CHECK(height_set(chacon(), 1) == std::vector<Height>{0, 9, 17});
  const auto dyadic = explicit_spec({StageSpec{2, {0, 0}}});
  const Tower t = Tower::build(dyadic, 5);
  for (int n = 0; n < 5; ++n) CHECK(t.height_set(n) == std::vector<Height>{0, t.height(n)});
}

TEST_CASE("column stats") {
  const Tower t = Tower::build(chacon(), 3);
  CHECK(t.height(0) == 1);
  CHECK(t.height(1) == 8);
  CHECK(t.height(2) == 50);
  CHECK(t.height(3) == 302);
  const auto c0 = column_stats(chacon(), 0);
  CHECK(c0.levelWidth == Rational(1));
  CHECK(c0.totalMeasure == Rational(1));
  CHECK(column_stats(chacon(), 2).levelWidth == Rational::of(1, 9));
}

TEST_CASE("total measure grows by the spacer mass") {
  for (int n = 0; n < 6; ++n) {
    const Tower t = Tower::build(chacon(), n + 1);
    Height spacers = 0;
    for (Height s : t.stage(n).s) spacers += s;
    const auto a = column_stats(chacon(), n);
    const auto b = column_stats(chacon(), n + 1);
    CHECK(b.totalMeasure - a.totalMeasure == Rational(spacers) * b.levelWidth);
    CHECK(b.totalMeasure == Rational(t.height(n + 1)) * b.levelWidth);
  }
}

TEST_CASE("property: heights and height sets match the recursion oracle") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 40; ++trial) {
    const int r = 2 + static_cast<int>(rng() % 4);
    std::vector<Height> s(r);
    for (auto& x : s) x = static_cast<Height>(rng() % 5);
    const Height h0 = 1 + static_cast<Height>(rng() % 3);
    const auto spec = explicit_spec({StageSpec{r, s}}, h0);
    const auto expect = oracle::heights(h0, {{r, s}}, 6);
    const Tower t = Tower::build(spec, 6);
    for (int n = 0; n <= 6; ++n) CHECK(t.height(n) == expect[n]);
    for (int n = 0; n < 6; ++n) CHECK(t.height_set(n) == oracle::offsets(expect[n], {r, s}));
  }
}

TEST_CASE("descendant heights are a sumset of height sets") {
  const Tower t = Tower::build(chacon(), 5);
  const auto offs = oracle::chacon_offsets(3, 1, 6, 2, 5);
  for (int i = 0; i < 3; ++i)
    for (int j = i; j <= 5; ++j) {
      const auto d = descendant_heights(t, LevelRef{i, 0}, j);
      CHECK(d == oracle::descendants(0, offs, i, j));
      CHECK(d.size() == static_cast<std::size_t>(std::pow(3, j - i)));
    }
  CHECK(descendant_heights(t, LevelRef{1, 5}, 2) == std::vector<Height>{5, 14, 22});
}

TEST_CASE("image_of_level") {
  const Tower t = Tower::build(chacon(), 2);
  const auto img = image_of_level(t, LevelRef{1, 0}, 9, 2);
  std::vector<Height> heights;
  for (const auto& l : img.resolved) heights.push_back(l.height);
  CHECK(heights == std::vector<Height>{9, 18, 26});
  CHECK(img.unresolved.empty());

  const auto id = image_of_level(t, LevelRef{1, 3}, 0, 2);
  heights.clear();
  for (const auto& l : id.resolved) heights.push_back(l.height);
  CHECK(heights == descendant_heights(t, LevelRef{1, 3}, 2));

  const auto out = image_of_level(t, LevelRef{1, 0}, t.height(2), 2);
  CHECK(out.resolved.empty());
  CHECK(out.unresolved.size() == 3);
}

TEST_CASE("intersection measure examples") {
  const Tower t = Tower::build(chacon(), 3);
  const LevelRef I{1, 0};
  const std::vector<std::int64_t> zero{0, 9, 17};
  const auto z = intersection_measure(t, I, zero, 3);
  CHECK(z.measure.confirmed == Rational(0));
  CHECK(z.measure.unresolved == Rational::of(2, 9) * z.levelMeasure);

  const std::vector<std::int64_t> fwd{0, 8, 17};
  const auto f = intersection_measure(t, I, fwd, 3);
  CHECK(f.measure.confirmed == Rational::of(1, 3) * f.levelMeasure);
  CHECK(f.measure.unresolved == Rational::of(1, 9) * f.levelMeasure);

  const std::vector<std::int64_t> single{0};
  for (int j = 1; j <= 3; ++j) {
    const auto s = intersection_measure(t, I, single, j);
    CHECK(s.measure.confirmed == s.levelMeasure);
    CHECK(s.measure.exact());
  }
}

TEST_CASE("property: intersection bounds tighten with the evaluation stage") {
  const Tower t = Tower::build(chacon(), 6);
  const LevelRef I{1, 0};
  const std::vector<std::vector<std::int64_t>> exps{{0, 9, 17}, {0, 8, 17}, {0, 1}, {0, 50, 101}, {0, -8}};
  for (const auto& e : exps) {
    Rational lo(0), hi = Rational(1);
    for (int j = 2; j <= 6; ++j) {
      const auto m = intersection_measure(t, I, e, j).measure;
      CHECK(m.lower() >= lo);
      CHECK(m.upper() <= hi * intersection_measure(t, I, std::vector<std::int64_t>{0}, j).levelMeasure);
      lo = m.lower();
      hi = m.upper() / intersection_measure(t, I, std::vector<std::int64_t>{0}, j).levelMeasure;
    }
  }
}

TEST_CASE("property: intersection is translation invariant") {
  const Tower t = Tower::build(chacon(), 6);
  const LevelRef I{1, 0};
  const std::vector<std::int64_t> a{0, 9, 17}, b{1, 10, 18};
  const auto x = intersection_measure(t, I, a, 6).measure;
  const auto y = intersection_measure(t, I, b, 6).measure;
  CHECK(x.lower() <= y.upper());
  CHECK(y.lower() <= x.upper());
}
