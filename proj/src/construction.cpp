#include "ranklab/construction.hpp"

#include <algorithm>
#include <cstdlib>
#include <string>

namespace ranklab {

namespace {

void check_stage(const StageSpec& st, int n) {
  const std::string where = "stage " + std::to_string(n);
  if (st.r < 2) throw Error(ErrorCode::CutTooSmall, where + ": r = " + std::to_string(st.r));
  if (st.s.size() != static_cast<std::size_t>(st.r))
    throw Error(ErrorCode::LengthMismatch,
                where + ": |s| = " + std::to_string(st.s.size()) + " but r = " + std::to_string(st.r));
  for (Height v : st.s)
    if (v < 0) throw Error(ErrorCode::NegativeSpacer, where + ": spacer count " + std::to_string(v));
}

bool has_family(const Family& f) { return !std::holds_alternative<std::monostate>(f); }

StageSpec stage_at(const RankOneSpec& spec, int n, Height h) {
  if (n < static_cast<int>(spec.stages.size())) return spec.stages[n];
  switch (spec.extension) {
    case ExtensionRule::Family:
      return family_stage(spec.family, n, h);
    case ExtensionRule::RepeatLast:
      if (!spec.stages.empty()) return spec.stages.back();
      break;
    case ExtensionRule::None:
      break;
  }
  throw Error(ErrorCode::StageUnavailable, "stage " + std::to_string(n) + " is beyond the explicit prefix");
}

}  // namespace

RankOneSpec validate_spec(const RankOneSpec& raw) {
  RankOneSpec out = raw;
  if (out.h0 < 1) throw Error(ErrorCode::InvalidSpec, "h0 must be positive");
  for (std::size_t n = 0; n < out.stages.size(); ++n) check_stage(out.stages[n], static_cast<int>(n));
  if (has_family(out.family)) {
    out.extension = ExtensionRule::Family;
    // Expanding one stage runs the family's own parameter checks.
    (void)family_stage(out.family, 0, out.h0);
  } else if (out.extension == ExtensionRule::Family) {
    throw Error(ErrorCode::InvalidSpec, "family extension rule without a family block");
  } else if (out.extension == ExtensionRule::RepeatLast && out.stages.empty()) {
    throw Error(ErrorCode::InvalidSpec, "repeat-last extension needs at least one explicit stage");
  }
  return out;
}

Tower Tower::build(const RankOneSpec& spec, int stages) {
  if (stages < 0) throw Error(ErrorCode::StageUnavailable, "negative stage");
  Tower t;
  t.heights_.push_back(spec.h0);
  for (int n = 0; n < stages; ++n) {
    const Height h = t.heights_.back();
    StageSpec st;
    try {
      st = stage_at(spec, n, h);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::Overflow)
        throw Error(ErrorCode::StageUnavailable, "stage " + std::to_string(n) + " overflows 64-bit heights");
      throw;
    }
    check_stage(st, n);
    std::vector<Height> hs;
    hs.reserve(st.r);
    Height offset = 0;
    try {
      for (int j = 0; j < st.r; ++j) {
        hs.push_back(offset);
        offset = checked_add(checked_add(offset, h), st.s[j]);
      }
    } catch (const Error&) {
      throw Error(ErrorCode::StageUnavailable, "stage " + std::to_string(n + 1) + " overflows 64-bit heights");
    }
    t.heights_.push_back(offset);
    t.height_sets_.push_back(std::move(hs));
    t.stages_.push_back(std::move(st));
  }
  return t;
}

Height Tower::height(int n) const {
  if (n < 0 || n >= static_cast<int>(heights_.size()))
    throw Error(ErrorCode::StageUnavailable, "height of stage " + std::to_string(n) + " not materialized");
  return heights_[n];
}

const std::vector<Height>& Tower::height_set(int n) const {
  if (n < 0 || n >= stage_count())
    throw Error(ErrorCode::StageUnavailable, "height set of stage " + std::to_string(n) + " not materialized");
  return height_sets_[n];
}

const StageSpec& Tower::stage(int n) const {
  if (n < 0 || n >= stage_count())
    throw Error(ErrorCode::StageUnavailable, "stage " + std::to_string(n) + " not materialized");
  return stages_[n];
}

Rational Tower::level_width(int n) const {
  if (n < 0 || n > stage_count())
    throw Error(ErrorCode::StageUnavailable, "width of stage " + std::to_string(n) + " not materialized");
  BigInt den = 1;
  for (int q = 0; q < n; ++q) den *= stages_[q].r;
  return Rational(BigInt(1), den);
}

Height Tower::max_descendant(int i, int n) const {
  Height sum = 0;
  for (int q = i; q < n; ++q) sum = checked_add(sum, max_height_set(q));
  return sum;
}

std::vector<Height> height_set(const RankOneSpec& spec, int n) {
  return Tower::build(spec, n + 1).height_set(n);
}

ColumnStats column_stats(const RankOneSpec& spec, int n) {
  const Tower t = Tower::build(spec, n);
  ColumnStats out;
  out.height = t.height(n);
  out.levelWidth = t.level_width(n);
  out.totalMeasure = out.levelWidth * Rational(out.height);
  return out;
}

std::vector<Height> descendant_heights(const Tower& tower, LevelRef level, int j) {
  if (j < level.stage)
    throw Error(ErrorCode::StageTooLow, "stage " + std::to_string(j) + " below level stage " +
                                            std::to_string(level.stage));
  if (level.height < 0 || level.height >= tower.height(level.stage))
    throw Error(ErrorCode::PreconditionViolated, "level height out of range for its stage");
  std::vector<Height> cur{level.height};
  for (int q = level.stage; q < j; ++q) {
    const auto& hs = tower.height_set(q);
    std::vector<Height> next;
    next.reserve(cur.size() * hs.size());
    // Copies are disjoint and ordered, so concatenation stays sorted.
    for (Height x : hs)
      for (Height d : cur) next.push_back(d + x);
    cur = std::move(next);
  }
  return cur;
}

LevelImage image_of_level(const Tower& tower, LevelRef level, std::int64_t m, int j) {
  const auto desc = descendant_heights(tower, level, j);
  const Height hj = tower.height(j);
  LevelImage out;
  out.sublevelWidth = tower.level_width(j);
  for (Height d : desc) {
    const Height e = checked_add(d, m);
    if (e >= 0 && e < hj)
      out.resolved.push_back({j, e});
    else
      out.unresolved.push_back({j, d});
  }
  return out;
}

LevelImage image_of_level(const RankOneSpec& spec, LevelRef level, std::int64_t m, int j) {
  if (j < level.stage) throw Error(ErrorCode::StageTooLow, "j below level stage");
  return image_of_level(Tower::build(spec, j), level, m, j);
}

IntersectionResult intersection_measure_of_set(const Tower& tower, std::span<const Height> heights,
                                               std::span<const std::int64_t> exponents, int j) {
  if (exponents.empty()) throw Error(ErrorCode::PreconditionViolated, "exponent list is empty");
  const Height hj = tower.height(j);
  std::vector<std::int64_t> shifts;
  std::int64_t maxShift = 0;
  for (std::int64_t m : exponents) {
    shifts.push_back(checked_sub(exponents.front(), m));
    maxShift = std::max<std::int64_t>(maxShift, std::llabs(shifts.back()));
  }
  IntersectionResult out;
  out.descendantCount = heights.size();
  for (Height d : heights) {
    bool negative = false;
    bool outOfRange = false;
    for (std::int64_t s : shifts) {
      const Height e = d + s;
      if (e < 0 || e >= hj) {
        outOfRange = true;
        continue;
      }
      if (!std::binary_search(heights.begin(), heights.end(), e)) {
        negative = true;
        break;
      }
    }
    if (negative) continue;
    if (outOfRange)
      ++out.unresolvedCount;
    else
      ++out.confirmedCount;
  }
  const Rational w = tower.level_width(j);
  out.measure.confirmed = w * Rational(static_cast<std::int64_t>(out.confirmedCount));
  out.measure.unresolved = w * Rational(static_cast<std::int64_t>(out.unresolvedCount));
  out.levelMeasure = w * Rational(static_cast<std::int64_t>(heights.size()));
  out.unresolvedBound =
      w * Rational(static_cast<std::int64_t>(shifts.size())) * Rational(static_cast<std::int64_t>(maxShift));
  return out;
}

IntersectionResult intersection_measure(const Tower& tower, LevelRef level,
                                        std::span<const std::int64_t> exponents, int j) {
  const auto desc = descendant_heights(tower, level, j);
  auto out = intersection_measure_of_set(tower, desc, exponents, j);
  out.levelMeasure = tower.level_width(level.stage);
  return out;
}

IntersectionResult intersection_measure(const RankOneSpec& spec, LevelRef level,
                                        std::span<const std::int64_t> exponents, int j) {
  if (j < level.stage) throw Error(ErrorCode::StageTooLow, "j below level stage");
  return intersection_measure(Tower::build(spec, j), level, exponents, j);
}

}  // namespace ranklab
