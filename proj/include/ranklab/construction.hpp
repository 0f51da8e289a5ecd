#pragma once

#include "ranklab/error.hpp"
#include "ranklab/family_params.hpp"
#include "ranklab/rational.hpp"

#include <optional>
#include <span>
#include <vector>

namespace ranklab {

enum class ExtensionRule { RepeatLast, Family, None };

/// A rank-one cutting-and-stacking construction. h0 is the number of levels of
/// C_0; every column height below is a level count (heights 0..h_n - 1).
struct RankOneSpec {
  std::vector<StageSpec> stages;
  Height h0 = 1;
  Family family;
  ExtensionRule extension = ExtensionRule::None;
};

struct LevelRef {
  int stage = 0;
  Height height = 0;
  bool operator==(const LevelRef&) const = default;
};

/// Checks the invariants of a raw spec and returns it with the extension rule
/// made explicit (family specs extend by family formula).
RankOneSpec validate_spec(const RankOneSpec& raw);

/// Materialized stages 0..stage_count()-1 of a spec: column heights, height
/// sets and level widths. Immutable once built.
class Tower {
 public:
  /// Builds enough stages that height(stages) is available.
  static Tower build(const RankOneSpec& spec, int stages);

  int stage_count() const { return static_cast<int>(stages_.size()); }
  Height height(int n) const;
  const std::vector<Height>& height_set(int n) const;
  const StageSpec& stage(int n) const;
  int cuts(int n) const { return stage(n).r; }
  Height max_height_set(int n) const { return height_set(n).back(); }
  /// Width of a single level of C_n: prod_{q<n} 1/r_q.
  Rational level_width(int n) const;
  /// max D(I, n) for I the base of C_i: sum_{q=i}^{n-1} max H_q.
  Height max_descendant(int i, int n) const;

 private:
  std::vector<StageSpec> stages_;
  std::vector<Height> heights_;
  std::vector<std::vector<Height>> height_sets_;
};

/// H_n = { j h_n + sum_{l<j} s_{n,l} : 0 <= j < r_n }.
std::vector<Height> height_set(const RankOneSpec& spec, int n);

struct ColumnStats {
  Height height = 0;
  Rational levelWidth;
  Rational totalMeasure;
};

ColumnStats column_stats(const RankOneSpec& spec, int n);

/// Sorted heights in C_j of the sublevels of `level`: height + H_i + ... + H_{j-1}.
std::vector<Height> descendant_heights(const Tower& tower, LevelRef level, int j);

struct LevelImage {
  std::vector<LevelRef> resolved;    // images T^m of sublevels that stay in C_j
  std::vector<LevelRef> unresolved;  // sublevels whose image leaves C_j
  Rational sublevelWidth;
};

LevelImage image_of_level(const Tower& tower, LevelRef level, std::int64_t m, int j);
LevelImage image_of_level(const RankOneSpec& spec, LevelRef level, std::int64_t m, int j);

struct IntersectionResult {
  MeasureInterval measure;
  Rational levelMeasure;       // mu(I)
  Rational unresolvedBound;    // k * max|shift| * width_j
  std::size_t confirmedCount = 0;
  std::size_t unresolvedCount = 0;
  std::size_t descendantCount = 0;
};

/// mu(cap_t T^{m_t} I) evaluated at stage j. A point y of I at height d is
/// followed to T^{m_0 - m_t} y at height d + m_0 - m_t; the intersection is
/// confirmed when every such height is in range and a descendant of I,
/// negative as soon as one in-range height is not, unresolved otherwise.
IntersectionResult intersection_measure(const Tower& tower, LevelRef level,
                                        std::span<const std::int64_t> exponents, int j);
IntersectionResult intersection_measure(const RankOneSpec& spec, LevelRef level,
                                        std::span<const std::int64_t> exponents, int j);

/// Same classification for an arbitrary sorted set of stage-j heights
/// (e.g. the descendants of several levels).
IntersectionResult intersection_measure_of_set(const Tower& tower, std::span<const Height> heights,
                                               std::span<const std::int64_t> exponents, int j);

}  // namespace ranklab
