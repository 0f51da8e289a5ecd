#pragma once

#include "ranklab/rational.hpp"

#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

namespace ranklab {

using Height = std::int64_t;

/// Cut count and spacer vector for one stage; s.back() is the count placed on
/// the rightmost subcolumn.
struct StageSpec {
  int r = 0;
  std::vector<Height> s;
  bool operator==(const StageSpec&) const = default;
};

/// Infinite Chacon type: t subcolumns, one spacer above subcolumn q-1, and
/// (m1 - t) h_n + m0 - 1 spacers on the last one, so h_{n+1} = m1 h_n + m0.
struct InfChaconParams {
  int t = 3;
  int q = 1;
  Height m1 = 6;
  Height m0 = 2;
  bool operator==(const InfChaconParams&) const = default;
};

/// (t,q)-Chacon: q spacer blocks of height h_n over subcolumns 0..t-2 and one
/// spacer over the last subcolumn. phi(i) is the offset coefficient of the
/// i-th copy, so H_n = { phi(i) h_n }.
struct TQParams {
  int t = 4;
  int q = 1;
  std::vector<int> spacerPositions;
  int k = 5;
  std::vector<int> phi;
  bool operator==(const TQParams&) const = default;

  bool has_unit_gap() const;
};

/// Parameters of the hybrid construction with separated even stages and
/// partner-structured odd stages.
struct AsymmParams {
  int k = 2;                         // delta schedule exponent: delta_m = m^(-1/k)
  std::optional<int> p;              // target conservative index, nullopt = unbounded
  int stages = 0;                    // explicit prefix length
  int separationFactor = 2;          // C in |x - z - y + z'| >= 2 C h_n
  int minCut = 3;
  int boundedCut = 3;                // constant cut used when p is unbounded
  bool operator==(const AsymmParams&) const = default;
};

using Family = std::variant<std::monostate, InfChaconParams, TQParams, AsymmParams>;

/// Stage n of a family, given the current column height h_n.
StageSpec family_stage(const Family& family, int n, Height h);

}  // namespace ranklab
