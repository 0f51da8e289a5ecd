#pragma once

#include "ranklab/construction.hpp"

#include <array>
#include <optional>
#include <span>
#include <vector>

namespace ranklab {

/// Infinite Chacon type spec. Requires 1 <= q <= t-1, m1 >= 2t, m0 >= 1.
RankOneSpec make_inf_chacon(int t, int q, Height m1, Height m0);

struct TQConstruction {
  RankOneSpec spec;
  TQParams params;
};

/// (t,q)-Chacon spec with h_n-high spacer blocks over the listed subcolumns.
TQConstruction make_tq(int t, std::vector<int> spacerPositions);

struct SeparationVerdict {
  bool holds = true;
  std::int64_t threshold = 0;
  std::optional<std::array<Height, 4>> witness;  // (x, y, z, z')
  std::optional<std::int64_t> witnessValue;      // x - z - y + z'
  std::optional<std::int64_t> minAbsValue;       // over all admissible quadruples
};

/// Checks |x - z - y + z'| >= 2 C h_n for x in R, y, z, z' in H, x != y and
/// (z, z') != (x, y). On failure the witness minimizes |value|, ties broken
/// lexicographically on (x, y, z, z').
SeparationVerdict separation_check(std::span<const Height> h, Height hn, int factor,
                                   std::optional<std::span<const Height>> restricted = std::nullopt);

struct AsymmStageInfo {
  int stage = 0;
  Height h = 0;
  int r = 0;
  bool partnerStage = false;   // odd stages
  int triples = 0;             // partner triples in H_n
  int deltaIndex = 0;          // m, the schedule asks for delta = m^(-1/k)
  Rational achievedDelta;      // |S(z)| / |H_n|
  std::int64_t z = 0;          // partner distance
  std::vector<Height> isolated;  // R_n
  SeparationVerdict separation;
  bool rightSpacerOk = false;  // s_{n, r-1} >= max H_n + h_n
};

struct AsymmConstruction {
  RankOneSpec spec;
  std::vector<AsymmStageInfo> stages;
};

AsymmConstruction make_asymm_construction(const AsymmParams& params);

/// Per-stage data of the hybrid construction (used by the family extension rule).
AsymmStageInfo asymm_stage_info(const AsymmParams& params, int n, Height h, StageSpec* out = nullptr);

/// Cut count of stage n under the schedule implied by p.
int asymm_cut_count(const AsymmParams& params, int n);

}  // namespace ranklab
