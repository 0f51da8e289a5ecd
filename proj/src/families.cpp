#include "ranklab/families.hpp"

#include "ranklab/sumsets.hpp"

#include <algorithm>
#include <cstdlib>
#include <string>

namespace ranklab {

namespace {

void check_inf_chacon(const InfChaconParams& p) {
  if (p.t < 2) throw Error(ErrorCode::ParamOutOfRange, "t must be at least 2");
  if (p.q < 1 || p.q > p.t - 1) throw Error(ErrorCode::ParamOutOfRange, "q must lie in 1..t-1");
  if (p.m1 < 2 * p.t) throw Error(ErrorCode::ParamOutOfRange, "m1 must be at least 2t");
  if (p.m0 < 1) throw Error(ErrorCode::ParamOutOfRange, "m0 must be at least 1");
}

void check_tq(const TQParams& p) {
  if (p.t < 3) throw Error(ErrorCode::ParamOutOfRange, "t must be at least 3");
  if (p.spacerPositions.empty()) throw Error(ErrorCode::ParamOutOfRange, "q must be at least 1");
  std::vector<int> seen(static_cast<std::size_t>(p.t), 0);
  for (int pos : p.spacerPositions) {
    if (pos < 0 || pos > p.t - 2)
      throw Error(ErrorCode::ParamOutOfRange, "spacer position " + std::to_string(pos) + " outside 0..t-2");
    if (++seen[static_cast<std::size_t>(pos)] > 1)
      throw Error(ErrorCode::ParamOutOfRange, "two spacer blocks on one subcolumn break the gap bound");
  }
}

void check_asymm(const AsymmParams& p) {
  if (p.k < 1) throw Error(ErrorCode::ParamOutOfRange, "k must be at least 1");
  if (p.p && *p.p < p.k) throw Error(ErrorCode::ParamOutOfRange, "p must be at least k");
  if (p.stages < 0) throw Error(ErrorCode::ParamOutOfRange, "stages must be nonnegative");
  if (p.separationFactor < 2) throw Error(ErrorCode::ParamOutOfRange, "separation factor must be at least 2");
  if (p.minCut < 2 || p.boundedCut < 2) throw Error(ErrorCode::ParamOutOfRange, "cut counts must be at least 2");
}

StageSpec stage_from_offsets(const std::vector<Height>& offsets, Height h, Height rightSpacers) {
  StageSpec st;
  st.r = static_cast<int>(offsets.size());
  for (std::size_t j = 0; j + 1 < offsets.size(); ++j) st.s.push_back(offsets[j + 1] - offsets[j] - h);
  st.s.push_back(rightSpacers);
  return st;
}

// Largest c >= 0 with (c / r)^k <= 1 / m, then rounded to the nearer of c, c+1.
int nearest_delta_count(int r, int k, int m) {
  auto powk = [k](const BigInt& b) {
    BigInt out = 1;
    for (int i = 0; i < k; ++i) out *= b;
    return out;
  };
  const BigInt rk = powk(BigInt(r));
  int lo = 0;
  while (lo < r && powk(BigInt(lo + 1)) * m <= rk) ++lo;
  // delta <= (2 lo + 1) / (2 r)  <=>  (2 r)^k <= (2 lo + 1)^k m
  const bool takeLo = powk(BigInt(2 * r)) <= powk(BigInt(2 * lo + 1)) * m;
  return takeLo ? lo : lo + 1;
}

}  // namespace

bool TQParams::has_unit_gap() const {
  for (std::size_t i = 1; i < phi.size(); ++i)
    if (phi[i] - phi[i - 1] == 1) return true;
  return false;
}

int asymm_cut_count(const AsymmParams& params, int n) {
  int r;
  if (!params.p) {
    r = params.boundedCut;
  } else if (*params.p == 1) {
    r = 1 << std::min(n + 1, 20);
  } else {
    // Smallest r with r^(p-1) >= n + 1.
    r = 1;
    auto reaches = [&](int base) {
      BigInt v = 1;
      for (int i = 0; i < *params.p - 1; ++i) v *= base;
      return v >= n + 1;
    };
    while (!reaches(r)) ++r;
  }
  return std::max(params.minCut, r);
}

AsymmStageInfo asymm_stage_info(const AsymmParams& params, int n, Height h, StageSpec* out) {
  check_asymm(params);
  AsymmStageInfo info;
  info.stage = n;
  info.h = h;
  info.r = asymm_cut_count(params, n);
  const Height C = params.separationFactor;
  std::vector<Height> offsets;
  std::vector<Height> isolated;

  if (n % 2 == 0) {
    // Scaled distinct powers of 4: every nonzero x - z - y + z' is a nonzero
    // multiple of M.
    const Height M = checked_mul(checked_mul(2, C), h);
    offsets.push_back(0);
    Height w = 1;
    for (int i = 0; i + 1 < info.r; ++i) {
      offsets.push_back(checked_mul(M, w));
      w = checked_mul(w, 4);
    }
    isolated = offsets;
  } else {
    if (info.r < 3)
      throw Error(ErrorCode::ScheduleInfeasible,
                  "partner stage " + std::to_string(n) + " needs at least 3 cuts, schedule gives " +
                      std::to_string(info.r));
    info.partnerStage = true;
    info.deltaIndex = (n + 1) / 2;
    const int triples = std::clamp(nearest_delta_count(info.r, params.k, info.deltaIndex), 1, info.r / 3);
    info.triples = triples;
    // Elements are M' * coefficient + {0, 1}; coefficients live in slots
    // Q * 4^s (slot 0 has weight 0) plus a triple offset in {0, 1, 2}.
    const Height Mp = checked_add(checked_mul(checked_mul(2, C), h), 2);
    constexpr Height Q = 8;
    info.z = Mp;
    const int slots = triples + (info.r - 3 * triples);
    Height w = 0;
    for (int s = 0; s < slots; ++s) {
      const Height base = checked_mul(Q, w);
      const Height start = checked_mul(Mp, base);
      if (s < triples) {
        offsets.push_back(start);
        offsets.push_back(checked_add(checked_add(start, Mp), 1));
        offsets.push_back(checked_add(checked_add(start, checked_mul(2, Mp)), 1));
      } else {
        offsets.push_back(start);
        isolated.push_back(start);
      }
      w = (w == 0) ? 1 : checked_mul(w, 4);
    }
    const PartnerSet sz = partner_set(offsets, info.z);
    const PartnerSet sz1 = partner_set(offsets, info.z + 1);
    if (sz.members.size() != sz1.members.size() || sz.members.size() != static_cast<std::size_t>(triples))
      throw Error(ErrorCode::ScheduleInfeasible, "partner structure did not realize the requested delta");
    info.achievedDelta = sz.delta;
  }

  const Height rightSpacers = checked_add(offsets.back(), h);
  StageSpec st = stage_from_offsets(offsets, h, rightSpacers);
  info.isolated = isolated;
  info.rightSpacerOk = st.s.back() >= offsets.back() + h;
  info.separation = separation_check(offsets, h, params.separationFactor,
                                     std::span<const Height>(info.isolated));
  if (out) *out = std::move(st);
  return info;
}

StageSpec family_stage(const Family& family, int n, Height h) {
  if (const auto* p = std::get_if<InfChaconParams>(&family)) {
    check_inf_chacon(*p);
    StageSpec st;
    st.r = p->t;
    st.s.assign(static_cast<std::size_t>(p->t), 0);
    st.s[static_cast<std::size_t>(p->q - 1)] = 1;
    st.s.back() = checked_add(checked_mul(p->m1 - p->t, h), p->m0 - 1);
    return st;
  }
  if (const auto* p = std::get_if<TQParams>(&family)) {
    check_tq(*p);
    StageSpec st;
    st.r = p->t;
    st.s.assign(static_cast<std::size_t>(p->t), 0);
    for (int pos : p->spacerPositions) st.s[static_cast<std::size_t>(pos)] = checked_add(st.s[pos], h);
    st.s.back() = 1;
    return st;
  }
  if (const auto* p = std::get_if<AsymmParams>(&family)) {
    StageSpec st;
    (void)asymm_stage_info(*p, n, h, &st);
    return st;
  }
  throw Error(ErrorCode::StageUnavailable, "no family formula to extend stage " + std::to_string(n));
}

RankOneSpec make_inf_chacon(int t, int q, Height m1, Height m0) {
  InfChaconParams p{t, q, m1, m0};
  check_inf_chacon(p);
  RankOneSpec spec;
  spec.family = p;
  spec.extension = ExtensionRule::Family;
  return spec;
}

TQConstruction make_tq(int t, std::vector<int> spacerPositions) {
  TQParams p;
  p.t = t;
  std::sort(spacerPositions.begin(), spacerPositions.end());
  p.spacerPositions = std::move(spacerPositions);
  check_tq(p);
  p.q = static_cast<int>(p.spacerPositions.size());
  p.k = p.t + p.q;
  for (int j = 0; j < t; ++j) {
    const auto below = std::count_if(p.spacerPositions.begin(), p.spacerPositions.end(), [j](int x) { return x < j; });
    p.phi.push_back(j + static_cast<int>(below));
  }
  TQConstruction out;
  out.params = p;
  out.spec.family = p;
  out.spec.extension = ExtensionRule::Family;
  return out;
}

SeparationVerdict separation_check(std::span<const Height> h, Height hn, int factor,
                                   std::optional<std::span<const Height>> restricted) {
  SeparationVerdict out;
  out.threshold = checked_mul(checked_mul(2, factor), hn);
  const std::span<const Height> r = restricted.value_or(h);
  std::optional<std::int64_t> best;
  for (Height x : r)
    for (Height y : h) {
      if (x == y) continue;
      for (Height z : h)
        for (Height zp : h) {
          if (z == x && zp == y) continue;
          const std::int64_t value = x - z - y + zp;
          const std::int64_t mag = std::llabs(value);
          if (!out.minAbsValue || mag < *out.minAbsValue) out.minAbsValue = mag;
          if (mag >= out.threshold) continue;
          if (!best || mag < *best) {
            best = mag;
            out.witness = std::array<Height, 4>{x, y, z, zp};
            out.witnessValue = value;
          }
        }
    }
  out.holds = !out.witness.has_value();
  return out;
}

AsymmConstruction make_asymm_construction(const AsymmParams& params) {
  check_asymm(params);
  AsymmConstruction out;
  out.spec.family = params;
  out.spec.extension = ExtensionRule::Family;
  Height h = out.spec.h0;
  for (int n = 0; n < params.stages; ++n) {
    StageSpec st;
    AsymmStageInfo info = asymm_stage_info(params, n, h, &st);
    if (!info.separation.holds)
      throw Error(ErrorCode::ScheduleInfeasible, "stage " + std::to_string(n) + " failed its separation check");
    Height next = 0;
    for (Height s : st.s) next = checked_add(next, s);
    next = checked_add(next, checked_mul(st.r, h));
    out.spec.stages.push_back(std::move(st));
    out.stages.push_back(std::move(info));
    h = next;
  }
  return out;
}

}  // namespace ranklab
