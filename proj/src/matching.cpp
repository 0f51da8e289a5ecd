#include "ranklab/certificates.hpp"

#include "ranklab/config.hpp"
#include "ranklab/serialize.hpp"

#include <algorithm>
#include <cstdlib>
#include <set>
#include <string>

namespace ranklab {

using nlohmann::json;

namespace {

constexpr std::size_t kSampleCount = 3;
constexpr std::uint64_t kInjectivityLimit = 5'000'000;

// Partner structure of one stage: source sets by (sign, gap choice).
struct StagePlan {
  int stage = 0;
  bool partner = false;
  std::int64_t z = 0;
  std::vector<Height> H;
  std::vector<Height> F;  // S(z) u S(z+1) u (S(z) - z) u (S(z+1) - z - 1)
  // src[sign][extra]: sign 0 = '+', 1 = '-'; extra 0 = gap z, 1 = gap z + 1.
  std::vector<Height> src[2][2];
};

// Which gap (z or z+1) coordinate c takes when label l is consumed.
struct Plan {
  std::vector<int> signature;  // after the all-minus flip
  int anchor = 0;
  std::vector<std::int64_t> normalized;
  std::vector<int> labels;
  std::vector<std::vector<int>> choice;  // choice[labelCoordinate][c] in {0, 1}
  std::vector<StagePlan> stages;
};

Plan make_plan(const Tower& tower, std::span<const int> signatureIn, std::span<const std::int64_t> b, int i,
               int horizon) {
  const std::size_t k = signatureIn.size();
  if (k == 0) throw Error(ErrorCode::PreconditionViolated, "signature is empty");
  if (b.size() != k) throw Error(ErrorCode::LengthMismatch, "signature and b lengths differ");
  for (int s : signatureIn)
    if (s != 1 && s != -1) throw Error(ErrorCode::ParamOutOfRange, "signature entries must be +1 or -1");

  Plan plan;
  plan.signature.assign(signatureIn.begin(), signatureIn.end());
  if (std::all_of(plan.signature.begin(), plan.signature.end(), [](int s) { return s == -1; }))
    std::fill(plan.signature.begin(), plan.signature.end(), 1);
  plan.anchor = static_cast<int>(std::find(plan.signature.begin(), plan.signature.end(), 1) - plan.signature.begin());
  const std::int64_t bp = b[static_cast<std::size_t>(plan.anchor)];
  for (std::size_t c = 0; c < k; ++c)
    plan.normalized.push_back(plan.signature[c] == 1 ? b[c] - bp : b[c] + bp);
  for (std::size_t c = 0; c < k; ++c)
    for (std::int64_t t = 0; t < std::llabs(plan.normalized[c]); ++t) plan.labels.push_back(static_cast<int>(c));

  plan.choice.assign(k, std::vector<int>(k, 0));
  for (std::size_t l = 0; l < k; ++l) {
    const bool up = plan.normalized[l] > 0;
    const bool plus = plan.signature[l] == 1;
    // The labelled coordinate takes z + 1 exactly when (+, up) or (-, down).
    const int own = (plus == up) ? 1 : 0;
    for (std::size_t c = 0; c < k; ++c) plan.choice[l][c] = (c == l) ? own : 1 - own;
  }

  for (int q = i; q < horizon; ++q) {
    StagePlan sp;
    sp.stage = q;
    sp.H = tower.height_set(q);
    if (const auto z = partner_distance(sp.H)) {
      sp.partner = true;
      sp.z = *z;
      for (int extra = 0; extra < 2; ++extra) {
        const std::int64_t g = sp.z + extra;
        const auto ps = partner_set(sp.H, g);
        sp.src[0][extra] = ps.members;
        for (Height x : ps.members) sp.src[1][extra].push_back(x - g);
        sp.F.insert(sp.F.end(), sp.src[0][extra].begin(), sp.src[0][extra].end());
        sp.F.insert(sp.F.end(), sp.src[1][extra].begin(), sp.src[1][extra].end());
      }
      std::sort(sp.F.begin(), sp.F.end());
      sp.F.erase(std::unique(sp.F.begin(), sp.F.end()), sp.F.end());
    }
    plan.stages.push_back(std::move(sp));
  }
  return plan;
}

bool contains(const std::vector<Height>& v, Height x) { return std::binary_search(v.begin(), v.end(), x); }

struct ScanResult {
  bool unique = false;
  bool greedy = false;
  std::vector<std::vector<Height>> dUnique;  // per coordinate summands
  std::vector<std::vector<Height>> dGreedy;
};

// Applies label l at a stage: d = a - g for '+', a + g for '-'.
bool in_pattern(const Plan& plan, const StagePlan& sp, int label, const std::vector<Height>& tuple) {
  for (std::size_t c = 0; c < tuple.size(); ++c) {
    const int sg = plan.signature[c] == 1 ? 0 : 1;
    if (!contains(sp.src[sg][plan.choice[static_cast<std::size_t>(label)][c]], tuple[c])) return false;
  }
  return true;
}

void assign(const Plan& plan, const StagePlan& sp, int label, const std::vector<Height>& tuple, std::size_t q,
            std::vector<std::vector<Height>>& d) {
  for (std::size_t c = 0; c < tuple.size(); ++c) {
    const std::int64_t g = sp.z + plan.choice[static_cast<std::size_t>(label)][c];
    d[c][q] = plan.signature[c] == 1 ? tuple[c] - g : tuple[c] + g;
  }
}

ScanResult scan(const Plan& plan, const std::vector<std::vector<Height>>& a) {
  const std::size_t k = a.size();
  const std::size_t stages = plan.stages.size();
  const std::size_t gamma = plan.labels.size();
  ScanResult out;
  out.dUnique = a;
  out.dGreedy = a;
  std::size_t tu = 0, tg = 0;
  bool failed = false;
  std::vector<Height> tuple(k);
  for (std::size_t q = 0; q < stages && (tg < gamma || (!failed && tu < gamma)); ++q) {
    const StagePlan& sp = plan.stages[q];
    if (!sp.partner) continue;
    for (std::size_t c = 0; c < k; ++c) tuple[c] = a[c][q];
    if (tg < gamma && in_pattern(plan, sp, plan.labels[tg], tuple)) {
      assign(plan, sp, plan.labels[tg], tuple, q, out.dGreedy);
      ++tg;
    }
    if (!failed && tu < gamma) {
      const bool hit = std::all_of(tuple.begin(), tuple.end(), [&](Height x) { return contains(sp.F, x); });
      if (!hit) continue;
      if (in_pattern(plan, sp, plan.labels[tu], tuple)) {
        assign(plan, sp, plan.labels[tu], tuple, q, out.dUnique);
        ++tu;
      } else {
        failed = true;
      }
    }
  }
  out.unique = !failed && tu == gamma;
  out.greedy = tg == gamma;
  return out;
}

MatchWitness make_witness(const Tower& tower, int i, int horizon, std::span<const int> signature,
                          std::span<const std::int64_t> b, const std::vector<std::vector<Height>>& a,
                          const std::vector<std::vector<Height>>& d) {
  MatchWitness w;
  w.baseStage = i;
  w.stage = horizon;
  w.aSummands = a;
  w.dSummands = d;
  for (std::size_t c = 0; c < a.size(); ++c) {
    Height sa = 0, sd = 0;
    for (std::size_t q = 0; q < a[c].size(); ++q) {
      sa = checked_add(sa, a[c][q]);
      sd = checked_add(sd, d[c][q]);
    }
    w.a.push_back(sa);
    w.d.push_back(sd);
    w.residuals.push_back(Rational(BigInt(sa) - sd - b[c], BigInt(signature[c])));
  }
  w.shift = Rational(0) - w.residuals[0];
  std::vector<std::int64_t> alpha(signature.begin(), signature.end());
  if (!w.verify(tower, alpha, b)) throw Error(ErrorCode::PreconditionViolated, "matching witness failed to verify");
  return w;
}

json witness_json(const MatchWitness& w) {
  json res = json::array();
  for (const auto& r : w.residuals) res.push_back(to_json(r));
  return json{{"a", w.a},
              {"d", w.d},
              {"aSummands", w.aSummands},
              {"dSummands", w.dSummands},
              {"residuals", res},
              {"shift", to_json(w.shift)}};
}

void check_stages(const RankOneSpec& spec, int i, int horizon) {
  (void)spec;
  if (i < 0) throw Error(ErrorCode::ParamOutOfRange, "base stage must be nonnegative");
  if (horizon <= i) throw Error(ErrorCode::PreconditionViolated, "horizon must exceed the base stage");
}

}  // namespace

MatchingReport ergodic_matching(const RankOneSpec& spec, const MatchingQuery& query) {
  const int i = query.baseStage;
  const int J = query.horizon;
  check_stages(spec, i, J);
  const Tower tower = Tower::build(validate_spec(spec), J);
  for (std::int64_t x : query.b)
    if (x < 0 || x >= tower.height(i)) throw Error(ErrorCode::ParamOutOfRange, "b entries must lie in [0, h_i)");
  const Plan plan = make_plan(tower, query.signature, query.b, i, J);
  const std::size_t k = query.signature.size();
  const std::size_t stages = plan.stages.size();
  const bool anyPartner = std::any_of(plan.stages.begin(), plan.stages.end(), [](const StagePlan& s) { return s.partner; });
  if (!plan.labels.empty() && !anyPartner)
    throw Error(ErrorCode::NoPartnerStages, "no stage in the window carries partner structure");

  MatchingReport out;
  out.normalizedB = plan.normalized;
  out.anchor = plan.anchor;
  out.gamma = static_cast<int>(plan.labels.size());
  out.labels = plan.labels;

  if (query.probe) {
    if (query.probe->size() != k) throw Error(ErrorCode::LengthMismatch, "probe tuple has the wrong length");
    std::vector<std::vector<Height>> a;
    for (Height x : *query.probe) {
      auto parts = decompose_descendant(tower, LevelRef{i, 0}, J, x);
      if (!parts) throw Error(ErrorCode::PreconditionViolated, std::to_string(x) + " is not a descendant");
      a.push_back(std::move(*parts));
    }
    const ScanResult r = scan(plan, a);
    if (r.unique || r.greedy)
      out.probeWitness = make_witness(tower, i, J, query.signature, query.b, a, r.unique ? r.dUnique : r.dGreedy);
  }

  if (query.enumerate) {
    std::uint64_t total = 1;
    for (const auto& sp : plan.stages)
      for (std::size_t c = 0; c < k; ++c) total = saturating_mul(total, sp.H.size());
    check_budget(total, "matching enumeration");
    out.total = total;
    const bool checkInjective = total <= kInjectivityLimit;
    std::set<std::vector<Height>> seenUnique, seenGreedy;

    std::vector<std::size_t> idx(stages * k, 0);
    std::vector<std::vector<Height>> a(k, std::vector<Height>(stages, 0));
    for (std::uint64_t t = 0; t < total; ++t) {
      for (std::size_t q = 0; q < stages; ++q)
        for (std::size_t c = 0; c < k; ++c) a[c][q] = plan.stages[q].H[idx[q * k + c]];
      const ScanResult r = scan(plan, a);
      auto totals = [](const std::vector<std::vector<Height>>& d) {
        std::vector<Height> v;
        for (const auto& row : d) {
          Height s = 0;
          for (Height x : row) s += x;
          v.push_back(s);
        }
        return v;
      };
      if (r.unique) {
        ++out.matchedUnique;
        if (checkInjective && !seenUnique.insert(totals(r.dUnique)).second) out.injective = false;
        if (out.samples.size() < kSampleCount)
          out.samples.push_back(make_witness(tower, i, J, query.signature, query.b, a, r.dUnique));
      }
      if (r.greedy) {
        ++out.matchedGreedy;
        if (checkInjective && !seenGreedy.insert(totals(r.dGreedy)).second) out.greedyInjective = false;
      }
      // Odometer over (stage, coordinate) indices, last position fastest.
      for (std::size_t pos = idx.size(); pos-- > 0;) {
        if (++idx[pos] < plan.stages[pos / k].H.size()) break;
        idx[pos] = 0;
      }
    }
    out.uniqueFraction = Rational(BigInt(out.matchedUnique), BigInt(total));
    out.greedyFraction = Rational(BigInt(out.matchedGreedy), BigInt(total));
    if (!checkInjective) {
      out.injective = true;
      out.greedyInjective = true;
    }
    out.certificate.evidence["injectivityChecked"] = checkInjective;
  }

  const Certificate base = out.certificate;
  out.certificate = Certificate{};
  out.certificate.kind = "ergodic-fraction";
  out.certificate.parameters = json{{"signature", query.signature},
                                    {"b", query.b},
                                    {"baseStage", i},
                                    {"horizon", J},
                                    {"enumerate", query.enumerate}};
  out.certificate.specFingerprint = spec_fingerprint(spec);
  out.certificate.toolVersion = std::string(kToolVersion);
  json samples = json::array();
  for (const auto& w : out.samples) samples.push_back(witness_json(w));
  json stageInfo = json::array();
  for (const auto& sp : plan.stages) {
    json s{{"stage", sp.stage}, {"partner", sp.partner}};
    if (sp.partner) s["z"] = sp.z;
    stageInfo.push_back(s);
  }
  out.certificate.evidence = json{{"anchor", out.anchor},
                                  {"normalizedB", out.normalizedB},
                                  {"gamma", out.gamma},
                                  {"labels", out.labels},
                                  {"stages", stageInfo},
                                  {"K", to_json(Rational(1) / pow(Rational(4), static_cast<int>(k) * out.gamma))},
                                  {"samples", samples}};
  if (out.probeWitness) out.certificate.evidence["probe"] = witness_json(*out.probeWitness);
  if (query.enumerate) {
    out.certificate.evidence["total"] = out.total;
    out.certificate.evidence["matchedUnique"] = out.matchedUnique;
    out.certificate.evidence["matchedGreedy"] = out.matchedGreedy;
    out.certificate.evidence["uniqueFraction"] = to_json(out.uniqueFraction);
    out.certificate.evidence["greedyFraction"] = to_json(out.greedyFraction);
    out.certificate.evidence["injective"] = out.injective;
    out.certificate.evidence["greedyInjective"] = out.greedyInjective;
    out.certificate.evidence["injectivityChecked"] = base.evidence.value("injectivityChecked", false);
  }
  out.certificate.verdict = out.injective ? Verdict::Holds : Verdict::Fails;
  if (query.enumerate && out.matchedUnique == 0 && out.gamma > 0) {
    out.certificate.verdict = Verdict::Inconclusive;
    out.certificate.evidence["obstruction"] = "no tuple meets the label pattern inside the horizon";
  }
  return out;
}

std::optional<std::vector<Height>> construct_matchable_tuple(const RankOneSpec& spec, const MatchingQuery& query) {
  check_stages(spec, query.baseStage, query.horizon);
  const Tower tower = Tower::build(validate_spec(spec), query.horizon);
  const Plan plan = make_plan(tower, query.signature, query.b, query.baseStage, query.horizon);
  const std::size_t k = query.signature.size();
  std::vector<Height> totals(k, 0);
  std::size_t t = 0;
  for (const StagePlan& sp : plan.stages) {
    if (!sp.partner || t >= plan.labels.size()) continue;
    const int label = plan.labels[t++];
    for (std::size_t c = 0; c < k; ++c) {
      const int sg = plan.signature[c] == 1 ? 0 : 1;
      const auto& src = sp.src[sg][plan.choice[static_cast<std::size_t>(label)][c]];
      if (src.empty()) return std::nullopt;
      totals[c] = checked_add(totals[c], src.front());
    }
  }
  if (t < plan.labels.size()) return std::nullopt;
  return totals;
}

PatternReport pattern_measure(const RankOneSpec& spec, const PatternQuery& query) {
  const int i = query.baseStage;
  const int J = query.cutoff;
  check_stages(spec, i, J);
  std::vector<int> signature = query.signature;
  if (signature.empty()) signature.assign(query.b.size(), 1);
  const Tower tower = Tower::build(validate_spec(spec), J);
  const Plan plan = make_plan(tower, signature, query.b, i, J);
  const int k = static_cast<int>(signature.size());
  const std::size_t gamma = plan.labels.size();
  if (gamma > 0 && std::none_of(plan.stages.begin(), plan.stages.end(), [](const StagePlan& s) { return s.partner; }))
    throw Error(ErrorCode::NoPartnerStages, "no stage before the cutoff carries partner structure");

  PatternReport out;
  out.k = k;
  out.gamma = static_cast<int>(gamma);
  out.dconst = query.dconst.value_or(pow(Rational(4), k));
  out.bound = Rational(1) / pow(out.dconst, out.gamma);

  // State distribution over matched-label counts; the failed mass is dropped.
  std::vector<Rational> state(gamma + 1, Rational(0));
  state[0] = Rational(1);
  std::vector<Rational> hits(gamma + 1, Rational(0));
  hits[0] = Rational(1);
  bool ratioOk = true;
  for (const StagePlan& sp : plan.stages) {
    json row{{"stage", sp.stage}, {"partner", sp.partner}, {"heightSetSize", sp.H.size()}};
    if (!sp.partner) {
      out.stages.push_back(row);
      continue;
    }
    const Rational all = pow(Rational(static_cast<std::int64_t>(sp.H.size())), k);
    const Rational fSize = pow(Rational(static_cast<std::int64_t>(sp.F.size())), k);
    const Rational pF = fSize / all;
    std::vector<Rational> pE;
    json eSizes = json::array();
    for (std::size_t t = 0; t < gamma; ++t) {
      Rational size(1);
      for (int c = 0; c < k; ++c) {
        const int sg = plan.signature[static_cast<std::size_t>(c)] == 1 ? 0 : 1;
        size *= Rational(static_cast<std::int64_t>(
            sp.src[sg][plan.choice[static_cast<std::size_t>(plan.labels[t])][static_cast<std::size_t>(c)]].size()));
      }
      pE.push_back(size / all);
      eSizes.push_back(to_json(size));
      ratioOk = ratioOk && (size.is_zero() ? false : fSize <= out.dconst * size);
    }
    std::vector<Rational> next(gamma + 1, Rational(0));
    next[gamma] = state[gamma];
    for (std::size_t t = 0; t < gamma; ++t) {
      next[t + 1] += state[t] * pE[t];
      next[t] += state[t] * (Rational(1) - pF);
    }
    state = std::move(next);
    std::vector<Rational> nh(gamma + 1, Rational(0));
    nh[gamma] = hits[gamma];
    for (std::size_t t = 0; t < gamma; ++t) {
      nh[t + 1] += hits[t] * pF;
      nh[t] += hits[t] * (Rational(1) - pF);
    }
    hits = std::move(nh);
    row["z"] = sp.z;
    row["FSize"] = to_json(fSize);
    row["ESizes"] = eSizes;
    out.stages.push_back(row);
  }
  out.muW.confirmed = state[gamma];
  Rational open(0);
  for (std::size_t t = 0; t < gamma; ++t) open += state[t];
  out.muW.unresolved = open;
  out.hitMass = hits[gamma];
  out.boundHolds = out.muW.lower() >= out.bound * out.hitMass;

  out.certificate.kind = "pattern-bound";
  out.certificate.parameters = json{{"signature", signature}, {"b", query.b}, {"baseStage", i}, {"cutoff", J},
                                    {"Dconst", to_json(out.dconst)}};
  out.certificate.specFingerprint = spec_fingerprint(spec);
  out.certificate.toolVersion = std::string(kToolVersion);
  out.certificate.evidence = json{{"gamma", out.gamma},
                                  {"labels", plan.labels},
                                  {"muW", to_json(out.muW)},
                                  {"hitMass", to_json(out.hitMass)},
                                  {"K", to_json(out.bound)},
                                  {"boundHolds", out.boundHolds},
                                  {"ratioConstraint", ratioOk},
                                  {"stages", out.stages}};
  out.certificate.verdict = out.boundHolds ? Verdict::Holds : Verdict::Fails;
  return out;
}

}  // namespace ranklab
