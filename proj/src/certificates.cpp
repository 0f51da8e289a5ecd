#include "ranklab/certificates.hpp"

#include "ranklab/config.hpp"
#include "ranklab/serialize.hpp"

#include <algorithm>
#include <bit>
#include <cstdlib>
#include <numeric>
#include <string>
#include <thread>

namespace ranklab {

using nlohmann::json;

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::Holds: return "holds";
    case Verdict::Fails: return "fails";
    case Verdict::Inconclusive: return "inconclusive";
  }
  return "inconclusive";
}

namespace {

Certificate make_certificate(std::string kind, const RankOneSpec& spec, json parameters) {
  Certificate c;
  c.kind = std::move(kind);
  c.parameters = std::move(parameters);
  c.specFingerprint = spec_fingerprint(spec);
  c.toolVersion = std::string(kToolVersion);
  return c;
}

Tower build_tower(const RankOneSpec& spec, int stages) { return Tower::build(validate_spec(spec), stages); }

// Dynamic bitset over the quotient range [-offset, offset].
struct Bits {
  std::vector<std::uint64_t> words;

  explicit Bits(std::size_t n = 0) : words((n + 63) / 64, 0) {}
  void set(std::size_t i) { words[i / 64] |= std::uint64_t{1} << (i % 64); }
  void reset(std::size_t i) { words[i / 64] &= ~(std::uint64_t{1} << (i % 64)); }
  bool any() const {
    return std::any_of(words.begin(), words.end(), [](std::uint64_t w) { return w != 0; });
  }
};

std::uint64_t count_tuples(const std::vector<const std::vector<Bits>*>& coords, std::size_t l, const Bits& acc) {
  const auto& table = *coords[l];
  std::uint64_t total = 0;
  Bits next(acc.words.size() * 64);
  for (const Bits& row : table) {
    bool any = false;
    for (std::size_t w = 0; w < acc.words.size(); ++w) {
      next.words[w] = acc.words[w] & row.words[w];
      any = any || next.words[w] != 0;
    }
    if (!any) continue;
    if (l + 1 == coords.size())
      ++total;
    else
      total += count_tuples(coords, l + 1, next);
  }
  return total;
}

std::vector<std::int64_t> positive_differences(std::span<const Height> d) {
  std::vector<std::int64_t> out;
  for (Height a : d)
    for (Height b : d)
      if (a > b) out.push_back(a - b);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

json stage_fraction_json(const StageFraction& f) {
  return json{{"stage", f.stage}, {"matched", f.matched}, {"total", f.total}, {"fraction", to_json(f.fraction)}};
}

std::int64_t sign(std::int64_t v) { return v > 0 ? 1 : (v < 0 ? -1 : 0); }

}  // namespace

std::vector<Height> descendants_of_levels(const Tower& tower, int stage, std::span<const Height> levels, int j) {
  std::vector<Height> out;
  for (Height l : levels) {
    const auto d = descendant_heights(tower, LevelRef{stage, l}, j);
    out.insert(out.end(), d.begin(), d.end());
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

Height max_descendant_of_levels(const Tower& tower, int stage, std::span<const Height> levels, int n) {
  if (levels.empty()) throw Error(ErrorCode::PreconditionViolated, "level set is empty");
  return checked_add(*std::max_element(levels.begin(), levels.end()), tower.max_descendant(stage, n));
}

StageFraction matched_tuple_fraction(const Tower& tower, std::span<const std::int64_t> alpha,
                                     std::span<const std::int64_t> b, int i, int j, bool excludeZero) {
  const std::size_t v = alpha.size();
  if (v == 0) throw Error(ErrorCode::PreconditionViolated, "alpha must have at least one entry");
  if (b.size() != v) throw Error(ErrorCode::LengthMismatch, "alpha and b lengths differ");
  for (std::int64_t a : alpha)
    if (a == 0) throw Error(ErrorCode::ParamOutOfRange, "alpha entries must be nonzero");

  const auto d = descendant_heights(tower, LevelRef{i, 0}, j);
  std::uint64_t total = 1;
  for (std::size_t l = 0; l < v; ++l) total = saturating_mul(total, d.size());

  std::int64_t maxB = 0;
  for (std::int64_t x : b) maxB = std::max<std::int64_t>(maxB, std::llabs(x));
  const std::int64_t offset = checked_add(d.back() - d.front(), maxB);
  const std::size_t width = static_cast<std::size_t>(2 * offset + 1);
  check_budget(total, "tuple enumeration");
  check_budget(saturating_mul(saturating_mul(d.size(), d.size()), v), "quotient tables");

  // One table per distinct (alpha, b) coordinate.
  std::vector<std::pair<std::int64_t, std::int64_t>> keys;
  std::vector<std::vector<Bits>> tables;
  std::vector<const std::vector<Bits>*> coords;
  for (std::size_t l = 0; l < v; ++l) {
    const auto key = std::make_pair(alpha[l], b[l]);
    auto it = std::find(keys.begin(), keys.end(), key);
    if (it == keys.end()) {
      keys.push_back(key);
      std::vector<Bits> table(d.size(), Bits(width));
      for (std::size_t ai = 0; ai < d.size(); ++ai)
        for (Height dd : d) {
          const std::int64_t num = d[ai] - dd - key.second;
          if (num % key.first != 0) continue;
          const std::int64_t n = num / key.first;
          table[ai].set(static_cast<std::size_t>(n + offset));
        }
      tables.push_back(std::move(table));
    }
  }
  for (std::size_t l = 0; l < v; ++l) {
    const auto idx = std::find(keys.begin(), keys.end(), std::make_pair(alpha[l], b[l])) - keys.begin();
    coords.push_back(&tables[static_cast<std::size_t>(idx)]);
  }

  Bits start(width);
  for (std::size_t w = 0; w < start.words.size(); ++w) start.words[w] = ~std::uint64_t{0};
  // Clear padding beyond width.
  for (std::size_t bit = width; bit < start.words.size() * 64; ++bit) start.reset(bit);
  if (excludeZero) start.reset(static_cast<std::size_t>(offset));

  std::uint64_t matched = 0;
  if (v == 1) {
    matched = count_tuples(coords, 0, start);
  } else {
    // Split on the first coordinate; partial counts are summed in index order.
    const unsigned jobs = std::max(1u, std::min<unsigned>(execution_config().jobs,
                                                          static_cast<unsigned>(d.size())));
    std::vector<std::uint64_t> partial(jobs, 0);
    auto work = [&](unsigned w) {
      const auto& first = *coords[0];
      Bits acc(width);
      std::uint64_t sum = 0;
      for (std::size_t ai = w; ai < first.size(); ai += jobs) {
        bool any = false;
        for (std::size_t x = 0; x < acc.words.size(); ++x) {
          acc.words[x] = start.words[x] & first[ai].words[x];
          any = any || acc.words[x] != 0;
        }
        if (any) sum += count_tuples(coords, 1, acc);
      }
      partial[w] = sum;
    };
    if (jobs == 1) {
      work(0);
    } else {
      std::vector<std::thread> pool;
      for (unsigned w = 0; w < jobs; ++w) pool.emplace_back(work, w);
      for (auto& t : pool) t.join();
    }
    matched = std::accumulate(partial.begin(), partial.end(), std::uint64_t{0});
  }

  StageFraction out;
  out.stage = j;
  out.matched = matched;
  out.total = total;
  out.fraction = Rational(BigInt(matched), BigInt(total));
  return out;
}

FractionReport conservativity_fraction(const RankOneSpec& spec, const ProductQuery& query) {
  if (query.alpha.empty()) throw Error(ErrorCode::PreconditionViolated, "alpha must have at least one entry");
  for (std::int64_t x : query.b)
    if (x != 0) throw Error(ErrorCode::PreconditionViolated, "conservativity uses b = 0");
  if (query.horizon <= query.baseStage)
    throw Error(ErrorCode::PreconditionViolated, "horizon must exceed the base stage");
  const Tower tower = build_tower(spec, query.horizon);
  const std::vector<std::int64_t> zeros(query.alpha.size(), 0);

  FractionReport out;
  json stages = json::array();
  std::optional<int> reached;
  for (int j = query.baseStage + 1; j <= query.horizon; ++j) {
    StageFraction f = matched_tuple_fraction(tower, query.alpha, zeros, query.baseStage, j, true);
    if (!reached && f.fraction >= Rational(1) - query.epsilon) reached = j;
    stages.push_back(stage_fraction_json(f));
    out.stages.push_back(std::move(f));
  }
  out.certificate = make_certificate("conservative-fraction", spec,
                                     json{{"alpha", query.alpha},
                                          {"baseStage", query.baseStage},
                                          {"horizon", query.horizon},
                                          {"epsilon", to_json(query.epsilon)}});
  out.certificate.evidence = json{{"stages", stages}};
  if (reached) {
    out.certificate.verdict = Verdict::Holds;
    out.certificate.evidence["reachedAt"] = *reached;
  } else {
    out.certificate.verdict = Verdict::Inconclusive;
    out.certificate.evidence["obstruction"] = "fraction below 1 - epsilon at every tested stage";
  }
  return out;
}

NpcReport npc_certificate(const RankOneSpec& spec, const NpcQuery& query) {
  const int N = query.baseStage;
  const int J = query.horizon;
  if (query.kappa < 1) throw Error(ErrorCode::ParamOutOfRange, "kappa must be positive");
  if (J <= N) throw Error(ErrorCode::PreconditionViolated, "horizon must exceed the base stage");
  const Tower tower = build_tower(spec, J + 1);
  auto maxD = [&](int n) { return tower.max_descendant(N, n); };

  NpcReport out;
  json statement = json::array();
  for (int n = N + 1; n <= J; ++n) {
    const Height md = maxD(n);
    const Rational ratio = Rational(BigInt(tower.height(n) - 2 * md), BigInt(md));
    out.statementRatios.emplace_back(n, ratio);
    statement.push_back(json{{"n", n}, {"ratio", to_json(ratio)}});
  }

  json proof = json::array();
  bool proofDefined = true;
  for (int n = N; n < J; ++n) {
    const Height denom = tower.height(n) - 2 * maxD(n);
    std::optional<Rational> ratio;
    if (denom > 0) ratio = Rational(BigInt(maxD(n + 1)), BigInt(denom));
    if (!ratio) proofDefined = false;
    if (ratio && (!out.proofSup || *ratio > *out.proofSup)) out.proofSup = ratio;
    out.proofRatios.emplace_back(n, ratio);
    proof.push_back(json{{"n", n}, {"ratio", ratio ? to_json(*ratio) : json(nullptr)}});
  }
  const bool proofBound = proofDefined && out.proofSup && *out.proofSup < Rational(query.kappa);

  // Progressions {x, ..., (kappa+1) x} in D(I_N, j) - D(I_N, j).
  const int runLen = query.kappa + 1;
  json ap = json::array();
  bool apFree = true;
  std::vector<std::vector<std::int64_t>> diffs;
  std::vector<bool> bruteNoAp;
  for (int j = N; j <= J; ++j) {
    const auto d = descendant_heights(tower, LevelRef{N, 0}, j);
    check_budget(saturating_mul(d.size(), d.size()), "difference set");
    const ApSearchResult r = ap_search(d, runLen);
    out.apLongest.emplace_back(j, r.longest);
    const bool found = r.longest >= runLen;
    apFree = apFree && !found;
    json row{{"j", j}, {"longest", r.longest}, {"found", found}};
    row["witness"] = r.witness ? json(*r.witness) : json(nullptr);
    ap.push_back(row);
    diffs.push_back(positive_differences(d));
    bruteNoAp.push_back(!found);
  }

  // Inductive three-case replay: no progression at stage n plus the two
  // inequalities implies none at stage n + 1.
  json replay = json::array();
  bool replayAgrees = true;
  bool claim = true;  // D(I_N, N) is a singleton
  for (int n = N; n < J; ++n) {
    const auto& prev = diffs[static_cast<std::size_t>(n - N)];
    const auto& next = diffs[static_cast<std::size_t>(n + 1 - N)];
    std::optional<std::int64_t> newMin;
    for (std::int64_t x : next)
      if (!std::binary_search(prev.begin(), prev.end(), x)) {
        newMin = x;
        break;
      }
    const Height hn = tower.height(n);
    const Height md = maxD(n);
    const bool gapFloor = !newMin || *newMin >= hn - md;
    const bool gapAbove = hn - md > md;
    const bool bridge = BigInt(runLen) * BigInt(hn - 2 * md) > BigInt(maxD(n + 1));
    claim = claim && gapFloor && gapAbove && bridge;
    const bool brute = bruteNoAp[static_cast<std::size_t>(n + 1 - N)];
    const bool agrees = !claim || brute;
    replayAgrees = replayAgrees && agrees;
    json row{{"n", n},
             {"smallestNewDifference", newMin ? json(*newMin) : json(nullptr)},
             {"newDifferenceFloor", gapFloor},
             {"floorExceedsMaxD", gapAbove},
             {"progressionBridge", bridge},
             {"inductionClaimsNoProgression", claim},
             {"bruteForceNoProgression", brute},
             {"agree", agrees}};
    replay.push_back(row);
  }
  out.caseReplay = json{{"steps", replay}, {"agree", replayAgrees}};

  // Two sufficient growth conditions, checked on n in [N, J).
  json cor = json::array();
  std::vector<bool> both;
  for (int n = N; n < J; ++n) {
    const Height hn = tower.height(n);
    const Height mh = tower.max_height_set(n);
    const Height mhNext = tower.max_height_set(n + 1);
    const bool c1 = BigInt(tower.height(n + 1)) >= BigInt(2 * hn) + BigInt(2 * mh) + BigInt(query.corollaryK);
    const Rational ratio{BigInt(hn), BigInt(mhNext)};
    const bool c2 = ratio >= query.corollaryB;
    both.push_back(c1 && c2);
    cor.push_back(json{{"n", n}, {"spacerMass", c1}, {"heightRatio", to_json(ratio)}, {"ratioBound", c2}});
  }
  std::optional<int> firstGood;
  for (int n = J - 1; n >= N; --n) {
    if (!both[static_cast<std::size_t>(n - N)]) break;
    firstGood = n;
  }
  out.corollary = json{{"K", query.corollaryK}, {"b", to_json(query.corollaryB)}, {"stages", cor}};
  out.corollary["holdsFrom"] = firstGood ? json(*firstGood) : json(nullptr);
  if (const auto* p = std::get_if<InfChaconParams>(&spec.family))
    out.corollary["ratioLimit"] = to_json(Rational::of(1, (p->t - 1) * p->m1));

  out.certificate = make_certificate(
      "ap-free", spec, json{{"kappa", query.kappa}, {"baseStage", N}, {"horizon", J}});
  out.certificate.evidence = json{{"statementRatios", statement},
                                  {"proofRatios", proof},
                                  {"proofSup", out.proofSup ? to_json(*out.proofSup) : json(nullptr)},
                                  {"proofBoundBelowKappa", proofBound},
                                  {"apSearch", ap},
                                  {"caseReplay", out.caseReplay},
                                  {"corollary", out.corollary}};
  if (!apFree)
    out.certificate.verdict = Verdict::Fails;
  else if (proofBound)
    out.certificate.verdict = Verdict::Holds;
  else
    out.certificate.verdict = Verdict::Inconclusive;
  return out;
}

bool MatchWitness::verify(const Tower& tower, std::span<const std::int64_t> alpha,
                          std::span<const std::int64_t> b) const {
  const std::size_t v = a.size();
  if (d.size() != v || aSummands.size() != v || dSummands.size() != v || alpha.size() != v || b.size() != v ||
      residuals.size() != v)
    return false;
  const auto stages = static_cast<std::size_t>(stage - baseStage);
  for (std::size_t l = 0; l < v; ++l) {
    if (aSummands[l].size() != stages || dSummands[l].size() != stages) return false;
    BigInt sa = 0, sd = 0;
    for (std::size_t q = 0; q < stages; ++q) {
      const auto& h = tower.height_set(baseStage + static_cast<int>(q));
      if (!std::binary_search(h.begin(), h.end(), aSummands[l][q])) return false;
      if (!std::binary_search(h.begin(), h.end(), dSummands[l][q])) return false;
      sa += aSummands[l][q];
      sd += dSummands[l][q];
    }
    if (sa != a[l] || sd != d[l]) return false;
    if (alpha[l] == 0) return false;
    const Rational res(BigInt(a[l]) - d[l] - b[l], BigInt(alpha[l]));
    if (res != residuals[l] || res != residuals[0]) return false;
  }
  return shift == Rational(0) - residuals[0];
}

PwmReport pwm_witness(const TQConstruction& tq, const PwmQuery& query) {
  const TQParams& p = tq.params;
  const int n = query.baseStage;
  const std::size_t v = query.alpha.size() + 1;
  if (query.b.size() != v) throw Error(ErrorCode::LengthMismatch, "b needs one entry per coordinate");
  for (std::int64_t x : query.alpha)
    if (x == 0) throw Error(ErrorCode::ParamOutOfRange, "alpha entries must be nonzero");
  for (std::int64_t x : query.b)
    if (x < 0) throw Error(ErrorCode::ParamOutOfRange, "b entries must be nonnegative");
  if (n < 0) throw Error(ErrorCode::ParamOutOfRange, "base stage must be nonnegative");
  if (p.k < 3) throw Error(ErrorCode::PreconditionViolated, "k = t + q must be at least 3");
  if (!p.has_unit_gap())
    throw Error(ErrorCode::HypothesisUnmet, "no pair of subcolumns with phi(f) - phi(g) = 1");

  const int k = p.k;
  std::vector<int> coeffs = p.phi;
  const DigitAlphabet alphabet = DigitAlphabet::make(k, coeffs);
  std::vector<std::int64_t> betas;
  for (std::int64_t a : query.alpha) {
    const std::int64_t m = std::llabs(a);
    if (std::find(betas.begin(), betas.end(), m) == betas.end()) betas.push_back(m);
  }
  std::sort(betas.begin(), betas.end());

  PwmWitness w;
  w.gamma = gamma_search(alphabet, betas);
  const std::int64_t gamma = w.gamma.gamma;

  // Subcolumn pair (x, y) with phi(x) - phi(y) = e, smallest x first.
  auto pair_for = [&](int e) {
    for (int x = 0; x < p.t; ++x)
      for (int y = 0; y < p.t; ++y)
        if (p.phi[static_cast<std::size_t>(x)] - p.phi[static_cast<std::size_t>(y)] == e) return std::make_pair(x, y);
    throw Error(ErrorCode::PreconditionViolated, "digit difference " + std::to_string(e) + " not realizable");
  };
  std::pair<int, int> unitPair{-1, -1};
  for (int f = 0; f < p.t && unitPair.first < 0; ++f)
    for (int g = 0; g < p.t; ++g)
      if (p.phi[static_cast<std::size_t>(f)] - p.phi[static_cast<std::size_t>(g)] == 1) {
        unitPair = {f, g};
        break;
      }

  std::vector<std::int64_t> Kl{0};  // K_l = sum_{i<l} k^i
  auto K = [&](int l) {
    while (static_cast<int>(Kl.size()) <= l)
      Kl.push_back(checked_add(Kl.back(), checked_pow(k, static_cast<int>(Kl.size()) - 1)));
    return Kl[static_cast<std::size_t>(l)];
  };

  // Coordinate digits: coordinate 0 uses k^m - gamma, coordinate q uses
  // k^n - gamma |alpha_q|.
  std::vector<std::vector<int>> digits(v);
  digits[0] = w.gamma.anchor.digits;
  for (std::size_t q = 1; q < v; ++q) {
    const std::int64_t beta = std::llabs(query.alpha[q - 1]);
    const auto idx = std::find(w.gamma.betas.begin(), w.gamma.betas.end(), beta) - w.gamma.betas.begin();
    digits[q] = w.gamma.scaled[static_cast<std::size_t>(idx)].digits;
  }
  w.digitPairs.resize(v);
  w.L.assign(v, 0);
  for (std::size_t q = 0; q < v; ++q) {
    const int len = static_cast<int>(digits[q].size());
    std::int64_t L = len;
    for (int l = 0; l < len; ++l) {
      const auto pr = pair_for(-digits[q][static_cast<std::size_t>(l)]);
      w.digitPairs[q].push_back(pr);
      const int diff = p.phi[static_cast<std::size_t>(pr.first)] - p.phi[static_cast<std::size_t>(pr.second)];
      L = checked_add(L, checked_mul(K(l), k - 1 + diff));
    }
    w.L[q] = L;
  }

  // Minimal r_0 >= 0 with every r_q >= 1.
  auto r_of = [&](std::size_t q, std::int64_t r0) {
    const std::int64_t a = query.alpha[q - 1];
    return checked_sub(checked_add(checked_mul(std::llabs(a), checked_sub(checked_add(w.L[0], r0), query.b[0])),
                                   sign(a) * query.b[q]),
                       w.L[q]);
  };
  std::int64_t r0 = 0;
  for (;;) {
    bool ok = true;
    for (std::size_t q = 1; q < v; ++q) ok = ok && r_of(q, r0) >= 1;
    if (ok) break;
    ++r0;
  }
  w.r.assign(v, 0);
  w.r[0] = r0;
  for (std::size_t q = 1; q < v; ++q) w.r[q] = r_of(q, r0);

  int z = 0;
  for (std::size_t q = 0; q < v; ++q)
    z = std::max<int>(z, static_cast<int>(digits[q].size() + w.r[q] + 1));
  w.z = z;
  w.beta = Rational(1) / pow(Rational(p.t), static_cast<int>(v) * z);

  RankOneSpec spec = tq.spec;
  const Tower tower = build_tower(spec, n + z);
  const Height hn = tower.height(n);
  auto unit = [&](int l) { return checked_add(checked_mul(checked_pow(k, l), hn), K(l)); };
  auto elem = [&](int sub, int l) { return checked_mul(p.phi[static_cast<std::size_t>(sub)], unit(l)); };

  MatchWitness& mw = w.match;
  mw.baseStage = n;
  mw.stage = n + z;
  mw.aSummands.assign(v, std::vector<Height>(static_cast<std::size_t>(z), 0));
  mw.dSummands.assign(v, std::vector<Height>(static_cast<std::size_t>(z), 0));
  for (std::size_t q = 0; q < v; ++q) {
    const bool negative = q > 0 && query.alpha[q - 1] < 0;
    auto& as = negative ? mw.dSummands[q] : mw.aSummands[q];
    auto& ds = negative ? mw.aSummands[q] : mw.dSummands[q];
    const int len = static_cast<int>(digits[q].size());
    for (int l = 0; l < len; ++l) {
      as[static_cast<std::size_t>(l)] = elem(w.digitPairs[q][static_cast<std::size_t>(l)].first, l);
      ds[static_cast<std::size_t>(l)] = elem(w.digitPairs[q][static_cast<std::size_t>(l)].second, l);
    }
    for (int l = len; l < len + w.r[q]; ++l) {
      as[static_cast<std::size_t>(l)] = 0;
      ds[static_cast<std::size_t>(l)] = elem(p.t - 1, l);
    }
    const int last = len + static_cast<int>(w.r[q]);
    as[static_cast<std::size_t>(last)] = elem(unitPair.first, last);
    ds[static_cast<std::size_t>(last)] = elem(unitPair.second, last);
  }
  std::vector<std::int64_t> alphaFull{1};
  alphaFull.insert(alphaFull.end(), query.alpha.begin(), query.alpha.end());
  for (std::size_t q = 0; q < v; ++q) {
    Height sa = 0, sd = 0;
    for (int l = 0; l < z; ++l) {
      sa = checked_add(sa, mw.aSummands[q][static_cast<std::size_t>(l)]);
      sd = checked_add(sd, mw.dSummands[q][static_cast<std::size_t>(l)]);
    }
    mw.a.push_back(sa);
    mw.d.push_back(sd);
    mw.residuals.push_back(Rational(BigInt(sa) - sd - query.b[q], BigInt(alphaFull[q])));
  }
  mw.shift = Rational(0) - mw.residuals[0];

  // Identity a_q - d_q = alpha_q (a_0 - d_0 - b_0) + b_q and genuine membership.
  const BigInt base0 = BigInt(mw.a[0]) - mw.d[0] - query.b[0];
  bool identity = true;
  json perCoord = json::array();
  for (std::size_t q = 0; q < v; ++q) {
    const BigInt lhs = BigInt(mw.a[q]) - mw.d[q];
    const BigInt rhs = BigInt(alphaFull[q]) * base0 + query.b[q];
    const bool eq = lhs == rhs;
    const auto da = decompose_descendant(tower, LevelRef{n, 0}, n + z, mw.a[q]);
    const auto dd = decompose_descendant(tower, LevelRef{n, 0}, n + z, mw.d[q]);
    const bool members = da && dd && *da == mw.aSummands[q] && *dd == mw.dSummands[q];
    identity = identity && eq && members;
    perCoord.push_back(json{{"q", q},
                            {"alpha", alphaFull[q]},
                            {"a", mw.a[q]},
                            {"d", mw.d[q]},
                            {"aMinusD", lhs.str()},
                            {"identity", eq},
                            {"descendants", members},
                            {"L", w.L[q]},
                            {"r", w.r[q]}});
  }
  if (!identity || !mw.verify(tower, alphaFull, query.b))
    throw Error(ErrorCode::PreconditionViolated, "power weak mixing witness failed to verify");

  PwmReport out;
  out.witness = w;
  out.certificate = make_certificate(
      "pwm-witness", spec, json{{"alpha", query.alpha}, {"b", query.b}, {"baseStage", n}});
  out.certificate.verdict = Verdict::Holds;
  json pairs = json::array();
  for (const auto& cp : w.digitPairs) {
    json row = json::array();
    for (const auto& [x, y] : cp) row.push_back(json::array({x, y}));
    pairs.push_back(row);
  }
  out.certificate.evidence = json{{"gamma", json{{"n", w.gamma.n}, {"m", w.gamma.m}, {"gamma", gamma}}},
                                  {"hn", hn},
                                  {"digitPairs", pairs},
                                  {"L", w.L},
                                  {"r", w.r},
                                  {"z", z},
                                  {"beta", to_json(w.beta)},
                                  {"coordinates", perCoord},
                                  {"residual", to_json(mw.residuals[0])}};
  return out;
}

NonErgodicReport non_ergodic_check(const RankOneSpec& spec, const NonErgodicQuery& query) {
  const std::size_t v = query.alpha.size();
  if (v == 0 || query.b.size() != v) throw Error(ErrorCode::LengthMismatch, "alpha and b lengths differ");
  const int i = query.baseStage;
  const int growthHorizon = query.growthHorizon > 0 ? query.growthHorizon : query.horizon;
  const Tower tower = build_tower(spec, std::max(query.horizon, growthHorizon));
  for (std::int64_t x : query.b)
    if (x < 0 || x >= tower.height(i))
      throw Error(ErrorCode::ParamOutOfRange, "b entries must lie in [0, h_i)");

  NonErgodicReport out;
  out.certificate = make_certificate("non-ergodic", spec,
                                     json{{"alpha", query.alpha},
                                          {"b", query.b},
                                          {"baseStage", i},
                                          {"horizon", query.horizon},
                                          {"growthHorizon", growthHorizon}});
  json growth = json::array();
  bool growthHolds = true;
  for (int n = 1; n <= growthHorizon; ++n) {
    const Height md = tower.max_descendant(0, n);
    const bool ok = tower.height(n) >= checked_add(md, 2);
    growthHolds = growthHolds && ok;
    out.growth.emplace_back(n, ok);
    growth.push_back(json{{"n", n}, {"h", tower.height(n)}, {"maxD", md}, {"holds", ok}});
  }

  const bool vacuous = std::all_of(query.b.begin(), query.b.end(), [&](std::int64_t x) { return x == query.b[0]; });
  if (vacuous) {
    out.certificate.verdict = Verdict::Inconclusive;
    out.certificate.evidence = json{{"growth", growth}, {"growthHolds", growthHolds},
                                    {"obstruction", "b entries all equal, the check is vacuous"}};
    return out;
  }

  json fractions = json::array();
  bool allZero = true;
  for (int j = i + 1; j <= query.horizon; ++j) {
    StageFraction f = matched_tuple_fraction(tower, query.alpha, query.b, i, j, false);
    allZero = allZero && f.matched == 0;
    fractions.push_back(stage_fraction_json(f));
    out.fractions.push_back(std::move(f));
  }

  // Congruence obstruction: every element of D - D is a multiple of g, so a
  // common quotient needs alpha_l n = -b_l (mod g) for all l.
  std::int64_t g = 0;
  const auto d = descendant_heights(tower, LevelRef{i, 0}, query.horizon);
  for (Height x : d) g = std::gcd(g, x - d.front());
  bool familyWide = false;
  if (const auto* tp = std::get_if<TQParams>(&spec.family)) {
    std::int64_t gp = 0;
    for (int c : tp->phi) gp = std::gcd<std::int64_t>(gp, c);
    if (gp > 1) {
      g = gp;
      familyWide = true;
    }
  }
  bool solvable = true;
  if (g > 1) {
    solvable = false;
    for (std::int64_t n = 0; n < g && !solvable; ++n) {
      bool all = true;
      for (std::size_t l = 0; l < v && all; ++l) {
        const std::int64_t r = ((query.alpha[l] * n + query.b[l]) % g + g) % g;
        all = r == 0;
      }
      solvable = all;
    }
  }
  out.structural = json{{"modulus", g},
                        {"congruenceSolvable", solvable},
                        {"allStages", familyWide && !solvable},
                        {"reason", !solvable ? "every element of D - D is divisible by the modulus and "
                                               "alpha_l n = -b_l has no common solution"
                                             : "no congruence obstruction"}};
  out.certificate.evidence = json{{"growth", growth},
                                  {"growthHolds", growthHolds},
                                  {"fractions", fractions},
                                  {"structural", out.structural}};
  if (allZero) {
    out.certificate.verdict = Verdict::Fails;
    out.certificate.evidence["scope"] = (familyWide && !solvable) ? "identically zero at every stage"
                                                                  : "zero at every tested stage";
  } else {
    out.certificate.verdict = Verdict::Holds;
  }
  return out;
}

AsymmetryReport asymmetry_statistic(const RankOneSpec& spec, const AsymmetryQuery& query) {
  const LevelRef I = query.level;
  if (I.stage < 1) throw Error(ErrorCode::StageTooLow, "the level must come from a column C_i with i >= 1");
  if (query.n < I.stage) throw Error(ErrorCode::PreconditionViolated, "n must be at least the level's stage");
  if (query.evalStage <= query.n) throw Error(ErrorCode::PreconditionViolated, "evaluation stage must exceed n");
  const int adjH = query.adjacencyHorizon > 0 ? query.adjacencyHorizon : query.evalStage;
  const Tower tower = build_tower(spec, std::max(query.evalStage, adjH));
  if (I.height < 0 || I.height >= tower.height(I.stage))
    throw Error(ErrorCode::ParamOutOfRange, "level height outside its column");
  const Height h = tower.height(query.n);
  const std::int64_t off = query.shifted ? 1 : 0;
  const std::vector<std::int64_t> zeroExp{off, h + 1 + off, 2 * h + 1 + off};
  const std::vector<std::int64_t> fwdExp{0, h, 2 * h + 1};
  const Rational muI = tower.level_width(I.stage);

  auto normalize = [&](const IntersectionResult& r) {
    return MeasureInterval{r.measure.confirmed / muI, r.measure.unresolved / muI};
  };
  const auto zr = intersection_measure(tower, I, zeroExp, query.evalStage);
  const auto fr = intersection_measure(tower, I, fwdExp, query.evalStage);

  AsymmetryReport out;
  out.zeroSide = normalize(zr);
  out.forwardSide = normalize(fr);
  json adj = json::array();
  out.adjacency = true;
  for (int j = I.stage; j <= adjH; ++j) {
    const auto d = descendant_heights(tower, I, j);
    bool clear = true;
    for (Height x : d)
      if (std::binary_search(d.begin(), d.end(), x + 1)) {
        clear = false;
        break;
      }
    out.adjacency = out.adjacency && clear;
    adj.push_back(json{{"j", j}, {"noAdjacentLevels", clear}});
  }
  const MeasureInterval rawZero = out.zeroSide;
  if (out.adjacency && out.zeroSide.confirmed.is_zero()) {
    out.zeroSide = MeasureInterval{Rational(0), Rational(0)};
    out.zeroUpgraded = true;
  }
  out.certificate = make_certificate("asymmetry", spec,
                                     json{{"level", to_json(I)},
                                          {"n", query.n},
                                          {"evalStage", query.evalStage},
                                          {"adjacencyHorizon", adjH},
                                          {"shifted", query.shifted}});
  out.certificate.evidence = json{{"zeroSideExponents", zeroExp},
                                  {"forwardSideExponents", fwdExp},
                                  {"zeroSideRaw", to_json(rawZero)},
                                  {"zeroSide", to_json(out.zeroSide)},
                                  {"forwardSide", to_json(out.forwardSide)},
                                  {"adjacency", adj},
                                  {"zeroUpgraded", out.zeroUpgraded},
                                  {"confirmedForward", fr.confirmedCount},
                                  {"descendants", fr.descendantCount}};
  out.certificate.verdict =
      out.zeroSide.upper() < out.forwardSide.lower() ? Verdict::Holds : Verdict::Inconclusive;
  return out;
}

MixingReport mixing_decay(const RankOneSpec& spec, const MixingQuery& query) {
  const int i = query.levelStage;
  const int n = query.windowStage;
  if (query.levels.empty()) throw Error(ErrorCode::PreconditionViolated, "F must contain at least one level");
  if (n < i) throw Error(ErrorCode::PreconditionViolated, "window stage must be at least the level stage");
  if (query.maxExtraStages < 1) throw Error(ErrorCode::ParamOutOfRange, "need at least one evaluation stage");

  const RankOneSpec valid = validate_spec(spec);
  // Build as far as heights fit; later stages are simply unavailable.
  std::optional<Tower> built;
  for (int s = n + query.maxExtraStages; s >= n + 1 && !built; --s) {
    try {
      built = Tower::build(valid, s);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::StageUnavailable && e.code() != ErrorCode::Overflow) throw;
    }
  }
  if (!built) throw Error(ErrorCode::StageUnavailable, "stage " + std::to_string(n + 1) + " is unavailable");
  const Tower& tower = *built;
  const int maxStage = tower.stage_count();
  for (Height l : query.levels)
    if (l < 0 || l >= tower.height(i)) throw Error(ErrorCode::ParamOutOfRange, "level height outside its column");

  MixingReport out;
  const auto& H = tower.height_set(n);
  const Height hn = tower.height(n);
  std::vector<Height> S;
  if (const auto z = partner_distance(H)) {
    for (std::int64_t g : {*z, *z + 1}) {
      const auto ps = partner_set(H, g);
      for (Height x : ps.members) {
        S.push_back(x);
        S.push_back(x - g);
      }
    }
    std::sort(S.begin(), S.end());
    S.erase(std::unique(S.begin(), S.end()), S.end());
  }
  std::vector<Height> R;
  std::set_difference(H.begin(), H.end(), S.begin(), S.end(), std::back_inserter(R));
  out.heightSetSize = H.size();
  out.delta = Rational(BigInt(S.size()), BigInt(H.size()));
  out.bound = std::max(Rational::of(1, static_cast<std::int64_t>(H.size())), out.delta);

  const bool spacerOk = tower.stage(n).s.back() >= checked_add(H.back(), hn);
  const SeparationVerdict sep = separation_check(H, hn, 1, std::span<const Height>(R));
  out.hypothesesMet = spacerOk && sep.holds;
  out.hypotheses = json{{"rightSpacer", tower.stage(n).s.back()},
                        {"rightSpacerRequired", checked_add(H.back(), hn)},
                        {"rightSpacerOk", spacerOk},
                        {"separatedPart", R},
                        {"partnerPart", S},
                        {"separationHolds", sep.holds}};
  if (sep.witness) out.hypotheses["separationWitness"] = std::vector<Height>(sep.witness->begin(), sep.witness->end());

  const auto dn = descendants_of_levels(tower, i, query.levels, n);
  out.windowLow = dn.back() - dn.front();
  out.windowHigh = max_descendant_of_levels(tower, i, query.levels, n + 1);

  std::vector<std::int64_t> ms = query.m;
  if (ms.empty()) {
    const std::int64_t span = out.windowHigh - out.windowLow;
    if (query.samples <= 0 || query.samples >= span) {
      for (std::int64_t m = out.windowLow + 1; m <= out.windowHigh; ++m) ms.push_back(m);
    } else {
      const int s = std::max(query.samples, 2);
      for (int t = 0; t < s; ++t) {
        const std::int64_t m = out.windowLow + 1 + (span - 1) * t / (s - 1);
        if (ms.empty() || ms.back() != m) ms.push_back(m);
      }
    }
  }

  const Rational muF = Rational(static_cast<std::int64_t>(query.levels.size())) * tower.level_width(i);
  std::vector<std::vector<Height>> desc(static_cast<std::size_t>(maxStage + 1));
  std::uint64_t work = 0;
  for (int j = n + 1; j <= maxStage; ++j) {
    desc[static_cast<std::size_t>(j)] = descendants_of_levels(tower, i, query.levels, j);
    work = saturating_mul(desc[static_cast<std::size_t>(j)].size(), ms.size());
    check_budget(work, "mixing evaluation");
  }

  bool anyFail = false;
  bool allWithin = true;
  json rows = json::array();
  for (std::int64_t m : ms) {
    MixingRow row;
    row.m = m;
    row.inWindow = m > out.windowLow && m <= out.windowHigh;
    const std::vector<std::int64_t> exps{0, -m};
    for (int j = n + 1; j <= maxStage; ++j) {
      const auto r = intersection_measure_of_set(tower, desc[static_cast<std::size_t>(j)], exps, j);
      row.evalStage = j;
      row.ratio = MeasureInterval{r.measure.confirmed / muF, r.measure.unresolved / muF};
      if (r.measure.exact()) break;
    }
    row.withinBound = row.ratio.upper() <= out.bound;
    if (row.inWindow) {
      anyFail = anyFail || row.ratio.lower() > out.bound;
      allWithin = allWithin && row.withinBound;
    }
    rows.push_back(json{{"m", m},
                        {"evalStage", row.evalStage},
                        {"inWindow", row.inWindow},
                        {"ratio", to_json(row.ratio)},
                        {"withinBound", row.withinBound}});
    out.rows.push_back(row);
  }

  out.certificate = make_certificate("mixing-decay", spec,
                                     json{{"levelStage", i}, {"levels", query.levels}, {"windowStage", n}});
  out.certificate.evidence = json{{"windowLowExclusive", out.windowLow},
                                  {"windowHigh", out.windowHigh},
                                  {"bound", to_json(out.bound)},
                                  {"delta", to_json(out.delta)},
                                  {"heightSetSize", out.heightSetSize},
                                  {"hypotheses", out.hypotheses},
                                  {"rows", rows}};
  if (!out.hypothesesMet) {
    out.certificate.verdict = Verdict::Inconclusive;
    out.certificate.evidence["obstruction"] = "HypothesisUnmet";
  } else if (anyFail) {
    out.certificate.verdict = Verdict::Fails;
  } else if (allWithin) {
    out.certificate.verdict = Verdict::Holds;
  } else {
    out.certificate.verdict = Verdict::Inconclusive;
    out.certificate.evidence["obstruction"] = "unresolved mass at the last available stage";
  }
  return out;
}

}  // namespace ranklab
