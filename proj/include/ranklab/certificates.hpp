#pragma once

#include "ranklab/construction.hpp"
#include "ranklab/families.hpp"
#include "ranklab/sumsets.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace ranklab {

enum class Verdict { Holds, Fails, Inconclusive };

std::string_view to_string(Verdict v);

/// Outcome of a finite-stage check. `evidence` carries the raw numbers the
/// verdict was derived from; rationals inside it use {"num","den"} objects.
struct Certificate {
  std::string kind;  // ap-free, ratio-bound, ergodic-fraction, ...
  nlohmann::json parameters = nlohmann::json::object();
  Verdict verdict = Verdict::Inconclusive;
  nlohmann::json evidence = nlohmann::json::object();
  std::string specFingerprint;
  std::string toolVersion;
};

/// Tuple query for products T^{alpha_0} x ... x T^{alpha_{v-1}} on the base of C_i.
struct ProductQuery {
  std::vector<std::int64_t> alpha;
  std::vector<std::int64_t> b;
  int baseStage = 0;
  int horizon = 0;
  Rational epsilon = Rational::of(1, 10);
};

struct StageFraction {
  int stage = 0;
  std::uint64_t matched = 0;
  std::uint64_t total = 0;
  Rational fraction;
};

struct FractionReport {
  std::vector<StageFraction> stages;
  Certificate certificate;
};

/// Fraction of a in D(I,j)^v with some d in D(I,j)^v and a common nonzero
/// quotient (a_l - d_l) / alpha_l, for j = i+1..horizon.
FractionReport conservativity_fraction(const RankOneSpec& spec, const ProductQuery& query);

/// Exact count of tuples admitting a common integer quotient
/// (a_l - d_l - b_l) / alpha_l (zero allowed unless excludeZero) at stage j.
StageFraction matched_tuple_fraction(const Tower& tower, std::span<const std::int64_t> alpha,
                                     std::span<const std::int64_t> b, int i, int j, bool excludeZero);

/// A matched pair of descendant tuples with per-stage summands
/// (summands[l][q - baseStage] lies in H_q).
struct MatchWitness {
  int baseStage = 0;
  int stage = 0;  // descendants taken in C_stage
  std::vector<Height> a;
  std::vector<Height> d;
  std::vector<std::vector<Height>> aSummands;
  std::vector<std::vector<Height>> dSummands;
  std::vector<Rational> residuals;  // (a_l - d_l - b_l) / alpha_l
  Rational shift;                   // n = -residual

  /// Recomputes totals, membership of every summand and residual equality.
  bool verify(const Tower& tower, std::span<const std::int64_t> alpha, std::span<const std::int64_t> b) const;
};

struct MatchingQuery {
  std::vector<int> signature;  // entries +1 / -1
  std::vector<std::int64_t> b;
  int baseStage = 0;
  int horizon = 0;                       // descendants in C_horizon
  bool enumerate = true;                 // exhaustive fraction and injectivity
  std::optional<std::vector<Height>> probe;  // explicit a tuple to match
};

struct MatchingReport {
  std::vector<std::int64_t> normalizedB;  // b' relative to the anchor coordinate
  int anchor = 0;
  int gamma = 0;                           // sum |b'_l|
  std::vector<int> labels;                 // coordinate consumed at each labelled hit
  std::uint64_t total = 0;
  std::uint64_t matchedUnique = 0;         // in W: first gamma F-hits follow the labels
  std::uint64_t matchedGreedy = 0;         // labels consumed whenever the pattern allows
  Rational uniqueFraction;
  Rational greedyFraction;
  bool injective = true;
  bool greedyInjective = true;
  std::vector<MatchWitness> samples;
  std::optional<MatchWitness> probeWitness;
  Certificate certificate;
};

/// Constructive matching for mixed products of T and T^{-1}.
MatchingReport ergodic_matching(const RankOneSpec& spec, const MatchingQuery& query);

/// Builds one a tuple that meets the label pattern on the first gamma
/// partner stages, or nullopt if the horizon is too short.
std::optional<std::vector<Height>> construct_matchable_tuple(const RankOneSpec& spec, const MatchingQuery& query);

struct PatternQuery {
  std::vector<int> signature;  // defaults to all +1 when empty
  std::vector<std::int64_t> b;
  int baseStage = 0;
  int cutoff = 0;              // J
  std::optional<Rational> dconst;  // defaults to 4^k
};

struct PatternReport {
  int k = 0;
  int gamma = 0;
  MeasureInterval muW;       // mu(W_J) / mu(I^k)
  Rational hitMass;          // mass with at least gamma F-hits by J
  Rational dconst;
  Rational bound;            // K = dconst^{-gamma}
  bool boundHolds = false;   // muW.lower >= bound * hitMass
  std::vector<nlohmann::json> stages;
  Certificate certificate;
};

PatternReport pattern_measure(const RankOneSpec& spec, const PatternQuery& query);

struct MixingQuery {
  int levelStage = 0;
  std::vector<Height> levels;      // F as heights of levels in C_levelStage
  int windowStage = 0;             // n
  std::vector<std::int64_t> m;     // explicit values, empty = sample the window
  int samples = 0;                 // 0 = every m in the window
  int maxExtraStages = 3;          // evaluation goes up to n + maxExtraStages
};

struct MixingRow {
  std::int64_t m = 0;
  int evalStage = 0;
  bool inWindow = true;
  MeasureInterval ratio;  // mu(T^m F cap F) / mu(F)
  bool withinBound = false;
};

struct MixingReport {
  std::int64_t windowLow = 0;   // exclusive
  std::int64_t windowHigh = 0;  // inclusive
  Rational bound;
  Rational delta;
  std::size_t heightSetSize = 0;
  bool hypothesesMet = false;
  nlohmann::json hypotheses;
  std::vector<MixingRow> rows;
  Certificate certificate;
};

MixingReport mixing_decay(const RankOneSpec& spec, const MixingQuery& query);

struct NpcQuery {
  int kappa = 13;
  int baseStage = 0;  // N
  int horizon = 3;    // jmax
  std::int64_t corollaryK = 0;
  Rational corollaryB = Rational::of(1, 13);
};

struct NpcReport {
  std::vector<std::pair<int, Rational>> statementRatios;   // (h_n - 2 maxD) / maxD
  std::vector<std::pair<int, std::optional<Rational>>> proofRatios;  // maxD(n+1) / (h_n - 2 maxD(n))
  std::optional<Rational> proofSup;
  std::vector<std::pair<int, int>> apLongest;  // j -> longest run, capped at kappa + 1
  nlohmann::json caseReplay;
  nlohmann::json corollary;
  Certificate certificate;
};

NpcReport npc_certificate(const RankOneSpec& spec, const NpcQuery& query);

struct PwmQuery {
  std::vector<std::int64_t> alpha;  // alpha_1..alpha_{v-1}; alpha_0 = 1
  std::vector<std::int64_t> b;      // b_0..b_{v-1}
  int baseStage = 1;
};

struct PwmWitness {
  GammaWitness gamma;
  std::vector<std::vector<std::pair<int, int>>> digitPairs;  // per coordinate (x, y) subcolumn indices
  std::vector<std::int64_t> L;
  std::vector<std::int64_t> r;
  int z = 0;
  Rational beta;
  MatchWitness match;
};

struct PwmReport {
  PwmWitness witness;
  Certificate certificate;
};

PwmReport pwm_witness(const TQConstruction& tq, const PwmQuery& query);

struct NonErgodicQuery {
  std::vector<std::int64_t> alpha;
  std::vector<std::int64_t> b;
  int baseStage = 1;
  int horizon = 5;
  int growthHorizon = 0;  // 0 = horizon
};

struct NonErgodicReport {
  std::vector<std::pair<int, bool>> growth;  // n -> h_n >= maxD(I_0, n) + 2
  std::vector<StageFraction> fractions;
  nlohmann::json structural;
  Certificate certificate;
};

NonErgodicReport non_ergodic_check(const RankOneSpec& spec, const NonErgodicQuery& query);

struct AsymmetryQuery {
  LevelRef level{1, 0};
  int n = 1;
  int evalStage = 3;
  int adjacencyHorizon = 0;  // 0 = evalStage
  bool shifted = false;      // evaluate [1, h+2, 2h+2] for the zero side
};

struct AsymmetryReport {
  MeasureInterval zeroSide;     // relative to mu(I)
  MeasureInterval forwardSide;  // relative to mu(I)
  bool adjacency = false;
  bool zeroUpgraded = false;
  Certificate certificate;
};

AsymmetryReport asymmetry_statistic(const RankOneSpec& spec, const AsymmetryQuery& query);

/// Column-level helpers shared by the checkers.
Height max_descendant_of_levels(const Tower& tower, int stage, std::span<const Height> levels, int n);
std::vector<Height> descendants_of_levels(const Tower& tower, int stage, std::span<const Height> levels, int j);

}  // namespace ranklab
