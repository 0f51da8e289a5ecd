#pragma once

#include "ranklab/construction.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

namespace ranklab {

struct DescendantSet {
  LevelRef base;
  int stage = 0;
  std::vector<Height> heights;  // sorted, one entry per sublevel
};

DescendantSet descendant_set(const Tower& tower, LevelRef base, int j);
DescendantSet descendant_set(const RankOneSpec& spec, LevelRef base, int j);

/// Splits a stage-j descendant of `base` into its height-set summands
/// (one per stage base.stage..j-1). Returns nullopt if `value` is not a
/// descendant. Works without materializing D(base, j).
std::optional<std::vector<Height>> decompose_descendant(const Tower& tower, LevelRef base, int j, Height value);

/// Multiplicities of d0 - d1 over ordered pairs of D.
struct DifferenceMultiset {
  std::map<std::int64_t, std::uint64_t> counts;

  std::uint64_t count(std::int64_t v) const;
};

DifferenceMultiset difference_multiset(std::span<const Height> d);

enum class PartnerMode {
  Lower,  // x with x - z in H (the default reading)
  Upper,  // x with x + z in H
};

struct PartnerSet {
  std::int64_t z = 0;
  std::vector<Height> members;
  Rational delta;  // |members| / |H|
};

PartnerSet partner_set(std::span<const Height> h, std::int64_t z, PartnerMode mode = PartnerMode::Lower);

/// The partner distance of a stage: the z >= 1 for which S(z) and S(z+1) are
/// nonempty and of equal size, preferring the largest |S(z)| and then the
/// smallest z. nullopt when the stage carries no partner structure.
std::optional<std::int64_t> partner_distance(std::span<const Height> h);

struct ApSearchResult {
  int longest = 0;                          // l*: longest run x, 2x, ..., l x inside D - D
  std::optional<std::int64_t> witness;      // smallest x attaining l*
  std::map<std::int64_t, int> runs;         // x -> run length (capped at maxLen)
};

ApSearchResult ap_search(std::span<const Height> d, int maxLen);

/// Coefficient alphabet A = {phi(0), ..., phi(t-1)} in base k.
struct DigitAlphabet {
  int k = 0;
  std::vector<int> a;      // sorted coefficients
  std::vector<int> diffs;  // sorted A - A

  static DigitAlphabet make(int k, std::vector<int> coefficients);
  /// 0 in A, max A = k - 1 and consecutive gaps in {1, 2}.
  bool admissible() const;
  bool contains_diff(int v) const;
};

/// Every admissible alphabet for base k, in lexicographic order.
std::vector<DigitAlphabet> admissible_alphabets(int k);

struct Membership {
  bool member = false;
  std::vector<int> digits;  // c_0..c_{n-1}, target = sum k^l c_l, when member
};

/// Decides target in D(n)' = sum_{l<n} k^l (A - A) by a digit recursion over
/// remainders. Digits are tried from largest to smallest at each position.
Membership sumset_membership(const DigitAlphabet& alphabet, int n, std::int64_t target);

/// Explicit D(n)' as a sorted vector (test and brute-force use; size <= (2k-1)^n).
std::vector<std::int64_t> enumerate_truncated_sumset(const DigitAlphabet& alphabet, int n);

struct GapCount {
  int g = 0;                          // |[k-1] \ (A - A)|
  std::int64_t recursion = 0;         // lambda_n from lambda_{n+1} = (2g+1) lambda_n + g
  std::int64_t bruteForce = 0;        // |[k^n - 1] \ D(n)'|
  std::vector<std::int64_t> missing;  // the uncovered values, ascending
  bool agree() const { return recursion == bruteForce; }
};

GapCount gap_count(const DigitAlphabet& alphabet, int n);

struct CoverageVerdicts {
  bool unitDifference = false;  // 1 in A - A
  bool lowerHalf = false;       // [ceil(k/2)] in A - A (vacuously true without a unit difference)
  bool parity = false;          // {z <= k-1 : z = k-1 mod 2} in A - A
  bool scaledLowerHalf = false; // [ceil(k/2) k^(n-1)] in D(n)'
  bool parityAllStages = false; // elements of [k^n - 1] with the parity of k-1 in D(n)'
  std::vector<std::int64_t> counterexamples;

  bool all_hold() const { return lowerHalf && parity && scaledLowerHalf && parityAllStages; }
};

CoverageVerdicts coverage_checks(const DigitAlphabet& alphabet, int n);

struct GammaWitness {
  int n = 0;
  int m = 0;
  std::int64_t gamma = 0;
  Membership anchor;                   // digits of k^m - gamma
  std::vector<Membership> scaled;      // digits of k^n - gamma * beta, per beta
  std::vector<std::int64_t> betas;
};

/// Lexicographically least (n, m, gamma) with k^m - gamma in D(m)' and
/// k^n - gamma beta in D(n)' for every beta in B, searching n, m <= the horizon.
GammaWitness gamma_search(const DigitAlphabet& alphabet, std::span<const std::int64_t> betas, int maxN = 6,
                          int maxM = 6);

}  // namespace ranklab
