#include "ranklab/sumsets.hpp"

#include <algorithm>
#include <cstdlib>
#include <functional>
#include <set>
#include <string>

namespace ranklab {

DescendantSet descendant_set(const Tower& tower, LevelRef base, int j) {
  DescendantSet out;
  out.base = base;
  out.stage = j;
  out.heights = descendant_heights(tower, base, j);
  return out;
}

DescendantSet descendant_set(const RankOneSpec& spec, LevelRef base, int j) {
  if (j < base.stage) throw Error(ErrorCode::StageTooLow, "j below level stage");
  return descendant_set(Tower::build(spec, j), base, j);
}

std::optional<std::vector<Height>> decompose_descendant(const Tower& tower, LevelRef base, int j, Height value) {
  if (j < base.stage) throw Error(ErrorCode::StageTooLow, "j below level stage");
  std::vector<Height> summands(static_cast<std::size_t>(j - base.stage));
  Height rest = value;
  for (int q = j - 1; q >= base.stage; --q) {
    const auto& hs = tower.height_set(q);
    auto it = std::upper_bound(hs.begin(), hs.end(), rest);
    if (it == hs.begin()) return std::nullopt;
    const Height x = *std::prev(it);
    if (rest - x >= tower.height(q)) return std::nullopt;
    summands[static_cast<std::size_t>(q - base.stage)] = x;
    rest -= x;
  }
  if (rest != base.height) return std::nullopt;
  return summands;
}

std::uint64_t DifferenceMultiset::count(std::int64_t v) const {
  auto it = counts.find(v);
  return it == counts.end() ? 0 : it->second;
}

DifferenceMultiset difference_multiset(std::span<const Height> d) {
  DifferenceMultiset out;
  for (Height a : d)
    for (Height b : d) ++out.counts[a - b];
  return out;
}

PartnerSet partner_set(std::span<const Height> h, std::int64_t z, PartnerMode mode) {
  if (z < 0) throw Error(ErrorCode::PreconditionViolated, "partner distance must be nonnegative");
  PartnerSet out;
  out.z = z;
  for (Height x : h) {
    const Height partner = mode == PartnerMode::Lower ? x - z : x + z;
    if (std::binary_search(h.begin(), h.end(), partner)) out.members.push_back(x);
  }
  out.delta = h.empty() ? Rational(0)
                        : Rational::of(static_cast<std::int64_t>(out.members.size()),
                                       static_cast<std::int64_t>(h.size()));
  return out;
}

std::optional<std::int64_t> partner_distance(std::span<const Height> h) {
  std::map<std::int64_t, std::size_t> diffCount;
  for (std::size_t a = 0; a < h.size(); ++a)
    for (std::size_t b = 0; b < a; ++b) ++diffCount[h[a] - h[b]];
  std::optional<std::int64_t> best;
  std::size_t bestSize = 0;
  for (const auto& [z, c] : diffCount) {
    auto next = diffCount.find(z + 1);
    if (next == diffCount.end() || next->second != c) continue;
    if (c > bestSize) {
      bestSize = c;
      best = z;
    }
  }
  return best;
}

ApSearchResult ap_search(std::span<const Height> d, int maxLen) {
  if (maxLen < 1) throw Error(ErrorCode::PreconditionViolated, "maxLen must be at least 1");
  std::vector<std::int64_t> positive;
  for (Height a : d)
    for (Height b : d)
      if (a > b) positive.push_back(a - b);
  std::sort(positive.begin(), positive.end());
  positive.erase(std::unique(positive.begin(), positive.end()), positive.end());
  auto contains = [&](std::int64_t v) { return std::binary_search(positive.begin(), positive.end(), v); };

  ApSearchResult out;
  for (std::int64_t x : positive) {
    int len = 1;
    while (len < maxLen && contains(x * (len + 1))) ++len;
    out.runs[x] = len;
    if (len > out.longest) {
      out.longest = len;
      out.witness = x;
    }
  }
  return out;
}

DigitAlphabet DigitAlphabet::make(int k, std::vector<int> coefficients) {
  DigitAlphabet out;
  out.k = k;
  std::sort(coefficients.begin(), coefficients.end());
  coefficients.erase(std::unique(coefficients.begin(), coefficients.end()), coefficients.end());
  out.a = std::move(coefficients);
  std::set<int> diffs;
  for (int x : out.a)
    for (int y : out.a) diffs.insert(x - y);
  out.diffs.assign(diffs.begin(), diffs.end());
  return out;
}

bool DigitAlphabet::admissible() const {
  if (k < 2 || a.empty() || a.front() != 0 || a.back() != k - 1) return false;
  for (std::size_t i = 1; i < a.size(); ++i) {
    const int gap = a[i] - a[i - 1];
    if (gap < 1 || gap > 2) return false;
  }
  return true;
}

bool DigitAlphabet::contains_diff(int v) const { return std::binary_search(diffs.begin(), diffs.end(), v); }

std::vector<DigitAlphabet> admissible_alphabets(int k) {
  std::vector<DigitAlphabet> out;
  std::vector<int> cur{0};
  std::function<void()> rec = [&]() {
    if (cur.back() == k - 1) {
      out.push_back(DigitAlphabet::make(k, cur));
      return;
    }
    for (int gap : {1, 2}) {
      if (cur.back() + gap > k - 1) continue;
      cur.push_back(cur.back() + gap);
      rec();
      cur.pop_back();
    }
  };
  if (k >= 2) rec();
  return out;
}

namespace {

std::int64_t floor_mod(std::int64_t a, std::int64_t m) {
  std::int64_t r = a % m;
  return r < 0 ? r + m : r;
}

}  // namespace

Membership sumset_membership(const DigitAlphabet& alphabet, int n, std::int64_t target) {
  if (n < 1) throw Error(ErrorCode::PreconditionViolated, "n must be at least 1");
  const std::int64_t k = alphabet.k;
  const std::int64_t maxDigit = alphabet.diffs.empty() ? 0 : alphabet.diffs.back();
  // reach[l] = largest |remainder| still representable with n - l digits left.
  std::vector<std::int64_t> reach(static_cast<std::size_t>(n) + 1, 0);
  for (int l = n - 1; l >= 0; --l) reach[l] = checked_add(maxDigit, checked_mul(k, reach[l + 1]));

  // Remainders stay within reach[l], so the number of distinct states per
  // position is bounded by the carry range; dead states are memoized.
  std::set<std::pair<int, std::int64_t>> dead;
  Membership out;
  std::vector<int> digits(static_cast<std::size_t>(n));
  std::function<bool(int, std::int64_t)> solve = [&](int pos, std::int64_t rem) -> bool {
    if (pos == n) return rem == 0;
    if (std::llabs(rem) > reach[pos]) return false;
    if (dead.count({pos, rem})) return false;
    const std::int64_t residue = floor_mod(rem, k);
    for (auto it = alphabet.diffs.rbegin(); it != alphabet.diffs.rend(); ++it) {
      const std::int64_t c = *it;
      if (floor_mod(c, k) != residue) continue;
      digits[static_cast<std::size_t>(pos)] = static_cast<int>(c);
      if (solve(pos + 1, (rem - c) / k)) return true;
    }
    dead.insert({pos, rem});
    return false;
  };
  out.member = solve(0, target);
  if (out.member) out.digits = digits;
  return out;
}

std::vector<std::int64_t> enumerate_truncated_sumset(const DigitAlphabet& alphabet, int n) {
  std::set<std::int64_t> cur{0};
  std::int64_t scale = 1;
  for (int l = 0; l < n; ++l) {
    std::set<std::int64_t> next;
    for (std::int64_t x : cur)
      for (int c : alphabet.diffs) next.insert(x + scale * c);
    cur = std::move(next);
    scale = checked_mul(scale, alphabet.k);
  }
  return {cur.begin(), cur.end()};
}

namespace {

void require_admissible(const DigitAlphabet& alphabet) {
  if (!alphabet.admissible())
    throw Error(ErrorCode::PreconditionViolated,
                "alphabet must contain 0 and k-1 with consecutive gaps of 1 or 2");
}

}  // namespace

GapCount gap_count(const DigitAlphabet& alphabet, int n) {
  require_admissible(alphabet);
  if (n < 1) throw Error(ErrorCode::PreconditionViolated, "n must be at least 1");
  if (!alphabet.contains_diff(1)) throw Error(ErrorCode::PreconditionViolated, "A - A lacks the difference 1");
  GapCount out;
  for (int z = 0; z <= alphabet.k - 1; ++z)
    if (!alphabet.contains_diff(z)) ++out.g;
  std::int64_t lambda = out.g;
  for (int l = 1; l < n; ++l) lambda = checked_add(checked_mul(2 * out.g + 1, lambda), out.g);
  out.recursion = lambda;

  const auto sumset = enumerate_truncated_sumset(alphabet, n);
  const std::int64_t top = checked_pow(alphabet.k, n) - 1;
  for (std::int64_t z = 0; z <= top; ++z)
    if (!std::binary_search(sumset.begin(), sumset.end(), z)) out.missing.push_back(z);
  out.bruteForce = static_cast<std::int64_t>(out.missing.size());
  return out;
}

CoverageVerdicts coverage_checks(const DigitAlphabet& alphabet, int n) {
  require_admissible(alphabet);
  if (n < 1) throw Error(ErrorCode::PreconditionViolated, "n must be at least 1");
  const int k = alphabet.k;
  const int half = (k + 1) / 2;
  CoverageVerdicts out;
  out.unitDifference = alphabet.contains_diff(1);

  out.lowerHalf = true;
  if (out.unitDifference)
    for (int z = 0; z <= half; ++z)
      if (!alphabet.contains_diff(z)) {
        out.lowerHalf = false;
        out.counterexamples.push_back(z);
      }
  out.parity = true;
  for (int z = 0; z <= k - 1; ++z)
    if ((z - (k - 1)) % 2 == 0 && !alphabet.contains_diff(z)) {
      out.parity = false;
      out.counterexamples.push_back(z);
    }

  const auto sumset = enumerate_truncated_sumset(alphabet, n);
  auto in = [&](std::int64_t v) { return std::binary_search(sumset.begin(), sumset.end(), v); };
  out.scaledLowerHalf = true;
  if (out.unitDifference) {
    const std::int64_t top = checked_mul(half, checked_pow(k, n - 1));
    for (std::int64_t z = 0; z <= top; ++z)
      if (!in(z)) {
        out.scaledLowerHalf = false;
        out.counterexamples.push_back(z);
      }
  }
  out.parityAllStages = true;
  const std::int64_t top = checked_pow(k, n) - 1;
  for (std::int64_t z = (k - 1) % 2; z <= top; z += 2)
    if (!in(z)) {
      out.parityAllStages = false;
      out.counterexamples.push_back(z);
    }
  return out;
}

GammaWitness gamma_search(const DigitAlphabet& alphabet, std::span<const std::int64_t> betas, int maxN, int maxM) {
  require_admissible(alphabet);
  if (alphabet.k < 3) throw Error(ErrorCode::PreconditionViolated, "gamma search needs k >= 3");
  if (!alphabet.contains_diff(1)) throw Error(ErrorCode::PreconditionViolated, "A - A lacks the difference 1");
  if (betas.empty()) throw Error(ErrorCode::PreconditionViolated, "B must be nonempty");
  for (std::int64_t b : betas)
    if (b <= 0) throw Error(ErrorCode::PreconditionViolated, "B must contain positive integers");

  for (int n = 1; n <= maxN; ++n) {
    const std::int64_t kn = checked_pow(alphabet.k, n);
    for (int m = 1; m <= maxM; ++m) {
      const std::int64_t km = checked_pow(alphabet.k, m);
      // k^m - gamma >= -(k^m - 1) bounds gamma.
      for (std::int64_t gamma = 1; gamma <= 2 * km - 1; ++gamma) {
        Membership anchor = sumset_membership(alphabet, m, km - gamma);
        if (!anchor.member) continue;
        GammaWitness w;
        w.n = n;
        w.m = m;
        w.gamma = gamma;
        w.anchor = std::move(anchor);
        bool ok = true;
        for (std::int64_t beta : betas) {
          Membership s = sumset_membership(alphabet, n, checked_sub(kn, checked_mul(gamma, beta)));
          if (!s.member) {
            ok = false;
            break;
          }
          w.scaled.push_back(std::move(s));
          w.betas.push_back(beta);
        }
        if (ok) return w;
      }
    }
  }
  throw Error(ErrorCode::HorizonExceeded, "no (n, m, gamma) within n <= " + std::to_string(maxN) +
                                              ", m <= " + std::to_string(maxM));
}

}  // namespace ranklab
