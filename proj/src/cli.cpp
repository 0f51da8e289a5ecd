#include "ranklab/cli.hpp"

#include "ranklab/certificates.hpp"
#include "ranklab/config.hpp"
#include "ranklab/serialize.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>

namespace ranklab {

using nlohmann::json;

namespace {

struct Options {
  std::string spec;
  std::optional<std::string> jsonPath;
  bool approx = false;
  unsigned jobs = 1;

  int stages = 4;
  std::string base = "0:0";
  int to = 1;
  int maxLen = 14;
  std::optional<std::int64_t> x;
  int stage = 0;
  std::optional<std::int64_t> z;
  std::string mode = "lower";

  int k = 0;
  std::string alphabet;
  int n = 1;
  std::int64_t target = 0;
  int allK = 0;
  std::string betas;
  int maxN = 6;
  int maxM = 6;

  std::string alpha = "1,1";
  std::string b;
  int baseStage = 0;
  int horizon = 2;
  std::string epsilon = "1/10";
  std::string signature = "+,-";
  std::optional<std::string> probe;
  bool noEnumerate = false;
  int cutoff = 1;
  std::optional<std::string> dconst;
  int levelStage = 0;
  std::string levels = "0";
  int windowStage = 0;
  std::optional<std::string> mValues;
  int samples = 0;
  int maxExtra = 3;
  int kappa = 13;
  std::int64_t corK = 0;
  std::string corB = "1/13";
  int growthHorizon = 0;
  std::string level = "1:0";
  int evalStage = 3;
  int adjacency = 0;
  bool shifted = false;
  std::optional<std::string> reportPath;
};

// Output of one command before the common report envelope is added.
struct CommandResult {
  json inputs = json::object();
  json result = json::object();
  json evidence = json::object();
  std::string specFingerprint = "none";
  std::optional<Verdict> verdict;
  bool propertyFails = false;  // for commands without a certificate
};

std::vector<std::int64_t> parse_ints(const std::string& s, const char* what) {
  std::vector<std::int64_t> out;
  if (s.empty()) return out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t pos = 0;
      out.push_back(std::stoll(item, &pos));
      if (pos != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw Error(ErrorCode::UsageError, std::string(what) + ": '" + item + "' is not an integer");
    }
  }
  return out;
}

std::vector<int> parse_signature(const std::string& s) {
  std::vector<int> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item == "+" || item == "1" || item == "+1")
      out.push_back(1);
    else if (item == "-" || item == "-1")
      out.push_back(-1);
    else
      throw Error(ErrorCode::UsageError, "signature entries must be + or -");
  }
  return out;
}

LevelRef parse_level(const std::string& s) {
  const auto colon = s.find(':');
  if (colon == std::string::npos) throw Error(ErrorCode::UsageError, "levels are written STAGE:HEIGHT");
  const auto parts = parse_ints(s.substr(0, colon) + "," + s.substr(colon + 1), "level");
  if (parts.size() != 2) throw Error(ErrorCode::UsageError, "levels are written STAGE:HEIGHT");
  return LevelRef{static_cast<int>(parts[0]), parts[1]};
}

Rational parse_rational(const std::string& s) {
  const auto slash = s.find('/');
  try {
    if (slash == std::string::npos) return Rational(BigInt(s), BigInt(1));
    return Rational(BigInt(s.substr(0, slash)), BigInt(s.substr(slash + 1)));
  } catch (const Error&) {
    throw;
  } catch (const std::exception&) {
    throw Error(ErrorCode::UsageError, "'" + s + "' is not a rational of the form p/q");
  }
}

RankOneSpec load_spec(const std::string& path) {
  if (path.empty()) throw Error(ErrorCode::UsageError, "--spec is required");
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open spec file '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::InvalidSpec, std::string("spec is not valid JSON: ") + e.what());
  }
  return spec_from_json(j);
}

DigitAlphabet load_alphabet(const Options& o) {
  if (o.k <= 0) throw Error(ErrorCode::UsageError, "--k is required");
  std::vector<int> a;
  for (std::int64_t v : parse_ints(o.alphabet, "alphabet")) a.push_back(static_cast<int>(v));
  if (a.empty()) throw Error(ErrorCode::UsageError, "--alphabet is required");
  return DigitAlphabet::make(o.k, a);
}

json alphabet_json(const DigitAlphabet& a) { return json{{"k", a.k}, {"a", a.a}}; }

json membership_json(const Membership& m) { return json{{"member", m.member}, {"digits", m.digits}}; }

json certificate_result(const Certificate& c) {
  return json{{"kind", c.kind}, {"verdict", to_string(c.verdict)}, {"parameters", c.parameters}};
}

void attach(CommandResult& r, const Certificate& c) {
  r.result["certificate"] = certificate_result(c);
  r.evidence = c.evidence;
  r.specFingerprint = c.specFingerprint;
  r.verdict = c.verdict;
}

struct SpecContext {
  RankOneSpec spec;
  std::string fingerprint;
};

SpecContext spec_context(const Options& o, CommandResult& r) {
  SpecContext ctx{load_spec(o.spec), ""};
  ctx.fingerprint = spec_fingerprint(ctx.spec);
  r.inputs["spec"] = spec_to_json(ctx.spec);
  r.specFingerprint = ctx.fingerprint;
  return ctx;
}

using Runner = std::function<CommandResult(const Options&)>;

CommandResult run_heights(const Options& o) {
  CommandResult r;
  const auto ctx = spec_context(o, r);
  if (o.stages < 1) throw Error(ErrorCode::UsageError, "--stages must be positive");
  r.inputs["stages"] = o.stages;
  const Tower t = Tower::build(ctx.spec, o.stages - 1);
  json heights = json::array(), sets = json::array(), widths = json::array();
  for (int n = 0; n < o.stages; ++n) {
    heights.push_back(t.height(n));
    widths.push_back(to_json(t.level_width(n)));
    if (n + 1 < o.stages) sets.push_back(t.height_set(n));
  }
  r.result = json{{"heights", heights}, {"heightSets", sets}, {"levelWidths", widths}};
  return r;
}

CommandResult run_descendants(const Options& o) {
  CommandResult r;
  const auto ctx = spec_context(o, r);
  const LevelRef base = parse_level(o.base);
  r.inputs["base"] = to_json(base);
  r.inputs["to"] = o.to;
  const Tower t = Tower::build(ctx.spec, o.to);
  const auto d = descendant_set(t, base, o.to);
  r.result = json{{"heights", d.heights}, {"count", d.heights.size()}, {"max", d.heights.back()}};
  return r;
}

CommandResult run_diffset(const Options& o) {
  CommandResult r;
  const auto ctx = spec_context(o, r);
  const LevelRef base = parse_level(o.base);
  r.inputs["base"] = to_json(base);
  r.inputs["to"] = o.to;
  const Tower t = Tower::build(ctx.spec, o.to);
  const auto d = descendant_set(t, base, o.to);
  check_budget(saturating_mul(d.heights.size(), d.heights.size()), "difference multiset");
  const auto ms = difference_multiset(d.heights);
  json counts = json::array();
  for (const auto& [v, c] : ms.counts) counts.push_back(json::array({v, c}));
  r.result = json{{"counts", counts}, {"distinct", ms.counts.size()}};
  return r;
}

CommandResult run_ap(const Options& o) {
  CommandResult r;
  const auto ctx = spec_context(o, r);
  const LevelRef base = parse_level(o.base);
  r.inputs["base"] = to_json(base);
  r.inputs["to"] = o.to;
  r.inputs["maxLen"] = o.maxLen;
  const Tower t = Tower::build(ctx.spec, o.to);
  const auto d = descendant_set(t, base, o.to);
  check_budget(saturating_mul(d.heights.size(), d.heights.size()), "difference set");
  const auto ap = ap_search(d.heights, o.maxLen);
  auto progression = [](std::int64_t x, int len) {
    std::vector<std::int64_t> p;
    for (int i = 1; i <= len; ++i) p.push_back(x * i);
    return p;
  };
  json multi = json::array();
  for (const auto& [x, len] : ap.runs)
    if (len >= 2) multi.push_back(json{{"x", x}, {"run", len}, {"progression", progression(x, len)}});
  r.result = json{{"longest", ap.longest}, {"found", ap.longest >= o.maxLen}};
  r.result["witness"] = ap.witness ? json{{"x", *ap.witness}, {"progression", progression(*ap.witness, ap.longest)}}
                                   : json(nullptr);
  if (o.x) {
    r.inputs["x"] = *o.x;
    const auto it = ap.runs.find(*o.x);
    const int len = it == ap.runs.end() ? 0 : it->second;
    r.result["query"] = json{{"x", *o.x}, {"run", len}, {"progression", progression(*o.x, len)}};
  }
  r.evidence = json{{"runsOfLengthAtLeastTwo", multi}, {"distinctPositiveDifferences", ap.runs.size()}};
  r.result["verdict"] = "n/a";
  return r;
}

CommandResult run_partners(const Options& o) {
  CommandResult r;
  const auto ctx = spec_context(o, r);
  r.inputs["stage"] = o.stage;
  r.inputs["mode"] = o.mode;
  if (o.mode != "lower" && o.mode != "upper") throw Error(ErrorCode::UsageError, "--mode is lower or upper");
  const PartnerMode mode = o.mode == "lower" ? PartnerMode::Lower : PartnerMode::Upper;
  const Tower t = Tower::build(ctx.spec, o.stage + 1);
  const auto& H = t.height_set(o.stage);
  const auto pd = partner_distance(H);
  std::optional<std::int64_t> z = o.z ? o.z : pd;
  r.result = json{{"heightSet", H}, {"partnerDistance", pd ? json(*pd) : json(nullptr)}};
  if (z) {
    if (o.z) r.inputs["z"] = *o.z;
    const auto s0 = partner_set(H, *z, mode);
    const auto s1 = partner_set(H, *z + 1, mode);
    r.result["z"] = *z;
    r.result["S_z"] = json{{"members", s0.members}, {"delta", to_json(s0.delta)}};
    r.result["S_z_plus_1"] = json{{"members", s1.members}, {"delta", to_json(s1.delta)}};
  }
  return r;
}

CommandResult run_membership(const Options& o) {
  CommandResult r;
  const auto a = load_alphabet(o);
  r.inputs = json{{"alphabet", alphabet_json(a)}, {"n", o.n}, {"target", o.target}};
  r.result = membership_json(sumset_membership(a, o.n, o.target));
  return r;
}

CommandResult run_gaps(const Options& o) {
  CommandResult r;
  const auto a = load_alphabet(o);
  r.inputs = json{{"alphabet", alphabet_json(a)}, {"n", o.n}};
  const auto g = gap_count(a, o.n);
  r.result = json{{"g", g.g}, {"recursion", g.recursion}, {"bruteForce", g.bruteForce}, {"agree", g.agree()},
                  {"missing", g.missing}};
  r.propertyFails = !g.agree();
  r.result["verdict"] = g.agree() ? "holds" : "fails";
  return r;
}

json coverage_json(const DigitAlphabet& a, const CoverageVerdicts& c) {
  return json{{"alphabet", alphabet_json(a)},
              {"unitDifference", c.unitDifference},
              {"lowerHalf", c.lowerHalf},
              {"parity", c.parity},
              {"scaledLowerHalf", c.scaledLowerHalf},
              {"parityAllStages", c.parityAllStages},
              {"counterexamples", c.counterexamples},
              {"allHold", c.all_hold()}};
}

CommandResult run_coverage(const Options& o) {
  CommandResult r;
  r.inputs["n"] = o.n;
  bool all = true;
  if (o.allK > 0) {
    r.inputs["allK"] = o.allK;
    json rows = json::array();
    std::size_t count = 0;
    for (int k = 2; k <= o.allK; ++k)
      for (const auto& a : admissible_alphabets(k)) {
        const auto c = coverage_checks(a, o.n);
        all = all && c.all_hold();
        ++count;
        if (!c.all_hold()) rows.push_back(coverage_json(a, c));
      }
    r.result = json{{"alphabetsChecked", count}, {"failures", rows}};
  } else {
    const auto a = load_alphabet(o);
    r.inputs["alphabet"] = alphabet_json(a);
    const auto c = coverage_checks(a, o.n);
    all = c.all_hold();
    r.result = coverage_json(a, c);
  }
  r.result["verdict"] = all ? "holds" : "fails";
  r.propertyFails = !all;
  return r;
}

CommandResult run_gamma(const Options& o) {
  CommandResult r;
  const auto a = load_alphabet(o);
  const auto betas = parse_ints(o.betas, "betas");
  r.inputs = json{{"alphabet", alphabet_json(a)}, {"betas", betas}, {"maxN", o.maxN}, {"maxM", o.maxM}};
  const auto g = gamma_search(a, betas, o.maxN, o.maxM);
  json scaled = json::array();
  for (const auto& m : g.scaled) scaled.push_back(membership_json(m));
  r.result = json{{"n", g.n}, {"m", g.m}, {"gamma", g.gamma}, {"anchor", membership_json(g.anchor)},
                  {"scaled", scaled}, {"betas", g.betas}};
  return r;
}

CommandResult run_conservativity(const Options& o) {
  CommandResult r;
  const auto ctx = spec_context(o, r);
  ProductQuery q;
  q.alpha = parse_ints(o.alpha, "alpha");
  q.b.assign(q.alpha.size(), 0);
  q.baseStage = o.baseStage;
  q.horizon = o.horizon;
  q.epsilon = parse_rational(o.epsilon);
  r.inputs.update(json{{"alpha", q.alpha}, {"baseStage", q.baseStage}, {"horizon", q.horizon},
                       {"epsilon", to_json(q.epsilon)}});
  const auto rep = conservativity_fraction(ctx.spec, q);
  json stages = json::array();
  for (const auto& s : rep.stages) stages.push_back(json{{"stage", s.stage}, {"fraction", to_json(s.fraction)}});
  r.result["fractions"] = stages;
  attach(r, rep.certificate);
  return r;
}

CommandResult run_ergodic_match(const Options& o) {
  CommandResult r;
  const auto ctx = spec_context(o, r);
  MatchingQuery q;
  q.signature = parse_signature(o.signature);
  q.b = parse_ints(o.b.empty() ? std::string("0,1") : o.b, "b");
  q.baseStage = o.baseStage;
  q.horizon = o.horizon;
  q.enumerate = !o.noEnumerate;
  if (o.probe) q.probe = parse_ints(*o.probe, "probe");
  r.inputs.update(json{{"signature", q.signature}, {"b", q.b}, {"baseStage", q.baseStage},
                       {"horizon", q.horizon}, {"enumerate", q.enumerate}});
  if (q.probe) r.inputs["probe"] = *q.probe;
  const auto rep = ergodic_matching(ctx.spec, q);
  r.result["gamma"] = rep.gamma;
  if (q.enumerate) {
    r.result["uniqueFraction"] = to_json(rep.uniqueFraction);
    r.result["injective"] = rep.injective;
  }
  if (rep.probeWitness) {
    r.result["probe"] = json{{"a", rep.probeWitness->a}, {"d", rep.probeWitness->d},
                             {"residual", to_json(rep.probeWitness->residuals[0])}};
  } else if (q.probe) {
    r.result["probe"] = nullptr;
  }
  attach(r, rep.certificate);
  return r;
}

CommandResult run_pattern(const Options& o) {
  CommandResult r;
  const auto ctx = spec_context(o, r);
  PatternQuery q;
  q.b = parse_ints(o.b.empty() ? std::string("0,1") : o.b, "b");
  q.signature = parse_signature(o.signature.empty() ? std::string() : o.signature);
  if (q.signature.size() != q.b.size()) q.signature.assign(q.b.size(), 1);
  q.baseStage = o.baseStage;
  q.cutoff = o.cutoff;
  if (o.dconst) q.dconst = parse_rational(*o.dconst);
  r.inputs.update(json{{"signature", q.signature}, {"b", q.b}, {"baseStage", q.baseStage}, {"cutoff", q.cutoff}});
  if (q.dconst) r.inputs["dconst"] = to_json(*q.dconst);
  const auto rep = pattern_measure(ctx.spec, q);
  r.result["muW"] = to_json(rep.muW);
  r.result["K"] = to_json(rep.bound);
  r.result["hitMass"] = to_json(rep.hitMass);
  attach(r, rep.certificate);
  return r;
}

CommandResult run_mixing(const Options& o) {
  CommandResult r;
  const auto ctx = spec_context(o, r);
  MixingQuery q;
  q.levelStage = o.levelStage;
  q.levels = parse_ints(o.levels, "levels");
  q.windowStage = o.windowStage;
  if (o.mValues) q.m = parse_ints(*o.mValues, "m");
  q.samples = o.samples;
  q.maxExtraStages = o.maxExtra;
  r.inputs.update(json{{"levelStage", q.levelStage}, {"levels", q.levels}, {"windowStage", q.windowStage},
                       {"m", q.m}, {"samples", q.samples}, {"maxExtraStages", q.maxExtraStages}});
  const auto rep = mixing_decay(ctx.spec, q);
  r.result["bound"] = to_json(rep.bound);
  r.result["rows"] = rep.rows.size();
  attach(r, rep.certificate);
  return r;
}

CommandResult run_npc(const Options& o) {
  CommandResult r;
  const auto ctx = spec_context(o, r);
  NpcQuery q;
  q.kappa = o.kappa;
  q.baseStage = o.baseStage;
  q.horizon = o.horizon;
  q.corollaryK = o.corK;
  q.corollaryB = parse_rational(o.corB);
  r.inputs.update(json{{"kappa", q.kappa}, {"baseStage", q.baseStage}, {"horizon", q.horizon},
                       {"K", q.corollaryK}, {"b", to_json(q.corollaryB)}});
  const auto rep = npc_certificate(ctx.spec, q);
  r.result["proofSup"] = rep.proofSup ? to_json(*rep.proofSup) : json(nullptr);
  attach(r, rep.certificate);
  return r;
}

CommandResult run_pwm(const Options& o) {
  CommandResult r;
  const auto ctx = spec_context(o, r);
  const auto* tp = std::get_if<TQParams>(&ctx.spec.family);
  if (!tp) throw Error(ErrorCode::PreconditionViolated, "pwm needs a tq family spec");
  const TQConstruction tq = make_tq(tp->t, tp->spacerPositions);
  PwmQuery q;
  q.alpha = parse_ints(o.alpha, "alpha");
  q.b = o.b.empty() ? std::vector<std::int64_t>(q.alpha.size() + 1, 0) : parse_ints(o.b, "b");
  q.baseStage = o.baseStage;
  r.inputs.update(json{{"alpha", q.alpha}, {"b", q.b}, {"baseStage", q.baseStage}});
  const auto rep = pwm_witness(tq, q);
  r.result["z"] = rep.witness.z;
  r.result["beta"] = to_json(rep.witness.beta);
  r.result["a"] = rep.witness.match.a;
  r.result["d"] = rep.witness.match.d;
  attach(r, rep.certificate);
  return r;
}

CommandResult run_non_ergodic(const Options& o) {
  CommandResult r;
  const auto ctx = spec_context(o, r);
  NonErgodicQuery q;
  q.alpha = parse_ints(o.alpha, "alpha");
  q.b = parse_ints(o.b.empty() ? std::string("0,1") : o.b, "b");
  q.baseStage = o.baseStage;
  q.horizon = o.horizon;
  q.growthHorizon = o.growthHorizon;
  r.inputs.update(json{{"alpha", q.alpha}, {"b", q.b}, {"baseStage", q.baseStage}, {"horizon", q.horizon},
                       {"growthHorizon", q.growthHorizon}});
  const auto rep = non_ergodic_check(ctx.spec, q);
  attach(r, rep.certificate);
  return r;
}

CommandResult run_asymmetry(const Options& o) {
  CommandResult r;
  const auto ctx = spec_context(o, r);
  AsymmetryQuery q;
  q.level = parse_level(o.level);
  q.n = o.n;
  q.evalStage = o.evalStage;
  q.adjacencyHorizon = o.adjacency;
  q.shifted = o.shifted;
  r.inputs.update(json{{"level", to_json(q.level)}, {"n", q.n}, {"evalStage", q.evalStage},
                       {"adjacencyHorizon", q.adjacencyHorizon}, {"shifted", q.shifted}});
  const auto rep = asymmetry_statistic(ctx.spec, q);
  r.result["zeroSide"] = to_json(rep.zeroSide);
  r.result["forwardSide"] = to_json(rep.forwardSide);
  r.result["adjacency"] = rep.adjacency;
  attach(r, rep.certificate);
  return r;
}

CommandResult run_validate(const Options& o) {
  CommandResult r;
  if (o.reportPath) {
    std::ifstream in(*o.reportPath);
    if (!in) throw Error(ErrorCode::IoError, "cannot open report '" + *o.reportPath + "'");
    json report;
    try {
      report = json::parse(in);
    } catch (const json::parse_error& e) {
      throw Error(ErrorCode::InvalidSpec, std::string("report is not valid JSON: ") + e.what());
    }
    const auto errors = validate_report(report);
    r.inputs["reportFingerprint"] = report.value("reportFingerprint", std::string());
    r.result = json{{"valid", errors.empty()}, {"errors", errors}};
    r.result["verdict"] = errors.empty() ? "holds" : "fails";
    r.propertyFails = !errors.empty();
    return r;
  }
  const auto ctx = spec_context(o, r);
  r.result = json{{"valid", true}, {"normalized", spec_to_json(ctx.spec)}, {"fingerprint", ctx.fingerprint}};
  if (const auto* ap = std::get_if<AsymmParams>(&ctx.spec.family)) {
    const auto built = make_asymm_construction(*ap);
    json stages = json::array();
    for (const auto& st : built.stages)
      stages.push_back(json{{"stage", st.stage}, {"r", st.r}, {"partnerStage", st.partnerStage},
                            {"triples", st.triples}, {"achievedDelta", to_json(st.achievedDelta)},
                            {"separation", st.separation.holds}, {"rightSpacerOk", st.rightSpacerOk}});
    r.evidence["asymmStages"] = stages;
  }
  return r;
}

struct Command {
  const char* name;
  const char* help;
  Runner run;
  std::function<void(CLI::App*, Options&)> options;
};

void spec_option(CLI::App* app, Options& o) { app->add_option("--spec", o.spec, "Spec file (JSON)")->required(); }

void alphabet_options(CLI::App* app, Options& o) {
  app->add_option("--k", o.k, "Base k");
  app->add_option("--alphabet", o.alphabet, "Comma separated digit alphabet A");
  app->add_option("--n", o.n, "Number of digit positions");
}

std::vector<Command> commands() {
  return {
      {"heights", "Column heights, height sets and level widths", run_heights,
       [](CLI::App* a, Options& o) {
         spec_option(a, o);
         a->add_option("--stages", o.stages, "Number of column heights h_0.. to list");
       }},
      {"descendants", "Descendant heights of a level", run_descendants,
       [](CLI::App* a, Options& o) {
         spec_option(a, o);
         a->add_option("--base", o.base, "Level STAGE:HEIGHT");
         a->add_option("--to", o.to, "Target stage j");
       }},
      {"diffset", "Difference multiset of a descendant set", run_diffset,
       [](CLI::App* a, Options& o) {
         spec_option(a, o);
         a->add_option("--base", o.base, "Level STAGE:HEIGHT");
         a->add_option("--to", o.to, "Target stage j");
       }},
      {"ap", "Progressions x, 2x, ... inside D - D", run_ap,
       [](CLI::App* a, Options& o) {
         spec_option(a, o);
         a->add_option("--base", o.base, "Level STAGE:HEIGHT");
         a->add_option("--to", o.to, "Target stage j");
         a->add_option("--max-len", o.maxLen, "Progression length searched for");
         a->add_option("--x", o.x, "Report the run of this common difference");
       }},
      {"partners", "Partner distance and partner sets of a stage", run_partners,
       [](CLI::App* a, Options& o) {
         spec_option(a, o);
         a->add_option("--stage", o.stage, "Stage n");
         a->add_option("--z", o.z, "Explicit distance z");
         a->add_option("--mode", o.mode, "lower or upper partner reading");
       }},
      {"membership", "Membership in the truncated difference sumset", run_membership,
       [](CLI::App* a, Options& o) {
         alphabet_options(a, o);
         a->add_option("--target", o.target, "Target integer");
       }},
      {"gaps", "Gap count recursion against brute force", run_gaps, alphabet_options},
      {"coverage", "Coverage lemmas for one alphabet or every admissible alphabet", run_coverage,
       [](CLI::App* a, Options& o) {
         alphabet_options(a, o);
         a->add_option("--all-k", o.allK, "Sweep all admissible alphabets with k up to this value");
       }},
      {"gamma", "Search for the common gamma", run_gamma,
       [](CLI::App* a, Options& o) {
         alphabet_options(a, o);
         a->add_option("--betas", o.betas, "Comma separated multipliers B")->required();
         a->add_option("--max-n", o.maxN, "Horizon for n");
         a->add_option("--max-m", o.maxM, "Horizon for m");
       }},
      {"conservativity", "Fraction of conservatively matched tuples", run_conservativity,
       [](CLI::App* a, Options& o) {
         spec_option(a, o);
         a->add_option("--alpha", o.alpha, "Comma separated powers");
         a->add_option("--base-stage", o.baseStage, "Stage i of the base level");
         a->add_option("--horizon", o.horizon, "Last stage j");
         a->add_option("--epsilon", o.epsilon, "Threshold p/q");
       }},
      {"ergodic-match", "Constructive matching for products of T and its inverse", run_ergodic_match,
       [](CLI::App* a, Options& o) {
         spec_option(a, o);
         a->add_option("--signature", o.signature, "Comma separated + and -");
         a->add_option("--b", o.b, "Comma separated shifts");
         a->add_option("--base-stage", o.baseStage, "Stage i of the base level");
         a->add_option("--horizon", o.horizon, "Stage of the descendants");
         a->add_option("--probe", o.probe, "Explicit a tuple");
         a->add_flag("--no-enumerate", o.noEnumerate, "Skip the exhaustive scan");
       }},
      {"pattern", "Measure of the label pattern set W", run_pattern,
       [](CLI::App* a, Options& o) {
         spec_option(a, o);
         a->add_option("--signature", o.signature, "Comma separated + and -");
         a->add_option("--b", o.b, "Comma separated shifts");
         a->add_option("--base-stage", o.baseStage, "Stage i of the base level");
         a->add_option("--cutoff", o.cutoff, "Stage cutoff J");
         a->add_option("--dconst", o.dconst, "Ratio constant p/q (default 4^k)");
       }},
      {"mixing", "Decay of mu(T^m F cap F) across a window", run_mixing,
       [](CLI::App* a, Options& o) {
         spec_option(a, o);
         a->add_option("--level-stage", o.levelStage, "Stage of the levels of F");
         a->add_option("--levels", o.levels, "Comma separated level heights");
         a->add_option("--window-stage", o.windowStage, "Stage n of the window");
         a->add_option("--m", o.mValues, "Comma separated m values");
         a->add_option("--samples", o.samples, "Evenly spaced samples (0 = whole window)");
         a->add_option("--max-extra", o.maxExtra, "Extra stages available for evaluation");
       }},
      {"npc", "Progression-free certificate and ratio sequences", run_npc,
       [](CLI::App* a, Options& o) {
         spec_option(a, o);
         a->add_option("--kappa", o.kappa, "kappa");
         a->add_option("--base-stage", o.baseStage, "Stage N");
         a->add_option("--horizon", o.horizon, "Last stage");
         a->add_option("--K", o.corK, "Spacer slack K");
         a->add_option("--b", o.corB, "Height ratio floor p/q");
       }},
      {"pwm", "Power weak mixing witness for a tq spec", run_pwm,
       [](CLI::App* a, Options& o) {
         spec_option(a, o);
         a->add_option("--alpha", o.alpha, "Comma separated powers alpha_1..");
         a->add_option("--b", o.b, "Comma separated shifts b_0..");
         a->add_option("--base-stage", o.baseStage, "Base stage n");
       }},
      {"non-ergodic", "Necessary matching condition and growth bound", run_non_ergodic,
       [](CLI::App* a, Options& o) {
         spec_option(a, o);
         a->add_option("--alpha", o.alpha, "Comma separated powers");
         a->add_option("--b", o.b, "Comma separated shifts");
         a->add_option("--base-stage", o.baseStage, "Stage i of the base level");
         a->add_option("--horizon", o.horizon, "Last stage");
         a->add_option("--growth-horizon", o.growthHorizon, "Last stage for the growth bound");
       }},
      {"asymmetry", "Inverse asymmetry statistic", run_asymmetry,
       [](CLI::App* a, Options& o) {
         spec_option(a, o);
         a->add_option("--level", o.level, "Level STAGE:HEIGHT");
         a->add_option("--n", o.n, "Stage n of the exponents");
         a->add_option("--eval", o.evalStage, "Evaluation stage");
         a->add_option("--adjacency", o.adjacency, "Last stage for the adjacency check");
         a->add_flag("--shifted", o.shifted, "Use exponents shifted by one");
       }},
      {"validate", "Validate a spec file or a report", run_validate,
       [](CLI::App* a, Options& o) {
         a->add_option("--spec", o.spec, "Spec file (JSON)");
         a->add_option("--report", o.reportPath, "Report file to check against the schema");
       }},
  };
}

json envelope(const std::string& command, CommandResult r, std::int64_t durationMs, int exitCode) {
  json report{{"command", command},
              {"toolVersion", std::string(kToolVersion)},
              {"specFingerprint", r.specFingerprint},
              {"inputs", std::move(r.inputs)},
              {"result", std::move(r.result)},
              {"evidence", std::move(r.evidence)},
              {"exitCode", exitCode}};
  report["reportFingerprint"] = report_fingerprint(report);
  report["durationMs"] = durationMs;
  return report;
}

CommandResult error_result(std::string_view code, const std::string& message) {
  CommandResult r;
  r.result = json{{"verdict", "n/a"}, {"error", json{{"code", std::string(code)}, {"message", message}}}};
  return r;
}

}  // namespace

CliOutcome parse_and_run(const std::vector<std::string>& args) {
  const auto start = std::chrono::steady_clock::now();
  auto elapsed = [&] {
    return static_cast<std::int64_t>(
        std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start).count());
  };

  Options o;
  CLI::App app{"Exact rank-one cutting-and-stacking toolkit", "ranklab"};
  app.require_subcommand(1);
  app.fallthrough();
  app.add_option("--json", o.jsonPath, "Write the report to this path instead of stdout");
  app.add_flag("--approx", o.approx, "Add non-authoritative decimal renderings of rationals");
  app.add_option("--jobs", o.jobs, "Worker threads for tuple enumeration")->check(CLI::Range(1u, 256u));

  const auto table = commands();
  std::map<const CLI::App*, const Command*> byApp;
  for (const auto& c : table) {
    CLI::App* sub = app.add_subcommand(c.name, c.help);
    c.options(sub, o);
    byApp[sub] = &c;
  }

  CliOutcome out;
  std::string command = args.empty() ? std::string() : args.front();
  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out.helpText = app.help();
    return out;
  } catch (const CLI::ParseError& e) {
    out.exitCode = kExitUsage;
    out.report = envelope(command, error_result("UsageError", e.what()), elapsed(), kExitUsage);
    return out;
  }
  out.jsonPath = o.jsonPath;

  const Command* chosen = nullptr;
  for (const auto& [sub, cmd] : byApp)
    if (sub->parsed()) chosen = cmd;
  if (chosen == nullptr) {
    out.exitCode = kExitUsage;
    out.report = envelope(command, error_result("UsageError", "no command given"), elapsed(), kExitUsage);
    return out;
  }
  for (const CLI::App* sub : app.get_subcommands())
    if (sub->get_help_ptr() && sub->get_help_ptr()->count() > 0) {
      out.helpText = sub->help();
      return out;
    }
  command = chosen->name;
  execution_config().jobs = o.jobs;

  CommandResult result;
  try {
    result = chosen->run(o);
    if (o.approx) {
      result.inputs["approx"] = true;
      annotate_approx(result.result);
      annotate_approx(result.evidence);
    }
    if (result.verdict) {
      out.exitCode = *result.verdict == Verdict::Fails ? kExitPropertyFails : kExitOk;
    } else {
      out.exitCode = result.propertyFails ? kExitPropertyFails : kExitOk;
    }
  } catch (const Error& e) {
    out.exitCode = e.code() == ErrorCode::UsageError ? kExitUsage : kExitRuntime;
    result = error_result(to_string(e.code()), e.what());
  } catch (const std::exception& e) {
    out.exitCode = kExitRuntime;
    result = error_result("InternalError", e.what());
  }
  out.report = envelope(command, std::move(result), elapsed(), out.exitCode);
  return out;
}

void emit_report(const json& report, const std::optional<std::string>& path) {
  const std::string text = report.dump(2) + "\n";
  if (!path || path->empty()) {
    std::cout << text;
    std::cout.flush();
    if (!std::cout) throw Error(ErrorCode::IoError, "failed to write the report to stdout");
    return;
  }
  std::ofstream f(*path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error(ErrorCode::IoError, "cannot open '" + *path + "' for writing");
  f << text;
  if (!f) throw Error(ErrorCode::IoError, "failed to write '" + *path + "'");
}

int run_cli(int argc, const char* const* argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  CliOutcome out = parse_and_run(args);
  if (out.report.is_null()) {
    std::cout << out.helpText;
    return out.exitCode;
  }
  try {
    emit_report(out.report, out.jsonPath);
  } catch (const Error& e) {
    std::cerr << e.what() << "\n";
    return kExitRuntime;
  }
  return out.exitCode;
}

}  // namespace ranklab
