#include "ranklab/serialize.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <array>
#include <cstdio>
#include <functional>
#include <set>

namespace ranklab {

using nlohmann::json;

json to_json(const Rational& r) { return json{{"num", r.numerator().str()}, {"den", r.denominator().str()}}; }

Rational rational_from_json(const json& j) {
  if (!j.is_object() || !j.contains("num") || !j.contains("den") || !j["num"].is_string() || !j["den"].is_string())
    throw Error(ErrorCode::InvalidSpec, "rational must be {\"num\": string, \"den\": string}");
  try {
    return Rational(BigInt(j["num"].get<std::string>()), BigInt(j["den"].get<std::string>()));
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    throw Error(ErrorCode::InvalidSpec, std::string("bad rational: ") + e.what());
  }
}

json to_json(const MeasureInterval& m) {
  return json{{"confirmed", to_json(m.confirmed)},
              {"unresolved", to_json(m.unresolved)},
              {"lower", to_json(m.lower())},
              {"upper", to_json(m.upper())},
              {"exact", m.exact()}};
}

json to_json(const LevelRef& l) { return json{{"stage", l.stage}, {"height", l.height}}; }

namespace {

std::string_view extension_name(ExtensionRule e) {
  switch (e) {
    case ExtensionRule::RepeatLast: return "repeat-last";
    case ExtensionRule::Family: return "family";
    case ExtensionRule::None: return "error";
  }
  return "error";
}

void reject_unknown(const json& obj, std::initializer_list<std::string_view> allowed, std::string_view where) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    const bool known = std::any_of(allowed.begin(), allowed.end(), [&](std::string_view a) { return a == it.key(); });
    if (!known) throw Error(ErrorCode::InvalidSpec, "unknown field '" + it.key() + "' in " + std::string(where));
  }
}

template <typename T>
T get_field(const json& obj, const char* key, T fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if constexpr (std::is_integral_v<T>) {
    if (!v.is_number_integer()) throw Error(ErrorCode::InvalidSpec, std::string("field '") + key + "' must be an integer");
  }
  return v.get<T>();
}

json stages_to_json(const std::vector<StageSpec>& stages) {
  json out = json::array();
  for (const auto& st : stages) out.push_back(json{{"r", st.r}, {"s", st.s}});
  return out;
}

std::vector<StageSpec> stages_from_json(const json& arr) {
  if (!arr.is_array()) throw Error(ErrorCode::InvalidSpec, "'stages' must be an array");
  std::vector<StageSpec> out;
  for (const json& st : arr) {
    if (!st.is_object()) throw Error(ErrorCode::InvalidSpec, "each stage must be an object");
    reject_unknown(st, {"r", "s"}, "stage");
    if (!st.contains("r") || !st.contains("s")) throw Error(ErrorCode::InvalidSpec, "a stage needs 'r' and 's'");
    StageSpec s;
    s.r = get_field<int>(st, "r", 0);
    if (!st["s"].is_array()) throw Error(ErrorCode::InvalidSpec, "'s' must be an array");
    for (const json& x : st["s"]) {
      if (!x.is_number_integer()) throw Error(ErrorCode::InvalidSpec, "spacer counts must be integers");
      s.s.push_back(x.get<Height>());
    }
    out.push_back(std::move(s));
  }
  return out;
}

json family_to_json(const Family& f) {
  if (const auto* p = std::get_if<InfChaconParams>(&f))
    return json{{"kind", "inf_chacon"}, {"t", p->t}, {"q", p->q}, {"m1", p->m1}, {"m0", p->m0}};
  if (const auto* p = std::get_if<TQParams>(&f))
    return json{{"kind", "tq"}, {"t", p->t}, {"positions", p->spacerPositions}};
  if (const auto* p = std::get_if<AsymmParams>(&f)) {
    json out{{"kind", "asymm"},
             {"k", p->k},
             {"stages", p->stages},
             {"separationFactor", p->separationFactor},
             {"minCut", p->minCut},
             {"boundedCut", p->boundedCut}};
    out["p"] = p->p ? json(*p->p) : json("unbounded");
    return out;
  }
  return nullptr;
}

}  // namespace

json spec_to_json(const RankOneSpec& spec) {
  json out{{"h0", spec.h0}, {"extension", extension_name(spec.extension)}};
  if (!std::holds_alternative<std::monostate>(spec.family))
    out["family"] = family_to_json(spec.family);
  else
    out["stages"] = stages_to_json(spec.stages);
  return out;
}

RankOneSpec spec_from_json(const json& j) {
  if (!j.is_object()) throw Error(ErrorCode::InvalidSpec, "spec must be a JSON object");
  reject_unknown(j, {"family", "stages", "h0", "extension"}, "spec");
  RankOneSpec spec;
  spec.h0 = get_field<Height>(j, "h0", 1);
  if (j.contains("family") && j.contains("stages"))
    throw Error(ErrorCode::InvalidSpec, "give either a family block or explicit stages, not both");

  std::string ext = "error";
  if (j.contains("extension")) {
    if (!j["extension"].is_string()) throw Error(ErrorCode::InvalidSpec, "'extension' must be a string");
    ext = j["extension"].get<std::string>();
    if (ext != "repeat-last" && ext != "error" && ext != "family")
      throw Error(ErrorCode::InvalidSpec, "unknown extension rule '" + ext + "'");
  }

  if (j.contains("family")) {
    const json& f = j["family"];
    if (!f.is_object() || !f.contains("kind") || !f["kind"].is_string())
      throw Error(ErrorCode::InvalidSpec, "family block needs a string 'kind'");
    const std::string kind = f["kind"].get<std::string>();
    if (kind == "inf_chacon") {
      reject_unknown(f, {"kind", "t", "q", "m1", "m0"}, "inf_chacon family");
      const InfChaconParams d;
      spec = [&] {
        RankOneSpec s = make_inf_chacon(get_field<int>(f, "t", d.t), get_field<int>(f, "q", d.q),
                                        get_field<Height>(f, "m1", d.m1), get_field<Height>(f, "m0", d.m0));
        s.h0 = spec.h0;
        return s;
      }();
    } else if (kind == "tq") {
      reject_unknown(f, {"kind", "t", "positions"}, "tq family");
      if (!f.contains("t") || !f.contains("positions"))
        throw Error(ErrorCode::InvalidSpec, "tq family needs 't' and 'positions'");
      const Height h0 = spec.h0;
      spec = make_tq(get_field<int>(f, "t", 0), f["positions"].get<std::vector<int>>()).spec;
      spec.h0 = h0;
    } else if (kind == "asymm") {
      reject_unknown(f, {"kind", "k", "p", "stages", "separationFactor", "minCut", "boundedCut"}, "asymm family");
      AsymmParams p;
      p.k = get_field<int>(f, "k", p.k);
      if (f.contains("p")) {
        if (f["p"].is_string()) {
          if (f["p"].get<std::string>() != "unbounded")
            throw Error(ErrorCode::InvalidSpec, "'p' must be an integer or \"unbounded\"");
          p.p = std::nullopt;
        } else {
          p.p = get_field<int>(f, "p", 0);
        }
      } else {
        p.p = 2;
      }
      p.stages = get_field<int>(f, "stages", p.stages);
      p.separationFactor = get_field<int>(f, "separationFactor", p.separationFactor);
      p.minCut = get_field<int>(f, "minCut", p.minCut);
      p.boundedCut = get_field<int>(f, "boundedCut", p.boundedCut);
      const Height h0 = spec.h0;
      spec = make_asymm_construction(p).spec;
      spec.stages.clear();
      spec.h0 = h0;
    } else if (kind == "explicit") {
      reject_unknown(f, {"kind", "stages"}, "explicit family");
      spec.stages = stages_from_json(f.value("stages", json::array()));
      spec.extension = ext == "repeat-last" ? ExtensionRule::RepeatLast : ExtensionRule::None;
      return validate_spec(spec);
    } else {
      throw Error(ErrorCode::InvalidSpec, "unknown family kind '" + kind + "'");
    }
    if (ext != "error" && ext != "family")
      throw Error(ErrorCode::InvalidSpec, "family specs extend by their own formula");
    spec.extension = ExtensionRule::Family;
    return validate_spec(spec);
  }

  if (ext == "family") throw Error(ErrorCode::InvalidSpec, "extension 'family' needs a family block");
  spec.stages = stages_from_json(j.value("stages", json::array()));
  spec.extension = ext == "repeat-last" ? ExtensionRule::RepeatLast : ExtensionRule::None;
  return validate_spec(spec);
}

std::string sha256_hex(std::string_view data) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md.data(), &len, EVP_sha256(), nullptr) != 1)
    throw Error(ErrorCode::IoError, "SHA-256 computation failed");
  std::string out;
  out.reserve(len * 2);
  for (unsigned int i = 0; i < len; ++i) {
    char buf[3];
    std::snprintf(buf, sizeof buf, "%02x", md[i]);
    out += buf;
  }
  return out;
}

std::string spec_fingerprint(const RankOneSpec& spec) { return sha256_hex(spec_to_json(spec).dump()); }

json to_json(const Certificate& c) {
  return json{{"kind", c.kind},
              {"parameters", c.parameters},
              {"verdict", to_string(c.verdict)},
              {"evidence", c.evidence},
              {"specFingerprint", c.specFingerprint},
              {"toolVersion", c.toolVersion}};
}

void annotate_approx(json& j, int digits) {
  if (j.is_object()) {
    if (j.size() == 2 && j.contains("num") && j.contains("den") && j["num"].is_string() && j["den"].is_string()) {
      j["approx"] = rational_from_json(j).approx(digits);
      return;
    }
    for (auto& [k, v] : j.items()) annotate_approx(v, digits);
  } else if (j.is_array()) {
    for (auto& v : j) annotate_approx(v, digits);
  }
}

namespace {

bool is_hex64(const json& v) {
  if (!v.is_string()) return false;
  const auto s = v.get<std::string>();
  return s.size() == 64 && std::all_of(s.begin(), s.end(), [](char c) {
           return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f');
         });
}

void check_numbers(const json& j, const std::string& path, std::vector<std::string>& errors) {
  if (j.is_number_float()) errors.push_back(path + ": floating-point number");
  if (j.is_object()) {
    if (j.contains("num") && j.contains("den")) {
      if (!j["num"].is_string() || !j["den"].is_string()) errors.push_back(path + ": rational parts must be strings");
    }
    for (auto it = j.begin(); it != j.end(); ++it) check_numbers(it.value(), path + "/" + it.key(), errors);
  } else if (j.is_array()) {
    for (std::size_t i = 0; i < j.size(); ++i) check_numbers(j[i], path + "/" + std::to_string(i), errors);
  }
}

}  // namespace

std::vector<std::string> validate_report(const json& report) {
  std::vector<std::string> errors;
  if (!report.is_object()) return {"report must be an object"};
  const std::set<std::string> required{"command", "toolVersion", "specFingerprint", "inputs",
                                       "result",  "evidence",    "durationMs",      "reportFingerprint",
                                       "exitCode"};
  for (const auto& key : required)
    if (!report.contains(key)) errors.push_back("missing field '" + key + "'");
  for (auto it = report.begin(); it != report.end(); ++it)
    if (!required.count(it.key())) errors.push_back("unexpected field '" + it.key() + "'");
  if (!errors.empty()) return errors;

  if (!report["command"].is_string()) errors.push_back("command must be a string");
  if (!report["toolVersion"].is_string()) errors.push_back("toolVersion must be a string");
  if (!(is_hex64(report["specFingerprint"]) || report["specFingerprint"] == "none"))
    errors.push_back("specFingerprint must be a SHA-256 hex digest or \"none\"");
  if (!is_hex64(report["reportFingerprint"])) errors.push_back("reportFingerprint must be a SHA-256 hex digest");
  for (const char* key : {"inputs", "result", "evidence"})
    if (!report[key].is_object()) errors.push_back(std::string(key) + " must be an object");
  if (!report["durationMs"].is_number_integer() || report["durationMs"].get<std::int64_t>() < 0)
    errors.push_back("durationMs must be a nonnegative integer");
  if (!report["exitCode"].is_number_integer()) errors.push_back("exitCode must be an integer");
  const json& result = report["result"];
  if (result.is_object() && result.contains("verdict")) {
    const json& v = result["verdict"];
    if (!(v == "holds" || v == "fails" || v == "inconclusive" || v == "n/a"))
      errors.push_back("result.verdict must be holds, fails, inconclusive or n/a");
  }
  for (const char* key : {"inputs", "result", "evidence"}) check_numbers(report[key], std::string("/") + key, errors);
  if (errors.empty() && report["reportFingerprint"] != report_fingerprint(report))
    errors.push_back("reportFingerprint does not match the report body");
  return errors;
}

std::string report_fingerprint(const json& report) {
  json body = report;
  body.erase("durationMs");
  body.erase("reportFingerprint");
  return sha256_hex(body.dump());
}

}  // namespace ranklab
