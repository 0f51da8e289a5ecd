#include "ranklab/families.hpp"
#include "ranklab/serialize.hpp"

#include <doctest.h>

using namespace ranklab;
using nlohmann::json;

TEST_CASE("rationals serialize as decimal strings") {
  const json j = to_json(Rational::of(65, 81));
  CHECK(j.dump() == R"({"den":"81","num":"65"})");
  CHECK(rational_from_json(j) == Rational::of(65, 81));
  CHECK(to_json(Rational::of(-6, 4)) == json{{"num", "-3"}, {"den", "2"}});
}

TEST_CASE("sha256 known answer") {
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("spec round trip") {
  const json family = json::parse(R"({"h0":1,"family":{"kind":"inf_chacon","t":3,"q":1,"m1":6,"m0":2}})");
  const auto spec = spec_from_json(family);
  CHECK(spec_from_json(spec_to_json(spec)).stages == spec.stages);
  CHECK(spec_fingerprint(spec_from_json(spec_to_json(spec))) == spec_fingerprint(spec));

  const json tq = json::parse(R"({"family":{"kind":"tq","t":4,"positions":[1]}})");
  CHECK(std::get<TQParams>(spec_from_json(tq).family).phi == std::vector<int>{0, 1, 3, 4});

  const json expl = json::parse(R"({"h0":1,"extension":"repeat-last","stages":[{"r":3,"s":[9,29,41]}]})");
  const auto e = spec_from_json(expl);
  CHECK(Tower::build(e, 1).height_set(0) == std::vector<Height>{0, 10, 40});
  CHECK(spec_to_json(e) == spec_to_json(spec_from_json(spec_to_json(e))));
}

TEST_CASE("fingerprints distinguish specs") {
  const auto a = spec_fingerprint(make_inf_chacon(3, 1, 6, 2));
  const auto b = spec_fingerprint(make_inf_chacon(3, 2, 6, 2));
  CHECK(a != b);
  CHECK(a.size() == 64);
}

TEST_CASE("spec parsing rejects unknown or malformed fields") {
  auto rejects = [](const char* text) {
    try {
      spec_from_json(json::parse(text));
    } catch (const Error& e) {
      return e.code() == ErrorCode::InvalidSpec || e.code() == ErrorCode::ParamOutOfRange ||
             e.code() == ErrorCode::CutTooSmall;
    }
    return false;
  };
  CHECK(rejects(R"({"h0":1,"colour":"red","stages":[{"r":2,"s":[0,0]}]})"));
  CHECK(rejects(R"({"family":{"kind":"inf_chacon","t":3,"extra":1}})"));
  CHECK(rejects(R"({"family":{"kind":"nope"}})"));
  CHECK(rejects(R"({"stages":[{"r":1,"s":[0]}]})"));
  CHECK(rejects(R"({"family":{"kind":"tq","t":3,"positions":[0]},"stages":[]})"));
}

TEST_CASE("approx annotations sit beside exact values") {
  json j{{"x", to_json(Rational::of(1, 3))}, {"list", json::array({to_json(Rational(2))})}};
  annotate_approx(j);
  CHECK(j["x"]["num"] == "1");
  CHECK(j["x"]["approx"].get<std::string>().rfind("0.3333", 0) == 0);
  CHECK(j["list"][0]["approx"].is_string());
}

TEST_CASE("report validation") {
  json r{{"command", "heights"}, {"toolVersion", "1.0.0"}, {"specFingerprint", "none"}, {"inputs", json::object()},
         {"result", json{{"verdict", "n/a"}}}, {"evidence", json::object()}, {"exitCode", 0}};
  r["reportFingerprint"] = report_fingerprint(r);
  r["durationMs"] = 3;
  CHECK(validate_report(r).empty());

  json changed = r;
  changed["durationMs"] = 99;
  CHECK(validate_report(changed).empty());
  CHECK(report_fingerprint(changed) == r["reportFingerprint"]);

  json tampered = r;
  tampered["result"]["extra"] = 1;
  CHECK_FALSE(validate_report(tampered).empty());

  json floaty = r;
  floaty["result"]["x"] = 0.5;
  floaty["reportFingerprint"] = report_fingerprint(floaty);
  CHECK_FALSE(validate_report(floaty).empty());

  json badVerdict = r;
  badVerdict["result"]["verdict"] = "maybe";
  badVerdict["reportFingerprint"] = report_fingerprint(badVerdict);
  CHECK_FALSE(validate_report(badVerdict).empty());

  json missing = r;
  missing.erase("inputs");
  CHECK_FALSE(validate_report(missing).empty());
}
