#pragma once

#include "ranklab/certificates.hpp"
#include "ranklab/construction.hpp"

#include <json.hpp>

#include <string>
#include <string_view>
#include <vector>

namespace ranklab {

/// {"num": "65", "den": "81"}; decimal strings, never floating point.
nlohmann::json to_json(const Rational& r);
Rational rational_from_json(const nlohmann::json& j);
nlohmann::json to_json(const MeasureInterval& m);
nlohmann::json to_json(const LevelRef& l);

/// Canonical form of a spec: the family block when present, otherwise the
/// explicit stages, plus h0 and the extension rule.
nlohmann::json spec_to_json(const RankOneSpec& spec);

/// Parses a spec file body. Unknown fields are rejected with InvalidSpec.
RankOneSpec spec_from_json(const nlohmann::json& j);

std::string sha256_hex(std::string_view data);

/// SHA-256 of the canonical spec serialization.
std::string spec_fingerprint(const RankOneSpec& spec);

nlohmann::json to_json(const Certificate& c);

/// Adds "approx" decimal strings next to every {"num","den"} object.
void annotate_approx(nlohmann::json& j, int digits = 12);

/// Structural check of a report against the published schema. Returns the
/// list of violations; empty means valid.
std::vector<std::string> validate_report(const nlohmann::json& report);

/// The report with durationMs and reportFingerprint removed, hashed.
std::string report_fingerprint(const nlohmann::json& report);

}  // namespace ranklab
